#!/usr/bin/env python3
"""
Test the zplab command line: JSON and CSV reports, exit codes, --dry-run and --config
"""

import io
import json
import math
import os
import sys
import tempfile
from contextlib import redirect_stdout

import mpmath

from settings import load_settings, use_settings
from zplab import main


def run_cli(*argv):
    """(exit code, captured standard output)"""
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main(list(argv))
    return code, buffer.getvalue()


def test_degrees_report():
    print("\n" + "=" * 70)
    print("TEST 1: DEGREES")
    print("=" * 70)

    code, out = run_cli('degrees', '--expr', 'z1^2 + z0^3')
    assert code == 0
    report = json.loads(out)
    assert report['deg1'] == 3
    assert report['deg2'] == 0
    assert report['sumJ'] == [1.0, 0.0]
    assert report['condition'] is True
    assert report['expression'] == 'z0^3 + z1^2'
    print(f"✅ {out.strip()}")


def test_output_is_deterministic():
    first = run_cli('eval', '--expr', 'z1^2 + z0^3', '--s', '0.5+20j')
    second = run_cli('eval', '--expr', 'z1^2 + z0^3', '--s', '0.5+20j')
    assert first == second


def test_eval_report():
    code, out = run_cli('eval', '--expr', 'z0', '--s', '2')
    assert code == 0
    report = json.loads(out)
    assert abs(report['value'][0] - math.pi ** 2 / 6) < 1e-12
    assert report['value'][1] == 0.0
    assert report['error_bound'] < 1e-10

    code, out = run_cli('eval', '--expr', 'z0', '--s', '0', '--derivative')
    assert code == 0
    assert abs(json.loads(out)['value'][0] + 0.5 * math.log(2 * math.pi)) < 1e-11


def test_condition_violation_exits_2():
    print("\n" + "=" * 70)
    print("TEST 2: INPUT ERRORS")
    print("=" * 70)

    code, out = run_cli('verify', '--expr', 'z0*z2 - z1^2', '--theorem', 'T3', '--T', '100')
    assert code == 2
    error = json.loads(out)
    assert error['success'] is False
    assert error['error_type'] == 'ConditionViolated'
    assert 'violated' in error['error']
    print(f"✅ exit {code}: {error['error']}")


def test_syntax_error_shows_grammar():
    code, out = run_cli('degrees', '--expr', 'z0 + + z1')
    assert code == 2
    error = json.loads(out)
    assert error['error_type'] == 'ExpressionSyntaxError'
    assert 'position 5' in error['error']
    assert 'expression :=' in error['grammar']


def test_missing_and_invalid_parameters():
    assert run_cli('count', '--expr', 'z0')[0] == 2
    assert run_cli('count', '--expr', 'z0', '--T', '5')[0] == 2
    assert run_cli('cluster', '--expr', 'z0', '--n', '3', '--epsilon', '1.5')[0] == 2
    assert run_cli('verify', '--expr', 'z0', '--theorem', 'T8', '--T', '100')[0] == 2
    assert run_cli('eval', '--expr', 'z0', '--s', '1')[0] == 2
    assert run_cli('degrees', '--expr', '3')[0] == 2
    assert run_cli('no-such-command')[0] == 2


def test_points_with_negative_real_part():
    expected = complex(mpmath.zeta(mpmath.mpc(-4, 0.5)))
    for flag in ('--s=-4+0.5j', '--s=-4,0.5'):
        code, out = run_cli('eval', '--expr', 'z0', flag)
        assert code == 0, flag
        value = json.loads(out)['value']
        assert abs(complex(*value) - expected) < 1e-12
    assert run_cli('eval', '--expr', 'z0', '--s', '0.5,14')[0] == 0
    code, out = run_cli('eval', '--help')
    assert code == 0
    assert '--s=-4+0.5j' in out


def test_non_finite_coefficient_exits_2():
    code, out = run_cli('degrees', '--expr', '1e999*z0')
    assert code == 2
    error = json.loads(out)
    assert error['error_type'] == 'ExpressionSyntaxError'
    assert 'position 0' in error['error']


def test_dry_run_does_not_evaluate():
    code, out = run_cli('count', '--expr', 'z0', '--T', '100', '--dry-run')
    assert code == 0
    plan = json.loads(out)
    assert plan['dry_run'] is True
    assert plan['command'] == 'count'
    assert plan['parameters'] == {'T': 100.0}

    code, out = run_cli('powersum', '--expr', 'z1', '--x', '3/2', '--T', '300', '--dry-run')
    assert code == 0
    assert json.loads(out)['parameters']['x'] == '3/2'
    print("✅ dry runs print the plan")


def test_coefficients_as_csv():
    code, out = run_cli('coeffs', '--expr', 'z0^2', '--N', '12', '--format', 'csv')
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == 'n,eta_re,eta_im'
    assert lines[6] == '6,4,0'


def test_lattice_report():
    code, out = run_cli('logderiv', '--expr', 'z0', '--X', '10', '--x', '6')
    assert code == 0
    report = json.loads(out)
    assert abs(report['alpha']['2/1'][0] + math.log(2)) < 1e-12
    assert report['x'] == '6'
    assert abs(report['alpha_x'][0]) < 1e-12


def test_cluster_report():
    code, out = run_cli('cluster', '--expr', 'z0', '--n', '2')
    assert code == 0
    report = json.loads(out)
    assert report['count'] == 1 == report['deg1']


def test_config_file_and_output_path():
    print("\n" + "=" * 70)
    print("TEST 3: CONFIG FILE AND OUTPUT PATH")
    print("=" * 70)

    with tempfile.TemporaryDirectory() as tmp:
        config_path = os.path.join(tmp, 'run.json')
        report_path = os.path.join(tmp, 'report.json')
        with open(config_path, 'w') as f:
            json.dump({'expression': 'z0', 's': '2', 'output': {'significantDigits': 6}}, f)

        code, out = run_cli('eval', '--config', config_path, '--output', report_path)
        assert code == 0
        assert out == ''
        with open(report_path) as f:
            report = json.load(f)
        assert report['value'][0] == 1.64493

        code, out = run_cli('eval', '--config', config_path, '--s', '3')
        assert json.loads(out)['value'][0] == 1.20206

        with open(config_path, 'w') as f:
            f.write('{not json')
        code, out = run_cli('eval', '--config', config_path)
        assert code == 2
        assert json.loads(out)['error_type'] == 'ConfigError'
    use_settings(load_settings())
    print("✅ config values, flag overrides and --output")


def main_tests():
    print("\n" + "█" * 70)
    print("ZPLAB COMMAND LINE TESTS")
    print("█" * 70)
    failed = 0
    tests = [v for k, v in sorted(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        try:
            test()
        except Exception as e:
            failed += 1
            print(f"❌ {test.__name__}: {e!r}")
    print("\n" + "=" * 70)
    print(f"{len(tests) - failed}/{len(tests)} passed")
    print("=" * 70)
    return 1 if failed else 0


if __name__ == '__main__':
    sys.exit(main_tests())
