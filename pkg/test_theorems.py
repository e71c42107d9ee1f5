#!/usr/bin/env python3
"""
Test theorem predictions, verification reports and equidistribution statistics
"""

import math
import random
import sys
from unittest.mock import patch

import pytest

from poly_expr import parse_expression
from settings import get_setting
from theorems import (
    VerificationReport, _abscissae_to_height, beta_sum, certified_zeros, power_sum,
    predict_beta_sum, predict_count, run_theorem, theorem_region, verify_beta_sum,
    verify_count, verify_trivial_clusters, verify_zero_free, weyl_statistics,
)
from zero_finder import Rectangle, ZeroRecord
from zplab_errors import ConditionViolated, RangeExceeded, TooFewZeros

Z0 = parse_expression("z0")
Z1 = parse_expression("z1")
CANCELLED = parse_expression("z0*z2 - z1^2")


def _zeros_at(gammas, beta=0.5):
    return [ZeroRecord(complex(beta, g), 1, 0.0, 1e-3) for g in gammas]


def test_predicted_counts():
    print("\n" + "=" * 70)
    print("TEST 1: PREDICTED COUNTS")
    print("=" * 70)

    assert abs(predict_count(Z0, 100) - 28.127) < 1e-3
    assert abs(predict_count(Z1, 100) - 17.095) < 1e-3
    scale = 100 / (2 * math.pi)
    cubic = predict_count(parse_expression("z1^2 + z0^3"), 100)
    assert abs(cubic - 3 * scale * math.log(100 / (2 * math.pi * math.e))) < 1e-9
    with pytest.raises(RangeExceeded):
        predict_count(Z0, 5)
    print(f"✅ N(z0, 100) = {predict_count(Z0, 100):.3f}, N(z1, 100) = {predict_count(Z1, 100):.3f}")


def test_predicted_beta_sums():
    T = U = 200.0
    assert abs(predict_beta_sum(Z0, T, U)) < 1e-12
    constant = (predict_beta_sum(Z1, T, U) - U * math.log(math.log(T))) / U
    assert abs(constant - math.log(math.sqrt(2) / math.log(2))) < 1e-12
    cubic = predict_beta_sum(parse_expression("z1^2 + z0^3"), T, U)
    assert abs(cubic) < 1e-9


def test_beta_and_power_sums_of_synthetic_zeros():
    zeros = _zeros_at([14.0, 21.0]) + [ZeroRecord(0.7 + 30j, 2, 0.0, 1e-3)]
    assert abs(beta_sum(zeros) - 2 * math.pi * 0.4) < 1e-12
    assert beta_sum(zeros, delta=0.1) == 0.0
    expected = 2 ** (0.5 + 14j) + 2 ** (0.5 + 21j) + 2 * 2 ** (0.7 + 30j)
    assert abs(power_sum(zeros, 2) - expected) < 1e-12


def test_report_schema_and_verdicts():
    print("\n" + "=" * 70)
    print("TEST 2: VERIFICATION REPORTS")
    print("=" * 70)

    report = VerificationReport('T3', {'T': 100.0}, 28.127, 29, 3 * math.log(100), zero_count=29)
    assert report.verdict == 'pass'
    assert abs(report.discrepancy - 0.873) < 1e-9
    d = report.to_dict()
    assert list(d) == ['theorem_id', 'params', 'predicted', 'measured', 'discrepancy',
                       'tolerance', 'verdict', 'zero_count', 'runtime_ms']
    assert d['predicted'] == 28.127 and d['measured'] == 29.0

    failing = VerificationReport('T6', {'x': 2}, complex(-5, 0), complex(20, 1), 1.0)
    assert failing.verdict == 'fail'
    assert failing.to_dict()['measured'] == [20.0, 1.0]
    print("✅ report fields and pass/fail verdicts")


def test_condition_is_required():
    with pytest.raises(ConditionViolated):
        verify_count(CANCELLED, 100)
    with pytest.raises(ConditionViolated):
        run_theorem(CANCELLED, 'T3', {'T': 100})
    with pytest.raises(RangeExceeded):
        run_theorem(Z0, 'T9', {'T': 100})


def test_weyl_statistics_of_constant_sequence():
    stats = weyl_statistics(_zeros_at([7.0] * 60), alpha=0.3)
    assert abs(abs(stats.weyl_sums[1]) - 1) < 1e-12
    assert stats.star_discrepancy >= 0.5


def test_weyl_statistics_of_equidistributed_grid():
    N, alpha = 100, 0.25
    stats = weyl_statistics(_zeros_at([n / N / alpha for n in range(1, N + 1)]), alpha, m_max=5)
    assert stats.max_abs_sum < 1e-9
    assert stats.star_discrepancy <= 1 / N + 1e-9
    assert stats.weyl_sums[-2] == stats.weyl_sums[2].conjugate()


def test_weyl_statistics_bounds():
    rng = random.Random(11)
    for _ in range(20):
        gammas = [rng.uniform(10, 500) for _ in range(rng.randint(50, 200))]
        stats = weyl_statistics(_zeros_at(gammas), math.log(2) / (2 * math.pi), m_max=5)
        assert all(abs(v) <= 1 + 1e-12 for v in stats.weyl_sums.values())
        assert stats.star_discrepancy >= abs(stats.weyl_sums[1]) / 4

    with pytest.raises(TooFewZeros):
        weyl_statistics(_zeros_at([14.0] * 10), 0.1)
    with pytest.raises(RangeExceeded):
        weyl_statistics(_zeros_at([14.0] * 60), 0)


def test_verify_count_for_zeta():
    print("\n" + "=" * 70)
    print("TEST 3: THEOREM RUNS FOR ZETA")
    print("=" * 70)

    report = verify_count(Z0, 50)
    assert report.measured == 10
    assert report.verdict == 'pass'
    assert report.runtime_ms is not None
    print(f"✅ T3: measured {report.measured}, predicted {report.predicted:.3f}")


def test_zeta_zero_free_strips_and_clusters():
    report = verify_zero_free(Z0, 30)
    assert report.measured == 0
    assert report.verdict == 'pass'
    assert report.details['E1F_empirical'] is True

    report = verify_trivial_clusters(Z0, [1, 2, 3], 0.5)
    assert report.measured == 1 == report.predicted
    assert report.verdict == 'pass'
    assert report.details['counts'] == {'1': 1, '2': 1, '3': 1}
    print("✅ T1 and T2 for zeta")


def test_uncertified_zeros_are_left_out_of_statistics():
    good = _zeros_at([101.0, 150.0])
    bad = ZeroRecord(4.33 + 113.0j, 1, 0.5, 0.0, certified=False)
    region = Rectangle(-1.0, 3.0, 100.0, 200.0)
    with patch('theorems.theorem_region', return_value=region), \
            patch('theorems.shared_zeros', return_value=tuple(good + [bad])):
        zeros, dropped = certified_zeros(Z1, 100.0, 200.0)
        report = verify_beta_sum(Z1, 100.0, 100.0)
    assert zeros == good and dropped == 1
    assert report.measured == 0.0
    assert report.zero_count == 2
    assert report.verdict == 'inconclusive'
    assert report.details['uncertified_zeros'] == 1
    print("✅ an uncertified zero makes T4 inconclusive and stays out of the beta sum")


def test_left_scan_reaches_the_theorem_height():
    _abscissae_to_height.cache_clear()
    with patch('theorems.zero_free_left_scan', return_value=-2.0) as scan, \
            patch('theorems.zero_free_right', return_value=3.0):
        assert theorem_region(Z0, 1.0, 80.0) == Rectangle(-2.0, 3.0, 1.0, 80.0)
        assert scan.call_args.kwargs['t_max'] == 80.0
        theorem_region(Z0, 1.0, 30.0)
        assert scan.call_args.kwargs['t_max'] == get_setting('dirichlet.leftTMax')
        theorem_region(Z0, 60.0, 80.0)
        assert scan.call_count == 2
    _abscissae_to_height.cache_clear()


def main():
    print("\n" + "█" * 70)
    print("THEOREM VERIFICATION TESTS")
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
    sys.exit(main())
