#!/usr/bin/env python3
"""
Test the zeta engine against closed forms and mpmath
"""

import math
import random
import sys

import mpmath
import pytest

from poly_expr import build_expression, parse_expression
from zeta_engine import (
    EvalRequest, chi, evaluate_F, evaluate_F_derivative, evaluate_F_pair,
    evaluate_F_with_error, evaluate_shape, gamma, log_derivative, log_gamma,
    zeta_derivative,
)
from zplab_errors import (
    PoleAt1, PoleAtNonPositiveInteger, PoleHit, PrecisionUnreachable, RangeExceeded,
)

mpmath.mp.dps = 30


def _oracle_zeta(s, k=0):
    return complex(mpmath.zeta(mpmath.mpc(s.real, s.imag), 1, k))


def test_classical_values():
    print("\n" + "=" * 70)
    print("TEST 1: CLASSICAL VALUES")
    print("=" * 70)

    assert abs(complex(zeta_derivative(EvalRequest(2))) - math.pi ** 2 / 6) <= 1e-12
    assert abs(complex(zeta_derivative(EvalRequest(0))) + 0.5) <= 1e-12
    assert abs(complex(zeta_derivative(EvalRequest(0, 1))) + 0.5 * math.log(2 * math.pi)) <= 1e-11
    assert abs(complex(zeta_derivative(EvalRequest(-1))) + 1 / 12) <= 1e-11
    assert abs(complex(zeta_derivative(EvalRequest(0.5 + 14.134725141734695j)))) < 1e-9
    print("✅ zeta(2), zeta(0), zeta'(0), zeta(-1) and the first zero")


@pytest.mark.parametrize('s', [2 + 0j, 0.5 + 10j, 3 - 20j, -3 + 2j, -8 + 5j, -9 - 3j, 0.25 + 150j])
def test_derivatives_match_mpmath(s):
    for k in range(4):
        value = complex(zeta_derivative(EvalRequest(s, k)))
        expected = _oracle_zeta(s, k)
        assert abs(value - expected) <= 1e-9 * max(1.0, abs(expected)), (s, k)


def test_gamma_and_chi():
    print("\n" + "=" * 70)
    print("TEST 2: GAMMA AND CHI")
    print("=" * 70)

    assert abs(complex(gamma(1)) - 1) < 1e-14
    assert abs(complex(gamma(0.5)) - math.sqrt(math.pi)) < 1e-14
    for s in [1 + 5j, -0.5 + 1j, 3.7 - 2.2j, -4.5 + 0.3j]:
        expected = complex(mpmath.gamma(mpmath.mpc(s.real, s.imag)))
        assert abs(complex(gamma(s)) - expected) <= 1e-12 * abs(expected), s
    assert abs(complex(log_gamma(0.5)) - 0.5 * math.log(math.pi)) < 1e-14

    assert abs(complex(chi(0.5)) - 1) < 1e-12
    chain = complex(chi(-1)) * math.pi ** 2 / 6
    assert abs(chain + 1 / 12) < 1e-12
    ratio = abs(complex(chi(0.3 + 50j))) / (50 / (2 * math.pi)) ** 0.2
    assert abs(ratio - 1) < 0.02
    print("✅ Gamma, log Gamma and chi")


def test_chi_matches_functional_equation():
    for s in [0.2 + 3j, -2.5 + 7j, 2.5 - 4j]:
        lhs = _oracle_zeta(s)
        rhs = complex(chi(s)) * _oracle_zeta(1 - s)
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


def test_poles_and_ranges():
    with pytest.raises(PoleAt1):
        zeta_derivative(EvalRequest(1))
    with pytest.raises(PoleAt1):
        evaluate_F(parse_expression("z0"), 1)
    for s in [0, -3]:
        with pytest.raises(PoleAtNonPositiveInteger):
            gamma(s)
    with pytest.raises(PoleHit):
        chi(3)
    with pytest.raises(RangeExceeded):
        zeta_derivative(EvalRequest(2, 21))
    with pytest.raises(RangeExceeded):
        evaluate_F_derivative(parse_expression("z20"), 2)
    with pytest.raises(RangeExceeded):
        zeta_derivative(EvalRequest(0.5 + 2e5j))
    with pytest.raises(PrecisionUnreachable):
        zeta_derivative(EvalRequest(2, 0, 1e-20))
    print("✅ poles, derivative ceiling, height and precision limits")


def test_evaluate_F_examples():
    print("\n" + "=" * 70)
    print("TEST 3: POLYNOMIALS IN ZETA DERIVATIVES")
    print("=" * 70)

    assert abs(complex(evaluate_F(parse_expression("z0"), 2)) - math.pi ** 2 / 6) < 1e-12

    expr = parse_expression("z1^2 + z0^3")
    expected = _oracle_zeta(2, 1) ** 2 + _oracle_zeta(2) ** 3
    value, error = evaluate_F_with_error(expr, 2, 1e-12)
    assert abs(complex(value) - expected) < 1e-10
    assert float(error) <= 1e-12

    d = complex(evaluate_F_derivative(parse_expression("z1^2"), 3))
    assert abs(d - 2 * _oracle_zeta(3, 1) * _oracle_zeta(3, 2)) < 1e-10

    assert abs(complex(evaluate_F_derivative(parse_expression("z0"), 0)) + 0.5 * math.log(2 * math.pi)) < 1e-11

    cancelled = build_expression([(1, (2,)), (-1, (2,))], merge=False)
    for s in [0.5 + 3j, -7 + 12j, 4 - 40j]:
        assert abs(complex(evaluate_F(cancelled, s))) < 1e-12
    print("✅ F and F' against mpmath")


def test_derivative_matches_finite_difference():
    expr = parse_expression("z1^2 + z0^3")
    s, h = 2 + 10j, 1e-5
    fd = (complex(evaluate_F(expr, s + h)) - complex(evaluate_F(expr, s - h))) / (2 * h)
    assert abs(fd - complex(evaluate_F_derivative(expr, s))) < 1e-6

    f, df = evaluate_F_pair(expr, s)
    assert abs(complex(f) - complex(evaluate_F(expr, s))) < 1e-14
    assert abs(complex(df) - complex(evaluate_F_derivative(expr, s))) < 1e-12
    assert abs(complex(log_derivative(expr, s)) - complex(df) / complex(f)) < 1e-12


def test_conjugation_symmetry():
    expr = parse_expression("z1^2 + z0^3")
    rng = random.Random(7)
    for _ in range(100):
        s = complex(rng.uniform(-4, 6), rng.uniform(-30, 30))
        f = complex(evaluate_F(expr, s))
        f_conj = complex(evaluate_F(expr, s.conjugate()))
        assert abs(f_conj - f.conjugate()) <= 1e-11 * max(1.0, abs(f))


def test_shape_dominates_far_left():
    expr = parse_expression("z0")
    s = -20 + 3j
    f = complex(evaluate_F(expr, s))
    shape = complex(evaluate_shape(expr, s))
    assert abs(f - shape) < 1e-5 * abs(shape)


def test_functional_equation_from_engine_values():
    rng = random.Random(5)
    for _ in range(100):
        s = complex(rng.uniform(0.01, 0.99), rng.uniform(2, 100))
        lhs = complex(zeta_derivative(EvalRequest(s)))
        factor = complex(chi(s))
        rhs = factor * complex(zeta_derivative(EvalRequest(1 - s)))
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(factor)) + 1e-13 * abs(rhs), s


def test_derivatives_agree_with_central_differences():
    h = 1e-5
    for s in [2 + 1j, 0.5 + 10j, 3 - 7j, -2 + 3j, -4.5 + 1j, -7 + 2j]:
        for k in range(5):
            up = complex(zeta_derivative(EvalRequest(s + h, k)))
            down = complex(zeta_derivative(EvalRequest(s - h, k)))
            exact = complex(zeta_derivative(EvalRequest(s, k + 1)))
            assert abs((up - down) / (2 * h) - exact) <= 1e-6 * max(1.0, abs(exact)), (s, k)
    print("✅ zeta^(k+1) matches central differences of zeta^(k) for k <= 4")


def test_tighter_targets_never_lose_accuracy():
    for s in [2 + 1j, 0.5 + 10j, -3 + 2j, -4 + 0.5j]:
        for k in range(3):
            expected = _oracle_zeta(s, k)
            target, previous = 1e-6, None
            while target >= 1e-13:
                error = abs(complex(zeta_derivative(EvalRequest(s, k, target))) - expected)
                assert error <= target, (s, k, target)
                if previous is not None:
                    assert error <= max(previous, target)
                previous, target = error, target / 2


def test_left_half_plane_points():
    for s in [-4 + 0.5j, -4.9 + 1j, -3 + 2j]:
        for k in range(4):
            value = complex(zeta_derivative(EvalRequest(s, k)))
            assert abs(value - _oracle_zeta(s, k)) <= 1e-12 * max(1.0, abs(value)), (s, k)

    s = -3 + 20000j
    with pytest.raises(PrecisionUnreachable):
        zeta_derivative(EvalRequest(s, 1))
    value = complex(zeta_derivative(EvalRequest(s, 1, 10.0)))
    expected = _oracle_zeta(s, 1)
    assert abs(value - expected) <= 1e-9 * abs(expected)
    print(f"✅ zeta'(-3 + 20000i) = {value:.6e} within an absolute bound of 10")


def main():
    print("\n" + "█" * 70)
    print("ZETA ENGINE TESTS")
    print("█" * 70)
    failed = 0
    tests = [v for k, v in sorted(globals().items()) if k.startswith('test_') and callable(v)]
    for test in tests:
        try:
            if test is test_derivatives_match_mpmath:
                for s in [2 + 0j, 0.5 + 10j, -8 + 5j]:
                    test(s)
            else:
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
