"""
Zeta Engine
Evaluates zeta(s) and its derivatives, Gamma(s), chi(s) and polynomials F(s)
in zeta, zeta', ..., zeta^(k) with an explicit absolute-error contract.

zeta^(k) comes from Euler-Maclaurin summation differentiated term by term:
every term is carried as a truncated power series in the displacement from s,
so one pass yields zeta, zeta', ..., zeta^(k) together with error bounds.
Left of Re s = reflectBelow the functional equation zeta(s) = chi(s) zeta(1-s)
is used instead. All internal arithmetic is numpy longdouble.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from power_series import PowerSeries, CLD, LD
from poly_expr import differentiate
from settings import get_setting
from zplab_errors import (
    NonFiniteValue, PoleAt1, PoleAtNonPositiveInteger, PoleHit,
    PrecisionUnreachable, RangeExceeded,
)

logger = logging.getLogger(__name__)

PI = LD(4) * np.arctan(LD(1))
LOG_2 = np.log(LD(2))
LOG_PI = np.log(PI)
LOG_2PI = np.log(2 * PI)
EPS = LD(np.finfo(LD).eps)

# ComplexValue is numpy's extended complex scalar; Python complex is accepted on input
ComplexValue = CLD


@dataclass(frozen=True)
class EvalRequest:
    s: complex
    k: int = 0
    target_abs_err: float = 1e-12

    def validate(self):
        max_k = get_setting('engine.maxDerivative')
        if not 0 <= self.k <= max_k:
            raise RangeExceeded(f"derivative order {self.k} outside [0, {max_k}]")
        if self.target_abs_err < get_setting('engine.minTargetError'):
            raise PrecisionUnreachable(
                f"target_abs_err {self.target_abs_err} below the supported "
                f"{get_setting('engine.minTargetError')}")
        _check_point(self.s)


# =============================================================================
# PRECOMPUTED TABLES
# =============================================================================

def _mp_to_ld(x):
    return LD(mpmath.nstr(x, 30))


@lru_cache(maxsize=1)
def _bernoulli_tables():
    """B_2j/(2j)! for Euler-Maclaurin and B_2j/(2j(2j-1)) for Stirling, j = 1..p+1"""
    terms = get_setting('engine.bernoulliTerms')
    with mpmath.workdps(40):
        em, stirling = [], []
        for j in range(1, terms + 2):
            p, q = mpmath.bernfrac(2 * j)
            b = mpmath.mpf(p) / q
            em.append(_mp_to_ld(b / mpmath.factorial(2 * j)))
            stirling.append(_mp_to_ld(b / (2 * j * (2 * j - 1))))
    return np.array(em, dtype=LD), np.array(stirling, dtype=LD)


@lru_cache(maxsize=16)
def _log_table(n_terms):
    """log n for n = 1 .. n_terms - 1"""
    return np.log(np.arange(1, n_terms, dtype=LD))


# =============================================================================
# VALIDATION HELPERS
# =============================================================================

def _check_point(s):
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise NonFiniteValue(f"non-finite argument {s}")
    if s == 1:
        raise PoleAt1("zeta has a pole at s = 1")
    max_height = get_setting('engine.maxHeight')
    if abs(s.imag) > max_height:
        raise RangeExceeded(f"|Im s| = {abs(s.imag)} exceeds the validated height {max_height}")


def _is_nonpositive_integer(s):
    s = complex(s)
    return s.imag == 0 and s.real <= 0 and s.real == round(s.real)


def _finite(value, what):
    if not np.isfinite(value):
        raise NonFiniteValue(f"{what} is not finite")
    return value


# =============================================================================
# EULER-MACLAURIN KERNEL
# =============================================================================

def default_terms(s):
    """N = max(minTerms, termsPerHeight * |Im s|)"""
    s = complex(s)
    n = max(get_setting('engine.minTerms'),
            int(math.ceil(get_setting('engine.termsPerHeight') * abs(s.imag))))
    # keep (s)_{2p}/N^{2p} small when |s| is dominated by a negative real part
    return max(n, int(math.ceil(abs(s) / 3.0)))


def _remainder_bound(s, n_terms):
    """Bound on |R| over the disk |z - s| <= 1 (Cauchy bound for the jet coefficients)"""
    em, _ = _bernoulli_tables()
    p = len(em) - 1
    s = complex(s)
    sigma = s.real - 1
    if sigma + 2 * p + 1 <= 0:
        return np.inf
    a = abs(s) + 1
    log_bound = float(np.log(abs(em[p])))
    log_bound += sum(math.log(a + i) for i in range(2 * p + 1))
    log_bound += (-sigma - 2 * p - 1) * math.log(n_terms)
    log_bound += math.log((a + 2 * p + 1) / (sigma + 2 * p + 1))
    return math.exp(log_bound) if log_bound < 700 else np.inf


def _euler_maclaurin_jet(s, order, n_terms):
    """Taylor coefficients zeta^(m)(s)/m! for m <= order, and their error bounds"""
    em, _ = _bernoulli_tables()
    s = CLD(s)
    logs = _log_table(n_terms)

    base = np.exp(-s * logs)
    abs_base = np.abs(base)
    main = np.zeros(order + 1, dtype=CLD)
    abs_sums = np.zeros(order + 1, dtype=LD)
    pw = np.ones_like(logs)
    for m in range(order + 1):
        main[m] = np.sum(base * pw)
        abs_sums[m] = np.sum(abs_base * np.abs(pw))
        pw = pw * (-logs) / (m + 1)

    log_n = np.log(LD(n_terms))
    n_pow = PowerSeries.exp_linear(-s * log_n, -log_n, order)   # N^{-s-x}
    pole = 1 / PowerSeries.variable(s - 1, order)                # 1/(s-1+x)
    corrections = n_terms * n_pow * pole + n_pow / 2

    poly = PowerSeries.variable(s, order)
    bern = poly * (em[0] / LD(n_terms))
    for j in range(2, len(em)):
        poly = poly.mul_linear(s + 2 * j - 3).mul_linear(s + 2 * j - 2)
        bern = bern + poly * (em[j - 1] * LD(n_terms) ** (1 - 2 * j))
    corrections = corrections + n_pow * bern

    coeffs = main + corrections.c
    remainder = LD(_remainder_bound(s, n_terms))
    # phase of n^-s carries an absolute error near EPS |s| log n
    rounding = EPS * (16 + abs(complex(s)) * float(log_n)) * (abs_sums + np.abs(corrections.c))
    return PowerSeries(coeffs), remainder + rounding


def _reflected_jet(s, order):
    """zeta(s + x) = chi(s + x) zeta(1 - s - x)"""
    w = 1 - complex(s)
    jet_w, err_w = _euler_maclaurin_jet(w, order, default_terms(w))
    chi = chi_jet(s, order)
    value = chi * jet_w.shift_sign()
    chi_mass = np.sum(np.abs(chi.c))
    phase = 16 + abs(complex(s)) * math.log(abs(complex(s)) + 2)
    err = chi_mass * np.max(err_w) + EPS * phase * np.abs(value.c)
    return value, err


def zeta_jet(s, order, n_terms=None):
    """Taylor coefficients of zeta at s up to `order`, with absolute error bounds

    Returns (PowerSeries, numpy array of per-coefficient bounds).
    """
    _check_point(s)
    if complex(s).real < get_setting('engine.reflectBelow'):
        return _reflected_jet(s, order)
    if n_terms is None:
        n_terms = default_terms(s)
    return _euler_maclaurin_jet(s, order, n_terms)


def _bound_of(value):
    value = float(value)
    return value if math.isfinite(value) else math.inf


def best_jet(s, order, measure, target=None):
    """(jet, err, bound) from the first evaluation path whose measured bound meets target

    measure(jet, err) turns per-coefficient bounds into the bound the caller needs.
    Euler-Maclaurin with default_terms(s) goes first. On a miss, points left of
    reflectFallbackBelow try the reflected jet, then N walks down and up by
    factors of two while the bound keeps shrinking: for Re s < 0 the rounding
    term grows like N^(1 - Re s). The best candidate is returned even on a miss.
    """
    _check_point(s)
    if complex(s).real < get_setting('engine.reflectBelow'):
        jet, err = _reflected_jet(s, order)
        return jet, err, _bound_of(measure(jet, err))

    def attempt(n_terms):
        jet, err = _euler_maclaurin_jet(s, order, n_terms)
        return jet, err, _bound_of(measure(jet, err))

    start = default_terms(s)
    first = best = attempt(start)
    if target is None or best[2] <= target:
        return best

    if complex(s).real < get_setting('engine.reflectFallbackBelow'):
        jet, err = _reflected_jet(s, order)
        reflected = (jet, err, _bound_of(measure(jet, err)))
        if reflected[2] < best[2]:
            best = reflected
            if best[2] <= target:
                return best

    floor, ceiling = get_setting('engine.minSearchTerms'), get_setting('engine.maxTerms')
    for factor in (0.5, 2.0):
        n_terms, previous = start, first[2]
        while True:
            n_terms = int(n_terms * factor)
            if not floor <= n_terms <= ceiling:
                break
            candidate = attempt(n_terms)
            logger.debug("N = %d at s = %s: bound %.3g", n_terms, s, candidate[2])
            if candidate[2] >= previous:
                break
            previous = candidate[2]
            if candidate[2] < best[2]:
                best = candidate
                if best[2] <= target:
                    return best
    return best


def zeta_derivative(req):
    """zeta^(k)(s) to within req.target_abs_err"""
    req.validate()
    scale = math.factorial(req.k)
    jet, _, bound = best_jet(req.s, req.k, lambda jet, err: err[req.k] * scale, req.target_abs_err)
    if bound > req.target_abs_err:
        raise PrecisionUnreachable(
            f"error bound {bound:.3g} exceeds target {req.target_abs_err:.3g} at s = {req.s}")
    return _finite(jet.c[req.k] * scale, 'zeta derivative')


# =============================================================================
# GAMMA AND CHI
# =============================================================================

def _log_series_of_linear(a, order):
    """Series of log(a + x)"""
    c = np.zeros(order + 1, dtype=CLD)
    a = CLD(a)
    c[0] = np.log(a)
    for m in range(1, order + 1):
        c[m] = (-1) ** (m + 1) / (m * a ** m)
    return PowerSeries(c)


def log_gamma_jet(z, order):
    """Series of log Gamma(z + x) for Re z >= 1/2 (Stirling series after an upward shift)"""
    _, stirling = _bernoulli_tables()
    z = CLD(z)
    radius = get_setting('engine.gammaShiftRadius')
    shift = 0 if abs(complex(z)) >= radius else int(math.ceil(radius - float(z.real)))
    w = PowerSeries.variable(z + shift, order)
    inv = 1 / w
    inv2 = inv * inv
    term = inv
    acc = term * stirling[0]
    for coef in stirling[1:-1]:
        term = term * inv2
        acc = acc + term * coef
    ans = (w - LD(0.5)) * w.log() - w + LOG_2PI / 2 + acc
    for i in range(shift):
        ans = ans - _log_series_of_linear(z + i, order)
    return ans


def _log_sin(a):
    """log sin(a) without overflow for large |Im a|"""
    if abs(float(a.imag)) < 20:
        return np.log(np.sin(a))
    if a.imag > 0:
        return -1j * a + np.log(1 - np.exp(2j * a)) - np.log(CLD(-2j))
    return 1j * a + np.log(1 - np.exp(-2j * a)) - np.log(CLD(2j))


def _cot(a):
    if a.imag >= 0:
        e = np.exp(2j * a)
        return 1j * (e + 1) / (e - 1)
    e = np.exp(-2j * a)
    return 1j * (1 + e) / (1 - e)


def _trig_linear(a, b, order, fn):
    """Series of sin(a + b x) (fn='sin') or cos(a + b x) (fn='cos') for moderate Im a"""
    c = np.zeros(order + 1, dtype=CLD)
    s_a, c_a = np.sin(a), np.cos(a)
    cycle = (s_a, c_a, -s_a, -c_a) if fn == 'sin' else (c_a, -s_a, -c_a, s_a)
    bm = CLD(1)
    for m in range(order + 1):
        c[m] = cycle[m % 4] * bm
        bm = bm * b / (m + 1)
    return PowerSeries(c)


def _log_sin_linear(a, b, order):
    """Series of log sin(a + b x) = log sin a + log(cos bx + cot(a) sin bx)"""
    cot_a = _cot(a)
    ratio = _trig_linear(CLD(0), b, order, 'cos') + _trig_linear(CLD(0), b, order, 'sin') * cot_a
    ans = ratio.log()
    ans.c[0] = _log_sin(a)
    return ans


def _chi_jet_left(s, order):
    """chi(s + x) = 2^(s+x) pi^(s+x-1) sin(pi(s+x)/2) Gamma(1-s-x), Re s <= 1/2"""
    s = CLD(s)
    linear = PowerSeries([s * LOG_2 + (s - 1) * LOG_PI, LOG_2 + LOG_PI], order=order)
    log_gamma = log_gamma_jet(1 - s, order).shift_sign()
    a = PI * s / 2
    b = PI / 2
    if abs(float(a.imag)) < 20:
        return (linear + log_gamma).exp() * _trig_linear(a, b, order, 'sin')
    return (linear + log_gamma + _log_sin_linear(a, b, order)).exp()


def chi_jet(s, order):
    """Taylor coefficients of chi at s; uses chi(s) chi(1-s) = 1 for Re s > 1/2"""
    z = complex(s)
    if z.imag == 0 and z.real > 0 and z.real % 2 == 1:
        raise PoleHit(f"chi has a pole at s = {z.real:g}")
    if z.real <= 0.5:
        return _chi_jet_left(s, order)
    return 1 / _chi_jet_left(1 - CLD(s), order).shift_sign()


def chi(s):
    """chi(s) with zeta(s) = chi(s) zeta(1-s)"""
    z = complex(s)
    if abs(z.imag) > get_setting('engine.maxHeight'):
        raise RangeExceeded(f"|Im s| = {abs(z.imag)} exceeds the validated height")
    return _finite(chi_jet(s, 0).c[0], 'chi')


def log_gamma(s):
    """A logarithm of Gamma(s) (imaginary part fixed only modulo 2 pi)"""
    if _is_nonpositive_integer(s):
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at s = {complex(s).real:g}")
    s = CLD(s)
    if s.real >= 0.5:
        return log_gamma_jet(s, 0).c[0]
    # reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
    return LOG_PI - _log_sin(PI * s) - log_gamma_jet(1 - s, 0).c[0]


def gamma(s):
    """Gamma(s) in extended precision; reflection formula for Re s < 1/2"""
    return _finite(np.exp(log_gamma(s)), 'Gamma')


# =============================================================================
# POLYNOMIALS IN ZETA DERIVATIVES
# =============================================================================

def _monomial_values(expr, derivs, errs):
    """Sum of c_j prod zeta^(l)^d_lj and its first-order propagated error"""
    total = CLD(0)
    err = LD(0)
    mags = np.abs(derivs)
    for mono in expr.monomials:
        term = CLD(mono.coeff)
        for l, d in enumerate(mono.exponents):
            if d:
                term = term * derivs[l] ** d
        total += term
        mono_err = LD(0)
        for l, d in enumerate(mono.exponents):
            if not d:
                continue
            partial = LD(abs(mono.coeff)) * d * mags[l] ** (d - 1) * errs[l]
            for m, e in enumerate(mono.exponents):
                if m != l and e:
                    partial *= mags[m] ** e
            mono_err += partial
        err += mono_err + 16 * EPS * abs(term)
    return total, err * LD(get_setting('engine.productRuleSafety'))


def _derivative_values(jet, err):
    factorials = np.array([math.factorial(m) for m in range(jet.order + 1)], dtype=LD)
    return jet.c * factorials, err * factorials


def _evaluate(expr, s, target_abs_err, orders_needed, evaluate_pair):
    max_k = get_setting('engine.maxDerivative')
    if orders_needed > max_k:
        raise RangeExceeded(f"expression needs zeta^({orders_needed}); ceiling is {max_k}")
    if target_abs_err is not None and target_abs_err < get_setting('engine.minTargetError'):
        raise PrecisionUnreachable(f"target_abs_err {target_abs_err} below the supported minimum")

    def worst(jet, err):
        return max(float(e) for _, e in evaluate_pair(*_derivative_values(jet, err)))

    jet, err, bound = best_jet(s, orders_needed, worst, target_abs_err)
    if target_abs_err is not None and bound > target_abs_err:
        raise PrecisionUnreachable(
            f"propagated error {bound:.3g} exceeds target {target_abs_err:.3g} at s = {s}")
    return [(_finite(v, 'F'), e) for v, e in evaluate_pair(*_derivative_values(jet, err))]


def evaluate_F_with_error(expr, s, target_abs_err=None):
    """(F(s), propagated error bound)"""
    return _evaluate(expr, s, target_abs_err, expr.k,
                     lambda d, e: [_monomial_values(expr, d, e)])[0]


def evaluate_F(expr, s, target_abs_err=None):
    """F(s) as a clongdouble; raises PrecisionUnreachable if the bound misses the target"""
    return evaluate_F_with_error(expr, s, target_abs_err)[0]


def evaluate_F_derivative(expr, s, target_abs_err=None):
    """F'(s) via the product-rule expansion of F"""
    d_expr = differentiate(expr)
    return _evaluate(expr, s, target_abs_err, d_expr.k,
                     lambda d, e: [_monomial_values(d_expr, d, e)])[0][0]


def evaluate_F_pair(expr, s, target_abs_err=None):
    """(F(s), F'(s)) from a single jet evaluation"""
    d_expr = differentiate(expr)
    (f, _), (df, _) = _evaluate(
        expr, s, target_abs_err, max(expr.k, d_expr.k),
        lambda d, e: [_monomial_values(expr, d, e), _monomial_values(d_expr, d, e)])
    return f, df


def log_derivative(expr, s):
    """F'(s)/F(s)"""
    f, df = evaluate_F_pair(expr, s)
    if f == 0:
        raise NonFiniteValue(f"F vanishes at s = {s}")
    return df / f


def evaluate_shape(expr, s):
    """F with every zeta^(l)(s) replaced by chi^(l)(s)

    For Re s -> -infinity, zeta^(l)(s) = chi^(l)(s) (1 + O(2^Re s)), so this is
    the dominant left-half-plane shape of F used by the left zero-free scan.
    """
    jet = chi_jet(s, expr.k)
    total = CLD(0)
    derivs = jet.derivatives()
    for mono in expr.monomials:
        term = CLD(mono.coeff)
        for l, d in enumerate(mono.exponents):
            if d:
                term = term * derivs[l] ** d
        total += term
    return total


if __name__ == '__main__':
    print("zeta(2)        =", complex(zeta_derivative(EvalRequest(2))))
    print("zeta'(0)       =", complex(zeta_derivative(EvalRequest(0, 1))))
    print("Gamma(1/2)     =", complex(gamma(0.5)))
    print("chi(1/2)       =", complex(chi(0.5)))
