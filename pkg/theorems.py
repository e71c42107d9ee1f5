"""
Theorem Verification
Predicted versus measured statistics of the zeros of F:
    T1  zero-free strips left of E1F and right of E2F
    T2  trivial-zero clusters of size deg1 around s = -2n
    T3  Riemann-von Mangoldt type count N(1, T)
    T4  sum of (beta - 1/2) over T < gamma < T + U
    T5  zeros farther than delta from the critical line
    T6  power sums sum x^rho against the lattice coefficient alpha(x)
    C7  equidistribution of alpha * gamma modulo one
Every verdict compares |predicted - measured| with C_tol times the natural error scale.
"""

import cmath
import functools
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Optional

import numpy as np

from dirichlet import (
    alpha_at, find_coefficients, log_derivative_coefficients, zero_free_left_scan,
    zero_free_right,
)
from poly_expr import degrees
from settings import get_setting
from zero_finder import Rectangle, contour_count, locate_zeros, trivial_cluster_count
from zplab_errors import ConditionViolated, RangeExceeded, TooFewZeros

logger = logging.getLogger(__name__)

THEOREM_IDS = ('T1', 'T2', 'T3', 'T4', 'T5', 'T6', 'C7')


def _number(value):
    """JSON form of a real or complex statistic"""
    if value is None:
        return None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return float(value)


@dataclass
class VerificationReport:
    theorem_id: str
    parameters: Dict[str, Any]
    predicted: Any
    measured: Any
    tolerance: float
    verdict: Optional[str] = None
    zero_count: Optional[int] = None
    runtime_ms: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is None:
            self.verdict = 'pass' if self.discrepancy <= self.tolerance else 'fail'

    @property
    def discrepancy(self):
        return abs(complex(self.predicted) - complex(self.measured))

    @property
    def passed(self):
        return self.verdict == 'pass'

    def to_dict(self):
        report = {
            'theorem_id': self.theorem_id,
            'params': {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.parameters.items()},
            'predicted': _number(self.predicted),
            'measured': _number(self.measured),
            'discrepancy': self.discrepancy,
            'tolerance': self.tolerance,
            'verdict': self.verdict,
            'zero_count': self.zero_count,
            'runtime_ms': self.runtime_ms,
        }
        if self.details:
            report['details'] = self.details
        return report


@dataclass(frozen=True)
class WeylStatistics:
    alpha: float
    m_range: int
    weyl_sums: Dict[int, complex]
    star_discrepancy: float
    count: int

    @property
    def max_abs_sum(self):
        return max(abs(v) for v in self.weyl_sums.values())

    def to_dict(self):
        return {
            'alpha': self.alpha,
            'm_max': self.m_range,
            'count': self.count,
            'weyl_sums': {str(m): [v.real, v.imag] for m, v in sorted(self.weyl_sums.items())},
            'star_discrepancy': self.star_discrepancy,
        }


def _timed(func):
    """Fill runtime_ms of the returned report"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        report = func(*args, **kwargs)
        report.runtime_ms = (time.perf_counter() - start) * 1000.0
        return report
    return wrapper


# =============================================================================
# SHARED INPUTS
# =============================================================================

def require_condition(expr):
    report = degrees(expr)
    if not report.condition_holds:
        raise ConditionViolated(
            f"condition sum_(j in J) c_j != 0 violated: sumJ = {report.sumJ} for J = {list(report.J)}")
    return report


def zero_free_abscissae(expr, t_max=None, epsilon=None):
    """(E1F scan over 1 <= t <= max(leftTMax, t_max), E2F)"""
    height = get_setting('dirichlet.leftTMax')
    if t_max is not None:
        height = max(height, float(math.ceil(t_max)))
    return _abscissae_to_height(expr, height, epsilon or get_setting('theorems.clusterEpsilon'))


@lru_cache(maxsize=32)
def _abscissae_to_height(expr, t_max, epsilon):
    E2 = zero_free_right(expr)
    E1 = zero_free_left_scan(expr, sigma_min=get_setting('theorems.leftScanSigmaMin'),
                             epsilon=epsilon, t_max=t_max, t_min=1.0)
    return E1, E2


def theorem_region(expr, t_lo, t_hi):
    E1, E2 = zero_free_abscissae(expr, t_hi)
    return Rectangle(E1, E2, t_lo, t_hi)


@lru_cache(maxsize=32)
def shared_zeros(expr, rect, threads=None):
    """Zero list reused by every theorem run on the same rectangle"""
    return tuple(locate_zeros(expr, rect, threads=threads))


def _zeros_between(zeros, t_lo, t_hi):
    return [z for z in zeros if t_lo < z.gamma < t_hi]


def certified_zeros(expr, t_lo, t_hi, threads=None):
    """(certified zeros with t_lo < gamma < t_hi, number of uncertified ones left out)"""
    zeros = _zeros_between(shared_zeros(expr, theorem_region(expr, t_lo, t_hi), threads), t_lo, t_hi)
    kept = [z for z in zeros if z.certified]
    dropped = len(zeros) - len(kept)
    if dropped:
        logger.warning("✗ %d uncertified zero(s) in %g < t < %g left out of the statistics", dropped, t_lo, t_hi)
    return kept, dropped


def _verdict(dropped):
    """None lets the report decide; uncertified zeros make any verdict inconclusive"""
    return 'inconclusive' if dropped else None


def _multiplicity_count(zeros):
    return sum(z.multiplicity for z in zeros)


def _tolerance(c_tol, key):
    return get_setting(key) if c_tol is None else c_tol


def _check_height(T, minimum=10.0):
    if T < minimum:
        raise RangeExceeded(f"T = {T} is below the supported minimum {minimum}")
    if T > get_setting('engine.maxHeight'):
        raise RangeExceeded(f"T = {T} exceeds the engine height {get_setting('engine.maxHeight')}")


# =============================================================================
# PREDICTIONS
# =============================================================================

def predict_count(expr, T):
    """deg1 (T/2pi) log(T/(2 pi e)) - (T/2pi) log n_F"""
    _check_height(T)
    deg1 = degrees(expr).deg1
    n_F = find_coefficients(expr).n_F
    scale = T / (2 * math.pi)
    return deg1 * scale * math.log(T / (2 * math.pi * math.e)) - scale * math.log(n_F)


def predict_beta_sum(expr, T, U):
    """deg2 U log log T + U log|sumJ / (eta_nF n_F^-1/2)|"""
    report = degrees(expr)
    coeffs = find_coefficients(expr)
    ratio = abs(report.sumJ / (coeffs.leading * coeffs.n_F ** -0.5))
    return report.deg2 * U * math.log(math.log(T)) + U * math.log(ratio)


# =============================================================================
# THEOREMS
# =============================================================================

@_timed
def verify_zero_free(expr, T, width=None, threads=None):
    """T1: no zeros in [E2F, E2F + w] x [1, T] nor in [E1F - w, E1F] x [1, T]"""
    require_condition(expr)
    _check_height(T)
    width = width or get_setting('theorems.zeroFreeStripWidth')
    E1, E2 = zero_free_abscissae(expr, T)
    right = contour_count(expr, Rectangle(E2, E2 + width, 1.0, T), threads=threads)
    left = contour_count(expr, Rectangle(E1 - width, E1, 1.0, T), threads=threads)
    measured = right.count + left.count
    return VerificationReport(
        'T1', {'T': T, 'width': width}, 0, measured, 0.0, zero_count=measured,
        details={'E1F_scan': E1, 'E2F': E2, 'right_count': right.count, 'left_count': left.count,
                 'E1F_empirical': True})


@_timed
def verify_trivial_clusters(expr, n_values=None, epsilon=None):
    """T2: the disk |s + 2n| < epsilon holds deg1 zeros once n is large"""
    require_condition(expr)
    n_values = sorted(n_values or get_setting('theorems.clusterNValues'))
    epsilon = epsilon or get_setting('theorems.clusterEpsilon')
    deg1 = degrees(expr).deg1
    counts = {n: trivial_cluster_count(expr, n, epsilon) for n in n_values}
    measured = counts[n_values[-1]]
    verdict = 'pass' if measured == deg1 else 'inconclusive'
    return VerificationReport(
        'T2', {'n': n_values, 'epsilon': epsilon}, deg1, measured, 0.0, verdict=verdict,
        zero_count=measured, details={'counts': {str(n): c for n, c in counts.items()}})


@_timed
def verify_count(expr, T, c_tol=None, threads=None):
    """T3: winding count on [E1F, E2F] x [1, T] against predict_count"""
    require_condition(expr)
    _check_height(T)
    result = contour_count(expr, theorem_region(expr, 1.0, T), threads=threads)
    tolerance = _tolerance(c_tol, 'theorems.countTolerance') * math.log(T)
    return VerificationReport(
        'T3', {'T': T}, predict_count(expr, T), result.count, tolerance, zero_count=result.count,
        details={'rectangle': result.rectangle.to_dict()})


def beta_sum(zeros, delta=None):
    """2 pi sum (beta - 1/2) with multiplicity; delta censors zeros with |beta - 1/2| > delta"""
    total = 0.0
    for z in zeros:
        if delta is None or abs(z.beta - 0.5) <= delta:
            total += z.multiplicity * (z.beta - 0.5)
    return 2 * math.pi * total


@_timed
def verify_beta_sum(expr, T, U=None, c_tol=None, threads=None):
    """T4: 2 pi sum_{T < gamma < T+U} (beta - 1/2)"""
    require_condition(expr)
    _check_height(T)
    U = U or T
    zeros, dropped = certified_zeros(expr, T, T + U, threads)
    predicted = predict_beta_sum(expr, T, U)
    measured = beta_sum(zeros)
    deg2 = degrees(expr).deg2
    tolerance = _tolerance(c_tol, 'theorems.betaTolerance') * U / math.log(T)
    return VerificationReport(
        'T4', {'T': T, 'U': U}, predicted, measured, tolerance, verdict=_verdict(dropped),
        zero_count=_multiplicity_count(zeros),
        details={'constant_term_predicted': (predicted - deg2 * U * math.log(math.log(T))) / U,
                 'constant_term_measured': (measured - deg2 * U * math.log(math.log(T))) / U,
                 'uncertified_zeros': dropped})


@_timed
def verify_clustering(expr, T, U=None, delta=0.05, c_tol=None, threads=None):
    """T5: zeros with |beta - 1/2| > delta, reported as count * delta / (U log log T)"""
    require_condition(expr)
    _check_height(T)
    if delta <= 0:
        raise RangeExceeded(f"delta must be positive, got {delta}")
    U = U or T
    E1, E2 = zero_free_abscissae(expr, T + U)
    zeros, dropped = certified_zeros(expr, T, T + U, threads)
    off_line = _multiplicity_count(z for z in zeros if abs(z.beta - 0.5) > delta)
    ratio = off_line * delta / (U * math.log(math.log(T)))
    deviation = abs(beta_sum(zeros) - beta_sum(zeros, delta))
    return VerificationReport(
        'T5', {'T': T, 'U': U, 'delta': delta}, 0.0, ratio,
        _tolerance(c_tol, 'theorems.clusteringTolerance'), verdict=_verdict(dropped),
        zero_count=_multiplicity_count(zeros),
        details={'off_line_count': off_line,
                 'beta_sum_deviation': deviation,
                 'consistency_bound': 2 * math.pi * off_line * (E2 - E1),
                 'uncertified_zeros': dropped})


def power_sum(zeros, x):
    """sum x^rho over the zeros, with multiplicity"""
    log_x = math.log(x)
    return sum((z.multiplicity * cmath.exp(z.rho * log_x) for z in zeros), 0j)


@_timed
def verify_power_sum(expr, x, T, c_tol=None, threads=None):
    """T6: sum_{1 < gamma < T} x^rho against alpha(x) T / 2 pi"""
    require_condition(expr)
    _check_height(T)
    x = Fraction(x)
    if x <= 1:
        raise RangeExceeded(f"x must exceed 1, got {x}")
    X = max(2.0, float(math.ceil(x)))
    series = log_derivative_coefficients(expr, X)
    alpha = alpha_at(series, x)
    predicted = alpha * T / (2 * math.pi)
    zeros, dropped = certified_zeros(expr, 1.0, T, threads)
    measured = power_sum(zeros, float(x))
    tolerance = _tolerance(c_tol, 'theorems.powerSumTolerance') * math.log(T)
    return VerificationReport(
        'T6', {'x': x, 'T': T}, complex(predicted), measured, tolerance, verdict=_verdict(dropped),
        zero_count=_multiplicity_count(zeros),
        details={'alpha': [alpha.real, alpha.imag], 'on_lattice': x in series.entries,
                 'uncertified_zeros': dropped})


def weyl_statistics(zeros, alpha, m_max=None):
    """Weyl sums S_m = (1/N) sum exp(2 pi i m alpha gamma) and the star discrepancy"""
    if alpha == 0:
        raise RangeExceeded("alpha must be non-zero")
    m_max = m_max or get_setting('theorems.weylMMax')
    gammas = np.repeat([z.gamma for z in zeros], [z.multiplicity for z in zeros]).astype(float)
    N = len(gammas)
    if N < get_setting('theorems.minWeylZeros'):
        raise TooFewZeros(f"{N} zeros; equidistribution statistics need {get_setting('theorems.minWeylZeros')}")

    phases = 2 * np.pi * alpha * gammas
    sums = {}
    for m in range(1, m_max + 1):
        s = complex(np.mean(np.exp(1j * m * phases)))
        sums[m] = s
        sums[-m] = s.conjugate()

    x = np.sort(np.mod(alpha * gammas, 1.0))
    i = np.arange(1, N + 1)
    discrepancy = float(np.max(np.maximum(i / N - x, x - (i - 1) / N)))
    return WeylStatistics(float(alpha), m_max, sums, discrepancy, N)


@_timed
def verify_equidistribution(expr, T, alpha=None, m_max=None, threads=None):
    """C7: Weyl sums and star discrepancy of alpha * gamma mod 1 for prefixes of the zero list"""
    require_condition(expr)
    _check_height(T)
    alpha = alpha or math.log(2) / (2 * math.pi)
    zeros, dropped = certified_zeros(expr, 1.0, T, threads)
    full = weyl_statistics(zeros, alpha, m_max)

    trend = []
    expanded = [z for z in zeros for _ in range(z.multiplicity)]
    for size in get_setting('theorems.weylPrefixes'):
        if size < full.count:
            prefix = weyl_statistics(expanded[:size], alpha, 1)
            trend.append({'count': size, 'star_discrepancy': prefix.star_discrepancy,
                          'abs_S1': abs(prefix.weyl_sums[1])})
    trend.append({'count': full.count, 'star_discrepancy': full.star_discrepancy,
                  'abs_S1': abs(full.weyl_sums[1])})
    discrepancies = [p['star_discrepancy'] for p in trend]
    return VerificationReport(
        'C7', {'T': T, 'alpha': alpha, 'm_max': full.m_range}, 0.0, full.max_abs_sum,
        get_setting('theorems.weylTolerance'), verdict=_verdict(dropped), zero_count=full.count,
        details={'statistics': full.to_dict(), 'prefixes': trend,
                 'discrepancy_decreasing': all(a > b for a, b in zip(discrepancies, discrepancies[1:])),
                 'uncertified_zeros': dropped})


# =============================================================================
# DISPATCH
# =============================================================================

def run_theorem(expr, theorem_id, params):
    """Run one theorem (or 'all') with a parameter dict; returns a list of reports"""
    theorem_id = theorem_id.upper()
    if theorem_id == 'ALL':
        return [r for tid in THEOREM_IDS for r in run_theorem(expr, tid, params)]
    require_condition(expr)

    T = params.get('T', 100.0)
    threads = params.get('threads')
    c_tol = params.get('c_tol')
    if theorem_id == 'T1':
        report = verify_zero_free(expr, T, threads=threads)
    elif theorem_id == 'T2':
        report = verify_trivial_clusters(expr, params.get('n_values'), params.get('epsilon'))
    elif theorem_id == 'T3':
        report = verify_count(expr, T, c_tol, threads)
    elif theorem_id == 'T4':
        report = verify_beta_sum(expr, T, params.get('U'), c_tol, threads)
    elif theorem_id == 'T5':
        report = verify_clustering(expr, T, params.get('U'), params.get('delta') or 0.05, c_tol, threads)
    elif theorem_id == 'T6':
        report = verify_power_sum(expr, params.get('x') or 2, T, c_tol, threads)
    elif theorem_id == 'C7':
        report = verify_equidistribution(expr, T, params.get('alpha'), params.get('m_max'), threads)
    else:
        raise RangeExceeded(f"unknown theorem {theorem_id!r}; expected one of {', '.join(THEOREM_IDS)} or all")
    mark = {'pass': '✓', 'fail': '✗'}.get(report.verdict, '?')
    logger.info("%s %s: predicted %s, measured %s (tolerance %.4g)",
                mark, report.theorem_id, _number(report.predicted), _number(report.measured), report.tolerance)
    return [report]


if __name__ == '__main__':
    from poly_expr import parse_expression

    zeta = parse_expression("z0")
    print("predict_count(z0, 100) =", predict_count(zeta, 100))
    print("predict_count(z1, 100) =", predict_count(parse_expression("z1"), 100))
    print(verify_count(zeta, 50).to_dict())
