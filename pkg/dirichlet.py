"""
Dirichlet Series Machinery
Coefficients eta_n of F(s) = sum eta_n n^-s, the leading index n_F, the
lattice-supported coefficients alpha(d) of F'/F, and the zero-free abscissae
E2F (certified from the coefficients) and E1F (empirical left scan).
"""

import cmath
import heapq
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional

import numpy as np
import pandas as pd

from settings import get_setting
from zeta_engine import evaluate_F, evaluate_shape
from zplab_errors import (
    LeadingIndexNotFound, NotCertifiable, RangeExceeded, ScanInconclusive,
    TruncationUnstable, ZplabError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirichletCoefficients:
    N: int
    eta: np.ndarray          # eta[n - 1] = eta_n, complex128
    n_F: int
    threshold: float

    @property
    def leading(self):
        return complex(self.eta[self.n_F - 1])

    @property
    def growth_constant(self):
        """B with |eta_n| <= B n^(1/2) for every stored n"""
        n = np.arange(1, self.N + 1, dtype=float)
        return float(np.max(np.abs(self.eta) / n ** get_setting('dirichlet.growthExponent')))


@dataclass
class LatticeSeries:
    X: float
    n_F: int
    depth: int
    entries: Dict[Fraction, complex] = field(default_factory=dict)
    discarded_mass: float = 0.0

    def evaluate(self, s):
        """sum_{d <= X} alpha(d) d^-s"""
        s = complex(s)
        return sum((a * cmath.exp(-s * math.log(d)) for d, a in self.entries.items()), 0j)

    def sorted_items(self):
        return sorted(self.entries.items())


@dataclass(frozen=True)
class ZeroFreeBounds:
    E2F: float
    E1F_scan: float
    epsilon: float
    left_is_empirical: bool = True

    def to_dict(self):
        return {
            'E2F': self.E2F,
            'E1F_scan': self.E1F_scan,
            'epsilon': self.epsilon,
            'E2F_certified': True,
            'E1F_empirical': self.left_is_empirical,
        }


# =============================================================================
# ARITHMETIC HELPERS
# =============================================================================

def von_mangoldt(n):
    """Lambda(n): log p if n is a power of the prime p, else 0"""
    n = int(n)
    if n < 2:
        return 0.0
    p = next(q for q in range(2, n + 1) if n % q == 0)
    while n % p == 0:
        n //= p
    return math.log(p) if n == 1 else 0.0


def dirichlet_convolve(a, b):
    """c_n = sum_{de = n} a_d b_e for n = 1 .. len(a)"""
    N = len(a)
    out = np.zeros(N, dtype=np.complex128)
    for d in np.nonzero(a)[0] + 1:
        out[d - 1::d] += a[d - 1] * b[:N // d]
    return out


# =============================================================================
# COEFFICIENTS
# =============================================================================

@lru_cache(maxsize=32)
def coefficients(expr, N):
    """eta_1 .. eta_N by iterated Dirichlet convolution of (-log n)^l"""
    if N < 2:
        raise RangeExceeded(f"N must be at least 2, got {N}")
    if N > get_setting('dirichlet.maxTerms'):
        raise RangeExceeded(f"N = {N} exceeds dirichlet.maxTerms")

    neg_log = -np.log(np.arange(1, N + 1, dtype=float))
    delta = np.zeros(N, dtype=np.complex128)
    delta[0] = 1
    bases = [(neg_log ** l).astype(np.complex128) for l in range(expr.k + 1)]
    powers = {}

    def power(l, d):
        # (-log n)^l convolved with itself d times, memoised across monomials
        if (l, d) not in powers:
            powers[(l, d)] = delta if d == 0 else dirichlet_convolve(power(l, d - 1), bases[l])
        return powers[(l, d)]

    eta = np.zeros(N, dtype=np.complex128)
    for mono in expr.monomials:
        seq = delta
        for l, d in enumerate(mono.exponents):
            if d:
                seq = dirichlet_convolve(seq, power(l, d))
        eta += complex(mono.coeff) * seq

    peak = float(np.max(np.abs(eta)))
    threshold = get_setting('dirichlet.zeroThreshold') * peak
    above = np.nonzero(np.abs(eta) > threshold)[0]
    if peak == 0 or len(above) == 0:
        raise LeadingIndexNotFound(f"all |eta_n| vanish for n <= {N}")
    eta.setflags(write=False)
    return DirichletCoefficients(N, eta, int(above[0]) + 1, threshold)


def find_coefficients(expr, N=None, min_ratio=4):
    """Coefficients with N >= min_ratio * n_F, doubling N until n_F shows up"""
    N = N or get_setting('dirichlet.defaultTerms')
    max_terms = get_setting('dirichlet.maxTerms')
    while True:
        try:
            coeffs = coefficients(expr, N)
        except LeadingIndexNotFound:
            if 2 * N > max_terms:
                raise
            N *= 2
            continue
        if coeffs.N >= min_ratio * coeffs.n_F:
            return coeffs
        N = min_ratio * coeffs.n_F
        if N > max_terms:
            raise RangeExceeded(f"n_F = {coeffs.n_F} needs more than dirichlet.maxTerms coefficients")


def partial_sum(coeffs, s):
    """sum_{n <= N} eta_n n^-s"""
    s = complex(s)
    n = np.arange(1, coeffs.N + 1, dtype=float)
    return complex(np.sum(coeffs.eta * np.exp(-s * np.log(n))))


def truncation_error(coeffs, sigma):
    """|F(s) - partial_sum| bound for Re s = sigma: integral tail plus rounding"""
    if sigma <= 1.5:
        return math.inf
    N = coeffs.N
    tail = coeffs.growth_constant * N ** (1.5 - sigma) / (sigma - 1.5)
    n = np.arange(1, N + 1, dtype=float)
    rounding = 8 * np.finfo(float).eps * float(np.sum(np.abs(coeffs.eta) * n ** -sigma))
    return tail + rounding


# =============================================================================
# LATTICE EXPANSION OF F'/F
# =============================================================================

def log_derivative_coefficients(expr, X=100.0):
    """alpha(d) for d <= X with F'/F(s) = sum alpha(d) d^-s

    G(s) = F(s) n_F^s / eta_{n_F} = 1 + sum g(d) d^-s over d = n/n_F, and
    F'/F = -log n_F + G'/G. The coefficients h of G'/G follow from
    -log(d) g(d) = sum_{d1 d2 = d} g(d1) h(d2), solved in increasing d.
    Frequencies are integer keys P standing for P / n_F^M.
    """
    if not 1 <= X <= get_setting('dirichlet.latticeMaxX'):
        raise RangeExceeded(f"X must lie in [1, {get_setting('dirichlet.latticeMaxX')}], got {X}")

    initial = find_coefficients(expr, min_ratio=1)
    n_F = initial.n_F
    coeffs = find_coefficients(expr, max(initial.N, int(math.floor(X * n_F)) + 1), min_ratio=1)
    lead = coeffs.leading
    top = min(coeffs.N, int(math.floor(X * n_F)))

    gens = [(n, complex(coeffs.eta[n - 1]) / lead)
            for n in range(n_F + 1, top + 1) if abs(coeffs.eta[n - 1]) > coeffs.threshold]

    if gens and X > 1:
        n_min = gens[0][0]
        m_max = int(math.ceil(get_setting('dirichlet.latticeSafety') * math.log(X) / math.log(n_min / n_F)))
    else:
        m_max = 1
    max_depth = get_setting('dirichlet.latticeMaxDepth')
    depth = max(1, min(m_max, max_depth)) if n_F > 1 else max(1, m_max)
    if n_F > 1 and m_max > max_depth:
        logger.warning("lattice depth capped at %d (needs %d); deep frequencies are discarded", max_depth, m_max)

    scale = n_F ** depth if n_F > 1 else 1
    limit = math.floor(Fraction(X) * scale)
    log_scale = math.log(scale)
    sigma_ref = get_setting('dirichlet.latticeReferenceSigma')

    keyed = [(n * scale // n_F, g) for n, g in gens]
    acc = {}
    for key, g in keyed:
        acc[key] = -(math.log(key) - log_scale) * g
    heap = list(acc)
    heapq.heapify(heap)

    h = {}
    discarded = 0.0
    while heap:
        K = heapq.heappop(heap)
        hK = acc.pop(K)
        h[K] = hK
        if hK == 0:
            continue
        for key_g, g in keyed:
            prod = K * key_g
            if prod > limit * scale:
                break
            q, r = divmod(prod, scale)
            if r:
                log_d = math.log(prod) - 2 * log_scale
                discarded += abs(g * hK) * math.exp(-sigma_ref * log_d)
                continue
            if q not in acc:
                heapq.heappush(heap, q)
                acc[q] = 0j
            acc[q] -= g * hK

    if discarded > get_setting('dirichlet.latticeDiscardTolerance'):
        raise TruncationUnstable(
            f"discarded lattice mass {discarded:.3g} at sigma = {sigma_ref} exceeds tolerance "
            f"(depth {depth} of {m_max})")

    entries = {Fraction(1): complex(-math.log(n_F))}
    for K, value in h.items():
        entries[Fraction(K, scale)] = complex(value)
    logger.info("lattice series: %d frequencies up to X = %g, depth %d", len(entries), X, depth)
    return LatticeSeries(X, n_F, depth, entries, discarded)


def alpha_at(series, x):
    """alpha(x); 0 when x is off the lattice"""
    x = Fraction(x)
    if x > Fraction(series.X):
        raise RangeExceeded(f"x = {x} lies beyond the lattice bound X = {series.X}")
    return series.entries.get(x, 0j)


# =============================================================================
# ZERO-FREE REGIONS
# =============================================================================

def zero_free_right(expr, coeffs=None):
    """Smallest sigma0 on the grid where the leading term dominates the rest

    sum_{n_F < n <= N} |eta_n| n^-sigma0 + B N^(3/2 - sigma0)/(sigma0 - 3/2)
        < |eta_{n_F}| n_F^-sigma0
    Both sides are scaled by n_F^sigma0.
    """
    coeffs = coeffs or find_coefficients(expr)
    n_F, N = coeffs.n_F, coeffs.N
    B = coeffs.growth_constant
    ratios = np.arange(n_F + 1, N + 1, dtype=float) / n_F
    mags = np.abs(coeffs.eta[n_F:])
    lead = abs(coeffs.leading)

    step = get_setting('dirichlet.rightGridStep')
    sigma = 1.5 + step
    while sigma <= get_setting('dirichlet.rightMaxSigma'):
        body = float(np.sum(mags * ratios ** -sigma))
        tail = B * N ** 1.5 * (N / n_F) ** -sigma / (sigma - 1.5)
        if body + tail < lead:
            logger.debug("E2F certified at sigma = %g (%.3g < %.3g)", sigma, body + tail, lead)
            return sigma
        sigma += step
    raise NotCertifiable(f"leading term never dominates up to sigma = {get_setting('dirichlet.rightMaxSigma')}")


def _near_trivial_point(s, epsilon):
    if s.real >= 0:
        return False
    n = max(1, round(-s.real / 2))
    return any(abs(s + 2 * m) < epsilon for m in (n - 1, n, n + 1) if m >= 1)


def _column_passes(expr, sigma, t_values, epsilon, margin, resolution):
    for t in t_values:
        s = complex(sigma, t)
        if _near_trivial_point(s, epsilon):
            continue
        try:
            shape = evaluate_shape(expr, s)
            value = evaluate_F(expr, s)
        except ZplabError as e:
            logger.debug("left scan: evaluation failed at %s: %s", s, e)
            return False
        if abs(shape) == 0 or abs(value) <= resolution * abs(shape):
            return False
        if abs(value - shape) > margin * abs(shape):
            return False
    return True


def zero_free_left_scan(expr, sigma_min=None, epsilon=0.5, t_max=None, t_min=0.0):
    """Empirical left abscissa E1F

    A grid point passes when F stays within a relative margin of its dominant
    shape (every zeta^(l) replaced by chi^(l)); points within epsilon of a
    trivial point -2n are skipped. Columns are walked from sigma_min to the
    right and the last column of the passing run is returned, capped at 0.
    """
    sigma_min = get_setting('dirichlet.leftSigmaMin') if sigma_min is None else sigma_min
    t_max = get_setting('dirichlet.leftTMax') if t_max is None else t_max
    if sigma_min < -200:
        raise RangeExceeded(f"sigma_min = {sigma_min} is below -200")
    if not 0 < epsilon < 1:
        raise RangeExceeded(f"epsilon must lie in (0, 1), got {epsilon}")

    t_step = get_setting('dirichlet.leftTStep')
    t_values = list(np.arange(t_min, t_max + t_step / 2, t_step))
    if not expr.has_real_coefficients:
        t_values += [-t for t in t_values if t > 0]
    margin = get_setting('dirichlet.leftDominanceMargin')
    resolution = get_setting('dirichlet.leftDipResolution')

    step = get_setting('dirichlet.leftGridStep')
    sigma = sigma_min
    last_pass = None
    while sigma <= 0:
        if not _column_passes(expr, sigma, t_values, epsilon, margin, resolution):
            break
        last_pass = sigma
        sigma += step
    if last_pass is None:
        raise ScanInconclusive(f"left scan fails already at sigma = {sigma_min}")
    logger.info("left scan: F follows its chi-shape for sigma <= %g (epsilon %g)", last_pass, epsilon)
    return float(last_pass)


def zero_free_bounds(expr, epsilon=0.5, sigma_min=None, t_max=None, t_min=0.0):
    E2F = zero_free_right(expr)
    E1F = zero_free_left_scan(expr, sigma_min, epsilon, t_max, t_min)
    return ZeroFreeBounds(E2F, E1F, epsilon)


# =============================================================================
# CSV EXPORT
# =============================================================================

def coefficients_frame(coeffs):
    return pd.DataFrame({
        'n': np.arange(1, coeffs.N + 1),
        'eta_re': coeffs.eta.real,
        'eta_im': coeffs.eta.imag,
    })


def lattice_frame(series):
    items = series.sorted_items()
    return pd.DataFrame({
        'd': [f"{d.numerator}/{d.denominator}" for d, _ in items],
        'alpha_re': [a.real for _, a in items],
        'alpha_im': [a.imag for _, a in items],
    })


def export_coefficients_csv(coeffs, path: Optional[str] = None):
    return coefficients_frame(coeffs).to_csv(path, index=False, float_format='%.15g')


def export_lattice_csv(series, path: Optional[str] = None):
    return lattice_frame(series).to_csv(path, index=False, float_format='%.15g')


if __name__ == '__main__':
    from poly_expr import parse_expression

    for text in ["z0", "z1", "z1^2 + z0^3"]:
        expr = parse_expression(text)
        c = find_coefficients(expr)
        print(f"{text:12s} n_F = {c.n_F}  eta_nF = {c.leading:.6f}  E2F = {zero_free_right(expr, c)}")
    series = log_derivative_coefficients(parse_expression("z1"), 10)
    print("alpha(3/2) for z1 =", alpha_at(series, Fraction(3, 2)))
