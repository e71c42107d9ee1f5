"""
Zero Finder
Counts zeros of F inside rectangles and circles by the argument principle,
locates them by quadrisection plus Newton refinement, and certifies each
zero with a small-circle winding number and a residual.

Arguments are tracked adaptively: a path segment is bisected until the
change of arg F across it (and across both halves) stays below maxArgStep.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from settings import get_setting
from zeta_engine import evaluate_F, evaluate_F_pair
from zplab_errors import (
    BoundaryZeroSuspected, InvalidRectangle, NewtonDiverged, QuadratureUnstable,
    ZplabError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Rectangle:
    sigma_lo: float
    sigma_hi: float
    t_lo: float
    t_hi: float

    @property
    def width(self):
        return self.sigma_hi - self.sigma_lo

    @property
    def height(self):
        return self.t_hi - self.t_lo

    @property
    def center(self):
        return complex((self.sigma_lo + self.sigma_hi) / 2, (self.t_lo + self.t_hi) / 2)

    def contains(self, s, pad=0.0):
        return (self.sigma_lo - pad <= s.real <= self.sigma_hi + pad
                and self.t_lo - pad <= s.imag <= self.t_hi + pad)

    def validate(self, allow_pole=False):
        values = (self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi)
        if not all(math.isfinite(v) for v in values):
            raise InvalidRectangle(f"rectangle has non-finite corners: {values}")
        if not (self.sigma_lo < self.sigma_hi and self.t_lo < self.t_hi):
            raise InvalidRectangle(f"degenerate rectangle {values}")
        if not allow_pole and self.contains(1 + 0j):
            raise InvalidRectangle("rectangle contains the pole s = 1")
        return self

    def to_dict(self):
        return {'sigma_lo': self.sigma_lo, 'sigma_hi': self.sigma_hi,
                't_lo': self.t_lo, 't_hi': self.t_hi}


@dataclass(frozen=True)
class ZeroRecord:
    rho: complex
    multiplicity: int
    residual: float
    box_radius: float
    certified: bool = True

    @property
    def beta(self):
        return self.rho.real

    @property
    def gamma(self):
        return self.rho.imag

    def to_dict(self):
        return {
            'beta': self.beta,
            'gamma': self.gamma,
            'multiplicity': self.multiplicity,
            'residual': self.residual,
            'box_radius': self.box_radius,
            'certified': self.certified,
        }


@dataclass(frozen=True)
class CountResult:
    count: int
    rectangle: Rectangle
    strips: tuple


# =============================================================================
# ARGUMENT TRACKING
# =============================================================================

class ArgumentTracker:
    """Caches F values and arg increments of F along straight pieces and circles"""

    def __init__(self, expr, threads=None):
        self.expr = expr
        self.threads = threads or get_setting('threads')
        self._values = {}
        self._pieces = {}
        self.max_arg_step = get_setting('zeroFinder.maxArgStep')
        self.sample_step = get_setting('zeroFinder.maxSampleStep')
        self.min_segment = get_setting('zeroFinder.minSegmentFraction')
        self.clearance = get_setting('zeroFinder.edgeClearance')

    def value(self, s):
        key = (float(s.real), float(s.imag))
        if key not in self._values:
            self._values[key] = evaluate_F(self.expr, complex(*key))
        return self._values[key]

    def _check_clearance(self, f, scale, path, u, piece):
        if abs(f) < self.clearance * scale:
            point = path(u)
            raise BoundaryZeroSuspected(f"|F| dips to {float(abs(f)):.3g} at {point}", piece=piece, point=point)

    def _segment(self, path, u0, u1, f0, f1, scale, piece):
        total = 0.0
        stack = [(u0, u1, f0, f1)]
        while stack:
            a, b, fa, fb = stack.pop()
            um = (a + b) / 2
            fm = self.value(path(um))
            self._check_clearance(fm, scale, path, um, piece)
            d = float(np.angle(fb / fa))
            d1 = float(np.angle(fm / fa))
            d2 = float(np.angle(fb / fm))
            step_ok = max(abs(d), abs(d1), abs(d2)) < self.max_arg_step
            if step_ok and abs(d1 + d2 - d) < 1e-9:
                total += d1 + d2
                continue
            if b - a < self.min_segment:
                raise BoundaryZeroSuspected(
                    f"argument of F unresolved near {path(um)}", piece=piece, point=path(um))
            stack.append((um, b, fm, fb))
            stack.append((a, um, fa, fm))
        return total

    def track(self, path, length, piece, min_samples=4):
        """Total change of arg F along path(u), 0 <= u <= 1"""
        n = max(min_samples, int(math.ceil(length / self.sample_step)))
        us = np.linspace(0.0, 1.0, n + 1)
        values = [self.value(path(u)) for u in us]
        total = 0.0
        for i in range(n):
            scale = max(abs(values[i]), abs(values[i + 1]))
            if scale == 0:
                raise BoundaryZeroSuspected(f"F vanishes at {path(us[i])}", piece=piece, point=path(us[i]))
            self._check_clearance(values[i], scale, path, us[i], piece)
            self._check_clearance(values[i + 1], scale, path, us[i + 1], piece)
            total += self._segment(path, us[i], us[i + 1], values[i], values[i + 1], scale, piece)
        return total

    def piece(self, key):
        """Arg increment of a cached piece: ('h', t, s_lo, s_hi) or ('v', sigma, t_lo, t_hi)"""
        if key not in self._pieces:
            kind, c, a, b = key
            if kind == 'h':
                path = lambda u: complex(a + (b - a) * u, c)
            else:
                path = lambda u: complex(c, a + (b - a) * u)
            self._pieces[key] = self.track(path, b - a, piece=(kind, c))
        return self._pieces[key]

    def pieces(self, keys):
        """Evaluate many pieces, in parallel when threads > 1; errors surface in key order"""
        todo = [k for k in dict.fromkeys(keys) if k not in self._pieces]
        if self.threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                outcomes = list(pool.map(self._piece_or_error, todo))
            for outcome in outcomes:
                if isinstance(outcome, Exception):
                    raise outcome
        else:
            for key in todo:
                self.piece(key)
        return [self._pieces[k] for k in keys]

    def _piece_or_error(self, key):
        try:
            return self.piece(key)
        except ZplabError as e:
            return e

    def box_winding(self, rect):
        bottom, right, top, left = self.pieces([
            ('h', rect.t_lo, rect.sigma_lo, rect.sigma_hi),
            ('v', rect.sigma_hi, rect.t_lo, rect.t_hi),
            ('h', rect.t_hi, rect.sigma_lo, rect.sigma_hi),
            ('v', rect.sigma_lo, rect.t_lo, rect.t_hi),
        ])
        return snap_winding(bottom + right - top - left)

    def circle_winding(self, center, radius):
        center = complex(center)
        path = lambda u: center + radius * complex(math.cos(TWO_PI * u), math.sin(TWO_PI * u))
        n = get_setting('zeroFinder.circleVertices')
        total = self.track(path, TWO_PI * radius, piece=('circle', radius), min_samples=n)
        return snap_winding(total)


def snap_winding(total_arg):
    """Integer winding number; refuses values farther than snapTolerance from an integer"""
    turns = total_arg / TWO_PI
    nearest = round(turns)
    if abs(turns - nearest) > get_setting('zeroFinder.snapTolerance'):
        raise QuadratureUnstable(f"winding {turns:.6f} is not close to an integer")
    return int(nearest)


# =============================================================================
# COUNTING
# =============================================================================

def _strip_bounds(rect):
    n = max(1, int(math.ceil(rect.height / get_setting('zeroFinder.stripHeight'))))
    return [rect.t_lo + i * rect.height / n for i in range(n)] + [rect.t_hi]


def _strip_windings(tracker, rect):
    """Per-strip winding numbers; nudges whichever line carries a suspected boundary zero"""
    bounds = _strip_bounds(rect)
    sigma_lo, sigma_hi = rect.sigma_lo, rect.sigma_hi
    nudge = get_setting('zeroFinder.nudgeFraction')
    for attempt in range(get_setting('zeroFinder.maxNudges') + 1):
        m = len(bounds) - 1
        horizontal = [('h', b, sigma_lo, sigma_hi) for b in bounds]
        left = [('v', sigma_lo, bounds[i], bounds[i + 1]) for i in range(m)]
        right = [('v', sigma_hi, bounds[i], bounds[i + 1]) for i in range(m)]
        try:
            deltas = tracker.pieces(horizontal + left + right)
        except BoundaryZeroSuspected as e:
            kind, coord = e.piece[0], e.piece[1]
            if kind == 'h':
                i = bounds.index(coord)
                span = rect.height if i in (0, m) else bounds[i + 1] - bounds[i]
                bounds[i] += nudge * span
            elif coord == sigma_lo:
                sigma_lo += nudge * rect.height
            else:
                sigma_hi += nudge * rect.height
            logger.info("✗ suspected zero on %s edge near %s; nudging (attempt %d)", kind, e.point, attempt + 1)
            continue
        H, L, R = deltas[:m + 1], deltas[m + 1:2 * m + 1], deltas[2 * m + 1:]
        strips = []
        for i in range(m):
            strip = Rectangle(sigma_lo, sigma_hi, bounds[i], bounds[i + 1])
            strips.append((strip, snap_winding(H[i] + R[i] - H[i + 1] - L[i])))
        final = Rectangle(sigma_lo, sigma_hi, bounds[0], bounds[-1])
        return final, strips
    raise BoundaryZeroSuspected(f"boundary zero persists after {get_setting('zeroFinder.maxNudges')} nudges")


def contour_count(expr, rect, allow_pole=False, threads=None):
    """Winding count with the (possibly nudged) rectangle it refers to"""
    rect.validate(allow_pole)
    tracker = ArgumentTracker(expr, threads)
    final, strips = _strip_windings(tracker, rect)
    count = sum(c for _, c in strips)
    logger.info("✓ %d zeros in [%g, %g] x [%g, %g]", count, final.sigma_lo, final.sigma_hi, final.t_lo, final.t_hi)
    return CountResult(count, final, tuple(strips))


def winding_count(expr, rect, allow_pole=False, threads=None):
    """(1/2 pi) Delta arg F around rect: zeros minus poles inside"""
    return contour_count(expr, rect, allow_pole, threads).count


def winding_number_on_circle(expr, center, radius, tracker=None):
    tracker = tracker or ArgumentTracker(expr)
    return tracker.circle_winding(center, radius)


def trivial_cluster_count(expr, n, epsilon=0.5):
    """Zeros of F in the disk |s + 2n| < epsilon; epsilon is nudged by 5% steps if needed"""
    if n < 1:
        raise InvalidRectangle(f"n must be at least 1, got {n}")
    if not 0 < epsilon < 1:
        raise InvalidRectangle(f"epsilon must lie in (0, 1), got {epsilon}")
    tracker = ArgumentTracker(expr)
    fraction = get_setting('zeroFinder.clusterNudgeFraction')
    for j in range(get_setting('zeroFinder.maxNudges') + 1):
        factor = 1 + fraction * ((j + 1) // 2) * (1 if j % 2 else -1)
        radius = epsilon * factor
        try:
            return winding_number_on_circle(expr, -2 * n, radius, tracker)
        except BoundaryZeroSuspected:
            logger.info("✗ zero on |s + %d| = %g; nudging epsilon", 2 * n, radius)
    raise BoundaryZeroSuspected(f"cannot find a clean circle around s = {-2 * n}")


# =============================================================================
# REFINEMENT
# =============================================================================

def newton(expr, seed, multiplicity=1):
    """s -= m F/F' until |step| < newtonTolerance; returns (s, converged)"""
    s = complex(seed)
    tol = get_setting('zeroFinder.newtonTolerance')
    for _ in range(get_setting('zeroFinder.newtonMaxIterations')):
        try:
            f, df = evaluate_F_pair(expr, s)
        except ZplabError as e:
            raise NewtonDiverged(f"Newton left the admissible region at {s}: {e}")
        if f == 0:
            return s, True
        if df == 0:
            raise NewtonDiverged(f"F' vanishes at {s}")
        step = complex(multiplicity * f / df)
        if not (math.isfinite(step.real) and math.isfinite(step.imag)):
            raise NewtonDiverged(f"non-finite Newton step at {s}")
        s -= step
        if abs(s - seed) > 10:
            raise NewtonDiverged(f"Newton wandered from {seed} to {s}")
        if abs(step) < max(tol, 4 * np.finfo(float).eps * abs(s)):
            return s, True
    return s, False


def grid_minimize(tracker, box, points=9, rounds=60):
    """Zoom onto the minimum of |F| over a box by repeated grid sampling; never leaves the box"""
    width, height = box.width, box.height
    lo_re, lo_im = box.sigma_lo, box.t_lo
    best = box.center
    for _ in range(rounds):
        grid = [complex(lo_re + width * i / (points - 1), lo_im + height * j / (points - 1))
                for i in range(points) for j in range(points)]
        best = min(grid, key=lambda s: float(abs(tracker.value(s))))
        width, height = 2 * width / (points - 1), 2 * height / (points - 1)
        lo_re = min(max(best.real - width / 2, box.sigma_lo), box.sigma_hi - width)
        lo_im = min(max(best.imag - height / 2, box.t_lo), box.t_hi - height)
        if max(width, height) < 1e-13 * max(1.0, abs(best)):
            break
    return best


def certify(tracker, rho, multiplicity):
    """ZeroRecord with the largest isolating radius whose winding equals the multiplicity"""
    residual = float(abs(evaluate_F(tracker.expr, rho)))
    radius = get_setting('zeroFinder.certificateRadius')
    floor = get_setting('zeroFinder.clusterResolution')
    winding_ok = False
    while radius >= floor:
        try:
            if winding_number_on_circle(tracker.expr, rho, radius, tracker) == multiplicity:
                winding_ok = True
                break
        except (BoundaryZeroSuspected, QuadratureUnstable):
            pass
        radius /= 10
    certified = winding_ok and residual <= get_setting('zeroFinder.residualTolerance')
    if not certified:
        logger.warning("✗ zero near %s not certified (residual %.3g)", rho, residual)
    return ZeroRecord(complex(rho), multiplicity, residual, radius if winding_ok else 0.0, certified)


def _pad(box):
    return 1e-9 * max(1.0, abs(box.center))


def _newton_in_box(tracker, box):
    """Certified simple zero reached by Newton from the box centre, or None"""
    try:
        s, converged = newton(tracker.expr, box.center)
    except NewtonDiverged as e:
        logger.debug("%s; splitting the box", e)
        return None
    if not converged or not box.contains(s, _pad(box)):
        return None
    record = certify(tracker, s, 1)
    return record if record.certified else None


def _try_cluster(tracker, box, count):
    try:
        s, _ = newton(tracker.expr, box.center, count)
    except NewtonDiverged:
        return None
    if not box.contains(s):
        return None
    try:
        if winding_number_on_circle(tracker.expr, s, get_setting('zeroFinder.clusterResolution'),
                                    tracker) != count:
            return None
    except (BoundaryZeroSuspected, QuadratureUnstable):
        return None
    record = certify(tracker, s, count)
    return record if record.certified else None


def _settle(tracker, box, count):
    """Last resort for a box below clusterResolution: minimise |F| inside it, polish, certify"""
    s = grid_minimize(tracker, box)
    try:
        polished, _ = newton(tracker.expr, s, count)
        if box.contains(polished, _pad(box)):
            s = polished
    except NewtonDiverged:
        pass
    return certify(tracker, s, count)


def _quadrants(box, shift):
    sm = (box.sigma_lo + box.sigma_hi) / 2 + shift * box.width
    tm = (box.t_lo + box.t_hi) / 2 + shift * box.height
    return [
        Rectangle(box.sigma_lo, sm, box.t_lo, tm),
        Rectangle(sm, box.sigma_hi, box.t_lo, tm),
        Rectangle(box.sigma_lo, sm, tm, box.t_hi),
        Rectangle(sm, box.sigma_hi, tm, box.t_hi),
    ]


def locate_in_box(tracker, box, count):
    """Zeros inside a box whose winding number is already known"""
    if count <= 0:
        return []
    found = _newton_in_box(tracker, box) if count == 1 else _try_cluster(tracker, box, count)
    if found is not None:
        return [found]
    if max(box.width, box.height) < get_setting('zeroFinder.clusterResolution'):
        return [_settle(tracker, box, count)]

    nudge = get_setting('zeroFinder.nudgeFraction')
    for attempt in range(get_setting('zeroFinder.maxNudges') + 1):
        children = _quadrants(box, nudge * attempt)
        try:
            counts = [tracker.box_winding(child) for child in children]
        except (BoundaryZeroSuspected, QuadratureUnstable):
            continue
        if sum(counts) == count:
            break
        logger.debug("quadrant counts %s do not add up to %d; nudging split", counts, count)
    else:
        raise QuadratureUnstable(f"cannot split box {box} consistently")

    zeros = []
    for child, c in zip(children, counts):
        zeros.extend(locate_in_box(tracker, child, c))
    return zeros


def locate_and_count(expr, rect, allow_pole=False, threads=None):
    """(zeros sorted by gamma then beta, CountResult of the same contour)"""
    rect.validate(allow_pole)
    tracker = ArgumentTracker(expr, threads)
    final, strips = _strip_windings(tracker, rect)
    busy = [(strip, count) for strip, count in strips if count > 0]

    def work(item):
        strip, count = item
        found = locate_in_box(tracker, strip, count)
        logger.info("✓ t in [%.3f, %.3f]: %d zero(s)", strip.t_lo, strip.t_hi, sum(z.multiplicity for z in found))
        return found

    if tracker.threads > 1 and len(busy) > 1:
        with ThreadPoolExecutor(max_workers=tracker.threads) as pool:
            batches = list(pool.map(work, busy))
    else:
        batches = [work(item) for item in busy]

    zeros = [z for batch in batches for z in batch]
    zeros.sort(key=lambda z: (z.gamma, z.beta))
    return zeros, CountResult(sum(c for _, c in strips), final, tuple(strips))


def locate_zeros(expr, rect, allow_pole=False, threads=None):
    """All zeros in rect, sorted by gamma then beta"""
    return locate_and_count(expr, rect, allow_pole, threads)[0]


# =============================================================================
# REPORTING
# =============================================================================

def zeros_frame(zeros):
    return pd.DataFrame({
        'beta': [z.beta for z in zeros],
        'gamma': [z.gamma for z in zeros],
        'multiplicity': [z.multiplicity for z in zeros],
        'residual': [z.residual for z in zeros],
    }, columns=['beta', 'gamma', 'multiplicity', 'residual'])


def export_zeros_csv(zeros, path: Optional[str] = None):
    return zeros_frame(zeros).to_csv(path, index=False, float_format='%.15g')


def zero_summary(zeros: List[ZeroRecord], rect: Rectangle, count: Optional[int] = None):
    located = sum(z.multiplicity for z in zeros)
    summary = {
        'rectangle': rect.to_dict(),
        'zero_count': located,
        'distinct_zeros': len(zeros),
        'multiple_zeros': sum(1 for z in zeros if z.multiplicity > 1),
        'uncertified': sum(1 for z in zeros if not z.certified),
        'max_residual': max((z.residual for z in zeros), default=0.0),
    }
    if count is not None:
        summary['winding_count'] = count
        summary['count_agrees'] = count == located and summary['uncertified'] == 0
    return summary


if __name__ == '__main__':
    from poly_expr import parse_expression

    zeta = parse_expression("z0")
    print("zeros of zeta in [-1,2]x[10,20]:", winding_count(zeta, Rectangle(-1, 2, 10, 20)))
    for z in locate_zeros(zeta, Rectangle(-1, 2, 1, 30)):
        print(f"  {z.beta:.12f} + {z.gamma:.12f}i  (m={z.multiplicity}, residual {z.residual:.2e})")
    print("cluster at -6:", trivial_cluster_count(zeta, 3, 0.5))
