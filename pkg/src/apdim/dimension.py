"""Log-log slope estimators for recurrence and box-counting dimensions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .apfun import ShiftBound, TrigPolynomial, shift_distance
from .errors import InsufficientLadder, Undersampled, ValidationError

MIN_LADDER = 4
DEFAULT_TAIL = 2
FIT_TOLERANCE = 0.25


@dataclass(frozen=True)
class DimensionEstimate:
    ladder: tuple[tuple[float, float], ...]
    slope_upper: float
    slope_lower: float
    fit_slope: float
    residual: float
    tail_start: int
    kind: str
    intercept: float = 0.0
    slopes: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ladder": [list(p) for p in self.ladder],
            "slope_upper": self.slope_upper,
            "slope_lower": self.slope_lower,
            "fit_slope": self.fit_slope,
            "residual": self.residual,
            "tail_start": self.tail_start,
        }

    def plot_columns(self) -> np.ndarray:
        """(ln 1/eps, ln value) rows."""
        e, v = np.asarray(self.ladder).T
        return np.column_stack([np.log(1 / e), np.log(v)])


def _pairs(scans) -> list[tuple[float, float]]:
    out = []
    for s in scans:
        if hasattr(s, "l_hat"):
            out.append((float(s.epsilon), float(s.l_hat)))
        else:
            e, v = s
            out.append((float(e), float(v)))
    return out


def slope_fit(x: np.ndarray, y: np.ndarray, tail_start: int, kind: str, ladder) -> DimensionEstimate:
    x, y = np.asarray(x, float), np.asarray(y, float)
    n = len(x)
    if n < MIN_LADDER:
        raise InsufficientLadder(f"need at least {MIN_LADDER} ladder points, got {n}")
    ts = max(0, min(tail_start, n - 3))
    xt, yt = x[ts:], y[ts:]
    slopes = np.diff(yt) / np.diff(xt)
    A = np.column_stack([xt, np.ones_like(xt)])
    coef, *_ = np.linalg.lstsq(A, yt, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - yt) ** 2)))
    return DimensionEstimate(
        ladder=tuple(ladder),
        slope_upper=float(slopes.max()),
        slope_lower=float(slopes.min()),
        fit_slope=float(coef[0]),
        residual=resid,
        tail_start=ts,
        kind=kind,
        intercept=float(coef[1]),
        slopes=tuple(float(s) for s in slopes),
    )


def _ladder_xy(pairs, power: float = 1.0):
    pairs = sorted(pairs, key=lambda p: -p[0])
    eps = np.array([p[0] for p in pairs])
    val = np.array([p[1] for p in pairs])
    if np.any(eps <= 0) or np.any(val <= 0):
        raise ValidationError("ladder values must be positive")
    if len(set(eps.tolist())) != len(eps):
        raise ValidationError("ladder epsilons must be distinct")
    x = np.log(1.0 / eps)
    if np.any(x <= 0) and power != 1.0:
        raise ValidationError("generalized estimate needs eps < 1")
    return pairs, x ** power if power != 1.0 else x, np.log(val)


def diophantine_estimate(scans, tail_start: int = DEFAULT_TAIL, require_reliable: bool = True) -> DimensionEstimate:
    """Slopes of ln l_hat against ln 1/eps.

    ``slope_upper``/``slope_lower`` are the extreme consecutive slopes over
    the tail and estimate the upper and lower Diophantine dimensions.
    """
    if require_reliable:
        bad = [s.epsilon for s in scans if hasattr(s, "reliable") and not s.reliable]
        if bad:
            raise InsufficientLadder(f"scans at eps={bad} hold fewer than two periods")
    pairs, x, y = _ladder_xy(_pairs(scans))
    return slope_fit(x, y, tail_start, "diophantine", pairs)


def generalized_estimate(scans, d: float, tail_start: int = DEFAULT_TAIL,
                         require_reliable: bool = True) -> DimensionEstimate:
    """As :func:`diophantine_estimate` with abscissa (ln 1/eps)^d."""
    if d <= 0:
        raise ValidationError("d must be positive")
    if d == 1:
        est = diophantine_estimate(scans, tail_start, require_reliable)
        return DimensionEstimate(**{**est.__dict__, "kind": "generalized(1)"})
    if require_reliable:
        bad = [s.epsilon for s in scans if hasattr(s, "reliable") and not s.reliable]
        if bad:
            raise InsufficientLadder(f"scans at eps={bad} hold fewer than two periods")
    pairs, x, y = _ladder_xy(_pairs(scans), d)
    return slope_fit(x, y, tail_start, f"generalized({d:g})", pairs)


# ---------------------------------------------------------------------------
# box counting


def grid_count(points: np.ndarray, eps: float, periodic: bool = False) -> int:
    """Occupied half-open boxes [k eps, (k+1) eps) of the axis-aligned grid."""
    pts = np.asarray(points, float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if periodic:
        pts = pts % 1.0
    keys = np.floor(pts / eps).astype(np.int64)
    keys -= keys.min(axis=0)
    span = keys.max(axis=0) + 1
    if np.prod(span.astype(float)) < 2.0**62:
        flat = np.ravel_multi_index(keys.T, tuple(span))
        return len(np.unique(flat))
    return len(np.unique(keys, axis=0))


def net_count(points: np.ndarray, eps: float, metric: Callable) -> int:
    """Size of a greedy eps-net under ``metric(points, p) -> distances``."""
    pts = np.asarray(points)
    free = np.ones(len(pts), bool)
    count = 0
    while True:
        idx = np.flatnonzero(free)
        if len(idx) == 0:
            return count
        c = idx[0]
        d = metric(pts[idx], pts[c])
        free[idx[d < eps]] = False
        free[c] = False
        count += 1


def box_dimension(points, epsilons: Sequence[float], metric: Callable | None = None,
                  metric_power: float = 1.0, periodic: bool = False,
                  tail_start: int = DEFAULT_TAIL, density_check: bool = True,
                  density_tolerance: float = 0.1) -> DimensionEstimate:
    """Box-counting slope of a finite sample over an eps ladder.

    ``metric_power = a`` measures the set under rho^a: a box of size eps for
    rho^a is a box of size eps^(1/a) for rho.  With ``metric`` the count is a
    greedy eps-net instead of grid occupancy.
    """
    eps = np.sort(np.asarray(epsilons, float))[::-1]
    if metric_power <= 0:
        raise ValidationError("metric_power must be positive")
    scale = eps ** (1.0 / metric_power)
    pts = np.asarray(points)

    def count(sample, e):
        if metric is None:
            return grid_count(sample, e, periodic)
        return net_count(sample, e, metric)

    counts = np.array([count(pts, e) for e in scale], float)
    if density_check:
        half = count(pts[::2], scale[-1])
        change = abs(counts[-1] - half) / counts[-1]
        if change >= density_tolerance:
            raise Undersampled(
                f"halving the sample changes the finest count by {change:.1%}"
            )
    ladder = list(zip(eps.tolist(), counts.tolist()))
    x = np.log(1.0 / eps)
    y = np.log(counts)
    return slope_fit(x, y, tail_start, "box", ladder)


def hull_metric_distance(P: TrigPolynomial, theta1, theta2) -> ShiftBound:
    """Enclosure of sup_theta |h(theta + theta1) - h(theta + theta2)|."""
    delta = (np.asarray(theta1, float) - np.asarray(theta2, float)) % 1.0
    hi = float(P.closed_form_quality(delta[None, :])[0])
    if P.exact_closed_form:
        return ShiftBound(hi, hi)
    g = P.grid_sup(delta)
    return ShiftBound(g.lo, min(hi, g.hi))


def hull_metric(P: TrigPolynomial) -> Callable:
    """Vectorised hull distance for scalar P with independent exponents."""
    if not P.exact_closed_form:
        raise ValidationError("closed-form hull metric needs scalar P with independent exponents")

    def rho(pts, p):
        return P.closed_form_quality((np.asarray(pts) - np.asarray(p)) % 1.0)

    return rho


@dataclass(frozen=True)
class LowerBoundReport:
    box_slope: float | None
    lower_dim: float | None
    delta_term: float | None
    holds: bool | None
    status: str
    tolerance: float = FIT_TOLERANCE

    @property
    def rhs(self) -> float | None:
        if self.lower_dim is None or self.delta_term is None:
            return None
        return self.lower_dim + self.delta_term


def lower_bound_check(scans, delta: Callable[[float], float], box: DimensionEstimate | float,
                      tail_start: int = DEFAULT_TAIL, tolerance: float = FIT_TOLERANCE) -> LowerBoundReport:
    """Compare the measured box slope with lower dimension + liminf ln(1/delta)/ln(1/eps).

    A violation is reported as ``inconclusive`` (the measurement, not the
    inequality, is suspect); short ladders are ``measurement-inadequate``.
    """
    box_slope = box.fit_slope if isinstance(box, DimensionEstimate) else float(box)
    pairs = _pairs(scans)
    if len(pairs) < MIN_LADDER:
        return LowerBoundReport(box_slope, None, None, None, "measurement-inadequate", tolerance)
    est = diophantine_estimate(scans, tail_start, require_reliable=False)
    eps = np.array(sorted((p[0] for p in pairs), reverse=True))[est.tail_start:]
    ratios = [math.log(1 / delta(e)) / math.log(1 / e) for e in eps if e < 1]
    if not ratios:
        return LowerBoundReport(box_slope, est.slope_lower, None, None, "measurement-inadequate", tolerance)
    dterm = float(min(ratios))
    # the tail fit is the stable finite-ladder stand-in for the liminf
    lower = max(0.0, est.fit_slope)
    ok = box_slope <= lower + dterm + tolerance
    return LowerBoundReport(box_slope, lower, dterm, ok, "consistent" if ok else "inconclusive", tolerance)
