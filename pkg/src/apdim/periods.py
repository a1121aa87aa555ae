"""Inclusion-length measurement by scanning for verified epsilon-almost periods.

All scans evaluate shifts on a lattice tau = i * step.  A multi-level pass
discards cells whose certified lower bound exceeds epsilon (using the
modulus of continuity of the quality function), so only neighbourhoods of
near-periods are examined at the finest resolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Protocol, Sequence

import numpy as np

from .apfun import ComposedFunction, SampledTrajectory, TrigPolynomial
from .contfrac import (
    ContinuedFraction,
    classify,
    convergents,
    expand,
    parse_source,
    reciprocal,
)
from .errors import BudgetExceeded, DepthExhausted, Undersampled, ValidationError

DEFAULT_BUDGET = 200_000_000
SPLIT = 16
TOP_CELLS = 1 << 16


class QualityOracle(Protocol):
    """What a scan needs from a function: bounds on tau -> sup_t |u(t+tau)-u(t)|."""

    estimate: bool

    def step_for(self, eps: float) -> float: ...

    def bounds(self, idx: np.ndarray, step, final: bool) -> tuple[np.ndarray, np.ndarray]: ...

    def modulus(self, r): ...


# ---------------------------------------------------------------------------
# oracles


class PolynomialQuality:
    """Certified bounds for a trigonometric polynomial (or a Hoelder image of one)."""

    def __init__(self, f: TrigPolynomial | ComposedFunction):
        self.f = f
        self.estimate = isinstance(f, ComposedFunction)

    def step_for(self, eps: float) -> float:
        if isinstance(self.f, ComposedFunction):
            tr = self.f.transfer
            return 2.0 * (eps / (4.0 * tr.C)) ** (1.0 / tr.alpha) / self.f.P.lip
        return eps / (2.0 * self.f.lip)

    def bounds(self, idx, step, final):
        return self.f.quality_bounds(self.f.shift_deltas(idx, step))

    def refine(self, idx, step, eps=None):
        delta = self.f.shift_deltas(idx, step)
        if isinstance(self.f, ComposedFunction):
            est = self.f.refine(delta, eps)
            return est, self.f.quality_bounds(delta)[1]
        out = [self.f.grid_sup(d) for d in delta]
        return np.array([b.lo for b in out]), np.array([b.hi for b in out])

    def modulus(self, r):
        return self.f.modulus(r)


class SampledQuality:
    """Shift quality of a sampled trajectory over a base window of sample times.

    The max over base samples is a lower bound of the sup over the base
    window.  With derivative samples the gap is bounded per shift by
    (h/2) max|phi'| + (h^2/8) max|phi''| for phi(t) = u(t+tau) - u(t), and
    shifts off the sample lattice use Hermite interpolation.  Without
    derivatives shifts are sample multiples and the gap is the sample modulus.
    """

    estimate = True

    def __init__(self, samples: SampledTrajectory, window: float, base_start=None,
                 base_length=None, probe: int = 256, chunk_elems: int = 1 << 22):
        self.s = samples
        t_end = samples.t0 + samples.T
        start = samples.t0 if base_start is None else float(base_start)
        stop = t_end - window
        if base_length is not None:
            stop = min(stop, start + float(base_length))
        if stop <= start:
            raise ValidationError("trajectory too short for the requested window")
        i0 = int(math.ceil((start - samples.t0) / samples.h - 1e-9))
        i1 = int(math.floor((stop - samples.t0) / samples.h + 1e-9))
        self.base = np.arange(i0, i1 + 1)
        self.probe = self.base[:: max(1, len(self.base) // probe)]
        self.lip = samples.lipschitz()
        self.chunk_elems = chunk_elems
        self.band = 0.0 if samples.derivs is not None else samples.modulus()
        self.last = None
        self.eps = None

    def step_for(self, eps: float) -> float:
        if self.s.derivs is None or self.lip == 0:
            return self.s.h
        return eps / (2.0 * self.lip)

    def _measure(self, taus: np.ndarray, base: np.ndarray, with_band: bool):
        s = self.s
        lo = np.empty(len(taus))
        band = np.zeros(len(taus))
        t_base = s.t0 + base * s.h
        v_base = s.values[base]
        per = max(1, self.chunk_elems // max(1, len(base)))
        smooth = with_band and s.derivs is not None
        for c in range(0, len(taus), per):
            tt = taus[c:c + per]
            tq = t_base[None, :] + tt[:, None]
            if smooth:
                val, der = s.interpolate(tq, derivative=True)
                dphi = np.linalg.norm(der - s.derivs[base][None], axis=-1)
                d2 = np.abs(np.diff(dphi, axis=1)).max(axis=1) / s.h if len(base) > 1 else 0.0
                band[c:c + per] = 0.5 * s.h * dphi.max(axis=1) + s.h**2 / 8.0 * d2
            else:
                val = s.interpolate(tq)
            lo[c:c + per] = np.linalg.norm(val - v_base[None], axis=-1).max(axis=1)
        return lo, band

    def bounds(self, idx, step, final):
        taus = np.asarray(idx, dtype=float) * float(step)
        if not final:
            lo, _ = self._measure(taus, self.probe, False)
            return lo, np.full_like(lo, np.inf)
        # probe first: its max is a lower bound of the full max
        lo, _ = self._measure(taus, self.probe, False)
        band = np.full_like(lo, np.inf)
        live = np.nonzero(lo <= self.eps)[0] if self.eps is not None else np.arange(len(lo))
        if len(live):
            lo_l, band_l = self._measure(taus[live], self.base, True)
            lo[live], band[live] = lo_l, band_l
        if self.s.derivs is None:
            band = np.where(np.isfinite(band), self.band, band)
        self.last = (np.asarray(idx), lo, band)
        return lo, lo + band

    def modulus(self, r):
        return self.lip * np.asarray(r)


# ---------------------------------------------------------------------------
# scan result


@dataclass(frozen=True)
class PeriodScan:
    epsilon: float
    window: float
    step: float
    periods: tuple[float, ...]
    qualities: tuple[float, ...]
    clusters: tuple[tuple[float, float], ...]
    gaps: tuple[float, ...]
    l_hat: float
    undecided: tuple[tuple[float, float], ...] = ()
    evaluations: int = 0
    estimated: bool = False
    band: float = 0.0

    @property
    def n_periods(self) -> int:
        return len(self.periods)

    @property
    def reliable(self) -> bool:
        """At least two periods beyond the trivial one at tau = 0."""
        return sum(1 for t in self.periods if t > self.step) >= 2

    def summary(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "l_hat": self.l_hat,
            "n_periods": self.n_periods,
            "window": self.window,
            "step": self.step,
            "reliable": self.reliable,
            "estimated": self.estimated,
            "undecided_regions": len(self.undecided),
        }


def _runs(idx: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers in sorted ``idx``."""
    if len(idx) == 0:
        return []
    breaks = np.nonzero(np.diff(idx) != 1)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [len(idx) - 1]])
    return [(int(idx[a]), int(idx[b])) for a, b in zip(starts, ends)]


def _candidates(oracle, eps, N, step, budget):
    """Fine indices that survive multi-level elimination, with their bounds."""
    m = 1
    while (N // m) > TOP_CELLS:
        m *= SPLIT
    starts = np.arange(0, N, m, dtype=np.int64)
    evals = 0
    while True:
        ends = np.minimum(starts + m, N)
        pts = np.unique(np.concatenate([starts, ends]))
        evals += len(pts)
        if evals > budget:
            raise BudgetExceeded(f"scan needs more than {budget} evaluations")
        lo, hi = oracle.bounds(pts, step, m == 1)
        if m == 1:
            return pts, lo, hi, evals
        pos_s = np.searchsorted(pts, starts)
        pos_e = np.searchsorted(pts, ends)
        width = (ends - starts) * float(step)
        keep = np.minimum(lo[pos_s], lo[pos_e]) - oracle.modulus(width / 2.0) <= eps
        starts = starts[keep]
        sub = max(1, m // SPLIT)
        starts = (starts[:, None] + sub * np.arange(m // sub)).ravel()
        starts = np.unique(starts[starts < N])
        m = sub


def scan_oracle(oracle, epsilon: float, window: float, step=None,
                budget: int = DEFAULT_BUDGET, refine_limit: int = 20000) -> PeriodScan:
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    if window <= 0:
        raise ValidationError("window must be positive")
    step = oracle.step_for(epsilon) if step is None else step
    step_q = Fraction(step).limit_denominator(1 << 40) if not isinstance(step, Fraction) else step
    s = float(step_q)
    N = int(math.floor(window / s))
    pts, lo, hi, evals = _candidates(oracle, epsilon, N, step_q, budget)
    yes = hi <= epsilon
    und = ~yes & (lo <= epsilon)
    score = hi.copy()
    estimated = False
    if und.any() and hasattr(oracle, "refine"):
        sel = np.nonzero(und)[0][:refine_limit]
        lo2, hi2 = oracle.refine(pts[sel], step_q, epsilon)
        evals += len(sel)
        lo[sel] = np.maximum(lo[sel], lo2)
        hi[sel] = np.minimum(hi[sel], hi2)
        yes = hi <= epsilon
        und = ~yes & (lo <= epsilon)
    if oracle.estimate and und.any():
        # estimate mode: undecided shifts count when the lower estimate passes
        yes = yes | und
        score = np.where(und, lo, hi)
        estimated = True
        und = np.zeros_like(und)
    else:
        score = hi
    good = pts[yes]
    runs = _runs(good)
    reps, quals = [], []
    for a, b in runs:
        ia, ib = np.searchsorted(pts, [a, b])
        ii = np.arange(ia, ib + 1)
        j = ii[np.argmin(score[ii])]
        reps.append(float(pts[j]) * s)
        quals.append(float(score[j]))
    if runs:
        edges = [runs[0][0] * s]
        edges += [(runs[i + 1][0] - runs[i][1]) * s for i in range(len(runs) - 1)]
        edges += [(N - runs[-1][1]) * s]
    else:
        edges = [N * s]
    l_hat = max(max(edges), s)
    undecided = tuple((a * s, b * s) for a, b in _runs(pts[und]))
    band = float(getattr(oracle, "band", 0.0))
    return PeriodScan(
        epsilon=float(epsilon),
        window=N * s,
        step=s,
        periods=tuple(reps),
        qualities=tuple(quals),
        clusters=tuple((a * s, b * s) for a, b in runs),
        gaps=tuple(edges),
        l_hat=float(l_hat),
        undecided=undecided,
        evaluations=int(evals),
        estimated=estimated,
        band=band,
    )


def scan(P, epsilon: float, window: float, step=None, budget: int = DEFAULT_BUDGET) -> PeriodScan:
    """Verified epsilon-almost periods of P in [0, W] and the empirical inclusion length."""
    return scan_oracle(PolynomialQuality(P), epsilon, window, step, budget)


def scan_sampled(samples: SampledTrajectory, epsilon: float, window: float,
                 base_start=None, base_length=None, budget: int = DEFAULT_BUDGET) -> PeriodScan:
    """As :func:`scan`, with the sup over t replaced by a max over base samples.

    Fails with ``Undersampled`` when the sampling gap could exceed epsilon/4:
    globally without derivative samples, or at any shift counted as a period.
    """
    if samples.derivs is None and samples.modulus() > epsilon / 4:
        raise Undersampled(
            f"sample modulus {samples.modulus():.3g} exceeds epsilon/4 = {epsilon / 4:.3g}"
        )
    oracle = SampledQuality(samples, window, base_start, base_length)
    oracle.eps = epsilon
    res = scan_oracle(oracle, epsilon, window, None, budget)
    idx, lo, band = oracle.last
    counted = band[lo <= epsilon]
    worst = float(counted.max()) if counted.size else 0.0
    if worst > epsilon / 4:
        raise Undersampled(f"sampling band {worst:.3g} exceeds epsilon/4 = {epsilon / 4:.3g}")
    return replace(res, band=worst)


def scan_adaptive(P, epsilon: float, window: float = 64.0, min_periods: int = 8,
                  max_window: float = 1e7, budget: int = DEFAULT_BUDGET, oracle=None) -> PeriodScan:
    """Double the window until it holds ``min_periods`` periods and l_hat <= W/4."""
    oracle = oracle or PolynomialQuality(P)
    W = float(window)
    while True:
        res = scan_oracle(oracle, epsilon, W, budget=budget)
        if (res.n_periods >= min_periods and res.l_hat <= W / 4) or W >= max_window:
            return res
        W = min(2 * W, max_window)


def scan_ladder(P, epsilons: Sequence[float], window: float = 64.0, **kw) -> list[PeriodScan]:
    out = []
    W = window
    for eps in epsilons:
        res = scan_adaptive(P, eps, W, **kw)
        out.append(res)
        W = max(W, res.window / 2)
    return out


@dataclass(frozen=True)
class HolderCheck:
    """Periods of P at quality eps^(1/alpha) re-measured as periods of chi(P)."""

    epsilon: float
    level: float
    taus: tuple[float, ...]
    quality_p: tuple[float, ...]
    certified: tuple[float, ...]
    measured: tuple[float, ...]

    @property
    def passed(self) -> int:
        return int(sum(m <= self.level for m in self.measured))

    @property
    def fraction(self) -> float:
        return self.passed / len(self.taus) if self.taus else 1.0


def holder_transfer_check(F: ComposedFunction, epsilon: float, window: float,
                          grid_points: int = 1 << 16) -> HolderCheck:
    """Scan P for eps^(1/alpha)-almost periods and re-measure each on chi(P).

    ``certified`` is the Hoelder bound C * Q_P^alpha; ``measured`` is an
    independent dense torus-grid value of the chi(P) shift quality, and a
    period re-verifies when it is at most C * eps.
    """
    tr = F.transfer
    res = scan(F.P, epsilon ** (1.0 / tr.alpha), window)
    taus = [t for t in res.periods if t > res.step]
    quals = [q for t, q in zip(res.periods, res.qualities) if t > res.step]
    if taus:
        delta = np.stack([F.P.basis.phases_at(t) for t in taus])
        measured = F.grid_estimate(delta, grid_points)
    else:
        measured = np.zeros(0)
    return HolderCheck(
        epsilon=float(epsilon),
        level=float(tr.C * epsilon),
        taus=tuple(taus),
        quality_p=tuple(quals),
        certified=tuple(float(tr.level(q)) for q in quals),
        measured=tuple(float(m) for m in measured),
    )


# ---------------------------------------------------------------------------
# theoretical ladder


@dataclass(frozen=True)
class NaitoLadder:
    """Pairs (eps_k, L_k): every interval of length L_k holds an eps_k-almost period."""

    eps: tuple[float, ...]
    L: tuple[float, ...]
    k: tuple[int, ...]
    g_constant: float
    corrected: bool = True

    def __iter__(self):
        return iter(zip(self.eps, self.L))

    def inclusion_bound(self, epsilon: float) -> float:
        """L(eps) for eps_{k0+1} <= eps < eps_{k0}.

        The corrected rule returns L_{k0+1}; the uncorrected one returns
        L_{k0}, which is not a valid bound in general.
        """
        e = np.asarray(self.eps)
        k0 = np.nonzero(e > epsilon)[0]
        if len(k0) == 0 or k0[-1] + 1 >= len(e):
            raise DepthExhausted("epsilon outside the computed ladder")
        i = int(k0[-1])
        return self.L[i + 1] if self.corrected else self.L[i]

    def slope(self) -> float:
        x = np.log(1.0 / np.asarray(self.eps))
        y = np.log(np.asarray(self.L))
        return float(np.polyfit(x, y, 1)[0])


def naito_ladder(omega, alpha2: float = 1.0, C_h: float = 2 * math.pi,
                 depth: int = 12, corrected: bool = True, k_min: int = 1) -> NaitoLadder:
    """Theoretical (eps_k, L_k) ladder for u(t) = h(omega t, t).

    eps_k = C_h / (1 + C^(-alpha2)) * q_{k+1}^(-alpha2) and L_k = q_{k+1} / omega,
    with q_k the convergent denominators of 1/omega and C its growth constant.
    """
    cf = omega if isinstance(omega, ContinuedFraction) else expand(parse_source(omega), depth + 2)
    inv = reciprocal(cf.extend(depth + 2))
    prof = classify(inv, depth + 1)
    if not prof.g_property:
        raise ValidationError("1/omega lacks the growth property on the computed prefix")
    C = prof.min_ratio
    cv = convergents(inv, depth + 1)
    inv_val = float(Fraction(cv[-1].p, cv[-1].q))
    eps, L, ks = [], [], []
    for k in range(k_min, depth):
        q1 = cv[k + 1].q
        eps.append(C_h / (1.0 + C ** (-alpha2)) * q1 ** (-alpha2))
        L.append(q1 * inv_val)
        ks.append(k)
    return NaitoLadder(tuple(eps), tuple(L), tuple(ks), float(C), corrected)
