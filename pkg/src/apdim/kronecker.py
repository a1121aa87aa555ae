"""Solutions of the homogeneous simultaneous approximation system
max_j ||omega_j tau - target_j|| < delta.

Two solvers are provided: a continued-fraction walker for the system with
frequencies (1, omega), and an exhaustive certified grid scan for any basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .apfun import Frequency, FrequencyBasis, torus_norm
from .contfrac import ContinuedFraction, convergents, expand, parse_source
from .errors import BudgetExceeded, DepthExhausted, ValidationError
from .intervals import Interval

DEFAULT_BUDGET = 50_000_000


@dataclass(frozen=True)
class KroneckerSystem:
    basis: FrequencyBasis
    delta: float
    target: tuple[float, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.basis, FrequencyBasis):
            object.__setattr__(self, "basis", FrequencyBasis(tuple(self.basis)))
        if not 0 < self.delta < 0.5:
            raise ValidationError("delta must lie in (0, 1/2)")
        tgt = self.target if self.target is not None else (0.0,) * self.basis.n
        if len(tgt) != self.basis.n:
            raise ValidationError("target dimension does not match the basis")
        object.__setattr__(self, "target", tuple(float(x) % 1.0 for x in tgt))

    @property
    def homogeneous(self) -> bool:
        return not any(self.target)


@dataclass(frozen=True)
class SolutionSet:
    """Solution intervals in (0, W] with one representative per interval.

    ``centers`` are the representatives; gaps are measured between them,
    including both window edges.
    """

    window: float
    delta: float
    intervals: tuple[tuple[float, float], ...]
    centers: tuple[float, ...]
    quality: tuple[float, ...]
    method: str
    integer_solutions: tuple[int, ...] = field(default=())

    @property
    def gaps(self) -> np.ndarray:
        pts = np.concatenate([[0.0], np.asarray(self.centers, float), [self.window]])
        return np.diff(pts)

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max())

    def __len__(self) -> int:
        return len(self.centers)


# ---------------------------------------------------------------------------
# convergent walker


class _PhaseOracle:
    """Certified signed fractional parts of q*omega, deepening on demand."""

    def __init__(self, cf: ContinuedFraction, q_max: int, target_width: float):
        self.cf = cf
        self.q_max = max(q_max, 1)
        self.depth = 4
        self.min_width = target_width
        self._set_depth(self.depth)

    def _set_depth(self, depth: int):
        try:
            cf = self.cf.extend(depth + 1)
        except DepthExhausted:
            raise
        cv = convergents(cf, depth + 1)
        self.p, self.qk = cv[-2].p, cv[-2].q
        self.err = Fraction(1, cv[-2].q * cv[-1].q)
        self.depth = depth

    def ensure(self, width: float):
        while float(self.q_max * self.err) > width:
            self._set_depth(self.depth * 2)

    def signed(self, q: int) -> Interval:
        x = Fraction(q * self.p, self.qk)
        x -= round(x)
        r = abs(q) * self.err
        return Interval(x - r, x + r)

    def decide(self, q: int, delta: Fraction) -> tuple[bool, Interval]:
        while True:
            s = self.signed(q)
            a = abs(s)
            if a.hi < delta:
                return True, s
            if a.lo >= delta:
                return False, s
            self._set_depth(self.depth * 2)


def return_candidates(cf: ContinuedFraction, limit: int) -> list[int]:
    """Semiconvergent denominators j*q_k + q_{k-1} (1 <= j <= a_{k+1}) up to ``limit``.

    First-return times of an irrational rotation to an interval are among
    these numbers.
    """
    out = set()
    k = 0
    while True:
        cv = convergents(cf.extend(k + 2), k + 1)
        q_prev = cv[k - 1].q if k else 0
        q_k = cv[k].q
        a_next = cf.extend(k + 1).terms[k]
        if q_prev > limit:
            break
        for j in range(1, a_next + 1):
            d = j * q_k + q_prev
            if d > limit:
                break
            out.add(d)
        out.add(q_k)
        k += 1
    return sorted(d for d in out if 0 < d <= limit)


def _interval_near(q: int, x: Fraction, omega: float, delta: float) -> tuple[float, float]:
    """Real tau near integer q with |tau - q| < delta and |omega tau - (nearest)| < delta."""
    xf = float(x)
    a, b = (-delta - xf) / omega, (delta - xf) / omega
    if a > b:
        a, b = b, a
    return q + max(-delta, a), q + min(delta, b)


def solve_one_freq(omega, delta: float, window: float = 1e4) -> SolutionSet:
    """Integer solutions q in (0, W] of ||q omega|| < delta via return-time stepping."""
    if not 0 < delta < 0.5:
        raise ValidationError("delta must lie in (0, 1/2)")
    cf = omega if isinstance(omega, ContinuedFraction) else expand(parse_source(omega), 8)
    W = int(math.floor(window))
    D = return_candidates(cf, max(W, 1))
    dq = Fraction(delta)
    oracle = _PhaseOracle(cf, W + 1, delta * 1e-6)
    # reported phases (and interval ends) accurate to 1e-13 across the window
    oracle.ensure(1e-13)
    omega_f = float(Fraction(oracle.p, oracle.qk))
    q, sols, xs = 0, [], []
    while True:
        nxt = None
        for d in D:
            if q + d > W:
                break
            ok, s = oracle.decide(q + d, dq)
            if ok:
                nxt, x = q + d, s
                break
        if nxt is None:
            break
        q = nxt
        sols.append(q)
        xs.append(x.mid)
    intervals = tuple(_interval_near(q, x, omega_f, delta) for q, x in zip(sols, xs))
    quality = tuple(float(abs(x)) for x in xs)
    return SolutionSet(
        float(window), delta, intervals, tuple(float(q) for q in sols), quality,
        "convergent", tuple(sols),
    )


# ---------------------------------------------------------------------------
# grid scan


def _cell_pieces(phi: np.ndarray, w: float, step: float, delta: float):
    """Sub-intervals [a, b] of [0, step] where ||phi + w s|| < delta, per cell.

    Returns two candidate pieces (arrays of lo/hi, empty when lo >= hi); with
    |w| step <= delta/2 no cell meets more than two integer windows.
    """
    base = np.floor(phi + 0.5)
    pieces = []
    for n in (base, base + np.sign(w) if w != 0 else base):
        a = (n - delta - phi) / w
        b = (n + delta - phi) / w
        lo = np.maximum(np.minimum(a, b), 0.0)
        hi = np.minimum(np.maximum(a, b), step)
        pieces.append((lo, hi))
    return pieces


def solve_grid(
    system: KroneckerSystem,
    window: float,
    step: float | None = None,
    budget: int = DEFAULT_BUDGET,
    chunk: int = 1 << 20,
) -> SolutionSet:
    """Exhaustive scan of (0, W] intersecting the exact per-cell solution sets."""
    omegas = system.basis.values
    delta = system.delta
    max_step = delta / (2 * np.abs(omegas).max())
    step = max_step if step is None else float(step)
    if step > max_step * (1 + 1e-12):
        raise ValidationError(f"step {step:g} exceeds delta/(2 max|omega|) = {max_step:g}")
    ncells = int(math.ceil(window / step)) + 1
    if ncells * system.basis.n > budget:
        raise BudgetExceeded(f"window needs {ncells} cells, budget is {budget}")
    step_q = Fraction(step)
    target = np.asarray(system.target)
    runs: list[list[float]] = []
    for c0 in range(0, ncells, chunk):
        idx = np.arange(c0, min(ncells, c0 + chunk))
        phases = system.basis.phases_grid(0, step_q, idx) - target
        lo_all = np.zeros(len(idx))
        hi_all = np.full(len(idx), step)
        # the pair of pieces per coordinate gives up to 2**n intersections;
        # in practice at most one survives because the pieces are disjoint
        cand = [(lo_all, hi_all)]
        for j, w in enumerate(omegas):
            pcs = _cell_pieces(phases[:, j], w, step, delta)
            cand = [
                (np.maximum(l1, l2), np.minimum(h1, h2))
                for (l1, h1) in cand
                for (l2, h2) in pcs
            ]
        t0 = idx * step
        for lo, hi in cand:
            keep = np.nonzero(hi > lo)[0]
            for i in keep:
                runs.append([t0[i] + lo[i], t0[i] + hi[i]])
    runs.sort()
    merged: list[list[float]] = []
    tol = step * 1e-9
    for a, b in runs:
        if merged and a <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    if system.homogeneous and merged and merged[0][0] <= tol:
        merged.pop(0)  # the trivial solution around tau = 0
    intervals, centers, quality, ints = [], [], [], []
    for a, b in merged:
        whole = (a, b)
        b = min(b, window)
        if b <= a:
            continue
        mid = Fraction(a + b) / 2
        th = system.basis.phases_at(mid) - target
        qv = float(torus_norm(th))
        if qv >= delta:
            continue
        intervals.append((a, b))
        centers.append(float(mid))
        quality.append(qv)
        for q in range(math.ceil(a), math.floor(b) + 1):
            if whole[0] < q < whole[1] and q <= window:
                ints.append(q)
    return SolutionSet(
        float(window), delta, tuple(intervals), tuple(centers), tuple(quality),
        "grid-scan", tuple(ints),
    )


def verify(system: KroneckerSystem, taus: Sequence[float]) -> np.ndarray:
    """max_j ||omega_j tau - target_j|| for each tau, with exact phases."""
    target = np.asarray(system.target)
    return np.array(
        [float(torus_norm(system.basis.phases_at(Fraction(t)) - target)) for t in taus]
    )


def one_freq_system(omega, delta: float) -> KroneckerSystem:
    return KroneckerSystem(FrequencyBasis(("1", omega)), delta)
