"""Strongly monotone ODEs u' + A(u) = f(t) with quasiperiodic forcing.

The forcing is evaluated at exact phases on the half-step lattice, so the
trajectory driven by f(t + tau) is integrated with the same accuracy as the
unshifted one.  That gives a direct measurement of how far an almost period
of f moves the bounded solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .apfun import SampledTrajectory, TrigPolynomial, shift_distance
from .errors import MonotonicityViolation, NonConvergent, ValidationError

CONVERGENCE_TOL = 1e-6
TRANSIENT_TOL = 1e-8


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True)
class MonotoneOperator:
    """Autonomous map A on R^m with <Au - Av, u - v> >= M |u - v|^alpha."""

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    M: float
    alpha: float
    params: tuple = ()

    def __call__(self, u):
        return self.func(u)


def linear(lam: float) -> MonotoneOperator:
    if lam <= 0:
        raise ValidationError("linear operator needs lambda > 0")
    return MonotoneOperator("linear", lambda u: lam * u, lam, 2.0, (lam,))


def cubic(c1: float, c2: float) -> MonotoneOperator:
    """A(u) = c1 u + c2 u^3 componentwise; monotone with M = c1, alpha = 2."""
    if c1 <= 0 or c2 < 0:
        raise ValidationError("cubic operator needs c1 > 0 and c2 >= 0")
    return MonotoneOperator("cubic", lambda u: c1 * u + c2 * u**3, c1, 2.0, (c1, c2))


OPERATORS = {"linear": linear, "cubic": cubic}


def make_operator(name: str, *params) -> MonotoneOperator:
    try:
        return OPERATORS[name](*params)
    except KeyError:
        raise ValidationError(f"unknown operator {name!r}; known: {sorted(OPERATORS)}") from None


def check_monotonicity(op: MonotoneOperator, dim: int, radius: float = 2.0,
                       pairs: int = 2000, seed: int = 0) -> float:
    """Smallest sampled <Au-Av,u-v> / |u-v|^alpha; raises when below M."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(-radius, radius, (pairs, dim))
    v = rng.uniform(-radius, radius, (pairs, dim))
    d = u - v
    n = np.linalg.norm(d, axis=1)
    ok = n > 0
    ratio = np.sum((op(u) - op(v)) * d, axis=1)[ok] / n[ok] ** op.alpha
    worst = float(ratio.min())
    if worst < op.M * (1 - 1e-12):
        raise MonotonicityViolation(f"sampled ratio {worst:.6g} below declared M = {op.M:g}")
    return worst


# ---------------------------------------------------------------------------
# problem and integrator


@dataclass(frozen=True)
class EvolutionProblem:
    operator: MonotoneOperator
    forcing: TrigPolynomial
    h: float = 0.01
    T: float = 200.0
    u0: tuple[float, ...] | None = None
    state_dim: int | None = None

    def __post_init__(self):
        d = self.forcing.d
        m = self.state_dim or d
        if m != d:
            raise ValidationError(f"forcing has {d} components, state has {m}")
        object.__setattr__(self, "state_dim", m)
        if self.h <= 0 or self.T <= 0:
            raise ValidationError("step and horizon must be positive")
        if self.u0 is None:
            object.__setattr__(self, "u0", (0.0,) * m)
        if len(self.u0) != m:
            raise ValidationError("initial state has the wrong dimension")

    @property
    def M(self) -> float:
        return self.operator.M

    @property
    def mono_alpha(self) -> float:
        return self.operator.alpha

    @property
    def steps(self) -> int:
        return int(round(self.T / self.h))

    def with_(self, **kw) -> EvolutionProblem:
        args = dict(operator=self.operator, forcing=self.forcing, h=self.h, T=self.T,
                    u0=self.u0, state_dim=self.state_dim)
        args.update(kw)
        return EvolutionProblem(**args)


def _forcing_table(f: TrigPolynomial, h: float, steps: int, shifts) -> np.ndarray:
    """f(tau + j h/2) for j = 0..2*steps, shape (len(shifts), 2*steps+1, d); real."""
    half = Fraction(h).limit_denominator(1 << 30) / 2
    rows = []
    for tau in shifts:
        v = f.evaluate_grid(Fraction(tau), half, 2 * steps + 1)
        rows.append(np.real(np.asarray(v)).reshape(2 * steps + 1, -1))
    return np.stack(rows)


def rk4(op: MonotoneOperator, forcing: np.ndarray, h: float, u0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 for a batch; ``forcing`` is (B, 2n+1, m) on the half-step lattice.

    Returns states (B, n+1, m) and derivatives u' = f - A(u) at the nodes.
    """
    B, nh, m = forcing.shape
    n = (nh - 1) // 2
    u = np.broadcast_to(np.asarray(u0, float), (B, m)).copy()
    out = np.empty((B, n + 1, m))
    out[:, 0] = u
    for i in range(n):
        f0, f1, f2 = forcing[:, 2 * i], forcing[:, 2 * i + 1], forcing[:, 2 * i + 2]
        k1 = f0 - op(u)
        k2 = f1 - op(u + 0.5 * h * k1)
        k3 = f1 - op(u + 0.5 * h * k2)
        k4 = f2 - op(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[:, i + 1] = u
    der = forcing[:, ::2] - op(out)
    return out, der


def integrate(problem: EvolutionProblem, shift=0, check: bool = False,
              tail_start: float | None = None) -> SampledTrajectory:
    """Samples of u on [0, T] for u' + A(u) = f(t + shift), u(0) = u0.

    With ``check`` the run is repeated at h/2 and must agree to 1e-6 (sup
    norm) after ``tail_start`` (default T/2).
    """
    f = _forcing_table(problem.forcing, problem.h, problem.steps, [shift])
    vals, der = rk4(problem.operator, f, problem.h, np.asarray(problem.u0))
    traj = SampledTrajectory(0.0, problem.h, vals[0], der[0])
    if check:
        fine = problem.with_(h=problem.h / 2)
        f2 = _forcing_table(fine.forcing, fine.h, fine.steps, [shift])
        v2, _ = rk4(fine.operator, f2, fine.h, np.asarray(fine.u0))
        start = int((problem.T / 2 if tail_start is None else tail_start) / problem.h)
        err = float(np.abs(v2[0, ::2][start:] - vals[0, start:]).max())
        if err >= CONVERGENCE_TOL:
            raise NonConvergent(f"halving the step changes the tail by {err:.3g}")
    return traj


def transient_cutoff(problem: EvolutionProblem, offset: float = 1.0, tol: float = TRANSIENT_TOL) -> float:
    """First time after which runs from u0 and u0 + offset stay within ``tol``."""
    f = _forcing_table(problem.forcing, problem.h, problem.steps, [0])
    f = np.repeat(f, 2, axis=0)
    u0 = np.asarray(problem.u0, float)
    starts = np.stack([u0, u0 + offset])
    m = len(u0)
    B, nh, _ = f.shape
    # run the two initial states as one batch of independent systems
    vals = np.empty((2, (nh - 1) // 2 + 1, m))
    for b in range(2):
        vals[b], _ = (a[0] for a in rk4(problem.operator, f[b:b + 1], problem.h, starts[b]))
    diff = np.linalg.norm(vals[0] - vals[1], axis=1)
    bad = np.nonzero(diff >= tol)[0]
    if len(bad) and bad[-1] == len(diff) - 1:
        raise NonConvergent("transient not settled within the horizon")
    i = 0 if len(bad) == 0 else bad[-1] + 1
    return i * problem.h


# ---------------------------------------------------------------------------
# transfer of almost periods


@dataclass(frozen=True)
class TransferReport:
    pairs: tuple[tuple[float, float, float], ...]
    fitted_C: float
    exponent_fit: float
    predicted_exponent: float
    envelope_C: float
    residual: float
    tail_start: float

    def ratios(self) -> np.ndarray:
        p = np.asarray(self.pairs)
        return p[:, 2] / p[:, 1] ** self.predicted_exponent

    def to_rows(self):
        return [dict(tau=t, eps_f=a, eps_u=b) for t, a, b in self.pairs]


def shifted_quality(problem: EvolutionProblem, taus: Sequence, tail_start: float,
                    batch: int = 64) -> np.ndarray:
    """max over [tail_start, T] of |u_tau(t) - u(t)|, u_tau driven by f(t + tau).

    After the transient u_tau(t) = u(t + tau), so this measures the shift
    quality of the bounded solution over the tail window.
    """
    taus = list(taus)
    base = integrate(problem).values
    start = int(math.ceil(tail_start / problem.h))
    out = np.empty(len(taus))
    u0 = np.asarray(problem.u0)
    for c in range(0, len(taus), batch):
        chunk = taus[c:c + batch]
        f = _forcing_table(problem.forcing, problem.h, problem.steps, chunk)
        vals, _ = rk4(problem.operator, f, problem.h, u0)
        d = np.linalg.norm(vals[:, start:] - base[None, start:], axis=-1)
        out[c:c + len(chunk)] = d.max(axis=1)
    return out


def transfer_check(problem: EvolutionProblem, f_scans, max_per_scan: int = 16,
                   tail_start: float | None = None) -> TransferReport:
    """Measure eps_u at verified almost periods of f and fit eps_u against eps_f."""
    if tail_start is None:
        tail_start = transient_cutoff(problem)
    if tail_start >= problem.T * 0.9:
        raise NonConvergent("transient occupies the horizon")
    taus, eps_f = [], []
    seen = set()
    for sc in f_scans:
        cand = [(t, q) for t, q in zip(sc.periods, sc.qualities) if t > sc.step]
        cand = sorted(cand, key=lambda p: -p[1])[:max_per_scan]
        for t, q in cand:
            key = round(t, 9)
            if key in seen or q <= 0:
                continue
            seen.add(key)
            taus.append(t)
            eps_f.append(q)
    if len(taus) < 3:
        raise ValidationError("need at least three almost periods of f")
    eps_u = shifted_quality(problem, taus, tail_start)
    eps_f = np.asarray(eps_f)
    pred = 1.0 / (problem.mono_alpha - 1.0)
    x, y = np.log(eps_f), np.log(eps_u)
    slope, icpt = np.polyfit(x, y, 1)
    logC = float(np.mean(y - pred * x))
    res = y - pred * x - logC
    order = np.argsort(taus)
    pairs = tuple((float(taus[i]), float(eps_f[i]), float(eps_u[i])) for i in order)
    return TransferReport(
        pairs=pairs,
        fitted_C=float(math.exp(logC)),
        exponent_fit=float(slope),
        predicted_exponent=pred,
        envelope_C=float(np.exp(np.max(y - pred * x))),
        residual=float(np.max(np.abs(res))),
        tail_start=float(tail_start),
    )
