"""Time averages along u(t) = exp(2 pi i t) + exp(2 pi i omega t) and the
closeness of Liouville-type trajectories to periodic ones."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .apfun import Frequency, TrigPolynomial, torus_grid, two_frequency
from .contfrac import ContinuedFraction, approximation_gap, convergents, expand, parse_source
from .errors import Undersampled, ValidationError

QUAD_TOL = 1e-4
CHUNK = 1 << 20


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Region:
    """Named membership predicate on the complex plane."""

    kind: str
    params: tuple[float, ...] = ()

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.kind == "half-plane":
            angle = self.params[0] if self.params else 0.0
            return (z * np.exp(-1j * angle)).real > 0
        if self.kind == "annulus":
            r1, r2 = self.params
            r = np.abs(z)
            return (r >= r1) & (r < r2)
        if self.kind == "sector":
            a1, a2 = self.params
            arg = np.mod(np.angle(z) - a1, 2 * np.pi)
            return arg < np.mod(a2 - a1, 2 * np.pi)
        raise ValidationError(f"unknown region kind {self.kind!r}")

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}({','.join(f'{p:g}' for p in self.params)})"


def half_plane(angle: float = 0.0) -> Region:
    return Region("half-plane", (float(angle),))


def annulus(r1: float, r2: float) -> Region:
    if not 0 <= r1 < r2:
        raise ValidationError("annulus needs 0 <= r1 < r2")
    return Region("annulus", (float(r1), float(r2)))


def sector(phi1: float, phi2: float) -> Region:
    return Region("sector", (float(phi1), float(phi2)))


def parse_region(text: str) -> Region:
    """'half-plane', 'half-plane(0.3)', 'annulus(0.5,1)', 'sector(0,0.2)'."""
    text = text.strip()
    if "(" in text:
        kind, rest = text.split("(", 1)
        params = tuple(float(x) for x in rest.rstrip(")").split(",") if x.strip())
    else:
        kind, params = text, ()
    kind = kind.strip()
    if kind == "half-plane":
        return half_plane(*params)
    if kind == "annulus":
        return annulus(*params)
    if kind == "sector":
        return sector(*params)
    raise ValidationError(f"unknown region {text!r}")


# ---------------------------------------------------------------------------
# torus oracle and time averages


GRID_SHIFT = 1 / math.pi  # keeps grid nodes off lines theta_1 +- theta_2 = const


def torus_measure(region: Region, g: int = 2048) -> float:
    """Area fraction of {theta : exp(2 pi i theta_1) + exp(2 pi i theta_2) in C}.

    Midpoint grid on the torus, second axis offset by an irrational fraction
    of a cell; depends only on the region, not on omega.
    """
    w1 = np.exp(2j * np.pi * (np.arange(g) + 0.5) / g)
    w2 = np.exp(2j * np.pi * (np.arange(g) + 0.5 + GRID_SHIFT) / g)
    count = 0
    for i in range(g):
        count += int(np.count_nonzero(region(w1[i] + w2)))
    return count / (g * g)


def _next_prime(n: int) -> int:
    n = max(n, 2)
    while any(n % p == 0 for p in range(2, math.isqrt(n) + 1)):
        n += 1
    return n


def _indicator_mean(P: TrigPolynomial, region: Region, T, h) -> float:
    """Midpoint rule for (1/T) int_0^T chi_C(P(t)) dt with exact phases.

    The node count is prime so that nodes do not resonate with a rational
    period of the trajectory.
    """
    n = int(round(Fraction(T) / Fraction(h)))
    if n <= 0:
        raise ValidationError("horizon must exceed the step")
    n = _next_prime(n)
    step = Fraction(T) / n
    total = 0
    for c in range(0, n, CHUNK):
        m = min(CHUNK, n - c)
        vals = P.evaluate_grid(step * c + step / 2, step, m).ravel()
        total += int(np.count_nonzero(region(vals)))
    return total / n


@dataclass(frozen=True)
class BirkhoffRun:
    omega: object
    region: Region
    horizons: tuple[float, ...]
    step: float = 0.01

    def trajectory(self) -> TrigPolynomial:
        return two_frequency(self.omega)


@dataclass(frozen=True)
class BirkhoffResult:
    horizons: tuple[float, ...]
    averages: tuple[float, ...]
    reference: float
    steps: tuple[float, ...]

    @property
    def errors(self) -> np.ndarray:
        return np.abs(np.asarray(self.averages) - self.reference)

    def rows(self):
        return [
            dict(T=T, average=a, reference=self.reference, abs_error=abs(a - self.reference))
            for T, a in zip(self.horizons, self.averages)
        ]


def birkhoff(run: BirkhoffRun, oracle_grid: int = 2048, max_halvings: int = 4) -> BirkhoffResult:
    """Time averages per horizon, each accepted once halving the step moves it < 1e-4."""
    P = run.trajectory()
    avgs, steps = [], []
    for T in run.horizons:
        h = Fraction(run.step).limit_denominator(1 << 20)
        a = _indicator_mean(P, run.region, T, h)
        for _ in range(max_halvings + 1):
            b = _indicator_mean(P, run.region, T, h / 2)
            if abs(a - b) < QUAD_TOL:
                break
            a, h = b, h / 2
        else:
            raise Undersampled(f"quadrature at T={T} did not settle")
        avgs.append(b)
        steps.append(float(h / 2))
    return BirkhoffResult(
        tuple(float(T) for T in run.horizons), tuple(avgs),
        torus_measure(run.region, oracle_grid), tuple(steps),
    )


# ---------------------------------------------------------------------------
# Liouville closeness


@dataclass(frozen=True)
class ClosenessReport:
    p: int
    q: int
    horizon: float
    gap: tuple[float, float]
    bound: float
    measured: float
    stated_bound: float | None = None

    @property
    def sound(self) -> bool:
        return self.measured <= self.bound


def liouville_closeness(omega, k: int, horizon: float, samples: int = 4097,
                        stated_gap: float | None = None) -> ClosenessReport:
    """sup_{0<=t<=T} |u(t) - g(t)| for g using the convergent p_k/q_k in place of omega.

    The certified bound is 2 pi T times the upper end of the convergent gap;
    ``stated_gap`` adds the bound implied by a caller-supplied gap.
    """
    cf = omega if isinstance(omega, ContinuedFraction) else expand(parse_source(omega), k + 2)
    cv = convergents(cf, k + 1)
    p, q = cv[k].p, cv[k].q
    gap = approximation_gap(cf, k)
    bound = 2 * math.pi * float(gap.hi) * horizon
    u = two_frequency(cf)
    g = two_frequency(f"{p}/{q}")
    T = Fraction(horizon)
    if samples < 2 or T == 0:
        measured = 0.0
    else:
        step = T / (samples - 1)
        measured = float(np.abs(u.evaluate_grid(0, step, samples) - g.evaluate_grid(0, step, samples)).max())
    stated = None if stated_gap is None else 2 * math.pi * stated_gap * horizon
    return ClosenessReport(p, q, float(horizon), (float(gap.lo), float(gap.hi)), bound, measured, stated)
