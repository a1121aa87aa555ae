"""Quasiperiodic trigonometric polynomials and their torus representation.

Frequencies are stored in cycles per unit time: a polynomial with integer
exponent matrix ``a`` over the basis ``nu`` is

    P(t) = sum_k A_k exp(2 pi i (a_k . nu) t),

so the torus coordinates are theta_j = nu_j t mod 1.  Phases are reduced
mod 1 from exact rational approximations of ``nu`` (see :func:`frac_mul`),
which keeps them accurate for shifts far beyond where ``float(nu) * t``
loses all meaning.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .contfrac import NumericSource, TermSource, convergents, expand, parse_source
from .errors import HolderViolation, PrecisionExhausted, ValidationError
from .intervals import Interval

TWO_PI = 2.0 * math.pi
PHASE_TOLERANCE = 1e-12
FREQ_WIDTH = Fraction(1, 10**45)
GRID_POINTS = 1 << 16


# ---------------------------------------------------------------------------
# exact phase reduction

_B26 = 1 << 26
_B52 = 1 << 52


def _limbs(c: Fraction) -> tuple[int, int, float]:
    c = c - math.floor(c)
    l1 = math.floor(c * _B26)
    r = c - Fraction(l1, _B26)
    l2 = math.floor(r * _B52)
    return l1, l2, float(r - Fraction(l2, _B52))


def _frac_mul_small(j: np.ndarray, c: Fraction) -> np.ndarray:
    l1, l2, c3 = _limbs(c)
    x1 = ((j * l1) % _B26) / _B26
    x2 = ((j * l2) % _B52) / _B52
    return (x1 + x2 + j * c3) % 1.0


def frac_mul(i, c: Fraction) -> np.ndarray:
    """frac(i * c) for integer arrays |i| < 2**52, accurate to ~1e-16."""
    i = np.asarray(i, dtype=np.int64)
    neg = i < 0
    a = np.abs(i)
    hi, lo = a >> 26, a & (_B26 - 1)
    c_hi = c * _B26
    out = (_frac_mul_small(hi, c_hi) + _frac_mul_small(lo, c)) % 1.0
    if neg.any():
        out = np.where(neg, (1.0 - out) % 1.0, out)
    return out


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


# ---------------------------------------------------------------------------
# frequencies


def certified_enclosure(src: TermSource, width: Fraction) -> Interval:
    """Tightest available enclosure, aiming for ``width``.

    Continued-fraction sources deepen until the convergent bracket is narrow
    enough; numeric seeds refine when they can and otherwise return what they
    have.
    """
    if isinstance(src, NumericSource):
        seed, digits = src.seed, src.digits
        while seed.width > width and src.refine is not None and digits < src.max_digits:
            digits *= 2
            seed = src.refine(digits)
        return seed
    depth = 8
    while True:
        cv = convergents(expand(src, depth), depth)
        a, b = cv[-2], cv[-1]
        if Fraction(1, a.q * b.q) <= width or depth >= 4096:
            x, y = Fraction(a.p, a.q), Fraction(b.p, b.q)
            return Interval(min(x, y), max(x, y))
        depth *= 2


@dataclass(frozen=True)
class Frequency:
    label: str
    value: Fraction
    error: Fraction
    source: TermSource | None = field(default=None, compare=False, repr=False)

    @classmethod
    def parse(cls, spec, width: Fraction = FREQ_WIDTH) -> Frequency:
        if isinstance(spec, Frequency):
            return spec
        label = spec if isinstance(spec, str) else str(spec)
        src = parse_source(spec)
        enc = certified_enclosure(src, width)
        return cls(label, enc.mid, enc.width / 2, src)

    @classmethod
    def decimal(cls, text: str, digits: int) -> Frequency:
        return cls(text, Fraction(text), Fraction(1, 10**digits) / 2)

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class FrequencyBasis:
    """Frequencies nu_1..nu_n, declared rationally independent by the caller."""

    omegas: tuple[Frequency, ...]
    independence_declared: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "omegas", tuple(Frequency.parse(w) for w in self.omegas)
        )
        if not self.omegas:
            raise ValidationError("basis needs at least one frequency")
        if any(w.value == 0 for w in self.omegas):
            raise ValidationError("basis frequencies must be non-zero")

    @property
    def n(self) -> int:
        return len(self.omegas)

    @property
    def values(self) -> np.ndarray:
        return np.array([float(w.value) for w in self.omegas])

    def phases_at(self, t) -> np.ndarray:
        """theta_j = nu_j t mod 1 computed exactly."""
        t = Fraction(t)
        return np.array([float(_frac(w.value * t)) for w in self.omegas])

    def phases_grid(self, start, step, idx) -> np.ndarray:
        """theta_j at tau = start + i*step for integer array ``idx``; shape (len, n)."""
        start, step = Fraction(start), Fraction(step)
        idx = np.asarray(idx, dtype=np.int64)
        cols = []
        for w in self.omegas:
            c0 = float(_frac(w.value * start))
            cols.append((c0 + frac_mul(idx, _frac(w.value * step))) % 1.0)
        return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# torus


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "coords", tuple(float(c) % 1.0 for c in self.coords)
        )

    def __array__(self, dtype=None):
        return np.asarray(self.coords, dtype=dtype)

    def __sub__(self, other: TorusPoint) -> TorusPoint:
        return TorusPoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __add__(self, other: TorusPoint) -> TorusPoint:
        return TorusPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))


def torus_norm(x) -> np.ndarray:
    """|theta|_T^n = max_j distance of theta_j to the nearest integer."""
    x = np.asarray(x, dtype=float)
    d = np.abs(x - np.round(x))
    return d.max(axis=-1)


def torus_distance(a, b) -> float | np.ndarray:
    return torus_norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def torus_grid(n: int, g: int) -> np.ndarray:
    axes = [(np.arange(g) + 0.5) / g] * n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


def _grid_side(n: int, max_points: int) -> int:
    return max(2, int(math.floor(max_points ** (1.0 / n))))


# ---------------------------------------------------------------------------
# trigonometric polynomials


class Verdict(str, enum.Enum):
    YES = "verified-yes"
    NO = "verified-no"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class ShiftBound:
    lo: float
    hi: float

    def __iter__(self):
        return iter((self.lo, self.hi))


class TrigPolynomial:
    """Finite sum of A_k exp(2 pi i (a_k . nu) t) with A_k in C^d.

    With ``real=True`` the function is the real part of that sum.
    """

    def __init__(self, basis, exponents, amplitudes, real: bool = False):
        if not isinstance(basis, FrequencyBasis):
            basis = FrequencyBasis(tuple(basis))
        self.basis = basis
        self.exponents = np.atleast_2d(np.asarray(exponents, dtype=np.int64))
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.ndim == 1:
            amps = amps[:, None]
        self.amplitudes = amps
        self.real = bool(real)
        K, n = self.exponents.shape
        if n != basis.n:
            raise ValidationError(f"exponent matrix has {n} columns, basis has {basis.n}")
        if amps.shape[0] != K:
            raise ValidationError("one amplitude vector per exponent row required")
        if np.any(np.linalg.norm(amps, axis=1) == 0):
            raise ValidationError("amplitudes must be non-zero")
        if len({tuple(r) for r in self.exponents.tolist()}) != K:
            raise ValidationError("exponents must be pairwise distinct")
        self.norms = np.linalg.norm(amps, axis=1)
        self._exact_lambda = [
            sum((int(a) * w.value for a, w in zip(row, basis.omegas)), Fraction(0))
            for row in self.exponents.tolist()
        ]
        self.cycles = np.array([float(x) for x in self._exact_lambda])
        self.lambdas = TWO_PI * self.cycles
        self.lip = float(np.sum(self.norms * np.abs(self.lambdas)))
        self.independent = (
            K <= n and np.linalg.matrix_rank(self.exponents.astype(float)) == K
        )
        errs = np.array([float(w.error) for w in basis.omegas])
        self.phase_error_rate = float(np.max(np.abs(self.exponents) @ errs)) if K else 0.0

    # -- basic properties

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def d(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def K(self) -> int:
        return self.exponents.shape[0]

    @property
    def amplitude_sum(self) -> float:
        return float(self.norms.sum())

    @property
    def exact_closed_form(self) -> bool:
        """True when sup_t |P(t+tau)-P(t)| equals sum_k |A_k||e^{i lambda_k tau}-1|."""
        return self.d == 1 and self.independent

    @property
    def horizon(self) -> float:
        """Largest |t| for which phases stay within PHASE_TOLERANCE."""
        if self.phase_error_rate == 0:
            return math.inf
        return PHASE_TOLERANCE / self.phase_error_rate

    def check_horizon(self, t) -> None:
        if abs(float(Fraction(t))) > self.horizon:
            raise PrecisionExhausted(
                f"|t| = {float(t):g} exceeds certified horizon {self.horizon:g}"
            )

    def torus_lipschitz(self) -> np.ndarray:
        """Per-coordinate Lipschitz constants of h on the torus (sup metric)."""
        return TWO_PI * (self.norms[:, None] * np.abs(self.exponents)).sum(axis=0)

    # -- evaluation

    def _combine(self, term_phases: np.ndarray) -> np.ndarray:
        w = np.exp(2j * math.pi * term_phases)
        out = w @ self.amplitudes
        return out.real if self.real else out

    def term_phases(self, theta: np.ndarray) -> np.ndarray:
        return (np.asarray(theta) @ self.exponents.T) % 1.0

    def evaluate(self, t) -> np.ndarray:
        self.check_horizon(t)
        return self._combine(self.term_phases(self.basis.phases_at(t)))

    def evaluate_grid(self, start, step, count: int) -> np.ndarray:
        last = float(start) + float(step) * (count - 1)
        self.check_horizon(max(abs(float(start)), abs(last)))
        theta = self.basis.phases_grid(start, step, np.arange(count))
        return self._combine(self.term_phases(theta))

    def derivative_grid(self, start, step, count: int) -> np.ndarray:
        theta = self.basis.phases_grid(start, step, np.arange(count))
        w = np.exp(2j * math.pi * self.term_phases(theta))
        out = (w * (1j * self.lambdas)) @ self.amplitudes
        return out.real if self.real else out

    def representing_function(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return self._combine(self.term_phases(theta))

    __call__ = evaluate

    # -- shift quality

    def shift_coefficients(self, delta: np.ndarray) -> np.ndarray:
        """c_k = exp(2 pi i a_k . Delta) - 1 for torus displacements Delta."""
        return np.exp(2j * math.pi * self.term_phases(delta)) - 1.0

    def closed_form_quality(self, delta: np.ndarray) -> np.ndarray:
        """Triangle bound sum_k |A_k| |c_k|; exact when ``exact_closed_form``."""
        return np.abs(self.shift_coefficients(delta)) @ self.norms

    def shift_deltas(self, idx, step, start=0) -> np.ndarray:
        return self.basis.phases_grid(start, step, idx)

    def grid_sup(self, delta, max_points: int = GRID_POINTS) -> ShiftBound:
        """Torus-grid enclosure of sup_theta |h(theta+Delta) - h(theta)|."""
        delta = np.asarray(delta, dtype=float)
        c = self.shift_coefficients(delta)
        B = self.amplitudes * c[:, None]
        g = _grid_side(self.n, max_points)
        theta = torus_grid(self.n, g)
        w = np.exp(2j * math.pi * self.term_phases(theta))
        vals = w @ B
        if self.real:
            vals = vals.real
        lo = float(np.linalg.norm(np.atleast_2d(vals), axis=-1).max())
        Bn = np.linalg.norm(B, axis=1)
        modulus = float(
            np.sum(Bn * TWO_PI * np.abs(self.exponents).sum(axis=1)) / (2 * g)
        )
        tri = float(Bn.sum())
        return ShiftBound(min(lo, tri), min(tri, lo + modulus))

    def quality_bounds(self, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Cheap certified (lo, hi) of the shift quality for rows of ``delta``."""
        delta = np.atleast_2d(delta)
        c = self.shift_coefficients(delta)
        hi = np.abs(c) @ self.norms
        if self.exact_closed_form:
            return hi, hi
        probes = torus_grid(self.n, 2)
        probes = np.vstack([np.zeros(self.n), probes])
        lo = np.zeros(len(delta))
        for th in probes:
            w = np.exp(2j * math.pi * self.term_phases(th))
            v = (c * w) @ self.amplitudes
            if self.real:
                v = v.real
            lo = np.maximum(lo, np.linalg.norm(v, axis=1))
        return np.minimum(lo, hi), hi

    def modulus(self, r):
        """Bound on |Q(tau) - Q(tau')| for |tau - tau'| <= r."""
        return self.lip * np.asarray(r)


def two_frequency(omega="sqrt2", amplitudes=(1.0, 1.0), real: bool = False) -> TrigPolynomial:
    """exp(2 pi i t) + exp(2 pi i omega t), the canonical two-frequency example."""
    return TrigPolynomial(("1", omega), [[1, 0], [0, 1]], list(amplitudes), real=real)


def single_frequency(omega="1", amplitude=1.0, real: bool = False) -> TrigPolynomial:
    return TrigPolynomial((omega,), [[1]], [amplitude], real=real)


# ---------------------------------------------------------------------------
# operations


def evaluate(P: TrigPolynomial, t) -> np.ndarray:
    return P.evaluate(t)


def representing_function(P: TrigPolynomial, theta) -> np.ndarray:
    if isinstance(theta, TorusPoint):
        theta = np.asarray(theta)
    return P.representing_function(theta)


def shift_distance(P: TrigPolynomial, tau, max_points: int = GRID_POINTS) -> ShiftBound:
    """Certified enclosure [lo, hi] of sup_t |P(t+tau) - P(t)|."""
    P.check_horizon(tau)
    delta = P.basis.phases_at(tau)
    hi = float(P.closed_form_quality(delta[None, :])[0])
    if P.exact_closed_form:
        return ShiftBound(hi, hi)
    grid = P.grid_sup(delta, max_points)
    return ShiftBound(grid.lo, min(hi, grid.hi))


def verdict(bound: ShiftBound, epsilon: float) -> Verdict:
    if bound.hi <= epsilon:
        return Verdict.YES
    if bound.lo > epsilon:
        return Verdict.NO
    return Verdict.UNDECIDED


def is_almost_period(P: TrigPolynomial, tau, epsilon: float) -> Verdict:
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    return verdict(shift_distance(P, tau), epsilon)


# ---------------------------------------------------------------------------
# sampled trajectories and Hoelder maps


@dataclass(frozen=True)
class SampledTrajectory:
    """Samples u(t0 + i*h); ``derivs`` (same shape) enables Hermite dense output."""

    t0: float
    h: float
    values: np.ndarray
    derivs: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 1:
            v = v[:, None]
        object.__setattr__(self, "values", v)
        if self.derivs is not None:
            dv = np.asarray(self.derivs)
            object.__setattr__(self, "derivs", dv.reshape(v.shape))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(len(self))

    @property
    def T(self) -> float:
        return self.h * (len(self) - 1)

    def modulus(self) -> float:
        """Empirical modulus of continuity at the sample step."""
        if len(self) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.values, axis=0), axis=1).max())

    def lipschitz(self) -> float:
        if self.derivs is not None:
            return float(np.linalg.norm(self.derivs, axis=1).max())
        return self.modulus() / self.h

    def interpolate(self, t, derivative: bool = False):
        """Cubic Hermite (or linear, without derivatives) interpolation.

        With ``derivative`` the interpolant's time derivative is returned too.
        """
        t = np.asarray(t, dtype=float)
        s = (t - self.t0) / self.h
        i = np.clip(np.floor(s).astype(np.int64), 0, len(self) - 2)
        x = (s - i)[..., None]
        y0, y1 = self.values[i], self.values[i + 1]
        if self.derivs is None:
            val = y0 + x * (y1 - y0)
            return (val, np.broadcast_to((y1 - y0) / self.h, val.shape)) if derivative else val
        d0, d1 = self.derivs[i] * self.h, self.derivs[i + 1] * self.h
        x2, x3 = x * x, x * x * x
        val = (
            (2 * x3 - 3 * x2 + 1) * y0
            + (x3 - 2 * x2 + x) * d0
            + (-2 * x3 + 3 * x2) * y1
            + (x3 - x2) * d1
        )
        if not derivative:
            return val
        der = (
            (6 * x2 - 6 * x) * (y0 - y1)
            + (3 * x2 - 4 * x + 1) * d0
            + (3 * x2 - 2 * x) * d1
        ) / self.h
        return val, der


def sample(P: TrigPolynomial, t0, h, count: int, derivatives: bool = True) -> SampledTrajectory:
    vals = P.evaluate_grid(t0, h, count)
    der = P.derivative_grid(t0, h, count) if derivatives else None
    return SampledTrajectory(float(t0), float(h), vals, der)


def radial_power(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    """z -> z |z|^(alpha-1): a continuous alpha-Hoelder map of C onto itself,
    with constant 2**(1-alpha)."""

    def chi(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, z * r ** (alpha - 1.0), 0.0)
        return out

    def inverse_lipschitz(radius: float) -> float:
        # w -> w |w|^(1/alpha - 1) on |w| <= radius^alpha
        return (1.0 / alpha) * radius ** (1.0 - alpha)

    chi.inverse_lipschitz = inverse_lipschitz
    return chi


@dataclass(frozen=True)
class HolderTransfer:
    """Every eps^(1/alpha)-almost period of u is a C*eps-almost period of chi(u)."""

    alpha: float
    C: float

    def level(self, eps_u):
        """Shift quality guaranteed for chi(u) when u has quality ``eps_u``."""
        return self.C * np.asarray(eps_u) ** self.alpha

    def required(self, eps):
        """Quality of u that guarantees quality ``eps`` for chi(u)."""
        return (np.asarray(eps) / self.C) ** (1.0 / self.alpha)


def holder_ratios(values: np.ndarray, chi, alpha: float, pairs: int, rng) -> np.ndarray:
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    i = rng.integers(0, len(values), pairs)
    j = rng.integers(0, len(values), pairs)
    keep = i != j
    x, y = values[i[keep]], values[j[keep]]
    num = np.linalg.norm(np.atleast_2d(chi(x) - chi(y)).reshape(len(x), -1), axis=1)
    den = np.linalg.norm(x - y, axis=1) ** alpha
    ok = den > 0
    return num[ok] / den[ok]


def estimate_holder_constant(values, chi, alpha: float, pairs: int = 20000, seed: int = 0) -> float:
    """Largest sampled ratio |chi(x)-chi(y)| / |x-y|^alpha (a lower estimate)."""
    rng = np.random.default_rng(seed)
    return float(holder_ratios(values, chi, alpha, pairs, rng).max())


def holder_compose(
    samples: SampledTrajectory,
    chi,
    alpha: float,
    C: float,
    pairs: int = 20000,
    seed: int = 0,
) -> tuple[SampledTrajectory, HolderTransfer]:
    """Apply ``chi`` pointwise and return the almost-period transfer rule.

    The declared (C, alpha) bound is spot-checked on random sample pairs.
    """
    if not 0 < alpha <= 1:
        raise ValidationError("Hoelder exponent must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    ratios = holder_ratios(samples.values, chi, alpha, pairs, rng)
    if ratios.size and ratios.max() > C * (1 + 1e-9):
        raise HolderViolation(
            f"sampled ratio {ratios.max():.6g} exceeds declared constant {C:.6g}"
        )
    vals = np.asarray(chi(samples.values)).reshape(len(samples), -1)
    return SampledTrajectory(samples.t0, samples.h, vals), HolderTransfer(alpha, C)


class ComposedFunction:
    """chi(P) viewed through the torus: h_chi = chi o h.

    Upper bounds on the shift quality come from the Hoelder transfer of the
    closed-form bound of P; lower bounds from evaluating on torus points
    (any finite set of theta gives a valid lower bound of the sup).
    """

    def __init__(self, P: TrigPolynomial, chi, alpha: float, C: float, probe_side: int = 4,
                 refine_points: int = 1 << 14):
        self.P = P
        self.chi = chi
        self.transfer = HolderTransfer(alpha, C)
        self.basis = P.basis
        self.n = P.n
        self.probe = torus_grid(P.n, probe_side)
        self.refine_points = refine_points
        self.exact_closed_form = False
        # |P(s) - P(t)| <= L |chi(P(s)) - chi(P(t))| when chi has a Lipschitz inverse
        inv = getattr(chi, "inverse_lipschitz", None)
        self.inverse_lip = None if inv is None else float(inv(float(np.abs(P.amplitudes).sum())))

    def _h(self, theta):
        v = self.P.representing_function(theta)
        return np.asarray(self.chi(v))

    def representing_function(self, theta):
        return self._h(theta)

    def evaluate_grid(self, start, step, count):
        return np.asarray(self.chi(self.P.evaluate_grid(start, step, count)))

    def shift_deltas(self, idx, step, start=0):
        return self.P.shift_deltas(idx, step, start)

    def _sup_on(self, theta, delta, chunk: int = 1 << 20):
        base = self._h(theta).reshape(len(theta), -1)
        out = np.empty(len(delta))
        rows = max(1, chunk // len(theta))
        for c in range(0, len(delta), rows):
            dl = delta[c:c + rows]
            pts = (theta[None, :, :] + dl[:, None, :]) % 1.0
            moved = self._h(pts.reshape(-1, theta.shape[1])).reshape(len(dl), len(theta), -1)
            out[c:c + len(dl)] = np.linalg.norm(moved - base[None], axis=2).max(axis=1)
        return out

    def quality_bounds(self, delta):
        delta = np.atleast_2d(delta)
        lo_p, hi_p = self.P.quality_bounds(delta)
        hi = self.transfer.level(hi_p)
        lo = np.zeros(len(delta))
        if self.inverse_lip is not None:
            lo = np.asarray(lo_p, float) / self.inverse_lip
        # probe only where the certified bounds leave the answer open
        open_ = lo < hi
        if open_.any():
            lo[open_] = np.maximum(lo[open_], self._sup_on(self.probe, delta[open_]))
        return np.minimum(lo, hi), hi

    def grid_estimate(self, delta, points: int = GRID_POINTS) -> np.ndarray:
        """max over a torus grid of |h_chi(theta + Delta) - h_chi(theta)|."""
        g = _grid_side(self.n, points)
        return self._sup_on(torus_grid(self.n, g), np.atleast_2d(delta))

    def refine(self, delta, eps: float | None = None):
        """Dense torus-grid lower estimate of the sup.

        With ``eps`` a coarse grid runs first; shifts it already puts above
        eps keep the coarse value, which is still a valid lower bound.
        """
        delta = np.atleast_2d(delta)
        out = np.zeros(len(delta))
        todo = np.arange(len(delta))
        sizes = [self.refine_points]
        if eps is not None and self.refine_points > 4096:
            sizes = [4096, self.refine_points]
        for size in sizes:
            out[todo] = self.grid_estimate(delta[todo], size)
            if eps is not None:
                todo = todo[out[todo] <= eps]
        return out

    def modulus(self, r):
        return self.transfer.level(self.P.lip * np.asarray(r))
