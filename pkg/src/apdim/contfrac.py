"""Continued fractions, convergents and Diophantine profiles.

Terms come from a *source*: an exact periodic rule, an explicit list, a
recurrence rule, or a numeric seed given as a rational enclosure.  Numeric
seeds are expanded by running the Gauss map on exact rational intervals, so
every returned partial quotient is certified.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DepthExhausted, PrecisionExhausted, RationalInput, ValidationError
from .intervals import Interval

G_THRESHOLD = Fraction(1) + Fraction(1, 10**9)
DEFAULT_DIGITS = 60


# ---------------------------------------------------------------------------
# term sources


class TermSource:
    """Produces a_0 and a prefix of the partial quotients a_1, a_2, ..."""

    kind = "explicit"

    def a0(self) -> int:
        raise NotImplementedError

    def terms(self, depth: int) -> tuple[int, ...]:
        raise NotImplementedError


@dataclass(frozen=True)
class PeriodicSource(TermSource):
    """Eventually periodic expansion ``[a0; pre..., (period...)]``."""

    first: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]
    kind = "periodic"

    def __post_init__(self):
        if not self.period:
            raise ValidationError("periodic source needs a non-empty period")
        if any(a < 1 for a in self.preperiod + self.period):
            raise ValidationError("partial quotients must be >= 1")

    def a0(self) -> int:
        return self.first

    def terms(self, depth: int) -> tuple[int, ...]:
        out = list(self.preperiod[:depth])
        i = 0
        while len(out) < depth:
            out.append(self.period[i % len(self.period)])
            i += 1
        return tuple(out)


@dataclass(frozen=True)
class ExplicitSource(TermSource):
    first: int
    listed: tuple[int, ...]
    kind = "explicit"

    def __post_init__(self):
        if any(a < 1 for a in self.listed):
            raise ValidationError("partial quotients must be >= 1")

    def a0(self) -> int:
        return self.first

    def terms(self, depth: int) -> tuple[int, ...]:
        if depth > len(self.listed):
            raise DepthExhausted(
                f"explicit expansion has {len(self.listed)} terms, {depth} requested"
            )
        return self.listed[:depth]


@dataclass(frozen=True)
class RuleSource(TermSource):
    """Terms produced by ``rule(k, a, q)`` where ``a`` holds a_0..a_{k-1} and
    ``q`` holds q_0..q_{k-1}."""

    first: int
    rule: Callable[[int, Sequence[int], Sequence[int]], int] = field(compare=False)
    name: str = "rule"
    kind = "rule"

    def a0(self) -> int:
        return self.first

    def terms(self, depth: int) -> tuple[int, ...]:
        a = [self.first]
        q = [1]
        q_prev = 0
        for k in range(1, depth + 1):
            ak = int(self.rule(k, a, q))
            if ak < 1:
                raise ValidationError(f"rule {self.name} produced a_{k} = {ak}")
            a.append(ak)
            q_prev, qk = q[-1], ak * q[-1] + q_prev
            q.append(qk)
        return tuple(a[1:])


@dataclass(frozen=True)
class ShiftedSource(TermSource):
    """Expansion of 1/w for w = [0; a_1, a_2, ...]: the sequence shifted by one."""

    base: TermSource

    @property
    def kind(self):  # type: ignore[override]
        return self.base.kind

    def a0(self) -> int:
        return self.base.terms(1)[0]

    def terms(self, depth: int) -> tuple[int, ...]:
        return self.base.terms(depth + 1)[1:]


@dataclass(frozen=True)
class PrependedSource(TermSource):
    """Expansion of 1/w for w > 1: [0; a_0, a_1, ...]."""

    base: TermSource

    @property
    def kind(self):  # type: ignore[override]
        return self.base.kind

    def a0(self) -> int:
        return 0

    def terms(self, depth: int) -> tuple[int, ...]:
        if depth == 0:
            return ()
        return (self.base.a0(),) + tuple(self.base.terms(depth - 1))


def _gauss_terms(x: Interval, depth: int) -> tuple[int, tuple[int, ...]]:
    a0 = x.floor()
    if a0 is None:
        raise PrecisionExhausted("seed does not determine its integer part")
    x = x - a0
    out: list[int] = []
    while len(out) < depth:
        if x.is_point and x.lo == 0:
            raise RationalInput(f"Gauss map terminated after {len(out)} terms")
        if x.lo <= 0:
            raise PrecisionExhausted(
                f"seed certifies only {len(out)} partial quotients"
            )
        y = x.reciprocal()
        a = y.floor()
        if a is None:
            raise PrecisionExhausted(
                f"seed certifies only {len(out)} partial quotients"
            )
        out.append(a)
        x = y - a
    return a0, tuple(out)


@dataclass(frozen=True)
class NumericSource(TermSource):
    """A rational enclosure of the number, optionally refinable.

    ``refine(digits)`` returns a tighter enclosure; the source retries with
    doubled precision up to ``max_digits`` before giving up.
    """

    seed: Interval
    refine: Callable[[int], Interval] | None = field(default=None, compare=False)
    digits: int = DEFAULT_DIGITS
    max_digits: int = 4000
    kind = "numeric"

    def a0(self) -> int:
        return self._expand(0)[0]

    def _expand(self, depth: int) -> tuple[int, tuple[int, ...]]:
        seed, digits = self.seed, self.digits
        while True:
            try:
                return _gauss_terms(seed, depth)
            except RationalInput:
                raise
            except PrecisionExhausted:
                if self.refine is None or digits >= self.max_digits:
                    raise
                digits *= 2
                seed = self.refine(digits)

    def terms(self, depth: int) -> tuple[int, ...]:
        return self._expand(depth)[1]


# ---------------------------------------------------------------------------
# parsing and the named-constant catalog


def _mp_interval(expr: Callable, digits: int) -> Interval:
    from mpmath import iv
    from mpmath.libmp import to_rational

    saved = iv.dps
    iv.dps = digits + 10
    try:
        ends = expr(iv)._mpi_
    finally:
        iv.dps = saved
    lo, hi = (Fraction(*map(int, to_rational(e))) for e in ends)
    return Interval(lo, hi)


MPMATH_CONSTANTS: dict[str, Callable] = {
    "pi": lambda iv: iv.pi,
    "ln2": lambda iv: iv.log(2),
    "cbrt2": lambda iv: iv.mpf(2) ** (iv.mpf(1) / 3),
    "euler": lambda iv: iv.euler,
    "inv2pi": lambda iv: 1 / (2 * iv.pi),
}


def sqrt_source(n: int) -> PeriodicSource:
    """Exact periodic expansion of sqrt(n) by the classical integer recurrence."""
    r = math.isqrt(n)
    if r * r == n:
        raise RationalInput(f"sqrt({n}) is an integer")
    m, d, a = 0, 1, r
    period = []
    while True:
        m = d * a - m
        d = (n - m * m) // d
        a = (r + m) // d
        period.append(a)
        if a == 2 * r:
            break
    return PeriodicSource(r, (), tuple(period))


def _e_rule(k, a, q):
    return 2 * (k + 1) // 3 if k % 3 == 2 else 1


def _q_rule(k, a, q):
    return q[k - 1]


def _liouville_rule(k, a, q):
    return q[k - 1] ** (k - 1)


NAMED_SOURCES: dict[str, Callable[[], TermSource]] = {
    "sqrt2": lambda: PeriodicSource(1, (), (2,)),
    "phi": lambda: PeriodicSource(1, (), (1,)),
    "golden": lambda: PeriodicSource(1, (), (1,)),
    "e": lambda: RuleSource(2, _e_rule, "e"),
    # [0; 5, 10^9, 2, 2, ...]: an explicit instance of the [0; 5, 10^9, ...] example
    "liouville_fifth": lambda: PeriodicSource(0, (5, 10**9), (2,)),
    # a_{k+1} = q_k
    "qrule": lambda: RuleSource(0, _q_rule, "qrule"),
    # a_{k+1} = q_k^k: order of approximation grows without bound
    "liouville": lambda: RuleSource(0, _liouville_rule, "liouville"),
}

_INT_TOKEN = re.compile(r"^\s*(\d+)\s*(?:\^\s*(\d+))?\s*$")
_DECIMAL = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_RATIONAL = re.compile(r"^[+-]?\d+\s*/\s*\d+$")
_SQRT = re.compile(r"^sqrt\(?(\d+)\)?$")


def _parse_int(tok: str) -> int:
    tok = tok.strip()
    m = _INT_TOKEN.match(tok)
    if m:
        base, exp = m.groups()
        return int(base) ** int(exp) if exp else int(base)
    if re.match(r"^\d+(\.\d+)?[eE]\d+$", tok):
        v = Fraction(tok)
        if v.denominator == 1:
            return int(v)
    raise ValidationError(f"bad partial quotient {tok!r}")


def parse_term_rule(text: str) -> TermSource:
    """Parse ``[a0; a1, a2, (p1, p2)]``; a parenthesised tail repeats forever."""
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValidationError(f"term rule must be bracketed: {text!r}")
    body = body[1:-1]
    head, _, tail = body.partition(";")
    a0 = int(head.strip())
    tail = tail.strip()
    period: tuple[int, ...] = ()
    m = re.search(r"\(([^)]*)\)\s*,?\s*(?:\.\.\.|…)?\s*$", tail)
    if m:
        period = tuple(_parse_int(t) for t in m.group(1).split(",") if t.strip())
        tail = tail[: m.start()]
    tail = tail.replace("...", "").replace("…", "")
    pre = tuple(_parse_int(t) for t in tail.split(",") if t.strip())
    if period:
        return PeriodicSource(a0, pre, period)
    return ExplicitSource(a0, pre)


def decimal_interval(text: str, digits: int | None = None) -> Interval:
    """Enclosure of a decimal seed: the value is trusted to one unit in the
    last written place (or to ``10**-digits`` when given)."""
    x = Fraction(text)
    if digits is None:
        mant = text.lower().split("e")[0]
        frac_digits = len(mant.split(".")[1]) if "." in mant else 0
        exp = int(text.lower().split("e")[1]) if "e" in text.lower() else 0
        radius = Fraction(1, 10 ** frac_digits) * Fraction(10) ** exp
    else:
        radius = Fraction(1, 10**digits)
    return Interval.around(x, radius)


def parse_source(spec, digits: int = DEFAULT_DIGITS) -> TermSource:
    """Turn a number description into a term source.

    Accepts a :class:`TermSource`, an exact rational (``int``/``Fraction`` or
    ``"p/q"``), an :class:`Interval`, a catalog name, ``sqrtN``, a bracketed
    term rule or a decimal string.
    """
    if isinstance(spec, TermSource):
        return spec
    if isinstance(spec, ContinuedFraction):
        return spec.source
    if isinstance(spec, (int, Fraction)):
        return NumericSource(Interval.point(spec))
    if isinstance(spec, Interval):
        return NumericSource(spec)
    if isinstance(spec, float):
        raise ValidationError("floats are ambiguous seeds; pass a decimal string")
    if not isinstance(spec, str):
        raise ValidationError(f"cannot interpret {spec!r} as a number")
    s = spec.strip()
    key = s.lower()
    if key in NAMED_SOURCES:
        return NAMED_SOURCES[key]()
    m = _SQRT.match(key)
    if m:
        return sqrt_source(int(m.group(1)))
    if key in MPMATH_CONSTANTS:
        expr = MPMATH_CONSTANTS[key]
        return NumericSource(
            _mp_interval(expr, digits), lambda d, e=expr: _mp_interval(e, d), digits
        )
    if s.startswith("["):
        return parse_term_rule(s)
    if _RATIONAL.match(s) or re.fullmatch(r"[+-]?\d+", s):
        return NumericSource(Interval.point(Fraction(s.replace(" ", ""))))
    if _DECIMAL.match(s):
        return NumericSource(decimal_interval(s))
    raise ValidationError(f"unknown number {spec!r}")


# ---------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class ContinuedFraction:
    a0: int
    terms: tuple[int, ...]
    source_kind: str
    source: TermSource = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    def extend(self, depth: int) -> ContinuedFraction:
        if depth <= len(self.terms):
            return self
        return ContinuedFraction(
            self.a0, self.source.terms(depth), self.source_kind, self.source
        )

    def enclosure(self) -> Interval:
        """Exact enclosure of the value between the last two convergents."""
        cv = convergents(self, len(self.terms))
        a, b = cv[-2], cv[-1]
        x, y = Fraction(a.p, a.q), Fraction(b.p, b.q)
        return Interval(min(x, y), max(x, y))

    def __str__(self) -> str:
        body = ", ".join(str(t) for t in self.terms)
        return f"[{self.a0}; {body}]"


@dataclass(frozen=True)
class Convergent:
    k: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class DiophantineProfile:
    nu_hat: float
    g_property: bool
    g_constant: float | None
    growth_ratios: tuple[float, ...]
    depth: int
    min_ratio: float | None = None


# ---------------------------------------------------------------------------
# operations


def expand(x, depth: int, digits: int = DEFAULT_DIGITS) -> ContinuedFraction:
    """First ``depth`` partial quotients of ``x`` (see :func:`parse_source`)."""
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    src = parse_source(x, digits)
    if isinstance(src, NumericSource):
        a0, terms = src._expand(depth)
    else:
        a0, terms = src.a0(), src.terms(depth)
    return ContinuedFraction(a0, terms, src.kind, src)


def convergents(cf: ContinuedFraction, k_max: int) -> list[Convergent]:
    """(p_k, q_k) for k = 0..k_max from the three-term recurrences."""
    cf = cf.extend(k_max)
    seq = (cf.a0,) + cf.terms[:k_max]
    p2, p1, q2, q1 = 0, 1, 1, 0
    out = []
    for k, a in enumerate(seq):
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        out.append(Convergent(k, p1, q1))
    return out


def approximation_gap(cf: ContinuedFraction, k: int) -> Interval:
    """Open enclosure (1/(q_k(q_{k+1}+q_k)), 1/(q_{k+1} q_k)) of |w - p_k/q_k|."""
    cv = convergents(cf, k + 1)
    qk, qk1 = cv[k].q, cv[k + 1].q
    return Interval(Fraction(1, qk * (qk1 + qk)), Fraction(1, qk1 * qk))


def _ratio(a: int, b: int) -> float:
    try:
        return a / b
    except OverflowError:
        return math.inf


def classify(cf: ContinuedFraction, depth: int) -> DiophantineProfile:
    """Finite-depth Diophantine profile from q_0..q_depth.

    ``nu_hat`` is the largest ln q_{k+1}/ln q_k - 1 over the tail
    k >= depth // 2; ``g_constant`` is the tail minimum of b_k = q_{k+1}/q_k
    (a liminf surrogate) and ``min_ratio`` the minimum over every k >= 1.
    """
    if depth < 3:
        raise ValidationError("classify needs depth >= 3")
    q = [c.q for c in convergents(cf, depth)]
    ratios = tuple(_ratio(q[k + 1], q[k]) for k in range(1, depth))
    g_prop = all(
        Fraction(q[k + 1], q[k]) >= G_THRESHOLD for k in range(1, depth)
    )
    tail = max(1, depth // 2)
    nus = [
        math.log(q[k + 1]) / math.log(q[k]) - 1.0
        for k in range(tail, depth)
        if q[k] >= 2
    ]
    nu_hat = max(0.0, max(nus)) if nus else 0.0
    tail_ratios = ratios[tail - 1:]
    return DiophantineProfile(
        nu_hat=nu_hat,
        g_property=g_prop,
        g_constant=min(tail_ratios) if g_prop else None,
        growth_ratios=ratios,
        depth=depth,
        min_ratio=min(ratios),
    )


def invert(cf: ContinuedFraction) -> ContinuedFraction:
    """Expansion of 1/w for w = [0; a_1, a_2, ...], namely [a_1; a_2, ...]."""
    if cf.a0 != 0:
        raise ValidationError("invert expects a number in (0, 1) (a_0 = 0)")
    if not cf.terms:
        cf = cf.extend(1)
    src = ShiftedSource(cf.source)
    return ContinuedFraction(cf.terms[0], cf.terms[1:], cf.source_kind, src)


def reciprocal(cf: ContinuedFraction) -> ContinuedFraction:
    """Expansion of 1/w for any w > 0 (shift left when w < 1, right when w > 1)."""
    if cf.a0 == 0:
        return invert(cf)
    if cf.a0 < 0:
        raise ValidationError("reciprocal expects a positive number")
    src = PrependedSource(cf.source)
    return ContinuedFraction(0, (cf.a0,) + cf.terms, cf.source_kind, src)
