from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apdim.apfun import (
    ComposedFunction,
    FrequencyBasis,
    TrigPolynomial,
    Verdict,
    estimate_holder_constant,
    evaluate,
    frac_mul,
    holder_compose,
    is_almost_period,
    radial_power,
    representing_function,
    sample,
    shift_distance,
    single_frequency,
    two_frequency,
)
from apdim.errors import HolderViolation, ValidationError


def _mp_two_frequency(t: Fraction):
    with mpmath.workdps(60):
        tt = mpmath.mpf(t.numerator) / t.denominator
        v = mpmath.expj(2 * mpmath.pi * tt) + mpmath.expj(2 * mpmath.pi * mpmath.sqrt(2) * tt)
        return complex(v)


@pytest.fixture(scope="module")
def P():
    return two_frequency("sqrt2")


def test_value_at_zero(P):
    assert evaluate(P, 0) == pytest.approx(2)


def test_value_at_half(P):
    expected = -1 + np.exp(1j * np.pi * np.sqrt(2))
    assert evaluate(P, "1/2") == pytest.approx(expected, abs=1e-12)
    assert evaluate(P, "1/2") == pytest.approx(_mp_two_frequency(Fraction(1, 2)), abs=1e-12)


@given(st.fractions(min_value=-10**6, max_value=10**6, max_denominator=1000))
@settings(max_examples=60, deadline=None)
def test_evaluation_matches_high_precision(P, t):
    assert abs(evaluate(P, t) - _mp_two_frequency(t)) < 1e-9
    assert abs(evaluate(P, t)) <= 2 + 1e-12


@given(st.integers(-(2**52) + 1, 2**52 - 1), st.fractions(0, 1, max_denominator=10**12))
@settings(max_examples=200, deadline=None)
def test_exact_phase_reduction(i, c):
    got = float(frac_mul(np.array([i]), c)[0])
    exact = (i * c) % 1
    d = abs(got - float(exact))
    assert min(d, 1 - d) < 1e-15


def test_torus_values(P):
    assert representing_function(P, np.array([[0.0, 0.0]]))[0] == pytest.approx(2)
    assert representing_function(P, np.array([[0.5, 0.5]]))[0] == pytest.approx(-2)


@given(st.fractions(0, 10**4, max_denominator=100))
@settings(max_examples=40, deadline=None)
def test_torus_lift_consistent(P, t):
    theta = P.basis.phases_at(t)
    assert representing_function(P, theta[None, :])[0] == pytest.approx(evaluate(P, t), abs=1e-10)


def test_shift_distance_tau_12(P):
    b = shift_distance(P, 12)
    expected = 2 * abs(np.sin(12 * np.pi * np.sqrt(2)))
    assert b.lo == b.hi == pytest.approx(expected, abs=1e-12)
    assert b.hi == pytest.approx(0.1847, abs=1e-4)
    # dense time grid gives a lower estimate approaching the sup
    t = np.linspace(0, 1e4, 400_001)
    dense = np.abs(P.evaluate_grid(12, Fraction(1, 40), len(t)) - P.evaluate_grid(0, Fraction(1, 40), len(t))).max()
    assert dense <= b.hi + 1e-9
    assert dense > b.hi - 1e-3


def test_shift_distance_zero_and_bound(P):
    assert shift_distance(P, 0).hi == 0
    for tau in ("7/3", 100, "12345.5"):
        assert shift_distance(P, tau).hi <= 4


def test_verdicts(P):
    assert is_almost_period(P, 12, 0.2) is Verdict.YES
    assert is_almost_period(P, 12, 0.1) is Verdict.NO
    assert is_almost_period(P, 0, 1e-9) is Verdict.YES


def test_real_part_shift_matches_grid():
    f = two_frequency("sqrt2", real=True)
    b = shift_distance(f, 29)
    theta = np.random.default_rng(1).random((20000, 2))
    d = f.basis.phases_at(29)
    est = np.abs(f.representing_function((theta + d) % 1) - f.representing_function(theta)).max()
    assert est <= b.hi + 1e-12
    assert b.lo <= b.hi


def test_dependent_exponents_use_grid_bounds():
    P = TrigPolynomial(("1", "sqrt2"), [[1, 0], [0, 1], [1, 1]], [1, 1, 0.5])
    b = shift_distance(P, 12)
    assert 0 < b.lo <= b.hi


def test_validation():
    with pytest.raises(ValidationError):
        TrigPolynomial(("1", "sqrt2"), [[1, 0], [1, 0]], [1, 1])
    with pytest.raises(ValidationError):
        TrigPolynomial(("1", "sqrt2"), [[1, 0, 0]], [1])
    with pytest.raises(ValidationError):
        TrigPolynomial(("1",), [[1]], [0])
    with pytest.raises(ValidationError):
        FrequencyBasis(("0",))


def test_decimal_frequency_limits_horizon():
    from apdim.apfun import Frequency

    from apdim.errors import PrecisionExhausted

    # 20 digits keep phases within 1e-12 up to |t| = 2e8
    P = TrigPolynomial(FrequencyBasis((Frequency.decimal("1.41421356237309504880", 20),)), [[1]], [1])
    P.evaluate(10**6)
    with pytest.raises(PrecisionExhausted):
        P.evaluate(10**9)


def test_hermite_interpolation_accuracy(P):
    s = sample(P, 0, 0.01, 2001)
    t = np.linspace(0.003, 19.99, 777)
    exact = np.array([evaluate(P, Fraction(x)) for x in t])
    # cubic Hermite error is at most h^4/384 times the fourth-derivative bound
    bound = 0.01**4 / 384 * np.sum(np.abs(P.lambdas) ** 4)
    assert np.abs(s.interpolate(t) - exact.reshape(s.interpolate(t).shape)).max() <= bound


def test_radial_square_root_constant():
    chi = radial_power(0.5)
    z = np.exp(2j * np.pi * np.random.default_rng(0).random(4000)) * np.random.default_rng(1).random(4000) * 2
    C = estimate_holder_constant(z, chi, 0.5, pairs=40000)
    assert C <= 2**0.5 + 1e-12
    assert C > 1.2


def test_holder_compose_rejects_small_constant(P):
    s = sample(P, 0, 0.01, 5000)
    with pytest.raises(HolderViolation):
        holder_compose(s, radial_power(0.5), 0.5, 0.5)
    out, tr = holder_compose(s, radial_power(0.5), 0.5, 2**0.5)
    assert tr.level(0.04) == pytest.approx(2**0.5 * 0.2)


def test_identity_transfer_is_identity(P):
    F = ComposedFunction(P, lambda z: z, 1.0, 1.0)
    d = P.basis.phases_at(12)[None, :]
    lo, hi = F.quality_bounds(d)
    assert hi[0] == pytest.approx(shift_distance(P, 12).hi)


def test_composed_bounds_bracket_dense_estimate(P):
    F = ComposedFunction(P, radial_power(0.5), 0.5, 2**0.5)
    d = np.stack([P.basis.phases_at(t) for t in (12, 29, 41, 70)])
    lo, hi = F.quality_bounds(d)
    dense = F.grid_estimate(d)
    assert np.all(lo <= hi)
    assert np.all(dense <= hi + 1e-12)


def test_single_frequency_period():
    f = single_frequency("inv2pi", -1j, real=True)  # sin t
    assert float(np.real(f.evaluate("1")).ravel()[0]) == pytest.approx(np.sin(1.0), abs=1e-12)
