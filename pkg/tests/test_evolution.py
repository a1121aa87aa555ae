import numpy as np
import pytest

from apdim.apfun import single_frequency, two_frequency
from apdim.errors import MonotonicityViolation, NonConvergent, ValidationError
from apdim.evolution import (
    EvolutionProblem,
    MonotoneOperator,
    check_monotonicity,
    cubic,
    integrate,
    linear,
    make_operator,
    shifted_quality,
    transient_cutoff,
)

SIN = single_frequency("inv2pi", -1j, real=True)


def test_linear_closed_form():
    prob = EvolutionProblem(linear(2.0), SIN, h=0.01, T=60)
    tr = integrate(prob, check=True)
    t = tr.times
    exact = (2 * np.sin(t) - np.cos(t)) / 5
    tail = t > 20
    assert np.abs(tr.values[tail, 0] - exact[tail]).max() < 1e-6


def test_zero_forcing_decays():
    # forcing of size 1e-12 stands in for zero, which a polynomial cannot have
    tiny = single_frequency("1", 1e-12, real=True)
    prob = EvolutionProblem(linear(2.0), tiny, h=0.01, T=20, u0=(1.0,))
    tr = integrate(prob)
    assert abs(tr.values[-1, 0]) < 1e-11


def test_solutions_merge_monotonically():
    f = two_frequency("sqrt2", real=True)
    a = integrate(EvolutionProblem(cubic(2.0, 1.0), f, T=20, u0=(0.0,))).values[:, 0]
    b = integrate(EvolutionProblem(cubic(2.0, 1.0), f, T=20, u0=(3.0,))).values[:, 0]
    d = np.abs(a - b)
    assert np.all(np.diff(d) <= 1e-15)
    assert d[-1] < 1e-12


def test_transient_cutoff():
    prob = EvolutionProblem(linear(2.0), SIN, T=40)
    tc = transient_cutoff(prob)
    assert 5 < tc < 15


def test_periodic_forcing_period_is_exact():
    prob = EvolutionProblem(linear(2.0), SIN, h=0.01, T=60)
    q = shifted_quality(prob, ["2*pi"] if False else [2 * np.pi], tail_start=20)
    assert q[0] < 1e-6


def test_monotonicity():
    assert check_monotonicity(cubic(2, 1), 1) >= 2
    bad = MonotoneOperator("bad", lambda u: u**3, 1.0, 2.0)
    with pytest.raises(MonotonicityViolation):
        check_monotonicity(bad, 1)


def test_validation():
    with pytest.raises(ValidationError):
        linear(-1)
    with pytest.raises(ValidationError):
        make_operator("nope")
    with pytest.raises(ValidationError):
        EvolutionProblem(linear(1), SIN, state_dim=2)


def test_nonconvergent_step():
    prob = EvolutionProblem(linear(2.0), two_frequency("sqrt2", real=True), h=0.5, T=40)
    with pytest.raises(NonConvergent):
        integrate(prob, check=True)
