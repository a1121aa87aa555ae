import math

import mpmath
import numpy as np
import pytest

from apdim.errors import BudgetExceeded, ValidationError
from apdim.kronecker import one_freq_system, return_candidates, solve_grid, solve_one_freq, verify
from apdim.contfrac import expand


def _brute(omega_mp, delta, W):
    out = []
    with mpmath.workdps(50):
        for q in range(1, W + 1):
            x = q * omega_mp
            d = abs(x - mpmath.nint(x))
            if d < delta:
                out.append(q)
    return out


def test_smallest_solution_sqrt2():
    sol = solve_one_freq("sqrt2", 0.05, 100)
    assert sol.centers[0] == 12
    assert sol.quality[0] == pytest.approx(0.0294, abs=1e-4)
    assert solve_one_freq("sqrt2", 0.08, 100).centers[0] == 5


def test_delta_above_norm_admits_one():
    # ||sqrt2|| = 0.414...
    assert solve_one_freq("sqrt2", 0.42, 10).centers[0] == 1


def test_empty_window():
    sol = solve_one_freq("sqrt2", 0.05, 10)
    assert len(sol) == 0
    assert sol.max_gap == 10


def test_nearly_unconstrained():
    sol = solve_one_freq("sqrt2", 0.499, 1000)
    assert sol.max_gap <= 2


@pytest.mark.parametrize("name,value", [("sqrt2", lambda: mpmath.sqrt(2)), ("phi", lambda: (1 + mpmath.sqrt(5)) / 2),
                                        ("pi", lambda: mpmath.pi), ("e", lambda: mpmath.e)])
@pytest.mark.parametrize("delta", [0.011, 0.05, 0.3])
def test_walker_matches_brute_force(name, value, delta):
    with mpmath.workdps(50):
        w = value()
    sol = solve_one_freq(name, delta, 3000)
    assert list(sol.integer_solutions) == _brute(w, delta, 3000)


def test_grid_agrees_with_walker_small_window():
    a = solve_one_freq("sqrt2", 0.05, 200)
    b = solve_grid(one_freq_system("sqrt2", 0.05), 200)
    assert a.integer_solutions == b.integer_solutions


def test_grid_step_and_budget():
    with pytest.raises(ValidationError):
        solve_grid(one_freq_system("sqrt2", 0.05), 100, step=0.1)
    with pytest.raises(BudgetExceeded):
        solve_grid(one_freq_system("sqrt2", 0.05), 1e4, budget=1000)


def test_grid_solutions_verify():
    sys_ = one_freq_system("sqrt2", 0.05)
    sol = solve_grid(sys_, 1000)
    assert np.all(verify(sys_, sol.centers) < 0.05)


def test_return_candidates_cover_convergents():
    cand = return_candidates(expand("sqrt2", 12), 10**4)
    for q in (2, 5, 12, 29, 70, 169, 408, 985):
        assert q in cand


def test_invalid_delta():
    with pytest.raises(ValidationError):
        solve_one_freq("sqrt2", 0.6)
