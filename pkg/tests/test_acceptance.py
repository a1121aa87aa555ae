"""Acceptance suite: one PASS/FAIL line per criterion, each with its runtime limit.

Run with ``pytest tests/test_acceptance.py`` (lines are printed even without
``-s``) or directly with ``python tests/test_acceptance.py``.
"""
import json
import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from apdim.apfun import ComposedFunction, radial_power, single_frequency, two_frequency
from apdim.cache import ResultCache
from apdim.config import make_config
from apdim.contfrac import approximation_gap, classify, convergents, expand, invert
from apdim.dimension import box_dimension, diophantine_estimate
from apdim.ergodic import BirkhoffRun, birkhoff, half_plane, liouville_closeness, sector
from apdim.evolution import EvolutionProblem, integrate, linear, transfer_check
from apdim.kronecker import one_freq_system, solve_grid, solve_one_freq
from apdim.periods import (
    PolynomialQuality,
    holder_transfer_check,
    naito_ladder,
    scan,
    scan_adaptive,
    scan_ladder,
    scan_sampled,
)
from apdim.pipeline import run

pytestmark = pytest.mark.slow

_PRINT = print


@pytest.fixture(autouse=True)
def _show_lines(capsys):
    global _PRINT

    def show(*a):
        with capsys.disabled():
            print(*a)

    _PRINT = show
    yield
    _PRINT = print


def report(n, ok, detail, elapsed, limit):
    ok = ok and elapsed < limit
    _PRINT(f"\ncriterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail} ({elapsed:.1f} s, limit {limit:g} s)")
    assert ok, detail


# ---------------------------------------------------------------------------
# 1


def _scaled_phase_distances(num, den, qmax, bits=96):
    """||q w|| * 2^bits for q = 0..qmax from an integer approximation of w."""
    one = 1 << bits
    M = num * one // den
    return [min(r, one - r) for r in ((q * M) % one for q in range(qmax + 1))]


def test_1_continued_fraction_exactness():
    t0 = time.perf_counter()
    notes = []
    ok = True
    for name in ("sqrt2", "phi"):
        cv = convergents(expand(name, 60), 51)
        for k in range(1, 51):
            ok &= cv[k - 1].p * cv[k].q - cv[k].p * cv[k - 1].q == (-1) ** k
        # best approximation of the second kind: ||q_k w|| < ||q w|| for all 0 < q < q_k
        ks = [c for c in cv if c.q <= 10**6]
        big = cv[60 - 10]
        dist = _scaled_phase_distances(big.p, big.q, ks[-1].q)
        running = [math.inf]
        for q in range(1, len(dist)):
            running.append(min(running[-1], dist[q]))
        checked = 0
        for c in ks[1:]:
            if c.q > 1:
                ok &= dist[c.q] < running[c.q - 1]
                checked += 1
        notes.append(f"{name}: det k<=50, best approx {checked} convergents to q={ks[-1].q}")
    report(1, ok, "; ".join(notes), time.perf_counter() - t0, 10)


# ---------------------------------------------------------------------------
# 2

CERTIFIED = {
    **{f"sqrt{n}": (lambda n: lambda: mpmath.iv.sqrt(n))(n)
       for n in (2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 14, 15, 17, 19)},
    "phi": lambda: (1 + mpmath.iv.sqrt(5)) / 2,
    "e": lambda: mpmath.iv.e,
    "pi": lambda: mpmath.iv.pi,
    "ln2": lambda: mpmath.iv.log(2),
    "cbrt2": lambda: mpmath.iv.exp(mpmath.iv.log(2) / 3),
    # [0; 5, 10^9, 2, 2, ...] = 1/(5 + 1/(10^9 + sqrt2 - 1))
    "liouville_fifth": lambda: 1 / (5 + 1 / (10**9 + mpmath.iv.sqrt(2) - 1)),
}


def _iv(x: Fraction):
    return mpmath.iv.mpf(x.numerator) / x.denominator


def test_2_approximation_gap_encloses_error():
    t0 = time.perf_counter()
    depth = 30
    checked = 0
    bad = []
    saved, mpmath.iv.dps = mpmath.iv.dps, 200
    try:
        for name, value in CERTIFIED.items():
            w = value()
            cf = expand(name, depth + 1)
            for c in convergents(cf, depth - 1):
                gap = approximation_gap(cf, c.k)
                err = abs(w - _iv(Fraction(c.p, c.q)))
                if not (err.a > _iv(gap.lo).b and err.b < _iv(gap.hi).a):
                    bad.append((name, c.k))
                checked += 1
    finally:
        mpmath.iv.dps = saved
    report(2, not bad and len(CERTIFIED) == 20,
           f"{len(CERTIFIED)} irrationals, {checked} (number, k) pairs strictly inside, failures {bad[:3]}",
           time.perf_counter() - t0, 5)


# ---------------------------------------------------------------------------
# 3

INVERSION_CASES = {
    "[0; (2)]": 40, "[0; (1)]": 40, "[0; (1, 2)]": 40, "[0; 5, 10^9, (2)]": 40, "[0; (3, 1)]": 40,
    "[0; 1, 2, (1, 1, 4)]": 40, "[0; 7, (1, 5)]": 40, "[0; (10)]": 40, "qrule": 14, "liouville": 6,
}


def test_3_inversion_law():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for rule, d in INVERSION_CASES.items():
        cf = expand(rule, d + 2)
        inv = classify(invert(cf), d)
        near = [classify(cf, k) for k in (d - 1, d, d + 1)]
        ok &= all(p.g_property == inv.g_property for p in near)
        lo, hi = min(p.nu_hat for p in near), max(p.nu_hat for p in near)
        miss = max(lo - inv.nu_hat, inv.nu_hat - hi, 0.0)
        # finite-depth slack for the small denominators at the head of the expansion
        ok &= miss <= 0.02 * max(1.0, hi)
        worst = max(worst, miss / max(1.0, hi))
    report(3, ok, f"{len(INVERSION_CASES)} expansions, g-property equal, worst relative nu miss {worst:.4f} <= 0.02",
           time.perf_counter() - t0, 5)


# ---------------------------------------------------------------------------
# 4


def test_4_kronecker_oracle_equivalence():
    t0 = time.perf_counter()
    ok = True
    counts = []
    for name in ("sqrt2", "phi"):
        for delta in (0.1, 0.05, 0.02):
            a = solve_one_freq(name, delta, 1e4)
            g = solve_grid(one_freq_system(name, delta), 1e4)
            ok &= list(a.integer_solutions) == list(g.integer_solutions)
            counts.append(len(a.integer_solutions))
    report(4, ok, f"walker == grid on all 6 cases, solution counts {counts}", time.perf_counter() - t0, 60)


# ---------------------------------------------------------------------------
# 5


def test_5_two_frequency_dimension_bracket():
    t0 = time.perf_counter()
    P = two_frequency("sqrt2")
    scans = scan_ladder(P, [2.0**-k for k in range(2, 9)])
    fit = diophantine_estimate(scans).fit_slope
    nl = naito_ladder("sqrt2", depth=9)
    margins = [L - scan_adaptive(P, e).l_hat for e, L in nl]
    ok = 0.75 <= fit <= 1.25 and min(margins) >= 0
    report(5, ok, f"fit_slope {fit:.4f} in [0.75, 1.25]; l_hat <= L_k at {sum(m >= 0 for m in margins)}"
                  f"/{len(margins)} ladder points (min margin {min(margins):.4g})",
           time.perf_counter() - t0, 600)


# ---------------------------------------------------------------------------
# 6


def test_6_holder_transfer():
    t0 = time.perf_counter()
    P = two_frequency("sqrt2")
    F = ComposedFunction(P, radial_power(0.5), 0.5, 2**0.5)
    checks = [holder_transfer_check(F, e, w) for e, w in ((0.5, 500), (0.25, 2000), (0.125, 5000), (0.0625, 2e4))]
    total = sum(len(c.taus) for c in checks)
    passed = sum(c.passed for c in checks)
    eps = [2.0**-k for k in range(1, 7)]
    fit_f = diophantine_estimate([scan_adaptive(F, e, oracle=PolynomialQuality(F)) for e in eps]).fit_slope
    fit_p = diophantine_estimate(scan_ladder(P, [2.0**-k for k in range(2, 9)])).fit_slope
    ok = total > 0 and passed == total and fit_f <= 2 * fit_p + 0.25
    report(6, ok, f"{passed}/{total} periods re-verify; fit(chi o P) {fit_f:.4f} <= 2*{fit_p:.4f}+0.25",
           time.perf_counter() - t0, 300)


# ---------------------------------------------------------------------------
# 7


def test_7_box_dimension_sanity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    sq = rng.random((2_000_000, 2))
    square = box_dimension(sq, [2.0**-k for k in range(1, 9)]).fit_slope
    P = two_frequency("sqrt2")
    tt = rng.random(2_000_000) * 1e6
    z = P.representing_function(np.column_stack([tt % 1, (tt * math.sqrt(2)) % 1])).ravel()
    disk = box_dimension(np.column_stack([z.real, z.imag]), [2.0**-k for k in range(0, 7)]).fit_slope
    coarse = [2.0**-k for k in range(1, 5)]
    a = box_dimension(sq, coarse, tail_start=0).fit_slope
    b = box_dimension(sq, coarse, metric_power=0.5, tail_start=0).fit_slope
    ok = abs(square - 2) <= 0.2 and abs(disk - 2) <= 0.3 and abs(b - 2 * a) <= 0.2
    report(7, ok, f"square {square:.4f}, disk trajectory {disk:.4f}, metric power {b:.4f} vs 2*{a:.4f}",
           time.perf_counter() - t0, 120)


# ---------------------------------------------------------------------------
# 8


def test_8_evolution_transfer():
    t0 = time.perf_counter()
    sin = single_frequency("inv2pi", -1j, real=True)
    tr = integrate(EvolutionProblem(linear(2.0), sin, h=0.01, T=60), check=True)
    tail = tr.times > 20
    closed = np.abs(tr.values[tail, 0] - (2 * np.sin(tr.times[tail]) - np.cos(tr.times[tail])) / 5).max()

    f = two_frequency("sqrt2", real=True)
    W, B = 4000.0, 200.0
    f_scans = [scan(f, 2.0**-k, W) for k in range(2, 9)]
    fit_f = diophantine_estimate(f_scans).fit_slope
    prob = EvolutionProblem(linear(2.0), f, h=0.01, T=20 + B + W)
    u = integrate(prob)
    # u is about 0.145 times as large as f, so its ladder is scaled to match
    u_scans = [scan_sampled(u, 0.145 * 2.0**-k, W, base_start=20, base_length=B) for k in range(2, 9)]
    fit_u = diophantine_estimate(u_scans).fit_slope
    rep = transfer_check(EvolutionProblem(linear(2.0), f, h=0.01, T=400),
                         [scan(f, 2.0**-k, 200) for k in range(2, 9)])
    ok = abs(rep.exponent_fit - 1) <= 0.15 and fit_u <= fit_f + 0.25 and closed < 1e-6
    report(8, ok, f"exponent {rep.exponent_fit:.4f} = 1 +- 0.15; fit(u) {fit_u:.4f} <= {fit_f:.4f}+0.25; "
                  f"closed-form error {closed:.2e}", time.perf_counter() - t0, 600)


# ---------------------------------------------------------------------------
# 9


def test_9_liouville_closeness_and_rates():
    t0 = time.perf_counter()
    rep = liouville_closeness("liouville_fifth", 1, 1e6)
    good = birkhoff(BirkhoffRun("sqrt2", half_plane(), (1e4,))).errors[0]
    catalog = [sector(0.0, 0.3), sector(0.1, 0.2), sector(1.0, 1.3)]
    bad = {r.name: birkhoff(BirkhoffRun("liouville_fifth", r, (1e4,))).errors[0] for r in catalog}
    separated = [n for n, e in bad.items() if good < e]
    ok = (rep.p, rep.q) == (1, 5) and rep.bound <= 2.6e-4 and rep.measured <= rep.bound and bool(separated)
    report(9, ok, f"bound {rep.bound:.4e} <= 2.6e-4, measured {rep.measured:.4e}; half-plane error {good:.2e} "
                  f"< Liouville error in {separated}", time.perf_counter() - t0, 300)


# ---------------------------------------------------------------------------
# 10


def test_10_determinism(tmp_path):
    t0 = time.perf_counter()
    ladder = [2.0**-k for k in range(2, 9)]
    outs = []
    for i in range(2):
        cfg = make_config(kind="full-pipeline", epsilons=ladder, naito_points=4, out=str(tmp_path / f"r{i}"))
        res = run(cfg, None)
        outs.append({p.name: p.read_bytes() for p in res.paths})
    cached = ResultCache(tmp_path / "cache")
    for i in (2, 3):
        cfg = make_config(kind="full-pipeline", epsilons=ladder, naito_points=4, out=str(tmp_path / f"r{i}"))
        res = run(cfg, cached)
        outs.append({p.name: p.read_bytes() for p in res.paths})
    ok = all(o == outs[0] for o in outs) and bool(outs[0])
    fit = json.loads(outs[0]["report.json"])["dimension"]["fit_slope"]
    report(10, ok, f"{len(outs)} runs ({len(outs[0])} files each, fresh and cached) byte-identical; fit {fit:.4f}",
           time.perf_counter() - t0, 60)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
