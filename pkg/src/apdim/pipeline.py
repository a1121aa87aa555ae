"""Run an :class:`ExperimentConfig`: dispatch, artifact emission and caching."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .apfun import TrigPolynomial, is_almost_period, shift_distance, two_frequency
from .cache import ResultCache
from .config import ExperimentConfig
from .contfrac import classify, convergents, expand
from .dimension import diophantine_estimate
from .errors import BudgetExceeded
from .io import (
    csv_text,
    json_text,
    load_polynomial,
    load_problem,
    read_scan_summaries,
    summarize,
)


@dataclass
class RunResult:
    paths: list[Path]
    summary: dict
    cache_hit: bool = False
    partial: bool = False


class _Partial(Exception):
    """Carries artifacts produced before a budget overrun."""

    def __init__(self, files: dict[str, str], summary: dict, cause: BudgetExceeded):
        super().__init__(str(cause))
        self.files, self.summary, self.cause = files, summary, cause


def _polynomial(cfg: ExperimentConfig) -> TrigPolynomial:
    return load_polynomial(cfg.poly) if cfg.poly else two_frequency(cfg.omega)


# ---------------------------------------------------------------------------
# per-kind runners: each returns ({file name: text}, summary)


def run_cf(cfg):
    cf = expand(cfg.omega, cfg.depth, cfg.precision_digits)
    cv = convergents(cf, cfg.depth)
    rows = []
    for k, c in enumerate(cv):
        a = cf.a0 if k == 0 else cf.terms[k - 1]
        b = cv[k].q / cv[k - 1].q if k >= 1 else float("nan")
        rows.append((k, a, c.p, c.q, b))
    prof = classify(cf, cfg.depth) if cfg.depth >= 3 else None
    info = {
        "number": cfg.omega,
        "a0": cf.a0,
        "terms": list(cf.terms),
        "convergents": [[c.p, c.q] for c in cv],
        "source_kind": cf.source_kind,
    }
    if prof is not None:
        info["profile"] = {
            "nu_hat": prof.nu_hat,
            "g_property": prof.g_property,
            "g_constant": prof.g_constant,
            "min_ratio": prof.min_ratio,
            "depth": prof.depth,
        }
    summary = {"number": cfg.omega, "depth": cfg.depth, "expansion": str(cf)}
    if prof is not None:
        summary.update(nu_hat=prof.nu_hat, g_property=prof.g_property)
    return {"cf.csv": csv_text("cf", rows), "cf.json": json_text(info)}, summary


def run_eval(cfg):
    P = _polynomial(cfg)
    rows = []
    for t in cfg.times:
        v = np.atleast_1d(P.evaluate(t))
        for j, z in enumerate(v):
            z = complex(z)
            rows.append((t, j, z.real, z.imag))
    return {"eval.csv": csv_text("eval", rows)}, {"points": len(cfg.times)}


def run_shiftdist(cfg):
    P = _polynomial(cfg)
    eps = cfg.epsilons[0] if cfg.epsilons else None
    rows = []
    for tau in cfg.taus:
        b = shift_distance(P, tau)
        v = is_almost_period(P, tau, eps).value if eps is not None else ""
        rows.append((tau, b.lo, b.hi, v))
    return {"shiftdist.csv": csv_text("shiftdist", rows)}, {"taus": len(cfg.taus), "epsilon": eps}


def run_kron(cfg):
    from .kronecker import one_freq_system, solve_grid, solve_one_freq

    W = cfg.window or 1e4
    rows, stats = [], []
    for d in cfg.deltas:
        if cfg.method == "grid":
            sol = solve_grid(one_freq_system(cfg.omega, d), W, budget=cfg.budget)
        else:
            sol = solve_one_freq(cfg.omega, d, W)
        for c, (a, b), q in zip(sol.centers, sol.intervals, sol.quality):
            rows.append((c, (b - a) / 2, q))
        stats.append({"delta": d, "solutions": len(sol), "max_gap": sol.max_gap,
                      "integer_solutions": len(sol.integer_solutions)})
    files = {"kron.csv": csv_text("kron", rows),
             "kron.json": json_text({"omega": cfg.omega, "method": cfg.method, "window": W, "runs": stats})}
    return files, {"method": cfg.method, "window": W, "runs": len(stats)}


def _scan_ladder(P, cfg):
    """Adaptive (or fixed-window) scans along the epsilon ladder; partial on budget overrun."""
    from .periods import scan, scan_adaptive

    scans = []
    W = cfg.window or 64.0
    try:
        for eps in cfg.epsilons:
            if cfg.window:
                s = scan(P, eps, cfg.window, budget=cfg.budget)
            else:
                s = scan_adaptive(P, eps, W, cfg.min_periods, cfg.max_window, cfg.budget)
                W = max(W, s.window / 2)
            scans.append(s)
    except BudgetExceeded as exc:
        return scans, exc
    return scans, None


def _period_files(scans, partial: bool) -> dict[str, str]:
    rows = []
    for s in scans:
        for i, (t, q) in enumerate(zip(s.periods, s.qualities)):
            prev = s.periods[i - 1] if i else 0.0
            rows.append((s.epsilon, t, q, t - prev))
    summaries = [summarize(s).to_dict() for s in scans]
    for d, s in zip(summaries, scans):
        d["estimated"] = s.estimated
    return {
        "periods.csv": csv_text("periods", rows),
        "periods.json": json_text({"schema": "periods-summary v1", "partial": partial, "scans": summaries}),
    }


def run_periods(cfg):
    P = _polynomial(cfg)
    scans, err = _scan_ladder(P, cfg)
    files = _period_files(scans, err is not None)
    summary = {"scans": len(scans), "l_hat": [s.l_hat for s in scans]}
    if err is not None:
        raise _Partial(files, summary, err)
    return files, summary


def _dim_files(est, prefix="dim") -> dict[str, str]:
    cols = est.plot_columns()
    return {
        f"{prefix}.json": json_text(est.to_dict()),
        f"{prefix}_plot.csv": csv_text("dim-plot", [tuple(r) for r in cols]),
    }


def run_dim(cfg):
    scans = read_scan_summaries(cfg.scans)
    est = diophantine_estimate(scans, cfg.tail_start)
    return _dim_files(est), {"fit_slope": est.fit_slope, "slope_upper": est.slope_upper,
                             "slope_lower": est.slope_lower}


def run_evolve(cfg):
    from .evolution import integrate, transfer_check
    from .periods import scan_adaptive

    prob = load_problem(cfg.problem)
    traj = integrate(prob, check=True)
    m = traj.values.reshape(len(traj.values), -1)
    rows = []
    for i in range(0, len(m), cfg.trajectory_stride):
        for j, u in enumerate(m[i]):
            rows.append((round(i * prob.h, 12), j, float(u)))
    files = {"trajectory.csv": csv_text("trajectory", rows)}
    summary = {"operator": prob.operator.name, "steps": prob.steps}
    if cfg.epsilons:
        scans = [scan_adaptive(prob.forcing, e, 64.0, cfg.min_periods, prob.T / 2, cfg.budget)
                 for e in cfg.epsilons]
        rep = transfer_check(prob, scans)
        files["transfer.csv"] = csv_text("transfer", rep.pairs)
        files["evolve.json"] = json_text({
            "fitted_C": rep.fitted_C, "exponent_fit": rep.exponent_fit,
            "predicted_exponent": rep.predicted_exponent, "envelope_C": rep.envelope_C,
            "residual": rep.residual, "tail_start": rep.tail_start,
        })
        summary.update(exponent_fit=rep.exponent_fit, pairs=len(rep.pairs))
    return files, summary


def run_liouville(cfg):
    from .ergodic import BirkhoffRun, birkhoff, liouville_closeness, parse_region

    region = parse_region(cfg.region)
    res = birkhoff(BirkhoffRun(cfg.omega, region, tuple(cfg.horizons)))
    rows = [(r["T"], r["average"], r["reference"], r["abs_error"]) for r in res.rows()]
    rep = liouville_closeness(cfg.omega, cfg.convergent_index, cfg.closeness_horizon,
                              stated_gap=cfg.stated_gap)
    info = {
        "region": region.name,
        "closeness": {
            "p": rep.p, "q": rep.q, "horizon": rep.horizon, "gap": list(rep.gap),
            "bound": rep.bound, "measured": rep.measured, "sound": rep.sound,
            "stated_bound": rep.stated_bound,
        },
        "steps": list(res.steps),
    }
    files = {"liouville.csv": csv_text("liouville", rows), "liouville.json": json_text(info)}
    return files, {"region": region.name, "bound": rep.bound, "measured": rep.measured}


def run_full(cfg):
    """cf -> periods ladder -> dim -> report."""
    from .periods import naito_ladder, scan_adaptive

    files, _ = run_cf(cfg)
    P = _polynomial(cfg)
    scans, err = _scan_ladder(P, cfg)
    files.update(_period_files(scans, err is not None))
    report = {"omega": cfg.omega, "partial": err is not None, "ladder": [summarize(s).to_dict() for s in scans]}
    if err is not None:
        raise _Partial(files | {"report.json": json_text(report)}, {"scans": len(scans)}, err)
    est = diophantine_estimate(scans, cfg.tail_start)
    files.update(_dim_files(est))
    report["dimension"] = est.to_dict()
    if cfg.naito_points and not cfg.poly:
        nl = naito_ladder(cfg.omega, depth=cfg.naito_points + 2)
        checks = []
        for e, L in list(nl)[: cfg.naito_points]:
            s = scan_adaptive(P, e, 64.0, cfg.min_periods, cfg.max_window, cfg.budget)
            checks.append({"epsilon": e, "L": L, "l_hat": s.l_hat, "holds": s.l_hat <= L})
        report["naito"] = {"C": nl.g_constant, "checks": checks}
    files["report.json"] = json_text(report)
    return files, {"fit_slope": est.fit_slope, "slope_upper": est.slope_upper,
                   "slope_lower": est.slope_lower, "scans": len(scans)}


RUNNERS = {
    "cf": run_cf,
    "eval": run_eval,
    "shiftdist": run_shiftdist,
    "kron": run_kron,
    "periods": run_periods,
    "dim": run_dim,
    "evolve": run_evolve,
    "liouville": run_liouville,
    "full-pipeline": run_full,
}


# ---------------------------------------------------------------------------
# orchestration


def _publish(out: Path, files: dict[str, bytes]) -> list[Path]:
    paths = []
    for name in sorted(files):
        p = out / name
        p.parent.mkdir(parents=True, exist_ok=True)
        tmp = p.with_name(f".{p.name}.tmp")
        tmp.write_bytes(files[name])
        tmp.replace(p)
        paths.append(p)
    return paths


def run(cfg: ExperimentConfig, cache: ResultCache | None = None) -> RunResult:
    """Execute ``cfg``, writing artifacts to ``cfg.out``.

    A cached entry with the same digest is copied instead of recomputing.
    On a budget overrun the artifacts computed so far are written with a
    ``partial`` flag and the error is re-raised.
    """
    out = Path(cfg.out)
    key = cfg.digest(__version__)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            import json

            summary = json.loads(hit.pop("summary.json"))
            return RunResult(_publish(out, hit), summary, cache_hit=True)
    try:
        files, summary = RUNNERS[cfg.kind](cfg)
    except _Partial as p:
        data = {k: v.encode() for k, v in p.files.items()}
        data["summary.json"] = json_text({**p.summary, "partial": True}).encode()
        _publish(out, data)
        raise p.cause
    data = {k: v.encode() for k, v in files.items()}
    summary = {"kind": cfg.kind, **summary}
    data["summary.json"] = json_text(summary).encode()
    if cache is not None:
        cache.put(key, data)
    data.pop("summary.json")
    paths = _publish(out, data)
    return RunResult(paths, summary)
