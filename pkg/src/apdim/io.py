"""Deterministic CSV/JSON emission and the polynomial / problem file formats.

Every CSV starts with ``# schema: <name> v<version>: col1,col2,...`` so a
consumer can refuse files it does not understand.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from .apfun import Frequency, FrequencyBasis, TrigPolynomial
from .errors import ValidationError

SCHEMA_VERSION = 1

SCHEMAS = {
    "cf": ("k", "a_k", "p_k", "q_k", "b_k"),
    "eval": ("t", "component", "re", "im"),
    "shiftdist": ("tau", "lo", "hi", "verdict"),
    "kron": ("center", "half_width", "quality"),
    "periods": ("epsilon", "tau", "quality", "gap"),
    "dim-plot": ("ln_inv_eps", "ln_l_hat"),
    "trajectory": ("t", "component", "u"),
    "transfer": ("tau", "eps_f", "eps_u"),
    "liouville": ("T", "average", "reference", "abs_error"),
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def atomic_write(path: Path, data: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(schema: str, rows: Iterable[Sequence]) -> str:
    cols = SCHEMAS[schema]
    buf = io.StringIO()
    buf.write(f"# schema: {schema} v{SCHEMA_VERSION}: {','.join(cols)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        if len(r) != len(cols):
            raise ValueError(f"{schema} row has {len(r)} fields, expected {len(cols)}")
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, schema: str, rows) -> Path:
    atomic_write(Path(path), csv_text(schema, rows))
    return Path(path)


def read_csv(path, schema: str) -> list[dict[str, str]]:
    """Rows of a CSV whose header declares ``schema``; anything else is rejected."""
    with open(path, newline="") as fh:
        head = fh.readline().strip()
        want = f"# schema: {schema} v{SCHEMA_VERSION}: {','.join(SCHEMAS[schema])}"
        if head != want:
            raise ValidationError(f"{path}: expected header {want!r}, found {head!r}")
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    atomic_write(Path(path), json_text(obj))
    return Path(path)


# ---------------------------------------------------------------------------
# scan summaries as consumed by `dim`


@dataclass(frozen=True)
class ScanSummary:
    epsilon: float
    l_hat: float
    n_periods: int
    window: float
    step: float

    @property
    def reliable(self) -> bool:
        return self.n_periods >= 2

    def to_dict(self) -> dict:
        return dict(epsilon=self.epsilon, l_hat=self.l_hat, n_periods=self.n_periods,
                    window=self.window, step=self.step)


def summarize(scan) -> ScanSummary:
    return ScanSummary(scan.epsilon, scan.l_hat, sum(t > scan.step for t in scan.periods),
                       scan.window, scan.step)


def read_scan_summaries(path) -> list[ScanSummary]:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema") != f"periods-summary v{SCHEMA_VERSION}":
        raise ValidationError(f"{path}: not a periods summary")
    return [ScanSummary(**{k: r[k] for k in ("epsilon", "l_hat", "n_periods", "window", "step")})
            for r in data["scans"]]


# ---------------------------------------------------------------------------
# polynomial and evolution-problem files


def _frequency(spec) -> Frequency | str:
    if isinstance(spec, dict):
        if "decimal" in spec:
            return Frequency.decimal(str(spec["decimal"]), int(spec["digits"]))
        raise ValidationError(f"unknown frequency entry {spec!r}")
    return str(spec)


def polynomial_from_dict(d: dict) -> TrigPolynomial:
    """Build a polynomial from ``basis``, ``exponents``, ``amplitudes``, ``real``.

    Basis entries are number descriptions (``sqrt2``, ``1/5``, ``[0;5,10^9,(2)]``)
    or ``{decimal: "1.4142", digits: 4}`` for values known to a declared precision.
    Amplitudes hold one list of ``[re, im]`` pairs per exponent row.
    """
    try:
        basis = FrequencyBasis(tuple(_frequency(b) for b in d["basis"]))
        amps = []
        for row in d["amplitudes"]:
            row = row if isinstance(row[0], (list, tuple)) else [row]
            amps.append([complex(float(re), float(im)) for re, im in row])
        return TrigPolynomial(basis, d["exponents"], amps, bool(d.get("real", False)))
    except KeyError as exc:
        raise ValidationError(f"polynomial description lacks {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed polynomial description: {exc}") from None


def polynomial_to_dict(P: TrigPolynomial) -> dict:
    return {
        "basis": [w.label for w in P.basis.omegas],
        "exponents": P.exponents.tolist(),
        "amplitudes": [[[float(a.real), float(a.imag)] for a in row] for row in P.amplitudes],
        "real": P.real,
    }


def load_yaml(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"file not found: {path}")
    with open(p) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a mapping")
    return data


def load_polynomial(path) -> TrigPolynomial:
    return polynomial_from_dict(load_yaml(path))


def load_problem(path):
    """Evolution problem: operator {name, params}, forcing (file or mapping), h, T, u0."""
    from .evolution import EvolutionProblem, make_operator

    d = load_yaml(path)
    try:
        op = d["operator"]
        operator = make_operator(op["name"], *op.get("params", ()))
        forcing = d["forcing"]
        if isinstance(forcing, str):
            forcing = load_polynomial(Path(path).parent / forcing)
        else:
            forcing = polynomial_from_dict(forcing)
    except KeyError as exc:
        raise ValidationError(f"problem description lacks {exc.args[0]!r}") from None
    kw = {k: d[k] for k in ("h", "T", "state_dim") if k in d}
    if "u0" in d:
        kw["u0"] = tuple(float(x) for x in d["u0"])
    return EvolutionProblem(operator, forcing, **kw)
