"""Experiment configuration: a validated, serializable record of one run."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticError, field_validator, model_validator

from .errors import ValidationError

KINDS = ("cf", "eval", "shiftdist", "kron", "periods", "dim", "evolve", "liouville", "full-pipeline")
MIN_PIPELINE_LADDER = 4

# fields that name files whose contents feed the run
FILE_FIELDS = ("poly", "problem", "scans")
# fields that do not change any artifact
NON_SEMANTIC = ("out", "threads")


def _strictly_monotone(values: list[float]) -> bool:
    d = [b - a for a, b in zip(values, values[1:])]
    return all(x > 0 for x in d) or all(x < 0 for x in d)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["cf", "eval", "shiftdist", "kron", "periods", "dim", "evolve", "liouville", "full-pipeline"]

    # inputs
    omega: str = "sqrt2"
    poly: Optional[str] = None
    problem: Optional[str] = None
    scans: Optional[str] = None

    # ladders and points
    epsilons: list[float] = Field(default_factory=list)
    deltas: list[float] = Field(default_factory=list)
    horizons: list[float] = Field(default_factory=list)
    times: list[str] = Field(default_factory=list)
    taus: list[str] = Field(default_factory=list)

    # per-kind parameters
    depth: int = 20
    window: Optional[float] = None
    max_window: float = 1e7
    min_periods: int = 8
    method: Literal["convergent", "grid"] = "convergent"
    region: str = "half-plane"
    convergent_index: int = 1
    closeness_horizon: float = 1e6
    stated_gap: Optional[float] = None
    tail_start: int = 2
    naito_points: int = 0
    trajectory_stride: int = 100

    # budgets and plumbing
    precision_digits: int = 60
    budget: int = 200_000_000
    threads: int = 1
    seed: int = 0
    out: str = "out"

    @field_validator("epsilons", "deltas", "horizons")
    @classmethod
    def _ladder(cls, v: list[float]) -> list[float]:
        if any(x <= 0 for x in v):
            raise ValueError("ladder values must be positive")
        if len(v) > 1 and not _strictly_monotone(v):
            raise ValueError("ladder must be strictly monotone")
        return v

    @field_validator("precision_digits", "budget", "threads", "depth", "min_periods", "trajectory_stride")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("window", "max_window", "closeness_horizon")
    @classmethod
    def _positive_float(cls, v):
        if v is not None and v <= 0:
            raise ValueError("must be positive")
        return v

    @model_validator(mode="after")
    def _kind_requirements(self):
        k = self.kind
        if k == "full-pipeline" and len(self.epsilons) < MIN_PIPELINE_LADDER:
            raise ValueError(f"full-pipeline needs an epsilon ladder of at least {MIN_PIPELINE_LADDER} points")
        if k == "periods" and not self.epsilons:
            raise ValueError("periods needs at least one epsilon")
        if k == "kron" and not self.deltas:
            raise ValueError("kron needs at least one delta")
        if k == "liouville" and not self.horizons:
            raise ValueError("liouville needs at least one horizon")
        if k == "dim" and not self.scans:
            raise ValueError("dim needs a periods summary file (scans)")
        if k == "evolve" and not self.problem:
            raise ValueError("evolve needs a problem file")
        if k == "eval" and not self.times:
            raise ValueError("eval needs at least one time")
        if k == "shiftdist" and not self.taus:
            raise ValueError("shiftdist needs at least one tau")
        return self

    # -- serialization

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")

    def dumps(self, fmt: str = "yaml") -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def save(self, path) -> None:
        p = Path(path)
        p.write_text(self.dumps("json" if p.suffix == ".json" else "yaml"))

    def resolve(self, base: Path) -> ExperimentConfig:
        """Make file references absolute relative to ``base``."""
        upd = {}
        for f in FILE_FIELDS:
            v = getattr(self, f)
            if v is not None and not Path(v).is_absolute():
                upd[f] = str((base / v).resolve())
        return self.model_copy(update=upd) if upd else self

    def digest(self, version: str) -> str:
        """sha256 over the semantic fields, referenced file contents and ``version``."""
        d = {k: v for k, v in self.to_dict().items() if k not in NON_SEMANTIC}
        h = hashlib.sha256()
        h.update(version.encode())
        for f in FILE_FIELDS:
            path = d.pop(f)
            if path is not None:
                p = Path(path)
                if not p.exists():
                    raise ValidationError(f"referenced file not found: {path}")
                h.update(f"{f}:".encode())
                h.update(hashlib.sha256(p.read_bytes()).digest())
                if f == "problem":
                    # a problem file may point at a forcing polynomial file
                    forcing = (yaml.safe_load(p.read_text()) or {}).get("forcing")
                    if isinstance(forcing, str) and (p.parent / forcing).exists():
                        h.update(hashlib.sha256((p.parent / forcing).read_bytes()).digest())
        h.update(json.dumps(d, sort_keys=True).encode())
        return h.hexdigest()


def make_config(**fields) -> ExperimentConfig:
    try:
        return ExperimentConfig(**fields)
    except PydanticError as exc:
        raise ValidationError(_message(exc)) from None


def load_config(path, **overrides) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"config file not found: {path}")
    text = p.read_text()
    try:
        data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a mapping")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(**data).resolve(p.parent)


def _message(exc: PydanticError) -> str:
    parts = []
    for e in exc.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "config"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)
