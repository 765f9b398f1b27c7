"""Experiment configuration: one JSON document, validated with pydantic.

Group indices are 0-based. Relative data-file paths are resolved against the
directory holding the config file.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GaussianL1Spec(_Strict):
    family: Literal["gaussian_l1"]
    dim: int = Field(ge=1)
    lam: float = Field(alias="lambda", ge=0.0)
    mean: Union[float, List[float]] = 0.0

    @model_validator(mode="after")
    def _mean_dim(self):
        if isinstance(self.mean, list) and len(self.mean) != self.dim:
            raise ValueError(f"mean has {len(self.mean)} entries, dim is {self.dim}")
        return self


class LassoPosteriorSpec(_Strict):
    family: Literal["lasso_posterior"]
    design: Path
    response: Path
    lam: float = Field(alias="lambda", gt=0.0)
    noise_var: float = Field(1.0, gt=0.0)


class GroupLassoSpec(_Strict):
    family: Literal["group_lasso"]
    dim: int = Field(ge=1)
    groups: List[List[int]]
    weights: Optional[List[float]] = None
    mean: Union[float, List[float]] = 0.0

    @model_validator(mode="after")
    def _partition(self):
        flat = sorted(i for grp in self.groups for i in grp)
        if flat != list(range(self.dim)):
            raise ValueError(f"groups must partition 0..{self.dim - 1}")
        if self.weights is not None and len(self.weights) != len(self.groups):
            raise ValueError("one weight per group is required")
        if self.weights is not None and any(w <= 0 for w in self.weights):
            raise ValueError("group weights must be positive")
        if isinstance(self.mean, list) and len(self.mean) != self.dim:
            raise ValueError(f"mean has {len(self.mean)} entries, dim is {self.dim}")
        return self


TargetSpec = Annotated[Union[GaussianL1Spec, LassoPosteriorSpec, GroupLassoSpec],
                       Field(discriminator="family")]


class GaussianInit(_Strict):
    kind: Literal["gaussian"] = "gaussian"
    center: Optional[Union[float, List[float]]] = None


class PointInit(_Strict):
    kind: Literal["point"]
    point: Union[float, List[float]]


class SamplerSpec(_Strict):
    algorithm: Literal["prox_mh", "mala", "smoothed_mala", "ula"] = "prox_mh"
    eta: Union[Literal["auto"], float] = "auto"
    n_steps: int = Field(ge=1)
    n_chains: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    lazy: bool = False
    init: Annotated[Union[GaussianInit, PointInit], Field(discriminator="kind")] = GaussianInit()
    smoothing: Optional[float] = Field(None, gt=0.0)

    @field_validator("init", mode="before")
    @classmethod
    def _default_kind(cls, v):
        # "kind" may be omitted for the Gaussian initialization
        if isinstance(v, dict) and "kind" not in v:
            return {"kind": "gaussian", **v}
        return v

    @field_validator("eta")
    @classmethod
    def _positive(cls, v):
        if v != "auto" and not (np.isfinite(v) and v > 0):
            raise ValueError("eta must be a positive number or 'auto'")
        return v


class GridSpec(_Strict):
    ranges: List[Tuple[float, float]]
    bins: Union[int, List[int]] = 200


class DiagnosticsSpec(_Strict):
    grid: Optional[GridSpec] = None
    tv_threshold: float = Field(0.1, gt=0.0, lt=1.0)
    lemma_checks: bool = False
    lemma_samples: int = Field(10_000, ge=100)
    burn_in: int = Field(0, ge=0)
    mixing_chains: int = Field(200, ge=2)
    mixing_bins: int = Field(5, ge=2)
    mixing_groups: int = Field(1, ge=1)
    mixing_max_steps: int = Field(10_000, ge=1)


class OutputSpec(_Strict):
    directory: Path = Path("out")
    formats: List[Literal["csv", "json"]] = ["csv", "json"]


class ExperimentConfig(_Strict):
    target: TargetSpec
    sampler: SamplerSpec
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _consistent(self):
        t, s = self.target, self.sampler
        if s.algorithm in ("mala", "ula") and t.family == "lasso_posterior":
            raise ValueError(f"{s.algorithm} needs a smooth target; use smoothed_mala")
        if s.algorithm in ("mala", "ula") and t.family == "gaussian_l1" and t.lam > 0:
            raise ValueError(f"{s.algorithm} needs a smooth target (lambda = 0); use smoothed_mala")
        if s.algorithm in ("mala", "ula") and t.family == "group_lasso":
            raise ValueError(f"{s.algorithm} needs a smooth target; use smoothed_mala")
        if s.smoothing is not None and s.algorithm != "smoothed_mala":
            raise ValueError("smoothing only applies to smoothed_mala")
        dim = getattr(t, "dim", None)
        if dim is not None:
            for name, val in (("sampler.init.center", getattr(s.init, "center", None)),
                              ("sampler.init.point", getattr(s.init, "point", None))):
                if isinstance(val, list) and len(val) != dim:
                    raise ValueError(f"{name} has {len(val)} entries, target dim is {dim}")
            g = self.diagnostics.grid
            if g is not None and len(g.ranges) != dim:
                raise ValueError(f"diagnostics.grid has {len(g.ranges)} ranges, target dim is {dim}")
        if self.diagnostics.burn_in >= s.n_steps:
            raise ValueError("diagnostics.burn_in must be smaller than sampler.n_steps")
        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True,
                          separators=(",", ":"))

    def config_hash(self) -> str:
        """SHA-256 of the canonical config plus the bytes of any referenced data files."""
        h = hashlib.sha256(self.canonical_json().encode())
        if isinstance(self.target, LassoPosteriorSpec):
            for p in (self.target.design, self.target.response):
                h.update(hashlib.sha256(Path(p).read_bytes()).digest())
        return h.hexdigest()


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {path}: {e['msg']}")
    return "invalid config:\n" + "\n".join(lines)


def parse_config(text: str, base_dir: Path = Path("."), source: str = "<config>") -> ExperimentConfig:
    """Validate a JSON document. Raises ConfigError with line/column or field path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: JSON syntax error at line {e.lineno}, column {e.colno}: {e.msg}")
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_format_validation(e)}")
    t = cfg.target
    if isinstance(t, LassoPosteriorSpec):
        design = t.design if t.design.is_absolute() else base_dir / t.design
        response = t.response if t.response.is_absolute() else base_dir / t.response
        for name, p in (("target.design", design), ("target.response", response)):
            if not p.is_file():
                raise ConfigError(f"{source}: {name}: file not found: {p}")
        cfg = cfg.model_copy(update={"target": t.model_copy(update={"design": design,
                                                                    "response": response})})
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file; OSError propagates for I/O failures."""
    path = Path(path)
    text = path.read_text()
    return parse_config(text, path.parent, str(path))
