"""JSON run configuration.

Every key has a default, unknown keys are rejected, and range violations
name the broken assumption.  ``RunConfig.model_dump(mode="json")`` is the
canonical echo written into manifests; parsing it back gives an equal
config.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import model as mdl
from .basis import build_basis
from .diagnostics import DEFAULT_ALPHA, DEFAULT_BETA, TestFunction
from .ensemble import STUDIES, EnsembleSpec
from .integrators import SCHEMES, StepperConfig


class ConfigError(ValueError):
    """Missing file, malformed JSON, schema or range violation."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Vec3 = tuple[float, float, float]


class DomainConfig(_Strict):
    length: float = Field(np.pi, gt=0)
    n_modes: int = Field(16, ge=1)
    oversample: int = Field(4, ge=4)


class AnisotropyConfig(_Strict):
    kind: Literal["zero", "uniaxial"] = "zero"
    strength: float = 0.0
    axis: Vec3 = (0.0, 0.0, 1.0)
    cutoff: float | None = Field(None, gt=0)


class ChannelConfig(_Strict):
    kind: Literal["constant", "cosine", "table"] = "constant"
    vector: Vec3 = (0.0, 0.0, 1.0)
    amplitude: float = 1.0
    mode: int = Field(0, ge=0)
    x: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None


class InitialConfig(_Strict):
    kind: Literal["constant", "spherical", "coefficients"] = "spherical"
    vector: Vec3 = (1.0, 0.0, 0.0)
    azimuth: tuple[float, float] = (0.3, 0.8)
    polar: tuple[float, float] = (1.2, 0.4)
    mode: int = Field(1, ge=0)
    coefficients: tuple[float, ...] | None = None


class ModelConfig(_Strict):
    lambda1: float = 1.0
    lambda2: float = 1.0
    drift: bool = True
    anisotropy: AnisotropyConfig = AnisotropyConfig()
    channels: tuple[ChannelConfig, ...] = (
        ChannelConfig(kind="cosine", vector=(1.0, 0.0, 0.0), amplitude=0.5, mode=1),
        ChannelConfig(kind="constant", vector=(0.0, 0.6, 0.8), amplitude=0.7),
    )
    initial: InitialConfig = InitialConfig()

    @field_validator("lambda2")
    @classmethod
    def _damping(cls, v):
        if not v > 0:
            raise ValueError("lambda2 must be > 0 (damping constant must be strictly positive)")
        return v


class StepperSection(_Strict):
    scheme: Literal[SCHEMES] = "implicit_midpoint"
    dt: float = Field(1e-3, gt=0)
    T: float | None = Field(None, ge=0)
    steps: int | None = Field(None, ge=0)
    tol: float = Field(1e-13, gt=0)
    max_iter: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _horizon(self):
        if self.T is None and self.steps is None:
            object.__setattr__(self, "T", 1.0)
        if self.T is None:
            object.__setattr__(self, "T", self.steps * self.dt)
        n = round(self.T / self.dt)
        if abs(n * self.dt - self.T) > 1e-12 * max(self.T, 1.0):
            raise ValueError(f"dt={self.dt} does not divide T={self.T}")
        if self.steps is None:
            object.__setattr__(self, "steps", int(n))
        elif self.steps != n:
            raise ValueError(f"dt * steps = {self.dt * self.steps} differs from T = {self.T}")
        return self


class EnsembleSection(_Strict):
    replicas: int = Field(1, ge=1)
    base_seed: int = Field(0, ge=0)
    study: Literal[STUDIES] = "plain"
    n_list: tuple[int, ...] = (8, 16, 32)
    dt_list: tuple[float, ...] = (2.0**-6, 2.0**-7, 2.0**-8)
    workers: int | None = Field(None, ge=1)
    reference: Literal["rotation", "fine"] = "fine"
    retries: int = Field(2, ge=0, le=2)


class TestFunctionConfig(_Strict):
    __test__ = False

    mode: int = Field(1, ge=1)
    vector: Vec3 = (1.0, 0.0, 0.0)


class DiagnosticsConfig(_Strict):
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA
    stride: int = Field(1, ge=1)
    snapshot_stride: int = Field(0, ge=0)
    test_functions: tuple[TestFunctionConfig, ...] = ()

    @field_validator("beta")
    @classmethod
    def _beta(cls, v):
        if not v > 0.25:
            raise ValueError("beta must be > 1/4 (the X^-beta estimate requires beta > 1/4)")
        return v

    @field_validator("alpha")
    @classmethod
    def _alpha(cls, v):
        if not 0 < v < 0.5:
            raise ValueError("alpha must lie in (0, 1/2) (Hölder exponents below 1/2)")
        return v


class RunConfig(_Strict):
    domain: DomainConfig = DomainConfig()
    model: ModelConfig = ModelConfig()
    stepper: StepperSection = StepperSection()
    ensemble: EnsembleSection = EnsembleSection()
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    out_dir: str = "sllg_out"

    # -- builders ----------------------------------------------------------

    def build_params(self):
        d, mc = self.domain, self.model
        basis = build_basis(d.length, d.n_modes, d.oversample)
        if mc.anisotropy.kind == "uniaxial":
            aniso = mdl.Anisotropy.uniaxial(mc.anisotropy.strength, mc.anisotropy.axis,
                                            mc.anisotropy.cutoff)
        else:
            aniso = mdl.Anisotropy()
        channels = tuple(mdl.NoiseChannel(**c.model_dump()) for c in mc.channels)
        initial = mdl.InitialDatum(**mc.initial.model_dump())
        return mdl.ModelParams(basis, mc.lambda1, mc.lambda2, aniso, channels, initial, mc.drift)

    def build_stepper(self):
        s = self.stepper
        return StepperConfig(s.scheme, s.dt, s.T, s.tol, s.max_iter)

    def build_ensemble(self):
        e, dg = self.ensemble, self.diagnostics
        return EnsembleSpec(self.build_params(), self.build_stepper(), e.replicas, e.base_seed,
                            dg.stride, dg.snapshot_stride, dg.beta, dg.alpha,
                            study=e.study, n_list=e.n_list, dt_list=e.dt_list, workers=e.workers)

    def build_test_functions(self):
        return [TestFunction(t.mode, t.vector) for t in self.diagnostics.test_functions]

    def with_overrides(self, seed=None, out=None, scheme=None, dt=None, n_modes=None):
        """Apply command-line overrides; the horizon ``T`` is kept fixed."""
        data = self.model_dump(mode="json")
        if seed is not None:
            data["ensemble"]["base_seed"] = seed
        if out is not None:
            data["out_dir"] = str(out)
        if scheme is not None:
            data["stepper"]["scheme"] = scheme
        if dt is not None:
            data["stepper"]["dt"] = dt
            data["stepper"]["steps"] = None
        if n_modes is not None:
            data["domain"]["n_modes"] = n_modes
        return validate_config(data)


def _format_errors(exc: ValidationError):
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def validate_config(data) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return validate_config(data)
