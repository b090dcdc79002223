"""Kernel configuration schema and file loading (JSON or YAML).

Schema::

    {
      "gaussian":  {"A": 4.0, "B": 0.0, "C": 1.0, "D": 0.0, "E": 0.0},
      "poly":      {"alpha2": -1.0, "beta2": 0.0, "gamma2": 1.0,
                    "alpha1": 0.0,  "beta1": 0.0, "gamma0": 1.0},
      "normalize": true,
      "hbar":      1.0
    }

``poly`` defaults to the constant 1 (the bare Gaussian kernel).
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, field_validator

from .kernels import GaussianParams, KernelSpec, PolyCoeffs


class GaussianModel(BaseModel):
    A: float = Field(gt=0)
    C: float = Field(gt=0)
    B: float = 0.0
    D: float = 0.0
    E: float = 0.0

    def to_params(self) -> GaussianParams:
        return GaussianParams(A=self.A, C=self.C, B=self.B, D=self.D, E=self.E)


class PolyModel(BaseModel):
    alpha2: float = 0.0
    beta2: float = 0.0
    gamma2: float = 0.0
    alpha1: float = 0.0
    beta1: float = 0.0
    gamma0: float = 0.0

    def to_coeffs(self) -> PolyCoeffs:
        return PolyCoeffs(alpha2=self.alpha2, beta2=self.beta2, gamma2=self.gamma2,
                          alpha1=self.alpha1, beta1=self.beta1, gamma0=self.gamma0)


class KernelConfig(BaseModel):
    gaussian: GaussianModel
    poly: PolyModel = PolyModel(gamma0=1.0)
    normalize: bool = True
    hbar: float = 1.0

    @field_validator("hbar")
    @classmethod
    def _positive_hbar(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("hbar must be > 0")
        return v

    def to_spec(self) -> KernelSpec:
        return KernelSpec.gauss_poly(self.gaussian.to_params(), self.poly.to_coeffs(),
                                     normalize=self.normalize, hbar=self.hbar)


def load_config(path: str | Path) -> KernelConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    return KernelConfig.model_validate(data)
