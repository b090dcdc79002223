"""Pydantic request/response models for the service endpoints."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..config import KernelConfig

Engine = Literal["auto", "band", "nystrom", "both"]


class CertifyRequest(BaseModel):
    kernel: KernelConfig
    depth: int = Field(default=20, ge=1, le=200)
    engine: Engine = "auto"
    grid_size: int = Field(default=64, ge=8, le=512)
    tol: float = Field(default=0.0, ge=0.0)


class WitnessModel(BaseModel):
    type: str
    k: Optional[int] = None
    value: Optional[float] = None
    err: Optional[float] = None
    z: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    pi_value: Optional[float] = None
    min_eigenvalue: Optional[float] = None


class CertificateModel(BaseModel):
    verdict: Literal["positive_up_to", "non_positive"]
    depth: int
    min_margin: Optional[float] = None
    witness: Optional[WitnessModel] = None
    provenance: dict
    text: str


class SweepRequest(BaseModel):
    kernel: KernelConfig
    param: str
    lo: float
    hi: float
    count: int = Field(ge=2, le=100_000)
    depth: int = Field(default=20, ge=1, le=200)
    engine: Engine = "auto"
    grid_size: int = Field(default=64, ge=8, le=512)
    tol: float = Field(default=0.0, ge=0.0)
    seed: int = 0


class SweepResponse(BaseModel):
    csv: str
    positive_intervals: list[tuple[float, float]]
    h_intervals: dict[int, list[tuple[float, float]]]
    summary: str


class SpectrumRequest(BaseModel):
    kernel: KernelConfig
    n: int = Field(default=10, ge=1, le=100_000)


class SpectrumResponse(BaseModel):
    eps0: float
    eps: float
    r: float
    s: float
    eigenvalues: list[float]
    csv: str


class WignerRequest(BaseModel):
    kernel: KernelConfig
    n_x: int = Field(default=128, ge=2, le=4096)
    n_p: int = Field(default=256, ge=4, le=8192)
    window: Optional[float] = Field(default=None, gt=0)
    format: Literal["csv", "binary"] = "csv"


class WignerResponse(BaseModel):
    csv: Optional[str] = None
    data_b64: Optional[str] = None
    integral: float
    imag_residue: float


class HealthResponse(BaseModel):
    status: str
    version: str
