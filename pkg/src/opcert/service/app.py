"""FastAPI application exposing certify, sweep, spectrum, and wigner."""

from __future__ import annotations

import base64
import io

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..certify import EngineDisagreement, certify
from ..gauss import derive_spectrum
from ..kernels import KernelError, NormalizationSingular
from ..sweep import VERSION, SweepSpec, run_sweep
from ..wigner import WindowTooSmall, wigner_forward, write_binary, write_csv
from .schemas import (CertificateModel, CertifyRequest, HealthResponse, SpectrumRequest,
                      SpectrumResponse, SweepRequest, SweepResponse, WignerRequest,
                      WignerResponse)


def create_app() -> FastAPI:
    app = FastAPI(title="opcert", version=VERSION,
                  description="Positivity certification of trace-class integral operators")

    @app.exception_handler(KernelError)
    async def _kernel_error(request: Request, exc: KernelError):
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, WindowTooSmall):
            payload["suggested_window"] = exc.suggested_window
            return JSONResponse(status_code=422, content={"detail": payload})
        if isinstance(exc, NormalizationSingular):
            return JSONResponse(status_code=422, content={"detail": payload})
        if isinstance(exc, EngineDisagreement):
            payload["details"] = {k: repr(v) for k, v in exc.details.items()}
        return JSONResponse(status_code=500, content={"detail": payload})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422,
                            content={"detail": {"error": "ValueError", "message": str(exc)}})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=VERSION)

    @app.post("/certify", response_model=CertificateModel)
    def certify_endpoint(req: CertifyRequest) -> CertificateModel:
        cert = certify(req.kernel.to_spec(), req.depth, engine=req.engine,
                       grid_size=req.grid_size, tol=req.tol)
        d = cert.to_dict()
        return CertificateModel(**d, text=cert.to_text())

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_endpoint(req: SweepRequest) -> SweepResponse:
        spec = SweepSpec(base=req.kernel.to_spec(), param=req.param, lo=req.lo, hi=req.hi,
                         count=req.count, depth=req.depth, engine=req.engine,
                         grid_size=req.grid_size, tol=req.tol, seed=req.seed)
        result = run_sweep(spec)
        return SweepResponse(csv=result.csv,
                             positive_intervals=result.positive_intervals,
                             h_intervals=result.h_intervals,
                             summary=result.summary_text())

    @app.post("/spectrum", response_model=SpectrumResponse)
    def spectrum_endpoint(req: SpectrumRequest) -> SpectrumResponse:
        sp = derive_spectrum(req.kernel.gaussian.to_params())
        lam = sp.eigenvalues(req.n)
        lines = [f"# opcert-spectrum/1 eps0={sp.eps0:.17g} eps={sp.eps:.17g} "
                 f"r={sp.r:.17g} s={sp.s:.17g}", "n,lambda"]
        lines += [f"{n},{v:.17g}" for n, v in enumerate(lam)]
        return SpectrumResponse(eps0=sp.eps0, eps=sp.eps, r=sp.r, s=sp.s,
                                eigenvalues=[float(v) for v in lam],
                                csv="\n".join(lines) + "\n")

    @app.post("/wigner", response_model=WignerResponse)
    def wigner_endpoint(req: WignerRequest) -> WignerResponse:
        grid = wigner_forward(req.kernel.to_spec(), n_x=req.n_x, n_p=req.n_p,
                              window=req.window)
        if req.format == "csv":
            buf = io.StringIO()
            write_csv(grid, buf)
            return WignerResponse(csv=buf.getvalue(), integral=grid.integral(),
                                  imag_residue=grid.imag_residue)
        raw = io.BytesIO()
        write_binary(grid, raw)
        return WignerResponse(data_b64=base64.b64encode(raw.getvalue()).decode("ascii"),
                              integral=grid.integral(), imag_residue=grid.imag_residue)

    return app


app = create_app()
