"""FastAPI wrapper: one endpoint per op, package errors mapped to 400."""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import AutopruneError
from . import ops
from .schemas import (BaselineRequest, BaselineResponse, FlopsRequest,
                      FlopsResponse, HealthResponse, OracleRequest,
                      OracleResponse, PretrainRequest, PretrainResponse,
                      RandomRequest, RandomResponse, ReportRequest,
                      ReportResponse, SearchRequest, SearchResponse)


def create_app() -> FastAPI:
    app = FastAPI(title="autoprune", version=__version__)

    @app.exception_handler(AutopruneError)
    async def _config_error(_, exc: AutopruneError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(_, exc: FileNotFoundError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/flops", response_model=FlopsResponse)
    def flops(req: FlopsRequest):
        return FlopsResponse(**ops.flops_op(req.network))

    @app.post("/search", response_model=SearchResponse)
    def search(req: SearchRequest):
        return SearchResponse(**ops.search_op(req.config, req.out_dir,
                                              req.stop_after))

    @app.post("/baseline", response_model=BaselineResponse)
    def baseline(req: BaselineRequest):
        return BaselineResponse(**ops.baseline_op(req.config, req.policy))

    @app.post("/random", response_model=RandomResponse)
    def random(req: RandomRequest):
        return RandomResponse(**ops.random_op(req.config, req.out_dir))

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(req: OracleRequest):
        return OracleResponse(**ops.oracle_op(req.config))

    @app.post("/pretrain", response_model=PretrainResponse)
    def pretrain(req: PretrainRequest):
        return PretrainResponse(**ops.pretrain_op(req.config, req.out_stem))

    @app.post("/report", response_model=ReportResponse)
    def report(req: ReportRequest):
        return ReportResponse(**ops.report_op(req.run_dir))

    return app
