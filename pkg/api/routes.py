import logging
import math
from functools import lru_cache
from typing import Any, Dict, List, Literal, Optional, Tuple

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from agents.symmetrization_agent import quadrilateral_recursion, triangle_recursion
from api.middleware import LoggingMiddleware
from config.settings import get_settings
from models.energy import EnergyEvaluator
from models.potential import PotentialEvaluator
from models.schemas import (EnergyResult, FlowSpecPayload, KernelPayload, PolygonPayload,
                            QuadratureSpec, StationarityReport)
from models.stationarity import StationarityAnalyzer
from models.variation import DEFAULT_FD_STEP, VariationAnalyzer
from storage.result_store import ResultStore
from utils.errors import AccuracyError, OptimizationError, PolyRieszError
from utils.parallel import ChunkedExecutor
from utils.validation import InputValidator

app = FastAPI(
    title="polyriesz",
    description="Nonlocal interaction energies of polygons: energies, potentials, "
                "stationarity conditions and first variations",
    version="1.0.0",
)

app.add_middleware(LoggingMiddleware)

logger = logging.getLogger(__name__)


@lru_cache()
def get_store() -> ResultStore:
    return ResultStore(get_settings().storage.results_path)


def get_executor() -> ChunkedExecutor:
    execution = get_settings().execution
    return ChunkedExecutor(execution.threads, execution.chunk_size)


@app.exception_handler(PolyRieszError)
async def polyriesz_error_handler(request: Request, exc: PolyRieszError):
    status = 500 if isinstance(exc, (AccuracyError, OptimizationError)) else 400
    logger.error(f"{request.url.path} failed: {exc.message}")
    content = {"detail": exc.message, **exc.to_dict()}
    content.pop("trace", None)
    for key, value in content.items():
        if isinstance(value, float) and not math.isfinite(value):
            content[key] = None
    return JSONResponse(status_code=status, content=content)


class ComputationRequest(BaseModel):
    polygon: PolygonPayload
    kernel: KernelPayload
    quad_tol: Optional[float] = None
    archive: bool = False

    @field_validator("quad_tol")
    @classmethod
    def _check_quad_tol(cls, value: Optional[float]) -> Optional[float]:
        if value is not None:
            ok, message = InputValidator.validate_tolerance(value)
            if not ok:
                raise ValueError(message)
        return value

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec.from_defaults(get_settings().quadrature, tolerance=self.quad_tol)


class PotentialRequest(ComputationRequest):
    points: List[Tuple[float, float]] = Field(..., min_length=1)


class StationarityRequest(ComputationRequest):
    constraint: Literal["area", "perimeter"] = "area"
    tolerance: float = Field(default=1e-6, gt=0.0)


class VariationRequest(ComputationRequest):
    flow: FlowSpecPayload
    fd_step: float = Field(default=DEFAULT_FD_STEP, gt=0.0)


class PolyaSzegoRequest(BaseModel):
    shape: Literal["triangle", "quad"]
    a0: float = Field(..., gt=0.0)
    steps: int = Field(default=100, ge=0, le=100000)


class EnergyResponse(EnergyResult):
    result_hash: Optional[str] = None


class PointPotential(BaseModel):
    x: Tuple[float, float]
    value: float
    error: float


class PotentialResponse(BaseModel):
    values: List[PointPotential]
    result_hash: Optional[str] = None


class StationarityResponse(StationarityReport):
    result_hash: Optional[str] = None


def _archive(store: ResultStore, kind: str, request: ComputationRequest, result: Dict[str, Any]) -> Optional[str]:
    if not (request.archive or get_settings().storage.archive):
        return None
    return store.store(kind, request.model_dump(exclude={"archive"}), result)


@app.post("/energy", response_model=EnergyResponse)
def compute_energy(request: ComputationRequest, store: ResultStore = Depends(get_store),
                   executor: ChunkedExecutor = Depends(get_executor)):
    """E(P) with its error bound"""
    polygon, kernel = request.polygon.build(), request.kernel.build()
    result = EnergyEvaluator(polygon, kernel, request.quadrature(), executor).compute()
    payload = result.model_dump()
    return EnergyResponse(**payload, result_hash=_archive(store, "energy", request, payload))


@app.post("/potential", response_model=PotentialResponse)
def compute_potential(request: PotentialRequest, store: ResultStore = Depends(get_store),
                      executor: ChunkedExecutor = Depends(get_executor)):
    """v_P at each requested point"""
    polygon, kernel = request.polygon.build(), request.kernel.build()
    evaluator = PotentialEvaluator(polygon, kernel, request.quadrature(), executor)
    values = [PointPotential(x=point, **evaluator.estimate(point).as_dict()) for point in request.points]
    payload = {"values": [v.model_dump() for v in values]}
    return PotentialResponse(values=values, result_hash=_archive(store, "potential", request, payload))


@app.post("/stationarity", response_model=StationarityResponse)
def compute_stationarity(request: StationarityRequest, store: ResultStore = Depends(get_store),
                         executor: ChunkedExecutor = Depends(get_executor)):
    """sigma, side residuals, diagonal first variations and the verdict"""
    polygon, kernel = request.polygon.build(), request.kernel.build()
    report = StationarityAnalyzer(polygon, kernel, request.quadrature(), executor).report(
        request.constraint, request.tolerance
    )
    payload = report.model_dump()
    return StationarityResponse(**payload, result_hash=_archive(store, "stationarity", request, payload))


@app.post("/variation")
def compute_variation(request: VariationRequest, store: ResultStore = Depends(get_store),
                      executor: ChunkedExecutor = Depends(get_executor)):
    """Analytic against Richardson finite-difference first variation"""
    polygon, kernel = request.polygon.build(), request.kernel.build()
    flow = request.flow.build(polygon)
    comparison = VariationAnalyzer(polygon, kernel, request.quadrature(), executor).compare(flow, request.fd_step)
    comparison["result_hash"] = _archive(store, "variation", request, comparison)
    return comparison


@app.post("/polya-szego")
def polya_szego(request: PolyaSzegoRequest):
    """Scalar symmetrization chains"""
    if request.shape == "triangle":
        values = triangle_recursion(request.a0, request.steps)
    else:
        values = quadrilateral_recursion(request.a0, request.steps)
    return {"shape": request.shape, "a0": request.a0, "values": values}


@app.get("/results/{result_hash}")
def get_result(result_hash: str, store: ResultStore = Depends(get_store)):
    """Retrieve an archived result by hash"""
    entry = store.retrieve(result_hash)
    if not entry:
        raise HTTPException(status_code=404, detail="Result not found")
    return entry


@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "service": "polyriesz",
        "version": "1.0.0",
        "components": {
            "storage": "operational",
            "quadrature": "operational",
        },
    }
