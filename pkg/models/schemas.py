"""Pydantic models for quadrature settings, JSON payloads and reports."""
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.settings import QuadratureDefaults
from models.flows import Constraint, FlowFamily, FlowSpec
from models.kernel import Kernel, RegularizedRieszKernel, RieszKernel
from models.polygon import Polygon
from utils.errors import InvalidArgumentError
from utils.validation import InputValidator


class QuadratureSpec(BaseModel):
    """Node counts, depth limits and tolerance shared by every integral."""

    model_config = ConfigDict(frozen=True)

    angular_nodes: int = Field(default=32, ge=2)
    line_nodes: int = Field(default=48, ge=2)
    outer_triangle_order: int = Field(default=7, ge=2)
    max_subdivision_depth: int = Field(default=10, ge=0)
    tolerance: float = 1e-8
    grading_levels: int = Field(default=8, ge=0)
    grading_ratio: float = Field(default=0.2, gt=0.0, lt=1.0)
    max_refinements: int = Field(default=3, ge=1)

    @field_validator("tolerance")
    @classmethod
    def _check_tolerance(cls, value: float) -> float:
        ok, message = InputValidator.validate_tolerance(value)
        if not ok:
            raise ValueError(message)
        return value

    @classmethod
    def from_defaults(cls, defaults: QuadratureDefaults, **overrides) -> "QuadratureSpec":
        values = defaults.model_dump()
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class PolygonPayload(BaseModel):
    vertices: List[Tuple[float, float]]

    @field_validator("vertices")
    @classmethod
    def _check_vertices(cls, value):
        ok, message = InputValidator.validate_vertices(value)
        if not ok:
            raise ValueError(message)
        return value

    def build(self) -> Polygon:
        return Polygon(self.vertices, reorient=True)


class RieszPayload(BaseModel):
    type: Literal["riesz"] = "riesz"
    alpha: float

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value: float) -> float:
        ok, message = InputValidator.validate_alpha(value)
        if not ok:
            raise ValueError(message)
        return value

    def build(self) -> Kernel:
        return RieszKernel(self.alpha)


class RegularizedRieszPayload(RieszPayload):
    type: Literal["regularized_riesz"] = "regularized_riesz"
    delta: float

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, value: float) -> float:
        ok, message = InputValidator.validate_delta(value)
        if not ok:
            raise ValueError(message)
        return value

    def build(self) -> Kernel:
        return RegularizedRieszKernel(self.alpha, self.delta)


KernelPayload = Annotated[Union[RieszPayload, RegularizedRieszPayload], Field(discriminator="type")]


class FlowSpecPayload(BaseModel):
    """Flow description with 1-based indices, e.g.
    ``{"family": "tilting", "side": 2, "constraint": "area"}``."""

    family: Literal["sliding", "tilting", "diagonal_vertex", "quad_two_sided"]
    side: Optional[int] = None
    vertex: Optional[int] = None
    diagonal: Optional[int] = Field(default=None, description="1 for P1P3, 2 for P2P4")
    constraint: Literal["none", "area", "perimeter"] = "none"
    beta_plus: Optional[float] = Field(default=None, ge=0.0)
    beta_minus: Optional[float] = Field(default=None, ge=0.0)

    def build(self, polygon: Polygon) -> FlowSpec:
        family = FlowFamily(self.family)
        if family in (FlowFamily.SLIDING, FlowFamily.TILTING):
            index, what = self.side, "side"
        elif family is FlowFamily.DIAGONAL_VERTEX:
            index, what = self.vertex, "vertex"
        else:
            index, what = self.diagonal or 1, "diagonal"
        if index is None:
            raise InvalidArgumentError(f"Flow family '{self.family}' needs a '{what}' index")
        ok, message = InputValidator.validate_index(index, 2 if what == "diagonal" else polygon.n, what)
        if not ok:
            raise InvalidArgumentError(message)
        return FlowSpec(
            family=family,
            index=index - 1,
            constraint=Constraint(self.constraint),
            beta_plus=self.beta_plus,
            beta_minus=self.beta_minus,
        )


class EnergyResult(BaseModel):
    value: float
    error: float
    points: int = 0
    refinements: int = 0


class SideResidual(BaseModel):
    i: int
    side_mean: float
    sliding_area: float
    sliding_perimeter: float
    tilting_area: float
    tilting_perimeter: float
    err: float
    errors: Dict[str, float]


class VertexResidual(BaseModel):
    i: int
    convex: bool
    diagonal_I: Optional[float] = None
    diagonal_I_perimeter: Optional[float] = None
    err: Optional[float] = None


class Verdict(BaseModel):
    constraint: Literal["area", "perimeter"]
    tolerance: float
    sliding: bool
    tilting: bool
    diagonal: bool
    stationary: bool
    rule: str = "|residual| <= max(tolerance, 3 * error_bound)"


class StationarityReport(BaseModel):
    sigma: float
    sigma_err: float
    area: float
    perimeter: float
    sides: List[SideResidual]
    vertices: List[VertexResidual]
    verdict: Verdict
