"""JSON documents: cone specs, the map DSL and horofunction payloads."""
import json
import math
from pathlib import Path
from typing import Any, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator

from . import cones
from .config import SCHEMA_VERSION
from .cones import ConeSpec
from .errors import ConeSpecError, InvalidPayloadError
from .horofunctions import (
    Combined,
    FunkSingleton,
    Horofunction,
    ProductHoro,
    ReverseFunk,
    ThompsonInteriorF,
    ThompsonInteriorR,
)
from .maps import (
    ConeMap,
    Embedding,
    Linear,
    LorentzStar,
    OrthantInverse,
    Primitive,
    ProductMap,
    PsdInverse,
    Restriction,
    Scale,
    congruence_matrix,
    lorentz_boost,
    make_map,
    vinberg_star,
)


class ConeModel(BaseModel):
    kind: Literal["orthant", "lorentz", "psd", "poly_h", "poly_v", "product"]
    dim: Optional[int] = None
    n: Optional[int] = None
    normals: Optional[List[List[float]]] = None
    rays: Optional[List[List[float]]] = None
    factors: Optional[List["ConeModel"]] = None

    def build(self) -> ConeSpec:
        size = self.dim if self.dim is not None else self.n
        if self.kind in ("orthant", "lorentz", "psd"):
            if size is None:
                raise ConeSpecError(f"{self.kind} cone needs a dimension")
            return getattr(cones, self.kind)(size)
        if self.kind == "poly_h":
            if not self.normals:
                raise ConeSpecError("poly_h cone needs facet normals")
            return cones.poly_h(self.normals)
        if self.kind == "poly_v":
            if not self.rays:
                raise ConeSpecError("poly_v cone needs rays")
            return cones.poly_v(self.rays)
        if not self.factors:
            raise ConeSpecError("product cone needs factors")
        return cones.product(*(f.build() for f in self.factors))


class OpModel(BaseModel):
    op: Literal["star", "linear", "congruence", "boost", "scale", "orthant_inverse",
                "lorentz_star", "psd_inverse", "product", "restrict", "embed"]
    matrix: Optional[List[List[float]]] = None
    alpha: Optional[float] = None
    n: Optional[int] = None
    rapidity: Optional[float] = None
    axis: int = 1
    start: Optional[int] = None
    stop: Optional[int] = None
    fill: Optional[List[float]] = None
    factors: Optional[List["MapModel"]] = None

    def _require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise InvalidPayloadError(f"map op '{self.op}' is missing {', '.join(missing)}")

    def build(self, source: ConeSpec) -> List[Primitive]:
        if self.op == "star":
            return list(vinberg_star(source).pipeline)
        if self.op == "linear":
            self._require("matrix")
            return [Linear(np.array(self.matrix))]
        if self.op == "congruence":
            self._require("matrix")
            return [Linear(congruence_matrix(np.array(self.matrix)))]
        if self.op == "boost":
            self._require("rapidity")
            return [Linear(lorentz_boost(source.ambient_dim, self.rapidity, self.axis))]
        if self.op == "scale":
            self._require("alpha")
            return [Scale(self.alpha)]
        if self.op == "orthant_inverse":
            return [OrthantInverse()]
        if self.op == "lorentz_star":
            return [LorentzStar()]
        if self.op == "psd_inverse":
            return [PsdInverse(self.n if self.n is not None else source.n)]
        if self.op == "product":
            self._require("factors")
            if source.kind != "product" or len(self.factors) != len(source.factors):
                raise InvalidPayloadError("product op needs one map per factor of a product source")
            return [ProductMap(tuple(m.build(f) for m, f in zip(self.factors, source.factors)))]
        self._require("start", "stop", "fill")
        cls = Restriction if self.op == "restrict" else Embedding
        return [cls(self.start, self.stop, np.array(self.fill))]


class MapModel(BaseModel):
    pipeline: List[OpModel]
    source: Optional[ConeModel] = None
    target: Optional[ConeModel] = None

    def build(self, source: Optional[ConeSpec] = None, check: bool = True) -> ConeMap:
        """Build against the document's source cone, or the one supplied."""
        if self.source is not None:
            source = self.source.build()
        if source is None:
            raise InvalidPayloadError("map document has no source cone")
        target = self.target.build() if self.target is not None else source
        steps: List[Primitive] = []
        for op in self.pipeline:
            steps.extend(op.build(source))
        return make_map(steps, source, target, check=check)


class HoroModel(BaseModel):
    tag: Literal["reverse_funk", "funk_singleton", "thompson_r", "thompson_f", "combined", "product"]
    x: Optional[List[float]] = None
    functional: Optional[List[float]] = None
    first: Optional["HoroModel"] = None
    second: Optional["HoroModel"] = None
    c: Optional[float] = None

    @field_validator("c", mode="before")
    @classmethod
    def _extended_real(cls, value: Any) -> Any:
        if isinstance(value, str):
            if value not in ("inf", "+inf", "-inf"):
                raise ValueError("c must be a number, 'inf' or '-inf'")
            return float(value)
        return value

    def build(self, cone: ConeSpec) -> Horofunction:
        if self.tag in ("reverse_funk", "thompson_r", "thompson_f"):
            if self.x is None:
                raise InvalidPayloadError(f"{self.tag} payload needs x")
            cls = {"reverse_funk": ReverseFunk, "thompson_r": ThompsonInteriorR,
                   "thompson_f": ThompsonInteriorF}[self.tag]
            return cls(cone, tuple(self.x))
        if self.tag == "funk_singleton":
            if self.functional is None:
                raise InvalidPayloadError("funk_singleton payload needs a functional")
            return FunkSingleton(cone, tuple(self.functional))
        if self.first is None or self.second is None or self.c is None:
            raise InvalidPayloadError(f"{self.tag} payload needs first, second and c")
        if self.tag == "combined":
            return Combined(self.first.build(cone), self.second.build(cone), self.c)
        if cone.kind != "product" or len(cone.factors) != 2:
            raise InvalidPayloadError("product payload needs a two-factor product cone")
        first, second = cone.factors
        return ProductHoro(cone, self.first.build(first), self.second.build(second), self.c)


ConeModel.model_rebuild()
OpModel.model_rebuild()
MapModel.model_rebuild()
HoroModel.model_rebuild()


# ---------------------------------------------------------------------------
# Files

def load_json(filename: Union[str, Path]) -> Any:
    """Load a UTF-8 JSON document."""
    path = Path(filename)
    if not path.exists():
        raise InvalidPayloadError(f"{filename} not found")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidPayloadError(f"{filename} is not valid JSON: {e}") from None


def _parse(model: type, document: Any, what: str):
    try:
        return model.model_validate(document)
    except ValidationError as e:
        raise InvalidPayloadError(f"invalid {what}: {e.errors()[0]['msg']}") from None


def parse_cone(document: Any) -> ConeSpec:
    return _parse(ConeModel, document, "cone spec").build()


def parse_map(document: Any, source: Optional[ConeSpec] = None, check: bool = True) -> ConeMap:
    return _parse(MapModel, document, "map").build(source, check)


def parse_horofunction(document: Any, cone: ConeSpec) -> Horofunction:
    return _parse(HoroModel, document, "horofunction payload").build(cone)


def load_cone(filename: Union[str, Path]) -> ConeSpec:
    return parse_cone(load_json(filename))


def load_map(filename: Union[str, Path], source: Optional[ConeSpec] = None) -> ConeMap:
    return parse_map(load_json(filename), source)


def to_plain(value: Any) -> Any:
    """Strict-JSON form: numpy to Python, non-finite floats to strings."""
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump())
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def dump_json(payload: Any) -> str:
    """Serialize a report; dicts get the schema version."""
    data = to_plain(payload)
    if isinstance(data, dict):
        data = {"schema": SCHEMA_VERSION, **data}
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_json(payload: Any, filename: Union[str, Path]) -> None:
    Path(filename).write_text(dump_json(payload), encoding="utf-8")
