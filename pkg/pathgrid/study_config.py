"""
Study config files: pydantic models, loading and the published JSON Schema.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from pathgrid.grid import Constraint, LayerSpec, StudySpec
from utils.errors import SpecValidationError


class OptionConfig(BaseModel):
    id: str = Field(min_length=1, description="Option identifier, unique within its layer")
    payload: Any = Field(default=None, description="Parameter value interpreted by the study executor")


class LayerConfig(BaseModel):
    name: str = Field(min_length=1, description="Layer identifier")
    options: List[OptionConfig] = Field(min_length=2, description="Ordered options (at least two)")

    @field_validator("options", mode="before")
    @classmethod
    def wrap_bare_options(cls, value):
        if isinstance(value, list):
            return [{"id": item} if isinstance(item, str) else item for item in value]
        return value

    @field_validator("options")
    @classmethod
    def unique_option_ids(cls, value: List[OptionConfig]) -> List[OptionConfig]:
        ids = [option.id for option in value]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate option ids: {duplicates}")
        return value


class ConstraintConfig(BaseModel):
    when: Dict[str, List[str]] = Field(min_length=1, description="Layer -> options; fires when all match")
    description: str = ""


class StudyConfig(BaseModel):
    study_id: str = Field(min_length=1)
    kind: Literal["premium", "anomalies", "fmb"]
    description: str = ""
    layers: List[LayerConfig] = Field(min_length=1)
    constraints: List[ConstraintConfig] = Field(default_factory=list)
    layer_weights: Optional[List[float]] = None
    default_path: Optional[Dict[str, str]] = None
    settings: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_references(self) -> "StudyConfig":
        options_by_layer = {layer.name: [o.id for o in layer.options] for layer in self.layers}
        if len(options_by_layer) != len(self.layers):
            raise ValueError("duplicate layer names")
        for number, constraint in enumerate(self.constraints):
            for layer_name, options in constraint.when.items():
                if layer_name not in options_by_layer:
                    raise ValueError(f"constraints[{number}] references unknown layer '{layer_name}'")
                unknown = [o for o in options if o not in options_by_layer[layer_name]]
                if unknown:
                    raise ValueError(
                        f"constraints[{number}] references unknown options {unknown} of layer '{layer_name}'"
                    )
        if self.layer_weights is not None:
            if len(self.layer_weights) != len(self.layers):
                raise ValueError(f"layer_weights has {len(self.layer_weights)} entries for {len(self.layers)} layers")
            if any(w < 0 for w in self.layer_weights):
                raise ValueError("layer_weights must be non-negative")
        if self.default_path is not None:
            for layer_name, option in self.default_path.items():
                if layer_name not in options_by_layer:
                    raise ValueError(f"default_path references unknown layer '{layer_name}'")
                if option not in options_by_layer[layer_name]:
                    raise ValueError(f"default_path option '{option}' not in layer '{layer_name}'")
        return self

    def to_spec(self) -> StudySpec:
        layers = tuple(
            LayerSpec(layer.name, tuple(o.id for o in layer.options), tuple(o.payload for o in layer.options))
            for layer in self.layers
        )
        constraints = tuple(Constraint.from_mapping(c.when, c.description) for c in self.constraints)
        weights = None if self.layer_weights is None else tuple(self.layer_weights)
        return StudySpec(layers, constraints, weights, self.study_id)


def format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def parse_study_config(payload: Union[str, Dict[str, Any]], source: str = "<string>") -> StudyConfig:
    """Validate a config given as JSON text or an already parsed dict."""
    if isinstance(payload, str):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as e:
            raise SpecValidationError(f"{source}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return StudyConfig.model_validate(payload)
    except ValidationError as e:
        raise SpecValidationError(f"{source}: {format_validation_error(e)}") from e


def load_study_config(path: Union[str, Path]) -> StudyConfig:
    """Read and validate a study config file."""
    path = Path(path)
    if not path.exists():
        raise SpecValidationError(f"Config file not found: {path}")
    return parse_study_config(path.read_text(encoding="utf-8"), source=str(path))


def study_config_schema() -> Dict[str, Any]:
    return StudyConfig.model_json_schema()


def spec_to_dict(spec: StudySpec) -> Dict[str, Any]:
    """Layers, payloads and constraints of a spec as plain JSON data."""
    return {
        "study_id": spec.study_id,
        "layers": [{"name": layer.name, "options": [{"id": o, "payload": p} for o, p in zip(layer.options, layer.payloads)]}
                   for layer in spec.layers],
        "constraints": [{"when": {name: list(options) for name, options in c.when}, "description": c.description}
                        for c in spec.constraints],
        "layer_weights": None if spec.layer_weights is None else list(spec.layer_weights),
    }


def spec_from_dict(payload: Dict[str, Any]) -> StudySpec:
    """Inverse of ``spec_to_dict``."""
    try:
        layers = tuple(
            LayerSpec(layer["name"], tuple(o["id"] for o in layer["options"]),
                      tuple(o.get("payload") for o in layer["options"]))
            for layer in payload["layers"]
        )
        constraints = tuple(Constraint.from_mapping(c["when"], c.get("description", ""))
                            for c in payload.get("constraints", []))
    except (KeyError, TypeError) as e:
        raise SpecValidationError(f"Malformed study layout: {str(e)}") from e
    weights = payload.get("layer_weights")
    return StudySpec(layers, constraints, None if weights is None else tuple(weights), payload.get("study_id", "study"))
