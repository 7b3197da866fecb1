"""
Layered option grids: layers, study specs, path assignments and distances.

Paths are indexed in mixed radix with the first layer most significant, so
index order equals lexicographic order of option positions.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from utils.errors import SpecValidationError


@dataclass(frozen=True)
class LayerSpec:
    """One stage of the protocol with its discrete options

    Args:
        name: Layer identifier
        options: Ordered option identifiers (at least two, unique)
        payloads: One payload per option, interpreted by executors
    """

    name: str
    options: Tuple[str, ...]
    payloads: Tuple[Any, ...] = field(default=(), compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        if not self.payloads:
            object.__setattr__(self, "payloads", tuple(None for _ in self.options))
        else:
            object.__setattr__(self, "payloads", tuple(self.payloads))
        if not self.name:
            raise SpecValidationError("Layer name must be non-empty")
        if len(self.options) < 2:
            raise SpecValidationError(f"Layer '{self.name}' needs at least 2 options, got {len(self.options)}")
        if len(set(self.options)) != len(self.options):
            raise SpecValidationError(f"Layer '{self.name}' has duplicate option identifiers")
        if len(self.payloads) != len(self.options):
            raise SpecValidationError(f"Layer '{self.name}' has {len(self.payloads)} payloads for {len(self.options)} options")

    @property
    def size(self) -> int:
        return len(self.options)

    def position(self, option: str) -> int:
        try:
            return self.options.index(option)
        except ValueError:
            raise SpecValidationError(f"Layer '{self.name}' has no option '{option}'") from None

    def payload(self, option: str) -> Any:
        return self.payloads[self.position(option)]


@dataclass(frozen=True)
class Constraint:
    """Marks an assignment infeasible when every listed layer takes a listed option."""

    when: Tuple[Tuple[str, Tuple[str, ...]], ...]
    description: str = ""

    @classmethod
    def from_mapping(cls, when: Mapping[str, Sequence[str]], description: str = "") -> "Constraint":
        return cls(tuple((layer, tuple(options)) for layer, options in when.items()), description)

    def fires(self, choices: Mapping[str, str]) -> bool:
        return all(choices[layer] in options for layer, options in self.when)


@dataclass(frozen=True)
class PathAssignment:
    """One concrete choice per layer together with its mixed-radix index."""

    index: int
    choices: Tuple[str, ...]
    feasible: bool
    layers: Tuple[str, ...]

    def as_dict(self) -> Dict[str, str]:
        return dict(zip(self.layers, self.choices))

    def choice(self, layer: str) -> str:
        return self.choices[self.layers.index(layer)]


@dataclass(frozen=True)
class StudySpec:
    """Ordered layers, feasibility constraints and optional layer weights."""

    layers: Tuple[LayerSpec, ...]
    constraints: Tuple[Constraint, ...] = ()
    layer_weights: Optional[Tuple[float, ...]] = None
    study_id: str = "study"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.layers:
            raise SpecValidationError("A study needs at least one layer")
        names = [layer.name for layer in self.layers]
        if len(set(names)) != len(names):
            raise SpecValidationError(f"Duplicate layer names in study '{self.study_id}'")
        by_name = {layer.name: layer for layer in self.layers}
        for constraint in self.constraints:
            for layer_name, options in constraint.when:
                if layer_name not in by_name:
                    raise SpecValidationError(f"Constraint references unknown layer '{layer_name}'")
                for option in options:
                    if option not in by_name[layer_name].options:
                        raise SpecValidationError(
                            f"Constraint references unknown option '{option}' of layer '{layer_name}'"
                        )
        if self.layer_weights is not None:
            weights = tuple(float(w) for w in self.layer_weights)
            if len(weights) != len(self.layers):
                raise SpecValidationError(f"Expected {len(self.layers)} layer weights, got {len(weights)}")
            if any(w < 0 or not np.isfinite(w) for w in weights):
                raise SpecValidationError("Layer weights must be finite and non-negative")
            object.__setattr__(self, "layer_weights", weights)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(layer.name for layer in self.layers)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(layer.size for layer in self.layers)

    @property
    def n_paths(self) -> int:
        total = 1
        for size in self.sizes:
            total *= size
        return total

    def layer(self, name: str) -> LayerSpec:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise SpecValidationError(f"Unknown layer '{name}'")

    def layer_position(self, name: str) -> int:
        return self.names.index(self.layer(name).name)

    def decode(self, index: int) -> Tuple[str, ...]:
        """Option identifiers for a path index."""
        if not 0 <= index < self.n_paths:
            raise SpecValidationError(f"Path index {index} outside [0, {self.n_paths})")
        positions = []
        for size in reversed(self.sizes):
            index, position = divmod(index, size)
            positions.append(position)
        positions.reverse()
        return tuple(layer.options[pos] for layer, pos in zip(self.layers, positions))

    def encode(self, choices: Sequence[str]) -> int:
        """Path index for one option identifier per layer."""
        if len(choices) != len(self.layers):
            raise SpecValidationError(f"Expected {len(self.layers)} choices, got {len(choices)}")
        index = 0
        for layer, option in zip(self.layers, choices):
            index = index * layer.size + layer.position(option)
        return index

    def is_feasible(self, choices: Sequence[str]) -> bool:
        mapping = dict(zip(self.names, choices))
        return not any(constraint.fires(mapping) for constraint in self.constraints)

    def assignment(self, index: int) -> PathAssignment:
        choices = self.decode(index)
        return PathAssignment(index, choices, self.is_feasible(choices), self.names)

    def assignment_for(self, choices: Mapping[str, str]) -> PathAssignment:
        ordered = [choices[name] for name in self.names]
        return self.assignment(self.encode(ordered))

    def with_leading_layer(self, layer: LayerSpec) -> "StudySpec":
        """Copy of the spec with an extra most-significant layer."""
        weights = None if self.layer_weights is None else (1.0,) + self.layer_weights
        return StudySpec((layer,) + self.layers, self.constraints, weights, self.study_id)


def iter_paths(spec: StudySpec) -> Iterator[PathAssignment]:
    for index in range(spec.n_paths):
        yield spec.assignment(index)


def enumerate_paths(spec: StudySpec) -> List[PathAssignment]:
    """All nominal paths in index order, each flagged feasible or not."""
    return list(iter_paths(spec))


def _check_same_layout(p: PathAssignment, q: PathAssignment) -> None:
    if p.layers != q.layers:
        raise SpecValidationError("Paths come from different study specs")


def path_distance(p: PathAssignment, q: PathAssignment) -> int:
    """Number of layers where the two paths pick different options."""
    _check_same_layout(p, q)
    return sum(1 for a, b in zip(p.choices, q.choices) if a != b)


def weighted_path_distance(p: PathAssignment, q: PathAssignment, weights: Sequence[float]) -> float:
    _check_same_layout(p, q)
    if len(weights) != len(p.choices):
        raise SpecValidationError(f"Expected {len(p.choices)} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise SpecValidationError("Layer weights must be non-negative")
    return float(sum(w for w, a, b in zip(weights, p.choices, q.choices) if a != b))


def twin_index(spec: StudySpec, assignment: PathAssignment, layer: str, option: str) -> int:
    """Index of the path equal to ``assignment`` except at ``layer``."""
    position = spec.layer_position(layer)
    choices = list(assignment.choices)
    choices[position] = option
    return spec.encode(choices)


def robustness_paths(spec: StudySpec, default_choices: Mapping[str, str]) -> List[PathAssignment]:
    """Feasible paths that deviate from the default in exactly one layer."""
    default = spec.assignment_for(default_choices)
    deviations = []
    for position, layer in enumerate(spec.layers):
        for option in layer.options:
            if option == default.choices[position]:
                continue
            choices = list(default.choices)
            choices[position] = option
            candidate = spec.assignment(spec.encode(choices))
            if candidate.feasible:
                deviations.append(candidate)
    return deviations
