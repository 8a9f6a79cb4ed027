"""JSON model files and the word-spec grammar used by the command line."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .component import MatrixModel, schmidt_state
from .ncpoly import GeneratorRef, Letter, Word, normalize


class ModelError(ValueError):
    """Malformed or inconsistent model file / word spec."""


@dataclass
class Options:
    max_word_len: int = 2
    psd_tol: float = 1e-8
    moment_tol: float = 1e-9
    term_cap: int = 200_000
    seed: int = 42


@dataclass
class ComponentSpec:
    dim: int
    generators: list[np.ndarray]
    schmidt: Optional[list[float]] = None
    vector: Optional[np.ndarray] = None

    def state(self) -> np.ndarray:
        if self.schmidt is not None:
            return schmidt_state(self.schmidt)
        return self.vector

    def model(self) -> MatrixModel:
        return MatrixModel(self.generators, self.state())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComponentSpec):
            return NotImplemented
        same_state = (
            self.schmidt == other.schmidt
            if self.schmidt is not None or other.schmidt is not None
            else np.array_equal(self.vector, other.vector)
        )
        return (
            self.dim == other.dim
            and len(self.generators) == len(other.generators)
            and all(np.array_equal(a, b) for a, b in zip(self.generators, other.generators))
            and same_state
        )


@dataclass
class ModelFile:
    components: list[ComponentSpec]
    options: Options = field(default_factory=Options)

    def models(self) -> list[MatrixModel]:
        return [c.model() for c in self.components]


def _complex(x: Any, where: str) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        z = complex(float(x[0]), float(x[1]))
        if math.isfinite(z.real) and math.isfinite(z.imag):
            return z
    raise ModelError(f"{where}: expected a finite [re, im] pair, got {x!r}")


def _matrix(raw: Any, dim: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ModelError(f"{where}: expected {dim} rows")
    rows = []
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != dim:
            raise ModelError(f"{where}: row {r} must have {dim} entries")
        rows.append([_complex(x, f"{where}[{r}]") for x in row])
    return np.array(rows, dtype=complex)


def _component(raw: Any, k: int) -> ComponentSpec:
    where = f"components[{k}]"
    if not isinstance(raw, dict):
        raise ModelError(f"{where}: expected an object")
    dim = raw.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelError(f"{where}.dim must be a positive integer")
    gens_raw = raw.get("generators", [])
    if not isinstance(gens_raw, list):
        raise ModelError(f"{where}.generators must be a list")
    gens = [_matrix(g, dim, f"{where}.generators[{j}]") for j, g in enumerate(gens_raw)]
    state = raw.get("state")
    if not isinstance(state, dict) or len(state) != 1:
        raise ModelError(f"{where}.state must be {{schmidt: [...]}} or {{vector: [...]}}")
    spec = ComponentSpec(dim, gens)
    if "schmidt" in state:
        w = state["schmidt"]
        if (
            not isinstance(w, list)
            or len(w) != dim
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x >= 0 for x in w)
            or sum(w) <= 0
        ):
            raise ModelError(f"{where}.state.schmidt must be {dim} nonnegative weights, not all zero")
        spec.schmidt = [float(x) for x in w]
    elif "vector" in state:
        v = state["vector"]
        if not isinstance(v, list) or len(v) != dim * dim:
            raise ModelError(f"{where}.state.vector must have length {dim * dim}")
        spec.vector = np.array([_complex(x, f"{where}.state.vector") for x in v], dtype=complex)
    else:
        raise ModelError(f"{where}.state must be {{schmidt: [...]}} or {{vector: [...]}}")
    try:
        spec.model()
    except ValueError as exc:
        raise ModelError(f"{where}: {exc}") from exc
    return spec


def _options(raw: Any) -> Options:
    if raw is None:
        return Options()
    if not isinstance(raw, dict):
        raise ModelError("options must be an object")
    opts = Options()
    for key, value in raw.items():
        if key not in Options.__dataclass_fields__:
            raise ModelError(f"unknown option {key!r}")
        default = getattr(opts, key)
        if isinstance(default, int):
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ModelError(f"option {key} must be a nonnegative integer")
        elif not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
            raise ModelError(f"option {key} must be a positive number")
        setattr(opts, key, type(default)(value))
    return opts


def parse_model(data: Any) -> ModelFile:
    if not isinstance(data, dict):
        raise ModelError("model file must be a JSON object")
    comps = data.get("components")
    if not isinstance(comps, list) or not comps:
        raise ModelError("components must be a nonempty list")
    unknown = set(data) - {"components", "options"}
    if unknown:
        raise ModelError(f"unknown top-level fields {sorted(unknown)}")
    return ModelFile([_component(c, k) for k, c in enumerate(comps)], _options(data.get("options")))


def load_model(path: str | Path) -> ModelFile:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read {path}: {exc}") from exc
    return parse_model(data)


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def dump_model(model: ModelFile) -> dict[str, Any]:
    comps = []
    for c in model.components:
        state: dict[str, Any]
        if c.schmidt is not None:
            state = {"schmidt": list(c.schmidt)}
        else:
            state = {"vector": [_pair(z) for z in c.vector]}
        comps.append(
            {
                "dim": c.dim,
                "generators": [[[_pair(z) for z in row] for row in g] for g in c.generators],
                "state": state,
            }
        )
    return {"components": comps, "options": asdict(model.options)}


def parse_word(spec: str, models: Optional[Sequence[MatrixModel]] = None) -> Word:
    """Parse ``"0.1 ~1.0"``: dotted ``component.generator`` letters, ``~`` for the reflection."""
    letters = []
    for tok in spec.split():
        reflected = tok.startswith("~")
        body = tok[1:] if reflected else tok
        parts = body.split(".")
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ModelError(f"bad letter {tok!r}; expected i.g or ~i.g")
        i, g = int(parts[0]), int(parts[1])
        if models is not None:
            if i >= len(models):
                raise ModelError(f"unknown component {i}")
            if g >= models[i].n_generators:
                raise ModelError(f"component {i} has no generator {g}")
        letters.append(Letter(GeneratorRef(i, g), reflected))
    return normalize(letters)
