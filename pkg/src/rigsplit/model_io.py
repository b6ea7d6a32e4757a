"""Blendshape model and animation containers, JSON I/O and validation.

Coordinates are interleaved per vertex: vertex ``l`` (0-based) occupies
indices ``3l, 3l+1, 3l+2`` for x, y, z in both the neutral mesh and every
blendshape column.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, ParseError, ValidationError


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class BlendshapeModel:
    """Linear face rig ``f(c) = neutral + blendshapes @ c``.

    ``blendshapes`` has shape ``(3 * num_vertices, num_controllers)``; each
    column holds the delta offsets of one controller. Arrays are copied and
    made read-only on construction.
    """

    neutral: np.ndarray
    blendshapes: np.ndarray
    controller_names: tuple[str, ...]

    def __post_init__(self):
        try:
            neutral = _frozen(self.neutral)
            B = _frozen(self.blendshapes)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"non-numeric model data: {exc}") from exc
        names = tuple(str(s) for s in self.controller_names)
        object.__setattr__(self, "neutral", neutral)
        object.__setattr__(self, "blendshapes", B)
        object.__setattr__(self, "controller_names", names)

        if neutral.ndim != 1 or neutral.size == 0 or neutral.size % 3:
            raise ValidationError(
                f"neutral must be a nonempty flat vector of length 3n, got shape {neutral.shape}")
        if B.ndim != 2:
            raise ValidationError(f"blendshapes must be 2-D, got shape {B.shape}")
        if B.shape[0] != neutral.size:
            raise ValidationError(
                f"blendshapes has {B.shape[0]} rows, expected 3n = {neutral.size}")
        if B.shape[1] == 0:
            raise ValidationError("model needs at least one controller")
        if len(names) != B.shape[1]:
            raise ValidationError(
                f"{len(names)} controller names for {B.shape[1]} blendshape columns")
        if any(not s for s in names):
            raise ValidationError("controller names must be nonempty")
        if len(set(names)) != len(names):
            raise ValidationError("controller names must be unique")
        if not np.all(np.isfinite(neutral)):
            raise ValidationError("neutral contains non-finite entries")
        if not np.all(np.isfinite(B)):
            raise ValidationError("blendshapes contain non-finite entries")

    @property
    def num_vertices(self) -> int:
        return self.neutral.size // 3

    @property
    def num_controllers(self) -> int:
        return self.blendshapes.shape[1]

    def __eq__(self, other):
        if not isinstance(other, BlendshapeModel):
            return NotImplemented
        return (self.controller_names == other.controller_names
                and np.array_equal(self.neutral, other.neutral)
                and np.array_equal(self.blendshapes, other.blendshapes))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Frame:
    weights: np.ndarray
    mesh: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.mesh is not None:
            object.__setattr__(self, "mesh", _frozen(self.mesh))


@dataclass(frozen=True, eq=False)
class AnimationSet:
    """Frames of ground-truth controller weights with optional target meshes."""

    frames: tuple[Frame, ...]
    model_ref: str = ""
    _dims: tuple[int, Optional[int]] = field(init=False, repr=False, default=(0, None))

    def __post_init__(self):
        frames = tuple(f if isinstance(f, Frame) else Frame(*f) for f in self.frames)
        object.__setattr__(self, "frames", frames)
        if not frames:
            object.__setattr__(self, "_dims", (0, None))
            return
        m = frames[0].weights.size
        mesh_len = None
        out_of_range = False
        for t, f in enumerate(frames):
            if f.weights.ndim != 1 or f.weights.size != m:
                raise ValidationError(f"frame {t}: weights length {f.weights.size} != {m}")
            if not np.all(np.isfinite(f.weights)):
                raise ValidationError(f"frame {t}: non-finite weights")
            if np.any(f.weights < 0) or np.any(f.weights > 1):
                out_of_range = True
            if f.mesh is not None:
                if mesh_len is None:
                    mesh_len = f.mesh.size
                if f.mesh.ndim != 1 or f.mesh.size != mesh_len:
                    raise ValidationError(f"frame {t}: mesh length {f.mesh.size} != {mesh_len}")
                if not np.all(np.isfinite(f.mesh)):
                    raise ValidationError(f"frame {t}: non-finite mesh")
        if out_of_range:
            warnings.warn("animation contains weights outside [0, 1]", stacklevel=3)
        object.__setattr__(self, "_dims", (m, mesh_len))

    def __len__(self):
        return len(self.frames)

    def check_against(self, model: BlendshapeModel) -> None:
        """Raise ValidationError unless every frame fits ``model``'s dimensions."""
        m, mesh_len = self._dims
        if self.frames and m != model.num_controllers:
            raise ValidationError(
                f"animation has {m} weights per frame, model has {model.num_controllers} controllers")
        if mesh_len is not None and mesh_len != model.neutral.size:
            raise ValidationError(
                f"animation meshes have length {mesh_len}, model expects {model.neutral.size}")

    @property
    def weights(self) -> np.ndarray:
        """All weight vectors stacked as a ``(T, m)`` array."""
        return np.stack([f.weights for f in self.frames])

    @property
    def meshes(self) -> np.ndarray:
        if any(f.mesh is None for f in self.frames):
            raise ValidationError("some frames have no mesh")
        return np.stack([f.mesh for f in self.frames])


def synthesize_mesh(model: BlendshapeModel, weights) -> np.ndarray:
    """Evaluate the linear rig: ``neutral + blendshapes @ weights``."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (model.num_controllers,):
        raise DimensionError(
            f"weights must have shape ({model.num_controllers},), got {w.shape}")
    return model.neutral + model.blendshapes @ w


# --- JSON formats -----------------------------------------------------------

def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    return doc


def model_from_dict(doc: dict) -> BlendshapeModel:
    try:
        n = doc["num_vertices"]
        m = doc["num_controllers"]
        neutral = doc["neutral"]
        names = doc["controller_names"]
        columns = doc["blendshapes"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"model document missing field {exc}") from exc
    if not (isinstance(n, int) and n > 0 and isinstance(m, int) and m > 0):
        raise ValidationError("num_vertices and num_controllers must be positive integers")
    if not isinstance(columns, list) or len(columns) != m:
        raise ValidationError(f"expected {m} blendshape arrays")
    for i, col in enumerate(columns):
        if not isinstance(col, list) or len(col) != 3 * n:
            got = len(col) if isinstance(col, list) else type(col).__name__
            raise ValidationError(f"blendshape {i} has {got} entries, expected 3n = {3 * n}")
    if not isinstance(neutral, list) or len(neutral) != 3 * n:
        raise ValidationError(f"neutral must have 3n = {3 * n} entries")
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise ValidationError("controller_names must be a list of strings")
    try:
        B = np.array(columns, dtype=np.float64).T
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"non-numeric blendshape data: {exc}") from exc
    return BlendshapeModel(neutral=neutral, blendshapes=B, controller_names=tuple(names))


def model_to_dict(model: BlendshapeModel) -> dict:
    return {
        "num_vertices": model.num_vertices,
        "num_controllers": model.num_controllers,
        "neutral": model.neutral.tolist(),
        "controller_names": list(model.controller_names),
        "blendshapes": model.blendshapes.T.tolist(),
    }


def load_model(path) -> BlendshapeModel:
    return model_from_dict(_read_json(path))


def save_model(model: BlendshapeModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def animation_from_dict(doc: dict) -> AnimationSet:
    try:
        raw = doc["frames"]
        ref = doc.get("model_ref", "")
        frames = [Frame(f["weights"], f.get("mesh")) for f in raw]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed animation document: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"non-numeric animation data: {exc}") from exc
    return AnimationSet(frames=tuple(frames), model_ref=str(ref))


def animation_to_dict(anim: AnimationSet) -> dict:
    return {
        "model_ref": anim.model_ref,
        "frames": [
            {"weights": f.weights.tolist(),
             "mesh": None if f.mesh is None else f.mesh.tolist()}
            for f in anim.frames
        ],
    }


def load_animation(path, model: Optional[BlendshapeModel] = None) -> AnimationSet:
    anim = animation_from_dict(_read_json(path))
    if model is not None:
        anim.check_against(model)
    return anim


def save_animation(anim: AnimationSet, path) -> None:
    Path(path).write_text(json.dumps(animation_to_dict(anim)), encoding="utf-8")


def animation_from_arrays(weights: np.ndarray, meshes: Optional[np.ndarray] = None,
                          model_ref: str = "") -> AnimationSet:
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    if meshes is None:
        frames: Sequence[Frame] = [Frame(w) for w in weights]
    else:
        meshes = np.atleast_2d(np.asarray(meshes, dtype=np.float64))
        if len(meshes) != len(weights):
            raise DimensionError("weights and meshes must have the same number of frames")
        frames = [Frame(w, x) for w, x in zip(weights, meshes)]
    return AnimationSet(frames=tuple(frames), model_ref=model_ref)
