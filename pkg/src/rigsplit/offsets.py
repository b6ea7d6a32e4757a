"""Per-vertex offset magnitudes of each blendshape, column-normalized."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model_io import BlendshapeModel


@dataclass(frozen=True, eq=False)
class OffsetMatrix:
    """``values[l, i]`` is the displacement length of vertex ``l`` under
    controller ``i`` divided by the largest displacement of that controller.

    ``column_max`` keeps the raw maxima (scene units). Controllers that move
    no vertex at all are listed in ``null_controllers`` and keep a zero column.
    """

    values: np.ndarray
    column_max: np.ndarray
    null_controllers: frozenset[int]

    @property
    def num_vertices(self) -> int:
        return self.values.shape[0]

    @property
    def num_controllers(self) -> int:
        return self.values.shape[1]

    @property
    def active_controllers(self) -> np.ndarray:
        return np.array([i for i in range(self.num_controllers)
                         if i not in self.null_controllers], dtype=np.intp)


def offset_magnitudes(blendshapes: np.ndarray) -> np.ndarray:
    """Raw ``(n, m)`` matrix of per-vertex Euclidean offset lengths."""
    B = np.asarray(blendshapes, dtype=np.float64)
    n = B.shape[0] // 3
    return np.linalg.norm(B.reshape(n, 3, B.shape[1]), axis=1)


def compute_offsets(model: BlendshapeModel) -> OffsetMatrix:
    D = offset_magnitudes(model.blendshapes)
    col_max = D.max(axis=0)
    null = np.flatnonzero(col_max == 0)
    if null.size:
        warnings.warn(
            f"{null.size} controller(s) produce no deformation and will not be assigned: "
            + ", ".join(model.controller_names[i] for i in null[:10]),
            stacklevel=2)
    scale = np.where(col_max > 0, col_max, 1.0)
    values = D / scale
    values.flags.writeable = False
    col_max.flags.writeable = False
    return OffsetMatrix(values=values, column_max=col_max,
                        null_controllers=frozenset(int(i) for i in null))
