from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import EmbeddedMesh, NodeClass


@dataclass(eq=False)
class Field:
    """Node values on G_R; exterior nodes hold NaN."""

    mesh: EmbeddedMesh
    values: np.ndarray
    t: float = 0.0

    @classmethod
    def empty(cls, mesh, t=0.0):
        return cls(mesh, np.full(mesh.grid.shape, np.nan), t)

    @property
    def interior_values(self):
        return self.values[self.mesh.interior]

    @property
    def boundary_values(self):
        return self.values[self.mesh.boundary]

    def copy(self):
        return Field(self.mesh, self.values.copy(), self.t)

    def masked(self, fill=np.nan):
        out = self.values.copy()
        out[self.mesh.node_class == NodeClass.EXTERIOR] = fill
        return out
