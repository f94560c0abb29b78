"""Sampled fields on Cartesian grids, with the on-disk formats used by the CLI.

ScalarGrid        real values, shape (nx, ny, nz)
ComplexVectorGrid three complex components on one grid

Serialization is deliberately dumb and diff-able: CSV rows for small
exports, or a JSON header next to a flat little-endian float64 blob for
full grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_FLOAT_FMT = "%.17g"


def _axes(origin, spacing, shape):
    return [origin[i] + spacing[i] * np.arange(shape[i]) for i in range(3)]


@dataclass
class ScalarGrid:
    values: np.ndarray
    origin: np.ndarray
    spacing: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.origin = np.asarray(self.origin, dtype=float)
        self.spacing = np.asarray(self.spacing, dtype=float)
        if self.values.ndim != 3:
            raise ValueError("ScalarGrid values must be a 3D array")
        if self.origin.shape != (3,) or self.spacing.shape != (3,):
            raise ValueError("origin and spacing must be 3-vectors")
        if np.any(self.spacing <= 0):
            raise ValueError("spacing must be positive componentwise")

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return _axes(self.origin, self.spacing, self.shape)

    def to_csv(self, path):
        xs, ys, zs = self.axes()
        x, y, z = np.meshgrid(xs, ys, zs, indexing="ij")
        rows = np.column_stack(
            [x.ravel(), y.ravel(), z.ravel(), self.values.ravel()]
        )
        np.savetxt(path, rows, fmt=_FLOAT_FMT, delimiter=",", header="x,y,z,value", comments="")

    def save(self, path):
        """JSON header at ``path`` plus raw float64 blob at ``path + '.bin'``."""
        path = Path(path)
        blob = path.with_suffix(path.suffix + ".bin")
        header = {
            "kind": "scalar-grid",
            "shape": list(self.shape),
            "origin_m": list(self.origin),
            "spacing_m": list(self.spacing),
            "dtype": "<f8",
            "data": blob.name,
        }
        path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
        self.values.astype("<f8").tofile(blob)

    @classmethod
    def load(cls, path):
        path = Path(path)
        header = json.loads(path.read_text())
        vals = np.fromfile(path.parent / header["data"], dtype="<f8").reshape(
            header["shape"]
        )
        return cls(vals, header["origin_m"], header["spacing_m"])


@dataclass
class ComplexVectorGrid:
    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    origin: np.ndarray
    spacing: np.ndarray

    def __post_init__(self):
        self.ex = np.asarray(self.ex, dtype=complex)
        self.ey = np.asarray(self.ey, dtype=complex)
        self.ez = np.asarray(self.ez, dtype=complex)
        self.origin = np.asarray(self.origin, dtype=float)
        self.spacing = np.asarray(self.spacing, dtype=float)
        if not (self.ex.shape == self.ey.shape == self.ez.shape):
            raise ValueError("component arrays must be congruent")
        if self.ex.ndim != 3:
            raise ValueError("components must be 3D arrays")
        if np.any(self.spacing <= 0):
            raise ValueError("spacing must be positive componentwise")

    @property
    def shape(self):
        return self.ex.shape

    def axes(self):
        return _axes(self.origin, self.spacing, self.shape)

    def intensity(self) -> np.ndarray:
        return (
            np.abs(self.ex) ** 2 + np.abs(self.ey) ** 2 + np.abs(self.ez) ** 2
        )

    def save(self, path):
        """JSON header plus six float64 planes (Re/Im per component), LE."""
        path = Path(path)
        blob = path.with_suffix(path.suffix + ".bin")
        header = {
            "kind": "complex-vector-grid",
            "shape": list(self.shape),
            "origin_m": list(self.origin),
            "spacing_m": list(self.spacing),
            "dtype": "<f8",
            "layout": ["ex.re", "ex.im", "ey.re", "ey.im", "ez.re", "ez.im"],
            "data": blob.name,
        }
        path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
        planes = np.stack(
            [self.ex.real, self.ex.imag, self.ey.real, self.ey.imag,
             self.ez.real, self.ez.imag]
        )
        planes.astype("<f8").tofile(blob)

    @classmethod
    def load(cls, path):
        path = Path(path)
        header = json.loads(path.read_text())
        shape = tuple(header["shape"])
        planes = np.fromfile(path.parent / header["data"], dtype="<f8").reshape(
            (6,) + shape
        )
        return cls(
            planes[0] + 1j * planes[1],
            planes[2] + 1j * planes[3],
            planes[4] + 1j * planes[5],
            header["origin_m"],
            header["spacing_m"],
        )


def write_line_csv(path, columns: dict):
    """Write named 1D columns of equal length as a CSV file."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    np.savetxt(
        path, data, fmt=_FLOAT_FMT, delimiter=",", header=",".join(names), comments=""
    )
