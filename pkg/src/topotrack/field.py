"""Scalar fields on regular grids: I/O, synthetic mixtures, noise, geometry.

A field stores its samples flat in row-major order; vertex ``v`` of a grid
with extents ``dims`` has multi-index ``np.unravel_index(v, dims)`` and
coordinates ``origin + spacing * index``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

__all__ = [
    "ScalarField",
    "GaussianSpec",
    "load_field",
    "save_field",
    "gaussian_mixture",
    "add_noise",
    "domain_diagonal",
]


class FieldError(ValueError):
    """Raised for malformed field files or invalid field data."""


@dataclass(frozen=True)
class ScalarField:
    dims: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    values: np.ndarray  # flat, row-major, float64
    time_index: int = 0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        origin = tuple(float(x) for x in self.origin)
        spacing = tuple(float(s) for s in self.spacing)
        values = np.ascontiguousarray(self.values, dtype=np.float64).ravel()
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", values)
        if len(dims) not in (2, 3):
            raise FieldError(f"expected 2 or 3 axes, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise FieldError(f"every dim must be >= 2, got {dims}")
        if not (len(origin) == len(spacing) == len(dims)):
            raise FieldError("origin/spacing/dims rank mismatch")
        if any(s <= 0 for s in spacing):
            raise FieldError(f"spacing must be strictly positive, got {spacing}")
        n = int(np.prod(dims))
        if values.size != n:
            raise FieldError(f"length mismatch: {values.size} values for dims {dims} (need {n})")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise FieldError(f"non-finite value at index {int(bad[0])}")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def value_range(self) -> float:
        return float(self.values.max() - self.values.min())

    def grid(self) -> np.ndarray:
        """Samples reshaped to the grid extents (a view when possible)."""
        return self.values.reshape(self.dims)

    def vertex_coords(self, vertex_id: int) -> np.ndarray:
        idx = np.unravel_index(int(vertex_id), self.dims)
        return np.array(
            [o + s * i for o, s, i in zip(self.origin, self.spacing, idx)], dtype=np.float64
        )

    def coordinates(self) -> np.ndarray:
        """(n_vertices, ndim) coordinate matrix in vertex-id order."""
        axes = [o + s * np.arange(d) for o, s, d in zip(self.origin, self.spacing, self.dims)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def with_values(self, values: np.ndarray, time_index: int | None = None) -> "ScalarField":
        return ScalarField(
            dims=self.dims,
            origin=self.origin,
            spacing=self.spacing,
            values=values,
            time_index=self.time_index if time_index is None else time_index,
        )


@dataclass(frozen=True)
class GaussianSpec:
    """One (possibly negative) Gaussian bump; sigma is per-axis."""

    center: tuple[float, ...]
    amplitude: float
    sigma: tuple[float, ...] = dc_field(default=(1.0,))

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) == 1 and len(center) > 1:
            sigma = sigma * len(center)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if len(sigma) != len(center):
            raise FieldError("sigma/center rank mismatch")
        if any(s <= 0 for s in sigma):
            raise FieldError(f"sigma must be positive, got {sigma}")


def gaussian_mixture(
    specs: list[GaussianSpec],
    dims: tuple[int, ...],
    origin: tuple[float, ...] | None = None,
    spacing: tuple[float, ...] | None = None,
    time_index: int = 0,
) -> ScalarField:
    """Sample a sum of Gaussians on the grid. Deterministic, linear in amplitudes."""
    if not specs:
        raise FieldError("gaussian_mixture requires at least one spec")
    d = len(dims)
    origin = tuple(origin) if origin is not None else (0.0,) * d
    spacing = tuple(spacing) if spacing is not None else (1.0,) * d
    axes = [origin[ax] + spacing[ax] * np.arange(dims[ax]) for ax in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    total = np.zeros(dims, dtype=np.float64)
    for spec in specs:
        if len(spec.center) != d:
            raise FieldError(f"spec center rank {len(spec.center)} != grid rank {d}")
        expo = np.zeros(dims, dtype=np.float64)
        for ax in range(d):
            expo += (mesh[ax] - spec.center[ax]) ** 2 / (2.0 * spec.sigma[ax] ** 2)
        total += spec.amplitude * np.exp(-expo)
    return ScalarField(dims, origin, spacing, total.ravel(), time_index)


def add_noise(field: ScalarField, iota: float, seed: int) -> ScalarField:
    """Perturb each sample by an independent Uniform(-iota*R, +iota*R) draw.

    R is the value range of the *input* field; iota=0 returns the field
    unchanged, and a fixed seed makes the result reproducible.
    """
    if not 0.0 <= iota <= 1.0:
        raise FieldError(f"iota must be in [0, 1], got {iota}")
    if iota == 0.0:
        return field
    radius = iota * field.value_range
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-radius, radius, size=field.size)
    return field.with_values(field.values + noise)


def domain_diagonal(field: ScalarField) -> float:
    """Euclidean length of the grid bounding-box diagonal."""
    return math.sqrt(
        sum(((d - 1) * s) ** 2 for d, s in zip(field.dims, field.spacing))
    )


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def save_field(field: ScalarField, path: str | Path) -> Path:
    """Write float32 little-endian raw samples plus a JSON sidecar header."""
    path = Path(path)
    path.write_bytes(field.values.astype("<f4").tobytes())
    header = {
        "dims": list(field.dims),
        "origin": list(field.origin),
        "spacing": list(field.spacing),
        "time_index": field.time_index,
        "dtype": "float32",
        "endianness": "little",
    }
    _sidecar_path(path).write_text(json.dumps(header, indent=2))
    return path


def load_field(path: str | Path, format: str = "raw") -> ScalarField:
    """Load a field from disk.

    ``raw``: float32 binary next to a ``<name>.json`` sidecar declaring
    dims/origin/spacing/endianness. ``csv2d``: comma-separated rows of a 2D
    grid (row index is axis 0).
    """
    path = Path(path)
    if not path.exists():
        raise FieldError(f"no such file: {path}")
    if format == "csv2d":
        rows = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
        return ScalarField(
            dims=rows.shape, origin=(0.0, 0.0), spacing=(1.0, 1.0), values=rows.ravel()
        )
    if format != "raw":
        raise FieldError(f"unknown format {format!r} (expected 'raw' or 'csv2d')")

    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise FieldError(f"missing sidecar header {sidecar}")
    try:
        header = json.loads(sidecar.read_text())
        dims = tuple(int(d) for d in header["dims"])
        origin = tuple(float(x) for x in header.get("origin", (0.0,) * len(dims)))
        spacing = tuple(float(s) for s in header.get("spacing", (1.0,) * len(dims)))
        time_index = int(header.get("time_index", 0))
        endianness = header.get("endianness", "little")
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FieldError(f"malformed sidecar header {sidecar}: {exc}") from exc
    if endianness not in ("little", "big"):
        raise FieldError(f"malformed sidecar header: endianness {endianness!r}")

    dtype = "<f4" if endianness == "little" else ">f4"
    raw = np.frombuffer(path.read_bytes(), dtype=dtype)
    expected = int(np.prod(dims))
    if raw.size != expected:
        raise FieldError(f"length mismatch: {raw.size} floats for dims {dims} (need {expected})")
    return ScalarField(dims, origin, spacing, raw.astype(np.float64), time_index)
