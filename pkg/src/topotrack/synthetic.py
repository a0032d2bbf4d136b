"""Deterministic synthetic scalar-field fixtures.

These stand in for simulation data: well-separated Gaussian mixtures whose
merge trees have known node counts, and short time series with scripted
appearance, disappearance, merge, and split events.
"""

from __future__ import annotations

import math

from .field import GaussianSpec, ScalarField, gaussian_mixture

__all__ = [
    "five_peak_field",
    "four_peak_field",
    "peak_pair",
    "ring_field",
    "ring_sequence",
    "disappearance_sequence",
    "appearance_sequence",
]

_PEAKS = (
    ((0.22, 0.24), 1.00),
    ((0.78, 0.22), 0.92),
    ((0.24, 0.78), 1.08),
    ((0.76, 0.76), 0.96),
    ((0.50, 0.50), 1.04),
)
_SIGMA = 0.075
# weak dip pinning the global minimum to one vertex in every variant, so the
# split-tree root is stable across fields of a pair
_DIP = GaussianSpec((0.04, 0.5), -0.08, (0.07, 0.07))


def _mixture(specs, dims, time_index=0):
    d = len(dims)
    spacing = tuple(1.0 / (n - 1) for n in dims)
    return gaussian_mixture(
        specs, dims, origin=(0.0,) * d, spacing=spacing, time_index=time_index
    )


def five_peak_field(dims=(64, 64)) -> ScalarField:
    """Five separated positive peaks: split tree has 10 nodes."""
    specs = [GaussianSpec(c, a, (_SIGMA, _SIGMA)) for c, a in _PEAKS]
    return _mixture(specs + [_DIP], dims)


def four_peak_field(dims=(64, 64), dropped: int = 3) -> ScalarField:
    """The five-peak field with one peak removed: split tree has 8 nodes."""
    specs = [
        GaussianSpec(c, a, (_SIGMA, _SIGMA))
        for k, (c, a) in enumerate(_PEAKS)
        if k != dropped
    ]
    return _mixture(specs + [_DIP], dims)


def peak_pair(dims=(64, 64), dropped: int = 3) -> tuple[ScalarField, ScalarField]:
    """(ten-node, eight-node) split-tree fixture pair."""
    a = five_peak_field(dims)
    b = four_peak_field(dims, dropped)
    return a, b.with_values(b.values, time_index=1)


def ring_field(phase_steps: int, dims=(64, 64), time_index: int = 0) -> ScalarField:
    """One negative center blob plus eight positive blobs on a circle.

    Four blobs sit at multiples of 90 degrees and stay put; four start at
    the 45-degree offsets and advance 45 degrees per phase step, landing
    exactly on the stationary blobs at odd steps (features merge there).
    """
    cx = cy = 0.5
    r = 0.30
    sigma = (0.06, 0.06)
    specs = [GaussianSpec((cx, cy), -1.0, (0.12, 0.12))]
    for k in range(4):
        ang = math.radians(90.0 * k)
        specs.append(
            GaussianSpec((cx + r * math.cos(ang), cy + r * math.sin(ang)), 1.0, sigma)
        )
    for k in range(4):
        ang = math.radians(45.0 + 90.0 * k + 45.0 * phase_steps)
        specs.append(
            GaussianSpec((cx + r * math.cos(ang), cy + r * math.sin(ang)), 1.0, sigma)
        )
    return _mixture(specs, dims, time_index=time_index)


def ring_sequence(n_steps: int = 4, dims=(64, 64)) -> list[ScalarField]:
    """Rotating-ring time series; merges at odd steps, splits right after."""
    return [ring_field(t, dims, time_index=t) for t in range(n_steps)]


_TRIO = (
    ((0.30, 0.30), 1.00),
    ((0.70, 0.30), 0.94),
    ((0.50, 0.74), 0.88),
)


def _trio_field(present, dims, time_index):
    specs = [
        GaussianSpec(c, a, (0.09, 0.09))
        for k, (c, a) in enumerate(_TRIO)
        if k in present
    ]
    return _mixture(specs + [_DIP], dims, time_index=time_index)


def disappearance_sequence(dims=(64, 64)) -> list[ScalarField]:
    """Three stationary peaks for two steps; the third peak vanishes at t=2."""
    return [
        _trio_field({0, 1, 2}, dims, 0),
        _trio_field({0, 1, 2}, dims, 1),
        _trio_field({0, 1}, dims, 2),
    ]


def appearance_sequence(dims=(64, 64)) -> list[ScalarField]:
    """Two stationary peaks at t=0; a third appears from t=1 on."""
    return [
        _trio_field({0, 1}, dims, 0),
        _trio_field({0, 1, 2}, dims, 1),
        _trio_field({0, 1, 2}, dims, 2),
    ]
