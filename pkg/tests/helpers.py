"""Shared test utilities."""

import numpy as np

from muskat import Grid, SpectralField, derivative


def random_interface(grid: Grid, rng, max_mode: int = 8,
                     slope: float = 1.0) -> SpectralField:
    """Random band-limited interface rescaled to a target max slope."""
    modes = [(m, rng.normal(), rng.normal()) for m in range(1, max_mode + 1)]
    f = SpectralField.from_modes(grid, modes)
    mx = float(np.max(np.abs(derivative(f).samples)))
    return (slope / mx) * f


def max_diff(a: SpectralField, b: SpectralField) -> float:
    return float(np.max(np.abs(a.samples - b.samples)))
