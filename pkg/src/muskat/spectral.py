"""Periodic grid, Fourier representation and multiplier calculus.

Conventions used throughout the package:

    domain          x in [-pi, pi), identified with the unit circle
    nodes           x_j = -pi + 2*pi*j/n,  j = 0..n-1,  n even
    coefficients    c_m = (1/2pi) int f(x) exp(-i m x) dx
    modes           m = -n/2+1 .. n/2 (single real Nyquist slot at +n/2)
    Sobolev norm    ||f||_{H^s} = (sum_m (1+m^2)^s |c_m|^2)^{1/2}

With this normalization c_m is obtained from numpy's FFT as
(-1)^m * fft(samples)[m] / n; the alternating sign comes from the grid
starting at -pi rather than 0.  All multiplier operators act diagonally
on c_m, so the alternating phase cancels and the implementation works on
raw rfft arrays.  The Nyquist coefficient is forced to zero whenever a
multiplier has an odd symbol (derivative of odd order, Hilbert
transform) so that results stay real; off-grid evaluation interprets
the Nyquist slot as a pure cosine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "NonFiniteSamplesError",
    "derivative",
    "half_laplacian",
    "hilbert_transform",
    "sobolev_norm",
    "integral_mean",
    "dealiased_product",
    "upsample",
    "resample_half_shift",
]


class NonFiniteSamplesError(ValueError):
    """A field operation produced NaN or infinite samples.

    Subclasses ValueError so existing error handling keeps working; the
    time stepper catches it specifically to terminate a run gracefully
    when the solution overflows.
    """


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-pi, pi)."""

    n_points: int

    def __post_init__(self):
        if self.n_points < 8 or self.n_points % 2:
            raise ValueError(
                f"n_points must be even and >= 8, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        n = self.n_points
        return -np.pi + 2.0 * np.pi * np.arange(n) / n


class SpectralField:
    """Real 2*pi-periodic function sampled on a Grid.

    Samples are the primary representation; the rfft spectrum is computed
    lazily and cached.  Fields are treated as immutable: every operation
    returns a new instance.
    """

    __slots__ = ("grid", "samples", "_rspec")

    def __init__(self, grid: Grid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (grid.n_points,):
            raise ValueError(
                f"samples shape {samples.shape} does not match grid "
                f"({grid.n_points},)")
        if not np.all(np.isfinite(samples)):
            raise NonFiniteSamplesError("samples contain non-finite values")
        self.grid = grid
        self.samples = samples
        self._rspec = None

    # -- construction -------------------------------------------------

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "SpectralField":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def from_modes(cls, grid: Grid, modes) -> "SpectralField":
        """Build sum of a_m cos(m x) + b_m sin(m x) from (m, a_m, b_m) triples."""
        x = grid.nodes
        out = np.zeros_like(x)
        for m, ca, sa in modes:
            m = int(m)
            if abs(m) > grid.n_points // 2:
                raise ValueError(f"mode {m} not representable on grid")
            out += ca * np.cos(m * x) + sa * np.sin(m * x)
        return cls(grid, out)

    @classmethod
    def zero(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_points))

    # -- spectrum ------------------------------------------------------

    @property
    def rspec(self) -> np.ndarray:
        """Raw (unnormalized, unphased) rfft of the samples. Read-only."""
        if self._rspec is None:
            self._rspec = np.fft.rfft(self.samples)
        return self._rspec

    def coeff(self, m: int) -> complex:
        """Fourier coefficient c_m = (1/2pi) int f exp(-imx) dx."""
        n = self.grid.n_points
        if abs(m) > n // 2:
            return 0.0 + 0.0j
        c = (-1.0) ** (m % 2) * self.rspec[abs(m)] / n
        return np.conj(c) if m < 0 else c

    def coeff_array(self):
        """(modes, coefficients) for m = 0..n/2 in the c_m normalization."""
        n = self.grid.n_points
        m = np.arange(n // 2 + 1)
        phase = np.where(m % 2 == 0, 1.0, -1.0)
        return m, phase * self.rspec / n

    def eval_at(self, points) -> np.ndarray:
        """Trigonometric interpolation at arbitrary points.

        The Nyquist slot is interpreted as a cosine so the interpolant
        is real.
        """
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        n = self.grid.n_points
        m, c = self.coeff_array()
        inner = c[1:n // 2]
        phases = np.exp(1j * np.outer(pts, m[1:n // 2]))
        out = np.real(c[0]) + 2.0 * np.real(phases @ inner)
        out += np.real(c[n // 2]) * np.cos((n // 2) * pts)
        return out if np.ndim(points) else float(out[0])

    # -- arithmetic (sample-wise; products of band-limited data should
    #    go through dealiased_product) --------------------------------

    def _binary(self, other, op):
        if isinstance(other, SpectralField):
            if other.grid.n_points != self.grid.n_points:
                raise ValueError("grid mismatch")
            return SpectralField(self.grid, op(self.samples, other.samples))
        return SpectralField(self.grid, op(self.samples, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return SpectralField(self.grid, other - self.samples)

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            raise TypeError(
                "use dealiased_product for field*field products")
        return SpectralField(self.grid, self.samples * other)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.samples)


# -- multiplier operators ---------------------------------------------


def _apply_symbol(field: SpectralField, symbol: np.ndarray,
                  zero_nyquist: bool) -> SpectralField:
    """Apply a diagonal Fourier multiplier given on modes m = 0..n/2."""
    n = field.grid.n_points
    spec = field.rspec * symbol
    if zero_nyquist:
        spec = spec.copy()
        spec[n // 2] = 0.0
    return SpectralField(field.grid, np.fft.irfft(spec, n))


def derivative(field: SpectralField, order: int = 1) -> SpectralField:
    """Spectral derivative d^order/dx^order.

    Odd orders zero the Nyquist mode (odd symbol).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if order == 0:
        return field
    n = field.grid.n_points
    m = np.arange(n // 2 + 1)
    return _apply_symbol(field, (1j * m) ** order, zero_nyquist=order % 2 == 1)


def half_laplacian(field: SpectralField) -> SpectralField:
    """Square root of -d^2/dx^2: multiplier |m|."""
    n = field.grid.n_points
    m = np.arange(n // 2 + 1)
    return _apply_symbol(field, m.astype(float), zero_nyquist=False)


def hilbert_transform(field: SpectralField) -> SpectralField:
    """Periodic Hilbert transform, symbol -i*sign(m); mode 0 and Nyquist -> 0."""
    n = field.grid.n_points
    sym = np.full(n // 2 + 1, -1j)
    sym[0] = 0.0
    return _apply_symbol(field, sym, zero_nyquist=True)


def sobolev_norm(field: SpectralField, s: float) -> float:
    """H^s norm (sum over all modes of (1+m^2)^s |c_m|^2)^(1/2)."""
    n = field.grid.n_points
    m, c = field.coeff_array()
    e = (1.0 + m.astype(float) ** 2) ** s * np.abs(c) ** 2
    # interior modes appear twice (conjugate pair), 0 and Nyquist once
    total = e[0] + 2.0 * np.sum(e[1:n // 2]) + e[n // 2]
    return float(np.sqrt(total))


def integral_mean(field: SpectralField) -> float:
    """(1/2pi) int f dx; exact for the trigonometric interpolant."""
    return float(np.mean(field.samples))


# -- resampling and products ------------------------------------------


def _padded_rspec(field: SpectralField, m: int) -> np.ndarray:
    """Raw rfft of the field resampled on an m-point grid (m >= n, m even).

    The source Nyquist coefficient is split across +-n/2 when it becomes
    an interior mode of the finer grid.
    """
    n = field.grid.n_points
    if m < n or m % 2:
        raise ValueError(f"target resolution {m} must be even and >= {n}")
    src = field.rspec
    out = np.zeros(m // 2 + 1, dtype=complex)
    out[: n // 2 + 1] = src * (m / n)
    if m > n:
        out[n // 2] *= 0.5
    return out


def upsample(field: SpectralField, m: int) -> SpectralField:
    """Exact band-limited resample onto an m-point grid (m >= n)."""
    if m == field.grid.n_points:
        return field
    return SpectralField(Grid(m), np.fft.irfft(_padded_rspec(field, m), m))


def resample_half_shift(field: SpectralField, m: int) -> np.ndarray:
    """Samples of the field at y_i = -pi + (i - 1/2) * 2pi/m, i = 0..m-1.

    Implemented as a modal phase shift by half the target spacing; one
    transform regardless of m.  When m equals the native resolution the
    Nyquist mode is dropped (its half-shifted samples are not
    representable), consistent with the odd-symbol convention.
    """
    spec = _padded_rspec(field, m)
    q = np.arange(m // 2 + 1)
    spec = spec * np.exp(-1j * q * (np.pi / m))
    spec[m // 2] = 0.0
    return np.fft.irfft(spec, m)


def dealiased_product(a: SpectralField, b: SpectralField,
                      padding: float = 1.5) -> SpectralField:
    """Pointwise product formed on a zero-padded grid, then truncated.

    With the default 3/2 padding the retained modes of the product are
    alias-free for inputs that fill the native band.
    """
    if a.grid.n_points != b.grid.n_points:
        raise ValueError("grid mismatch")
    n = a.grid.n_points
    if padding < 1.0:
        raise ValueError("padding factor must be >= 1")
    npad = int(np.ceil(n * padding / 2.0)) * 2
    pa = np.fft.irfft(_padded_rspec(a, npad), npad)
    pb = np.fft.irfft(_padded_rspec(b, npad), npad)
    prod = np.fft.rfft(pa * pb)
    out = prod[: n // 2 + 1] * (n / npad)
    if npad > n:
        out[n // 2] = 2.0 * np.real(out[n // 2])
    return SpectralField(a.grid, np.fft.irfft(out, n))
