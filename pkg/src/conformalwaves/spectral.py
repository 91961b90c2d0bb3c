"""Periodic Fourier fields and the basic spectral operators.

Everything downstream works with complex-valued functions on a uniform
periodic grid, carried by :class:`SpectralField`.  The Hilbert transform is
the conjugate-function multiplier ``-sign(k)``; with this convention a
function whose spectrum lives on non-positive wavenumbers is the boundary
value of a function holomorphic in the lower half plane, and the constant
(zero) mode is assigned to the holomorphic projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "hilbert",
    "project",
    "derivative",
    "antiderivative",
    "norm",
    "spectral_filter",
    "mean",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: ``n`` points on ``[0, length)``."""

    n: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 16, got {self.n}")
        if not self.length > 0:
            raise ValueError("period length must be positive")

    @cached_property
    def points(self) -> np.ndarray:
        return np.arange(self.n) * (self.length / self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # fftfreq ordering: 0, 1, ..., n/2-1, -n/2, ..., -1 (times 2*pi/L)
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.length / self.n)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def kmax(self) -> float:
        return np.pi * self.n / self.length


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class SpectralField:
    """Complex periodic grid function with lazily synchronized coefficients.

    ``values[m] = f(m*L/n)`` and ``coeffs[j]`` is the Fourier coefficient of
    ``exp(i k_j alpha)`` with ``k_j = grid.wavenumbers[j]`` (so the inverse
    transform of ``coeffs`` reproduces ``values`` to machine precision).
    Instances are immutable; all operators return new fields.
    """

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: Grid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("need values or coeffs")
        self.grid = grid
        self._values = None if values is None else _readonly(np.asarray(values, dtype=complex))
        self._coeffs = None if coeffs is None else _readonly(np.asarray(coeffs, dtype=complex))
        for a in (self._values, self._coeffs):
            if a is not None and a.shape != (grid.n,):
                raise ValueError(f"field data must have shape ({grid.n},)")

    # -- constructors -----------------------------------------------------
    @staticmethod
    def from_values(grid: Grid, values) -> "SpectralField":
        return SpectralField(grid, values=values)

    @staticmethod
    def from_coeffs(grid: Grid, coeffs) -> "SpectralField":
        return SpectralField(grid, coeffs=coeffs)

    @staticmethod
    def zero(grid: Grid) -> "SpectralField":
        return SpectralField(grid, values=np.zeros(grid.n, dtype=complex))

    @staticmethod
    def constant(grid: Grid, c: complex) -> "SpectralField":
        return SpectralField(grid, values=np.full(grid.n, c, dtype=complex))

    # -- representations --------------------------------------------------
    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = np.fft.ifft(self._coeffs) * self.grid.n
            self._set("_values", _readonly(v))
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            c = np.fft.fft(self._values) / self.grid.n
            self._set("_coeffs", _readonly(c))
        return self._coeffs

    def _set(self, name, value):
        # bypass __slots__ immutability convention for the lazy cache only
        object.__setattr__(self, name, value)

    # -- arithmetic --------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise ValueError("grid mismatch")
            return SpectralField(self.grid, values=op(self.values, other.values))
        return SpectralField(self.grid, values=op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, np.multiply)

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        return SpectralField(self.grid, values=-self.values)

    def conj(self) -> "SpectralField":
        return SpectralField(self.grid, values=np.conj(self.values))

    def real(self) -> "SpectralField":
        return SpectralField(self.grid, values=self.values.real.astype(complex))

    def imag(self) -> "SpectralField":
        return SpectralField(self.grid, values=self.values.imag.astype(complex))

    def multiplier(self, m) -> "SpectralField":
        """Apply a Fourier multiplier given as an array over wavenumbers."""
        return SpectralField(self.grid, coeffs=self.coeffs * m)

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, L={self.grid.length:g})"


def mean(f: SpectralField) -> complex:
    """Spatial average of ``f`` (its zero Fourier mode)."""
    return complex(np.mean(f.values))


def hilbert(f: SpectralField) -> SpectralField:
    """Hilbert transform for the lower half plane: multiplier ``-sign(k)``.

    Annihilates constants; squares to the identity on mean-zero fields.
    """
    return f.multiplier(-np.sign(f.grid.wavenumbers))


def project(f: SpectralField, side: str) -> SpectralField:
    """Holomorphic / antiholomorphic projection.

    ``side="holo"`` keeps wavenumbers k <= 0 (the zero mode counts as
    holomorphic), ``side="anti"`` keeps k > 0.  The two projections sum to
    the identity and compose to zero.
    """
    k = f.grid.wavenumbers
    if side == "holo":
        return f.multiplier(k <= 0)
    if side == "anti":
        return f.multiplier(k > 0)
    raise ValueError(f"side must be 'holo' or 'anti', got {side!r}")


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Spatial derivative via the multiplier ``(ik)**order``."""
    return f.multiplier((1j * f.grid.wavenumbers) ** order)


def antiderivative(f: SpectralField, mean_tol: float = 1e-9) -> SpectralField:
    """Mean-zero antiderivative; requires mean-zero input.

    The output zero mode is set to 0; ``derivative(antiderivative(f)) == f``
    for mean-zero ``f``.
    """
    c = f.coeffs
    scale = 1.0 + float(np.max(np.abs(c)))
    if abs(c[0]) > mean_tol * scale:
        raise ValueError("nonzero mean")
    k = f.grid.wavenumbers
    ik = 1j * k
    ik[0] = 1.0  # avoid 0/0; mode is zeroed below
    out = c / ik
    out[0] = 0.0
    return SpectralField(f.grid, coeffs=out)


def norm(f: SpectralField, kind: str, s: float | None = None) -> float:
    """Norms of a periodic field.

    ``l2`` and ``hs`` go through Parseval (``hs`` uses the inhomogeneous
    weight ``(1+k^2)^s``, s in [0, 4]); ``hhalf`` is the homogeneous
    half-derivative norm ``sqrt(L * sum |k| |fhat|^2)``, matching the
    double-integral difference-quotient form; ``linf`` is the max of
    ``|values|``.
    """
    L = f.grid.length
    k = f.grid.wavenumbers
    a2 = np.abs(f.coeffs) ** 2
    if kind == "l2":
        return float(np.sqrt(L * np.sum(a2)))
    if kind == "linf":
        return float(np.max(np.abs(f.values)))
    if kind == "hhalf":
        return float(np.sqrt(L * np.sum(np.abs(k) * a2)))
    if kind == "hs":
        if s is None or not (0.0 <= s <= 4.0):
            raise ValueError("hs norm needs s in [0, 4]")
        return float(np.sqrt(L * np.sum((1.0 + k**2) ** s * a2)))
    raise ValueError(f"unknown norm kind {kind!r}")


def spectral_filter(f: SpectralField, rule: str, threshold: float = 1e-13) -> SpectralField:
    """High-mode filtering: 'none', 'krasny' (hard threshold) or 'smooth36'.

    The Krasny filter zeroes coefficients below ``threshold`` in modulus;
    smooth36 multiplies by ``exp(-36 (|k|/kmax)^36)``, which leaves modes
    ``|k| <= kmax/2`` essentially untouched.
    """
    if rule == "none":
        return f
    if rule == "krasny":
        c = f.coeffs.copy()
        c[np.abs(c) < threshold] = 0.0
        return SpectralField(f.grid, coeffs=c)
    if rule == "smooth36":
        k = f.grid.wavenumbers
        m = np.exp(-36.0 * (np.abs(k) / f.grid.kmax) ** 36)
        return f.multiplier(m)
    raise ValueError(f"unknown filter rule {rule!r}")
