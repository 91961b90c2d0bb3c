"""Periodic singular kernels and the O(N^2) quadrature oracle.

The whole-line kernels 1/(a-b), 1/(a-b)^2, 1/(a-b)^3 are replaced by their
periodizations

    K1 = (pi/L) cot(pi u / L),
    K2 = (pi/L)^2 / sin^2(pi u / L),
    K3 = (pi/L)^3 cot(pi u / L) / sin^2(pi u / L),

consistent with the torus Hilbert transform (K2 = -K1', K3 = -K2'/2, and
K1*K2 == K3 pointwise).  The oracle evaluates double-difference integrands
by direct trapezoid summation over the grid, with the diagonal handled by
the analytic limit of the integrand; it exists to cross-check the
FFT-reduced fast paths and to evaluate the two integrand shapes (the
symmetrized-b weight and the cubed kernel) that have no fast path.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .spectral import Grid, SpectralField, derivative

__all__ = ["KernelSpec", "oracle_quadrature", "pv_hilbert_oracle", "hhalf_oracle"]


def _offsets(grid: Grid) -> np.ndarray:
    """Matrix of pairwise offsets alpha_i - beta_j."""
    x = grid.points
    return x[:, None] - x[None, :]


def kernel_matrix(grid: Grid, power: int) -> np.ndarray:
    """Periodized 1/u^power on the grid, with the diagonal zeroed."""
    u = _offsets(grid)
    np.fill_diagonal(u, grid.length / 2)  # placeholder, overwritten below
    r = np.pi / grid.length
    s = np.sin(r * u)
    if power == 1:
        k = r * np.cos(r * u) / s
    elif power == 2:
        k = r**2 / s**2
    elif power == 3:
        k = r**3 * np.cos(r * u) / s**3
    else:
        raise ValueError("kernel power must be 1, 2 or 3")
    np.fill_diagonal(k, 0.0)
    return k


@dataclass(frozen=True)
class KernelSpec:
    """One double-difference singular integrand.

    The raw integral computed by the oracle is

        R(a) = int W(a,b) * prod_i (f_i(a) - f_i(b)) * prod_j g_j(b)
                 * K_power(a-b) db

    and, when ``scalar`` is set,   I = int prod_m p_m(a) * R(a) da.

    ``weight``: None, ("alpha", w) for a plain w(a) factor, or ("bsym", b)
    for the symmetrized advection weight  b'(a) + b'(b) - 2 (b(a)-b(b)) K1.
    ``beta_factors`` extends the stated point factors so the defining forms
    with an h(b) factor can be evaluated verbatim.
    No prefactor (such as 1/(pi i)) is applied; callers own conventions.
    """

    power: int
    diff_factors: Sequence[SpectralField]
    beta_factors: Sequence[SpectralField] = ()
    point_factors: Sequence[SpectralField] = ()
    weight: tuple | None = None
    scalar: bool = False

    def __post_init__(self):
        if self.power not in (2, 3):
            raise ValueError("kernel power must be 2 or 3")
        if len(self.diff_factors) < self.power - 1:
            raise ValueError("insufficient diff factors")
        grids = {f.grid for f in (*self.diff_factors, *self.beta_factors, *self.point_factors)}
        if self.weight is not None:
            grids.add(self.weight[1].grid)
        if len(grids) != 1:
            raise ValueError("grid mismatch")

    @property
    def grid(self) -> Grid:
        return self.diff_factors[0].grid


def _beta_product(spec: KernelSpec) -> SpectralField:
    g = SpectralField.constant(spec.grid, 1.0)
    for h in spec.beta_factors:
        g = g * h
    return g


def _diagonal_value(spec: KernelSpec) -> np.ndarray:
    """Continuous (even-part) extension of the integrand at beta = alpha."""
    d = len(spec.diff_factors)
    vanish = d + (2 if spec.weight is not None and spec.weight[0] == "bsym" else 0)
    if vanish > spec.power:
        return np.zeros(spec.grid.n)
    g = _beta_product(spec)
    fp = [derivative(f).values for f in spec.diff_factors]
    if spec.power == 2:
        # only d == 2 reaches the kernel order
        diag = fp[0] * fp[1] * g.values
    else:
        if d == 3:
            diag = fp[0] * fp[1] * fp[2] * g.values
        else:  # d == 2: odd part cancels pairwise, keep the even limit
            fpp = [derivative(f, 2).values for f in spec.diff_factors]
            diag = -(0.5 * (fp[0] * fpp[1] + fpp[0] * fp[1]) * g.values
                     + fp[0] * fp[1] * derivative(g).values)
    if spec.weight is not None and spec.weight[0] == "alpha":
        diag = diag * spec.weight[1].values
    return diag


def oracle_quadrature(spec: KernelSpec):
    """Direct trapezoid evaluation of a :class:`KernelSpec`.

    Returns the beta-integral as a :class:`SpectralField` of alpha, or the
    full double integral as a complex scalar when ``spec.scalar`` is set.
    The reduction order is fixed (row sums), so results are reproducible.
    """
    grid = spec.grid
    k = kernel_matrix(grid, spec.power)
    integrand = k.astype(complex)
    for f in spec.diff_factors:
        v = f.values
        integrand *= v[:, None] - v[None, :]
    if spec.beta_factors:
        integrand *= _beta_product(spec).values[None, :]
    if spec.weight is not None:
        kind, w = spec.weight
        if kind == "alpha":
            integrand *= w.values[:, None]
        elif kind == "bsym":
            bp = derivative(w).values
            bv = w.values
            wmat = bp[:, None] + bp[None, :] - 2.0 * (bv[:, None] - bv[None, :]) * kernel_matrix(grid, 1)
            np.fill_diagonal(wmat, 0.0)  # diagonal handled analytically (it vanishes)
            integrand *= wmat
        else:
            raise ValueError(f"unknown weight kind {kind!r}")
    h = grid.spacing
    row = integrand.sum(axis=1) + _diagonal_value(spec)
    r = SpectralField(grid, values=h * row)
    if not spec.scalar:
        return r
    p = r.values.copy()
    for f in spec.point_factors:
        p = p * f.values
    return complex(h * p.sum())


def pv_hilbert_oracle(f: SpectralField) -> SpectralField:
    """Principal-value cot-kernel quadrature of the Hilbert transform.

    Independent O(N^2) check of the multiplier definition.  The diagonal
    carries the even-part limit -f'(a); the odd singular part cancels in
    pairs on the symmetric grid.
    """
    grid = f.grid
    k1 = kernel_matrix(grid, 1)
    row = (k1 * f.values[None, :]).sum(axis=1) - derivative(f).values
    return SpectralField(grid, values=(grid.spacing / (np.pi * 1j)) * row)


def hhalf_oracle(f: SpectralField) -> float:
    """Half-derivative norm via the double-integral difference quotient.

    Evaluates  (1/2pi) iint |f(a)-f(b)|^2 K2(a-b) db da  by trapezoid; the
    diagonal limit is |f'(a)|^2.
    """
    grid = f.grid
    spec = KernelSpec(power=2, diff_factors=[f, f.conj()], scalar=False)
    r = oracle_quadrature(spec)
    val = grid.spacing * r.values.sum() / (2.0 * np.pi)
    return float(np.sqrt(np.real(val)))
