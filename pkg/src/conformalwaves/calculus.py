"""FFT-reduced singular-integral calculus.

Hilbert commutators, double brackets [f,g;h], cubic forms <f,g,h> and the
quartic double-integral pairings, all reduced to pointwise products and
Hilbert transforms (O(N log N)).  The reductions are exact identities of
the periodized kernels; `kernels.oracle_quadrature` provides the
independent O(N^2) check.

Conventions (periodized kernels K2 = periodization of 1/(a-b)^2):

    [f, H]g        = f*Hg - H(fg)
    [f, g; h](a)   = (1/(pi i)) int Df Dg h(b) K2 db
    <f, g, h>(a)   = (1/(pi i)) int Df Dg Dh K2 db
    quartic_pairing(F, f1, f2, f3) = iint F(a) Df1 Df2 Df3 K2 db da

with Df = f(a) - f(b).
"""

from __future__ import annotations

import numpy as np

from .spectral import SpectralField, derivative, hilbert, spectral_filter

__all__ = [
    "commutator_hilbert",
    "bracket",
    "cubic_form",
    "quartic_pairing",
    "quartic_4diff",
    "integrate",
]


def _check_grids(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("grid mismatch")
    return g


def _mul(a: SpectralField, b: SpectralField, dealias):
    p = a * b
    if dealias is not None:
        p = dealias(p)
    return p


def make_dealias(rule: str, threshold: float = 1e-13):
    """Product filter callable for the configured rule (None for 'none')."""
    if rule == "none":
        return None
    return lambda f: spectral_filter(f, rule, threshold)


def integrate(f: SpectralField) -> complex:
    """Trapezoid integral over one period (spectrally exact)."""
    return complex(f.grid.spacing * f.values.sum())


def commutator_hilbert(f: SpectralField, g: SpectralField, differentiate: bool = False,
                       dealias=None) -> SpectralField:
    """Hilbert commutator [f, H]g, or [f, H] dg when ``differentiate``."""
    _check_grids(f, g)
    if differentiate:
        g = derivative(g)
    return _mul(f, hilbert(g), dealias) - hilbert(_mul(f, g, dealias))


def bracket(f: SpectralField, g: SpectralField, h: SpectralField,
            dealias=None) -> SpectralField:
    """Double bracket [f,g;h] via the integration-by-parts reduction

        [f,g;h] = [f,H] d(gh) + [g,H] d(fh) - [fg,H] dh,

    an exact identity of the periodized kernel.
    """
    _check_grids(f, g, h)
    t1 = commutator_hilbert(f, _mul(g, h, dealias), differentiate=True, dealias=dealias)
    t2 = commutator_hilbert(g, _mul(f, h, dealias), differentiate=True, dealias=dealias)
    t3 = commutator_hilbert(_mul(f, g, dealias), h, differentiate=True, dealias=dealias)
    return t1 + t2 - t3


def cubic_form(f: SpectralField, g: SpectralField, h: SpectralField,
               dealias=None) -> SpectralField:
    """Cubic form <f,g,h> = h*[f,g;1] - [f,g;h] (expanding the h difference)."""
    _check_grids(f, g, h)
    one = SpectralField.constant(f.grid, 1.0)
    return _mul(h, bracket(f, g, one, dealias), dealias) - bracket(f, g, h, dealias)


def quartic_pairing(F: SpectralField, f1: SpectralField, f2: SpectralField,
                    f3: SpectralField, dealias=None) -> complex:
    """iint F(a) Df1 Df2 Df3 / (a-b)^2  as  pi*i * int F <f1,f2,f3> da."""
    _check_grids(F, f1, f2, f3)
    return np.pi * 1j * integrate(_mul(F, cubic_form(f1, f2, f3, dealias), dealias))


def quartic_4diff(w: SpectralField | None, f1: SpectralField, f2: SpectralField,
                  f3: SpectralField, f4: SpectralField, dealias=None) -> complex:
    """iint w(a) Df1 Df2 Df3 Df4 / (a-b)^2  with the fourth difference expanded.

    Splitting Df4 = f4(a) - f4(b) leaves one three-difference pairing plus
    bracket terms:

        pi*i * int w * ( f4 <f1,f2,f3> - f3 [f1,f2;f4] + [f1,f2;f3*f4] ) da.

    ``w = None`` means w == 1.
    """
    _check_grids(f1, f2, f3, f4)
    grid = f1.grid
    if w is None:
        w = SpectralField.constant(grid, 1.0)
    inner = (_mul(f4, cubic_form(f1, f2, f3, dealias), dealias)
             - _mul(f3, bracket(f1, f2, f4, dealias), dealias)
             + bracket(f1, f2, _mul(f3, f4, dealias), dealias))
    return np.pi * 1j * integrate(_mul(w, inner, dealias))
