"""Material-derivative jets.

A :class:`MaterialJet` bundles a field with its material derivatives
``D_t^k f`` up to a fixed order, all evaluated at one time slice.  Higher
components are produced *algebraically* from the commutation rules

    [D_t, d_a] = -b_a d_a,          [D_t, H] = [b, H] d_a,

never by time differencing, so every derived diagnostic is available from
a single state.  ``build_base_jets`` bootstraps the jets of the prognostic
and auxiliary fields from the evolution equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .spectral import (
    Grid, SpectralField, antiderivative, derivative, hilbert, mean,
)

__all__ = [
    "MaterialJet",
    "BaseJets",
    "jet_product",
    "jet_add",
    "jet_scale",
    "jet_conj",
    "jet_shift",
    "jet_truncate",
    "jet_constant",
    "jet_reciprocal",
    "jet_derivative",
    "jet_hilbert",
    "jet_mean",
    "jet_antiderivative",
    "jet_commutator_hilbert",
    "jet_bracket",
    "jet_cubic_form",
    "build_base_jets",
    "ChordArcError",
]


class ChordArcError(RuntimeError):
    """The interface parametrization degenerated (min |Z_a| too small)."""


@dataclass(frozen=True)
class MaterialJet:
    """components[k] represents D_t^k f on a shared grid."""

    components: tuple

    def __post_init__(self):
        if not self.components:
            raise ValueError("jet needs at least one component")
        g = self.components[0].grid
        if any(c.grid != g for c in self.components):
            raise ValueError("grid mismatch")

    @property
    def order(self) -> int:
        return len(self.components) - 1

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def __getitem__(self, k: int) -> SpectralField:
        return self.components[k]

    @property
    def field(self) -> SpectralField:
        return self.components[0]


def _as_jet(components) -> MaterialJet:
    return MaterialJet(tuple(components))


def jet_constant(grid: Grid, value, order: int) -> MaterialJet:
    """Jet of a time-independent constant field."""
    c = SpectralField.constant(grid, value)
    z = SpectralField.zero(grid)
    return _as_jet([c] + [z] * order)


def jet_from_field(f: SpectralField, order: int) -> MaterialJet:
    """Jet with unspecified dynamics: only component 0 is meaningful."""
    if order == 0:
        return _as_jet([f])
    raise ValueError("higher components must come from the jet rules")


def jet_add(a: MaterialJet, b: MaterialJet) -> MaterialJet:
    j = min(a.order, b.order)
    return _as_jet([a[k] + b[k] for k in range(j + 1)])


def jet_sub(a: MaterialJet, b: MaterialJet) -> MaterialJet:
    j = min(a.order, b.order)
    return _as_jet([a[k] - b[k] for k in range(j + 1)])


def jet_scale(a: MaterialJet, c) -> MaterialJet:
    return _as_jet([comp * c for comp in a.components])


def jet_conj(a: MaterialJet) -> MaterialJet:
    return _as_jet([comp.conj() for comp in a.components])


def jet_real(a: MaterialJet) -> MaterialJet:
    return jet_scale(jet_add(a, jet_conj(a)), 0.5)


def jet_imag(a: MaterialJet) -> MaterialJet:
    return jet_scale(jet_sub(a, jet_conj(a)), -0.5j)


def jet_shift(a: MaterialJet) -> MaterialJet:
    """The jet of D_t f (one component shorter)."""
    if a.order == 0:
        raise ValueError("cannot shift an order-0 jet")
    return _as_jet(a.components[1:])


def jet_truncate(a: MaterialJet, order: int) -> MaterialJet:
    if order > a.order:
        raise ValueError("cannot extend a jet by truncation")
    return _as_jet(a.components[: order + 1])


def jet_product(a: MaterialJet, b: MaterialJet, dealias=None) -> MaterialJet:
    """Leibniz rule: components[k] = sum_i C(k,i) a[i] b[k-i]."""
    j = min(a.order, b.order)
    out = []
    for k in range(j + 1):
        s = a[0] * b[k]
        for i in range(1, k + 1):
            s = s + comb(k, i) * (a[i] * b[k - i])
        if dealias is not None:
            s = dealias(s)
        out.append(s)
    return _as_jet(out)


def jet_reciprocal(a: MaterialJet, dealias=None) -> MaterialJet:
    """Jet of 1/f, by inverting the Leibniz expansion of f * (1/f) = 1."""
    r0 = 1.0 / a[0]
    out = [r0]
    for k in range(1, a.order + 1):
        s = SpectralField.zero(a.grid)
        for i in range(1, k + 1):
            s = s + comb(k, i) * (a[i] * out[k - i])
        v = -(r0 * s)
        if dealias is not None:
            v = dealias(v)
        out.append(v)
    return _as_jet(out)


def jet_derivative(a: MaterialJet, b_jet: MaterialJet, dealias=None) -> MaterialJet:
    """Jet of d_a f from  D_t d_a f = d_a(D_t f) - b_a d_a f.

    Needs the advection jet to order >= a.order - 1.
    """
    J = a.order
    if J == 0:
        return _as_jet([derivative(a[0])])
    if b_jet.order < J - 1:
        raise ValueError("insufficient advection jet order")
    ds = jet_derivative(jet_shift(a), jet_truncate(b_jet, max(J - 2, 0)), dealias)
    db = jet_derivative(jet_truncate(b_jet, J - 1),
                        jet_truncate(b_jet, max(J - 2, 0)), dealias)
    out = [derivative(a[0])]
    for k in range(J):
        s = ds[k]
        for i in range(k + 1):
            s = s - comb(k, i) * (db[i] * out[k - i])
        if dealias is not None:
            s = dealias(s)
        out.append(s)
    return _as_jet(out)


def jet_mean(a: MaterialJet, b_jet: MaterialJet, dealias=None) -> tuple:
    """Time derivatives of the spatial mean: d^m/dt^m mean(f).

    Uses d/dt mean(f) = mean(D_t f - b d_a f); returns a.order + 1 scalars.
    """
    out = [mean(a[0])]
    if a.order == 0:
        return tuple(out)
    da = jet_derivative(jet_truncate(a, a.order - 1),
                        jet_truncate(b_jet, max(a.order - 2, 0)), dealias)
    inner = jet_sub(jet_shift(a), jet_product(jet_truncate(b_jet, a.order - 1), da, dealias))
    out.extend(jet_mean(inner, jet_truncate(b_jet, max(a.order - 2, 0)), dealias))
    return tuple(out)


def _mean_jet(a: MaterialJet, b_jet: MaterialJet, dealias=None) -> MaterialJet:
    """Jet of the constant-in-space field t -> mean(f(t))."""
    mus = jet_mean(a, b_jet, dealias)
    return _as_jet([SpectralField.constant(a.grid, m) for m in mus])


def jet_hilbert(a: MaterialJet, b_jet: MaterialJet, side: str = "H",
                dealias=None) -> MaterialJet:
    """Jet of H f (or of the holomorphic / antiholomorphic projection).

    Built from  D_t(H f) = H(D_t f) + [b, H] d_a f;  projections add the
    zero-mode jet, whose own evolution follows from the mean rule.
    """
    if side == "holo":
        h = jet_hilbert(a, b_jet, "H", dealias)
        return jet_add(jet_scale(jet_add(a, h), 0.5),
                       jet_scale(_mean_jet(a, b_jet, dealias), 0.5))
    if side == "anti":
        h = jet_hilbert(a, b_jet, "H", dealias)
        return jet_sub(jet_scale(jet_sub(a, h), 0.5),
                       jet_scale(_mean_jet(a, b_jet, dealias), 0.5))
    if side != "H":
        raise ValueError(f"side must be 'H', 'holo' or 'anti', got {side!r}")

    J = a.order
    if J == 0:
        return _as_jet([hilbert(a[0])])
    if b_jet.order < J - 1:
        raise ValueError("insufficient advection jet order")
    bl = jet_truncate(b_jet, J - 1)
    bl2 = jet_truncate(b_jet, max(J - 2, 0))
    hs = jet_hilbert(jet_shift(a), bl2, "H", dealias)
    da = jet_derivative(jet_truncate(a, J - 1), bl2, dealias)
    comm = jet_sub(jet_product(bl, jet_hilbert(da, bl2, "H", dealias), dealias),
                   jet_hilbert(jet_product(bl, da, dealias), bl2, "H", dealias))
    out = [hilbert(a[0])]
    for k in range(J):
        out.append(hs[k] + comm[k])
    return _as_jet(out)


def jet_antiderivative(a: MaterialJet, b_jet: MaterialJet, dealias=None,
                       mean_tol: float = 1e-7) -> MaterialJet:
    """Jet of the mean-zero antiderivative of a mean-zero field.

    The input must have identically vanishing spatial mean along the flow;
    each level's residual zero mode (discretization noise) is removed after
    a smallness check.  The zero mode of D_t of the antiderivative is
    mean(b * f), supplied through the mean-jet machinery.
    """
    c0 = a[0].coeffs
    scale = 1.0 + float(np.max(np.abs(c0)))
    if abs(c0[0]) > mean_tol * scale:
        raise ValueError("nonzero mean")
    v0 = antiderivative(a[0] - mean(a[0]), mean_tol=np.inf)
    if a.order == 0:
        return _as_jet([v0])
    J = a.order
    bl = jet_truncate(b_jet, J - 1)
    bl2 = jet_truncate(b_jet, max(J - 2, 0))
    db = jet_derivative(bl, bl2, dealias)
    g = jet_add(jet_shift(a), jet_product(db, jet_truncate(a, J - 1), dealias))
    rest = jet_antiderivative(g, bl2, dealias, mean_tol)
    const = _mean_jet(jet_product(bl, jet_truncate(a, J - 1), dealias), bl2, dealias)
    out = [v0] + [rest[k] + const[k] for k in range(J)]
    return _as_jet(out)


# -- jet-level singular calculus -----------------------------------------

def jet_commutator_hilbert(f: MaterialJet, g: MaterialJet, b_jet: MaterialJet,
                           differentiate: bool = False, dealias=None) -> MaterialJet:
    """Jet of [f, H] g (or [f, H] d g)."""
    if differentiate:
        g = jet_derivative(g, b_jet, dealias)
    J = min(f.order, g.order)
    f = jet_truncate(f, J)
    g = jet_truncate(g, J)
    bl = jet_truncate(b_jet, max(J - 1, 0))
    return jet_sub(jet_product(f, jet_hilbert(g, bl, "H", dealias), dealias),
                   jet_hilbert(jet_product(f, g, dealias), bl, "H", dealias))


def jet_bracket(f: MaterialJet, g: MaterialJet, h: MaterialJet,
                b_jet: MaterialJet, dealias=None) -> MaterialJet:
    """Jet of [f,g;h] through the commutator reduction."""
    t1 = jet_commutator_hilbert(f, jet_product(g, h, dealias), b_jet, True, dealias)
    t2 = jet_commutator_hilbert(g, jet_product(f, h, dealias), b_jet, True, dealias)
    t3 = jet_commutator_hilbert(jet_product(f, g, dealias), h, b_jet, True, dealias)
    return jet_sub(jet_add(t1, t2), t3)


def jet_cubic_form(f: MaterialJet, g: MaterialJet, h: MaterialJet,
                   b_jet: MaterialJet, dealias=None) -> MaterialJet:
    """Jet of <f,g,h> = h [f,g;1] - [f,g;h]."""
    J = min(f.order, g.order, h.order)
    one = jet_constant(f.grid, 1.0, J)
    return jet_sub(jet_product(h, jet_bracket(f, g, one, b_jet, dealias), dealias),
                   jet_bracket(f, g, h, b_jet, dealias))


# -- base jets of the water-wave state ------------------------------------

@dataclass(frozen=True)
class BaseJets:
    """Jets of the prognostic and auxiliary fields at one time slice."""

    order: int
    zeta: MaterialJet      # Z - a
    zt: MaterialJet        # Z_t
    zbt: MaterialJet       # conj(Z_t)
    za: MaterialJet        # Z_a
    iza: MaterialJet       # 1/Z_a
    a1: MaterialJet        # Taylor coefficient A_1 (real)
    b: MaterialJet         # conformal advection velocity (real)
    dealias: object = None

    @property
    def grid(self) -> Grid:
        return self.zeta.grid

    @property
    def izabar(self) -> MaterialJet:
        return jet_conj(self.iza)


def _a1_component(zt_j, zbt_j, b_j, k, dealias):
    """Component k of A_1 = 1 - Im [Z_t, H] d(conj Z_t)."""
    w = jet_commutator_hilbert(jet_truncate(zt_j, k), jet_truncate(zbt_j, k),
                               jet_truncate(b_j, max(k - 1, 0)), True, dealias)
    a1 = jet_imag(w)
    comp = -a1[k]
    if k == 0:
        comp = comp + 1.0
    return comp


def _b_component(zt_j, iza_j, b_j, k, dealias):
    """Component k of b = Re (I - H)(Z_t / Z_a)."""
    y = jet_product(jet_truncate(zt_j, k), jet_truncate(iza_j, k), dealias)
    hy = jet_hilbert(y, jet_truncate(b_j, max(k - 1, 0)), "H", dealias)
    return jet_real(jet_sub(y, hy))[k]


def build_base_jets(state, order: int, dealias=None,
                    chord_arc_tol: float = 1e-6) -> BaseJets:
    """Bootstrap all base jets from a wave state, by induction on the order.

    The induction sequence per order k is fixed: acceleration component k
    (from A_1, 1/conj(Z_a) at order k), then Z_t, Z - a, Z_a, 1/Z_a, A_1
    and b at order k+1.  The velocity jet advances through
    D_t^{k+1} Z_t = D_t^k Z_tt with Z_tt = -i + i A_1 / conj(Z_a), and the
    position jet through D_t(Z - a) = Z_t - b.
    """
    zeta = [state.zeta]
    zt = [state.zt]
    zbt = [state.zt.conj()]
    za0 = derivative(state.zeta) + 1.0
    if float(np.min(np.abs(za0.values))) < chord_arc_tol:
        raise ChordArcError("chord-arc failure")
    za = [za0]
    iza = [1.0 / za0]
    a1 = [_a1_component(_as_jet(zt), _as_jet(zbt), _as_jet([SpectralField.zero(state.zeta.grid)]), 0, dealias)]
    b = [_b_component(_as_jet(zt), _as_jet(iza), _as_jet([SpectralField.zero(state.zeta.grid)]), 0, dealias)]

    for k in range(order):
        jzt, jzbt = _as_jet(zt), _as_jet(zbt)
        jb, ja1, jiza = _as_jet(b), _as_jet(a1), _as_jet(iza)
        # acceleration: Z_tt = -i + i A_1 conj(1/Z_a)
        ztt = jet_add(jet_constant(state.zeta.grid, -1j, k),
                      jet_scale(jet_product(jet_truncate(ja1, k),
                                            jet_conj(jet_truncate(jiza, k)), dealias), 1j))
        zt.append(ztt[k])
        zbt.append(ztt[k].conj())
        zeta.append(zt[k] - b[k])
        jzeta = _as_jet(zeta)
        za.append(jet_derivative(jzeta, jb, dealias)[k + 1])
        iza = list(jet_reciprocal(_as_jet(za), dealias).components)
        jzt, jzbt, jiza = _as_jet(zt), _as_jet(zbt), _as_jet(iza)
        a1.append(_a1_component(jzt, jzbt, jb, k + 1, dealias))
        b.append(_b_component(jzt, jiza, jb, k + 1, dealias))

    return BaseJets(order=order, zeta=_as_jet(zeta), zt=_as_jet(zt), zbt=_as_jet(zbt),
                    za=_as_jet(za), iza=_as_jet(iza), a1=_as_jet(a1), b=_as_jet(b),
                    dealias=dealias)
