import numpy as np
import pytest

from conformalwaves.calculus import bracket, commutator_hilbert
from conformalwaves.evolution import WaveState, InitialProfile, make_initial_data, compute_aux
from conformalwaves.jets import (
    BaseJets, MaterialJet, build_base_jets, jet_add, jet_antiderivative,
    jet_conj, jet_constant, jet_derivative, jet_hilbert, jet_mean,
    jet_product, jet_reciprocal, jet_scale, jet_shift, jet_sub, jet_truncate,
)
from conformalwaves.spectral import (
    Grid, SpectralField, derivative, hilbert, mean, norm, project,
)

G = Grid(128)


def emode(g, k):
    return SpectralField(g, values=np.exp(1j * k * (2 * np.pi / g.length) * g.points))


def random_field(g, seed, kmax=16, mean_zero=False, holomorphic=False):
    rng = np.random.default_rng(seed)
    idx = np.fft.fftfreq(g.n, 1.0 / g.n).astype(int)
    c = np.zeros(g.n, dtype=complex)
    sel = np.abs(idx) <= kmax
    if holomorphic:
        sel &= idx <= 0
    amp = rng.standard_normal(sel.sum()) + 1j * rng.standard_normal(sel.sum())
    c[sel] = amp * np.exp(-np.abs(idx[sel]) / 5.0)
    if mean_zero:
        c[0] = 0.0
    return SpectralField(g, coeffs=c)


def field_err(a, b):
    scale = max(np.max(np.abs(b.values)), 1e-12)
    return np.max(np.abs(a.values - b.values)) / scale


def flat_state(g):
    return WaveState(0.0, SpectralField.zero(g), SpectralField.zero(g))


def single_mode_state(g, eps):
    return WaveState(0.0, SpectralField.zero(g),
                     SpectralField(g, values=eps * np.exp(1j * g.points)))


@pytest.fixture(scope="module")
def admissible():
    """A generic admissible state with independent holomorphic shapes."""
    from conformalwaves.verify import random_admissible_state
    return random_admissible_state(G, np.random.default_rng(42), eps=0.08)


@pytest.fixture(scope="module")
def jets4(admissible):
    return build_base_jets(admissible, 4)


class TestJetAlgebra:
    def test_unit_product(self):
        f = MaterialJet((random_field(G, 0), random_field(G, 1), random_field(G, 2)))
        one = jet_constant(G, 1.0, 2)
        out = jet_product(one, f)
        for k in range(3):
            assert field_err(out[k], f[k]) < 1e-14

    def test_leibniz_square(self):
        f0, f1 = random_field(G, 3), random_field(G, 4)
        f = MaterialJet((f0, f1))
        sq = jet_product(f, f)
        assert field_err(sq[1], 2.0 * (f0 * f1)) < 1e-13

    def test_reciprocal_inverts(self):
        comps = (random_field(G, 5) + 3.0, random_field(G, 6), random_field(G, 7))
        f = MaterialJet(comps)
        r = jet_reciprocal(f)
        prod = jet_product(f, r)
        assert field_err(prod[0], SpectralField.constant(G, 1.0)) < 1e-12
        for k in (1, 2):
            assert np.max(np.abs(prod[k].values)) < 1e-11

    def test_two_construction_paths_for_quotient(self, jets4):
        # jet of Z_t/Z_a via product of base jets vs reciprocal-then-product
        j = jets4
        q1 = jet_product(j.zt, j.iza)
        q2 = jet_product(j.zt, jet_reciprocal(j.za))
        for k in range(5):
            assert field_err(q1[k], q2[k]) < 1e-10


class TestJetDerivative:
    def test_zero_advection_is_componentwise(self):
        f = MaterialJet((random_field(G, 8), random_field(G, 9)))
        b0 = jet_constant(G, 0.0, 1)
        out = jet_derivative(f, b0)
        for k in range(2):
            assert field_err(out[k], derivative(f[k])) < 1e-13

    def test_first_order_rule(self):
        f = MaterialJet((random_field(G, 10), random_field(G, 11)))
        b = MaterialJet((random_field(G, 12).real(), random_field(G, 13).real()))
        out = jet_derivative(f, b)
        expect = derivative(f[1]) - derivative(b[0]) * derivative(f[0])
        assert field_err(out[1], expect) < 1e-12


class TestJetHilbert:
    def test_zero_advection_componentwise(self):
        f = MaterialJet((random_field(G, 14), random_field(G, 15)))
        b0 = jet_constant(G, 0.0, 1)
        out = jet_hilbert(f, b0, "H")
        for k in range(2):
            assert field_err(out[k], hilbert(f[k])) < 1e-13

    def test_first_order_rule(self):
        f = MaterialJet((random_field(G, 16), random_field(G, 17)))
        b = MaterialJet((random_field(G, 18).real(), random_field(G, 19).real()))
        out = jet_hilbert(f, b, "H")
        expect = hilbert(f[1]) + commutator_hilbert(b[0], f[0], differentiate=True)
        assert field_err(out[1], expect) < 1e-12

    def test_double_hilbert_roundtrip(self, jets4):
        # jet of H(Hf) equals jet of f for mean-zero f, through the order
        j = jets4
        f = jet_sub(j.zt, jet_constant(G, mean(j.zt[0]), 4))
        # remove the mean at every level consistently: use a mean-zero field
        f = MaterialJet(tuple(c - mean(c) for c in j.zt.components))
        hh = jet_hilbert(jet_hilbert(f, j.b, "H"), j.b, "H")
        # components above 0 of f do not have zero mean, so compare the
        # mean-removed projections: H^2 = I - M_0 on every component path
        g = jet_sub(f, MaterialJet(tuple(
            SpectralField.constant(G, m) for m in jet_mean(f, j.b))))
        for k in range(3):
            assert field_err(hh[k], g[k]) < 5e-9

    def test_projection_sides_sum_to_identity(self, jets4):
        j = jets4
        f = j.zt
        ph = jet_hilbert(f, j.b, "holo")
        pa = jet_hilbert(f, j.b, "anti")
        s = jet_add(ph, pa)
        for k in range(5):
            assert field_err(s[k], f[k]) < 1e-10


class TestBaseJets:
    def test_flat_state_nilpotent(self):
        j = build_base_jets(flat_state(G), 4)
        assert field_err(j.a1[0], SpectralField.constant(G, 1.0)) < 1e-14
        for k in range(1, 5):
            for jet in (j.zeta, j.zt, j.a1, j.b, j.iza):
                assert np.max(np.abs(jet[k].values)) < 1e-13

    def test_single_mode_aux_values(self):
        eps = 0.05
        st = single_mode_state(G, eps)
        j = build_base_jets(st, 2)
        # A_1 = 1 + eps^2 and b = 2 eps cos(a), exactly for one mode
        assert field_err(j.a1[0], SpectralField.constant(G, 1.0 + eps**2)) < 1e-12
        expect_b = SpectralField(G, values=2 * eps * np.cos(G.points).astype(complex))
        assert field_err(j.b[0], expect_b) < 1e-12

    def test_advection_consistency_rule(self, jets4):
        # component 1 of 1/Z_a equals (1/Z_a)(b_a - D_a Z_t):
        # the position jet is built independently through D_t(Z-a) = Z_t - b
        j = jets4
        ba = derivative(j.b[0])
        dzt = j.iza[0] * derivative(j.zt[0])
        expect = j.iza[0] * (ba - dzt)
        assert field_err(j.iza[1], expect) < 1e-9

    def test_advection_gradient_bracket_identity(self, jets4):
        # b_a - 2 Re D_a Z_t = (1/2)[1/Z_a, Z_t; 1] - (1/2)[conj Z_t, conj(1/Z_a); 1]
        j = jets4
        one = SpectralField.constant(G, 1.0)
        lhs = derivative(j.b[0]) - (j.iza[0] * derivative(j.zt[0])).real() * 2.0
        rhs = 0.5 * bracket(j.iza[0], j.zt[0], one) \
            - 0.5 * bracket(j.zbt[0], j.iza[0].conj(), one)
        assert field_err(lhs, rhs) < 1e-9

    def test_quasilinear_consistency(self, jets4):
        # D_t^2 conj(Z_t) + i (A_1/|Z_a|^2) d conj(Z_t)
        #   = (D_t A_1 / A_1 + b_a - 2 Re D_a Z_t) (conj(Z_tt) - i),
        # with D_t A_1 = -Im([conj Z_t, Z_tt; 1] - [Z_t, b; d conj Z_t])
        j = jets4
        iza2 = j.iza[0] * j.iza[0].conj()
        lhs = j.zbt[2] + 1j * (j.a1[0] * iza2 * derivative(j.zbt[0]))
        dta1 = bracket(j.zbt[0], j.zt[1], SpectralField.constant(G, 1.0)) \
            - bracket(j.zt[0], j.b[0], derivative(j.zbt[0]))
        dta1 = SpectralField(G, values=(-dta1.values.imag).astype(complex))
        factor = dta1 / j.a1[0] + derivative(j.b[0]) \
            - 2.0 * (j.iza[0] * derivative(j.zt[0])).real()
        rhs = factor * (j.zbt[1] - 1j)
        assert field_err(lhs, rhs) < 1e-8

    def test_dta1_matches_jet(self, jets4):
        j = jets4
        dta1 = bracket(j.zbt[0], j.zt[1], SpectralField.constant(G, 1.0)) \
            - bracket(j.zt[0], j.b[0], derivative(j.zbt[0]))
        dta1 = SpectralField(G, values=(-dta1.values.imag).astype(complex))
        assert field_err(j.a1[1], dta1) < 1e-9

    def test_material_commutator_weighted_gradient(self, jets4):
        # [D_t, |1/Z_a|^2 d] f = ((b_a - 2 Re D_a Z_t) |1/Z_a|^2) d f at order 1
        j = jets4
        f = MaterialJet((random_field(G, 30, kmax=12),
                         random_field(G, 31, kmax=12),
                         random_field(G, 32, kmax=12)))
        iza2 = jet_product(j.iza, jet_conj(j.iza))
        wdf = jet_product(jet_truncate(iza2, 2), jet_derivative(f, j.b))
        lhs = wdf[1] - (iza2[0] * derivative(f[1]))
        coeff = (derivative(j.b[0]) - 2.0 * (j.iza[0] * derivative(j.zt[0])).real()) \
            * (j.iza[0] * j.iza[0].conj())
        rhs = coeff * derivative(f[0])
        assert field_err(lhs, rhs) < 1e-9


class TestJetAntiderivative:
    def test_plain_antiderivative_at_zero_advection(self):
        f0 = random_field(G, 40, mean_zero=True)
        f = MaterialJet((f0, SpectralField.zero(G)))
        b0 = jet_constant(G, 0.0, 1)
        v = jet_antiderivative(f, b0)
        assert field_err(derivative(v[0]), f0) < 1e-12
        assert np.max(np.abs(v[1].values)) < 1e-12

    def test_gradient_of_jet_antiderivative(self, jets4):
        # d(D_t v) = D_t(dv) + b_a dv must hold for the constructed jet
        j = jets4
        u = jet_product(j.zbt, j.za)
        mu = jet_mean(u, j.b)
        s = jet_sub(u, MaterialJet(tuple(SpectralField.constant(G, m) for m in mu)))
        v = jet_antiderivative(s, j.b)
        lhs = derivative(v[1])
        rhs = s[1] + derivative(j.b[0]) * s[0]
        assert field_err(lhs, rhs) < 1e-10
