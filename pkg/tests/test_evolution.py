import numpy as np
import pytest

from conformalwaves.evolution import (
    BlowUpError, InitialProfile, WaveState, compute_aux, constraint_project,
    default_dt, holomorphic_residual, make_initial_data, residuals, rhs, step,
)
from conformalwaves.jets import ChordArcError
from conformalwaves.energy import norm_l
from conformalwaves.spectral import Grid, SpectralField, norm

G = Grid(128)


def flat_state(g=G):
    return WaveState(0.0, SpectralField.zero(g), SpectralField.zero(g))


def single_mode_state(g, eps):
    return WaveState(0.0, SpectralField.zero(g),
                     SpectralField(g, values=eps * np.exp(1j * g.points)))


def evolve(state, dt, nsteps, **kw):
    for _ in range(nsteps):
        state = step(state, dt, **kw)
    return state


class TestAux:
    def test_flat_state(self):
        aux = compute_aux(flat_state())
        np.testing.assert_allclose(aux.a1.values, 1.0, atol=1e-14)
        np.testing.assert_allclose(aux.b.values, 0.0, atol=1e-14)
        np.testing.assert_allclose(aux.ztt.values, 0.0, atol=1e-14)

    def test_single_mode_values(self):
        eps = 0.05
        aux = compute_aux(single_mode_state(G, eps))
        np.testing.assert_allclose(aux.a1.values, 1.0 + eps**2, atol=1e-13)
        np.testing.assert_allclose(aux.b.values, 2 * eps * np.cos(G.points), atol=1e-13)

    def test_chord_arc_failure(self):
        # zeta = e^{-ia} puts a zero of Z_a = 1 - i e^{-ia} on the grid
        vals = np.exp(-1j * G.points)
        st = WaveState(0.0, SpectralField(G, values=vals), SpectralField.zero(G))
        with pytest.raises(ChordArcError):
            compute_aux(st)


class TestStep:
    def test_flat_state_fixed_point(self):
        st = evolve(flat_state(), 0.01, 5)
        assert norm(st.zeta, "linf") < 1e-14
        assert norm(st.zt, "linf") < 1e-14

    def test_rk4_self_convergence_order(self):
        st0 = make_initial_data(InitialProfile("single_mode", k0=1), 0.05, G)
        T = 1.0
        finals = []
        for nsteps in (50, 100, 200):
            dt = T / nsteps
            finals.append(evolve(st0, dt, nsteps))
        e1 = norm(finals[0].zt - finals[2].zt, "l2") + norm(finals[0].zeta - finals[2].zeta, "l2")
        e2 = norm(finals[1].zt - finals[2].zt, "l2") + norm(finals[1].zeta - finals[2].zeta, "l2")
        order = np.log2(e1 / e2) - np.log2(1 + 1 / 15)  # Richardson bias correction
        assert 3.8 <= order <= 4.2

    def test_reversibility(self):
        st0 = make_initial_data(InitialProfile("single_mode", k0=1), 0.05, G)
        dt = default_dt(st0)
        fwd = step(st0, dt)
        # integrate the reversed state backwards by reversing velocity sign:
        # (zeta, zt) -> (zeta, -zt) is the discrete time-reversal of the system
        back = step(WaveState(0.0, fwd.zeta, -1.0 * fwd.zt), dt)
        assert norm(back.zeta - st0.zeta, "l2") < 1e-10
        assert norm(back.zt + st0.zt, "l2") < 1e-10

    def test_blow_up_detection(self):
        st = single_mode_state(G, 0.05)
        bad = WaveState(0.0, st.zeta,
                        SpectralField(G, values=st.zt.values * np.inf))
        with pytest.raises((BlowUpError, ChordArcError, FloatingPointError)):
            step(bad, 0.01)

    def test_holomorphy_residual_growth(self):
        st = make_initial_data(InitialProfile("single_mode", k0=1), 0.05, G)
        dt = default_dt(st)
        st_end = evolve(st, dt, 64, filter_rule="krasny")
        r1, r2 = holomorphic_residual(st_end)
        assert r1 < 1e-10 and r2 < 1e-10


class TestInitialData:
    def test_control_norm_hits_eps(self):
        for eps in (0.1, 0.05, 0.02):
            st = make_initial_data(InitialProfile("single_mode", k0=1), eps, G)
            assert abs(norm_l(st) - eps) < 1e-12

    def test_packet_control_norm(self):
        st = make_initial_data(InitialProfile("packet", k_center=4.0, width=2.0), 0.08, G)
        assert abs(norm_l(st) - 0.08) < 1e-12

    def test_custom_profile(self):
        st = make_initial_data(InitialProfile("custom", coeffs=(1.0, 0.5j)), 0.05, G)
        assert abs(norm_l(st) - 0.05) < 1e-12

    def test_zero_residual_by_construction(self):
        st = make_initial_data(InitialProfile("single_mode", k0=2), 0.1, G)
        r1, r2 = holomorphic_residual(st)
        assert r1 < 1e-14 and r2 < 1e-14

    def test_small_eps_approaches_flat(self):
        st = make_initial_data(InitialProfile("single_mode", k0=1), 1e-8, G)
        assert norm(st.zt, "linf") < 1e-8
        assert norm(st.zeta, "linf") < 1e-8

    def test_steepness_guard(self):
        with pytest.raises(ValueError, match="steepness"):
            make_initial_data(InitialProfile("single_mode", k0=1), 20.0, G)


class TestResiduals:
    def test_flat_state_record(self):
        r = residuals(flat_state())
        assert r.holo_zt == 0.0 and r.holo_iza == 0.0
        assert abs(r.min_a1 - 1.0) < 1e-14
        assert r.norm_l == 0.0

    def test_single_mode_iza_flat(self):
        r = residuals(single_mode_state(G, 0.05))
        assert r.sup_one_minus_iza < 1e-14

    def test_determinism(self):
        st = make_initial_data(InitialProfile("single_mode", k0=1), 0.05, G)
        dt = default_dt(st)
        a = evolve(st, dt, 20, filter_rule="krasny")
        b = evolve(st, dt, 20, filter_rule="krasny")
        assert np.array_equal(a.zeta.values, b.zeta.values)
        assert np.array_equal(a.zt.values, b.zt.values)


class TestConstraintProjection:
    def test_projection_removes_residual(self):
        st = make_initial_data(InitialProfile("single_mode", k0=1), 0.05, G)
        dirty = WaveState(st.t, st.zeta,
                          st.zt + SpectralField(G, values=1e-6 * np.exp(-1j * G.points)))
        r1, _ = holomorphic_residual(dirty)
        assert r1 > 1e-7
        clean = constraint_project(dirty)
        r1c, r2c = holomorphic_residual(clean)
        assert r1c < 1e-13 and r2c < 1e-13


class TestScalingLaw:
    def test_lambda_two_rescaling(self):
        # (conj(Z_t), Z)(a, t) -> (l^-1/2 conj(Z_t)(l a, l^1/2 t), l^-1 Z(l a, l^1/2 t))
        # maps solutions to solutions on the l-times-smaller period.
        lam = 2.0
        n = 256
        g1 = Grid(n, 2 * np.pi)
        g2 = Grid(n, 2 * np.pi / lam)
        st1 = make_initial_data(InitialProfile("single_mode", k0=1), 0.05, g1)

        def rescale(state, t2):
            # sample at l*a: grid point m of g2 maps to point m of g1 (same index)
            zeta = SpectralField(g2, values=state.zeta.values / lam)
            zt = SpectralField(g2, values=state.zt.values / np.sqrt(lam))
            return WaveState(t2, zeta, zt)

        T2 = 2.0
        nsteps = 400
        dt2 = T2 / nsteps
        dt1 = dt2 * np.sqrt(lam)
        st2 = rescale(st1, 0.0)
        a, b = st1, st2
        for _ in range(nsteps):
            a = step(a, dt1, filter_rule="krasny")
            b = step(b, dt2, filter_rule="krasny")
        expect = rescale(a, T2)
        scale = max(norm(expect.zt, "linf"), 1e-30)
        assert norm(b.zt - expect.zt, "linf") / scale < 1e-6
        zscale = max(norm(expect.zeta, "linf"), 1e-30)
        assert norm(b.zeta - expect.zeta, "linf") / zscale < 1e-6
