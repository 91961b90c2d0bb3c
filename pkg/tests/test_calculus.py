import numpy as np
import pytest

from conformalwaves.calculus import (
    bracket, commutator_hilbert, cubic_form, integrate, quartic_4diff,
    quartic_pairing,
)
from conformalwaves.kernels import KernelSpec, oracle_quadrature
from conformalwaves.spectral import (
    Grid, SpectralField, derivative, hilbert, norm, project,
)

G = Grid(128)


def emode(g, k):
    return SpectralField(g, values=np.exp(1j * k * (2 * np.pi / g.length) * g.points))


def random_field(g, seed, kmax=None, mean_zero=False, holomorphic=False):
    rng = np.random.default_rng(seed)
    kmax = kmax or g.n // 4
    idx = np.fft.fftfreq(g.n, 1.0 / g.n).astype(int)
    c = np.zeros(g.n, dtype=complex)
    sel = np.abs(idx) <= kmax
    if holomorphic:
        sel &= idx <= 0
    amp = rng.standard_normal(sel.sum()) + 1j * rng.standard_normal(sel.sum())
    c[sel] = amp * np.exp(-np.abs(idx[sel]) / 6.0)
    if mean_zero:
        c[0] = 0.0
    return SpectralField(g, coeffs=c)


def rel_err(a, b, floor=1e-14):
    scale = max(np.max(np.abs(b)), floor)
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) / scale


def bracket_oracle(f, g, h):
    spec = KernelSpec(power=2, diff_factors=[f, g], beta_factors=[h])
    return (1.0 / (np.pi * 1j)) * oracle_quadrature(spec)


def cubic_oracle(f, g, h):
    spec = KernelSpec(power=2, diff_factors=[f, g, h])
    return (1.0 / (np.pi * 1j)) * oracle_quadrature(spec)


class TestCommutator:
    def test_holomorphic_pair_vanishes(self):
        f = emode(G, -1)
        out = commutator_hilbert(f, f)
        assert np.max(np.abs(out.values)) < 1e-13

    def test_cross_modes_constant(self):
        out = commutator_hilbert(emode(G, -1), emode(G, 1))
        np.testing.assert_allclose(out.values, -1.0, atol=1e-13)

    def test_constant_f_vanishes(self):
        f = SpectralField.constant(G, 1.5 + 0.5j)
        g = random_field(G, 0)
        assert np.max(np.abs(commutator_hilbert(f, g).values)) < 1e-13

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="grid mismatch"):
            commutator_hilbert(emode(G, 1), emode(Grid(64), 1))


class TestBracket:
    def test_exponential_pair(self):
        one = SpectralField.constant(G, 1.0)
        out = bracket(emode(G, -1), emode(G, 1), one)
        np.testing.assert_allclose(out.values, -2j, atol=1e-12)
        np.testing.assert_allclose(bracket_oracle(emode(G, -1), emode(G, 1), one).values,
                                   -2j, atol=1e-10)

    def test_holomorphic_square_vanishes(self):
        f = random_field(G, 1, kmax=16, holomorphic=True)
        one = SpectralField.constant(G, 1.0)
        out = bracket(f, f, one)
        scale = max(1.0, norm(f, "linf") ** 2)
        assert np.max(np.abs(out.values)) < 1e-11 * scale
        assert np.max(np.abs(bracket_oracle(f, f, one).values)) < 1e-9 * scale

    def test_constant_diff_factor_vanishes(self):
        c = SpectralField.constant(G, 2.0)
        g = random_field(G, 2, kmax=16)
        h = random_field(G, 3, kmax=16)
        assert np.max(np.abs(bracket(c, g, h).values)) < 1e-12

    def test_reduction_matches_defining_integral(self):
        # the integration-by-parts identity, two independently computed sides
        for seed in range(5):
            f = random_field(G, 10 + seed, kmax=16)
            g = random_field(G, 20 + seed, kmax=16)
            h = random_field(G, 30 + seed, kmax=16)
            assert rel_err(bracket(f, g, h).values, bracket_oracle(f, g, h).values) < 1e-8


class TestCubicForm:
    def test_constant_argument_vanishes(self):
        c = SpectralField.constant(G, 1.0 + 1.0j)
        f = random_field(G, 4, kmax=16)
        g = random_field(G, 5, kmax=16)
        for args in [(c, f, g), (f, c, g), (f, g, c)]:
            assert np.max(np.abs(cubic_form(*args).values)) < 1e-11

    def test_holomorphic_cubed_vanishes(self):
        f = emode(G, -1)
        assert np.max(np.abs(cubic_form(f, f, f).values)) < 1e-12

    def test_against_oracle(self):
        f, g, h = emode(G, -1), emode(G, 1), emode(G, -1)
        fast = cubic_form(f, g, h)
        slow = cubic_oracle(f, g, h)
        assert rel_err(fast.values, slow.values) < 1e-10

    def test_permutation_invariance(self):
        import itertools
        f = random_field(G, 6, kmax=16)
        g = random_field(G, 7, kmax=16)
        h = random_field(G, 8, kmax=16)
        base = cubic_form(f, g, h).values
        scale = max(np.max(np.abs(base)), 1e-10)
        for perm in itertools.permutations((f, g, h)):
            assert np.max(np.abs(cubic_form(*perm).values - base)) < 1e-10 * scale


class TestProjectionReduction:
    def test_holomorphic_bracket_projection(self):
        # P_H [f,g;h] = -2 P_H(f d P_A(gh)) - 2 P_H(g d P_A(fh)) + const,
        # for holomorphic h; compared mean-adjusted.
        for seed in range(5):
            f = random_field(G, 40 + seed, kmax=16)
            g = random_field(G, 50 + seed, kmax=16)
            h = random_field(G, 60 + seed, kmax=16, holomorphic=True)
            lhs = project(bracket(f, g, h), "holo")
            rhs = (-2.0) * project(f * derivative(project(g * h, "anti")), "holo") \
                + (-2.0) * project(g * derivative(project(f * h, "anti")), "holo")
            dl = lhs.values - np.mean(lhs.values)
            dr = rhs.values - np.mean(rhs.values)
            assert rel_err(dl, dr, floor=1e-8) < 1e-8


class TestQuartic:
    def test_zero_weight(self):
        z = SpectralField.zero(G)
        f = random_field(G, 9, kmax=16)
        assert quartic_pairing(z, f, f, f) == 0

    def test_pairing_against_oracle(self):
        F = random_field(G, 70, kmax=12)
        f1 = random_field(G, 71, kmax=12)
        f2 = random_field(G, 72, kmax=12)
        f3 = random_field(G, 73, kmax=12)
        fast = quartic_pairing(F, f1, f2, f3)
        spec = KernelSpec(power=2, diff_factors=[f1, f2, f3], point_factors=[F], scalar=True)
        slow = oracle_quadrature(spec)
        assert abs(fast - slow) < 1e-8 * max(abs(slow), 1e-8)

    def test_4diff_constant_factor_vanishes(self):
        c = SpectralField.constant(G, 3.0)
        f = random_field(G, 74, kmax=12)
        assert abs(quartic_4diff(None, c, f, f, f)) < 1e-10

    def test_4diff_against_oracle(self):
        w = random_field(G, 75, kmax=12)
        fs = [random_field(G, 76 + i, kmax=12) for i in range(4)]
        fast = quartic_4diff(w, *fs)
        spec = KernelSpec(power=2, diff_factors=fs, point_factors=[w], scalar=True)
        slow = oracle_quadrature(spec)
        assert abs(fast - slow) < 1e-8 * max(abs(slow), 1e-8)

    def test_symmetrization_identity(self):
        # iint F(a) D..D K2 = (1/2) iint DF D..D K2 when F joins as a difference
        fs = [random_field(G, 80 + i, kmax=12) for i in range(4)]
        lhs = quartic_pairing(fs[0], fs[1], fs[2], fs[3])
        spec = KernelSpec(power=2, diff_factors=fs, scalar=True)
        rhs = 0.5 * oracle_quadrature(spec)
        assert abs(lhs - rhs) < 1e-8 * max(abs(rhs), 1e-8)


class TestOracleExtras:
    def test_bsym_zero_weight_reduces(self):
        b0 = SpectralField.zero(G)
        fs = [random_field(G, 90 + i, kmax=12) for i in range(3)]
        w = KernelSpec(power=2, diff_factors=fs, weight=("bsym", b0), scalar=True)
        assert abs(oracle_quadrature(w)) < 1e-12

    def test_power3_convergence(self):
        # cubed-kernel integrand with five differences: self-convergence
        # under grid refinement at better than second order
        vals = []
        for n in (64, 128, 256):
            g = Grid(n)
            b = random_field(g, 99, kmax=10)
            fs = [random_field(g, 100 + i, kmax=10) for i in range(4)]
            spec = KernelSpec(power=3, diff_factors=[b] + fs, scalar=True)
            vals.append(oracle_quadrature(spec))
        e1 = abs(vals[0] - vals[2])
        e2 = abs(vals[1] - vals[2])
        assert np.isfinite(e1) and np.isfinite(e2)
        # rate >= 2 means error drops by >= 4x per doubling
        assert e2 < e1 / 4.0 or e2 < 1e-10

    def test_insufficient_diff_factors(self):
        f = random_field(G, 120, kmax=8)
        with pytest.raises(ValueError, match="insufficient"):
            KernelSpec(power=3, diff_factors=[f])


class TestHalfHolomorphicPairing:
    def test_identity(self):
        # int d P_A(conj(f) g) f1 conj(g1) da
        #   = -(1/2 pi i) iint D(conj f) D(f1) K2 g(b) conj(g1)(a) db da
        # for holomorphic f, g, f1, g1
        for seed in range(5):
            f = random_field(G, 130 + seed, kmax=16, holomorphic=True)
            g = random_field(G, 140 + seed, kmax=16, holomorphic=True)
            f1 = random_field(G, 150 + seed, kmax=16, holomorphic=True)
            g1 = random_field(G, 160 + seed, kmax=16, holomorphic=True)
            lhs = integrate(derivative(project(f.conj() * g, "anti")) * f1 * g1.conj())
            spec = KernelSpec(power=2, diff_factors=[f.conj(), f1],
                              beta_factors=[g], point_factors=[g1.conj()], scalar=True)
            rhs = -oracle_quadrature(spec) / (2.0 * np.pi * 1j)
            assert abs(lhs - rhs) < 1e-8 * max(abs(lhs), abs(rhs), 1e-8)
