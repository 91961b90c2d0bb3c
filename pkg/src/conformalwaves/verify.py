"""Seeded random inputs and the identity/property verification suite.

`run_verify` executes the exact-identity and inequality properties of all
modules on seeded random inputs and returns machine-readable verdicts; the
CLI `verify` subcommand serializes them to JSON.  The generators here are
also the source of "random admissible states" for the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .spectral import (
    Grid, SpectralField, antiderivative, derivative, hilbert, mean, norm,
    project,
)
from .calculus import bracket, cubic_form, integrate
from .kernels import KernelSpec, hhalf_oracle, oracle_quadrature, pv_hilbert_oracle
from .evolution import (
    InitialProfile, WaveState, compute_aux, default_dt, make_initial_data, step,
)
from .jets import (
    MaterialJet, build_base_jets, jet_conj, jet_derivative, jet_product,
    jet_truncate,
)

__all__ = [
    "PropertyResult",
    "random_field",
    "random_holomorphic",
    "random_admissible_state",
    "run_verify",
]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    value: float          # measured residual / violation count / order
    tolerance: float
    mandatory: bool = True
    detail: str = ""

    def to_dict(self):
        return asdict(self)


def random_field(grid: Grid, rng, kmax=None, mean_zero=False,
                 holomorphic=False, strict=False, decay=5.0) -> SpectralField:
    """Band-limited random field with exponentially decaying spectrum."""
    kmax = kmax or grid.n // 4
    idx = np.fft.fftfreq(grid.n, 1.0 / grid.n).astype(int)
    sel = np.abs(idx) <= kmax
    if holomorphic:
        sel &= (idx < 0) if strict else (idx <= 0)
    c = np.zeros(grid.n, dtype=complex)
    amp = rng.standard_normal(sel.sum()) + 1j * rng.standard_normal(sel.sum())
    c[sel] = amp * np.exp(-np.abs(idx[sel]) / decay)
    if mean_zero:
        c[0] = 0.0
    return SpectralField(grid, coeffs=c)


def random_holomorphic(grid: Grid, rng, kmax=None, strict=True) -> SpectralField:
    return random_field(grid, rng, kmax=kmax, holomorphic=True, strict=strict)


def random_admissible_state(grid: Grid, rng, eps: float = 0.05) -> WaveState:
    """Random state on the constraint manifold with independent shapes.

    conj(Z_t) and 1/Z_a - 1 are independent strictly-holomorphic fields of
    size ~ eps, so no quadratic diagnostic degenerates by symmetry.
    """
    zbt = random_holomorphic(grid, rng, kmax=grid.n // 6)
    w = random_holomorphic(grid, rng, kmax=grid.n // 6)
    zbt = (eps / max(norm(derivative(zbt), "l2"), 1e-30)) * zbt
    w = (eps / max(norm(w, "hhalf"), 1e-30)) * w
    iza = 1.0 + w
    za = 1.0 / iza
    zeta = antiderivative(za - 1.0 - mean(za - 1.0), mean_tol=np.inf)
    return WaveState(0.0, zeta, zbt.conj())


def _rel(a, b, floor=1e-30):
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), floor)
    return float(np.max(np.abs(a - b))) / scale


def _mean_adj(f: SpectralField) -> np.ndarray:
    v = f.values
    return v - v.mean()


def run_verify(seed: int = 0, n: int = 256, samples: int = 1000,
               with_dynamics: bool = True) -> list[PropertyResult]:
    """Execute the identity and inequality suite on seeded random inputs."""
    from .energy import EnergyEngine

    grid = Grid(n)
    rng = np.random.default_rng(seed)
    out: list[PropertyResult] = []

    def check(name, value, tol, mandatory=True, detail=""):
        out.append(PropertyResult(name, bool(value <= tol), float(value),
                                  float(tol), mandatory, detail))

    # ---- projection algebra -------------------------------------------
    f = random_field(grid, rng)
    ph, pa = project(f, "holo"), project(f, "anti")
    check("projection_partition", _rel((ph + pa).values, f.values), 1e-14,
          detail="holomorphic + antiholomorphic projection = identity")
    z1 = np.max(np.abs(project(pa, "holo").values))
    z2 = np.max(np.abs(project(ph, "anti").values))
    check("projection_annihilation", max(z1, z2) / max(norm(f, "linf"), 1e-30),
          1e-14, detail="the two projections compose to zero")
    g = random_field(grid, rng, mean_zero=True)
    check("hilbert_involution", _rel(hilbert(hilbert(g)).values, g.values), 1e-13)
    check("hilbert_pv_quadrature",
          _rel(hilbert(g).values, pv_hilbert_oracle(g).values), 1e-9,
          detail="multiplier vs principal-value cot-kernel quadrature")

    # ---- half-derivative norm identities ------------------------------
    f = random_field(grid, rng)
    lhs = norm(project(f, "holo"), "hhalf") ** 2 + norm(project(f, "anti"), "hhalf") ** 2
    check("hhalf_pythagoras", abs(lhs - norm(f, "hhalf") ** 2) / max(lhs, 1e-30), 1e-10)
    pair = complex(grid.spacing * np.sum(1j * derivative(f).values * np.conj(f.values)))
    sgn = norm(project(f, "holo"), "hhalf") ** 2 - norm(project(f, "anti"), "hhalf") ** 2
    check("hhalf_signed_pairing", abs(pair - sgn) / max(abs(sgn), 1e-30), 1e-10,
          detail="int i f' conj(f) equals the signed projection energies")
    fb = random_field(grid, rng, kmax=grid.n // 6)
    check("hhalf_multiplier_vs_double_integral",
          abs(norm(fb, "hhalf") - hhalf_oracle(fb)) / max(norm(fb, "hhalf"), 1e-30),
          1e-8)

    # ---- singular calculus --------------------------------------------
    worst = 0.0
    for _ in range(5):
        a = random_field(grid, rng, kmax=grid.n // 8)
        b = random_field(grid, rng, kmax=grid.n // 8)
        h = random_field(grid, rng, kmax=grid.n // 8)
        spec = KernelSpec(power=2, diff_factors=[a, b], beta_factors=[h])
        slow = (1.0 / (np.pi * 1j)) * oracle_quadrature(spec)
        worst = max(worst, _rel(bracket(a, b, h).values, slow.values))
    check("bracket_reduction_two_sided", worst, 1e-8,
          detail="integration-by-parts reduction vs defining pv integral")

    worst = 0.0
    for _ in range(5):
        a = random_field(grid, rng, kmax=grid.n // 8)
        b = random_field(grid, rng, kmax=grid.n // 8)
        h = random_holomorphic(grid, rng, kmax=grid.n // 8, strict=False)
        lhs_f = project(bracket(a, b, h), "holo")
        rhs_f = (-2.0) * project(a * derivative(project(b * h, "anti")), "holo") \
            + (-2.0) * project(b * derivative(project(a * h, "anti")), "holo")
        worst = max(worst, _rel(_mean_adj(lhs_f), _mean_adj(rhs_f)))
    check("bracket_holomorphic_projection", worst, 1e-8,
          detail="projected bracket reduction, compared mean-adjusted")

    import itertools
    a = random_field(grid, rng, kmax=grid.n // 8)
    b = random_field(grid, rng, kmax=grid.n // 8)
    h = random_field(grid, rng, kmax=grid.n // 8)
    base = cubic_form(a, b, h).values
    worst = max(_rel(cubic_form(*perm).values, base)
                for perm in itertools.permutations((a, b, h)))
    check("cubic_form_symmetry", worst, 1e-10)

    worst = 0.0
    for _ in range(5):
        fh = [random_holomorphic(grid, rng, kmax=grid.n // 8, strict=False)
              for _ in range(4)]
        lhs_s = integrate(derivative(project(fh[0].conj() * fh[1], "anti"))
                          * fh[2] * fh[3].conj())
        spec = KernelSpec(power=2, diff_factors=[fh[0].conj(), fh[2]],
                          beta_factors=[fh[1]], point_factors=[fh[3].conj()],
                          scalar=True)
        rhs_s = -oracle_quadrature(spec) / (2.0 * np.pi * 1j)
        worst = max(worst, abs(lhs_s - rhs_s) / max(abs(lhs_s), abs(rhs_s), 1e-30))
    check("holomorphic_quadruple_pairing", worst, 1e-8,
          detail="boundary-value pairing identity for holomorphic quadruples")

    # ---- explicit-constant inequalities --------------------------------
    gs = Grid(min(n, 128))
    viol = 0
    for _ in range(samples):
        u = random_field(gs, rng, kmax=gs.n // 6, mean_zero=True)
        if norm(u, "linf") ** 2 > 2.0 * norm(u, "l2") * norm(derivative(u), "l2") * (1 + 1e-12):
            viol += 1
    check("sobolev_two_constant", float(viol), 0.0,
          detail=f"|f|_inf^2 <= 2 |f|_2 |f'|_2 on {samples} samples")

    viol = 0
    for _ in range(samples):
        w = random_holomorphic(gs, rng, kmax=gs.n // 6)
        w = (rng.uniform(0.05, 0.999) / max(norm(w, "linf"), 1e-30)) * w
        ffield = 1.0 + w
        lhs_v = norm(w, "linf") ** 2
        rhs_v = 18.0 * norm(w, "l2") * norm(ffield * ffield * derivative(ffield), "l2")
        if lhs_v > rhs_v * (1 + 1e-12):
            viol += 1
    check("sobolev_constant_18", float(viol), 0.0,
          detail=f"|f-1|_inf^2 <= 18 |f-1|_2 |f^2 f'|_2 on {samples} samples")

    viol = 0
    for _ in range(samples):
        fhol = random_holomorphic(gs, rng, kmax=gs.n // 6, strict=False)
        w = random_holomorphic(gs, rng, kmax=gs.n // 6)
        delta = rng.uniform(0.05, 0.95)
        w = ((1.0 - delta) / max(norm(w, "linf"), 1e-30)) * w
        izabar = (1.0 + w).conj()
        if delta * norm(fhol, "hhalf") > norm(project(fhol * izabar, "holo"), "hhalf") * (1 + 1e-10):
            viol += 1
    check("weighted_projection_lower_bound", float(viol), 0.0,
          detail=f"delta |f| <= |P_H(f / conj(Z_a))| in H^1/2 on {samples} samples")

    # ---- jets and interface identities ---------------------------------
    st = random_admissible_state(grid, rng, eps=0.05)
    jets = build_base_jets(st, 4)
    onef = SpectralField.constant(grid, 1.0)
    lhs_f = derivative(jets.b[0]) - 2.0 * (jets.iza[0] * derivative(jets.zt[0])).real()
    rhs_f = 0.5 * bracket(jets.iza[0], jets.zt[0], onef) \
        - 0.5 * bracket(jets.zbt[0], jets.iza[0].conj(), onef)
    check("advection_gradient_bracket", _rel(lhs_f.values, rhs_f.values), 1e-9)

    ddt_iza = jets.iza[0] * (derivative(jets.b[0]) - jets.iza[0] * derivative(jets.zt[0]))
    check("material_derivative_of_inverse_za",
          _rel(jets.iza[1].values, ddt_iza.values), 1e-9)

    fj = MaterialJet(tuple(random_field(grid, rng, kmax=grid.n // 8) for _ in range(3)))
    iza2 = jet_product(jets.iza, jet_conj(jets.iza))
    wdf = jet_product(jet_truncate(iza2, 2), jet_derivative(fj, jets.b))
    lhs_c = wdf[1] - iza2[0] * derivative(fj[1])
    coeff = (derivative(jets.b[0]) - 2.0 * (jets.iza[0] * derivative(jets.zt[0])).real()) \
        * (jets.iza[0] * jets.iza[0].conj())
    check("weighted_gradient_commutator",
          _rel(lhs_c.values, (coeff * derivative(fj[0])).values), 1e-9)

    aux = compute_aux(st, with_residual=True)
    check("taylor_sign_lower_bound",
          max(0.0, 1.0 - float(np.min(aux.a1.values.real))), 1e-10,
          detail="A_1 >= 1 pointwise")
    check("taylor_coefficient_imag_residue", aux.a1_imag_max, 1e-12,
          detail="two-sided commutator construction of A_1 is real")

    # ---- potential and energy identities --------------------------------
    eng = EnergyEngine(st, jets, max_j=2)
    check("potential_transport_identity", eng.check_q1(), 1e-8,
          detail="first material derivative of the half-potential, mean-adjusted")
    check("potential_wave_identity", eng.check_q2(), 1e-7,
          detail="second-order equation for the half-potential, mean-adjusted")
    check("theta1_position_identity", eng.check_theta1(), 1e-8)
    check("theta2_advection_identity", eng.check_theta2(), 1e-8)
    check("theta_gradient_identity", eng.check_theta1_gradient(), 1e-8,
          detail="gradient of Theta^(1) equals i(1 - 1/Z_a)")
    check("theta_recursion", eng.check_theta_recursion(1), 1e-7,
          detail="two-step recursion for Theta^(j+2), mean-adjusted")
    check("energy_decomposition",
          max(eng.check_energy_decomposition(j) for j in (0, 1, 2)), 1e-8,
          detail="defining energy form vs gradient-square expansion")
    for j in (1, 2):
        check(f"g_recursion_vs_direct_j{j}", eng.check_phg_recursion(j), 1e-6,
              detail="cascade formula vs the defining projected source")
    check("explicit_quartic_energy_j0", eng.check_frak0_explicit(), 1e-9,
          detail="corrected energy at j=0 vs its closed form")
    check("quartic_rate_closed_form_j0",
          abs(eng.ddt_frak0_exact() - eng.frak0_rhs())
          / max(abs(eng.frak0_rhs()), 1e-30), 1e-6,
          detail="transport chain rule vs the closed-form rate at j=0")

    # ---- dynamics-dependent identities ---------------------------------
    if with_dynamics:
        out.extend(_dynamics_checks(rng))
    return out


def _diag_scalars(state):
    """Scalar diagnostics and their jet rates: d/dt int f = int(D_t f + b_a f)."""
    from .energy import EnergyEngine

    jets = build_base_jets(state, 4)
    eng = EnergyEngine(state, jets, max_j=1)
    ba = derivative(jets.b[0])
    th = eng.theta_jet(2)
    dth = jet_derivative(jet_truncate(th, 1), jets.b)
    vals = np.array([
        integrate(jets.a1[0] * jets.a1[0]).real,
        integrate(jets.b[0] * jets.b[0]).real,
        integrate(1j * derivative(th[0]) * th[0].conj()).real,
    ])
    rates = np.array([
        integrate(2.0 * jets.a1[0] * jets.a1[1] + ba * jets.a1[0] * jets.a1[0]).real,
        integrate(2.0 * jets.b[0] * jets.b[1] + ba * jets.b[0] * jets.b[0]).real,
        integrate(1j * dth[1] * th[0].conj() + 1j * dth[0] * th[1].conj()
                  + ba * (1j * dth[0] * th[0].conj())).real,
    ])
    return vals, rates, eng


def _dynamics_checks(rng) -> list[PropertyResult]:
    """Short-trajectory identities (kept light for the verify budget)."""
    from .energy import EnergyEngine

    out = []
    grid = Grid(128)
    st = random_admissible_state(grid, rng, eps=0.05)
    dt0 = default_dt(st, 0.5)

    errs = []
    en_errs = []
    for h_step in (dt0, dt0 / 2):
        s1 = step(st, h_step)
        s2 = step(s1, h_step)
        v0, _, eng0 = _diag_scalars(st)
        v1, r1, eng1 = _diag_scalars(s1)
        v2, _, eng2 = _diag_scalars(s2)
        fd = (v2 - v0) / (2 * h_step)
        errs.append(float(np.max(np.abs(fd - r1) / np.maximum(np.abs(r1), 1e-10))))

        # energy identity: FD of the antisymmetrized pairing energy vs the
        # projected-source pairing at the mid slice
        def pair_energy(eng):
            t1 = eng.theta_field(1)
            t2 = eng.theta_field(2)
            j1 = eng.theta_jet(1)
            j2 = eng.theta_jet(2)
            e_val = (integrate(1j * derivative(t2) * j1[1].conj())
                     - integrate(1j * derivative(t1) * j2[1].conj())).real
            return e_val

        e0, e1v, e2v = (pair_energy(e) for e in (eng0, eng1, eng2))
        g1 = eng1.phg_direct(1)
        g2 = eng1.phg_direct(2)
        rhs = (integrate(1j * derivative(eng1.theta_field(2)) * g1.conj())
               - integrate(1j * derivative(eng1.theta_field(1)) * g2.conj())).real
        en_errs.append(abs((e2v - e0) / (2 * h_step) - rhs))

    order = float(np.log2(max(errs[0], 1e-18) / max(errs[1], 1e-18)))
    out.append(PropertyResult("jet_vs_finite_difference_order", order > 1.5,
                              order, 1.5, True,
                              "FD of scalar diagnostics converges (2nd order) to the jet rate"))
    scale = max(abs(en_errs[0]), 1e-18)
    ratio = en_errs[1] / scale
    out.append(PropertyResult("energy_identity_finite_difference",
                              bool(ratio < 0.35 or en_errs[1] < 1e-10),
                              float(ratio), 0.35, True,
                              "FD of the pairing energy matches the projected-source "
                              "pairing; error is dominated by the dt^2 differencing"))
    return out
