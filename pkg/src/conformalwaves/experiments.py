"""Run orchestration: single runs, epsilon sweeps, convergence studies.

A run integrates the system, evaluating the energy hierarchy every
``report_every`` steps; time derivatives of the energies are measured by
4th-order centered differencing of the report series (never inside the
stepper).  Output: one RFC-4180 CSV (schema-versioned header comment) plus
a JSON summary.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .spectral import Grid, SpectralField, norm
from .calculus import make_dealias
from .evolution import (
    BlowUpError, InitialProfile, WaveState, compute_aux, constraint_project,
    default_dt, holomorphic_residual, make_initial_data, step,
)
from .jets import ChordArcError, build_base_jets
from .energy import EnergyEngine, EnergyReport

__all__ = [
    "CSV_SCHEMA",
    "RunResult",
    "SweepResult",
    "run_simulation",
    "write_csv",
    "write_summary",
    "derivative_series",
    "fit_slope",
    "run_sweep",
    "run_converge",
]

CSV_SCHEMA = "conformalwaves-1"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_RESIDUAL = 3
EXIT_PARTIAL = 4


def profile_from_config(cfg: RunConfig) -> InitialProfile:
    return InitialProfile(kind=cfg.profile, k0=cfg.mode,
                          k_center=cfg.packet_center, width=cfg.packet_width,
                          coeffs=cfg.custom_coeffs, coeffs2=cfg.custom_coeffs2)


@dataclass
class RunResult:
    config: RunConfig
    reports: list
    exit_code: int
    wall_time: float
    breach_time: float | None = None
    blowup_time: float | None = None
    final_state: WaveState | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.reports])

    def series(self, kind: str, j: int) -> np.ndarray:
        return np.array([getattr(r, kind)[j] for r in self.reports])


def _slice_report(state: WaveState, cfg: RunConfig) -> EnergyReport:
    dealias = make_dealias(cfg.filter_rule, cfg.filter_threshold)
    jets = build_base_jets(state, cfg.jet_order, dealias=dealias,
                           chord_arc_tol=cfg.chord_arc_tol)
    eng = EnergyEngine(state, jets, max_j=cfg.max_j)
    rep = eng.report()
    aux = compute_aux(state, cfg.chord_arc_tol)
    r1, r2 = holomorphic_residual(state)
    rep.min_a1 = float(np.min(aux.a1.values.real))
    rep.holo_zt = r1
    rep.holo_iza = r2
    return rep


def run_simulation(cfg: RunConfig, initial: WaveState | None = None) -> RunResult:
    """Integrate to t_final, reporting the energy hierarchy along the way."""
    t0 = time.time()
    grid = Grid(cfg.n, cfg.length)
    if initial is not None:
        state = initial
    elif cfg.epsilon > 0:
        state = make_initial_data(profile_from_config(cfg), cfg.epsilon, grid,
                                  cfg.normalization)
    else:
        state = WaveState(0.0, SpectralField.zero(grid), SpectralField.zero(grid))
    dt = cfg.dt if cfg.dt is not None else default_dt(state, cfg.cfl)
    nsteps = max(0, int(round(cfg.t_final / dt))) if cfg.t_final > 0 else 0

    reports = [_slice_report(state, cfg)]
    exit_code = EXIT_OK
    breach_time = None
    blowup_time = None
    for i in range(nsteps):
        try:
            state = step(state, dt, cfg.filter_rule, cfg.filter_threshold,
                         cfg.chord_arc_tol)
        except (BlowUpError, ChordArcError) as exc:
            blowup_time = getattr(exc, "t", state.t)
            exit_code = EXIT_BLOWUP
            break
        if cfg.project_constraints:
            state = constraint_project(state)
        if (i + 1) % cfg.report_every == 0 or i == nsteps - 1:
            rep = _slice_report(state, cfg)
            reports.append(rep)
            if breach_time is None and max(rep.holo_zt, rep.holo_iza) > cfg.residual_tol:
                breach_time = state.t
    if exit_code == EXIT_OK and breach_time is not None:
        exit_code = EXIT_RESIDUAL
    return RunResult(cfg, reports, exit_code, time.time() - t0,
                     breach_time, blowup_time, state)


# -- serialization -----------------------------------------------------------

def _csv_columns(max_j: int):
    cols = ["t"]
    for j in range(max_j + 1):
        cols += [f"E{j}", f"frakE{j}", f"calE{j}", f"corrP{j}",
                 f"C1_{j}", f"C2_{j}", f"F{j}", f"D{j}", f"H{j}"]
    cols += ["L", "E1E3", "res_zt", "res_iza", "min_a1",
             "imag_residual", "q_mean_re", "q_mean_im"]
    return cols


def _fmt(x: float) -> str:
    return format(float(x), ".17e")


def write_csv(path, result: RunResult):
    cfg = result.config
    cols = _csv_columns(cfg.max_j)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={CSV_SCHEMA} max_j={cfg.max_j}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for r in result.reports:
            row = [_fmt(r.t)]
            for j in range(cfg.max_j + 1):
                row += [_fmt(r.e[j]), _fmt(r.frak_e[j]), _fmt(r.cal_e[j]),
                        _fmt(r.corr_projection[j]), _fmt(r.c1[j]), _fmt(r.c2[j]),
                        _fmt(r.f_corr[j]), _fmt(r.d_corr[j]), _fmt(r.h_corr[j])]
            row += [_fmt(r.norm_l), _fmt(r.e1e3), _fmt(r.holo_zt), _fmt(r.holo_iza),
                    _fmt(r.min_a1), _fmt(r.imag_residual),
                    _fmt(r.q_mean.real), _fmt(r.q_mean.imag)]
            writer.writerow(row)


def write_summary(path, result: RunResult):
    reps = result.reports
    summary = {
        "schema": CSV_SCHEMA,
        "exit_code": result.exit_code,
        "wall_time_s": result.wall_time,
        "steps_reported": len(reps),
        "t_final": reps[-1].t if reps else 0.0,
        "min_a1": min(r.min_a1 for r in reps),
        "max_holo_residual": max(max(r.holo_zt, r.holo_iza) for r in reps),
        "final_L": reps[-1].norm_l if reps else 0.0,
        "initial_L": reps[0].norm_l if reps else 0.0,
        "breach_time": result.breach_time,
        "blowup_time": result.blowup_time,
        "max_imag_residual": max(r.imag_residual for r in reps),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


# -- time differencing and slope fitting --------------------------------------

def derivative_series(ts: np.ndarray, vals: np.ndarray):
    """4th-order centered differences on a uniform series (interior points)."""
    ts = np.asarray(ts)
    vals = np.asarray(vals)
    if len(ts) < 5:
        raise ValueError("need at least 5 samples for 4th-order differencing")
    h = ts[1] - ts[0]
    if not np.allclose(np.diff(ts), h, rtol=1e-8):
        raise ValueError("derivative_series requires uniform sampling")
    d = (-vals[4:] + 8 * vals[3:-1] - 8 * vals[1:-3] + vals[:-4]) / (12 * h)
    return ts[2:-2], d


def fit_slope(epsilons, rates):
    """Least-squares slope of log(rate) vs log(eps), with a 2-sigma half-width."""
    x = np.log(np.asarray(epsilons, dtype=float))
    y = np.log(np.asarray(rates, dtype=float))
    n = len(x)
    A = np.vstack([x, np.ones(n)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = float(coef[0])
    if n > 2:
        resid = y - A @ coef
        s2 = float(resid @ resid) / (n - 2)
        sx = float(np.sum((x - x.mean()) ** 2))
        half = 2.0 * np.sqrt(s2 / sx)
    else:
        half = float("nan")
    return slope, half


@dataclass
class SweepResult:
    epsilons: list
    max_rate_e: dict        # j -> list of max |dE_j/dt| per epsilon
    max_rate_frak: dict     # j -> list of max |d frakE_j/dt|
    slope_e: dict           # j -> (slope, half_width)
    slope_frak: dict
    exit_code: int
    failures: list

    def to_dict(self):
        return {
            "epsilons": self.epsilons,
            "max_rate_e": {str(k): v for k, v in self.max_rate_e.items()},
            "max_rate_frak": {str(k): v for k, v in self.max_rate_frak.items()},
            "slope_e": {str(k): v for k, v in self.slope_e.items()},
            "slope_frak": {str(k): v for k, v in self.slope_frak.items()},
            "exit_code": self.exit_code,
            "failures": self.failures,
        }


def run_sweep(cfg: RunConfig, ladder=None) -> SweepResult:
    """Geometric epsilon ladder; fits the decay slopes of the energy rates."""
    if ladder is None:
        ladder = [cfg.sweep_eps0 * cfg.sweep_ratio**i for i in range(cfg.sweep_count)]
    if len(ladder) < 3:
        raise ValueError("sweep ladder needs at least 3 members")
    js = list(range(min(cfg.max_j, 1) + 1)) if cfg.max_j >= 1 else [0]
    max_e = {j: [] for j in js}
    max_frak = {j: [] for j in js}
    failures = []
    for eps in ladder:
        res = run_simulation(cfg.replace(epsilon=float(eps)))
        if res.exit_code not in (EXIT_OK, EXIT_RESIDUAL) or len(res.reports) < 5:
            failures.append({"epsilon": eps, "exit_code": res.exit_code})
            for j in js:
                max_e[j].append(float("nan"))
                max_frak[j].append(float("nan"))
            continue
        ts = res.times
        for j in js:
            _, de = derivative_series(ts, res.series("e", j))
            _, dfrak = derivative_series(ts, res.series("frak_e", j))
            max_e[j].append(float(np.max(np.abs(de))))
            max_frak[j].append(float(np.max(np.abs(dfrak))))
    slope_e = {}
    slope_frak = {}
    ok = [i for i in range(len(ladder)) if not np.isnan(max_e[js[0]][i])]
    for j in js:
        if len(ok) >= 3:
            eps_ok = [ladder[i] for i in ok]
            slope_e[j] = fit_slope(eps_ok, [max_e[j][i] for i in ok])
            slope_frak[j] = fit_slope(eps_ok, [max_frak[j][i] for i in ok])
        else:
            slope_e[j] = (float("nan"), float("nan"))
            slope_frak[j] = (float("nan"), float("nan"))
    code = EXIT_PARTIAL if failures else EXIT_OK
    return SweepResult([float(e) for e in ladder], max_e, max_frak,
                       slope_e, slope_frak, code, failures)


def run_converge(cfg: RunConfig):
    """dt-refinement (4th order) and N-refinement (spectral) tables."""
    out = {"dt_refinement": [], "n_refinement": [], "dt_order": float("nan")}
    if cfg.t_final <= 0:
        return out, EXIT_OK

    grid = Grid(cfg.n, cfg.length)
    profile = profile_from_config(cfg)
    st0 = make_initial_data(profile, cfg.epsilon, grid, cfg.normalization)
    base_dt = cfg.dt if cfg.dt is not None else default_dt(st0, cfg.cfl)

    finals = []
    dts = [base_dt, base_dt / 2, base_dt / 4]
    for dt in dts:
        st = st0
        n = int(round(cfg.t_final / dt))
        for _ in range(n):
            st = step(st, dt, cfg.filter_rule, cfg.filter_threshold, cfg.chord_arc_tol)
        finals.append(st)
    e1 = norm(finals[0].zt - finals[2].zt, "l2") + norm(finals[0].zeta - finals[2].zeta, "l2")
    e2 = norm(finals[1].zt - finals[2].zt, "l2") + norm(finals[1].zeta - finals[2].zeta, "l2")
    order = float(np.log2(e1 / max(e2, 1e-300)) - np.log2(1 + 1 / 15))
    out["dt_refinement"] = [{"dt": float(d), "coarse_vs_fine_l2": float(e)}
                            for d, e in zip(dts[:2], (e1, e2))]
    out["dt_order"] = order

    # N-refinement of a derived diagnostic against a double-resolution reference
    ns = [cfg.n // 4, cfg.n // 2, cfg.n]
    ref_n = cfg.n * 2
    theta_ref = _theta2_at_resolution(cfg, ref_n)
    rows = []
    for n in ns:
        th = _theta2_at_resolution(cfg, n)
        # compare on the coarse grid's modes
        err = _mode_restricted_error(th, theta_ref)
        rows.append({"n": n, "theta2_error": err})
    out["n_refinement"] = rows
    return out, EXIT_OK


def _theta2_at_resolution(cfg: RunConfig, n: int):
    grid = Grid(n, cfg.length)
    st = make_initial_data(profile_from_config(cfg), cfg.epsilon, grid, cfg.normalization)
    jets = build_base_jets(st, 4)
    eng = EnergyEngine(st, jets, max_j=2)
    return eng.theta_field(2)


def _mode_restricted_error(coarse, ref) -> float:
    idx_c = np.fft.fftfreq(coarse.grid.n, 1.0 / coarse.grid.n).astype(int)
    idx_r = np.fft.fftfreq(ref.grid.n, 1.0 / ref.grid.n).astype(int)
    cr = dict(zip(idx_r.tolist(), ref.coeffs))
    err = 0.0
    for k, c in zip(idx_c.tolist(), coarse.coeffs):
        err += abs(c - cr.get(k, 0.0)) ** 2
    return float(np.sqrt(coarse.grid.length * err))
