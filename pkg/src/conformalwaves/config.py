"""Run configuration: flat key-value text with dotted sections.

Grammar (documented in the README): one ``section.key = value`` per line,
``#`` starts a comment, blank lines ignored.  Values are parsed as bool,
int, float, or string; lists are comma-separated strings.  No external
schema machinery: the format is trivially diffable and parseable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_config_text"]


class ConfigError(ValueError):
    """Malformed configuration; carries line/key diagnostics."""


_DEFAULTS = {
    "grid.n": 512,
    "grid.length": 2.0 * np.pi,
    "physics.epsilon": None,        # required
    "physics.profile": "single_mode",
    "physics.mode": 1,
    "physics.packet_center": 4.0,
    "physics.packet_width": 2.0,
    "physics.custom_coeffs": "",
    "physics.custom_coeffs2": "",
    "physics.normalization": "control_norm",
    "stepping.dt": None,            # one of dt / cfl required
    "stepping.cfl": None,
    "stepping.t_final": None,       # required
    "stepping.filter": "krasny",
    "stepping.filter_threshold": 1e-13,
    "stepping.project_constraints": False,
    "diagnostics.max_j": 2,
    "diagnostics.jet_order": 0,     # 0 -> max_j + 2
    "diagnostics.report_every": 4,
    "diagnostics.residual_tol": 1e-7,
    "diagnostics.chord_arc_tol": 1e-6,
    "sweep.eps0": 0.08,
    "sweep.ratio": 0.5,
    "sweep.count": 3,
    "output.directory": "out",
    "output.formats": "csv,json",
}

_REQUIRED = ("physics.epsilon", "stepping.t_final")


def _parse_value(raw: str):
    s = raw.strip()
    if s.lower() in ("true", "false"):
        return s.lower() == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def parse_config_text(text: str) -> dict:
    """Parse the key-value grammar; raises ConfigError with line numbers."""
    data: dict = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {ln}: expected 'key = value', got {line.strip()!r}")
        key, _, raw = body.partition("=")
        key = key.strip()
        if not key or "." not in key:
            raise ConfigError(f"line {ln}: key must be 'section.name', got {key!r}")
        if key not in _DEFAULTS:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        data[key] = _parse_value(raw)
    return data


@dataclass(frozen=True)
class RunConfig:
    n: int
    length: float
    epsilon: float
    profile: str
    mode: int
    packet_center: float
    packet_width: float
    custom_coeffs: tuple
    custom_coeffs2: tuple
    normalization: str
    dt: float | None
    cfl: float | None
    t_final: float
    filter_rule: str
    filter_threshold: float
    project_constraints: bool
    max_j: int
    jet_order: int
    report_every: int
    residual_tol: float
    chord_arc_tol: float
    sweep_eps0: float
    sweep_ratio: float
    sweep_count: int
    out_dir: str
    formats: tuple

    @staticmethod
    def from_mapping(data: dict) -> "RunConfig":
        merged = dict(_DEFAULTS)
        merged.update(data)
        for key in _REQUIRED:
            if merged[key] is None:
                raise ConfigError(f"missing required key {key!r}")
        if merged["stepping.dt"] is None and merged["stepping.cfl"] is None:
            raise ConfigError("missing required key: one of 'stepping.dt' or 'stepping.cfl'")
        n = int(merged["grid.n"])
        if n < 16 or (n & (n - 1)) != 0:
            raise ConfigError(f"grid.n must be a power of two >= 16, got {n}")
        eps = float(merged["physics.epsilon"])
        if eps < 0:
            raise ConfigError("physics.epsilon must be nonnegative")
        t_final = float(merged["stepping.t_final"])
        if t_final < 0:
            raise ConfigError("stepping.t_final must be nonnegative")
        max_j = int(merged["diagnostics.max_j"])
        if not 0 <= max_j <= 4:
            raise ConfigError("diagnostics.max_j must be in 0..4")
        jet_order = int(merged["diagnostics.jet_order"])
        if jet_order and jet_order < max_j + 2:
            raise ConfigError(f"diagnostics.jet_order must be >= max_j + 2 = {max_j + 2}")
        if jet_order > 6:
            raise ConfigError("diagnostics.jet_order is capped at 6")
        if merged["stepping.filter"] not in ("none", "krasny", "smooth36"):
            raise ConfigError(f"unknown stepping.filter {merged['stepping.filter']!r}")
        coeffs_raw = str(merged["physics.custom_coeffs"]).strip()
        coeffs = tuple(complex(c) for c in coeffs_raw.split(",") if c) if coeffs_raw else ()
        coeffs2_raw = str(merged["physics.custom_coeffs2"]).strip()
        coeffs2 = tuple(complex(c) for c in coeffs2_raw.split(",") if c) if coeffs2_raw else ()
        norm_kind = str(merged["physics.normalization"])
        if norm_kind not in ("control_norm", "amplitude"):
            raise ConfigError(f"unknown physics.normalization {norm_kind!r}")
        return RunConfig(
            n=n,
            length=float(merged["grid.length"]),
            epsilon=eps,
            profile=str(merged["physics.profile"]),
            mode=int(merged["physics.mode"]),
            packet_center=float(merged["physics.packet_center"]),
            packet_width=float(merged["physics.packet_width"]),
            custom_coeffs=coeffs,
            custom_coeffs2=coeffs2,
            normalization=norm_kind,
            dt=None if merged["stepping.dt"] in (None, 0, 0.0) else float(merged["stepping.dt"]),
            cfl=None if merged["stepping.cfl"] is None else float(merged["stepping.cfl"]),
            t_final=t_final,
            filter_rule=str(merged["stepping.filter"]),
            filter_threshold=float(merged["stepping.filter_threshold"]),
            project_constraints=bool(merged["stepping.project_constraints"]),
            max_j=max_j,
            jet_order=jet_order or (max_j + 2),
            report_every=max(1, int(merged["diagnostics.report_every"])),
            residual_tol=float(merged["diagnostics.residual_tol"]),
            chord_arc_tol=float(merged["diagnostics.chord_arc_tol"]),
            sweep_eps0=float(merged["sweep.eps0"]),
            sweep_ratio=float(merged["sweep.ratio"]),
            sweep_count=int(merged["sweep.count"]),
            out_dir=str(merged["output.directory"]),
            formats=tuple(str(merged["output.formats"]).split(",")),
        )

    def replace(self, **kw) -> "RunConfig":
        from dataclasses import replace as _replace
        return _replace(self, **kw)


def parse_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return RunConfig.from_mapping(parse_config_text(fh.read()))
