"""Experiment configuration: JSON specs for fields, metrics, curves and runs.

A config is one JSON document.  Exactly which keys are required depends on
the subcommand; see the schema notes in the README.  Builders raise
ConfigError on malformed specs so the CLI can map them to exit code 2.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidParams, UnknownCatalogueEntry
from .forces import (ForceField, Profile, ScalarFieldA, catalogue,
                     cos_profile_ansatz, disc_invariant_ansatz, from_scalar_ansatz,
                     speed_profile_ansatz, _metric_from_params, _profile_from_params)
from .geometry import ConformalMetric
from .dynamics import IntegratorConfig, PhaseState
from .shift import (Curve, circle_arc, constant_nu, line_segment, segment_on_axis,
                    solve_nu, spline_through, tilted_line)


class ConfigError(ValueError):
    """Configuration file is missing, malformed, or inconsistent."""


def load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def build_ansatz(spec: dict) -> ScalarFieldA:
    kind = spec.get("kind")
    try:
        if kind == "speed_profile":
            return speed_profile_ansatz(_profile_from_params(spec.get("profile")))
        if kind == "cos_profile":
            return cos_profile_ansatz(_profile_from_params(spec.get("profile")))
        if kind == "disc_invariant":
            return disc_invariant_ansatz(float(spec.get("R", 0.0)),
                                         _profile_from_params(spec.get("profile"),
                                                              default=Profile.constant(1.0)))
        if kind == "angular_monomial":
            # A = c v^p theta: a deliberate non-solution for residual demos
            c = float(spec.get("coef", 1.0))
            p = float(spec.get("power", 2.0))
            return ScalarFieldA(lambda x, y, v, t: c * v**p * t,
                                label="angular-monomial")
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown ansatz kind {kind!r}")


def build_field(spec) -> tuple[ForceField, ScalarFieldA | None]:
    """Returns (field, ansatz-or-None)."""
    if not isinstance(spec, dict):
        raise ConfigError("'field' must be an object")
    if "catalogue" in spec:
        try:
            return catalogue(spec["catalogue"], spec.get("params")), None
        except (UnknownCatalogueEntry, InvalidParams) as exc:
            raise ConfigError(str(exc)) from exc
    if "ansatz" in spec:
        a = build_ansatz(spec["ansatz"])
        return from_scalar_ansatz(a), a
    raise ConfigError("'field' needs either 'catalogue' or 'ansatz'")


def build_metric(spec) -> ConformalMetric | None:
    if spec in (None, {}, "euclidean", "zero"):
        return None
    try:
        return _metric_from_params(spec)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from exc


def build_curve(spec) -> Curve:
    if not isinstance(spec, dict):
        raise ConfigError("'curve' must be an object")
    kind = spec.get("kind")
    normal = spec.get("normal", "left")
    try:
        if kind == "segment_on_axis":
            return segment_on_axis(float(spec.get("s_min", -1.0)),
                                   float(spec.get("s_max", 1.0)),
                                   normal=spec.get("normal", "right"))
        if kind == "tilted_line":
            return tilted_line(float(spec.get("s_min", -1.0)),
                               float(spec.get("s_max", 1.0)), normal=normal)
        if kind == "segment":
            return line_segment(spec["p0"], spec["p1"], normal=normal)
        if kind == "circle":
            return circle_arc(spec.get("center", (0.0, 0.0)), float(spec["radius"]),
                              spec.get("s_range", (0.0, math.pi)), normal=normal)
        if kind == "spline":
            return spline_through(spec["points"], normal=normal)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad curve spec: {exc}") from exc
    raise ConfigError(f"unknown curve kind {kind!r}")


def build_nu(spec, curve: Curve, field: ForceField):
    if spec is None:
        spec = {"kind": "solve", "s0": 0.5 * sum(curve.s_range), "nu0": 1.0}
    if isinstance(spec, (int, float)):
        return constant_nu(float(spec))
    if not isinstance(spec, dict):
        raise ConfigError("'nu' must be a number or an object")
    kind = spec.get("kind", "solve")
    if kind == "constant":
        return constant_nu(float(spec.get("value", 1.0)))
    if kind == "affine":
        a0, a1 = float(spec.get("a0", 1.0)), float(spec.get("a1", 0.0))
        return lambda s: a0 + a1 * s
    if kind == "solve":
        s0 = float(spec.get("s0", 0.5 * sum(curve.s_range)))
        nu0 = float(spec.get("nu0", 1.0))
        if nu0 == 0.0:
            raise ConfigError("nu0 must be nonzero")
        return solve_nu(curve, field, s0, nu0)
    raise ConfigError(f"unknown nu kind {kind!r}")


def build_integrator(cfg: dict) -> IntegratorConfig:
    tol = cfg.get("tolerances", {})
    method = cfg.get("integrator", "dopri-adaptive")
    try:
        return IntegratorConfig(method=method, step=cfg.get("step"),
                                abs_tol=float(tol.get("abs", 1e-10)),
                                rel_tol=float(tol.get("rel", 1e-10)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_init(cfg: dict) -> PhaseState:
    init = cfg.get("init")
    if not isinstance(init, dict) or "r" not in init or "v" not in init:
        raise ConfigError("'init' must carry 'r' and 'v' 2-vectors")
    try:
        return PhaseState(np.asarray(init["r"], float), np.asarray(init["v"], float))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def t_span_of(cfg: dict) -> tuple[float, float]:
    span = cfg.get("t_span")
    if (not isinstance(span, (list, tuple)) or len(span) != 2
            or not all(isinstance(x, (int, float)) and math.isfinite(x) for x in span)):
        raise ConfigError("'t_span' must be a finite [t0, t1] pair")
    return float(span[0]), float(span[1])
