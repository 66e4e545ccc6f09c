"""Run configuration: YAML in, validated against a JSON schema."""
from dataclasses import dataclass

import jsonschema
import numpy as np
import yaml

from .bundle import FullState, check_state
from .errors import ConfigError
from .integrate import IntegratorConfig
from .scenarios import SCENARIOS, BallParams, LyapunovSpec, Z, make_scenario

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}


def _vec(n):
    return {"type": "array", "items": _num, "minItems": n, "maxItems": n}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hdpreduce run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario"],
    "properties": {
        "scenario": {"enum": sorted(SCENARIOS)},
        "mode": {"enum": ["reduced", "full", "both", "verify"], "default": "both"},
        "action_side": {"enum": ["right", "left"], "default": "right"},
        "case": {"enum": ["general", "trivial-A", "trivial-A-and-flat-base"],
                 "default": "trivial-A"},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"r1": _pos, "r2": _pos, "I1": _pos, "I2": _pos,
                           "m2": _pos, "g": {"type": "number", "minimum": 0}},
        },
        "lyapunov": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "c": {"type": "number", "minimum": 0},
                "phi_diag": {"type": "array", "items": _pos, "minItems": 9, "maxItems": 9},
                "v_weight": {"type": "number", "minimum": 0},
            },
        },
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dt": _pos, "T": _pos, "method": {"enum": ["rk4", "euler"]},
                           "project": {"type": "boolean"}, "drift_alarm": _pos},
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "scale": {"type": "number", "minimum": 0},
                "tilt": {"type": "number", "minimum": 0},
                "spin": _num,
                "state": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["R", "pi", "e", "sigma", "C", "gamma"],
                    "properties": {"R": _vec(9), "pi": _vec(3), "e": _vec(3),
                                   "sigma": _vec(3), "C": _vec(9), "gamma": _vec(3)},
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string", "minLength": 1},
                           "prefix": {"type": "string", "minLength": 1,
                                      "pattern": "^[A-Za-z0-9_.-]+$"}},
        },
    },
}

KINEMATIC_TOL = 1e-6


@dataclass
class RunConfig:
    scenario_id: str
    mode: str
    action_side: str
    case: str
    params: BallParams
    lyapunov: object
    integrator: IntegratorConfig
    initial: dict
    out_dir: str
    prefix: str
    raw: dict

    def build_scenario(self):
        return make_scenario(self.scenario_id, self.params, self.lyapunov,
                             self.action_side, self.case)

    def initial_state(self, sc):
        ini = self.initial
        if "state" in ini:
            st = ini["state"]
            s = FullState(np.reshape(st["R"], (3, 3)), st["pi"], st["e"], st["sigma"],
                          np.reshape(st["C"], (3, 3)), st["gamma"])
        else:
            s = sc.initial_state(ini.get("seed", 0), ini.get("scale", 0.2),
                                 ini.get("tilt", 0.02), ini.get("spin", 4.0))
        try:
            check_state(s)
        except ValueError as exc:
            raise ConfigError(f"initial state: {exc}") from None
        for c in sc.dynamics.constraints:
            if c.order == 1 and np.abs(c.residual(s)).max() > KINEMATIC_TOL:
                raise ConfigError("initial state violates the kinematic constraints")
        return s


def _lyapunov(p, d):
    if d is None:
        return None
    c = d.get("c", 0.1)
    w = d.get("v_weight", 1.0)
    phi = np.diag(d["phi_diag"]) if "phi_diag" in d else np.eye(9)
    mg = p.m2 * p.g
    return LyapunovSpec(
        phi=lambda R, e: phi,
        v=lambda R, e: w * mg * (1.0 - e @ Z),
        mu_rate=lambda s: c * (s.pi @ s.pi + s.sigma @ s.sigma + s.gamma @ s.gamma),
        grad_config=lambda R, e, q: (np.zeros(3), -w * mg * Z),
    )


def parse_config(data, env_out_dir=None):
    """Validate a config mapping and turn it into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    try:
        params = BallParams(**data.get("params", {}))
        integ = IntegratorConfig(**data.get("integrator", {}))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = data.get("output", {})
    return RunConfig(
        scenario_id=data["scenario"],
        mode=data.get("mode", "both"),
        action_side=data.get("action_side", "right"),
        case=data.get("case", "trivial-A"),
        params=params,
        lyapunov=_lyapunov(params, data.get("lyapunov")),
        integrator=integ,
        initial=data.get("initial", {}),
        out_dir=env_out_dir or out.get("dir", "out"),
        prefix=out.get("prefix", data["scenario"]),
        raw=data,
    )


def load_config(path, env_out_dir=None):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from None
    return parse_config(data, env_out_dir)
