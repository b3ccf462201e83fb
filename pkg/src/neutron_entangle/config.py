"""Run configuration: a TOML document with [protocol], [sweep], [witness],
[feasibility] and [output] tables."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dynamics import CouplingParams, InitialStateSpec, LatticeSpec, ProtocolConfig
from .entanglement import WitnessSpec, fit_witness, optimal_field, optimal_time
from .feasibility import ExperimentScenario


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "protocol": {
        "N": 4,
        "lattice": "chain_periodic",
        "J": 0.25,
        "lambda": 1.0,
        "B_z": "optimal",
        "V0": 0.0,
        "tau_f": 0.0,
        "tau": "optimal",
        "tau_f_prime": 0.0,
        "engine": "sector_oracle",
        "initial": {"variant": "A", "alpha": None, "beta": None},
    },
    "sweep": {
        "variable": "tau",
        "lo": 0.0,
        "hi": 1.0,
        "points": 201,
        "values": None,
        "engine": "closed_form",
        "quantity": "concurrence",
        "variants": ["A"],
        "N_values": None,
    },
    "witness": {
        "alpha": None,
        "beta": None,
        "phase": None,
        "sign_convention": "corrected",
        "shots": 100000,
    },
    "feasibility": {
        "a0": 1e-10,
        "N": None,
        "v": 7.0,
        "sample_length": 0.1,
        "flight_path": 1.0,
        "flux": 1e8,
        "sample_area": 1e-2,
        "T1": 1.0,
        "T2": 1e-5,
        "dipole_prefactor": "si",
    },
    "output": {"dir": "out", "seed": 0, "plot": False},
}


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}{key}"
        if key not in defaults:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be a table")
            merged[key] = _merge(defaults[key], value, where + ".")
        else:
            merged[key] = value
    return merged


@dataclass
class RunConfig:
    raw: dict

    @classmethod
    def load(cls, path: str | Path | None = None) -> "RunConfig":
        if path is None:
            return cls(copy.deepcopy(DEFAULTS))
        try:
            with open(path, "rb") as fh:
                given = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(given)

    @classmethod
    def from_dict(cls, given: dict) -> "RunConfig":
        cfg = cls(_merge(DEFAULTS, given))
        cfg.protocol()
        cfg.witness()
        cfg.scenario()
        return cfg

    def config_hash(self) -> str:
        # the output location does not affect results
        raw = copy.deepcopy(self.raw)
        del raw["output"]["dir"]
        payload = json.dumps(raw, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @property
    def seed(self) -> int:
        return int(self.raw["output"]["seed"])

    def protocol(self, **overrides) -> ProtocolConfig:
        p = dict(self.raw["protocol"], **overrides)
        try:
            N, lam = int(p["N"]), float(p["lambda"])
            B = optimal_field(lam, N) if p["B_z"] == "optimal" else float(p["B_z"])
            tau = optimal_time(lam, N) if p["tau"] == "optimal" else float(p["tau"])
            init = p["initial"]
            alpha, beta = init["alpha"], init["beta"]
            return ProtocolConfig(
                N=N,
                lattice=LatticeSpec(p["lattice"], N),
                params=CouplingParams(J=float(p["J"]), lam=lam, B_z=B, V0=float(p["V0"])),
                init=InitialStateSpec(
                    init["variant"],
                    None if alpha is None else complex(alpha),
                    None if beta is None else complex(beta),
                ),
                tau_f=float(p["tau_f"]),
                tau=tau,
                tau_f_prime=float(p["tau_f_prime"]),
                engine=p["engine"],
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [protocol] table: {exc}") from exc

    def witness(self, rho=None) -> WitnessSpec:
        """Configured witness; unset amplitudes/phase are fitted to ``rho``."""
        w = self.raw["witness"]
        try:
            conv = w["sign_convention"]
            if w["alpha"] is None or w["beta"] is None:
                if rho is None:
                    return WitnessSpec(sign_convention=conv)
                fitted = fit_witness(rho, conv)
                return fitted if w["phase"] is None else WitnessSpec(
                    fitted.alpha, fitted.beta, conv, float(w["phase"])
                )
            return WitnessSpec(float(w["alpha"]), float(w["beta"]), conv, float(w["phase"] or 0.0))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [witness] table: {exc}") from exc

    def scenario(self) -> ExperimentScenario:
        try:
            return ExperimentScenario(**self.raw["feasibility"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [feasibility] table: {exc}") from exc
