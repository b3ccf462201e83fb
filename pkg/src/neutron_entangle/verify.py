"""Numerical self-check suites run by ``neutron-entangle verify``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import CouplingParams, InitialStateSpec, ProtocolConfig, ProtocolPropagator
from .entanglement import (
    PEAK_CONCURRENCE,
    WitnessSpec,
    closed_form_concurrence,
    fit_witness,
    min_on_product_states,
    optimal_field,
    optimal_time,
    witness_expectation,
    witness_matrix,
)
from .analysis import oscillation_period


@dataclass
class SuiteOutcome:
    name: str
    status: str  # PASS, WARN or FAIL
    detail: str

    def line(self) -> str:
        return f"{self.status} {self.name}: {self.detail}"


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def closed_form_suite(N_values=range(2, 11), points: int = 20) -> SuiteOutcome:
    worst = 0.0
    for N in N_values:
        for B in (0.0, optimal_field(1.0, N), 2.0 * N):
            cfg = ProtocolConfig(N=N, params=CouplingParams(B_z=B))
            prop = ProtocolPropagator(cfg)
            taus = np.linspace(0.0, 2 * oscillation_period(1.0, N, B), points)
            sim = np.array([prop.concurrence(tau=t) for t in taus])
            worst = max(worst, float(np.max(np.abs(sim - closed_form_concurrence(1.0, N, B, taus)))))
    return SuiteOutcome("closed-form vs oracle", _status(worst < 1e-8), f"max |diff| = {worst:.2e}")


def peak_suite() -> SuiteOutcome:
    worst = 0.0
    for N in (4, 8):
        cfg = ProtocolConfig(N=N, params=CouplingParams(B_z=optimal_field(1.0, N)), tau=optimal_time(1.0, N))
        worst = max(worst, abs(ProtocolPropagator(cfg).concurrence() - PEAK_CONCURRENCE))
    return SuiteOutcome("peak saturation", _status(worst < 1e-6), f"max |C - 4/(3 sqrt 3)| = {worst:.2e}")


def _spread(configs) -> float:
    vals = [ProtocolPropagator(c).concurrence() for c in configs]
    return max(vals) - min(vals)


def tau_f_prime_suite(N: int = 4) -> SuiteOutcome:
    worst = 0.0
    for variant in ("A", "B"):
        for B in (0.0, optimal_field(1.0, N)):
            base = ProtocolConfig(
                N=N, params=CouplingParams(B_z=B), init=InitialStateSpec(variant), tau=optimal_time(1.0, N)
            )
            worst = max(worst, _spread(base.with_(tau_f_prime=t) for t in (0.0, 0.7, 3.1, 42.0)))
    return SuiteOutcome("tau_f' invariance", _status(worst < 1e-12), f"max spread = {worst:.2e}")


def exchange_suite(N: int = 6) -> SuiteOutcome:
    B = optimal_field(1.0, N)
    configs = [
        ProtocolConfig(N=N, params=CouplingParams(J=J, B_z=B), tau=0.3 * optimal_time(1.0, N) + 0.05, tau_f=0.4)
        for J in (0.1, 0.25, 1.0)
    ]
    spread = _spread(configs)
    return SuiteOutcome("J invariance", _status(spread < 1e-10), f"spread = {spread:.2e}")


def potential_suite(N: int = 4) -> SuiteOutcome:
    configs = [
        ProtocolConfig(N=N, params=CouplingParams(B_z=1.3, V0=V0), tau=0.21, tau_f_prime=0.9) for V0 in (0.0, 5.0)
    ]
    spread = _spread(configs)
    return SuiteOutcome("V0 invariance", _status(spread < 1e-12), f"spread = {spread:.2e}")


def engine_suite(N_values=range(2, 11)) -> SuiteOutcome:
    worst = 0.0
    for N in N_values:
        for variant in ("A", "B"):
            cfg = ProtocolConfig(
                N=N, params=CouplingParams(B_z=0.7 * N), init=InitialStateSpec(variant), tau=0.37, tau_f=0.2
            )
            a = ProtocolPropagator(cfg).concurrence()
            b = ProtocolPropagator(cfg.with_(engine="collective")).concurrence()
            worst = max(worst, abs(a - b))
    return SuiteOutcome("engine equivalence", _status(worst < 1e-10), f"max |diff| = {worst:.2e}")


def witness_suite(sign_convention: str = "corrected", N: int = 4, samples: int = 10**5) -> SuiteOutcome:
    cfg = ProtocolConfig(N=N, params=CouplingParams(B_z=optimal_field(1.0, N)), tau=optimal_time(1.0, N))
    rho = ProtocolPropagator(cfg).neutron_rho()
    if sign_convention == "paper":
        w = WitnessSpec(sign_convention="paper")
        on_target = float(np.real(w.target().conj() @ witness_matrix(w) @ w.target()))
        return SuiteOutcome(
            "witness",
            "WARN",
            f"printed sign gives <phi|W|phi> = {on_target:+.3f} >= 0 on its own target; "
            "it cannot certify the target state (use sign_convention = 'corrected')",
        )
    w = fit_witness(rho, sign_convention)
    value = witness_expectation(rho, w)
    floor = min_on_product_states(witness_matrix(w), samples, seed=1)
    ok = value < 0 and floor >= -1e-10
    return SuiteOutcome("witness", _status(ok), f"Tr(W rho) = {value:.4f}, min over product states = {floor:.2e}")


def run_all(sign_convention: str = "corrected") -> list[SuiteOutcome]:
    return [
        closed_form_suite(),
        peak_suite(),
        tau_f_prime_suite(),
        exchange_suite(),
        potential_suite(),
        engine_suite(),
        witness_suite(sign_convention),
    ]
