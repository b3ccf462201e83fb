"""Exact unitary evolution of the two-neutron sequential scattering protocol.

Stages: free evolution ``tau_f`` under H0, neutron 1 scatters for ``tau``
under H0 + H1, free evolution ``tau_f_prime``, neutron 2 scatters for ``tau``
under H0 + H2.  Neutrons do not couple to the field.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import sqrt

import numpy as np

from .basis import (
    CollectiveBasis,
    SectorBasis,
    build_collective_basis,
    build_sector_basis,
)
from .entanglement import concurrence, reduce_to_neutrons
from .hamiltonian import (
    CouplingParams,
    HamiltonianMatrix,
    LatticeSpec,
    build_H0,
    build_Hint,
)

ENGINES = ("sector_oracle", "collective")
THRESHOLD_FIELD_FACTOR = 0.1  # B_t = 0.1 * lambda * N


@dataclass(frozen=True)
class InitialStateSpec:
    """Initial sample/neutron preparation.

    Variant ``"A"``: both neutrons up, sample in the uniform one-magnon state.
    Variant ``"B"``: sample all up, each neutron in ``alpha|0> + beta|1>``.
    When ``alpha``/``beta`` are left as None, variant B uses
    ``alpha = beta = 1/sqrt(2)`` up to the threshold field ``B_t`` and
    ``alpha = 0, beta = 1`` above it.
    """

    variant: str = "A"
    alpha: complex | None = None
    beta: complex | None = None

    def __post_init__(self):
        if self.variant not in ("A", "B"):
            raise ValueError(f"initial-state variant must be 'A' or 'B', got {self.variant!r}")
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("give both alpha and beta or neither")
        if self.alpha is not None:
            norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")

    def amplitudes(self, N: int, params: CouplingParams) -> tuple[complex, complex]:
        if self.variant == "A":
            return 1.0, 0.0
        if self.alpha is not None:
            return complex(self.alpha), complex(self.beta)
        if params.B_z > threshold_field(params.lam, N):
            return 0.0, 1.0
        return 1 / sqrt(2), 1 / sqrt(2)

    def max_flips(self, N: int, params: CouplingParams) -> int:
        if self.variant == "A":
            return 1
        _, beta = self.amplitudes(N, params)
        return 2 if beta != 0 else 0


def threshold_field(lam: float, N: int) -> float:
    return THRESHOLD_FIELD_FACTOR * lam * N


@dataclass(frozen=True)
class ProtocolConfig:
    N: int = 4
    lattice: LatticeSpec | None = None
    params: CouplingParams = field(default_factory=CouplingParams)
    init: InitialStateSpec = field(default_factory=InitialStateSpec)
    tau_f: float = 0.0
    tau: float = 0.0
    tau_f_prime: float = 0.0
    engine: str = "sector_oracle"

    def __post_init__(self):
        if self.lattice is None:
            object.__setattr__(self, "lattice", LatticeSpec("chain_periodic", self.N))
        if self.lattice.N != self.N:
            raise ValueError(f"lattice N={self.lattice.N} differs from N={self.N}")
        for name in ("tau_f", "tau", "tau_f_prime"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {ENGINES}")

    def with_(self, **changes) -> "ProtocolConfig":
        return replace(self, **changes)


@dataclass
class ProtocolResult:
    final_state: np.ndarray
    basis: SectorBasis | CollectiveBasis
    neutron_rho: np.ndarray
    stage_log: list[dict]

    @property
    def concurrence(self) -> float:
        return concurrence(self.neutron_rho)


def prepare_initial(spec: InitialStateSpec, basis, params: CouplingParams | None = None) -> np.ndarray:
    params = params or CouplingParams()
    N = basis.N
    psi = np.zeros(basis.dim, dtype=complex)
    if spec.variant == "A":
        if isinstance(basis, CollectiveBasis):
            psi[basis.index(0, 0, 1)] = 1.0
        else:
            for j in range(N):
                psi[basis.index((j,))] = 1 / sqrt(N)
        return psi

    alpha, beta = spec.amplitudes(N, params)
    single = {0: alpha, 1: beta}
    if isinstance(basis, SectorBasis) and beta != 0 and basis.k_max < 2:
        raise ValueError("variant B with a flipped-neutron amplitude needs k_max = 2")
    if isinstance(basis, CollectiveBasis) and beta != 0 and basis.m_max < 2:
        raise ValueError("variant B with a flipped-neutron amplitude needs m_max = 2")
    for n1 in (0, 1):
        for n2 in (0, 1):
            amp = single[n1] * single[n2]
            if amp == 0:
                continue
            if isinstance(basis, CollectiveBasis):
                psi[basis.index(n1, n2, 0)] = amp
            else:
                conf = ((N,) if n1 else ()) + ((N + 1,) if n2 else ())
                psi[basis.index(conf)] = amp
    return psi


def evolve(state, H: HamiltonianMatrix, t: float) -> np.ndarray:
    """Apply ``exp(-i H t)`` via the eigendecomposition of H."""
    if t < 0:
        raise ValueError(f"evolution time must be >= 0, got {t}")
    state = np.asarray(state, dtype=complex)
    if state.shape != (H.dim,):
        raise ValueError(f"state of shape {state.shape} does not match {H.basis_tag}")
    if not H.is_hermitian():
        raise ValueError("Hamiltonian is not Hermitian")
    if t == 0:
        return state.copy()
    energies, vecs = H.spectrum
    return vecs @ (np.exp(-1j * energies * t) * (vecs.conj().T @ state))


def interaction_time_from_kinematics(D: float, k_z: float) -> float:
    """Classical transit time ``D / |k_z|`` of a neutron across the sample."""
    if D <= 0:
        raise ValueError(f"D must be positive, got {D}")
    if k_z == 0:
        raise ValueError("zero neutron momentum gives an infinite interaction time")
    return D / abs(k_z)


def build_basis(cfg: ProtocolConfig):
    flips = cfg.init.max_flips(cfg.N, cfg.params)
    if cfg.engine == "collective":
        return build_collective_basis(cfg.N, max(flips, 1))
    return build_sector_basis(cfg.N, max(flips, 1))


class ProtocolPropagator:
    """Holds the basis, stage generators and initial state for one configuration.

    The scattering times are supplied per call so that sweeps over ``tau``
    reuse the three eigendecompositions.
    """

    def __init__(self, cfg: ProtocolConfig):
        self.cfg = cfg
        self.basis = build_basis(cfg)
        self.H0 = build_H0(self.basis, cfg.lattice, cfg.params)
        self.H1 = self.H0 + build_Hint(self.basis, 1, cfg.params)
        self.H2 = self.H0 + build_Hint(self.basis, 2, cfg.params)
        self.psi0 = prepare_initial(cfg.init, self.basis, cfg.params)

    def run(self, tau_f=None, tau=None, tau_f_prime=None) -> tuple[np.ndarray, list[dict]]:
        cfg = self.cfg
        tau_f = cfg.tau_f if tau_f is None else tau_f
        tau = cfg.tau if tau is None else tau
        tau_f_prime = cfg.tau_f_prime if tau_f_prime is None else tau_f_prime
        stages = [
            ("free", self.H0, tau_f),
            ("scatter_1", self.H1, tau),
            ("free_prime", self.H0, tau_f_prime),
            ("scatter_2", self.H2, tau),
        ]
        psi, t = self.psi0, 0.0
        log = [{"stage": "initial", "t_start": 0.0, "t_end": 0.0, "norm": float(np.linalg.norm(psi))}]
        for name, H, dt in stages:
            psi = evolve(psi, H, dt)
            log.append({"stage": name, "t_start": t, "t_end": t + dt, "norm": float(np.linalg.norm(psi))})
            t += dt
        return psi, log

    def neutron_rho(self, **times) -> np.ndarray:
        psi, _ = self.run(**times)
        return reduce_to_neutrons(psi, self.basis)

    def concurrence(self, **times) -> float:
        return concurrence(self.neutron_rho(**times))


def run_protocol(cfg: ProtocolConfig) -> ProtocolResult:
    prop = ProtocolPropagator(cfg)
    psi, log = prop.run()
    for entry in log:
        if abs(entry["norm"] - 1.0) > 1e-10:
            raise FloatingPointError(f"norm drifted to {entry['norm']} after {entry['stage']}")
    return ProtocolResult(psi, prop.basis, reduce_to_neutrons(psi, prop.basis), log)
