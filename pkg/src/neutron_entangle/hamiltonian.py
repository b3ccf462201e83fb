"""Sample and neutron-sample Hamiltonians in natural units.

Pauli convention: ``|0>`` is spin up (sigma_z = +1), ``|1>`` spin down, so a
"flip" lowers sigma_z by two.  For neighbouring spins
``sigma_i . sigma_j = 2 SWAP_ij - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import sqrt

import numpy as np

from .basis import CollectiveBasis, SectorBasis

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    kind: str = "chain_periodic"
    N: int = 4

    def __post_init__(self):
        if self.kind not in ("chain_open", "chain_periodic"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.N < 2:
            raise ValueError(f"lattice needs N >= 2, got {self.N}")

    def bonds(self) -> list[tuple[int, int]]:
        pairs = [(i, i + 1) for i in range(self.N - 1)]
        if self.kind == "chain_periodic":
            pairs.append((self.N - 1, 0))
        return pairs


@dataclass(frozen=True)
class CouplingParams:
    J: float = 0.25
    lam: float = 1.0
    B_z: float = 0.0
    V0: float = 0.0

    def __post_init__(self):
        if not self.J > 0:
            raise ValueError(f"exchange J must be positive (ferromagnet), got {self.J}")
        if self.B_z < 0:
            raise ValueError(f"B_z must be >= 0, got {self.B_z}")


@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: np.ndarray
    basis_tag: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) < tol)

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors, computed once per matrix."""
        return np.linalg.eigh(self.matrix)

    def __add__(self, other: "HamiltonianMatrix") -> "HamiltonianMatrix":
        if other.basis_tag != self.basis_tag:
            raise ValueError(f"basis mismatch: {self.basis_tag} vs {other.basis_tag}")
        return HamiltonianMatrix(self.matrix + other.matrix, self.basis_tag)


def _check_lattice(basis, lattice: LatticeSpec):
    if lattice.N != basis.N:
        raise ValueError(f"lattice has N={lattice.N} but basis has N={basis.N}")


def build_H0(basis, lattice: LatticeSpec, p: CouplingParams) -> HamiltonianMatrix:
    """Heisenberg exchange plus Zeeman term on the sample; neutrons are spectators."""
    _check_lattice(basis, lattice)
    N = basis.N
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    if isinstance(basis, CollectiveBasis):
        # Dicke states are symmetric, so every bond has sigma.sigma = +1.
        exchange = -p.J * len(lattice.bonds())
        for i, (_, _, m) in enumerate(basis.states):
            H[i, i] = exchange + p.B_z * (N - 2 * m)
        return HamiltonianMatrix(H, basis.tag)

    for a, conf in enumerate(basis.configs):
        flipped = set(conf)
        n_sample = sum(1 for s in conf if s < N)
        H[a, a] += p.B_z * (N - 2 * n_sample)
        for i, j in lattice.bonds():
            if (i in flipped) == (j in flipped):
                H[a, a] += -p.J
            else:
                H[a, a] += p.J
                swapped = tuple(sorted(flipped ^ {i, j}))
                H[basis.index(swapped), a] += -2.0 * p.J
    return HamiltonianMatrix(H, basis.tag)


def build_Hint(basis, m: int, p: CouplingParams) -> HamiltonianMatrix:
    """Collective exchange coupling of neutron ``m`` (1 or 2) to every sample spin."""
    if m not in (1, 2):
        raise ValueError(f"neutron index must be 1 or 2, got {m}")
    N, lam = basis.N, p.lam
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    if isinstance(basis, CollectiveBasis):
        for a, state in enumerate(basis.states):
            n, k = state[m - 1], state[2]
            H[a, a] = p.V0 + lam * (1 - 2 * n) * (N - 2 * k)
            if n == 1 and k < basis.m_max:
                # neutron flips up, sample gains a magnon
                target = list(state)
                target[m - 1], target[2] = 0, k + 1
                b = basis.states.index(tuple(target))
                amp = 2.0 * lam * sqrt((k + 1) * (N - k))
                H[b, a] = H[a, b] = amp
        return HamiltonianMatrix(H, basis.tag)

    site = N + m - 1
    for a, conf in enumerate(basis.configs):
        flipped = set(conf)
        z_n = -1 if site in flipped else 1
        n_sample = sum(1 for s in conf if s < N)
        H[a, a] = p.V0 + lam * z_n * (N - 2 * n_sample)
        for i in range(N):
            if (i in flipped) != (site in flipped):
                swapped = tuple(sorted(flipped ^ {i, site}))
                H[basis.index(swapped), a] += 2.0 * lam
    return HamiltonianMatrix(H, basis.tag)


PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


@dataclass(frozen=True)
class DipoleAverageReport:
    tensor: np.ndarray  # 3x3 map sigma_beta -> <Q x (sigma x Q)>_alpha
    stderr: np.ndarray  # per-entry Monte-Carlo standard error
    c: float
    residual_max: float
    averaged: np.ndarray  # tensor applied to the supplied spin vector
    samples: int

    def within_sigma(self, expected_c: float = 2.0 / 3.0, n_sigma: float = 3.0) -> bool:
        dev = np.abs(self.tensor - expected_c * np.eye(3))
        return bool(np.all(dev <= n_sigma * self.stderr))


def dipole_average_check(samples: int = 10**6, seed: int = 0, spin=None) -> DipoleAverageReport:
    """Monte-Carlo average of ``Q x (s x Q)`` over uniformly random unit vectors Q.

    ``Q x (s x Q) = s - (Q.s) Q``, so the average is the linear map
    ``I - <Q Q^T>``; for an isotropic average this is ``(2/3) I``.
    ``spin`` is a length-3 stack of operators (Pauli matrices by default).
    """
    if samples < 10**4:
        raise ValueError(f"need at least 1e4 samples, got {samples}")
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(samples, 3))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    per_sample = np.eye(3)[None, :, :] - q[:, :, None] * q[:, None, :]
    tensor = per_sample.mean(axis=0)
    stderr = per_sample.std(axis=0, ddof=1) / sqrt(samples)
    c = float(np.trace(tensor) / 3.0)
    residual = float(np.max(np.abs(tensor - c * np.eye(3))))
    spin = PAULI if spin is None else np.asarray(spin, dtype=complex)
    averaged = np.tensordot(tensor, spin, axes=(1, 0))
    return DipoleAverageReport(tensor, stderr, c, residual, averaged, samples)
