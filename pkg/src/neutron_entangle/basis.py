"""Hilbert-space bases for N sample spins plus two neutron spins.

Site indices ``0..N-1`` are sample spins, ``N`` is neutron 1 and ``N+1`` is
neutron 2.  A configuration lists the flipped (spin-down, ``|1>``) sites.
Every Hamiltonian in the package conserves the total number of flips, so the
exact state space only needs configurations with at most two flips.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb, sqrt

import numpy as np

SpinConfiguration = tuple[int, ...]


@dataclass(frozen=True)
class SectorBasis:
    """All configurations with ``<= k_max`` flips among the N+2 spins.

    Ordered by flip count, then lexicographically.
    """

    N: int
    k_max: int
    configs: tuple[SpinConfiguration, ...]
    index_map: dict[SpinConfiguration, int] = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.configs)

    @property
    def tag(self) -> str:
        return f"sector(N={self.N},k_max={self.k_max})"

    def index(self, config) -> int:
        return self.index_map[tuple(config)]

    def neutron_bits(self) -> tuple[np.ndarray, np.ndarray]:
        """Occupation (0 = up, 1 = flipped) of neutron 1 and neutron 2 per config."""
        n1 = np.array([self.N in c for c in self.configs], dtype=int)
        n2 = np.array([self.N + 1 in c for c in self.configs], dtype=int)
        return n1, n2

    def sample_flips(self) -> np.ndarray:
        return np.array([sum(1 for s in c if s < self.N) for c in self.configs], dtype=int)


@dataclass(frozen=True)
class CollectiveBasis:
    """Neutron 1 x neutron 2 x symmetric (Dicke) magnon number of the sample.

    ``states`` holds ``(n1, n2, m)`` tuples; the Dicke state ``|m>`` is the
    normalised sum over all m-flip sample configurations.
    """

    N: int
    m_max: int
    states: tuple[tuple[int, int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def tag(self) -> str:
        return f"collective(N={self.N},m_max={self.m_max})"

    def index(self, n1: int, n2: int, m: int) -> int:
        return self.states.index((n1, n2, m))


def build_sector_basis(N: int, k_max: int) -> SectorBasis:
    if N < 2:
        raise ValueError(f"need at least two sample spins, got N={N}")
    if k_max not in (1, 2):
        raise ValueError(f"k_max must be 1 or 2, got {k_max}")
    configs = [c for k in range(k_max + 1) for c in combinations(range(N + 2), k)]
    return SectorBasis(
        N=N,
        k_max=k_max,
        configs=tuple(configs),
        index_map={c: i for i, c in enumerate(configs)},
    )


def build_collective_basis(N: int, m_max: int) -> CollectiveBasis:
    if N < 1 or m_max > N:
        raise ValueError(f"magnon number m_max={m_max} cannot exceed N={N}")
    if N < 2:
        raise ValueError(f"need at least two sample spins, got N={N}")
    if m_max not in (0, 1, 2):
        raise ValueError(f"m_max must be 0, 1 or 2, got {m_max}")
    states = tuple(
        (n1, n2, m) for n1 in (0, 1) for n2 in (0, 1) for m in range(m_max + 1)
    )
    return CollectiveBasis(N=N, m_max=m_max, states=states)


def embedding_matrix(cb: CollectiveBasis, sb: SectorBasis) -> np.ndarray:
    """Isometry columns mapping collective states into the sector basis.

    Columns of collective states whose flip count exceeds ``sb.k_max`` are zero.
    """
    if cb.N != sb.N:
        raise ValueError(f"basis mismatch: {cb.tag} vs {sb.tag}")
    if cb.m_max > sb.k_max:
        raise ValueError(f"m_max={cb.m_max} exceeds k_max={sb.k_max}")
    N = sb.N
    E = np.zeros((sb.dim, cb.dim))
    for col, (n1, n2, m) in enumerate(cb.states):
        if n1 + n2 + m > sb.k_max:
            continue
        neutrons = ((N,) if n1 else ()) + ((N + 1,) if n2 else ())
        amp = 1.0 / sqrt(comb(N, m))
        for sites in combinations(range(N), m):
            E[sb.index(sites + neutrons), col] = amp
    return E


def embed_collective_in_sector(v, cb: CollectiveBasis, sb: SectorBasis) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (cb.dim,):
        raise ValueError(f"vector of shape {v.shape} does not match {cb.tag}")
    E = embedding_matrix(cb, sb)
    lost = ~E.any(axis=0)
    if np.any(np.abs(v[lost]) > 0):
        raise ValueError("vector has weight outside the sector basis flip limit")
    return E @ v
