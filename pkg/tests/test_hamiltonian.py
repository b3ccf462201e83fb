import numpy as np
import pytest

from neutron_entangle.basis import build_collective_basis, build_sector_basis, embedding_matrix
from neutron_entangle.hamiltonian import (
    CouplingParams,
    LatticeSpec,
    build_H0,
    build_Hint,
    dipole_average_check,
)

from oracles import full_hamiltonians


def _sector_to_full(sb):
    """Columns: full-space basis vectors (neutron 2, neutron 1, sample 0..N-1) of each config."""
    N = sb.N
    n = N + 2
    P = np.zeros((2**n, sb.dim))
    for a, conf in enumerate(sb.configs):
        bits = [0] * n
        for s in conf:
            bits[s + 2 if s < N else (1 if s == N else 0)] = 1
        P[int("".join(map(str, bits)), 2), a] = 1
    return P


@pytest.mark.parametrize("N", [2, 3, 4, 5])
@pytest.mark.parametrize("periodic", [True, False])
def test_sector_matrices_match_full_space(N, periodic):
    p = CouplingParams(J=0.37, lam=0.8, B_z=1.3, V0=0.4)
    lattice = LatticeSpec("chain_periodic" if periodic else "chain_open", N)
    sb = build_sector_basis(N, 2)
    P = _sector_to_full(sb)
    H0f, H1f, H2f = full_hamiltonians(N, p.J, p.lam, p.B_z, p.V0, periodic)
    np.testing.assert_allclose(build_H0(sb, lattice, p).matrix, P.T @ H0f @ P, atol=1e-12)
    np.testing.assert_allclose(build_Hint(sb, 1, p).matrix, P.T @ H1f @ P, atol=1e-12)
    np.testing.assert_allclose(build_Hint(sb, 2, p).matrix, P.T @ H2f @ P, atol=1e-12)


def test_all_up_diagonal_entries():
    sb = build_sector_basis(4, 1)
    lattice = LatticeSpec("chain_periodic", 4)
    a = sb.index(())
    J = 0.25
    assert build_H0(sb, lattice, CouplingParams(J=J)).matrix[a, a] == pytest.approx(-4 * J)
    H = build_H0(sb, lattice, CouplingParams(J=J, B_z=0.7)).matrix
    assert H[a, a] == pytest.approx(-4 * J + 4 * 0.7)


@pytest.mark.parametrize("N", range(2, 11))
@pytest.mark.parametrize("kind", ["chain_periodic", "chain_open"])
def test_uniform_magnon_is_H0_eigenvector(N, kind):
    sb = build_sector_basis(N, 1)
    H = build_H0(sb, LatticeSpec(kind, N), CouplingParams(B_z=0.9)).matrix
    v = np.zeros(sb.dim)
    for j in range(N):
        v[sb.index((j,))] = 1 / np.sqrt(N)
    Hv = H @ v
    E = v @ Hv
    np.testing.assert_allclose(Hv, E * v, atol=1e-12)


@pytest.mark.parametrize("N", range(2, 9))
@pytest.mark.parametrize("m", [1, 2])
def test_flip_flop_element_and_diagonal(N, m):
    lam = 1.3
    p = CouplingParams(lam=lam, V0=0.2)
    sb = build_sector_basis(N, 1)
    H = build_Hint(sb, m, p).matrix
    magnon = np.zeros(sb.dim)
    for j in range(N):
        magnon[sb.index((j,))] = 1 / np.sqrt(N)
    flipped = np.zeros(sb.dim)
    flipped[sb.index((N + m - 1,))] = 1
    assert flipped @ H @ magnon == pytest.approx(2 * lam * np.sqrt(N))
    a = sb.index(())
    assert H[a, a] == pytest.approx(0.2 + lam * N)


def test_scattering_hamiltonians_do_not_commute():
    sb = build_sector_basis(4, 2)
    p = CouplingParams()
    H1, H2 = build_Hint(sb, 1, p).matrix, build_Hint(sb, 2, p).matrix
    comm = H1 @ H2 - H2 @ H1
    two_flip = np.array([len(c) == 2 for c in sb.configs])
    assert np.linalg.norm(comm[np.ix_(two_flip, two_flip)]) > 1.0


@pytest.mark.parametrize("builder", ["H0", "H1", "H2"])
def test_hermitian_and_flip_conserving(builder):
    sb = build_sector_basis(5, 2)
    p = CouplingParams(J=0.3, B_z=2.0, V0=1.0)
    H = {
        "H0": lambda: build_H0(sb, LatticeSpec("chain_periodic", 5), p),
        "H1": lambda: build_Hint(sb, 1, p),
        "H2": lambda: build_Hint(sb, 2, p),
    }[builder]()
    assert H.is_hermitian()
    flips = np.array([len(c) for c in sb.configs])
    mask = flips[:, None] != flips[None, :]
    assert np.all(H.matrix[mask] == 0)


@pytest.mark.parametrize("N", [3, 4, 7])
@pytest.mark.parametrize("kind", ["chain_periodic", "chain_open"])
def test_collective_matches_sector_on_embedded_vectors(N, kind, rng):
    p = CouplingParams(J=0.4, lam=0.9, B_z=1.7, V0=0.3)
    lattice = LatticeSpec(kind, N)
    sb, cb = build_sector_basis(N, 2), build_collective_basis(N, 2)
    E = embedding_matrix(cb, sb)
    ok = E.any(axis=0)
    for Hs, Hc in [
        (build_H0(sb, lattice, p), build_H0(cb, lattice, p)),
        (build_Hint(sb, 1, p), build_Hint(cb, 1, p)),
        (build_Hint(sb, 2, p), build_Hint(cb, 2, p)),
    ]:
        v = np.zeros(cb.dim, dtype=complex)
        v[ok] = rng.normal(size=ok.sum()) + 1j * rng.normal(size=ok.sum())
        # flip conservation keeps Hc v inside the embeddable states
        np.testing.assert_allclose(E @ (Hc.matrix @ v), Hs.matrix @ (E @ v), atol=1e-10)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        build_H0(build_sector_basis(4, 1), LatticeSpec("chain_periodic", 5), CouplingParams())
    with pytest.raises(ValueError):
        build_Hint(build_sector_basis(4, 1), 3, CouplingParams())


def test_coupling_validation():
    with pytest.raises(ValueError):
        CouplingParams(J=-1)
    with pytest.raises(ValueError):
        CouplingParams(B_z=-0.1)


class TestDipoleAverage:
    def test_two_thirds_at_one_million_samples(self):
        rep = dipole_average_check(10**6, seed=3)
        assert rep.c == pytest.approx(2 / 3, abs=0.005)
        assert rep.residual_max < 0.01
        assert rep.within_sigma()

    def test_zero_spin_gives_zero(self):
        rep = dipole_average_check(10**4, seed=0, spin=np.zeros((3, 2, 2)))
        assert np.all(rep.averaged == 0)

    def test_seeds_agree_statistically(self):
        a, b = dipole_average_check(10**5, seed=1), dipole_average_check(10**5, seed=2)
        combined = np.sqrt(a.stderr**2 + b.stderr**2)
        assert np.all(np.abs(a.tensor - b.tensor) <= 3 * combined + 1e-15)

    def test_off_component_residuals_shrink(self):
        rep = dipole_average_check(10**5, seed=5)
        assert rep.residual_max < 3 / np.sqrt(rep.samples)

    def test_applied_to_pauli_is_proportional(self):
        rep = dipole_average_check(10**6, seed=4)
        from neutron_entangle.hamiltonian import PAULI

        np.testing.assert_allclose(rep.averaged, rep.c * PAULI, atol=0.01)

    def test_requires_enough_samples(self):
        with pytest.raises(ValueError):
            dipole_average_check(100)
