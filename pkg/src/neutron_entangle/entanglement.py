"""Two-neutron entanglement: reduced state, Wootters concurrence, the
closed-form concurrence for the one-magnon initial state, and a
three-setting entanglement witness.

Two-neutron states use the product basis ``|n2 n1>`` ordered
``|00>, |01>, |10>, |11>``, i.e. index ``2*n2 + n1``.  ``|01>`` therefore
means neutron 1 flipped and neutron 2 up.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import acos, pi, sqrt

import numpy as np

from .basis import CollectiveBasis, SectorBasis, build_collective_basis, embedding_matrix

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y).real  # sigma_y (x) sigma_y is real
PEAK_CONCURRENCE = 4 / (3 * sqrt(3))
RADICAND_TOL = 1e-9


def _neutron_index(n1: int, n2: int) -> int:
    return 2 * n2 + n1


def reduce_to_neutrons(state, basis) -> np.ndarray:
    """Trace out the sample, returning the 4x4 neutron density matrix."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (basis.dim,):
        raise ValueError(f"state of shape {psi.shape} does not match {basis.tag}")
    if isinstance(basis, CollectiveBasis):
        keys = [s[2] for s in basis.states]
        slots = [_neutron_index(s[0], s[1]) for s in basis.states]
    elif isinstance(basis, SectorBasis):
        N = basis.N
        keys = [tuple(x for x in c if x < N) for c in basis.configs]
        slots = [_neutron_index(int(N in c), int(N + 1 in c)) for c in basis.configs]
    else:
        raise TypeError(f"unsupported basis {type(basis).__name__}")
    rows = {k: i for i, k in enumerate(dict.fromkeys(keys))}
    M = np.zeros((len(rows), 4), dtype=complex)
    for amp, k, slot in zip(psi, keys, slots):
        M[rows[k], slot] += amp
    return M.T @ M.conj()


def check_density_matrix(rho, tol: float = 1e-12) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The square roots of the eigenvalues of ``rho (Y rho* Y)`` are obtained
    as singular values of ``X^T Y X`` with ``rho = X X^dagger``; this avoids
    taking square roots of round-off sized eigenvalues.
    """
    rho = check_density_matrix(rho, tol=1e-10)
    w, v = np.linalg.eigh(rho)
    X = v * np.sqrt(np.clip(w, 0.0, None))
    lams = np.linalg.svd(X.T @ YY @ X, compute_uv=False)
    lams = np.sort(lams)[::-1]
    return float(min(1.0, max(0.0, lams[0] - lams[1] - lams[2] - lams[3])))


# --- closed form for the one-magnon initial state -------------------------


@dataclass(frozen=True)
class ClosedFormParams:
    lam: float
    N: int
    B_z: float
    tau: float

    def __post_init__(self):
        if not self.lam > 0 or self.N < 2 or self.B_z < 0 or self.tau < 0:
            raise ValueError(f"invalid closed-form parameters {self}")


def phi_tilde(lam, N, B_z):
    """Half the splitting of the resonant pair; equals
    ``sqrt(B^2 - 2 B lam (N-1) + lam^2 (N+1)^2)``, written in the
    cancellation-free form ``sqrt((B - lam(N-1))^2 + 4 lam^2 N)``."""
    detuning = np.asarray(B_z, dtype=float) - lam * (N - 1)
    return np.sqrt(detuning**2 + 4 * lam**2 * N)


def _clamp_radicand(x, scale):
    x = np.asarray(x, dtype=float)
    if np.any(x < -RADICAND_TOL * scale):
        raise ValueError("negative radicand: parameters outside the closed-form domain")
    return np.clip(x, 0.0, None)


def closed_form_concurrence(lam, N=None, B_z=None, tau=None):
    """Concurrence after both scatterings for the one-magnon initial state.

    ``tau`` may be an array.  Returns a float for scalar input.
    """
    if isinstance(lam, ClosedFormParams):
        p = lam
        lam, N, B_z, tau = p.lam, p.N, p.B_z, p.tau
    tau = np.asarray(tau, dtype=float)
    phi = float(phi_tilde(lam, N, B_z))
    denom_shift = B_z + lam * (1 - N) + phi
    if phi <= 0 or denom_shift <= 1e-300:
        raise ZeroDivisionError("degenerate limit B_z + lam(1-N) + phi -> 0")
    s2 = np.sin(phi * tau) ** 2
    scale = phi**2
    first = _clamp_radicand(phi**2 + phi * (lam - lam * N + B_z) - 2 * lam**2 * N, scale)
    second = _clamp_radicand(phi**2 - 4 * lam**2 * N * s2, scale)
    c = 8 * sqrt(2) * N * lam**2 * s2 / (phi**3 * denom_shift) * np.sqrt(first * second)
    c = np.clip(c, 0.0, 1.0)
    return float(c) if c.ndim == 0 else c


def optimal_field(lam: float, N: int) -> float:
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    return lam * (N - 1)


def optimal_time(lam: float, N: int) -> float:
    if N < 2 or not lam > 0:
        raise ValueError(f"need N >= 2 and lam > 0, got N={N}, lam={lam}")
    return acos(-1.0 / 3.0) / (4 * lam * sqrt(N))


def optimal_field_concurrence(lam, N, tau):
    """Reduced form at ``B_z = lam (N-1)``: ``2|cos x| sin^2 x``, ``x = 2 lam sqrt(N) tau``."""
    x = 2 * lam * np.sqrt(N) * np.asarray(tau, dtype=float)
    return 2 * np.abs(np.cos(x)) * np.sin(x) ** 2


def zero_field_peak(N):
    """Peak concurrence at zero field, valid for N >= 4."""
    N = np.asarray(N, dtype=float)
    return 8 * N * (N - 1) / (N + 1) ** 3


def reference_scattered_state() -> np.ndarray:
    """Quoted two-neutron state at optimal parameters, ``mu|00> + nu|01> + xi|10>``."""
    mu = 1.0
    nu = sqrt(6) * np.exp(1j * 8 * pi / 9)
    xi = sqrt(2) * np.exp(-1j * pi / 2)
    psi = np.array([mu, nu, xi, 0.0], dtype=complex)
    return psi / np.linalg.norm(psi)


def sample_conditioned_state(state, basis) -> np.ndarray:
    """Two-neutron amplitudes ``<D_m, n2 n1|psi>`` with ``D_m`` the Dicke state
    carrying the remaining flips.

    This is the coherent neutron state obtained by dropping which sample
    state accompanies each neutron pattern; the true reduced state is mixed
    whenever different patterns leave the sample with different flip numbers.
    """
    psi = np.asarray(state, dtype=complex)
    if isinstance(basis, SectorBasis):
        cb = build_collective_basis(basis.N, min(2, basis.k_max, basis.N))
        psi = embedding_matrix(cb, basis).T @ psi
        basis = cb
    out = np.zeros(4, dtype=complex)
    for amp, (n1, n2, _) in zip(psi, basis.states):
        out[_neutron_index(n1, n2)] += amp
    return out


def fidelity(rho, psi) -> float:
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ np.asarray(rho) @ psi))


# --- witness ---------------------------------------------------------------

_BASES = {
    "z": np.array([[1, 0], [0, 1]], dtype=complex),
    "x": np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2),
    "y": np.array([[1, 1], [1j, -1j]], dtype=complex) / sqrt(2),
}
SETTINGS = ("z", "x", "y")


@dataclass(frozen=True)
class WitnessSpec:
    """Witness targeting ``alpha|01> + beta e^{i phase}|10>``.

    ``convention="paper"`` keeps the printed ``+alpha beta`` sign of the
    x/y block, ``"corrected"`` flips it.  A non-zero ``phase`` is realised by
    rotating the measurement axes of neutron 2 about z, so the witness is
    still measured with three local settings.
    """

    alpha: float = 1 / sqrt(2)
    beta: float = 1 / sqrt(2)
    sign_convention: str = "corrected"
    phase: float = 0.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("witness amplitudes must be non-negative")
        if abs(self.alpha**2 + self.beta**2 - 1) > 1e-9:
            raise ValueError("alpha^2 + beta^2 must equal 1")
        if self.sign_convention not in ("paper", "corrected"):
            raise ValueError(f"unknown sign convention {self.sign_convention!r}")

    @property
    def sign(self) -> int:
        return 1 if self.sign_convention == "paper" else -1

    def target(self) -> np.ndarray:
        return np.array([0, self.alpha, self.beta * np.exp(1j * self.phase), 0], dtype=complex)

    def outcome_weights(self) -> dict[str, np.ndarray]:
        """Weights of the joint outcomes ``(s2, s1)`` (0 = '+', 1 = '-') per setting."""
        ab = self.sign * self.alpha * self.beta
        return {
            "z": np.array([[self.alpha**2, 0], [0, self.beta**2]]),
            "x": np.array([[ab, 0], [0, ab]]),
            "y": np.array([[0, -ab], [-ab, 0]]),
        }

    def _rotation(self) -> np.ndarray:
        return np.diag([1.0, np.exp(1j * self.phase)])

    def setting_bases(self, setting: str) -> tuple[np.ndarray, np.ndarray]:
        """Eigenbases (columns '+', '-') for neutron 2 and neutron 1."""
        b = _BASES[setting]
        return self._rotation() @ b, b


def witness_matrix(w: WitnessSpec) -> np.ndarray:
    W = np.zeros((4, 4), dtype=complex)
    weights = w.outcome_weights()
    for setting in SETTINGS:
        b2, b1 = w.setting_bases(setting)
        for i in range(2):
            for j in range(2):
                if weights[setting][i, j] == 0:
                    continue
                v = np.kron(b2[:, i], b1[:, j])
                W += weights[setting][i, j] * np.outer(v, v.conj())
    return W


def witness_expectation(rho, w: WitnessSpec) -> float:
    return float(np.real(np.trace(witness_matrix(w) @ np.asarray(rho))))


def fit_witness(rho, sign_convention: str = "corrected") -> WitnessSpec:
    """Witness whose target matches the populations and coherence phase of ``rho``."""
    rho = np.asarray(rho)
    p01, p10 = rho[1, 1].real, rho[2, 2].real
    total = p01 + p10
    if total <= 0:
        return WitnessSpec(sign_convention=sign_convention)
    phase = float(np.angle(rho[2, 1]))
    if sign_convention == "paper":
        phase += pi
    return WitnessSpec(
        alpha=sqrt(p01 / total),
        beta=sqrt(p10 / total),
        sign_convention=sign_convention,
        phase=float(np.angle(np.exp(1j * phase))),
    )


def min_on_product_states(W, n: int = 10**5, seed: int = 0) -> float:
    """Smallest ``<a b|W|a b>`` over ``n`` Haar-random pure product states."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    b = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    psi = np.einsum("ni,nj->nij", a, b).reshape(n, 4)
    vals = np.einsum("ni,ij,nj->n", psi.conj(), W, psi).real
    return float(vals.min())


@dataclass(frozen=True)
class WitnessEstimate:
    value: float
    stderr: float
    shots_per_setting: int | None
    counts: dict[str, np.ndarray]

    @property
    def significance(self) -> float:
        """Number of standard errors below zero (positive when entanglement is certified)."""
        return -self.value / self.stderr if self.stderr > 0 else float("inf") * -np.sign(self.value)


def outcome_probabilities(rho, w: WitnessSpec, setting: str) -> np.ndarray:
    b2, b1 = w.setting_bases(setting)
    probs = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            v = np.kron(b2[:, i], b1[:, j])
            probs[i, j] = np.real(v.conj() @ rho @ v)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def measure_witness(rho, w: WitnessSpec, shots_per_setting: int | None, seed: int = 0) -> WitnessEstimate:
    """Estimate ``Tr(W rho)`` from simulated z-z, x-x and y-y outcome counts.

    ``shots_per_setting=None`` returns the exact expectation with zero error.
    """
    rho = np.asarray(rho, dtype=complex)
    weights = w.outcome_weights()
    if shots_per_setting is None:
        value = sum(
            float(np.sum(weights[s] * outcome_probabilities(rho, w, s))) for s in SETTINGS
        )
        return WitnessEstimate(value, 0.0, None, {})
    if shots_per_setting < 1:
        raise ValueError("shots_per_setting must be >= 1")
    rng = np.random.default_rng(seed)
    value, variance, counts = 0.0, 0.0, {}
    for s in SETTINGS:
        p = outcome_probabilities(rho, w, s).ravel()
        c = rng.multinomial(shots_per_setting, p)
        f = c / shots_per_setting
        wt = weights[s].ravel()
        mean = float(wt @ f)
        value += mean
        variance += (float(wt**2 @ f) - mean**2) / shots_per_setting
        counts[s] = c.reshape(2, 2)
    return WitnessEstimate(value, sqrt(max(variance, 0.0)), shots_per_setting, counts)
