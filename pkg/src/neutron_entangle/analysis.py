"""Parameter sweeps, peak search, zero-field scaling and tolerance widths."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field
from math import pi, sqrt

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import __version__
from .dynamics import CouplingParams, InitialStateSpec, LatticeSpec, ProtocolConfig, ProtocolPropagator
from .entanglement import (
    PEAK_CONCURRENCE,
    closed_form_concurrence,
    optimal_field,
    optimal_time,
    phi_tilde,
)

SWEEP_ENGINES = ("closed_form", "sector_oracle", "collective")
SCAN_POINTS = 2001


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep.

    ``quantity="concurrence"`` evaluates the concurrence at ``fixed.tau``;
    ``quantity="peak"`` evaluates the peak concurrence over one oscillation
    period in tau.
    """

    variable: str
    values: tuple[float, ...]
    fixed: ProtocolConfig = field(default_factory=ProtocolConfig)
    engine: str = "closed_form"
    quantity: str = "concurrence"

    def __post_init__(self):
        if self.variable not in ("tau", "B_z", "N"):
            raise ValueError(f"cannot sweep {self.variable!r}; choose tau, B_z or N")
        if not self.values:
            raise ValueError("sweep range is empty")
        if self.engine not in SWEEP_ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "closed_form" and self.fixed.init.variant != "A":
            raise ValueError("the closed form only covers initial-state variant A")
        if self.quantity not in ("concurrence", "peak"):
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if self.quantity == "peak" and self.variable == "tau":
            raise ValueError("peak concurrence is already maximised over tau")
        object.__setattr__(self, "values", tuple(sorted(float(v) for v in self.values)))

    @classmethod
    def linspace(cls, variable, lo, hi, points, **kw) -> "SweepSpec":
        return cls(variable, tuple(np.linspace(lo, hi, points)), **kw)

    def config_hash(self) -> str:
        payload = json.dumps(_jsonable(asdict(self)), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[tuple[float, float, str, float]]  # value, concurrence, engine, wall time [s]
    metadata: dict

    @property
    def values(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def concurrences(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def to_csv(self) -> str:
        """CSV text with '#' metadata lines; wall times are left out so output is reproducible."""
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {self.metadata[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["variable", "value", "concurrence", "engine", "config_hash"])
        h = self.metadata["config_hash"]
        for value, c, engine, _ in self.rows:
            writer.writerow([self.spec.variable, repr(float(value)), repr(float(c)), engine, h])
        return buf.getvalue()


def _config_for(fixed: ProtocolConfig, variable: str, value: float) -> ProtocolConfig:
    if variable == "tau":
        return fixed.with_(tau=value)
    if variable == "B_z":
        p = fixed.params
        return fixed.with_(params=CouplingParams(J=p.J, lam=p.lam, B_z=value, V0=p.V0))
    N = int(round(value))
    return fixed.with_(N=N, lattice=LatticeSpec(fixed.lattice.kind, N))


def concurrence_function(cfg: ProtocolConfig, engine: str):
    """Return ``f(tau)`` giving the concurrence for ``cfg`` with the given engine."""
    if engine == "closed_form":
        lam, N, B = cfg.params.lam, cfg.N, cfg.params.B_z
        return lambda tau: closed_form_concurrence(lam, N, B, tau)
    prop = ProtocolPropagator(cfg.with_(engine=engine))
    return lambda tau: prop.concurrence(tau=float(tau))


def _evaluate(spec: SweepSpec, value: float) -> float:
    cfg = _config_for(spec.fixed, spec.variable, value)
    if spec.quantity == "peak":
        return peak_concurrence(cfg.N, cfg.params.lam, cfg.params.B_z, spec.engine, base=cfg)[0]
    f = concurrence_function(cfg, spec.engine)
    return float(f(cfg.tau))


def sweep(spec: SweepSpec, seed: int | None = None) -> SweepResult:
    rows = []
    for value in spec.values:
        t0 = time.perf_counter()
        c = _evaluate(spec, value)
        rows.append((value, c, spec.engine, time.perf_counter() - t0))
    metadata = {
        "config_hash": spec.config_hash(),
        "seed": seed,
        "version": __version__,
        "variable": spec.variable,
        "quantity": spec.quantity,
        "variant": spec.fixed.init.variant,
        "N": spec.fixed.N,
    }
    return SweepResult(spec, rows, metadata)


def oscillation_period(lam: float, N: int, B_z: float) -> float:
    """Period in tau of the one-magnon concurrence, ``pi / phi_tilde``."""
    return pi / float(phi_tilde(lam, N, B_z))


def peak_concurrence(
    N: int,
    lam: float = 1.0,
    B_z: float = 0.0,
    engine: str = "closed_form",
    base: ProtocolConfig | None = None,
    window: float | None = None,
) -> tuple[float, float]:
    """Global maximum of the concurrence over ``tau`` in one oscillation period.

    Dense scan over ``SCAN_POINTS`` points followed by bounded Brent
    (golden-section with parabolic steps) refinement to ``|dtau| < 1e-10``.
    Returns ``(C_p, tau_at_peak)``.
    """
    if base is None:
        base = ProtocolConfig(N=N, params=CouplingParams(lam=lam, B_z=B_z))
    f = concurrence_function(base, engine)
    period = window or oscillation_period(lam, N, B_z)
    grid = np.linspace(0.0, period, SCAN_POINTS)
    if engine == "closed_form":
        scan = f(grid)
    else:
        scan = np.array([f(t) for t in grid])
    k = int(np.argmax(scan))
    step = grid[1] - grid[0]
    lo, hi = max(0.0, grid[k] - step), min(period, grid[k] + step)
    res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if not res.success:
        raise RuntimeError(f"peak refinement did not converge: {res.message}")
    best_tau, best = (res.x, -res.fun) if -res.fun >= scan[k] else (grid[k], scan[k])
    return float(best), float(best_tau)


def zero_field_scaling_fit(N_list, lam: float = 1.0) -> float:
    """Least-squares slope of log C_p against log N at zero field."""
    N_list = sorted(set(int(n) for n in N_list))
    if len(N_list) < 4 or min(N_list) < 4:
        raise ValueError("need at least four values of N, all >= 4")
    peaks = [peak_concurrence(N, lam, 0.0)[0] for N in N_list]
    slope, _ = np.polyfit(np.log(N_list), np.log(peaks), 1)
    return float(slope)


@dataclass(frozen=True)
class ToleranceWidths:
    """Half-widths of the intervals around the optimum where C >= floor.

    ``delta_tau`` is taken at ``B_z = lam (N-1)``, ``delta_B`` at ``tau = tau*``.
    """

    delta_tau: float
    delta_B: float
    tau_interval: tuple[float, float]
    B_interval: tuple[float, float]
    floor: float


def _crossing(f, a, b, scale):
    return brentq(f, a, b, xtol=1e-13 * max(1.0, abs(scale)), maxiter=500)


def tolerance_widths(N: int, lam: float = 1.0, floor: float = 0.7) -> ToleranceWidths:
    if not floor < PEAK_CONCURRENCE:
        raise ValueError(f"floor {floor} is not below the peak {PEAK_CONCURRENCE:.6f}")
    B_star, tau_star = optimal_field(lam, N), optimal_time(lam, N)

    def g_tau(t):
        return closed_form_concurrence(lam, N, B_star, t) - floor

    # zeros of 2|cos x| sin^2 x bracket the optimum at x = 0 and x = pi/2
    tau_zero = pi / (4 * lam * sqrt(N))
    tau_lo = _crossing(g_tau, 0.0, tau_star, tau_star)
    tau_hi = _crossing(g_tau, tau_star, tau_zero, tau_star)

    def g_B(B):
        return closed_form_concurrence(lam, N, B, tau_star) - floor

    step = lam * sqrt(N) / 8
    hi = B_star
    while g_B(hi + step) >= 0:
        hi += step
    B_hi = _crossing(g_B, hi, hi + step, B_star)
    lo = B_star
    while lo - step > 0 and g_B(lo - step) >= 0:
        lo -= step
    if lo - step <= 0 and g_B(0.0) >= 0:
        B_lo = 0.0
    else:
        B_lo = _crossing(g_B, max(0.0, lo - step), lo, B_star)
    return ToleranceWidths(
        delta_tau=(tau_hi - tau_lo) / 2,
        delta_B=(B_hi - B_lo) / 2,
        tau_interval=(tau_lo, tau_hi),
        B_interval=(B_lo, B_hi),
        floor=floor,
    )


QUOTED_DELTA_TAU_COEFFICIENT = 1e-3  # quoted: delta_tau ~ 1e-3 / (lam sqrt(N))


def tolerance_report(N_list=(4, 16, 64), lam: float = 1.0, floor: float = 0.7) -> list[str]:
    lines = [
        f"# tolerance half-widths about the optimum, floor C >= {floor}",
        "# delta_tau at B_z = lam(N-1); delta_B at tau = tau*",
    ]
    for N in N_list:
        w = tolerance_widths(N, lam, floor)
        coeff = w.delta_tau * lam * sqrt(N)
        flag = "AGREES" if abs(np.log10(coeff / QUOTED_DELTA_TAU_COEFFICIENT)) <= 1 else "DISAGREES"
        lines.append(
            f"N={N} delta_tau={w.delta_tau:.6g} delta_tau*lam*sqrt(N)={coeff:.6g} "
            f"(quoted {QUOTED_DELTA_TAU_COEFFICIENT:g}: {flag}) "
            f"delta_B={w.delta_B:.6g} delta_B/(lam*sqrt(N))={w.delta_B / (lam * sqrt(N)):.6g}"
        )
    return lines
