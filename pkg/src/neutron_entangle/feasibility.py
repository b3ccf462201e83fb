"""SI-unit estimates of the experimental requirements.

Dynamics elsewhere in the package runs in natural units with hbar = mu_B = 1
and the coupling ``lam`` set to one.  Here energies are converted with the
SI coupling ``|lam|`` (J), fields with ``mu_B`` (J/T) and times with hbar.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import acos, log10, pi, sqrt

import scipy.constants as sc

from .analysis import tolerance_widths
from .entanglement import optimal_time

_pc = sc.physical_constants


@dataclass(frozen=True)
class PhysicalConstants:
    # CODATA values as shipped with scipy.constants.
    g_n: float = _pc["neutron g factor"][0]  # negative
    mu_n: float = _pc["nuclear magneton"][0]  # J/T
    g_e: float = _pc["electron g factor"][0]  # negative
    mu_B: float = _pc["Bohr magneton"][0]  # J/T
    mu_0: float = sc.mu_0  # T m / A
    hbar: float = sc.hbar  # J s
    m_n: float = sc.m_n  # kg


CODATA = PhysicalConstants()


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str

    def _same(self, other: "Quantity"):
        if not isinstance(other, Quantity) or other.unit != self.unit:
            raise TypeError(f"unit mismatch: {self.unit!r} vs {getattr(other, 'unit', other)!r}")

    def __add__(self, other):
        self._same(other)
        return Quantity(self.value + other.value, self.unit)

    def __sub__(self, other):
        self._same(other)
        return Quantity(self.value - other.value, self.unit)

    def __lt__(self, other):
        self._same(other)
        return self.value < other.value

    def __gt__(self, other):
        self._same(other)
        return self.value > other.value

    def ratio(self, other: "Quantity") -> float:
        self._same(other)
        return self.value / other.value

    def __str__(self):
        return f"{self.value:.4g} {self.unit}".rstrip()


@dataclass(frozen=True)
class ExperimentScenario:
    """Defaults follow the ultra-cold neutron source example.

    ``N=None`` means: choose N so that the transit length ``v tau*`` equals
    ``sample_length``.
    """

    a0: float = 1e-10
    N: float | None = None
    v: float = 7.0
    sample_length: float = 0.1
    flight_path: float = 1.0
    flux: float = 1e8
    sample_area: float = 1e-2
    T1: float = 1.0
    T2: float = 1e-5
    dipole_prefactor: str = "si"

    def __post_init__(self):
        for name in ("a0", "v", "sample_length", "flight_path", "flux", "sample_area", "T1", "T2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.N is not None and not self.N > 0:
            raise ValueError("N must be positive")
        if self.dipole_prefactor not in ("si", "printed"):
            raise ValueError(f"dipole_prefactor must be 'si' or 'printed', got {self.dipole_prefactor!r}")


def _dipole_constant(c: PhysicalConstants, prefactor: str) -> float:
    """``-g_n mu_n g_e mu_B mu_0`` in J m^3, with the SI dipole 1/(4 pi) unless ``printed``."""
    k = -c.g_n * c.mu_n * c.g_e * c.mu_B * c.mu_0
    return k / (4 * pi) if prefactor == "si" else k


def lambda_si(a0: float, N: float, consts: PhysicalConstants = CODATA, dipole_prefactor: str = "si") -> Quantity:
    """Neutron-sample coupling ``-g_n mu_n g_e mu_B mu_0 / D^3`` with ``D^3 = N a0^3``.

    Both g-factors are negative in the CODATA sign convention, so the
    coupling is negative.
    """
    if not (a0 > 0 and N > 0):
        raise ValueError("a0 and N must be positive")
    return Quantity(_dipole_constant(consts, dipole_prefactor) / (N * a0**3), "J")


def sample_size_for_length(a0, length, v, consts=CODATA, dipole_prefactor="si") -> float:
    """N such that the transit length ``v tau*`` equals ``length``.

    ``tau* = hbar acos(-1/3) / (4 |lam| sqrt(N))`` and ``|lam| = k / (N a0^3)``
    give ``tau* = hbar acos(-1/3) sqrt(N) a0^3 / (4 k)``.
    """
    k = abs(_dipole_constant(consts, dipole_prefactor))
    tau = length / v
    return (4 * k * tau / (consts.hbar * acos(-1 / 3) * a0**3)) ** 2


def lattice_constant_for_field(B_tesla, consts=CODATA, dipole_prefactor="si") -> float:
    """a0 for which the large-N optimal field ``|lam| N / mu_B`` equals ``B_tesla``."""
    k = abs(_dipole_constant(consts, dipole_prefactor))
    return (k / (consts.mu_B * B_tesla)) ** (1 / 3)


def scenario_N(s: ExperimentScenario, consts=CODATA) -> float:
    if s.N is not None:
        return float(s.N)
    return sample_size_for_length(s.a0, s.sample_length, s.v, consts, s.dipole_prefactor)


def optimal_field_time_si(s: ExperimentScenario, consts: PhysicalConstants = CODATA) -> dict[str, Quantity]:
    N = scenario_N(s, consts)
    lam = abs(lambda_si(s.a0, N, consts, s.dipole_prefactor).value)
    B_energy = lam * (N - 1)
    tau = consts.hbar * acos(-1 / 3) / (4 * lam * sqrt(N))
    return {
        "N": Quantity(N, ""),
        "lambda": Quantity(-lam, "J"),
        "B_star": Quantity(B_energy / consts.mu_B, "T"),
        "tau_star": Quantity(tau, "s"),
        "transit_length": Quantity(s.v * tau, "m"),
        "sample_edge": Quantity((N * s.a0**3) ** (1 / 3), "m"),
    }


def to_natural(s: ExperimentScenario, B_tesla: float, tau_s: float, consts=CODATA) -> tuple[float, float]:
    """Field and time in natural units where the coupling equals one."""
    N = scenario_N(s, consts)
    lam = abs(lambda_si(s.a0, N, consts, s.dipole_prefactor).value)
    return B_tesla * consts.mu_B / lam, tau_s * lam / consts.hbar


def power_law_coefficients(consts=CODATA, dipole_prefactor="si") -> dict[str, float]:
    """Prefactors in ``B* = c_B (a0/m)^-3 T`` and ``tau* = c_tau (a0/m)^3 N^(1/2) s``."""
    k = abs(_dipole_constant(consts, dipole_prefactor))
    return {
        "B_star_coefficient": k / consts.mu_B,
        "tau_star_coefficient": consts.hbar * acos(-1 / 3) / (4 * k),
    }


def fractional_tolerances(s: ExperimentScenario, floor: float = 0.7, consts=CODATA) -> dict[str, float]:
    """Allowed fractional spreads of field and velocity.

    The widths in natural units scale exactly as ``lam sqrt(N)`` (field) and
    ``1/(lam sqrt(N))`` (time), so they are evaluated at a reference N and
    rescaled.  ``dv/v = dtau/tau*`` because ``tau = D/v``.
    """
    N = scenario_N(s, consts)
    ref_N = 256
    w = tolerance_widths(ref_N, 1.0, floor)
    dB_coeff = w.delta_B / sqrt(ref_N)
    return {
        "dB_over_B": dB_coeff * sqrt(N) / (N - 1),
        "dv_over_v": w.delta_tau / optimal_time(1.0, ref_N),
    }


def timing_budget(s: ExperimentScenario) -> dict:
    flight = Quantity(s.flight_path / s.v, "s")
    interval = Quantity(1.0 / (s.flux * s.sample_area), "s")
    T1, T2 = Quantity(s.T1, "s"), Quantity(s.T2, "s")
    return {
        "flight_time": flight,
        "T1": T1,
        "T1_ok": T1 > flight,
        "T1_margin": T1.ratio(flight),
        "scattering_interval": interval,
        "T2": T2,
        "T2_ok": T2 > interval,
        "T2_margin": T2.ratio(interval),
    }


def coherence_condition(s: ExperimentScenario, consts: PhysicalConstants = CODATA) -> dict:
    """Momentum and velocity spread allowed by a coherence length equal to the sample length."""
    dp = consts.hbar / s.sample_length
    return {
        "delta_p": Quantity(dp, "kg m/s"),
        "dv_over_v": Quantity(dp / (consts.m_n * s.v), ""),
    }


def decade_status(ours: float, quoted: float) -> str:
    """AGREES when the nearest power of ten of ``ours`` is within one decade of ``quoted``."""
    return "AGREES" if abs(round(log10(ours)) - log10(quoted)) <= 1 else "DISAGREES"


@dataclass
class FeasibilityReport:
    scenario: ExperimentScenario
    entries: list[tuple[str, float, str, float | None, str]] = field(default_factory=list)

    def add(self, key, value, unit="", quoted=None):
        status = "" if quoted is None else decade_status(value, quoted)
        self.entries.append((key, float(value), unit, quoted, status))

    def add_window(self, key, value, unit, lo, hi):
        status = "AGREES" if lo <= value <= hi else "DISAGREES"
        self.entries.append((key, float(value), unit, None, f"{status} (window {lo:g}-{hi:g} {unit})"))

    def status(self, key) -> str:
        return next(e[4].split()[0] for e in self.entries if e[0] == key)

    def value(self, key) -> float:
        return next(e[1] for e in self.entries if e[0] == key)

    def text(self) -> str:
        lines = ["Feasibility estimate (SI units)", ""]
        for key, value, unit, quoted, status in self.entries:
            line = f"  {key:<28s} {value:12.4g} {unit}"
            if quoted is not None:
                line += f"   quoted ~{quoted:g}   ratio {value / quoted:.3g}   {status}"
            elif status:
                line += f"   {status}"
            lines.append(line)
        lines.append("")
        lines.append(
            "Candidate sample materials: phosphorus-doped silicon, N@C60 "
            "(long T1, T2 at low temperature)."
        )
        return "\n".join(lines)

    def key_values(self) -> str:
        out = []
        for key, value, unit, quoted, status in self.entries:
            out.append(f"{key}={value!r}")
            if quoted is not None:
                out.append(f"{key}.quoted={quoted!r}")
            if status:
                out.append(f"{key}.status={status.split()[0]}")
        return "\n".join(out)


def feasibility_report(s: ExperimentScenario | None = None, consts: PhysicalConstants = CODATA) -> FeasibilityReport:
    s = s or ExperimentScenario()
    r = FeasibilityReport(s)
    opt = optimal_field_time_si(s, consts)
    coeffs = power_law_coefficients(consts, s.dipole_prefactor)
    r.add("a0", s.a0, "m", quoted=1e-10)
    r.add("N", opt["N"].value, "", quoted=1e14)
    r.add("lambda", opt["lambda"].value, "J")
    r.add("B_star", opt["B_star"].value, "T", quoted=1e-2)
    r.add("tau_star", opt["tau_star"].value, "s")
    r.add("transit_length", opt["transit_length"].value, "m")
    r.add("sample_edge", opt["sample_edge"].value, "m")
    r.add("a0_for_B_1e-2_T", lattice_constant_for_field(1e-2, consts, s.dipole_prefactor), "m", quoted=1e-10)
    r.add("B_star_coefficient", coeffs["B_star_coefficient"], "T m^3", quoted=1e-32)
    # quoted with exponent (a0/m)^-3; dimensional analysis gives (a0/m)^+3
    r.add("tau_star_coefficient", coeffs["tau_star_coefficient"], "s m^-3", quoted=1e21)
    tb = timing_budget(s)
    r.add_window("flight_time", tb["flight_time"].value, "s", 1e-2, 1.0)
    r.add("T1_required_margin", tb["T1_margin"], "")
    r.add("T2_required", tb["scattering_interval"].value, "s", quoted=1e-6)
    r.add("T2_margin", tb["T2_margin"], "")
    coh = coherence_condition(s, consts)
    r.add("delta_p", coh["delta_p"].value, "kg m/s")
    r.add("velocity_precision", coh["dv_over_v"].value, "", quoted=1e-6)
    tol = fractional_tolerances(s, consts=consts)
    r.add("dB_over_B_star", tol["dB_over_B"], "", quoted=1e-9)
    r.add("dv_over_v_tolerance", tol["dv_over_v"], "", quoted=1e-1)
    return r
