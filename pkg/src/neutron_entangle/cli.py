"""Command-line front end.

Exit codes: 0 success (including warnings), 1 invalid input, 2 a numerical
check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import SweepSpec, sweep
from .config import ConfigError, RunConfig
from .dynamics import run_protocol
from .entanglement import (
    fidelity,
    measure_witness,
    purity,
    reference_scattered_state,
    sample_conditioned_state,
    witness_expectation,
)
from .feasibility import feasibility_report
from . import verify as verify_suites

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _header(cfg: RunConfig, seed: int) -> str:
    return f"# neutron-entangle {__version__}\n# config_hash: {cfg.config_hash()}\n# seed: {seed}\n"


def _write_csv(path: Path, header: str, columns, rows):
    buf = io.StringIO()
    buf.write(header)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    raw = cfg.raw
    if args.seed is not None:
        raw["output"]["seed"] = args.seed
    if args.engine is not None:
        if args.command == "sweep":
            raw["sweep"]["engine"] = args.engine
        else:
            raw["protocol"]["engine"] = args.engine
    if args.plot:
        raw["output"]["plot"] = True
    if args.out is not None:
        raw["output"]["dir"] = args.out
    return RunConfig.from_dict(raw)


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    pcfg = cfg.protocol()
    result = run_protocol(pcfg)
    rho = result.neutron_rho
    w = cfg.witness(rho)
    header = _header(cfg, cfg.seed) + "# neutron ordering: |n2 n1>, index 2*n2 + n1\n"
    _write_csv(
        out / "neutron_rho.csv",
        header,
        ["row", "col", "real", "imag"],
        [(i, j, repr(float(rho[i, j].real)), repr(float(rho[i, j].imag))) for i in range(4) for j in range(4)],
    )
    conditioned = sample_conditioned_state(result.final_state, result.basis)
    summary = [
        ("concurrence", result.concurrence),
        ("purity", purity(rho)),
        ("witness_expectation", witness_expectation(rho, w)),
        ("witness_alpha", w.alpha),
        ("witness_beta", w.beta),
        ("witness_phase", w.phase),
        ("fidelity_reference_state", fidelity(rho, reference_scattered_state())),
        ("fidelity_sample_conditioned", abs(np.vdot(reference_scattered_state(), conditioned)) ** 2),
    ]
    _write_csv(out / "summary.csv", header, ["key", "value"], [(k, repr(float(v))) for k, v in summary])
    _write_csv(
        out / "stage_log.csv",
        header,
        ["stage", "t_start", "t_end", "norm"],
        [(e["stage"], repr(e["t_start"]), repr(e["t_end"]), repr(e["norm"])) for e in result.stage_log],
    )
    print(f"concurrence = {result.concurrence:.10f}")
    print(f"witness Tr(W rho) = {summary[2][1]:+.6f} ({w.sign_convention} sign)")
    return EXIT_OK


def _sweep_series(cfg: RunConfig):
    s = cfg.raw["sweep"]
    if s["values"] is not None:
        values = tuple(float(v) for v in s["values"])
    else:
        values = tuple(np.linspace(float(s["lo"]), float(s["hi"]), int(s["points"])))
    N_values = s["N_values"] or [cfg.raw["protocol"]["N"]]
    for N in N_values:
        for variant in s["variants"]:
            engine = s["engine"]
            if variant != "A" and engine == "closed_form":
                engine = "sector_oracle"
            fixed = cfg.protocol(N=N, initial=dict(cfg.raw["protocol"]["initial"], variant=variant))
            spec = SweepSpec(s["variable"], values, fixed=fixed, engine=engine, quantity=s["quantity"])
            yield f"{variant}_N{N}", spec


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    try:
        series = list(_sweep_series(cfg))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [sweep] table: {exc}") from exc
    results = []
    for name, spec in series:
        res = sweep(spec, seed=cfg.seed)
        res.metadata["run_config_hash"] = cfg.config_hash()
        (out / f"sweep_{name}.csv").write_text(f"# neutron-entangle {__version__}\n" + res.to_csv())
        best = int(np.argmax(res.concurrences))
        print(f"{name}: {len(res.rows)} points, max concurrence {res.concurrences[best]:.6f} "
              f"at {spec.variable} = {res.values[best]:.6g}")
        results.append(res)
    if cfg.raw["output"]["plot"]:
        from .plotting import plot_sweeps

        plot_sweeps(results, out / "sweep.svg")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path | None = None) -> int:
    outcomes = verify_suites.run_all(cfg.raw["witness"]["sign_convention"])
    for o in outcomes:
        print(o.line())
    return EXIT_NUMERIC if any(o.status == "FAIL" for o in outcomes) else EXIT_OK


def cmd_feasibility(cfg: RunConfig, out: Path) -> int:
    report = feasibility_report(cfg.scenario())
    text = (
        _header(cfg, cfg.seed)
        + f"# dipole prefactor: {cfg.scenario().dipole_prefactor}\n"
        + report.text()
        + "\n\n[key-values]\n"
        + report.key_values()
        + "\n"
    )
    (out / "feasibility.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_witness(cfg: RunConfig, out: Path) -> int:
    rho = run_protocol(cfg.protocol()).neutron_rho
    w = cfg.witness(rho)
    shots = int(cfg.raw["witness"]["shots"])
    est = measure_witness(rho, w, shots, seed=cfg.seed)
    exact = witness_expectation(rho, w)
    rows = [
        ("estimate", repr(est.value)),
        ("stderr", repr(est.stderr)),
        ("exact", repr(exact)),
        ("shots_per_setting", str(shots)),
        ("alpha", repr(w.alpha)),
        ("beta", repr(w.beta)),
        ("phase", repr(w.phase)),
        ("sign_convention", w.sign_convention),
    ]
    rows += [(f"counts_{s}", " ".join(str(int(c)) for c in est.counts[s].ravel())) for s in est.counts]
    _write_csv(out / "witness.csv", _header(cfg, cfg.seed), ["key", "value"], rows)
    print(f"Tr(W rho) = {est.value:+.5f} +/- {est.stderr:.5f} (exact {exact:+.5f}, {shots} shots per setting)")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "feasibility": cmd_feasibility,
    "witness": cmd_witness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neutron-entangle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--engine", help="closed_form, sector_oracle or collective")
    common.add_argument("--plot", action="store_true", help="also render an SVG figure")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(RunConfig.load(args.config), args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(cfg.raw["output"]["dir"])
    if args.command != "verify":
        out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
