"""Command-line interface.

Subcommands reproduce the reference trajectories as CSV data files, run
Fisher-information analyses, and drive the Monte-Carlo covariance studies,
all from JSON config files.  Every run writes its data outputs first and a
manifest (command, resolved config, version, seed, output list, duration)
last.  Exit codes: 0 success, 2 config error, 3 singular information
matrix, 4 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analytic, dynamics, estimation, fisher, params

CSV_FMT = "%.17g"


def _fmt(x: float) -> str:
    return CSV_FMT % x


def _load_params(args, fallback) -> params.ProtocolParams:
    if args.config is None:
        p = fallback()
    else:
        text = Path(args.config).read_text(encoding="utf-8")
        p = params.parse_config(text)
    overrides = {}
    if getattr(args, "nmax", None) is not None:
        overrides.setdefault("run", {})["n_max"] = args.nmax
    if getattr(args, "seed", None) is not None:
        overrides.setdefault("run", {})["seed"] = args.seed
    if overrides:
        cfg = params.serialize_config(p)
        params._deep_update(cfg, overrides)
        p = params.parse_config(cfg)
    return p


def _parse_times(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        grid = np.linspace(float(start), float(stop), int(count))
    except ValueError as exc:
        raise params.ConfigError("--times", f"expected start:stop:count, got {spec!r}") from exc
    if grid.size == 0:
        raise params.ConfigError("--times", "empty time grid")
    return grid


def _resolve_times(args, p) -> np.ndarray:
    if getattr(args, "times", None) is not None:
        return _parse_times(args.times)
    if p.run.times is not None:
        return np.asarray(p.run.times, dtype=float)
    return dynamics.default_times(p)


def _write_manifest(outdir: Path, command: str, p, seed, outputs, t0) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": params.serialize_config(p),
        "seed": seed,
        "outputs": [str(o) for o in outputs],
        "duration_s": time.perf_counter() - t0,
    }
    path = outdir / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _write_trajectory_csv(path: Path, traj, ana, labels) -> None:
    """CSV with numeric and analytic population columns plus a deviation row."""
    names = [("p_minus%d" % -m) if m < 0 else ("p_%d" % m) for m in labels]
    header = (["t"] + [f"{n}_numeric" for n in names]
              + [f"{n}_analytic" for n in names])
    num = np.stack([traj.column(m) for m in labels], axis=1)
    an = np.stack([ana.column(m) for m in labels], axis=1)
    dev = np.max(np.abs(num - an), axis=0)
    lines = [",".join(header)]
    for i, t in enumerate(traj.times):
        row = [_fmt(t)] + [_fmt(v) for v in num[i]] + [_fmt(v) for v in an[i]]
        lines.append(",".join(row))
    lines.append(",".join(["max_abs_deviation"] + [_fmt(v) for v in dev] * 2))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _csv_labels(p) -> list:
    if p.kind == params.LAMBDA:
        return [-1, 0, 1]
    return [-2, -1, 0, 1, 2]


def cmd_trajectory(args, command: str, fallback) -> int:
    t0 = time.perf_counter()
    p = _load_params(args, fallback)
    if p.kind != (params.LAMBDA if command == "fig2" else params.FOURPOD):
        raise params.ConfigError("protocol.kind", f"{command} requires the "
                                 f"{'lambda' if command == 'fig2' else 'fourpod'} protocol")
    times = _resolve_times(args, p)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    traj = dynamics.run_protocol(p, times)
    ana = dynamics.analytic_trajectory(p, times)
    csv_path = outdir / f"{command}.csv"
    _write_trajectory_csv(csv_path, traj, ana, _csv_labels(p))
    _write_manifest(outdir, command, p, p.run.seed, [csv_path], t0)
    return 0


def _si_bounds(p, info, nu: int) -> dict:
    """Cramer-Rao bounds in the SI force chart via an explicit jacobian."""
    ip = p.internal()
    names = info.chart.names
    if ip.kind == params.LAMBDA:
        new_chart = fisher.ParamChart(("F", "xi"),
                                      (ip.rabi / ip.domega_dF, ip.xi))
        jac = np.diag([ip.domega_dF, 1.0])
    else:
        new_chart = fisher.ParamChart(
            ("F_perp", "xi", "phi"),
            (ip.rabi / ip.domega_dF, info.chart.values[1], info.chart.values[2]))
        jac = np.diag([ip.domega_dF, 1.0, 1.0])
    si_info = fisher.reparameterize(info, jac, new_chart)
    bound = fisher.crb(si_info, nu)
    return {
        "chart": list(new_chart.names),
        "crb_diagonal": np.diag(bound).tolist(),
        "uncertainties": np.sqrt(np.diag(bound)).tolist(),
        "force_unit": "N",
    }


def cmd_fisher(args) -> int:
    t0 = time.perf_counter()
    p = _load_params(args, params.fig2_defaults)
    ip = p.internal()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    om = abs(ip.rabi)
    if om == 0:
        raise params.ConfigError("drive.F", "zero force gives a zero Rabi frequency")
    area = math.sqrt(2.0) if ip.kind == params.LAMBDA else 2.0
    t_star = args.area_fraction * math.pi / (area * om)
    if math.sin(args.area_fraction * math.pi) ** 2 <= 1e-12:
        raise fisher.SingularInformationError(
            f"pulse area fraction {args.area_fraction} leaves no phase "
            "information: information matrix is singular along 'xi'")
    if ip.kind == params.LAMBDA:
        model = analytic.LambdaModel(t_star)
        truth = np.array([om, ip.xi])
    else:
        model = analytic.FourPodModel(t_star)
        truth = np.array([om, ip.xi, ip.phi])
    chart = fisher.ParamChart(model.names, truth)

    info = fisher.cfi_matrix(model, chart)
    qfi = fisher.qfi_pure(model, chart)
    wc = fisher.weak_commutativity(model, chart)
    nu = p.run.shots
    bound = fisher.crb(qfi, nu)

    s2 = math.sin(area * om * t_star) ** 2
    report = {
        "protocol": ip.kind,
        "chart": list(model.names),
        "values": truth.tolist(),
        "readout_time_ms": t_star,
        "nu": nu,
        "cfi": info.values.tolist(),
        "qfi": qfi.values.tolist(),
        "cfi_condition_number": fisher.condition_number(info),
        "weak_commutativity_max": float(np.max(np.abs(wc))),
        "weak_commutativity": wc.tolist(),
        "cfi_minus_qfi_max": float(np.max(np.abs(info.values - qfi.values))),
        "crb_diagonal": np.diag(bound).tolist(),
        "measured_constants": {
            "qfi_omega_omega_over_t2": qfi.values[0, 0] / t_star**2,
            "qfi_xi_xi_over_sin2": qfi.values[1, 1] / s2,
        },
        "si_bounds": _si_bounds(p, qfi, nu),
    }
    if ip.kind == params.FOURPOD:
        report["measured_constants"]["qfi_phi_phi_over_sin2"] = qfi.values[2, 2] / s2
        report["measured_constants"]["note"] = (
            "constants measured from first principles on the post-pulse state; "
            "the commonly quoted diagonal (t^2, sin^2, sin^2) form differs by "
            "a uniform factor of 4"
        )
        report["delta_xi_equals_delta_phi"] = bool(
            abs(bound[1, 1] - bound[2, 2]) <= 1e-10 * bound[1, 1])

    report_path = outdir / "fisher_report.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    _write_manifest(outdir, "fisher", p, p.run.seed, [report_path], t0)
    return 0


def cmd_estimate(args) -> int:
    t0 = time.perf_counter()
    p = _load_params(args, params.fig2_defaults)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    nu = args.nu if args.nu is not None else p.run.shots
    reps = args.replications if args.replications is not None else p.run.replications
    seed = p.run.seed
    report = estimation.covariance_study(
        p, nu=nu, replications=reps, seed=seed,
        pulse_area_fraction=args.area_fraction)
    report_path = outdir / "estimate_report.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    _write_manifest(outdir, "estimate", p, seed, [report_path], t0)
    if report["failures"] > 0.1 * report["replications"]:
        print(f"estimation failure rate {report['failures']}/{report['replications']} "
              "exceeds 10%", file=sys.stderr)
        return 4
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionsense",
        description="Trapped-ion sensing of phase-space displacement parameters: "
                    "trajectories, Fisher information, Monte-Carlo estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, times=False):
        sp.add_argument("--config", help="JSON config file (defaults to the "
                        "built-in reference parameter set)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, help="override run.seed")
        sp.add_argument("--nmax", type=int, help="override run.n_max")
        if times:
            sp.add_argument("--times", help="time grid start:stop:count in ms")

    sp = sub.add_parser("fig2", help="three-state trajectory, numeric vs analytic CSV")
    common(sp, times=True)
    sp = sub.add_parser("fig4", help="five-state trajectory, numeric vs analytic CSV")
    common(sp, times=True)

    sp = sub.add_parser("fisher", help="CFI/QFI report with Cramer-Rao bounds")
    common(sp)
    sp.add_argument("--chart", default="rabi", choices=["rabi"],
                    help="native chart (SI force bounds are always included)")
    sp.add_argument("--area-fraction", type=float, default=0.5,
                    help="readout pulse area as a fraction of pi (default 0.5)")

    sp = sub.add_parser("estimate", help="Monte-Carlo covariance study")
    common(sp)
    sp.add_argument("--nu", type=int, help="shots per replication")
    sp.add_argument("--replications", type=int, help="number of replications")
    sp.add_argument("--area-fraction", type=float, default=0.5,
                    help="measurement pulse area as a fraction of pi (default 0.5)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fig2":
            return cmd_trajectory(args, "fig2", params.fig2_defaults)
        if args.command == "fig4":
            return cmd_trajectory(args, "fig4", params.fig4_defaults)
        if args.command == "fisher":
            return cmd_fisher(args)
        if args.command == "estimate":
            return cmd_estimate(args)
    except (params.ConfigError, params.InvalidParameterError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except fisher.SingularInformationError as exc:
        print(f"singular information matrix: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
