"""Command-line front end: reflection amplitudes, device performance tables,
purification runs, figure CSVs, and the self-validation suite.

Outputs are deterministic: identical arguments produce byte-identical CSVs
(fixed float formatting, no timestamps).  A flat `key = value` config file can
supply defaults; explicit flags win.  The environment variable HYPEREPP_OUTDIR
sets the directory for relative output paths.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analytics, protocol
from .cavity import (
    CavityParams,
    InteractionMode,
    ReflectionPair,
    barclay_preset,
    reflection_from_cooperativity,
    reflection_pair,
)
from .errors import ArgumentError, DomainError

PRESETS = {"barclay": barclay_preset}

OUTDIR_ENV = "HYPEREPP_OUTDIR"


def emit_csv(table: analytics.Table, path: str | Path) -> None:
    """Write a table as UTF-8 CSV: header row, LF endings, full-precision floats."""
    if not table.rows:
        raise ArgumentError("refusing to write an empty table")
    lines = [",".join(table.headers)]
    for row in table.rows:
        lines.append(",".join(_format_value(value) for value in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _format_value(value) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.14e}"


def _resolve_output(path: str | None, default_name: str) -> Path:
    outdir = Path(os.environ.get(OUTDIR_ENV, "."))
    chosen = Path(path) if path else Path(default_name)
    return chosen if chosen.is_absolute() else outdir / chosen


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    config: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ArgumentError(f"config line is not `key = value`: {raw!r}")
        key, _, value = line.partition("=")
        config[key.strip().replace("-", "_").lower()] = value.strip()
    return config


def _pick(cli_value, config: dict[str, str], key: str, default, cast):
    if cli_value is not None:
        return cli_value
    if key in config:
        raw = config[key]
        if isinstance(default, (tuple, list)) or (cast is float and " " in raw):
            return tuple(float(part) for part in raw.split())
        return cast(raw)
    return default


def _reflection_point(args, config) -> ReflectionPair:
    # Flags beat config keys as a group: an explicit working point on the
    # command line overrides whichever kind the config file names.
    sources = (
        ("preset", args.preset),
        ("cooperativity", getattr(args, "cooperativity", None)),
        ("g", args.g),
    )
    chosen = next((name for name, value in sources if value is not None), None)
    if chosen is None:
        chosen = next((name for name, _ in sources if name in config), None)
    if chosen == "preset":
        preset = _pick(args.preset, config, "preset", None, str)
        if preset not in PRESETS:
            raise ArgumentError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        return reflection_pair(PRESETS[preset]())
    if chosen == "cooperativity":
        return reflection_from_cooperativity(
            _pick(getattr(args, "cooperativity", None), config, "cooperativity", None, float)
        )
    if chosen == "g":
        g = _pick(args.g, config, "g", None, float)
        kappa = _pick(args.kappa, config, "kappa", None, float)
        gamma = _pick(args.gamma, config, "gamma", None, float)
        if kappa is None or gamma is None:
            raise ArgumentError("explicit cavity parameters need --g, --kappa and --gamma")
        params = CavityParams.from_over_2pi(
            g=g,
            kappa=kappa,
            gamma=gamma,
            omega_c=_pick(args.omega_c, config, "omega_c", 0.0, float),
            omega_0=_pick(args.omega_0, config, "omega_0", 0.0, float),
            omega_p=_pick(args.omega_p, config, "omega_p", 0.0, float),
        )
        return reflection_pair(params)
    return reflection_pair(PRESETS["barclay"]())


def _add_cavity_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", help="named cavity working point (barclay)")
    parser.add_argument("--cooperativity", type=float, help="resonant g / sqrt(kappa gamma)")
    parser.add_argument("--g", type=float, help="coupling strength / 2pi")
    parser.add_argument("--kappa", type=float, help="cavity damping rate / 2pi")
    parser.add_argument("--gamma", type=float, help="NV decay rate / 2pi")
    parser.add_argument("--omega-c", dest="omega_c", type=float, help="cavity frequency / 2pi")
    parser.add_argument("--omega-0", dest="omega_0", type=float, help="NV transition frequency / 2pi")
    parser.add_argument("--omega-p", dest="omega_p", type=float, help="photon frequency / 2pi")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperepp",
        description="Hyperentanglement purification simulator and analytics",
    )
    parser.add_argument("--config", help="key = value file supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p_refl = sub.add_parser("reflection", help="reflection amplitudes of one NV-cavity unit")
    _add_cavity_flags(p_refl)

    p_qnd = sub.add_parser("qnd", help="parity-check fidelities and efficiencies")
    _add_cavity_flags(p_qnd)
    p_qnd.add_argument("-o", "--output", help="write the values as a one-row CSV")

    p_swap = sub.add_parser("swap", help="polarization-SWAP fidelity and efficiency")
    _add_cavity_flags(p_swap)
    p_swap.add_argument("--amplitudes", type=float, nargs=4, metavar=("A1", "B1", "A2", "B2"),
                        help="input polarization amplitudes (default: maximally entangled)")
    p_swap.add_argument("-o", "--output", help="write the values as a one-row CSV")

    p_epp = sub.add_parser("epp", help="run purification rounds on the canonical ensemble")
    p_epp.add_argument("--F", dest="fidelities", type=float, nargs=3, metavar=("F1", "F2", "F3"))
    p_epp.add_argument("--rounds", type=int)
    p_epp.add_argument("--mode", choices=("ideal", "realistic"))
    _add_cavity_flags(p_epp)
    p_epp.add_argument("-o", "--output", help="CSV path (default epp.csv)")

    p_fig = sub.add_parser("figure", help="emit curve data behind one summary figure")
    p_fig.add_argument("name", choices=analytics.FIGURES)
    p_fig.add_argument("--start", type=float)
    p_fig.add_argument("--stop", type=float)
    p_fig.add_argument("--points", type=int)
    p_fig.add_argument("-o", "--output", help="CSV path (default <name>.csv)")
    p_fig.add_argument("--plot", help="also render a static plot (svg/pdf/png by extension)")

    p_val = sub.add_parser("validate", help="run all circuit-vs-formula oracles")
    p_val.add_argument("--tol", type=float, default=1e-9)

    return parser


def _cmd_reflection(args, config) -> int:
    refl = _reflection_point(args, config)
    print(
        f"r = {refl.r.real:.6f}{refl.r.imag:+.6f}j  |r| = {abs(refl.r):.6f}  "
        f"r0 = {refl.r0.real:.6f}{refl.r0.imag:+.6f}j"
    )
    return 0


def _cmd_qnd(args, config) -> int:
    refl = _reflection_point(args, config)
    summary = analytics.device_summary(refl)
    keys = ["r", "F_P1", "F_P2", "eta_P1", "eta_P2"]
    keys += [f"F_S{k}" for k in range(1, 9)] + [f"eta_S{k}" for k in range(1, 9)]
    if args.output:
        table = analytics.Table(headers=tuple(keys), rows=(tuple(summary[k] for k in keys),))
        path = _resolve_output(args.output, "qnd.csv")
        emit_csv(table, path)
        print(f"wrote {path}")
    else:
        print("  ".join(f"{k}={summary[k]:.6f}" for k in keys[:5]))
        print("  ".join(f"F_S{k}={summary[f'F_S{k}']:.6f}" for k in range(1, 9)))
        print("  ".join(f"eta_S{k}={summary[f'eta_S{k}']:.6f}" for k in range(1, 9)))
    return 0


def _cmd_swap(args, config) -> int:
    refl = _reflection_point(args, config)
    amplitudes = args.amplitudes if args.amplitudes is None else tuple(args.amplitudes)
    perf = analytics.swap_performance(refl.r, refl.r0, amplitudes)
    if args.output:
        table = analytics.Table(headers=("F_SWAP", "eta_SWAP"), rows=((perf.f_swap, perf.eta_swap),))
        path = _resolve_output(args.output, "swap.csv")
        emit_csv(table, path)
        print(f"wrote {path}")
    else:
        print(f"F_SWAP={perf.f_swap:.6f}  eta_SWAP={perf.eta_swap:.6f}")
    return 0


def _cmd_epp(args, config) -> int:
    fid = _pick(args.fidelities, config, "f", (0.8, 0.8, 0.8), float)
    if isinstance(fid, (int, float)):
        fid = (float(fid),) * 3
    if len(fid) != 3:
        raise ArgumentError("--F needs three values")
    rounds = _pick(args.rounds, config, "rounds", 1, int)
    mode_name = _pick(args.mode, config, "mode", "ideal", str)
    if mode_name == "realistic":
        report = protocol.run_epp(
            *fid, rounds=rounds, mode=InteractionMode.REALISTIC, refl=_reflection_point(args, config)
        )
    else:
        report = protocol.run_epp(*fid, rounds=rounds)
    table = analytics.epp_table(report)
    path = _resolve_output(args.output, "epp.csv")
    emit_csv(table, path)
    final = report.rounds[-1]
    print(
        f"wrote {path}; after {report.rounds_executed} round(s): "
        f"F' = {report.final_fidelity:.6f}, Y1 = {report.rounds[0].y1:.6f}, Y2 = {report.rounds[0].y2:.6f}, "
        f"survival = {final.survival:.6f}"
    )
    return 0


def _cmd_figure(args, config) -> int:
    points = _pick(args.points, config, "points", 101, int)
    table = analytics.figure_data(args.name, args.start, args.stop, points)
    path = _resolve_output(args.output, f"{args.name}.csv")
    emit_csv(table, path)
    print(f"wrote {path} ({len(table.rows)} rows x {len(table.headers)} columns)")
    if args.plot:
        plot_path = _resolve_output(args.plot, f"{args.name}.svg")
        _render_plot(table, plot_path)
        print(f"rendered {plot_path}")
    return 0


def _render_plot(table: analytics.Table, path: Path) -> None:
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover
        raise DomainError("plot rendering needs matplotlib (install the [plot] extra)") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = table.column(table.headers[0])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for name in table.headers[1:]:
        ax.plot(x, table.column(name), label=name)
    ax.set_xlabel(table.headers[0])
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


def _cmd_validate(args, config) -> int:
    report = analytics.cross_validate(tolerance=args.tol)
    for line in report.lines():
        print(line)
    if report.passed:
        print("validation passed")
        return 0
    print("validation FAILED", file=sys.stderr)
    return 1


_COMMANDS = {
    "reflection": _cmd_reflection,
    "qnd": _cmd_qnd,
    "swap": _cmd_swap,
    "epp": _cmd_epp,
    "figure": _cmd_figure,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except (ArgumentError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
