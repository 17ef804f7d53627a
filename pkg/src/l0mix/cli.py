"""Command-line front end.

::

    l0mix run --preset exp2 --scale desk --out results/
    l0mix run --config my.cfg --out results/ --set filters.1.kappa=1e-5
    l0mix sweep --preset exp1 --scale desk --out results/
    l0mix presets-list

Exit status: 0 on success, 2 for configuration errors, 3 when a filter
diverges, 1 for I/O failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import parse_config, with_overrides
from .errors import ConfigError, ContractError, DivergenceError
from .harness import (
    PRESET_NAMES,
    SCALES,
    MsdTrace,
    SteadyState,
    kappa_sweep,
    preset_variants,
    run_ensemble,
    steady_state_msd,
)
from .kernels import BACKENDS, DEFAULT_BACKEND

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

log = logging.getLogger("l0mix")


def _num(v: float) -> str:
    # repr-exact and locale independent
    return format(float(v), ".17g")


def _write(path: Path, lines: list[str]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def curve_header(trace: MsdTrace) -> list[str]:
    cols = ["iter"] + [f"msd_f{k + 1}" for k in range(trace.M)] + ["msd_comb"]
    if trace.weight_label == "lambda":
        cols.append("lambda")
    else:
        cols += [f"w{k + 1}" for k in range(trace.weights.shape[1])]
    return cols


def emit_csv(trace: MsdTrace, path) -> Path:
    """Write the ensemble learning curves, one row per iteration."""
    path = Path(path)
    data = np.column_stack([trace.msd, trace.msd_comb, trace.weights])
    lines = [",".join(curve_header(trace))]
    lines += [f"{n}," + ",".join(map(_num, row)) for n, row in enumerate(data)]
    _write(path, lines)
    return path


def emit_steady_csv(steady: SteadyState, path) -> Path:
    path = Path(path)
    lines = [",".join(["start", "end", "snr_db"] + steady.labels)]
    for (start, end, snr), row in zip(steady.segments, steady.table):
        lines.append(",".join([str(start), str(end), _num(snr)] + [_num(v) for v in row]))
    _write(path, lines)
    return path


def emit_sweep_csv(snrs, kappas, table, path) -> Path:
    """Rows ordered SNR-major, then kappa ascending."""
    path = Path(path)
    order = np.argsort(kappas, kind="stable")
    lines = ["snr_db,kappa,steady_msd"]
    for i, snr in enumerate(snrs):
        for j in order:
            lines.append(f"{_num(snr)},{_num(kappas[j])},{_num(table[i, j])}")
    _write(path, lines)
    return path


def format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    return "\n".join(fmt.format(*r) for r in [header] + rows)


def steady_table(steady: SteadyState) -> str:
    header = ["snr_db"] + [f"{lab} [dB]" for lab in steady.labels]
    rows = [
        [f"{snr:g}"] + [f"{v:.2f}" for v in db]
        for (_, _, snr), db in zip(steady.segments, steady.db())
    ]
    return format_table(header, rows)


def _load(args) -> dict:
    """Labelled configurations selected by ``--preset`` or ``--config``."""
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        cfgs = {Path(args.config).stem: parse_config(text)}
    else:
        variants = preset_variants(args.preset, args.scale)
        if args.variant:
            if args.variant not in variants:
                raise ConfigError(
                    f"unknown variant {args.variant!r} for {args.preset}; "
                    f"choose from {sorted(variants)}", key="variant")
            variants = {args.variant: variants[args.variant]}
        cfgs = {f"{args.preset}_{v}": c for v, c in variants.items()}
    out = {}
    for label, cfg in cfgs.items():
        cfg = with_overrides(cfg, args.set)
        if args.seed is not None:
            cfg = with_overrides(cfg, [f"seed={args.seed}"])
        out[label] = cfg
    return out


def cmd_run(args) -> int:
    out_dir = Path(args.out)
    for label, cfg in _load(args).items():
        trace = run_ensemble(cfg, backend=args.backend, workers=args.workers)
        steady = steady_state_msd(trace, cfg.steady_window)
        emit_csv(trace, out_dir / f"{label}.csv")
        emit_steady_csv(steady, out_dir / f"{label}_steady.csv")
        print(f"# {label}: {trace.runs_used} runs, "
              f"{trace.updates_per_iteration:g} tap updates per iteration")
        if trace.runs_diverged:
            print(f"# {trace.runs_diverged} diverged runs excluded")
        if trace.saturated_runs:
            print(f"# {trace.saturated_runs} runs hit the combiner saturation ceiling")
        print(steady_table(steady))
        print()
    return EXIT_OK


def cmd_sweep(args) -> int:
    out_dir = Path(args.out)
    for label, cfg in _load(args).items():
        if cfg.sweep is None:
            raise ConfigError(f"{label} defines no kappa sweep", key="sweep.points")
        kappas = cfg.sweep.kappa_grid()
        snrs = cfg.sweep.snrs
        table = kappa_sweep(cfg, kappas, snrs, backend=args.backend, workers=args.workers)
        emit_sweep_csv(snrs, kappas, table, out_dir / f"{label}.csv")
        header = ["kappa"] + [f"{s:g} dB" for s in snrs]
        rows = [[f"{k:.3e}"] + [f"{v:.2f}" for v in 10 * np.log10(table[:, j])]
                for j, k in enumerate(kappas)]
        print(f"# {label}: steady-state MSD [dB]")
        print(format_table(header, rows))
        best = [kappas[int(np.argmin(table[i]))] for i in range(len(snrs))]
        print("# best kappa: " + ", ".join(f"{s:g} dB -> {k:.3e}" for s, k in zip(snrs, best)))
        print()
    return EXIT_OK


def cmd_presets_list(args) -> int:
    for name in PRESET_NAMES:
        variants = preset_variants(name, "paper")
        print(f"{name}: {', '.join(variants)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="l0mix", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, func, hlp in (
        ("run", cmd_run, "run preset variants or a config file; write learning curves"),
        ("sweep", cmd_sweep, "steady-state MSD over a kappa grid"),
    ):
        sp = sub.add_parser(name, help=hlp)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", choices=PRESET_NAMES)
        src.add_argument("--config", metavar="PATH")
        sp.add_argument("--scale", choices=SCALES, default="paper")
        sp.add_argument("--variant")
        sp.add_argument("--out", required=True, metavar="DIR")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        sp.add_argument("--backend", choices=BACKENDS, default=DEFAULT_BACKEND)
        sp.add_argument("--workers", type=int, default=1)
        sp.set_defaults(func=func)

    sp = sub.add_parser("presets-list", help="list presets and their variants")
    sp.set_defaults(func=cmd_presets_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ContractError) as exc:
        print(f"l0mix: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"l0mix: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"l0mix: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
