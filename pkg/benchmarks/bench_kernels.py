"""Time the compiled and pure-Python run loops on desk-scale presets.

    python benchmarks/bench_kernels.py [--runs N] [--repeat R]

Reports microseconds per simulated iteration (all filters plus the
combiner) and the speed-up of the compiled loop.
"""
import argparse
import time
from dataclasses import replace

from l0mix.harness import preset, run_ensemble
from l0mix.kernels import BACKENDS

CASES = [
    ("exp2", "combo"),
    ("exp3", "rls_snr20"),
    ("exp4", "snr40"),
    ("uneven", "snr40"),
]


def best_time(cfg, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        run_ensemble(cfg, backend)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--runs", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--horizon", type=int, default=3000)
    args = ap.parse_args(argv)

    print(f"backends: {', '.join(BACKENDS)}")
    header = f"{'case':<18}{'M':>3}" + "".join(f"{b + ' us/it':>16}" for b in BACKENDS) + f"{'speed-up':>10}"
    print(header)
    for name, variant in CASES:
        cfg = preset(name, "desk", variant)
        T = min(args.horizon, cfg.scenario.horizon)
        sched = tuple((s, snr) for s, snr in cfg.scenario.snr_schedule if s < T)
        cfg = replace(cfg, runs=args.runs, scenario=replace(cfg.scenario, horizon=T, snr_schedule=sched))
        per_it = {b: best_time(cfg, b, args.repeat) / (args.runs * T) * 1e6 for b in BACKENDS}
        row = f"{name + '/' + variant:<18}{cfg.M:>3}" + "".join(f"{per_it[b]:>16.2f}" for b in BACKENDS)
        if len(BACKENDS) == 2:
            row += f"{per_it['python'] / per_it['cython']:>9.0f}x"
        print(row)


if __name__ == "__main__":
    main()
