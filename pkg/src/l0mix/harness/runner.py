"""Monte-Carlo ensemble runner and steady-state summaries."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DivergenceError
from ..combiner import SATURATION
from ..kernels import get_kernel
from ..sim import RngSpec, generate_streams
from .config import ExperimentConfig

log = logging.getLogger(__name__)

_COMB_CODES = {"none": 0, "grad": 1, "rls2": 2, "softmax": 3}


def _comb_code(spec):
    if spec.kind == "softmax" and spec.rule == "combined":
        return 4
    return _COMB_CODES[spec.kind]


@dataclass
class RunRecord:
    """Per-iteration squared deviations and mixing weights of one run."""

    msd: np.ndarray
    msd_comb: np.ndarray
    weights: np.ndarray
    saturated: bool
    envelope_violations: int
    weight_sum_error: float


@dataclass
class MsdTrace:
    """Ensemble-averaged learning curves.

    ``msd`` has shape ``(horizon, M)``; ``weights`` has one column (the
    two-filter weight ``lambda``) or ``M`` columns (per-filter weights).
    ``weight_min``/``weight_max`` bound the weights of every individual run,
    and ``envelope_violations`` counts taps of the combined vector that left
    the componentwise range of the filters, summed over runs.
    """

    msd: np.ndarray
    msd_comb: np.ndarray
    weights: np.ndarray
    weight_label: str
    segments: list[tuple[int, int, float]]
    runs_used: int
    runs_diverged: int = 0
    saturated_runs: int = 0
    envelope_violations: int = 0
    weight_sum_error: float = 0.0
    weight_min: float = 0.0
    weight_max: float = 1.0
    updates_per_iteration: float = 0.0

    @property
    def horizon(self) -> int:
        return self.msd.shape[0]

    @property
    def M(self) -> int:
        return self.msd.shape[1]


def _kernel_args(cfg: ExperimentConfig):
    sched = cfg.schedule
    fp = cfg.filters
    return dict(
        w_opt=np.ascontiguousarray(cfg.scenario.w_opt, dtype=float),
        mu=np.array([f.mu for f in fp], dtype=float),
        kappa=np.array([f.kappa for f in fp], dtype=float),
        beta=np.array([f.beta for f in fp], dtype=float),
        attract=np.array([f.kind == "l0lms" for f in fp], dtype=np.uint8),
        masks=np.ascontiguousarray(np.array(sched.masks, dtype=np.uint8)),
        cycle=np.ascontiguousarray(sched.cycle_table(), dtype=np.intp),
        comb_kind=_comb_code(cfg.combiner),
        mu_c=float(cfg.combiner.mu_c),
        forget=float(cfg.combiner.forget),
        delta=float(cfg.combiner.delta),
        ceiling=SATURATION,
    )


def run_single(cfg: ExperimentConfig, run_index: int = 0, backend: str | None = None,
               _args=None) -> RunRecord:
    """Simulate one ensemble member.

    Every filter sees the same ``(x, d)`` stream. The combined deviation at
    iteration ``n`` is that of the mixture of the pre-update taps under the
    weights that produced the combined output at ``n``.
    """
    x, d = generate_streams(cfg.scenario, RngSpec(cfg.base_seed, run_index))
    args = _args if _args is not None else _kernel_args(cfg)
    out = get_kernel(backend)(x, d, **args)
    code, n, k = out["status"]
    if code:
        raise DivergenceError("filter diverged", iteration=n, filter_index=k, run_index=run_index)
    return RunRecord(
        out["msd"], out["msd_comb"], out["weights"], out["saturated"],
        out["envelope_violations"], out["weight_sum_error"],
    )


def run_ensemble(cfg: ExperimentConfig, backend: str | None = None, workers: int = 1) -> MsdTrace:
    """Average :func:`run_single` over ``cfg.runs`` members.

    Runs may execute on ``workers`` threads (the compiled kernel releases
    the GIL); the reduction always happens in run-index order.
    """
    args = _kernel_args(cfg)

    def one(i):
        try:
            return run_single(cfg, i, backend, args)
        except DivergenceError as exc:
            if cfg.exclude_divergent:
                return exc
            raise

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(one, range(cfg.runs)))
    else:
        records = [one(i) for i in range(cfg.runs)]

    kept = [r for r in records if isinstance(r, RunRecord)]
    diverged = len(records) - len(kept)
    if diverged:
        log.warning("%d of %d runs diverged and were excluded", diverged, cfg.runs)
    if not kept:
        raise DivergenceError(f"all {cfg.runs} runs diverged")

    msd = np.zeros_like(kept[0].msd)
    msd_c = np.zeros_like(kept[0].msd_comb)
    wts = np.zeros_like(kept[0].weights)
    for r in kept:
        msd += r.msd
        msd_c += r.msd_comb
        wts += r.weights
    n = len(kept)
    return MsdTrace(
        msd=msd / n,
        msd_comb=msd_c / n,
        weights=wts / n,
        weight_label="lambda" if cfg.combiner.kind in ("grad", "rls2") else "psi",
        segments=cfg.scenario.segments(),
        runs_used=n,
        runs_diverged=diverged,
        saturated_runs=sum(r.saturated for r in kept),
        envelope_violations=sum(r.envelope_violations for r in kept),
        weight_sum_error=max(r.weight_sum_error for r in kept),
        weight_min=min(float(r.weights.min()) for r in kept),
        weight_max=max(float(r.weights.max()) for r in kept),
        updates_per_iteration=cfg.schedule.updates_per_iteration(),
    )


@dataclass
class SteadyState:
    """Tail means per SNR segment. ``table[s, j]``: segment ``s``, column ``j``."""

    labels: list[str]
    segments: list[tuple[int, int, float]]
    table: np.ndarray

    def db(self) -> np.ndarray:
        return 10.0 * np.log10(self.table)

    def column(self, label: str) -> np.ndarray:
        return self.table[:, self.labels.index(label)]


def steady_state_msd(trace: MsdTrace, window: float = 0.1) -> SteadyState:
    """Mean of each curve over the final ``window`` fraction of every segment."""
    series = np.column_stack([trace.msd, trace.msd_comb])
    labels = [f"msd_f{k + 1}" for k in range(trace.M)] + ["msd_comb"]
    rows = []
    for start, end, _ in trace.segments:
        count = max(1, int(round((end - start) * window)))
        rows.append(series[end - count:end].mean(axis=0))
    return SteadyState(labels, list(trace.segments), np.array(rows))


def kappa_sweep(base_cfg: ExperimentConfig, kappa_grid, snr_list, backend: str | None = None,
                workers: int = 1) -> np.ndarray:
    """Steady-state MSD of a single l0-LMS filter, indexed ``[snr][kappa]``.

    The first filter of ``base_cfg`` supplies ``mu`` and ``beta``; every
    cell is a fixed-SNR ensemble over the same seeds.
    """
    f0 = base_cfg.filters[0]
    out = np.empty((len(snr_list), len(kappa_grid)))
    for i, snr in enumerate(snr_list):
        sc = replace(base_cfg.scenario, snr_schedule=((0, float(snr)),))
        for j, kappa in enumerate(kappa_grid):
            cfg = replace(
                base_cfg, scenario=sc, filters=(replace(f0, kappa=float(kappa)),),
                policy="full", combiner=replace(base_cfg.combiner, kind="none"), sweep=None,
            )
            trace = run_ensemble(cfg, backend, workers)
            out[i, j] = steady_state_msd(trace, cfg.steady_window).table[0, 0]
    return out

