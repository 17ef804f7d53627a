"""Sparse unknown systems, white Gaussian excitation and noise schedules.

Every random draw of a Monte-Carlo run comes from two independent streams
(input and noise) spawned from ``run_seed(base_seed, run_index)``, a
BLAKE2b-64 hash of the two integers. The input stream produces ``x(n)`` one
standard normal at a time, so the per-sample generator :func:`gen_step` and
the vectorised :func:`generate_streams` yield the same draws.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractError

_MASK64 = (1 << 64) - 1


def run_seed(base_seed: int, run_index: int) -> int:
    """64-bit seed of one ensemble member: BLAKE2b-64 over two LE uint64 words."""
    payload = (base_seed & _MASK64).to_bytes(8, "little") + (run_index & _MASK64).to_bytes(8, "little")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class RngSpec:
    base_seed: int
    run_index: int = 0

    def generators(self) -> tuple[np.random.Generator, np.random.Generator]:
        """Independent ``(input, noise)`` generators for this run."""
        ss = np.random.SeedSequence(run_seed(self.base_seed, self.run_index))
        gx, gv = ss.spawn(2)
        return np.random.default_rng(gx), np.random.default_rng(gv)


def make_sparse_system(L: int, n_active: int, value: float = 1.0, placement_seed: int = 0) -> np.ndarray:
    """Length-``L`` vector with ``n_active`` entries equal to ``value`` at seeded positions."""
    if not (0 < n_active <= L):
        raise ContractError(f"need 0 < n_active <= L, got n_active={n_active}, L={L}")
    rng = np.random.default_rng(placement_seed)
    idx = rng.choice(L, size=n_active, replace=False)
    w = np.zeros(L)
    w[idx] = value
    return w


def make_near_sparse(w, eps: float, seed: int = 0) -> np.ndarray:
    """Replace exact zeros of ``w`` with uniform draws from ``[-eps, eps]`` minus zero."""
    w = np.asarray(w, dtype=float)
    peak = np.max(np.abs(w))
    if not (eps > 0 and eps <= 0.1 * peak):
        raise ContractError(f"eps must satisfy 0 < eps <= 0.1*max|w| = {0.1 * peak}, got {eps}")
    out = w.copy()
    zeros = np.flatnonzero(w == 0)
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-eps, eps, size=zeros.size)
    while np.any(vals == 0):
        bad = vals == 0
        vals[bad] = rng.uniform(-eps, eps, size=int(bad.sum()))
    out[zeros] = vals
    return out


def noise_variance_for_snr(w_opt, sigma_x2: float, snr_db: float) -> float:
    """Noise power giving ``snr_db`` relative to the noiseless output power."""
    energy = float(np.dot(w_opt, w_opt))
    if energy == 0:
        raise ContractError("unknown system is identically zero; SNR is undefined")
    return sigma_x2 * energy * 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class Scenario:
    """Unknown system, input power, SNR schedule and horizon.

    The system is stored as its recipe (length, active taps, placement
    seed, optional near-sparse floor) so configurations stay small and
    round-trip through text. ``snr_schedule`` is a tuple of
    ``(start_iteration, snr_db)`` pairs starting at 0.
    """

    length: int
    n_active: int
    horizon: int
    snr_schedule: tuple[tuple[int, float], ...]
    tap_value: float = 1.0
    placement_seed: int = 0
    near_sparse_eps: float = 0.0
    near_sparse_seed: int = 0
    input_variance: float = 1.0

    def __post_init__(self):
        sched = tuple((int(s), float(v)) for s, v in self.snr_schedule)
        object.__setattr__(self, "snr_schedule", sched)
        if not sched or sched[0][0] != 0:
            raise ContractError("SNR schedule must start at iteration 0")
        starts = [s for s, _ in sched]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ContractError("SNR schedule start iterations must be strictly increasing")
        if self.horizon < 1 or starts[-1] >= self.horizon:
            raise ContractError("every SNR segment must start before the horizon")
        if self.tap_value == 0:
            raise ContractError("tap_value must be nonzero")
        if not self.input_variance > 0:
            raise ContractError("input_variance must be > 0")
        if not (0 < self.n_active <= self.length):
            raise ContractError(f"need 0 < n_active <= length, got {self.n_active}, {self.length}")

    @cached_property
    def w_opt(self) -> np.ndarray:
        w = make_sparse_system(self.length, self.n_active, self.tap_value, self.placement_seed)
        if self.near_sparse_eps > 0:
            w = make_near_sparse(w, self.near_sparse_eps, self.near_sparse_seed)
        w.flags.writeable = False
        return w

    def segments(self) -> list[tuple[int, int, float]]:
        """``(start, end, snr_db)`` for each segment, ``end`` exclusive."""
        starts = [s for s, _ in self.snr_schedule] + [self.horizon]
        return [(starts[i], starts[i + 1], snr) for i, (_, snr) in enumerate(self.snr_schedule)]

    def noise_variance(self) -> np.ndarray:
        """Per-iteration noise variance, length ``horizon``."""
        var = np.empty(self.horizon)
        for start, end, snr in self.segments():
            var[start:end] = noise_variance_for_snr(self.w_opt, self.input_variance, snr)
        return var


def gen_step(scenario: Scenario, rngs, n: int, window):
    """Draw sample ``n``. ``window`` holds ``x(n-1) ... x(n-L)``.

    Returns ``(x_n, d_n, window')`` with ``window' = x(n) ... x(n-L+1)``.
    """
    gx, gv = rngs
    x_n = float(gx.standard_normal()) * np.sqrt(scenario.input_variance)
    window = np.concatenate(([x_n], np.asarray(window, dtype=float)[:-1]))
    var = 0.0
    for start, _, snr in scenario.segments():
        if n >= start:
            var = noise_variance_for_snr(scenario.w_opt, scenario.input_variance, snr)
    v = float(gv.standard_normal()) * np.sqrt(var)
    d_n = float(np.dot(scenario.w_opt, window)) + v
    return x_n, d_n, window


def generate_streams(scenario: Scenario, rng_spec: RngSpec) -> tuple[np.ndarray, np.ndarray]:
    """Whole-run input ``x`` and desired ``d`` sequences (cold-start window)."""
    gx, gv = rng_spec.generators()
    T = scenario.horizon
    x = gx.standard_normal(T) * np.sqrt(scenario.input_variance)
    v = gv.standard_normal(T) * np.sqrt(scenario.noise_variance())
    d = np.convolve(x, scenario.w_opt)[:T] + v
    return x, d
