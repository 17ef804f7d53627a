"""Per-sample LMS and l0-LMS kernels with masked (partial) tap updates.

The l0-LMS recursion adds a zero attractor to the LMS correction::

    w_i <- w_i + mu * e * x(n-i+1) + kappa * beta * f_beta(w_i)

where ``f_beta`` is the first-order Taylor linearisation of the gradient of
``1 - exp(-beta |w|)``. Only taps inside ``|w| <= 1/beta`` are attracted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ContractError, DivergenceError

FILTER_KINDS = ("l0lms", "lms")


@dataclass(frozen=True)
class FilterParams:
    """Step size and attractor settings of one component filter.

    ``kind="lms"`` selects the plain LMS kernel, which never evaluates the
    attraction term. An ``l0lms`` filter with ``kappa=0`` must reproduce it
    exactly.
    """

    mu: float
    kappa: float = 0.0
    beta: float = 10.0
    kind: str = "l0lms"

    def __post_init__(self):
        if not self.mu > 0:
            raise ContractError(f"mu must be > 0, got {self.mu}")
        if not self.kappa >= 0:
            raise ContractError(f"kappa must be >= 0, got {self.kappa}")
        if not self.beta > 0:
            raise ContractError(f"beta must be > 0, got {self.beta}")
        if self.kind not in FILTER_KINDS:
            raise ContractError(f"unknown filter kind {self.kind!r}")


@dataclass
class FilterState:
    w: np.ndarray
    params: FilterParams
    n: int = field(default=0)

    @classmethod
    def zeros(cls, length: int, params: FilterParams) -> "FilterState":
        return cls(np.zeros(length), params)

    @property
    def length(self) -> int:
        return self.w.shape[0]


class StepOutput(NamedTuple):
    y: float
    e: float


def f_beta(a, beta):
    """Piecewise-linear zero attractor.

    Returns ``beta**2 * a - beta * sgn(a)`` inside ``0 < |a| <= 1/beta`` and
    zero elsewhere, including at ``a == 0``. Accepts scalars or arrays.
    """
    a = np.asarray(a, dtype=float)
    inv = 1.0 / beta
    c = np.clip(a, -inv, inv)  # keeps the unused branches finite
    out = np.where(
        (a > 0) & (a <= inv),
        beta * beta * c - beta,
        np.where((a < 0) & (a >= -inv), beta * beta * c + beta, 0.0),
    )
    return out if out.ndim else float(out)


def _check_window(w, x):
    if x.shape != w.shape:
        raise ContractError(
            f"input window has length {x.shape[0] if x.ndim else 0}, filter has {w.shape[0]}"
        )


def predict(state: FilterState, x) -> float:
    """Filter output ``w . x`` for a window ordered newest-first."""
    x = np.asarray(x, dtype=float)
    _check_window(state.w, x)
    return float(np.dot(state.w, x))


def _apply(state, increment, mask):
    w = state.w.copy()
    m = None if mask is None else np.asarray(mask, dtype=bool)
    if m is not None and m.shape != w.shape:
        raise ContractError(f"mask length {m.shape[0]} != filter length {w.shape[0]}")
    with np.errstate(over="ignore", invalid="ignore"):
        if m is None:
            w += increment
        else:
            w[m] += increment[m]
    if not np.all(np.isfinite(w)):
        raise DivergenceError("non-finite tap weight", iteration=state.n)
    return FilterState(w, state.params, state.n + 1)


def lms_step(state: FilterState, x, d: float, mask=None):
    """Plain LMS update restricted to ``mask``. Returns ``(state', StepOutput)``."""
    x = np.asarray(x, dtype=float)
    y = predict(state, x)
    e = d - y
    with np.errstate(over="ignore", invalid="ignore"):
        inc = state.params.mu * e * x
    return _apply(state, inc, mask), StepOutput(y, e)


def l0lms_step(state: FilterState, x, d: float, mask=None):
    """l0-LMS update restricted to ``mask``.

    The increment is formed as ``mu*e*x + kappa*beta*f_beta(w)`` (error term
    first) before masking, so masked-out taps are left bit-for-bit intact.
    """
    if state.params.kind == "lms":
        return lms_step(state, x, d, mask)
    x = np.asarray(x, dtype=float)
    y = predict(state, x)
    e = d - y
    p = state.params
    with np.errstate(over="ignore", invalid="ignore"):
        inc = p.mu * e * x + p.kappa * p.beta * f_beta(state.w, p.beta)
    return _apply(state, inc, mask), StepOutput(y, e)


def msd(w, w_opt) -> float:
    """Squared Euclidean deviation ``||w - w_opt||^2``."""
    w = np.asarray(w, dtype=float)
    w_opt = np.asarray(w_opt, dtype=float)
    if w.shape != w_opt.shape:
        raise ContractError(f"shape mismatch {w.shape} vs {w_opt.shape}")
    diff = w - w_opt
    return float(np.dot(diff, diff))
