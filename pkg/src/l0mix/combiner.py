"""Mixing rules that merge component-filter outputs into one estimate.

Three mechanisms are provided:

* a sigmoid-parameterised convex combination of two filters adapted by
  stochastic gradient descent on the squared combined error;
* an RLS-type rule for the same two-filter mixture, in a direct
  (unconstrained weight) form and in a pre-activation form that keeps the
  weight inside ``(0, 1)``;
* a softmax combination of ``M`` filters with per-filter RLS-type gains.

All pre-activations are clipped to ``[-A_MAX, A_MAX]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import ContractError

A_MAX = 5.0
DEFAULT_DELTA = 1e-2
DEFAULT_FORGET = 0.99
SATURATION = 1e12


def _clip(a: float) -> float:
    return min(max(a, -A_MAX), A_MAX)


def sigmoid_lambda(a: float) -> float:
    """Logistic mixing weight ``1 / (1 + exp(-a))``."""
    if a >= 0:
        return 1.0 / (1.0 + math.exp(-a))
    z = math.exp(a)
    return z / (1.0 + z)


def combine2(lam: float, y1: float, y2: float) -> float:
    return lam * y1 + (1.0 - lam) * y2


# -- gradient (sigmoid) combiner ---------------------------------------------


@dataclass(frozen=True)
class SigmoidCombiner:
    a: float = 0.0
    mu_c: float = 1.0

    @property
    def lam(self) -> float:
        return sigmoid_lambda(self.a)


def grad_step(c: SigmoidCombiner, e: float, y1: float, y2: float) -> SigmoidCombiner:
    """One descent step on ``e**2 / 2`` with respect to the pre-activation.

    ``e`` must be the combined error ``d - combine2(lam, y1, y2)`` for the
    current ``c.a``.
    """
    lam = sigmoid_lambda(c.a)
    a = c.a + c.mu_c * e * (y1 - y2) * lam * (1.0 - lam)
    return replace(c, a=_clip(a))


# -- RLS-type two-filter combiner --------------------------------------------


def batch_lambda_opt(y1, y2, d, beta_f: float, delta: float = 0.0, lam0: float = 0.0) -> float:
    """Exponentially weighted least-squares mixing weight over a whole history.

    Minimises ``sum_k beta_f**k (d(n-k) - lam*y1(n-k) - (1-lam)*y2(n-k))**2``.
    A nonzero ``delta`` adds the prior ``beta_f**(n+1) * delta * (lam - lam0)**2``
    that a recursion started from ``r_in = 1/delta, lam = lam0`` carries.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    d = np.asarray(d, dtype=float)
    n = y1.shape[0]
    wts = beta_f ** np.arange(n - 1, -1, -1, dtype=float)
    yd = y1 - y2
    den = math.fsum(wts * yd * yd)
    num = math.fsum(wts * yd * (d - y2))
    if delta:
        prior = beta_f**n * delta
        den += prior
        num += prior * lam0
    if den == 0.0:
        raise ContractError("all output differences are zero; weight is undetermined")
    return num / den


def rls_gain2(r_in: float, y_d: float, beta_f: float) -> float:
    """Gain ``(r/beta) / (1 + y_d**2 r/beta) * y_d``."""
    q = r_in / beta_f
    return q / (1.0 + y_d * y_d * q) * y_d


def _next_r(r_in, y_d, beta_f):
    r = 1.0 / (beta_f / r_in + y_d * y_d)
    if r > SATURATION:
        return SATURATION, True
    return r, False


class DirectStep(NamedTuple):
    lam: float
    r_in: float
    y_c: float
    e_c: float
    saturated: bool


def rls_step2_direct(lam, r_in, y1, y2, d, beta_f) -> DirectStep:
    """Unconstrained recursive least-squares update of the mixing weight."""
    if not r_in > 0:
        raise ContractError(f"r_in must be > 0, got {r_in}")
    y_d = y1 - y2
    y_c = combine2(lam, y1, y2)
    e_c = d - y_c
    lam_new = lam + rls_gain2(r_in, y_d, beta_f) * e_c
    r_new, sat = _next_r(r_in, y_d, beta_f)
    return DirectStep(lam_new, r_new, y_c, e_c, sat)


@dataclass(frozen=True)
class RlsCombiner2:
    a_opt: float = 0.0
    r_in: float = 1.0 / DEFAULT_DELTA
    beta_f: float = DEFAULT_FORGET
    saturated: bool = False

    def __post_init__(self):
        if not self.r_in > 0:
            raise ContractError(f"r_in must be > 0, got {self.r_in}")
        if not 0 < self.beta_f <= 1:
            raise ContractError(f"forgetting factor must be in (0, 1], got {self.beta_f}")

    @property
    def lam(self) -> float:
        return sigmoid_lambda(self.a_opt)


def rls_step2_adomain(c: RlsCombiner2, y1: float, y2: float, d: float):
    """RLS-type step applied to the pre-activation. Returns ``(c', y_c)``."""
    lam = sigmoid_lambda(c.a_opt)
    y_d = y1 - y2
    y_c = combine2(lam, y1, y2)
    e_c = d - y_c
    a = _clip(c.a_opt + rls_gain2(c.r_in, y_d, c.beta_f) * e_c)
    r, sat = _next_r(c.r_in, y_d, c.beta_f)
    return replace(c, a_opt=a, r_in=r, saturated=c.saturated or sat), y_c


# -- softmax M-filter combiner -----------------------------------------------


def softmax_weights(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    z = np.exp(phi - phi.max())
    return z / z.sum()


@dataclass(frozen=True)
class SoftmaxCombinerM:
    phi: np.ndarray
    p: np.ndarray
    lambda_f: float = DEFAULT_FORGET
    saturated: bool = False

    @classmethod
    def fresh(cls, M: int, lambda_f: float = DEFAULT_FORGET, delta: float = DEFAULT_DELTA):
        return cls(np.zeros(M), np.full(M, 1.0 / delta), lambda_f)

    def __post_init__(self):
        if not np.all(self.p > 0):
            raise ContractError("gain memories p_k must all be > 0")
        if not 0 < self.lambda_f <= 1:
            raise ContractError(f"forgetting factor must be in (0, 1], got {self.lambda_f}")

    @property
    def weights(self) -> np.ndarray:
        return softmax_weights(self.phi)


SOFTMAX_RULES = ("per_filter", "combined")


def m_combiner_step(c: SoftmaxCombinerM, y, d: float, rule: str = "per_filter"):
    """Softmax mixture step with per-filter RLS-type gains. Returns ``(c', y_c)``.

    ``rule="per_filter"`` moves each pre-activation by ``k_k * e_k``, where
    ``e_k = d - y_k`` is the filter's own error and the gain is built from
    ``y_c - y_k``. In expectation this favours the filter whose output is
    farthest from the mixture, i.e. usually the worst one.

    ``rule="combined"`` regresses the combined error ``e_c = d - y_c`` on
    ``y_k - y_c`` instead; for two filters this is the direction of the
    two-filter RLS rule. The gain memories ``p_k`` evolve identically
    under both rules.

    The pre-activations are re-centred on their mean before clipping;
    softmax is shift invariant, so centring alone leaves the weights unchanged.
    """
    if rule not in SOFTMAX_RULES:
        raise ContractError(f"unknown softmax rule {rule!r}")
    y = np.asarray(y, dtype=float)
    psi = softmax_weights(c.phi)
    y_c = float(np.dot(psi, y))
    if rule == "per_filter":
        diff = y_c - y
        e = d - y
    else:
        diff = y - y_c
        e = d - y_c
    q = c.p / c.lambda_f
    gain = q * diff / (1.0 + q * diff * diff)
    phi = c.phi + gain * e
    phi = np.clip(phi - phi.mean(), -A_MAX, A_MAX)
    p = 1.0 / (c.lambda_f / c.p + diff * diff)
    sat = bool(np.any(p > SATURATION))
    p = np.minimum(p, SATURATION)
    return replace(c, phi=phi, p=p, saturated=c.saturated or sat), y_c
