"""Tap-index subsets for partial-update schemes.

Masks are boolean vectors of length ``L``; mask ``l`` (1-based, as in the
formulas) lives at position ``l - 1`` of the returned lists. Filter indices
``k`` are 1-based as well.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractError

POLICY_KINDS = ("full", "exclusive", "same", "uneven")


def _check(L, M):
    if not (1 <= M <= L):
        raise ContractError(f"need 1 <= M <= L, got M={M}, L={L}")


def _strided(L, start, stride):
    m = np.zeros(L, dtype=bool)
    m[start - 1 :: stride] = True
    return m


def even_exclusive_masks(L: int, M: int) -> list[np.ndarray]:
    """Mask ``i`` selects taps ``i, i+M, i+2M, ...``; together they partition ``1..L``."""
    _check(L, M)
    return [_strided(L, i, M) for i in range(1, M + 1)]


def next_pow2(l: int) -> int:
    """Smallest power of two that is ``>= l``."""
    return 1 << (l - 1).bit_length()


def uneven_masks(L: int, M: int) -> list[np.ndarray]:
    """Mask ``l`` selects taps ``l, l+D, l+2D, ...`` with ``D = next_pow2(l)``.

    Mask 1 is the full index set, so the family overlaps. That is harmless
    since every filter owns its weights.
    """
    _check(L, M)
    return [_strided(L, l, next_pow2(l)) for l in range(1, M + 1)]


@dataclass(frozen=True)
class SchedulePolicy:
    kind: str
    M: int
    L: int

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ContractError(f"unknown schedule policy {self.kind!r}")
        _check(self.L, self.M)

    @cached_property
    def masks(self) -> tuple[np.ndarray, ...]:
        if self.kind == "full":
            family = [np.ones(self.L, dtype=bool)]
        elif self.kind == "uneven":
            family = uneven_masks(self.L, self.M)
        else:
            family = even_exclusive_masks(self.L, self.M)
        for m in family:
            m.flags.writeable = False
        return tuple(family)

    def mask_index(self, k: int, n: int) -> int:
        """1-based index into :attr:`masks` used by filter ``k`` at iteration ``n``."""
        if not (1 <= k <= self.M):
            raise ContractError(f"filter index {k} outside 1..{self.M}")
        if self.kind == "full":
            return 1
        if self.kind == "same":
            return n % self.M + 1
        return (n + k - 1) % self.M + 1

    def cycle_table(self) -> np.ndarray:
        """``table[n % M, k-1]`` is the 0-based mask row for filter ``k`` at ``n``."""
        return np.array(
            [[self.mask_index(k, n) - 1 for k in range(1, self.M + 1)] for n in range(self.M)],
            dtype=np.intp,
        )

    def updates_per_iteration(self) -> float:
        """Average number of tap updates per iteration, summed over filters."""
        masks = np.array(self.masks)
        tab = self.cycle_table()
        return float(masks[tab].sum() / self.M)


def mask_for(policy: SchedulePolicy, k: int, n: int) -> np.ndarray:
    """Update mask for filter ``k`` (1-based) at iteration ``n >= 0``."""
    return policy.masks[policy.mask_index(k, n) - 1]
