"""CHSH statistics over correlation functions of two setting phases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import TWO_PI, reduce_phase

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class ChshSetting:
    """Two theta_i-type settings (a, a') and two theta_j-type settings (b, b')."""

    a: float
    a_prime: float
    b: float
    b_prime: float

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, reduce_phase(getattr(self, name)))

    def pairs(self):
        return (
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        )

    def shifted(self, offset: float) -> ChshSetting:
        return ChshSetting(self.a + offset, self.a_prime + offset, self.b + offset, self.b_prime + offset)


@dataclass(frozen=True)
class ChshResult:
    terms: tuple[float, float, float, float]
    s: float

    @property
    def violated(self) -> bool:
        return abs(self.s) > CLASSICAL_BOUND

    def to_dict(self) -> dict:
        return {"terms": list(self.terms), "s": self.s, "violated": self.violated}


def chsh_from_terms(terms) -> ChshResult:
    e_ab, e_abp, e_apb, e_apbp = (float(v) for v in terms)
    vals = (e_ab, e_abp, e_apb, e_apbp)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"correlation returned non-finite values: {vals}")
    return ChshResult(vals, e_ab + e_abp + e_apb - e_apbp)


def chsh_statistic(setting: ChshSetting, corr: Callable[[float, float], float]) -> ChshResult:
    """S = E(a,b) + E(a,b') + E(a',b) - E(a',b')."""
    return chsh_from_terms(corr(x, y) for x, y in setting.pairs())


def analytic_correlation(theta_i, theta_j):
    """Homodyne correlation -sin(theta_i - theta_j)."""
    return -np.sin(np.asarray(theta_i) - np.asarray(theta_j))


def count_oracle_correlation(theta_i, theta_j):
    """Count covariance -(1/2) sin(theta_i - theta_j) under conditional independence."""
    return -0.5 * np.sin(np.asarray(theta_i) - np.asarray(theta_j))


def _corr_matrix(corr, phases):
    a = phases[:, None]
    b = phases[None, :]
    try:
        m = np.asarray(corr(a, b), dtype=float)
        if m.shape != (len(phases), len(phases)):
            m = np.broadcast_to(m, (len(phases), len(phases)))
    except (TypeError, ValueError):
        m = np.array([[float(corr(x, y)) for y in phases] for x in phases])
    if not np.all(np.isfinite(m)):
        raise ValueError("correlation returned non-finite values")
    return m


def find_max_violation(corr: Callable, grid: int = 16) -> tuple[ChshSetting, ChshResult]:
    """Exhaustive search of |S| over phases k * 2pi / grid on all four axes.

    Ties, up to a relative 1e-12 of roundoff, go to the lexicographically
    smallest index tuple (a, a', b, b').
    """
    if grid < 8:
        raise ValueError(f"grid must be >= 8, got {grid}")
    phases = np.arange(grid) * (TWO_PI / grid)
    m = _corr_matrix(corr, phases)
    # s[a, a', b, b'] = m[a,b] + m[a,b'] + m[a',b] - m[a',b']
    s = (
        m[:, None, :, None]
        + m[:, None, None, :]
        + m[None, :, :, None]
        - m[None, :, None, :]
    )
    abs_s = np.abs(s).ravel()
    best = abs_s.max()
    first = int(np.flatnonzero(abs_s >= best - 1e-12 * max(1.0, best))[0])
    idx = np.unravel_index(first, s.shape)
    setting = ChshSetting(*(phases[i] for i in idx))
    ia, iap, ib, ibp = idx
    terms = (m[ia, ib], m[ia, ibp], m[iap, ib], m[iap, ibp])
    return setting, chsh_from_terms(terms)
