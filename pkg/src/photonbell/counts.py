"""Discrete +/-1 photon counts for the two homodyne pairs.

Each trial draws a hidden phase uniformly, then the outcomes X (pair D1/D2)
and Y (pair D3/D4) independently given that phase, with conditional means
set by the detector intensities. Independence given the hidden phase is the
locality condition of the model.

Random streams are counter-based (Philox) and keyed per chunk, so a run is
bit-reproducible for fixed ``(n, seed, chunk)`` regardless of how many
workers process the chunks. Reduction uses integer sums of +/-1 outcomes and
is therefore exact in any order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .analytic import THETA_NODES, DegenerateError, intensities_closed_form, periodic_nodes
from .model import TWO_PI, ExperimentConfig

RATIO = "ratio"
PUBLISHED = "published"

DISCREPANCY_NOTE = (
    "Cov(X,Y) reported here follows from conditional independence of X and Y "
    "given theta: E_theta[E(X|theta) E(Y|theta)] = -(1/2) sin(theta_i - theta_j) "
    "with the ratio-derived sign convention. The published value "
    "-sin(theta_i - theta_j) is not reproduced by that construction; "
    "the published E(Y|theta) = sin(theta - theta_j) also has the opposite sign "
    "to the ratio (I3 - I4)/(I3 + I4) = -sin(theta - theta_j)."
)


def conditional_expectations(theta, cfg: ExperimentConfig, convention: str = RATIO):
    """Conditional means ``(E(X|theta), E(Y|theta))``.

    ``"ratio"`` takes (I1 - I2)/(I1 + I2) and (I3 - I4)/(I3 + I4) from the
    symmetric-model intensities; ``"published"`` returns the displayed formulas
    cos(theta - theta_i) and sin(theta - theta_j), which differ in the sign
    of the Y mean.
    """
    theta = np.asarray(theta, dtype=float)
    if convention == PUBLISHED:
        if cfg.C == 0 or cfg.alpha + 0.5 * cfg.beta == 0:
            raise DegenerateError("no photons reach the detectors")
        return np.cos(theta - cfg.theta_i), np.sin(theta - cfg.theta_j)
    if convention != RATIO:
        raise ValueError(f"unknown convention {convention!r}")
    q = intensities_closed_form(theta, cfg)
    nx = q.i1 + q.i2
    ny = q.i3 + q.i4
    if np.any(nx <= 0) or np.any(ny <= 0):
        raise DegenerateError("I1 + I2 or I3 + I4 vanishes; conditional means undefined")
    ex = np.clip((q.i1 - q.i2) / nx, -1.0, 1.0)
    ey = np.clip((q.i3 - q.i4) / ny, -1.0, 1.0)
    return ex, ey


def oracle_covariance(cfg: ExperimentConfig, convention: str = RATIO, nodes: int = THETA_NODES) -> float:
    """E_theta[E(X|theta) E(Y|theta)] by equispaced quadrature over theta."""
    theta = periodic_nodes(TWO_PI, nodes)
    ex, ey = conditional_expectations(theta, cfg, convention)
    return float(np.mean(ex * ey) - np.mean(ex) * np.mean(ey))


@dataclass(frozen=True)
class SamplerSpec:
    n: int = 1_000_000
    seed: int = 0
    chunk: int = 1 << 16

    def __post_init__(self):
        for name in ("n", "seed", "chunk"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ValueError(f"sampler {name} must be an integer, got {v!r}")
        if self.n < 1:
            raise ValueError(f"sampler n must be >= 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"sampler seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.chunk < 1:
            raise ValueError(f"sampler chunk must be >= 1, got {self.chunk}")

    @property
    def n_chunks(self) -> int:
        return -(-self.n // self.chunk)

    def chunk_size(self, index: int) -> int:
        return min(self.chunk, self.n - index * self.chunk)

    def generator(self, index: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(index,))
        return np.random.Generator(np.random.Philox(seq))


class CountSample(NamedTuple):
    theta: float
    x: int
    y: int


@dataclass(frozen=True)
class CountSamples:
    """Column-wise batch of trials."""

    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.x)

    def __iter__(self) -> Iterator[CountSample]:
        for th, x, y in zip(self.theta, self.x, self.y):
            yield CountSample(float(th), int(x), int(y))

    @classmethod
    def concatenate(cls, parts: Iterable[CountSamples]) -> CountSamples:
        parts = list(parts)
        return cls(
            np.concatenate([p.theta for p in parts]),
            np.concatenate([p.x for p in parts]),
            np.concatenate([p.y for p in parts]),
        )


def sample_chunk(spec: SamplerSpec, cfg: ExperimentConfig, index: int, convention: str = RATIO, theta: float | None = None) -> CountSamples:
    rng = spec.generator(index)
    m = spec.chunk_size(index)
    if theta is None:
        th = rng.random(m) * TWO_PI
    else:
        th = np.full(m, float(theta))
    u = rng.random((2, m))
    ex, ey = conditional_expectations(th, cfg, convention)
    x = np.where(u[0] < 0.5 * (1.0 + ex), 1, -1).astype(np.int8)
    y = np.where(u[1] < 0.5 * (1.0 + ey), 1, -1).astype(np.int8)
    return CountSamples(th, x, y)


def iter_counts(spec: SamplerSpec, cfg: ExperimentConfig, convention: str = RATIO, theta: float | None = None) -> Iterator[CountSamples]:
    for k in range(spec.n_chunks):
        yield sample_chunk(spec, cfg, k, convention, theta)


def sample_counts(spec: SamplerSpec, cfg: ExperimentConfig, convention: str = RATIO, theta: float | None = None) -> CountSamples:
    """All trials of a run; ``theta`` pins the hidden phase instead of drawing it."""
    return CountSamples.concatenate(iter_counts(spec, cfg, convention, theta))


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    n: int

    def contains(self, value: float, k: float = 4.0) -> bool:
        return abs(self.mean - value) <= k * self.se

    def to_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "n": self.n}


@dataclass(frozen=True)
class CountMoments:
    """Integer sums of X, Y and XY over ``n`` trials."""

    n: int = 0
    sx: int = 0
    sy: int = 0
    sxy: int = 0

    @classmethod
    def from_samples(cls, s: CountSamples) -> CountMoments:
        x = s.x.astype(np.int64)
        y = s.y.astype(np.int64)
        return cls(len(x), int(x.sum()), int(y.sum()), int((x * y).sum()))

    def __add__(self, other: CountMoments) -> CountMoments:
        return CountMoments(self.n + other.n, self.sx + other.sx, self.sy + other.sy, self.sxy + other.sxy)

    def mean_x(self) -> Estimate:
        return _mean_pm1(self.sx, self.n)

    def mean_y(self) -> Estimate:
        return _mean_pm1(self.sy, self.n)

    def covariance(self) -> Estimate:
        n = self.n
        if n < 2:
            raise ValueError(f"covariance needs n >= 2 samples, got {n}")
        mx, my, mxy = self.sx / n, self.sy / n, self.sxy / n
        cov = mxy - mx * my
        # x^2 = y^2 = 1 lets the fourth moment of the centred product be
        # written through the first moments alone
        m4 = 1.0 - mx * mx - my * my - 3.0 * mx * mx * my * my + 4.0 * mx * my * mxy
        var = max(m4 - cov * cov, 0.0)
        return Estimate(cov, math.sqrt(var / n), n)


def _mean_pm1(total: int, n: int) -> Estimate:
    if n < 1:
        raise ValueError("no samples")
    m = total / n
    return Estimate(m, math.sqrt(max(1.0 - m * m, 0.0) / n), n)


def estimate_correlation(samples) -> Estimate:
    """Sample Cov(X, Y) with its standard error.

    For +/-1 outcomes with zero mean this is also the correlation. Accepts a
    :class:`CountSamples` batch, :class:`CountMoments`, or any iterable of
    ``(theta, x, y)`` trials.
    """
    if isinstance(samples, CountMoments):
        return samples.covariance()
    if not isinstance(samples, CountSamples):
        rows = list(samples)
        if not rows:
            raise ValueError("covariance needs n >= 2 samples, got 0")
        th, x, y = zip(*rows)
        samples = CountSamples(np.asarray(th, float), np.asarray(x, np.int8), np.asarray(y, np.int8))
    bad = ~np.isin(samples.x, (-1, 1)) | ~np.isin(samples.y, (-1, 1))
    if np.any(bad):
        raise ValueError("outcomes must be +1 or -1")
    return CountMoments.from_samples(samples).covariance()


@dataclass(frozen=True)
class CountSummary:
    moments: CountMoments
    mean_x: Estimate
    mean_y: Estimate
    cov: Estimate


def simulate(spec: SamplerSpec, cfg: ExperimentConfig, workers: int = 1, convention: str = RATIO, theta: float | None = None) -> CountSummary:
    """Run all chunks, reduce their moments in chunk order and summarise."""
    if spec.n < 2:
        raise ValueError(f"simulation needs n >= 2 trials, got {spec.n}")

    def run(k):
        return CountMoments.from_samples(sample_chunk(spec, cfg, k, convention, theta))

    indices = range(spec.n_chunks)
    if workers <= 1:
        parts = [run(k) for k in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, indices))
    total = CountMoments()
    for p in parts:
        total = total + p
    return CountSummary(total, total.mean_x(), total.mean_y(), total.covariance())
