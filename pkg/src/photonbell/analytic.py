"""Expected counts, detector intensities and their hidden-phase moments.

Two routes to the same numbers are kept side by side: time-average
quadrature of density times absorption probability (any detector model),
and the closed-form intensities of the symmetric model.

All integrands are trigonometric polynomials in the averaged variable. The
equispaced rule on one period with N nodes integrates such polynomials
exactly up to degree N - 1, so the node counts below leave a wide margin
over the degree-4 integrands that occur (products of two densities and two
probabilities in the nested variance).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np

from .model import (
    DETECTORS,
    TWO_PI,
    DetectorModel,
    ExperimentConfig,
    ModelKind,
    detection_probability,
    total_detector_density,
)

TIME_NODES = 16
THETA_NODES = 64


class DegenerateError(ArithmeticError):
    """A ratio is undefined because its denominator vanishes."""


def periodic_nodes(period: float, nodes: int) -> np.ndarray:
    return np.arange(nodes) * (period / nodes)


def time_average(f: Callable, omega: float = 1.0, nodes: int = TIME_NODES):
    """One-period mean of a periodic function of time.

    ``f`` receives the node array of shape ``(nodes,)`` and may return any
    array whose last axis runs over the nodes; that axis is averaged away.
    """
    if not omega > 0:
        raise ValueError("omega must be > 0")
    t = periodic_nodes(TWO_PI / omega, nodes)
    vals = np.asarray(f(t), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand is not finite on the quadrature nodes")
    out = vals.mean(axis=-1)
    return out if np.ndim(out) else float(out)


def theta_average(values) -> np.ndarray | float:
    """Mean over a uniform hidden-phase grid stored on the last axis."""
    out = np.asarray(values).mean(axis=-1)
    return out if np.ndim(out) else float(out)


def _as_model(model, detector: str) -> DetectorModel:
    if isinstance(model, DetectorModel):
        return DetectorModel(model.kind, detector, model.psi)
    return DetectorModel(ModelKind.parse(model), detector)


def expected_counts(detector: str, theta, cfg: ExperimentConfig, model=ModelKind.SYMMETRIC, nodes: int = TIME_NODES):
    """Time-averaged absorption of + and - photons at ``detector``.

    Returns ``(E_plus, E_minus)``; ``theta`` may be an array.
    """
    dm = _as_model(model, detector)
    th = np.expand_dims(np.asarray(theta, dtype=float), -1)

    def integrand(t):
        d = total_detector_density(detector, cfg, th, t)
        p = detection_probability(dm, cfg, th, t)
        return np.stack(np.broadcast_arrays(d.plus * p, d.minus * p))

    e = time_average(integrand, cfg.omega, nodes)
    return e[0], e[1]


def count_difference(detector: str, theta, cfg: ExperimentConfig, model=ModelKind.SYMMETRIC):
    """Signed E_plus - E_minus at a detector."""
    ep, em = expected_counts(detector, theta, cfg, model)
    return ep - em


class IntensityQuad(NamedTuple):
    i1: np.ndarray | float
    i2: np.ndarray | float
    i3: np.ndarray | float
    i4: np.ndarray | float

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(*self))


def intensities_closed_form(theta, cfg: ExperimentConfig) -> IntensityQuad:
    """Detected photon numbers I1..I4 of the symmetric detector model."""
    theta = np.asarray(theta, dtype=float)
    base = cfg.alpha + 0.5 * cfg.beta
    k = cfg.C / 16.0
    c = np.cos(theta - cfg.theta_i)
    s = np.sin(theta - cfg.theta_j)
    return IntensityQuad(
        k * (base + base * c),
        k * (base - base * c),
        k * (base - base * s),
        k * (base + base * s),
    )


def intensities_quadrature(theta, cfg: ExperimentConfig, model=ModelKind.SYMMETRIC) -> IntensityQuad:
    """I_k = |E_plus - E_minus| at each detector, by time-average quadrature."""
    return IntensityQuad(*(np.abs(count_difference(d, theta, cfg, model)) for d in DETECTORS))


def intensities(theta, cfg: ExperimentConfig, model=ModelKind.SYMMETRIC, path: str = "quadrature") -> IntensityQuad:
    if path == "closed-form":
        if ModelKind.parse(model) is not ModelKind.SYMMETRIC:
            raise ValueError("closed-form intensities exist only for the symmetric model")
        return intensities_closed_form(theta, cfg)
    if path == "quadrature":
        return intensities_quadrature(theta, cfg, model)
    raise ValueError(f"unknown computation path {path!r}")


@dataclass(frozen=True)
class ThetaMoments:
    """Hidden-phase moments of the two homodyne difference signals.

    ``rho`` is None when either variance vanishes (no correlation defined).
    """

    var12: float
    var34: float
    cov: float
    rho: float | None

    @property
    def degenerate(self) -> bool:
        return self.rho is None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degenerate"] = self.degenerate
        return d


def moments_from_differences(d12, d34, scale: float = 1.0) -> ThetaMoments:
    """Uniform-weight moments of sampled difference signals (last axis)."""
    d12 = np.asarray(d12, dtype=float)
    d34 = np.asarray(d34, dtype=float)
    m12, m34 = d12.mean(), d34.mean()
    var12 = float(np.mean((d12 - m12) ** 2))
    var34 = float(np.mean((d34 - m34) ** 2))
    cov = float(np.mean((d12 - m12) * (d34 - m34)))
    # relative floor below which a variance is roundoff from an exact zero
    floor = (1e-12 * scale) ** 2
    if scale <= 0 or var12 <= floor or var34 <= floor:
        return ThetaMoments(var12, var34, cov, None)
    rho = cov / math.sqrt(var12 * var34)
    return ThetaMoments(var12, var34, cov, float(np.clip(rho, -1.0, 1.0)))


def theta_moments(cfg: ExperimentConfig, model=ModelKind.SYMMETRIC, path: str = "quadrature", nodes: int = THETA_NODES) -> ThetaMoments:
    """Var/Cov/correlation of I1 - I2 and I3 - I4 over a uniform hidden phase."""
    theta = periodic_nodes(TWO_PI, nodes)
    q = intensities(theta, cfg, model, path)
    scale = cfg.C * (cfg.alpha + cfg.beta)
    return moments_from_differences(q.i1 - q.i2, q.i3 - q.i4, scale)


def theta_moments_closed_form(cfg: ExperimentConfig) -> ThetaMoments:
    """Closed-form moments of the symmetric model (reference values)."""
    v = cfg.C**2 * (cfg.beta + 2.0 * cfg.alpha) ** 2 / 512.0
    cov = -v * math.sin(cfg.theta_i - cfg.theta_j)
    if v == 0:
        return ThetaMoments(0.0, 0.0, 0.0, None)
    return ThetaMoments(v, v, cov, -math.sin(cfg.theta_i - cfg.theta_j))


def averaging_order_gap(cfg: ExperimentConfig, model=ModelKind.SYMMETRIC, detector: str = "D1", sign: str = "+", nodes: int = TIME_NODES):
    """Compare Var_theta of the time average with Var_t of the theta average.

    Both variances come from the same (theta, t) grid of density times
    absorption probability for the ``sign`` photons at ``detector``.
    Returns ``(var_theta_of_time_avg, var_time_of_theta_avg)``.
    """
    dm = _as_model(model, detector)
    theta = periodic_nodes(TWO_PI, nodes)[:, None]
    t = periodic_nodes(TWO_PI / cfg.omega, nodes)[None, :]
    d = total_detector_density(detector, cfg, theta, t)
    h = d.plus if sign == "+" else d.minus
    g = np.broadcast_to(h * detection_probability(dm, cfg, theta, t), (nodes, nodes))
    e_t = g.mean(axis=1)  # function of theta
    e_theta = g.mean(axis=0)  # function of t
    return float(np.var(e_t)), float(np.var(e_theta))
