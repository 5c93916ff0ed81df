"""Pointwise densities and absorption probabilities for the local photon model.

Photons carry a + or - state. Sources emit them with harmonically modulated
densities, beam splitters halve the density and (on reflection) shift its
phase by pi/2, and detectors absorb with a periodic probability. Everything
here is a pure function of its arguments and broadcasts over numpy arrays.

Path contributions of the form ``k . x`` are neglected; only phase
differences at the detectors matter.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi

DETECTORS = ("D1", "D2", "D3", "D4")
SOURCES = ("u", "alpha_i", "alpha_j")


class ModelError(ValueError):
    """Invalid physical input (singular geometry, dark point, bad detector)."""


class GeometryError(ModelError):
    """A source was queried at a detector it cannot reach."""


def reduce_phase(phi: float) -> float:
    """Reduce a phase to [0, 2pi)."""
    r = math.fmod(float(phi), TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative value can round up to exactly 2pi
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True)
class PhysicalConstants:
    omega: float = 1.0
    A_s: float = 1.0
    A: float = 1.0
    E0: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ModelError(f"omega must be > 0, got {self.omega}")
        if not self.c > 0:
            raise ModelError(f"c must be > 0, got {self.c}")
        if self.A_s < 0 or self.A < 0:
            raise ModelError("source constants A_s and A must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Free parameters of the double-homodyne setup.

    ``alpha`` is the total coherent amplitude (each coherent source has
    amplitude alpha/2), ``beta`` the amplitude of the source under study and
    ``C`` the detection efficiency. Phases are stored reduced to [0, 2pi).
    The defaults put theta_i - theta_j at pi/2 (mod 2pi).
    """

    alpha: float = 1.0
    beta: float = 1.0
    C: float = 1.0
    theta_i: float = 0.0
    theta_j: float = 1.5 * math.pi
    omega: float = 1.0

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0):
            raise ModelError("alpha and beta must be >= 0")
        if not 0 <= self.C <= 1:
            raise ModelError(f"C must lie in [0, 1], got {self.C}")
        if not self.omega > 0:
            raise ModelError(f"omega must be > 0, got {self.omega}")
        object.__setattr__(self, "theta_i", reduce_phase(self.theta_i))
        object.__setattr__(self, "theta_j", reduce_phase(self.theta_j))

    def replace(self, **changes) -> ExperimentConfig:
        values = {**self.__dict__, **changes}
        return ExperimentConfig(**values)


class SignedDensity(NamedTuple):
    plus: np.ndarray | float
    minus: np.ndarray | float

    @property
    def total(self):
        return self.plus + self.minus

    @property
    def difference(self):
        return self.plus - self.minus


# ---------------------------------------------------------------------------
# Sources, propagation and the field picture
# ---------------------------------------------------------------------------


def source_density(t, A_s: float, omega: float) -> SignedDensity:
    """Emission density of +/- photons of a harmonic source at time ``t``."""
    if not omega > 0:
        raise ModelError(f"omega must be > 0, got {omega}")
    c = np.cos(omega * np.asarray(t, dtype=float))
    return SignedDensity(0.5 * A_s * (1.0 + c), 0.5 * A_s * (1.0 - c))


def retarded_time(t, r, c: float = 1.0):
    """Emission time of a photon seen at distance ``r`` at time ``t``."""
    return np.asarray(t, dtype=float) - np.asarray(r, dtype=float) / c


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ModelError("distance r must be > 0 (1/r^2 prefactor is singular)")
    return r


def spherical_density(t, r, k: PhysicalConstants) -> SignedDensity:
    """Expectation density of +/- photons around a spherically symmetric source."""
    r = _check_radius(r)
    pref = k.A / (8.0 * math.pi * r**2)
    c = np.cos(k.omega * retarded_time(t, r, k.c))
    return SignedDensity(pref * (1.0 + c), pref * (1.0 - c))


def scalar_field(d: SignedDensity, E0: float):
    """Field value E0 (h+ - h-) / sqrt(h+ + h-)."""
    total = np.asarray(d.plus, dtype=float) + np.asarray(d.minus, dtype=float)
    if np.any(total <= 0):
        raise ModelError("scalar field undefined where h+ + h- = 0 (dark point)")
    return E0 * (np.asarray(d.plus) - np.asarray(d.minus)) / np.sqrt(total)


def spherical_field(t, r, k: PhysicalConstants):
    """Closed-form field of a spherical source, E0 sqrt(A/4pi r^2) cos w(t - r/c)."""
    r = _check_radius(r)
    return k.E0 * np.sqrt(k.A / (4.0 * math.pi * r**2)) * np.cos(
        k.omega * retarded_time(t, r, k.c)
    )


def mean_intensity(k: PhysicalConstants, r, nodes: int = 16):
    """Time average of the squared field over one period at distance ``r``.

    The squared field is a degree-2 trigonometric polynomial in t, so the
    equispaced one-period rule with ``nodes`` points is exact to roundoff.
    Compare with :func:`mean_intensity_closed_form`.
    """
    r = _check_radius(r)
    period = TWO_PI / k.omega
    t = np.arange(nodes) * (period / nodes)
    r_b = np.expand_dims(r, -1)
    if k.A == 0 or k.E0 == 0:
        return np.zeros_like(r) if r.ndim else 0.0
    e = scalar_field(spherical_density(t, r_b, k), k.E0)
    out = np.mean(e**2, axis=-1)
    return out if np.ndim(out) else float(out)


def mean_intensity_closed_form(k: PhysicalConstants, r):
    r = _check_radius(r)
    out = k.E0**2 * k.A / (8.0 * math.pi * r**2)
    return out if np.ndim(out) else float(out)


def generic_absorption_probability(t, C: float, omega: float, psi: float = 0.0):
    """Absorption probability (C/2)(1 + cos(wt + psi)) of a periodic detector."""
    return 0.5 * C * (1.0 + np.cos(omega * np.asarray(t, dtype=float) + psi))


# ---------------------------------------------------------------------------
# Interferometer bookkeeping
# ---------------------------------------------------------------------------

PASS = "pass"
REFLECT = "reflect"
REFLECTION_PHASE = 0.5 * math.pi


@dataclass(frozen=True)
class PathSpec:
    """Route from a source to a detector as a sequence of beam-splitter events.

    ``events`` holds ``(splitter, action)`` pairs with action ``"pass"`` or
    ``"reflect"``.
    """

    source: str
    detector: str
    events: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ModelError(f"unknown source {self.source!r}")
        if self.detector not in DETECTORS:
            raise ModelError(f"unknown detector {self.detector!r}")
        for _, action in self.events:
            if action not in (PASS, REFLECT):
                raise ModelError(f"beam-splitter action must be pass/reflect, got {action!r}")

    @property
    def phase(self) -> float:
        n_reflect = sum(1 for _, a in self.events if a == REFLECT)
        return reduce_phase(n_reflect * REFLECTION_PHASE)

    @property
    def attenuation(self) -> float:
        return 0.5 ** len(self.events)


# Figure-1 layout: u enters BS3 (reflect -> BS1 arm, pass -> BS2 arm); alpha_i
# enters BS1 towards D2, alpha_j enters BS2 towards D3.
FIGURE1_PATHS: dict[tuple[str, str], PathSpec] = {
    (p.source, p.detector): p
    for p in (
        PathSpec("u", "D1", (("BS3", REFLECT), ("BS1", PASS))),
        PathSpec("u", "D2", (("BS3", REFLECT), ("BS1", REFLECT))),
        PathSpec("u", "D3", (("BS3", PASS), ("BS2", REFLECT))),
        PathSpec("u", "D4", (("BS3", PASS), ("BS2", PASS))),
        PathSpec("alpha_i", "D1", (("BS1", REFLECT),)),
        PathSpec("alpha_i", "D2", (("BS1", PASS),)),
        PathSpec("alpha_j", "D3", (("BS2", PASS),)),
        PathSpec("alpha_j", "D4", (("BS2", REFLECT),)),
    )
}

# Phase offsets of the densities at each detector as tabulated in the model.
REFERENCE_DENSITY_PHASES = {
    ("u", "D1"): 0.5 * math.pi,
    ("u", "D2"): math.pi,
    ("u", "D3"): 0.5 * math.pi,
    ("u", "D4"): 0.0,
    ("alpha_i", "D1"): 0.5 * math.pi,
    ("alpha_i", "D2"): 0.0,
    ("alpha_j", "D3"): 0.0,
    ("alpha_j", "D4"): 0.5 * math.pi,
}


def path_for(detector: str, source: str) -> PathSpec:
    try:
        return FIGURE1_PATHS[(source, detector)]
    except KeyError:
        if detector not in DETECTORS or source not in SOURCES:
            raise ModelError(f"unknown detector/source {detector!r}/{source!r}") from None
        raise GeometryError(f"source {source!r} does not reach detector {detector!r}") from None


def coherent_source_for(detector: str) -> str:
    if detector in ("D1", "D2"):
        return "alpha_i"
    if detector in ("D3", "D4"):
        return "alpha_j"
    raise ModelError(f"unknown detector {detector!r}")


def _source_phase_and_amplitude(source: str, cfg: ExperimentConfig, theta):
    # prefactor of (1 +/- cos) at the source, before any beam splitter
    if source == "u":
        return theta, 0.5 * cfg.beta
    if source == "alpha_i":
        return cfg.theta_i, 0.5 * cfg.alpha
    return cfg.theta_j, 0.5 * cfg.alpha


def detector_density(detector: str, source: str, cfg: ExperimentConfig, theta, t) -> SignedDensity:
    """Density of +/- photons from ``source`` arriving at ``detector``.

    The amplitude and phase come from composing the beam-splitter events of
    the route in :data:`FIGURE1_PATHS`.
    """
    path = path_for(detector, source)
    phase0, amp = _source_phase_and_amplitude(source, cfg, theta)
    pref = amp * path.attenuation
    c = np.cos(cfg.omega * np.asarray(t, dtype=float) + np.asarray(phase0, dtype=float) + path.phase)
    return SignedDensity(pref * (1.0 + c), pref * (1.0 - c))


def total_detector_density(detector: str, cfg: ExperimentConfig, theta, t) -> SignedDensity:
    """Coherent plus u-source density at a detector (expected counts add)."""
    a = detector_density(detector, coherent_source_for(detector), cfg, theta, t)
    b = detector_density(detector, "u", cfg, theta, t)
    return SignedDensity(a.plus + b.plus, a.minus + b.minus)


# ---------------------------------------------------------------------------
# Detector absorption probabilities
# ---------------------------------------------------------------------------


class ModelKind(str, enum.Enum):
    """Absorption-probability variant.

    SYMMETRIC: the detector oscillates in phase with the coherent and the
    unknown source with equal weight. COHERENT_ONLY: only the local coherent
    phase enters. AMPLITUDE_WEIGHTED: each phase weighted by its source
    amplitude.
    """

    SYMMETRIC = "symmetric"
    COHERENT_ONLY = "coherent-only"
    AMPLITUDE_WEIGHTED = "amplitude-weighted"

    @classmethod
    def parse(cls, value) -> ModelKind:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"son": cls.COHERENT_ONLY, "nephew": cls.AMPLITUDE_WEIGHTED}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ModelError(
                f"unknown detector model {value!r}; expected one of "
                + ", ".join(m.value for m in cls)
            ) from None


# Detector oscillation phases: (offset on the coherent phase, offset on theta).
# These are properties of the absorbers, not of the photon paths; at D2 the
# detector runs in antiphase with the arriving densities.
DETECTOR_PHASES = {
    "D1": (0.5 * math.pi, 0.5 * math.pi),
    "D2": (math.pi, 0.0),
    "D3": (0.0, 0.5 * math.pi),
    "D4": (0.5 * math.pi, 0.0),
}


@dataclass(frozen=True)
class DetectorModel:
    """Variant in force at one detector.

    ``psi`` only feeds :func:`generic_absorption_probability`; the concrete
    variants take their phases from theta, theta_i and theta_j.
    """

    kind: ModelKind = ModelKind.SYMMETRIC
    detector_id: str = "D1"
    psi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if self.detector_id not in DETECTORS:
            raise ModelError(f"unknown detector {self.detector_id!r}")


def detection_probability(model: DetectorModel, cfg: ExperimentConfig, theta, t):
    """Absorption probability at ``model.detector_id``; lies in [0, C]."""
    det = model.detector_id
    coh_off, u_off = DETECTOR_PHASES[det]
    coh_phase = cfg.theta_i if det in ("D1", "D2") else cfg.theta_j
    wt = cfg.omega * np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c_coh = np.cos(wt + coh_phase + coh_off)
    kind = model.kind
    if kind is ModelKind.SYMMETRIC:
        return 0.25 * cfg.C * (2.0 + c_coh + np.cos(wt + theta + u_off))
    if kind is ModelKind.COHERENT_ONLY:
        return 0.5 * cfg.C * (1.0 + c_coh + 0.0 * theta)
    total = cfg.alpha + cfg.beta
    if total <= 0:
        raise ModelError("amplitude-weighted detector needs alpha + beta > 0")
    mix = (cfg.alpha * c_coh + cfg.beta * np.cos(wt + theta + u_off)) / total
    return 0.5 * cfg.C * (1.0 + mix)
