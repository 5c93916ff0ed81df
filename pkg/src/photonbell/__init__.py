"""Local particle model of photons in a double-homodyne Bell test.

Three independent routes to the homodyne correlation are provided: closed
form, time/phase quadrature, and Monte Carlo +/-1 counts, plus CHSH
evaluation over any correlation function.
"""

from .analytic import (
    DegenerateError,
    IntensityQuad,
    ThetaMoments,
    averaging_order_gap,
    expected_counts,
    intensities_closed_form,
    intensities_quadrature,
    theta_moments,
    theta_moments_closed_form,
    time_average,
)
from .bell import ChshResult, ChshSetting, analytic_correlation, chsh_statistic, find_max_violation
from .counts import (
    CountSample,
    CountSamples,
    Estimate,
    SamplerSpec,
    conditional_expectations,
    estimate_correlation,
    oracle_covariance,
    sample_counts,
    simulate,
)
from .model import (
    DetectorModel,
    ExperimentConfig,
    GeometryError,
    ModelError,
    ModelKind,
    PathSpec,
    PhysicalConstants,
    SignedDensity,
    detection_probability,
    detector_density,
    mean_intensity,
    scalar_field,
    source_density,
    spherical_density,
)

__version__ = "0.1.0"
