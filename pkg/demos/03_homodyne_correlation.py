# Intensities, hidden-phase moments and the correlation for each detector model.
import math

import numpy as np

from photonbell.analytic import averaging_order_gap, intensities_closed_form, intensities_quadrature, theta_moments
from photonbell.model import ExperimentConfig, ModelKind

cfg = ExperimentConfig(alpha=1.0, beta=0.6, C=0.8, theta_i=0.9, theta_j=0.2)

theta = np.linspace(0, 2 * math.pi, 7)
q = intensities_quadrature(theta, cfg).as_array()
c = intensities_closed_form(theta, cfg).as_array()
print("quadrature vs closed form, max deviation:", np.abs(q - c).max())

print("expected rho:", -math.sin(cfg.theta_i - cfg.theta_j))
for kind in ModelKind:
    m = theta_moments(cfg, kind)
    print(f"{kind.value:20s} var12={m.var12:.6f} var34={m.var34:.6f} rho={m.rho:+.12f}")

# the correlation is not the same for every model once beta > alpha
weak = cfg.replace(alpha=0.3, beta=1.0)
for kind in ModelKind:
    print(f"alpha=0.3, beta=1 {kind.value:20s} rho={theta_moments(weak, kind).rho:+.6f}")

v1, v2 = averaging_order_gap(ExperimentConfig())
print(f"Var_theta E_t(D1+) = {v1:.6g}   Var_t E_theta(D1+) = {v2:.6g}")
