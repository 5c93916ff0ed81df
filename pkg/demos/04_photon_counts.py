# Monte Carlo +/-1 counts with X and Y independent given the hidden phase.
import math

from photonbell.counts import SamplerSpec, oracle_covariance, simulate
from photonbell.model import ExperimentConfig

spec = SamplerSpec(n=1_000_000, seed=7)
for delta in (0.0, math.pi / 4, math.pi / 2, math.pi):
    cfg = ExperimentConfig(theta_i=delta, theta_j=0.0)
    res = simulate(spec, cfg, workers=2)
    print(
        f"delta={delta:.4f}  E(X)={res.mean_x.mean:+.4f}  E(Y)={res.mean_y.mean:+.4f}  "
        f"Cov={res.cov.mean:+.4f}+-{res.cov.se:.4f}  oracle={oracle_covariance(cfg):+.4f}  "
        f"published={-math.sin(delta):+.4f}"
    )
