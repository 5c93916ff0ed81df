# Densities of +/- photons, the field they define, and its mean intensity.
import math

import numpy as np

from photonbell.model import PhysicalConstants, mean_intensity, scalar_field, spherical_density, spherical_field

k = PhysicalConstants(omega=1.0, A=8 * math.pi, E0=1.0)
t = np.linspace(0, 4 * math.pi, 9)

d = spherical_density(t, 1.0, k)
print("h+ :", np.round(d.plus, 4))
print("h- :", np.round(d.minus, 4))
print("h+ + h- is constant:", np.allclose(d.total, k.A / (4 * math.pi)))

# field from the densities vs its closed form
e = scalar_field(d, k.E0)
print("max |E - closed form| =", np.max(np.abs(e - spherical_field(t, 1.0, k))))

for r in (1.0, 2.0, 4.0):
    print(f"r = {r}: <E^2> = {mean_intensity(k, r):.6f}")
