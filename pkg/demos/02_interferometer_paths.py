# Phase offsets at the four detectors follow from counting reflections.
from photonbell.model import FIGURE1_PATHS, REFERENCE_DENSITY_PHASES

for (source, detector), path in sorted(FIGURE1_PATHS.items(), key=lambda kv: kv[0][1]):
    route = " -> ".join(f"{bs}:{act}" for bs, act in path.events)
    print(f"{source:8s} -> {detector}: {route:28s} phase {path.phase:.4f}  x{path.attenuation}")
    assert abs(path.phase - REFERENCE_DENSITY_PHASES[(source, detector)]) < 1e-15
