"""Test constants."""

import math

SEED = 20240601

HALDANE_TOPOLOGICAL = {"t1": 1.0, "t2": 0.1, "phi": math.pi / 2, "M": 0.0}
HALDANE_TRIVIAL = {"t1": 1.0, "t2": 0.1, "phi": math.pi / 2, "M": 1.0}
HALDANE_REAL = {"t1": 1.0, "t2": 0.0, "phi": 0.0, "M": 0.5}

KANE_MELE_QSH = {"t": 1.0, "lso": 0.06, "lr": 0.0, "lv": 0.1}
KANE_MELE_RASHBA = {"t": 1.0, "lso": 0.06, "lr": 0.05, "lv": 0.1}
KANE_MELE_TRIVIAL = {"t": 1.0, "lso": 0.06, "lr": 0.0, "lv": 0.6}

# Haldane mass terms at the two Dirac points are M -/+ 3*sqrt(3)*t2*sin(phi).
HALDANE_CRITICAL_MASS = 3 * math.sqrt(3) * 0.1

DIRAC_POINT = (1 / 3, 1 / 3)

# Time-reversal invariant momenta on the lower half of the effective cell.
TRIM = ((0.0, 0.0), (0.0, -0.5), (0.5, -0.5), (0.5, 0.0))

# Phase-diagram grids at t1 = 1, t2 = 0.1 and lambda_so = 0.06.
HALDANE_MASSES = (0.0, 0.3, 0.6, 0.9, 1.2)
HALDANE_FLUXES = (math.pi / 2, -math.pi / 2, math.pi / 4, -math.pi / 4, math.pi / 8)
KANE_MELE_VALLEY = (0.05, 0.1, 0.2, 0.4, 0.6)
KANE_MELE_RASHBA_VALUES = (0.0, 0.03)
KANE_MELE_CRITICAL_VALLEY = 3 * math.sqrt(3) * 0.06
