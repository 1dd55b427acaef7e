"""Default tolerances, method tags and cell geometry."""
import math

TOL_HERM = 1e-10
TOL_RANK = 1e-8
TOL_UNITARY = 1e-8
TOL_BRANCH = 1e-6
TOL_CUT_SPLIT = 1e-10
TOL_GAUGE = 1e-6
TOL_GAP = 1e-8
TOL_CONT = 0.5
TOL_COMPAT = 1e-6
TOL_CLOSED = 1e-6
TOL_SYMMETRY = 1e-8
SNAP_TOLERANCE = 0.1
STEP_LIMIT = math.pi / 2
MIN_GRID = 8
MAX_GRID = 4096

CELL_FULL = "B"
CELL_HALF = "Beff"
CELLS = (CELL_FULL, CELL_HALF)

CHERN_METHODS = ("obstruction", "curvature", "plaquette")
Z2_METHODS = ("fkm_obstruction", "fkm_connection", "fkm_lattice")
ALL_METHODS = CHERN_METHODS + Z2_METHODS

INVARIANT_METHODS = {
    "chern": CHERN_METHODS,
    "z2": Z2_METHODS,
    "all": ALL_METHODS,
}

THREADS_ENV = "BLOCHOBS_THREADS"

# Literal angles accepted on the command line.
ANGLE_LITERALS = {
    "pi": math.pi,
    "pi/2": math.pi / 2,
    "pi/3": math.pi / 3,
    "pi/4": math.pi / 4,
}

PARAM_TO_ALIAS = {
    "lambda_so": "lso",
    "lambda_r": "lr",
    "lambda_v": "lv",
    "mass": "M",
}

# Vertices of the unit cell, counterclockwise from the base vertex.
CELL_VERTICES = {
    "v1": (-0.5, -0.5),
    "v2": (0.5, -0.5),
    "v3": (0.5, 0.5),
    "v4": (-0.5, 0.5),
}

# Time-reversal invariant momenta on the lower half of the effective cell
# boundary, in the order they occur along it, with the lattice vector mu
# satisfying k + mu = -k.
TRIM_ON_S = {
    "v1": ((0.0, 0.0), (0, 0)),
    "v2": ((0.0, -0.5), (0, 1)),
    "v3": ((0.5, -0.5), (-1, 1)),
    "v4": ((0.5, 0.0), (-1, 0)),
}

CSV_RESULT_COLUMNS = ("method", "raw", "value", "snap_residual", "grid_N")
GAPLESS = "gapless"
