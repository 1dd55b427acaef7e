"""Chern and Fu–Kane–Mele invariants, three routes each.

The obstruction routes measure the determinant winding of the residual
gauge Û between a transported frame and the symmetric boundary frame.
The curvature and connection routes integrate Berry curvature, and the
plaquette and lattice routes are independent link-variable oracles.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Tuple

import numpy as np

from python_blochobs import const
from python_blochobs.config import DEFAULT_TOLERANCES, Tolerances
from python_blochobs.exceptions import (
    CompatViolated,
    NoTrs,
    RankDeficient,
    SnapFailed,
    StepTooLarge,
    SubspaceMismatch,
)
from python_blochobs.frames import (
    BoundaryFrame,
    FrameField,
    boundary_frame_chern,
    boundary_frame_trs,
    boundary_link_phases,
    boundary_path,
    grid_momenta,
    obstruction_chern,
    obstruction_trs,
    random_periodic_gauge,
    random_symmetric_gauge,
    sweep_frame,
    symmetry_residuals,
    unwind_map,
)
from python_blochobs.linalg import dagger, det_phase_winding
from python_blochobs.models import (
    BlochModel,
    Check,
    SymmetryReport,
    cell_grid,
    kramers_frame,
    normal_form_epsilon,
    occupied_frames,
    projectors,
    verify_symmetries,
)

_LOGGER = logging.getLogger(__name__)

# Random gauge samples are smooth but not small; unwrap them up to just below π.
_SAMPLE_STEP_LIMIT = 0.9 * np.pi


@dataclass(frozen=True)
class InvariantResult:
    """One invariant computed by one method."""

    method: str
    """Method tag, one of const.ALL_METHODS."""

    raw: float
    """Unsnapped value."""

    value: int
    """Snapped integer, or the Z2 class in {0, 1}."""

    snap_residual: float
    grid_n: int
    refinements: int = 0
    details: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        """Return the JSON record of this result."""
        return {
            "method": self.method,
            "raw": self.raw,
            "value": self.value,
            "snap_residual": self.snap_residual,
            "grid_N": self.grid_n,
            "refinements": self.refinements,
        }


@dataclass(frozen=True, eq=False)
class BerryField:
    """Berry connection and curvature of a frame field on a cell grid."""

    momenta: np.ndarray
    connection: np.ndarray
    """A_μ = -iΨ†∂_μΨ per node, shape (..., 2, m, m)."""

    abelian_connection: np.ndarray
    """Real trace of A_μ per node, shape (..., 2)."""

    abelian_curvature: np.ndarray
    """Per-plaquette Berry phase (curvature × plaquette area) from link variables."""

    projector_curvature: np.ndarray
    """The same quantity from -i Tr(P[∂1P, ∂2P]) at the plaquette corners."""

    @property
    def discrepancy(self) -> float:
        """Largest difference between the two curvature routes."""
        return float(np.max(np.abs(self.abelian_curvature - self.projector_curvature)))


def _snap(raw: float, tolerance: float) -> Tuple[int, float]:
    value = int(round(raw))
    residual = abs(raw - value)
    if residual >= tolerance:
        raise SnapFailed(raw)
    return value, residual


def _ensure_continuous(psi: FrameField, tolerances: Tolerances) -> None:
    if psi.max_jump > tolerances.cont:
        raise RankDeficient(
            f"(adjacent frames differ by {psi.max_jump:.3f} > {tolerances.cont})"
        )


def _refine(
    method: str,
    compute: Callable[[int], InvariantResult],
    grid_n: int,
    tolerances: Tolerances,
) -> InvariantResult:
    """Run compute, doubling N while the grid is too coarse."""
    refinements = 0
    while True:
        try:
            result = compute(grid_n)
        except (StepTooLarge, SnapFailed, RankDeficient) as err:
            if grid_n * 2 > tolerances.max_grid:
                raise
            _LOGGER.info("%s: %s at N=%d, refining", method, err, grid_n)
            grid_n *= 2
            refinements += 1
            continue
        return replace(result, refinements=refinements)


def _links(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.linalg.det(dagger(left) @ right)


def plaquette_phases(frames: np.ndarray) -> np.ndarray:
    """Gauge-invariant Berry phase of every plaquette of a frame grid.

    Args:
        frames: Array of shape (N1, N2, n, m).

    Returns:
        Array of shape (N1 - 1, N2 - 1), each plaquette traversed
        counterclockwise in (k1, k2).
    """
    horizontal = _links(frames[:-1], frames[1:])
    vertical = _links(frames[:, :-1], frames[:, 1:])
    return np.angle(
        horizontal[:, :-1]
        * vertical[1:, :]
        * np.conj(horizontal[:, 1:])
        * np.conj(vertical[:-1, :])
    )


def _wrapped_frames(
    model: BlochModel, grid_n: int, tolerances: Tolerances
) -> np.ndarray:
    """Eigenframes on the periodic N×N grid, closed up by τ images."""
    assert model.tau is not None
    tau_e1, tau_e2 = model.tau
    frames = occupied_frames(model, cell_grid(grid_n), tolerances.gap, tolerances.herm)
    bulk = frames.frames
    closed = np.empty((grid_n + 1, grid_n + 1) + bulk.shape[-2:], dtype=complex)
    closed[:grid_n, :grid_n] = bulk
    closed[grid_n, :grid_n] = tau_e1 @ bulk[0]
    closed[:grid_n, grid_n] = tau_e2 @ bulk[:, 0]
    closed[grid_n, grid_n] = tau_e1 @ tau_e2 @ bulk[0, 0]
    return closed


def chern_plaquette(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Chern number from link-variable plaquette phases of eigenframes."""
    phases = plaquette_phases(_wrapped_frames(model, grid_n, tolerances))
    raw = float(np.sum(phases)) / (2 * np.pi)
    value, residual = _snap(raw, tolerances.snap)
    return InvariantResult("plaquette", raw, value, residual, grid_n)


def _shifted(
    values: np.ndarray, axis: int, tau: np.ndarray, forward: bool
) -> np.ndarray:
    """Projectors at k ± e_axis/N on the periodic grid, wrapping through τ."""
    rolled = np.roll(values, -1 if forward else 1, axis=axis)
    edge = [slice(None)] * values.ndim
    edge[axis] = -1 if forward else 0
    translation = tau if forward else dagger(tau)
    rolled[tuple(edge)] = translation @ rolled[tuple(edge)] @ dagger(translation)
    return rolled


def _curvature_density(
    projector: np.ndarray, first: np.ndarray, second: np.ndarray
) -> np.ndarray:
    """Return -i Tr(P[∂1P, ∂2P])."""
    commutator = first @ second - second @ first
    return np.real(-1j * np.trace(projector @ commutator, axis1=-2, axis2=-1))


def chern_curvature(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Chern number by integrating the projector curvature with central differences."""
    assert model.tau is not None

    def compute(size: int) -> InvariantResult:
        occupation = occupied_frames(
            model, cell_grid(size), tolerances.gap, tolerances.herm
        )
        projected = projectors(occupation.frames)
        derivatives = []
        for axis, tau in enumerate(model.tau):
            forward = _shifted(projected, axis, tau, True)
            backward = _shifted(projected, axis, tau, False)
            derivatives.append(0.5 * size * (forward - backward))
        density = _curvature_density(projected, derivatives[0], derivatives[1])
        raw = float(np.sum(density)) / (size * size * 2 * np.pi)
        value, residual = _snap(raw, tolerances.snap)
        return InvariantResult("curvature", raw, value, residual, size)

    return _refine("curvature", compute, grid_n, tolerances)


def chern_from_frame(
    psi: FrameField, model: BlochModel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Obstruction degree of a caller-supplied continuous frame on B."""
    assert model.tau is not None
    obstructions = obstruction_chern(psi, model.tau, tolerances)
    boundary = boundary_frame_chern(psi, obstructions, model.tau, tolerances)
    winding = det_phase_winding(boundary.gauge, tolerances.step, tolerances.snap)
    return InvariantResult(
        "obstruction",
        -winding.raw,
        -winding.degree,
        abs(winding.raw - winding.degree),
        psi.grid_n,
        details={
            "max_step": winding.max_step,
            "branch_margin": min(log.branch_margin for log in obstructions.logs),
            "matching": max(boundary.matching.values()),
        },
    )


def chern_obstruction(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Chern number as the degree of the residual gauge on ∂B."""

    def compute(size: int) -> InvariantResult:
        psi = sweep_frame(model, size, const.CELL_FULL, tolerances=tolerances)
        _ensure_continuous(psi, tolerances)
        return chern_from_frame(psi, model, tolerances)

    return _refine("obstruction", compute, grid_n, tolerances)


def _projector_curvature(
    model: BlochModel, momenta: np.ndarray, tolerances: Tolerances
) -> np.ndarray:
    """Per-plaquette curvature from the model's projectors, corner-averaged."""
    steps = (
        float(momenta[1, 0, 0] - momenta[0, 0, 0]),
        float(momenta[0, 1, 1] - momenta[0, 0, 1]),
    )

    def at(shift: np.ndarray) -> np.ndarray:
        shifted = momenta + shift
        occupation = occupied_frames(model, shifted, tolerances.gap, tolerances.herm)
        return projectors(occupation.frames)

    derivatives = [
        (at(offset * step) - at(-offset * step)) / (2 * step)
        for offset, step in zip(np.eye(2), steps)
    ]
    density = _curvature_density(at(np.zeros(2)), derivatives[0], derivatives[1])
    corners = density[:-1, :-1] + density[1:, :-1] + density[1:, 1:] + density[:-1, 1:]
    return 0.25 * corners * steps[0] * steps[1]


def berry_field(
    frames: FrameField, model: BlochModel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> BerryField:
    """Berry connection and curvature of a frame field on a cell grid.

    The connection uses central differences of the frames. The curvature
    is computed twice: as link-variable plaquette phases of the frames
    (the discrete dA of the trace) and from the model's projectors.
    """
    momenta = frames.momenta
    steps = (
        float(momenta[1, 0, 0] - momenta[0, 0, 0]),
        float(momenta[0, 1, 1] - momenta[0, 0, 1]),
    )
    derivatives = np.gradient(frames.frames, *steps, axis=(0, 1))
    connection = np.stack(
        [-1j * dagger(frames.frames) @ derivative for derivative in derivatives],
        axis=-3,
    )
    return BerryField(
        momenta=momenta,
        connection=connection,
        abelian_connection=np.real(np.trace(connection, axis1=-2, axis2=-1)),
        abelian_curvature=plaquette_phases(frames.frames),
        projector_curvature=_projector_curvature(model, momenta, tolerances),
    )


def _require_trs(model: BlochModel) -> None:
    if not model.has_trs:
        raise NoTrs(f"({model.name})")


def fkm_from_frame(
    psi: FrameField, model: BlochModel, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Parity of the obstruction degree of a caller-supplied frame on B_eff."""
    _require_trs(model)
    obstructions = obstruction_trs(psi, model, tolerances)
    boundary = boundary_frame_trs(psi, obstructions, model, tolerances)
    winding = det_phase_winding(boundary.gauge, tolerances.step, tolerances.snap)
    return InvariantResult(
        "fkm_obstruction",
        -winding.raw,
        winding.degree % 2,
        abs(winding.raw - winding.degree),
        psi.grid_n,
        details={
            "degree": float(-winding.degree),
            "max_step": winding.max_step,
            "compat": float(np.max(obstructions.compat_residuals)),
            "matching": max(boundary.matching.values()),
        },
    )


def fkm_obstruction(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Fu–Kane–Mele index as the obstruction degree mod 2 on ∂B_eff."""
    _require_trs(model)

    def compute(size: int) -> InvariantResult:
        psi = sweep_frame(model, size, const.CELL_HALF, tolerances=tolerances)
        _ensure_continuous(psi, tolerances)
        return fkm_from_frame(psi, model, tolerances)

    return _refine("fkm_obstruction", compute, grid_n, tolerances)


def boundary_reduction(boundary: BoundaryFrame) -> Tuple[float, float]:
    """Return ∮Â over ∂B_eff and 2·(∫_E1 Â + ∫_E3 Â)."""
    phases = boundary_link_phases(boundary)
    markers = boundary.path.markers
    first = phases[markers["v1"] : markers["v2"]]
    third = phases[markers["v3"] : markers["v4"]]
    return float(np.sum(phases)), 2 * float(np.sum(first) + np.sum(third))


def fkm_connection_curvature(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Fu–Kane–Mele index from ∫_{B_eff} F − ∮ Â in the symmetric frame."""
    _require_trs(model)

    def compute(size: int) -> InvariantResult:
        psi = sweep_frame(model, size, const.CELL_HALF, tolerances=tolerances)
        _ensure_continuous(psi, tolerances)
        obstructions = obstruction_trs(psi, model, tolerances)
        boundary = boundary_frame_trs(psi, obstructions, model, tolerances)
        bulk = float(np.sum(plaquette_phases(psi.frames)))
        loop, reduced = boundary_reduction(boundary)
        raw = (bulk - loop) / (2 * np.pi)
        value, residual = _snap(raw, tolerances.snap)
        return InvariantResult(
            "fkm_connection",
            raw,
            value % 2,
            residual,
            size,
            details={"boundary": loop, "boundary_reduced": reduced},
        )

    return _refine("fkm_connection", compute, grid_n, tolerances)


def constrained_frames(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Eigenframes on the B_eff grid in a time-reversal constrained gauge.

    Kramers-adapted frames sit at the TRIM on S, the upper halves of the
    vertical edges are time-reversal images of the lower halves and the
    top row is the τ_{e2} image of the bottom row.
    """
    assert model.trs is not None
    momenta = grid_momenta(grid_n, const.CELL_HALF)
    frames = occupied_frames(model, momenta, tolerances.gap, tolerances.herm).frames
    frames = np.array(frames)
    half = grid_n // 2
    positions = {"v1": (0, half), "v2": (0, 0), "v3": (half, 0), "v4": (half, half)}
    for name, (_, mu) in const.TRIM_ON_S.items():
        frames[positions[name]] = kramers_frame(model, mu, frames[positions[name]])

    normal = normal_form_epsilon(model.m)
    tau_e1, tau_e2 = model.translation((1, 0)), model.translation((0, 1))
    for row in range(half + 1, grid_n + 1):
        frames[0, row] = model.time_reverse(frames[0, grid_n - row]) @ normal
        image = model.time_reverse(frames[half, grid_n - row]) @ normal
        frames[half, row] = tau_e1 @ image
    frames[:, grid_n] = tau_e2 @ frames[:, 0]
    return frames


def fkm_lattice_oracle(
    model: BlochModel, grid_n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> InvariantResult:
    """Fu–Kane–Mele index from link variables in a constrained gauge on B_eff."""
    _require_trs(model)

    def compute(size: int) -> InvariantResult:
        frames = constrained_frames(model, size, tolerances)
        indices = boundary_path(size, const.CELL_HALF).grid_indices
        assert indices is not None
        loop = frames[indices[:, 0], indices[:, 1]]
        edge = float(np.sum(np.angle(_links(loop[:-1], loop[1:]))))
        bulk = float(np.sum(plaquette_phases(frames)))
        raw = (bulk - edge) / (2 * np.pi)
        value, residual = _snap(raw, tolerances.snap)
        return InvariantResult("fkm_lattice", raw, value % 2, residual, size)

    return _refine("fkm_lattice", compute, grid_n, tolerances)


METHODS: Dict[str, Callable[[BlochModel, int, Tolerances], InvariantResult]] = {
    "obstruction": chern_obstruction,
    "curvature": chern_curvature,
    "plaquette": chern_plaquette,
    "fkm_obstruction": fkm_obstruction,
    "fkm_connection": fkm_connection_curvature,
    "fkm_lattice": fkm_lattice_oracle,
}


def _sample_gauges(
    boundary: BoundaryFrame, model: BlochModel, rng: np.random.Generator, samples: int
) -> float:
    """Largest violation of the gauge-degree laws over random samples.

    Periodic gauges on ∂B must have degree zero; symmetric gauges on
    ∂B_eff must have even degree.
    """
    worst = 0.0
    for _ in range(samples):
        if boundary.cell == const.CELL_FULL:
            gauge = random_periodic_gauge(
                boundary.path, model.m, rng, winding=int(rng.integers(-1, 2))
            )
            winding = det_phase_winding(gauge, _SAMPLE_STEP_LIMIT)
            worst = max(worst, float(abs(winding.degree)))
        else:
            assert model.trs is not None
            gauge = random_symmetric_gauge(boundary.path, model.trs.epsilon, rng)
            winding = det_phase_winding(gauge, _SAMPLE_STEP_LIMIT)
            worst = max(worst, float(winding.degree % 2))
    return worst


def verify_model(
    model: BlochModel,
    grid_n: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
    samples: int = 5,
) -> SymmetryReport:
    """Run every diagnostic on a model.

    Symmetry of the projectors comes first, then the obstruction
    compatibility and the symmetry of the boundary frame, then random
    gauge samples of the degree laws.
    """
    report = verify_symmetries(model, grid_n, tolerances.gap)
    rng = np.random.default_rng(seed)
    cell = const.CELL_HALF if model.has_trs else const.CELL_FULL
    psi = sweep_frame(model, grid_n, cell, tolerances=tolerances)

    assert model.tau is not None
    try:
        if model.has_trs:
            obstructions = obstruction_trs(psi, model, tolerances)
        else:
            obstructions = obstruction_chern(psi, model.tau, tolerances)
    except (CompatViolated, SubspaceMismatch) as err:
        # Broken τ or Θ data put the two obstruction frames in different spaces.
        report.checks.append(
            Check(
                "obstruction_compat",
                float("inf"),
                tolerances.compat,
                f"{type(err).__name__}: {err}",
            )
        )
        return report

    report.checks.append(
        Check(
            "obstruction_compat",
            float(np.max(obstructions.compat_residuals)),
            tolerances.compat,
        )
    )
    if model.has_trs:
        report.checks.append(
            Check(
                "log_compat",
                float(np.max(obstructions.log_compat_residuals)),
                tolerances.compat,
            )
        )
        boundary = boundary_frame_trs(psi, obstructions, model, tolerances)
    else:
        boundary = boundary_frame_chern(psi, obstructions, model.tau, tolerances)

    for name, residual in sorted(symmetry_residuals(boundary, model).items()):
        report.checks.append(Check(f"boundary_{name}", residual, const.TOL_SYMMETRY))

    report.checks.append(
        Check("gauge_degree", _sample_gauges(boundary, model, rng, samples), 0.5)
    )
    if model.has_trs:
        degree = det_phase_winding(unwind_map(1, boundary.path, model.m)).degree
        report.checks.append(Check("unwind_degree", float(abs(degree + 2)), 0.5))

    return report
