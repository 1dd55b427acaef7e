"""Bloch frames, obstruction unitaries and symmetric boundary frames.

An input frame Ψ is built on the unit cell B (or the effective cell
B_eff = [0, 1/2] × [-1/2, 1/2]) by discrete parallel transport. Its
failure to be τ-equivariant (and time-reversal symmetric) at the
distinguished momenta is recorded in obstruction unitaries, whose
principal logarithms interpolate a symmetric frame Φ̂ on the boundary.
The residual gauge Û = Ψ†Φ̂ along the boundary carries the invariant.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from python_blochobs import const
from python_blochobs.config import DEFAULT_TOLERANCES, Tolerances
from python_blochobs.exceptions import CompatViolated, NoTrs, SubspaceMismatch
from python_blochobs.linalg import (
    HermitianLog,
    dagger,
    expi_hermitian,
    loewdin_frame,
    overlap_gauge,
    principal_log_unitary,
)
from python_blochobs.models import (
    BlochModel,
    kramers_frame,
    occupied_frames,
    projectors,
)

_LOGGER = logging.getLogger(__name__)

GridIndex = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """An ordered list of momenta with named marker nodes."""

    nodes: np.ndarray
    """Momenta in lattice coordinates, shape (L, 2)."""

    closed: bool
    markers: Dict[str, int] = field(default_factory=dict)

    grid_indices: Optional[np.ndarray] = None
    """Grid index (i, j) of every node when the path runs along a cell grid."""

    def __len__(self) -> int:
        """Return the number of nodes."""
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class FrameField:
    """Orthonormal n×m frames attached to the nodes of a path or grid."""

    momenta: np.ndarray
    """Momenta of shape (..., 2)."""

    frames: np.ndarray
    """Frames of shape (..., n, m)."""

    cell: str
    """"B" or "Beff" for cell grids, "path" otherwise."""

    max_jump: float = 0.0
    """Largest spectral-norm distance between adjacent frames."""

    @property
    def grid_n(self) -> int:
        """Return the grid size N of a cell grid."""
        return int(self.momenta.shape[1]) - 1


@dataclass(frozen=True, eq=False)
class ObstructionSet:
    """Obstruction unitaries and their principal logarithms."""

    points: Tuple[str, ...]
    momenta: np.ndarray
    unitaries: np.ndarray
    logs: Tuple[HermitianLog, ...]
    compat_residuals: np.ndarray
    """‖U^T ε − ε U‖ per point; zero in the Chern case."""

    log_compat_residuals: np.ndarray
    """‖T^T ε − ε T‖ per point; zero in the Chern case."""

    def generator(self, point: str) -> np.ndarray:
        """Return the Hermitian log T at a named point."""
        return self.logs[self.points.index(point)].T

    def unitary(self, point: str) -> np.ndarray:
        """Return U_obs at a named point."""
        return np.asarray(self.unitaries[self.points.index(point)])


@dataclass(frozen=True, eq=False)
class BoundaryFrame:
    """The symmetric boundary frame Φ̂ and the residual gauge Û = Ψ†Φ̂."""

    path: DiscretePath
    frames: np.ndarray
    """Φ̂ per boundary node, shape (L, n, m)."""

    psi: np.ndarray
    """The input frame Ψ per boundary node."""

    gauge: np.ndarray
    """Û per boundary node, shape (L, m, m)."""

    matching: Dict[str, float]
    """Residuals between the two definitions of Φ̂ at shared corners."""

    cell: str

    @property
    def field(self) -> FrameField:
        """Return Φ̂ as a frame field over the boundary path."""
        return FrameField(momenta=self.path.nodes, frames=self.frames, cell="path")


def _check_grid(grid_n: int, cell: str) -> None:
    if cell not in const.CELLS:
        raise ValueError(f"unknown cell {cell!r}")
    if grid_n < const.MIN_GRID or grid_n % 2:
        raise ValueError(f"grid size must be even and at least {const.MIN_GRID}")


def grid_momenta(grid_n: int, cell: str) -> np.ndarray:
    """Return the (N+1)×(N+1) grid over B or the (N/2+1)×(N+1) grid over B_eff."""
    _check_grid(grid_n, cell)
    vertical = -0.5 + np.arange(grid_n + 1) / grid_n
    if cell == const.CELL_FULL:
        horizontal = vertical
    else:
        horizontal = np.arange(grid_n // 2 + 1) / grid_n
    return np.stack(np.meshgrid(horizontal, vertical, indexing="ij"), axis=-1)


def _jump(frames: np.ndarray, axis: int) -> float:
    steps = np.diff(frames, axis=axis)
    if not steps.size:
        return 0.0
    return float(np.max(np.linalg.norm(steps, ord=2, axis=(-2, -1))))


def _transport(rows: np.ndarray, start: np.ndarray, tol_rank: float) -> np.ndarray:
    """Transport a batch of frames along axis 0 of a projector array.

    Args:
        rows: Projectors of shape (L, B, n, n).
        start: Frames of shape (B, n, m) at the first node.
    """
    frames = np.empty(rows.shape[:-1] + start.shape[-1:], dtype=complex)
    frames[0] = start
    for index in range(1, rows.shape[0]):
        frames[index] = loewdin_frame(rows[index] @ frames[index - 1], tol_rank)
    return frames


def transport_frame(
    model: BlochModel,
    path: DiscretePath,
    initial_frame: np.ndarray,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FrameField:
    """Parallel transport a frame along a path, F_{j+1} = polar(P(k_{j+1})F_j).

    Raises:
        GapClosed: The gap closes on the path.
        SubspaceMismatch: The initial frame does not span Ran P(k_0).
        RankDeficient: The path is too coarse.
    """
    occupation = occupied_frames(model, path.nodes, tolerances.gap, tolerances.herm)
    rows = projectors(occupation.frames)
    initial = np.asarray(initial_frame, dtype=complex)
    mismatch = float(np.linalg.norm(rows[0] @ initial - initial))
    if mismatch > const.TOL_SYMMETRY:
        raise SubspaceMismatch(f"(initial frame leaves Ran P by {mismatch:.3e})")

    frames = _transport(rows[:, None], initial[None], tolerances.rank)[:, 0]
    return FrameField(
        momenta=path.nodes, frames=frames, cell="path", max_jump=_jump(frames, 0)
    )


def sweep_frame(
    model: BlochModel,
    grid_n: int,
    cell: str,
    base_frame: Optional[np.ndarray] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FrameField:
    """Build a discretely continuous frame on a cell grid.

    The base-vertex frame is transported along the bottom edge, then every
    column is transported upward (all columns at once). On B_eff with
    time-reversal data the base frame at (0, -1/2) is made Kramers-adapted.

    Raises:
        GapClosed: The gap closes on the grid.
        RankDeficient: The grid is too coarse.
    """
    momenta = grid_momenta(grid_n, cell)
    occupation = occupied_frames(model, momenta, tolerances.gap, tolerances.herm)
    rows = projectors(occupation.frames)

    if base_frame is not None:
        base = np.asarray(base_frame, dtype=complex)
    elif cell == const.CELL_HALF and model.has_trs:
        base = kramers_frame(model, const.TRIM_ON_S["v2"][1], occupation.frames[0, 0])
    else:
        base = occupation.frames[0, 0]

    bottom = _transport(rows[:, :1], base[None], tolerances.rank)[:, 0]
    columns = _transport(np.swapaxes(rows, 0, 1), bottom, tolerances.rank)
    frames = np.swapaxes(columns, 0, 1)
    jump = max(_jump(frames, 0), _jump(frames, 1))
    _LOGGER.debug("swept %s at N=%d, max jump %.3f", cell, grid_n, jump)
    return FrameField(momenta=momenta, frames=frames, cell=cell, max_jump=jump)


def gauge_frames(frames: FrameField, gauge: np.ndarray) -> FrameField:
    """Return Ψ ◁ W for a constant or per-node unitary W."""
    regauged = frames.frames @ np.asarray(gauge, dtype=complex)
    return FrameField(
        momenta=frames.momenta,
        frames=regauged,
        cell=frames.cell,
        max_jump=max(_jump(regauged, axis) for axis in range(regauged.ndim - 2)),
    )


def _log(unitary: np.ndarray, tolerances: Tolerances) -> HermitianLog:
    return principal_log_unitary(unitary, tolerances.unitary, tolerances.branch)


def obstruction_chern(
    psi: FrameField,
    tau: Sequence[np.ndarray],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ObstructionSet:
    """Obstruction unitaries at v2 and v4 of the unit cell.

    τ_{e1}Ψ(v1) = Ψ(v2) ◁ U_obs(v2) and τ_{e2}Ψ(v1) = Ψ(v4) ◁ U_obs(v4).
    """
    frames = psi.frames
    base = frames[0, 0]
    pairs = (("v2", frames[-1, 0], tau[0]), ("v4", frames[0, -1], tau[1]))

    unitaries, logs = [], []
    for name, frame, translation in pairs:
        unitary, residual = overlap_gauge(frame, translation @ base, tolerances.gauge)
        log = _log(unitary, tolerances)
        _LOGGER.debug(
            "U_obs(%s): unitarity %.2e, branch margin %.3f",
            name,
            residual,
            log.branch_margin,
        )
        unitaries.append(unitary)
        logs.append(log)

    return ObstructionSet(
        points=("v2", "v4"),
        momenta=np.array([const.CELL_VERTICES["v2"], const.CELL_VERTICES["v4"]]),
        unitaries=np.array(unitaries),
        logs=tuple(logs),
        compat_residuals=np.zeros(2),
        log_compat_residuals=np.zeros(2),
    )


def _chern_loop(grid_n: int) -> List[Tuple[int, int, str, float]]:
    """Boundary of B counterclockwise from v1: (i, j, branch, s)."""
    last = grid_n
    loop = [(i, 0, "bottom", i / last) for i in range(last + 1)]
    loop += [(last, j, "right", j / last) for j in range(1, last + 1)]
    loop += [(i, last, "top", i / last) for i in range(last - 1, -1, -1)]
    loop += [(0, j, "left", j / last) for j in range(last - 1, -1, -1)]
    return loop


def _trs_loop(grid_n: int) -> List[Tuple[int, int, str, float]]:
    """Boundary of B_eff counterclockwise from (0, 0): (i, j, edge, s).

    Nodes on E1 ∪ E2 ∪ E3 carry the interpolation parameter s of their
    edge; the remaining nodes are images of those.
    """
    half = grid_n // 2
    loop = [(0, j, "E1", (half - j) / half) for j in range(half, -1, -1)]
    loop += [(i, 0, "E2", i / half) for i in range(1, half + 1)]
    loop += [(half, j, "E3", j / half) for j in range(1, half + 1)]
    loop += [(half, j, "E4", 0.0) for j in range(half + 1, grid_n + 1)]
    loop += [(i, grid_n, "E5", 0.0) for i in range(half - 1, -1, -1)]
    loop += [(0, j, "E6", 0.0) for j in range(grid_n - 1, half - 1, -1)]
    return loop


def boundary_path(grid_n: int, cell: str) -> DiscretePath:
    """Return the counterclockwise boundary loop of B or B_eff on the grid."""
    momenta = grid_momenta(grid_n, cell)
    half = grid_n // 2
    if cell == const.CELL_FULL:
        loop = _chern_loop(grid_n)
        markers = {"v1": 0, "v2": grid_n, "v3": 2 * grid_n, "v4": 3 * grid_n}
    else:
        loop = _trs_loop(grid_n)
        markers = {
            "v1": 0,
            "v2": half,
            "v3": 2 * half,
            "v4": 3 * half,
            "v5": 4 * half,
            "v6": 5 * half,
        }

    indices = np.array([(i, j) for i, j, _, _ in loop])
    return DiscretePath(
        nodes=momenta[indices[:, 0], indices[:, 1]],
        closed=True,
        markers=markers,
        grid_indices=indices,
    )


def boundary_frame_chern(
    psi: FrameField,
    obstructions: ObstructionSet,
    tau: Sequence[np.ndarray],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> BoundaryFrame:
    """Assemble the τ-equivariant boundary frame Φ̂ on ∂B.

    Bottom Ψ(k1, -1/2)·e^{isT(v2)}, right τ_{e1}Ψ(-1/2, k2)·e^{isT(v4)},
    top τ_{e2}Ψ(k1, -1/2)·e^{isT(v2)}, left Ψ(-1/2, k2)·e^{isT(v4)},
    with s = k + 1/2 the edge parameter.
    """
    grid_n = psi.grid_n
    loop = _chern_loop(grid_n)
    path = boundary_path(grid_n, const.CELL_FULL)
    frames = psi.frames
    generators = {point: obstructions.generator(point) for point in ("v2", "v4")}
    sources = {
        "bottom": ("v2", lambda i, j: frames[i, 0], np.eye(frames.shape[-2])),
        "right": ("v4", lambda i, j: frames[0, j], tau[0]),
        "top": ("v2", lambda i, j: frames[i, 0], tau[1]),
        "left": ("v4", lambda i, j: frames[0, j], np.eye(frames.shape[-2])),
    }

    hat = np.empty((len(loop),) + frames.shape[-2:], dtype=complex)
    for branch, (point, source, translation) in sources.items():
        members = [index for index, node in enumerate(loop) if node[2] == branch]
        fractions = np.array([loop[index][3] for index in members])
        interpolants = expi_hermitian(
            fractions[:, None, None] * generators[point][None]
        )
        sampled = np.array([source(*loop[index][:2]) for index in members])
        hat[members] = translation @ sampled @ interpolants

    indices = path.grid_indices
    assert indices is not None
    psi_loop = frames[indices[:, 0], indices[:, 1]]
    gauge, _ = overlap_gauge(psi_loop, hat, tolerances.gauge)

    u_v2, u_v4 = obstructions.unitary("v2"), obstructions.unitary("v4")
    base, v2, v4 = frames[0, 0], frames[-1, 0], frames[0, -1]
    matching = {
        "v2": float(np.linalg.norm(v2 @ u_v2 - tau[0] @ base)),
        "v3": float(np.linalg.norm(tau[0] @ v4 @ u_v4 - tau[1] @ v2 @ u_v2)),
        "v4": float(np.linalg.norm(v4 @ u_v4 - tau[1] @ base)),
        "v1": float(np.linalg.norm(hat[-1] - hat[0])),
    }
    return BoundaryFrame(
        path=path,
        frames=hat,
        psi=psi_loop,
        gauge=gauge,
        matching=matching,
        cell=const.CELL_FULL,
    )


def obstruction_trs(
    psi: FrameField,
    model: BlochModel,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ObstructionSet:
    """Obstruction unitaries at the four TRIM on S ⊂ ∂B_eff.

    ΘΨ(k*) ◁ ε = τ_μΨ(k*) ◁ U_obs(k*) with k* + μ = -k*.

    Raises:
        NoTrs: The model has no time-reversal data.
        CompatViolated: U_obs^T ε ≠ ε U_obs.
    """
    if model.trs is None:
        raise NoTrs(f"({model.name})")
    epsilon = model.trs.epsilon
    half = psi.grid_n // 2
    positions = {"v1": (0, half), "v2": (0, 0), "v3": (half, 0), "v4": (half, half)}

    unitaries, logs, compat, log_compat = [], [], [], []
    for name, (momentum, mu) in const.TRIM_ON_S.items():
        frame = psi.frames[positions[name]]
        image = model.time_reverse(frame) @ epsilon
        translated = model.translation(mu) @ frame
        unitary, _ = overlap_gauge(translated, image, tolerances.gauge)
        residual = float(np.linalg.norm(unitary.T @ epsilon - epsilon @ unitary))
        if residual > tolerances.compat:
            raise CompatViolated(f"(at {name} = {momentum}, residual {residual:.3e})")

        log = _log(unitary, tolerances)
        unitaries.append(unitary)
        logs.append(log)
        compat.append(residual)
        log_compat.append(float(np.linalg.norm(log.T.T @ epsilon - epsilon @ log.T)))
        _LOGGER.debug(
            "U_obs(%s): compat %.2e, branch margin %.3f",
            name,
            residual,
            log.branch_margin,
        )

    return ObstructionSet(
        points=tuple(const.TRIM_ON_S),
        momenta=np.array([momentum for momentum, _ in const.TRIM_ON_S.values()]),
        unitaries=np.array(unitaries),
        logs=tuple(logs),
        compat_residuals=np.array(compat),
        log_compat_residuals=np.array(log_compat),
    )


# Consecutive TRIM bounding each edge of S.
_S_EDGES = {"E1": ("v1", "v2"), "E2": ("v2", "v3"), "E3": ("v3", "v4")}


def boundary_frame_trs(
    psi: FrameField,
    obstructions: ObstructionSet,
    model: BlochModel,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> BoundaryFrame:
    """Assemble the τ-equivariant, time-reversal symmetric frame Φ̂ on ∂B_eff.

    On S = E1 ∪ E2 ∪ E3, Φ̂ = Ψ ◁ V with V interpolating e^{iT/2} between
    consecutive TRIM. Elsewhere Φ̂ is the image of S:
    E4 τ_{e1}ΘΦ̂(1/2, -k2) ◁ ε, E5 τ_{e2}Φ̂(k1, -1/2)
    and E6 ΘΦ̂(0, -k2) ◁ ε.
    """
    assert model.trs is not None
    epsilon = model.trs.epsilon
    grid_n = psi.grid_n
    loop = _trs_loop(grid_n)
    path = boundary_path(grid_n, const.CELL_HALF)
    frames = psi.frames
    tau_e1, tau_e2 = model.translation((1, 0)), model.translation((0, 1))

    hat = np.empty((len(loop),) + frames.shape[-2:], dtype=complex)
    on_s: Dict[GridIndex, np.ndarray] = {}
    for edge, (start, stop) in _S_EDGES.items():
        members = [index for index, node in enumerate(loop) if node[2] == edge]
        fractions = np.array([loop[index][3] for index in members])[:, None, None]
        generators = (1 - fractions) * obstructions.generator(start)[None]
        generators = generators + fractions * obstructions.generator(stop)[None]
        interpolants = expi_hermitian(generators, 0.5)
        for index, interpolant in zip(members, interpolants):
            i, j = loop[index][:2]
            hat[index] = frames[i, j] @ interpolant
            on_s[(i, j)] = hat[index]

    def reflect(frame: np.ndarray) -> np.ndarray:
        return model.time_reverse(frame) @ epsilon

    for index, (i, j, edge, _) in enumerate(loop):
        if edge == "E4":
            hat[index] = tau_e1 @ reflect(on_s[(i, grid_n - j)])
        elif edge == "E5":
            hat[index] = tau_e2 @ on_s[(i, 0)]
        elif edge == "E6":
            hat[index] = reflect(on_s[(0, grid_n - j)])

    indices = path.grid_indices
    assert indices is not None
    psi_loop = frames[indices[:, 0], indices[:, 1]]
    gauge, _ = overlap_gauge(psi_loop, hat, tolerances.gauge)

    half = grid_n // 2
    corner_v1, corner_v2 = on_s[(0, half)], on_s[(0, 0)]
    corner_v3, corner_v4 = on_s[(half, 0)], on_s[(half, half)]
    matching = {
        "v1": float(np.linalg.norm(corner_v1 - reflect(corner_v1))),
        "v4": float(np.linalg.norm(corner_v4 - tau_e1 @ reflect(corner_v4))),
        "v5": float(np.linalg.norm(tau_e1 @ reflect(corner_v3) - tau_e2 @ corner_v3)),
        "v6": float(np.linalg.norm(tau_e2 @ corner_v2 - reflect(corner_v2))),
    }
    return BoundaryFrame(
        path=path,
        frames=hat,
        psi=psi_loop,
        gauge=gauge,
        matching=matching,
        cell=const.CELL_HALF,
    )


def _node_lookup(boundary: BoundaryFrame) -> Dict[GridIndex, int]:
    indices = boundary.path.grid_indices
    assert indices is not None
    lookup: Dict[GridIndex, int] = {}
    for position, (i, j) in enumerate(indices[:-1]):
        lookup.setdefault((int(i), int(j)), position)
    return lookup


def symmetry_residuals(boundary: BoundaryFrame, model: BlochModel) -> Dict[str, float]:
    """Discrete equivariance and time-reversal residuals of Φ̂.

    Returns:
        The largest residual over all boundary-identified node pairs for
        "equivariance" (and "time_reversal" on B_eff), and the corner
        matching residuals under "matching".
    """
    lookup = _node_lookup(boundary)
    hat = boundary.frames
    tau_e1, tau_e2 = model.translation((1, 0)), model.translation((0, 1))
    grid_n = int(np.max(boundary.path.grid_indices[:, 1]))  # type: ignore
    right = grid_n if boundary.cell == const.CELL_FULL else grid_n // 2

    equivariance = [0.0]
    for (i, j), position in lookup.items():
        if j == grid_n:
            partner = hat[lookup[(i, 0)]]
            equivariance.append(float(np.linalg.norm(hat[position] - tau_e2 @ partner)))
        if i == grid_n and boundary.cell == const.CELL_FULL:
            partner = hat[lookup[(0, j)]]
            equivariance.append(float(np.linalg.norm(hat[position] - tau_e1 @ partner)))

    residuals = {
        "equivariance": max(equivariance),
        "matching": max(boundary.matching.values()),
    }
    if boundary.cell == const.CELL_HALF:
        assert model.trs is not None
        epsilon = model.trs.epsilon
        reversal = [0.0]
        for (i, j), position in lookup.items():
            if i not in (0, right):
                continue
            image = model.time_reverse(hat[position]) @ epsilon
            if i == right:
                image = tau_e1 @ image
            mirror = hat[lookup[(i, grid_n - j)]]
            reversal.append(float(np.linalg.norm(mirror - image)))
        residuals["time_reversal"] = max(reversal)

    return residuals


def boundary_link_phases(boundary: BoundaryFrame) -> np.ndarray:
    """Per-link Berry phases arg det(Φ̂_j†Φ̂_{j+1}) along the boundary loop."""
    hat = boundary.frames
    return np.angle(np.linalg.det(dagger(hat[:-1]) @ hat[1:]))


def unwind_map(winding: int, path: DiscretePath, size: int) -> np.ndarray:
    """The symmetric gauge X of degree -2r along ∂B_eff.

    X = e^{-2πir(k2 + 1/2)}·1_2 ⊕ 1_{m-2} on the edge k1 = 1/2 and the
    identity elsewhere.
    """
    if size < 2:
        raise ValueError("the unwinding map needs m >= 2")
    loop = np.tile(np.eye(size, dtype=complex), (len(path), 1, 1))
    on_edge = np.isclose(path.nodes[:, 0], 0.5, atol=1e-12)
    phases = np.exp(-2j * np.pi * winding * (path.nodes[on_edge, 1] + 0.5))
    loop[on_edge, 0, 0] = phases
    loop[on_edge, 1, 1] = phases
    return loop


def _random_hermitian(rng: np.random.Generator, size: int) -> np.ndarray:
    matrix = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    return 0.25 * (matrix + dagger(matrix))


class _EdgeGauge:
    """A smooth unitary on [0, 1] equal to X0 at both ends."""

    def __init__(
        self, rng: np.random.Generator, size: int, winding: int, anchor: np.ndarray
    ) -> None:
        self.anchor = anchor
        self.winding = winding
        self.modes = [_random_hermitian(rng, size) / order for order in range(1, 4)]

    def __call__(self, fraction: float) -> np.ndarray:
        generator = sum(
            np.sin(np.pi * order * fraction) * mode
            for order, mode in enumerate(self.modes, start=1)
        )
        twist = np.eye(len(self.anchor), dtype=complex)
        twist[0, 0] = np.exp(2j * np.pi * self.winding * fraction)
        return np.asarray(self.anchor @ twist @ expi_hermitian(np.asarray(generator)))


def random_periodic_gauge(
    path: DiscretePath, size: int, rng: np.random.Generator, winding: int = 0
) -> np.ndarray:
    """A random smooth gauge loop on ∂B with X(k + λ) = X(k).

    Opposite edges carry the same function, so a winding put on the
    horizontal edges is traversed once forward and once backward.
    """
    anchor = expi_hermitian(_random_hermitian(rng, size))
    horizontal = _EdgeGauge(rng, size, winding, anchor)
    vertical = _EdgeGauge(rng, size, -winding, anchor)
    loop = []
    for k1, k2 in path.nodes:
        if np.isclose(abs(k2), 0.5):
            loop.append(horizontal(k1 + 0.5))
        else:
            loop.append(vertical(k2 + 0.5))
    return np.array(loop)


def random_symmetric_gauge(
    path: DiscretePath,
    epsilon: np.ndarray,
    rng: np.random.Generator,
    windings: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """A random gauge loop on ∂B_eff that preserves equivariance and time reversal.

    X is drawn on E1 ∪ E2 ∪ E3 (identity at the TRIM) and extended by
    X(-k) = ε⁻¹ conj(X(k)) ε and X(k + λ) = X(k).
    """
    size = epsilon.shape[0]
    if windings is None:
        windings = [int(value) for value in rng.integers(-1, 2, size=3)]
    identity = np.eye(size, dtype=complex)
    edges = [_EdgeGauge(rng, size, winding, identity) for winding in windings]
    inverse = dagger(epsilon)

    def on_s(k1: float, k2: float) -> np.ndarray:
        if np.isclose(k1, 0.0):
            return edges[0](-2 * k2)
        if np.isclose(k2, -0.5):
            return edges[1](2 * k1)
        return edges[2](1 + 2 * k2)

    loop = []
    for k1, k2 in path.nodes:
        if np.isclose(k2, 0.5):
            loop.append(on_s(k1, -0.5))
        elif k2 > 0:
            loop.append(inverse @ np.conj(on_s(k1, -k2)) @ epsilon)
        else:
            loop.append(on_s(k1, k2))
    return np.array(loop)
