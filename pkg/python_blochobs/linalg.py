"""Dense complex linear algebra for small matrices.

Every routine here accepts stacks of matrices over leading axes where that
makes sense, so grids of momenta are handled without Python loops.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
import scipy.linalg

from python_blochobs import const
from python_blochobs.exceptions import (
    BranchAmbiguous,
    NoConvergence,
    NotHermitian,
    NotUnitary,
    OpenLoop,
    RankDeficient,
    SnapFailed,
    StepTooLarge,
    SubspaceMismatch,
)

_LOGGER = logging.getLogger(__name__)


def dagger(matrix: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(matrix, -1, -2))


@dataclass(frozen=True)
class HermitianLog:
    """Principal logarithm of a unitary, U = exp(iT)."""

    T: np.ndarray
    """Hermitian generator with spectrum in (-pi, pi], up to tol_branch."""

    branch_margin: float
    """Distance of the lowest eigenphase from the cut at -pi."""


class Winding(NamedTuple):
    """Determinant-phase winding of a closed loop of unitaries."""

    degree: int
    max_step: float
    raw: float


def hermitian_eig(
    matrix: np.ndarray, tol_herm: float = const.TOL_HERM
) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonalize a (stack of) Hermitian matrices.

    Args:
        matrix: Array of shape (..., n, n).
        tol_herm: Allowed Hermiticity residual, relative to the largest entry.

    Returns:
        Ascending eigenvalues of shape (..., n) and eigenvectors as the
        columns of an array of shape (..., n, n).

    Raises:
        NotHermitian: The matrix is not square or not Hermitian.
        NoConvergence: LAPACK gave up.
    """
    hamiltonian = np.asarray(matrix, dtype=complex)
    if hamiltonian.ndim < 2 or hamiltonian.shape[-1] != hamiltonian.shape[-2]:
        raise NotHermitian(f"(shape {hamiltonian.shape} is not square)")

    if hamiltonian.size:
        scale = max(1.0, float(np.max(np.abs(hamiltonian))))
        residual = float(np.max(np.abs(hamiltonian - dagger(hamiltonian)))) / scale
        if residual > tol_herm:
            raise NotHermitian(f"(residual {residual:.3e})")

    try:
        return np.linalg.eigh(hamiltonian)
    except np.linalg.LinAlgError as err:
        raise NoConvergence(str(err)) from err


def loewdin_frame(weights: np.ndarray, tol_rank: float = const.TOL_RANK) -> np.ndarray:
    """Return the polar (closest orthonormal) factor of a (stack of) n×m frames."""
    left, singular, right = np.linalg.svd(
        np.asarray(weights, dtype=complex), full_matrices=False
    )
    smallest = float(np.min(singular)) if singular.size else 0.0
    if smallest <= tol_rank:
        raise RankDeficient(f"(smallest singular value {smallest:.3e})")

    return left @ right


def expi_hermitian(generator: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Return exp(i·scale·T) for a (stack of) Hermitian T."""
    values, vectors = np.linalg.eigh(np.asarray(generator, dtype=complex))
    phases = np.exp(1j * scale * values)
    return (vectors * phases[..., None, :]) @ dagger(vectors)


def interpolate_logs(
    start: np.ndarray, stop: np.ndarray, fraction: float
) -> np.ndarray:
    """Return exp(i[(1 - s)·T_start + s·T_stop]/2)."""
    return expi_hermitian((1.0 - fraction) * start + fraction * stop, 0.5)


def unitarity_residual(matrix: np.ndarray) -> float:
    """Largest ‖U†U − 1‖ over a stack of square matrices."""
    identity = np.eye(matrix.shape[-1])
    return float(
        np.max(np.linalg.norm(dagger(matrix) @ matrix - identity, axis=(-2, -1)))
    )


def principal_log_unitary(
    unitary: np.ndarray,
    tol_unitary: float = const.TOL_UNITARY,
    tol_branch: float = const.TOL_BRANCH,
) -> HermitianLog:
    """Principal logarithm of a unitary through its complex Schur form.

    The Schur form of a normal matrix is diagonal, so the eigenphases are
    read off its diagonal and the generator is rebuilt in the Schur basis.
    Eigenphases within tol_branch above -pi are taken as +pi, so U = -1
    gets T = pi whatever the sign of the roundoff in its imaginary part.

    Raises:
        NotUnitary: U†U differs from the identity.
        BranchAmbiguous: Eigenphases sit on both sides of the cut and do not
            coincide within TOL_CUT_SPLIT.
    """
    matrix = np.asarray(unitary, dtype=complex)
    residual = unitarity_residual(matrix)
    if residual > tol_unitary:
        raise NotUnitary(f"(residual {residual:.3e})")

    triangular, basis = scipy.linalg.schur(matrix, output="complex")
    phases = np.angle(np.diag(triangular))
    below = phases < -np.pi + tol_branch
    above = phases > np.pi - tol_branch
    phases = np.where(below, phases + 2 * np.pi, phases)
    if below.any() and above.any():
        split = float(np.ptp(phases[below | above]))
        if split > const.TOL_CUT_SPLIT:
            raise BranchAmbiguous(f"(eigenphases split {split:.3e} across -pi)")

    margin = float(np.min(phases + np.pi))
    generator = (basis * phases) @ dagger(basis)
    generator = 0.5 * (generator + dagger(generator))
    _LOGGER.debug("principal log with branch margin %.3e", margin)
    return HermitianLog(T=generator, branch_margin=margin)


def overlap_gauge(
    left: np.ndarray, right: np.ndarray, tol_gauge: float = const.TOL_GAUGE
) -> Tuple[np.ndarray, float]:
    """Return U = A†B, so that B = A ◁ U when both frames span one subspace.

    Raises:
        SubspaceMismatch: U is not unitary, the frames span different spaces.
    """
    gauge = dagger(np.asarray(left, dtype=complex)) @ np.asarray(right, dtype=complex)
    residual = unitarity_residual(gauge)
    if residual > tol_gauge:
        raise SubspaceMismatch(f"(unitarity residual {residual:.3e})")

    return gauge, residual


def det_phase_winding(
    loop: np.ndarray,
    step_limit: float = const.STEP_LIMIT,
    snap_tolerance: float = const.SNAP_TOLERANCE,
    tol_closed: float = const.TOL_CLOSED,
) -> Winding:
    """Counterclockwise winding of det U along a closed loop of unitaries.

    Args:
        loop: Array of shape (L, m, m) whose first and last entries agree.

    Raises:
        OpenLoop: The first and last unitaries differ.
        StepTooLarge: A principal phase step reaches step_limit.
        SnapFailed: The accumulated phase is not a multiple of 2π.
    """
    unitaries = np.asarray(loop, dtype=complex)
    gap = float(np.linalg.norm(unitaries[0] - unitaries[-1]))
    if gap > tol_closed:
        raise OpenLoop(f"(end mismatch {gap:.3e})")

    determinants = np.linalg.det(unitaries)
    steps = np.angle(determinants[1:] / determinants[:-1])
    max_step = float(np.max(np.abs(steps))) if steps.size else 0.0
    if max_step >= step_limit:
        raise StepTooLarge(max_step)

    raw = float(np.sum(steps)) / (2 * np.pi)
    degree = int(round(raw))
    if abs(raw - degree) >= snap_tolerance:
        raise SnapFailed(raw)

    return Winding(degree=degree, max_step=max_step, raw=raw)
