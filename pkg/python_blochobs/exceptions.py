"""Exceptions raised while computing band-topology invariants."""

from typing import Optional, Sequence


class BlochObsError(Exception):
    """Base blochobs exception class."""

    message = "Error computing a band-topology invariant."

    def __init__(self, extra_message: Optional[str] = None) -> None:
        """Add extra messages to our base message."""
        final_message = self.message
        if extra_message:
            final_message += f" {extra_message}"

        super().__init__(final_message)


class NotHermitian(BlochObsError):
    """A matrix expected to be Hermitian is not."""

    message = "The matrix is not Hermitian within tolerance."


class NoConvergence(BlochObsError):
    """LAPACK failed to converge."""

    message = "The eigensolver did not converge."


class RankDeficient(BlochObsError):
    """A frame lost rank during orthonormalization or transport."""

    message = (
        "The frame is rank deficient; the transport step crossed a gap "
        + "closing or the grid is too coarse."
    )


class NotUnitary(BlochObsError):
    """A matrix expected to be unitary is not."""

    message = "The matrix is not unitary within tolerance."


class BranchAmbiguous(BlochObsError):
    """An eigenphase sits on the branch cut of the logarithm."""

    message = "An eigenphase lies on the branch cut at -pi."


class SubspaceMismatch(BlochObsError):
    """Two frames do not span the same subspace."""

    message = "The frames span different subspaces."


class StepTooLarge(BlochObsError):
    """A determinant phase step is too large to unwrap."""

    message = "The determinant phase step is too large; refine the loop."

    def __init__(self, max_step: float) -> None:
        """Remember the offending step."""
        self.max_step = max_step
        super().__init__(f"(max step {max_step:.4f} rad)")


class SnapFailed(BlochObsError):
    """A raw invariant is too far from an integer."""

    message = "The raw value could not be snapped to an integer."

    def __init__(self, raw: float) -> None:
        """Remember the raw value."""
        self.raw = raw
        super().__init__(f"(raw {raw:.6f})")


class OpenLoop(BlochObsError):
    """A loop of unitaries does not close."""

    message = "The loop is not closed."


class GapClosed(BlochObsError):
    """The spectral gap above the occupied bands closes."""

    message = "The spectral gap closes; the invariant is undefined."

    def __init__(self, momentum: Sequence[float], gap: float) -> None:
        """Remember where the gap closed."""
        self.momentum = (float(momentum[0]), float(momentum[1]))
        self.gap = gap
        super().__init__(
            f"(k = ({self.momentum[0]:.6f}, {self.momentum[1]:.6f}), gap {gap:.3e})"
        )


class ParseError(BlochObsError):
    """A model or frame file is malformed."""

    message = "The file could not be parsed."


class HermiticityViolation(BlochObsError):
    """The hoppings do not define a Hermitian Bloch Hamiltonian."""

    message = "The hoppings violate H(-R) = H(R)^dagger."


class TrsInconsistent(BlochObsError):
    """The time-reversal data are inconsistent."""

    message = "The time-reversal data are inconsistent."


class RepresentationError(BlochObsError):
    """The lattice translation representation is invalid."""

    message = "The translation representation is invalid."


class CompatViolated(BlochObsError):
    """An obstruction unitary breaks the time-reversal compatibility."""

    message = "The obstruction unitary violates U^T eps = eps U."


class NoTrs(BlochObsError):
    """A time-reversal invariant was requested of a model without it."""

    message = "The model has no time-reversal data."
