"""Band-topology invariants of gapped Bloch-Hamiltonian families.

This package computes the Chern number of a two-dimensional insulator
and the Fu–Kane–Mele Z2 index of a time-reversal symmetric one by
measuring how far a continuous Bloch frame is from being symmetric on
the boundary of the unit cell. Curvature integrals and link-variable
lattice formulas are provided as independent cross-checks.
"""

from typing import List, Optional, Sequence

from python_blochobs import const
from python_blochobs.config import DEFAULT_TOLERANCES, Tolerances
from python_blochobs.exceptions import BlochObsError
from python_blochobs.invariants import METHODS, InvariantResult, verify_model
from python_blochobs.models import BlochModel, SymmetryReport
from python_blochobs.serialization import load_model


class BlochObs:
    """Entry class for invariant computations on one model.

    Args:
        model: A BlochModel, for example from one of the builders in
            python_blochobs.models.
        model_file: Path to a hopping file, used when no model is given.
        tolerances: Numerical tolerances; the defaults suit most models.
    """

    model: BlochModel
    """BlochModel: The model every computation runs on."""

    tolerances: Tolerances

    def __init__(
        self,
        model: Optional[BlochModel] = None,
        model_file: Optional[str] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> None:
        """Initialize from a model or a hopping file."""
        if model is not None:
            self.model = model
        elif model_file:
            self.model = load_model(model_file)
        else:
            raise BlochObsError("No model supplied!")
        self.tolerances = tolerances

    def __repr__(self) -> str:
        """Return a friendly representation."""
        return f"<BlochObs: {self.model!r}>"

    def chern(self, grid_n: int = 64, method: str = "obstruction") -> InvariantResult:
        """Return the Chern number of the occupied bands."""
        if method not in const.CHERN_METHODS:
            raise ValueError(f"{method!r} does not compute a Chern number")
        return METHODS[method](self.model, grid_n, self.tolerances)

    def z2(self, grid_n: int = 64, method: str = "fkm_obstruction") -> InvariantResult:
        """Return the Fu–Kane–Mele index of the occupied bands.

        Raises:
            NoTrs: The model has no time-reversal data.
        """
        if method not in const.Z2_METHODS:
            raise ValueError(f"{method!r} does not compute a Z2 index")
        return METHODS[method](self.model, grid_n, self.tolerances)

    def invariants(
        self, grid_n: int = 64, methods: Optional[Sequence[str]] = None
    ) -> List[InvariantResult]:
        """Run several methods; by default every method the model supports."""
        if methods is None:
            methods = const.ALL_METHODS if self.model.has_trs else const.CHERN_METHODS
        return [
            METHODS[method](self.model, grid_n, self.tolerances) for method in methods
        ]

    def verify(self, grid_n: int = 32, seed: int = 0) -> SymmetryReport:
        """Run the symmetry and gauge diagnostics."""
        return verify_model(self.model, grid_n, self.tolerances, seed)
