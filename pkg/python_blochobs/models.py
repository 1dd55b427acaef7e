"""Bloch-Hamiltonian families and their symmetry data.

Every model is stored in the periodic gauge as a finite Fourier series
H(k) = Σ_R exp(2πi k·R) H_R, with k in lattice coordinates. The
translation representation τ defaults to the identity but is honored
throughout, and models with time-reversal symmetry carry Θ = U_Θ ∘ K
together with the reshuffling matrix ε.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
import voluptuous as vol

from python_blochobs import const
from python_blochobs.exceptions import (
    GapClosed,
    HermiticityViolation,
    NoTrs,
    ParseError,
    RepresentationError,
    TrsInconsistent,
)
from python_blochobs.linalg import dagger, hermitian_eig, unitarity_residual

_LOGGER = logging.getLogger(__name__)

Lattice = Tuple[int, int]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SYMPLECTIC_J = np.array([[0, 1], [-1, 0]], dtype=complex)
HONEYCOMB = np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2]])


def normal_form_epsilon(size: int) -> np.ndarray:
    """Return the block-diagonal normal form ⊕ [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(size // 2), SYMPLECTIC_J)


@dataclass(frozen=True, eq=False)
class TimeReversal:
    """Time-reversal data Θ = U_Θ ∘ K and reshuffling matrix ε."""

    u_theta: np.ndarray
    """Unitary part of Θ, with U_Θ conj(U_Θ) = -1."""

    epsilon: np.ndarray
    """Unitary skew-symmetric m×m matrix in Φ(-k) = ΘΦ(k) ◁ ε."""


@dataclass(frozen=True, eq=False)
class BlochModel:
    """A gapped Bloch-Hamiltonian family with its symmetry data.

    The constructor validates the hoppings, the translation
    representation and the time-reversal data, raising on the first
    violation it finds.
    """

    n: int
    """Total number of bands."""

    m: int
    """Number of occupied bands (always the lowest ones)."""

    hoppings: Dict[Lattice, np.ndarray]
    """Fourier components H_R keyed by the lattice vector R."""

    lattice: np.ndarray = field(default_factory=lambda: np.eye(2))
    """Real-space lattice vectors as rows (informational)."""

    tau: Optional[Tuple[np.ndarray, np.ndarray]] = None
    """Unitaries τ_{e1}, τ_{e2}; the identity in the periodic gauge."""

    trs: Optional[TimeReversal] = None
    """Time-reversal data, if the model is time-reversal symmetric."""

    name: str = "custom"

    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Normalize and validate the model data."""
        if not 0 < self.m < self.n:
            raise ParseError(f"(need 0 < m < n, got n={self.n}, m={self.m})")
        if not self.hoppings:
            raise ParseError("(empty hopping list)")

        hoppings: Dict[Lattice, np.ndarray] = {}
        for vector, block in self.hoppings.items():
            block = np.asarray(block, dtype=complex)
            if block.shape != (self.n, self.n):
                raise ParseError(f"(hopping R={vector} has shape {block.shape})")
            hoppings[(int(vector[0]), int(vector[1]))] = block
        object.__setattr__(self, "hoppings", hoppings)
        self._check_hermiticity()

        if self.tau is None:
            identity = np.eye(self.n, dtype=complex)
            object.__setattr__(self, "tau", (identity, identity))
        else:
            tau = tuple(np.asarray(item, dtype=complex) for item in self.tau)
            object.__setattr__(self, "tau", tau)
        self._check_tau()

        if self.trs is not None:
            self._check_trs()

        vectors = sorted(hoppings)
        object.__setattr__(self, "_vectors", np.array(vectors, dtype=float))
        object.__setattr__(self, "_blocks", np.stack([hoppings[r] for r in vectors]))

    def __repr__(self) -> str:
        """Return a friendly representation."""
        trs = "yes" if self.trs is not None else "no"
        return f"<BlochModel: name={self.name} n={self.n} m={self.m} trs={trs}>"

    def _check_hermiticity(self) -> None:
        for vector, block in self.hoppings.items():
            partner_vector = (-vector[0], -vector[1])
            partner = self.hoppings.get(partner_vector)
            if partner is None:
                raise HermiticityViolation(
                    f"(R={vector} present but R={partner_vector} missing)"
                )

            scale = max(1.0, float(np.max(np.abs(block))))
            residual = float(np.max(np.abs(partner - dagger(block)))) / scale
            if residual > const.TOL_HERM:
                raise HermiticityViolation(f"(R={vector}, residual {residual:.3e})")

    def _check_tau(self) -> None:
        assert self.tau is not None
        for index, unitary in enumerate(self.tau, start=1):
            if unitary.shape != (self.n, self.n):
                raise RepresentationError(f"(tau_e{index} has shape {unitary.shape})")
            if unitarity_residual(unitary) > const.TOL_UNITARY:
                raise RepresentationError(f"(tau_e{index} is not unitary)")

        first, second = self.tau
        if np.linalg.norm(first @ second - second @ first) > const.TOL_UNITARY:
            raise RepresentationError("(tau_e1 and tau_e2 do not commute)")

    def _check_trs(self) -> None:
        assert self.trs is not None and self.tau is not None
        u_theta = np.asarray(self.trs.u_theta, dtype=complex)
        epsilon = np.asarray(self.trs.epsilon, dtype=complex)
        object.__setattr__(self, "trs", TimeReversal(u_theta, epsilon))

        if u_theta.shape != (self.n, self.n):
            raise TrsInconsistent(f"(u_theta has shape {u_theta.shape})")
        if unitarity_residual(u_theta) > const.TOL_UNITARY:
            raise TrsInconsistent("(u_theta is not unitary)")
        square = u_theta @ np.conj(u_theta)
        if np.linalg.norm(square + np.eye(self.n)) > const.TOL_UNITARY:
            raise TrsInconsistent("(U_theta conj(U_theta) != -1)")
        if self.m % 2:
            raise TrsInconsistent(f"(odd number of occupied bands m={self.m})")
        if epsilon.shape != (self.m, self.m):
            raise TrsInconsistent(f"(epsilon has shape {epsilon.shape})")
        if unitarity_residual(epsilon) > const.TOL_UNITARY:
            raise TrsInconsistent("(epsilon is not unitary)")

        for index, unitary in enumerate(self.tau, start=1):
            commutator = u_theta @ np.conj(unitary) - dagger(unitary) @ u_theta
            residual = np.linalg.norm(commutator)
            if residual > const.TOL_UNITARY:
                raise RepresentationError(
                    f"(theta tau_e{index} != tau_e{index}^-1 theta)"
                )

    @property
    def has_trs(self) -> bool:
        """Whether time-reversal data are attached."""
        return self.trs is not None

    def hamiltonian(self, momenta: np.ndarray) -> np.ndarray:
        """Evaluate H(k) for momenta of shape (..., 2)."""
        vectors: np.ndarray = getattr(self, "_vectors")
        blocks: np.ndarray = getattr(self, "_blocks")
        phases = np.exp(2j * np.pi * (np.asarray(momenta, dtype=float) @ vectors.T))
        return np.tensordot(phases, blocks, axes=(-1, 0))

    def translation(self, vector: Sequence[int]) -> np.ndarray:
        """Return τ_λ for λ = a·e1 + b·e2, negative powers via the adjoint."""
        assert self.tau is not None
        result = np.eye(self.n, dtype=complex)
        for power, unitary in zip(vector, self.tau):
            step = unitary if power >= 0 else dagger(unitary)
            result = result @ np.linalg.matrix_power(step, abs(int(power)))
        return result

    def time_reverse(self, frames: np.ndarray) -> np.ndarray:
        """Apply Θ = U_Θ ∘ K to a (stack of) frames."""
        if self.trs is None:
            raise NoTrs(f"({self.name})")
        return self.trs.u_theta @ np.conj(frames)


@dataclass(frozen=True)
class ProjectorSample:
    """The Fermi projector at one momentum with its gap certificate."""

    k: Tuple[float, float]
    projector: np.ndarray
    gap: float
    occupied_energies: Tuple[float, ...]


class Occupation(NamedTuple):
    """Occupied eigenframes over a batch of momenta."""

    frames: np.ndarray
    energies: np.ndarray
    gaps: np.ndarray


def occupied_frames(
    model: BlochModel,
    momenta: np.ndarray,
    tol_gap: float = const.TOL_GAP,
    tol_herm: float = const.TOL_HERM,
) -> Occupation:
    """Return eigenframes of the m lowest bands at momenta of shape (..., 2).

    Raises:
        GapClosed: At the momentum with the smallest gap, if it is too small.
    """
    momenta = np.asarray(momenta, dtype=float)
    energies, vectors = hermitian_eig(model.hamiltonian(momenta), tol_herm)
    gaps = energies[..., model.m] - energies[..., model.m - 1]
    worst = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    if gaps[worst] <= tol_gap:
        raise GapClosed(momenta[worst], float(gaps[worst]))

    return Occupation(frames=vectors[..., : model.m], energies=energies, gaps=gaps)


def projectors(frames: np.ndarray) -> np.ndarray:
    """Return P = ΨΨ† for a (stack of) frames."""
    return frames @ dagger(frames)


def fermi_projector(
    model: BlochModel, k: Sequence[float], tol_gap: float = const.TOL_GAP
) -> ProjectorSample:
    """Return the projector onto the m lowest bands at k."""
    momentum = np.asarray(k, dtype=float)
    occupation = occupied_frames(model, momentum, tol_gap)
    return ProjectorSample(
        k=(float(momentum[0]), float(momentum[1])),
        projector=projectors(occupation.frames),
        gap=float(occupation.gaps),
        occupied_energies=tuple(float(e) for e in occupation.energies[: model.m]),
    )


def kramers_frame(
    model: BlochModel,
    mu: Sequence[int],
    frame: np.ndarray,
) -> np.ndarray:
    """Return a frame G of Ran(frame) with Θ'G ◁ J = G, Θ' = τ_μ⁻¹Θ.

    At a time-reversal invariant momentum k with k + μ = -k, Θ' maps the
    occupied space into itself and squares to -1, so the space splits
    into orthogonal pairs (v, Θ'v).
    """
    twisted = dagger(model.translation(mu))

    def theta_prime(vector: np.ndarray) -> np.ndarray:
        return twisted @ model.time_reverse(vector)

    columns: List[np.ndarray] = []
    candidates = np.asarray(frame, dtype=complex)
    for _ in range(frame.shape[1] // 2):
        basis = np.stack(columns, axis=1) if columns else np.zeros((frame.shape[0], 0))
        remainders = candidates - basis @ (dagger(basis) @ candidates)
        best = int(np.argmax(np.linalg.norm(remainders, axis=0)))
        vector = remainders[:, best] / np.linalg.norm(remainders[:, best])
        columns.extend([vector, theta_prime(vector)])

    return np.stack(columns, axis=1)


class Check(NamedTuple):
    """One named residual check."""

    name: str
    residual: float
    threshold: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        """Whether the residual is below its threshold."""
        return bool(self.residual < self.threshold)


@dataclass
class SymmetryReport:
    """Residuals of the symmetry checks run on a model."""

    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(check.passed for check in self.checks)

    @property
    def first_failure(self) -> Optional[Check]:
        """Return the first failing check, if any."""
        return next((check for check in self.checks if not check.passed), None)

    def names(self) -> List[str]:
        """Return the names of the checks that ran."""
        return [check.name for check in self.checks]


def cell_grid(grid_n: int) -> np.ndarray:
    """Return the N×N periodic sampling of B, shape (N, N, 2)."""
    axis = -0.5 + np.arange(grid_n) / grid_n
    return np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)


def verify_symmetries(
    model: BlochModel, grid_n: int, tol_gap: float = const.TOL_GAP
) -> SymmetryReport:
    """Check τ-covariance and, with trs, time-reversal symmetry of P(k).

    Raises:
        GapClosed: The model is gapless somewhere on the grid.
    """
    assert model.tau is not None
    momenta = cell_grid(grid_n)
    base = projectors(occupied_frames(model, momenta, tol_gap).frames)
    report = SymmetryReport()

    for index, (shift, unitary) in enumerate(zip(np.eye(2), model.tau), start=1):
        shifted = projectors(occupied_frames(model, momenta + shift, tol_gap).frames)
        expected = unitary @ base @ dagger(unitary)
        residual = float(np.max(np.abs(shifted - expected)))
        report.checks.append(
            Check(f"translation_e{index}", residual, const.TOL_SYMMETRY)
        )

    if model.trs is not None:
        reversed_ = projectors(occupied_frames(model, -momenta, tol_gap).frames)
        u_theta = model.trs.u_theta
        expected = u_theta @ np.conj(base) @ dagger(u_theta)
        residual = float(np.max(np.abs(reversed_ - expected)))
        report.checks.append(Check("time_reversal", residual, const.TOL_SYMMETRY))

    _LOGGER.debug("symmetry checks for %s: %s", model.name, report.checks)
    return report


def _haldane_hoppings(
    t1: float, t2: float, phi: float, mass: float
) -> Dict[Lattice, np.ndarray]:
    hoppings: Dict[Lattice, np.ndarray] = {}

    def add(vector: Lattice, block: np.ndarray) -> None:
        for key, value in ((vector, block), ((-vector[0], -vector[1]), dagger(block))):
            hoppings[key] = hoppings.get(key, np.zeros((2, 2), dtype=complex)) + value

    for vector in ((0, 0), (1, 0), (0, -1)):
        block = np.zeros((2, 2), dtype=complex)
        block[0, 1] = t1
        add(vector, block)

    for vector in ((1, 0), (0, 1), (-1, -1)):
        add(vector, np.diag([t2 * np.exp(1j * phi), t2 * np.exp(-1j * phi)]))

    hoppings[(0, 0)] = hoppings[(0, 0)] + np.diag([mass, -mass])
    return hoppings


def haldane(t1: float, t2: float, phi: float, M: float) -> BlochModel:
    """Two-band honeycomb model with complex next-nearest hopping.

    The Dirac points sit at ±(1/3, 1/3), where the mass term is
    M ∓ 3√3·t2·sin(φ).
    """
    return BlochModel(
        n=2,
        m=1,
        hoppings=_haldane_hoppings(t1, t2, phi, M),
        lattice=HONEYCOMB,
        name="haldane",
        params={"t1": t1, "t2": t2, "phi": phi, "M": M},
    )


# Unit vectors of the three nearest-neighbor bonds, A to B, keyed by R.
_BONDS = {
    (0, 0): (-math.sqrt(3) / 2, 0.5),
    (1, 0): (math.sqrt(3) / 2, 0.5),
    (0, -1): (0.0, -1.0),
}


def kane_mele(t: float, lso: float, lr: float, lv: float) -> BlochModel:
    """Four-band quantum spin Hall model in the basis (A↑, B↑, A↓, B↓).

    Spin-orbit coupling enters as spin-dependent next-nearest hopping, lv
    is the staggered sublattice potential and lr the Rashba coupling.
    """
    spin_up = _haldane_hoppings(t, lso, math.pi / 2, lv)
    spin_down = _haldane_hoppings(t, lso, -math.pi / 2, lv)
    up, down = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    hoppings = {
        vector: np.kron(up, spin_up[vector]) + np.kron(down, spin_down[vector])
        for vector in spin_up
    }

    a_to_b = np.array([[0, 1], [0, 0]], dtype=complex)
    for vector, (d_x, d_y) in _BONDS.items():
        rashba = np.kron(1j * lr * (PAULI_X * d_y - PAULI_Y * d_x), a_to_b)
        partner = (-vector[0], -vector[1])
        hoppings[vector] = hoppings[vector] + rashba
        hoppings[partner] = hoppings[partner] + dagger(rashba)

    return BlochModel(
        n=4,
        m=2,
        hoppings=hoppings,
        lattice=HONEYCOMB,
        trs=TimeReversal(np.kron(SYMPLECTIC_J, np.eye(2)), normal_form_epsilon(2)),
        name="kane_mele",
        params={"t": t, "lso": lso, "lr": lr, "lv": lv},
    )


def atomic_insulator(n: int, m: int, trs: bool = False) -> BlochModel:
    """Momentum-independent insulator H = diag(-1, ..., -1, +1, ..., +1)."""
    onsite = np.diag([-1.0] * m + [1.0] * (n - m)).astype(complex)
    time_reversal = None
    if trs:
        if n % 2 or m % 2:
            raise TrsInconsistent(f"(atomic insulator needs even n, m; got {n}, {m})")
        time_reversal = TimeReversal(
            np.kron(np.eye(n // 2), -SYMPLECTIC_J), normal_form_epsilon(m)
        )

    return BlochModel(
        n=n,
        m=m,
        hoppings={(0, 0): onsite},
        trs=time_reversal,
        name="atomic",
        params={"n": n, "m": m, "trs": float(trs)},
    )


def _qwz_hoppings(u: float, winding: int) -> Dict[Lattice, np.ndarray]:
    forward = -0.5j * PAULI_X + 0.5 * PAULI_Z
    upward = -0.5j * PAULI_Y + 0.5 * PAULI_Z
    hoppings = {
        (0, 0): u * PAULI_Z,
        (winding, 0): forward,
        (-winding, 0): dagger(forward),
        (0, 1): upward,
        (0, -1): dagger(upward),
    }
    return hoppings


def qwz(u: float, winding: int = 1) -> BlochModel:
    """Two-band model d(k)·σ with q-fold winding in k1.

    Here d = (sin 2πqk1, sin 2πk2, u + cos 2πqk1 + cos 2πk2).

    The lower band carries the negative of the degree of the map k ↦ d/|d|,
    which is q·sign(u) for 0 < |u| < 2 and zero for |u| > 2.
    """
    return BlochModel(
        n=2,
        m=1,
        hoppings=_qwz_hoppings(u, winding),
        name="qwz",
        params={"u": u, "winding": winding},
    )


def bhz(u: float) -> BlochModel:
    """Four-band model: a qwz spin-up block and its time-reversed partner."""
    spin_up = _qwz_hoppings(u, 1)
    up, down = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    hoppings = {
        vector: np.kron(up, block) + np.kron(down, np.conj(block))
        for vector, block in spin_up.items()
    }
    return BlochModel(
        n=4,
        m=2,
        hoppings=hoppings,
        trs=TimeReversal(np.kron(SYMPLECTIC_J, np.eye(2)), normal_form_epsilon(2)),
        name="bhz",
        params={"u": u},
    )


def _nonzero(value: float) -> float:
    if value == 0:
        raise vol.Invalid("must be nonzero")
    return value


_REAL = vol.Coerce(float)
_INT = vol.Coerce(int)

BUILTIN_SCHEMAS: Dict[str, vol.Schema] = {
    "haldane": vol.Schema(
        {
            vol.Optional("t1", default=1.0): vol.All(_REAL, _nonzero),
            vol.Optional("t2", default=0.1): _REAL,
            vol.Optional("phi", default=math.pi / 2): _REAL,
            vol.Optional("M", default=0.0): _REAL,
        }
    ),
    "kane_mele": vol.Schema(
        {
            vol.Optional("t", default=1.0): vol.All(_REAL, _nonzero),
            vol.Optional("lso", default=0.06): _REAL,
            vol.Optional("lr", default=0.0): _REAL,
            vol.Optional("lv", default=0.1): _REAL,
        }
    ),
    "atomic": vol.Schema(
        vol.All(
            {
                vol.Optional("n", default=2): vol.All(_INT, vol.Range(min=2)),
                vol.Optional("m", default=1): vol.All(_INT, vol.Range(min=1)),
                vol.Optional("trs", default=False): vol.Boolean(),
            },
            lambda params: params
            if params["m"] < params["n"]
            else _invalid("need m < n"),
        )
    ),
    "qwz": vol.Schema(
        {
            vol.Optional("u", default=1.0): _REAL,
            vol.Optional("winding", default=1): vol.All(_INT, _nonzero),
        }
    ),
    "bhz": vol.Schema({vol.Optional("u", default=1.0): _REAL}),
}

BUILTIN_MODELS: Dict[str, Callable[..., BlochModel]] = {
    "haldane": haldane,
    "kane_mele": kane_mele,
    "atomic": atomic_insulator,
    "qwz": qwz,
    "bhz": bhz,
}


class Params(Dict[str, Any]):
    """Model parameters, readable as attributes (*params.lso*).

    Long names from const.PARAM_TO_ALIAS (*lambda_so*, *mass*, ...) are
    stored under the short names the builders take.
    """

    def __init__(self, values: Mapping[str, Any]) -> None:
        """Store the values under their short names."""
        super().__init__(
            (const.PARAM_TO_ALIAS.get(name, name), value)
            for name, value in values.items()
        )

    def __getattr__(self, name: str) -> Any:
        """Return a parameter via dot-notation."""
        try:
            return self[name]
        except KeyError as err:
            raise AttributeError(name) from err


def _invalid(message: str) -> Any:
    raise vol.Invalid(message)


def builtin_params(name: str, params: Dict[str, Any]) -> Params:
    """Validate parameters of a built-in model, filling in defaults.

    Raises:
        vol.Invalid: Unknown model, unknown parameter or bad value.
    """
    if name not in BUILTIN_SCHEMAS:
        raise vol.Invalid(f"unknown model {name!r}")
    return Params(BUILTIN_SCHEMAS[name](dict(Params(params))))


def build_model(name: str, params: Dict[str, Any]) -> BlochModel:
    """Construct a built-in model from a (possibly partial) parameter map."""
    return BUILTIN_MODELS[name](**builtin_params(name, params))
