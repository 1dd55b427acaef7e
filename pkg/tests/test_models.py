"""Test the model builders and their validation."""

import math
from typing import Any

import numpy as np
import pytest
import voluptuous as vol

from python_blochobs.exceptions import (
    GapClosed,
    HermiticityViolation,
    NoTrs,
    ParseError,
    RepresentationError,
    TrsInconsistent,
)
from python_blochobs.linalg import dagger
from python_blochobs.models import (
    PAULI_Z,
    SYMPLECTIC_J,
    BlochModel,
    TimeReversal,
    atomic_insulator,
    bhz,
    build_model,
    builtin_params,
    cell_grid,
    fermi_projector,
    haldane,
    kane_mele,
    kramers_frame,
    normal_form_epsilon,
    occupied_frames,
    qwz,
    verify_symmetries,
)
from tests.const import (
    DIRAC_POINT,
    HALDANE_CRITICAL_MASS,
    HALDANE_TOPOLOGICAL,
    KANE_MELE_QSH,
    KANE_MELE_RASHBA,
    TRIM,
)


def test_haldane_hamiltonian() -> Any:
    """Test Hermiticity and the gap at the Dirac point."""
    model = haldane(**HALDANE_TOPOLOGICAL)
    momenta = cell_grid(12)
    hamiltonian = model.hamiltonian(momenta)

    assert hamiltonian.shape == (12, 12, 2, 2)
    assert np.allclose(hamiltonian, dagger(hamiltonian))

    sample = fermi_projector(model, DIRAC_POINT)
    assert sample.gap == pytest.approx(6 * math.sqrt(3) * 0.1)
    assert np.allclose(sample.projector @ sample.projector, sample.projector)
    assert len(sample.occupied_energies) == 1
    assert "<BlochModel: name=haldane n=2 m=1 trs=no>" in str(model)


def test_haldane_periodic() -> Any:
    """Test that the periodic-gauge Hamiltonian repeats with the lattice."""
    model = haldane(**HALDANE_TOPOLOGICAL)
    momenta = cell_grid(8)

    assert np.allclose(model.hamiltonian(momenta + [1, 0]), model.hamiltonian(momenta))
    assert np.allclose(model.hamiltonian(momenta + [0, -1]), model.hamiltonian(momenta))


def test_gap_closing() -> Any:
    """Test that GapClosed reports the offending momentum."""
    model = haldane(t1=1.0, t2=0.1, phi=math.pi / 2, M=HALDANE_CRITICAL_MASS)
    with pytest.raises(GapClosed) as err:
        occupied_frames(model, cell_grid(24))

    assert err.value.momentum == pytest.approx(DIRAC_POINT, abs=1e-9)
    assert err.value.gap < 1e-8


def test_kane_mele_symmetries() -> Any:
    """Test that Kane–Mele passes the projector symmetry checks."""
    for params in (KANE_MELE_QSH, KANE_MELE_RASHBA):
        report = verify_symmetries(kane_mele(**params), 16)

        assert report.names() == ["translation_e1", "translation_e2", "time_reversal"]
        assert report.passed
        assert report.first_failure is None


def test_kane_mele_kramers_degeneracy() -> Any:
    """Test the Kramers pairs at the time-reversal invariant momenta."""
    model = kane_mele(**KANE_MELE_RASHBA)
    energies = np.linalg.eigvalsh(model.hamiltonian(np.array(TRIM)))

    assert np.allclose(energies[:, 0], energies[:, 1], atol=1e-10)
    assert np.allclose(energies[:, 2], energies[:, 3], atol=1e-10)


def test_broken_translation() -> Any:
    """Test that a wrong translation representation is caught."""
    params = haldane(**HALDANE_TOPOLOGICAL)
    model = BlochModel(
        n=2,
        m=1,
        hoppings=params.hoppings,
        tau=(np.diag([1.0, -1.0]), np.eye(2)),
        name="twisted",
    )
    report = verify_symmetries(model, 16)

    assert not report.passed
    assert report.first_failure is not None
    assert report.first_failure.name == "translation_e1"


def test_broken_time_reversal() -> Any:
    """Test that a Zeeman term breaks the time-reversal check."""
    model = kane_mele(**KANE_MELE_QSH)
    hoppings = dict(model.hoppings)
    hoppings[(0, 0)] = hoppings[(0, 0)] + 0.05 * np.kron(PAULI_Z, np.eye(2))
    broken = BlochModel(n=4, m=2, hoppings=hoppings, trs=model.trs, name="zeeman")
    report = verify_symmetries(broken, 16)

    assert report.first_failure is not None
    assert report.first_failure.name == "time_reversal"


def test_model_validation() -> Any:
    """Test the errors raised at construction."""
    onsite = np.diag([-1.0, 1.0])
    with pytest.raises(ParseError, match="0 < m < n"):
        BlochModel(n=2, m=2, hoppings={(0, 0): onsite})

    with pytest.raises(ParseError, match="empty hopping list"):
        BlochModel(n=2, m=1, hoppings={})

    with pytest.raises(ParseError, match="shape"):
        BlochModel(n=2, m=1, hoppings={(0, 0): np.eye(3)})

    with pytest.raises(HermiticityViolation, match="missing"):
        BlochModel(n=2, m=1, hoppings={(0, 0): onsite, (1, 0): np.eye(2)})

    with pytest.raises(HermiticityViolation, match="residual"):
        BlochModel(
            n=2,
            m=1,
            hoppings={(0, 0): onsite, (1, 0): 1j * np.eye(2), (-1, 0): 1j * np.eye(2)},
        )

    with pytest.raises(RepresentationError, match="not unitary"):
        BlochModel(n=2, m=1, hoppings={(0, 0): onsite}, tau=(2 * np.eye(2), np.eye(2)))

    with pytest.raises(RepresentationError, match="do not commute"):
        BlochModel(
            n=2,
            m=1,
            hoppings={(0, 0): onsite},
            tau=(np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])),
        )


def test_trs_validation() -> Any:
    """Test the time-reversal consistency checks."""
    onsite = np.diag([-1.0, -1.0, 1.0, 1.0])
    u_theta = np.kron(SYMPLECTIC_J, np.eye(2))

    with pytest.raises(TrsInconsistent, match="conj"):
        BlochModel(
            n=4,
            m=2,
            hoppings={(0, 0): onsite},
            trs=TimeReversal(np.eye(4), normal_form_epsilon(2)),
        )

    with pytest.raises(TrsInconsistent, match="odd number"):
        BlochModel(
            n=4,
            m=1,
            hoppings={(0, 0): np.diag([-1.0, 1.0, 1.0, 1.0])},
            trs=TimeReversal(u_theta, np.eye(1)),
        )

    with pytest.raises(TrsInconsistent, match="epsilon has shape"):
        BlochModel(
            n=4, m=2, hoppings={(0, 0): onsite}, trs=TimeReversal(u_theta, np.eye(4))
        )

    with pytest.raises(RepresentationError, match="theta tau_e1"):
        BlochModel(
            n=4,
            m=2,
            hoppings={(0, 0): onsite},
            tau=(np.diag([1j, 1.0, 1.0, 1.0]), np.eye(4)),
            trs=TimeReversal(u_theta, normal_form_epsilon(2)),
        )

    with pytest.raises(TrsInconsistent, match="even n, m"):
        atomic_insulator(3, 1, trs=True)


def test_time_reverse_needs_trs() -> Any:
    """Test that time reversal is refused without time-reversal data."""
    model = qwz(1.0)
    with pytest.raises(NoTrs):
        model.time_reverse(np.eye(2)[:, :1])


def test_translation_powers() -> Any:
    """Test τ_λ for positive, negative and mixed lattice vectors."""
    tau_e1 = np.diag([1.0, 1j])
    model = BlochModel(
        n=2, m=1, hoppings={(0, 0): np.diag([-1.0, 1.0])}, tau=(tau_e1, np.eye(2))
    )

    assert np.allclose(model.translation((0, 0)), np.eye(2))
    assert np.allclose(model.translation((2, 0)), np.diag([1.0, -1.0]))
    assert np.allclose(model.translation((-1, 3)), dagger(tau_e1))


@pytest.mark.parametrize("mu_index", range(4))
def test_kramers_frame(mu_index: int) -> Any:
    """Test that the Kramers-adapted frame satisfies Θ'G ◁ J = G."""
    model = kane_mele(**KANE_MELE_RASHBA)
    momentum = np.array(TRIM[mu_index])
    mu = np.rint(-2 * momentum).astype(int)
    frames = occupied_frames(model, momentum).frames
    adapted = kramers_frame(model, mu, frames)

    assert np.allclose(dagger(adapted) @ adapted, np.eye(2), atol=1e-10)
    assert np.allclose(
        adapted @ dagger(adapted), frames @ dagger(frames), atol=1e-10
    )
    image = dagger(model.translation(mu)) @ model.time_reverse(adapted) @ SYMPLECTIC_J
    assert np.allclose(image, adapted, atol=1e-10)


def test_builtin_params() -> Any:
    """Test defaults, aliases and validation of builtin parameters."""
    params = builtin_params("kane_mele", {"lambda_so": 0.2, "lv": 0.3})

    assert params.lso == 0.2
    assert params.lv == 0.3
    assert params.t == 1.0
    assert params.lr == 0.0

    with pytest.raises(vol.Invalid):
        builtin_params("haldane", {"bogus": 1.0})

    with pytest.raises(vol.Invalid):
        builtin_params("haldane", {"t1": 0.0})

    with pytest.raises(vol.Invalid):
        builtin_params("atomic", {"n": 2, "m": 2})

    with pytest.raises(vol.Invalid, match="unknown model"):
        builtin_params("graphene", {})


def test_build_model() -> Any:
    """Test that every builtin constructs with its defaults."""
    for name, expected in (
        ("haldane", (2, 1, False)),
        ("kane_mele", (4, 2, True)),
        ("atomic", (2, 1, False)),
        ("qwz", (2, 1, False)),
        ("bhz", (4, 2, True)),
    ):
        model = build_model(name, {})
        assert (model.n, model.m, model.has_trs) == expected
        assert model.name == name

    atomic = build_model("atomic", {"n": 4, "m": 2, "trs": True})
    assert atomic.has_trs
    assert verify_symmetries(atomic, 8).passed


def test_bhz_is_time_reversal_symmetric() -> Any:
    """Test the time-reversed qwz pair."""
    report = verify_symmetries(bhz(1.0), 16)

    assert report.passed
