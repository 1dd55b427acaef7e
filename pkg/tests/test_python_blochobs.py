"""Test basic python_blochobs functionality."""

from pathlib import Path
from typing import Any

import pytest

from python_blochobs import BlochObs, const
from python_blochobs.config import DEFAULT_TOLERANCES
from python_blochobs.exceptions import BlochObsError, NoTrs
from python_blochobs.models import atomic_insulator, haldane, kane_mele
from python_blochobs.serialization import dump_model
from tests.const import HALDANE_TOPOLOGICAL, HALDANE_TRIVIAL, KANE_MELE_QSH


def test_no_model() -> Any:
    """Test that we need a model or a hopping file."""
    with pytest.raises(BlochObsError, match="No model supplied!"):
        BlochObs()


def test_model_file(tmp_path: Path) -> Any:
    """Test that we can load the model from a hopping file."""
    path = tmp_path / "haldane.json"
    dump_model(haldane(**HALDANE_TOPOLOGICAL), str(path))
    obs = BlochObs(model_file=str(path))

    assert obs.model.name == "haldane"
    assert obs.tolerances == DEFAULT_TOLERANCES
    assert "<BlochObs: <BlochModel: name=haldane" in str(obs)


def test_chern() -> Any:
    """Test the Chern number of the topological and trivial Haldane phases."""
    topological = BlochObs(haldane(**HALDANE_TOPOLOGICAL))
    trivial = BlochObs(haldane(**HALDANE_TRIVIAL))

    result = topological.chern(32)
    assert result.method == "obstruction"
    assert abs(result.value) == 1
    assert topological.chern(32, method="plaquette").value == result.value
    assert trivial.chern(32).value == 0

    with pytest.raises(ValueError, match="Chern"):
        topological.chern(32, method="fkm_lattice")


def test_z2() -> Any:
    """Test the Fu–Kane–Mele index through the entry class."""
    obs = BlochObs(kane_mele(**KANE_MELE_QSH))

    assert obs.z2(32).value == 1
    assert obs.z2(32, method="fkm_lattice").value == 1

    with pytest.raises(ValueError, match="Z2"):
        obs.z2(32, method="plaquette")
    with pytest.raises(NoTrs):
        BlochObs(haldane(**HALDANE_TOPOLOGICAL)).z2(32)


def test_invariants() -> Any:
    """Test that the default method list follows the time-reversal data."""
    chern_only = BlochObs(atomic_insulator(2, 1)).invariants(16)
    everything = BlochObs(atomic_insulator(4, 2, trs=True)).invariants(16)

    assert [result.method for result in chern_only] == list(const.CHERN_METHODS)
    assert [result.method for result in everything] == list(const.ALL_METHODS)
    assert all(result.value == 0 for result in chern_only + everything)

    picked = BlochObs(kane_mele(**KANE_MELE_QSH)).invariants(32, ["fkm_obstruction"])
    assert [result.value for result in picked] == [1]


def test_verify() -> Any:
    """Test that the diagnostics pass on the builtin models."""
    for model in (haldane(**HALDANE_TOPOLOGICAL), kane_mele(**KANE_MELE_QSH)):
        report = BlochObs(model).verify(32)

        assert report.passed, report.first_failure
