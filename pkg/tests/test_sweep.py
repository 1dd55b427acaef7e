"""Test parameter sweeps."""

from typing import Any, Dict

import pytest

from python_blochobs import const
from python_blochobs.config import RunConfig
from python_blochobs.sweep import SweepRow, compute_point, run_sweep
from tests.const import HALDANE_CRITICAL_MASS


def _config(**extra: Any) -> RunConfig:
    raw: Dict[str, Any] = {"model": "haldane", "invariant": "chern", "grid": 16}
    raw.update(extra)
    return RunConfig.from_dict(raw)


def test_compute_point() -> Any:
    """Test one sweep point with two methods."""
    config = _config(methods=["obstruction", "plaquette"])
    row = compute_point(config, {"M": 0.0})

    assert row.status == "ok"
    assert [result.method for result in row.results] == ["obstruction", "plaquette"]
    assert len(row.wall_ms) == 2
    assert row.params["M"] == 0.0
    assert row.params["t2"] == 0.1
    assert abs(row.results[0].value) == 1
    assert row.results[0].value == row.results[1].value

    records = row.records(config.methods)
    assert records[0]["method"] == "obstruction"
    assert records[0]["M"] == 0.0
    assert records[0]["grid_N"] == 16


def test_compute_point_gapless() -> Any:
    """Test that a gap closing marks the row instead of raising."""
    config = _config(grid=24, methods=["plaquette"])
    row = compute_point(config, {"M": 0.0, "t2": 0.0})

    assert row.status == const.GAPLESS
    assert row.results == ()
    assert "gap" in row.detail

    records = row.records(config.methods)
    assert records == [
        {
            "M": 0.0,
            "phi": row.params["phi"],
            "t1": 1.0,
            "t2": 0.0,
            "method": "plaquette",
            "raw": None,
            "value": const.GAPLESS,
            "snap_residual": None,
            "grid_N": None,
        }
    ]


async def test_run_sweep() -> Any:
    """Test that a mass sweep crosses the transition in row-major order."""
    config = _config(
        methods=["plaquette"],
        sweep=[{"name": "M", "start": 0.0, "stop": 1.2, "steps": 4}],
    )
    rows = await run_sweep(config, threads=2)

    assert [row.params["M"] for row in rows] == pytest.approx([0.0, 0.4, 0.8, 1.2])
    assert all(row.status == "ok" for row in rows)
    values = [row.results[0].value for row in rows]
    assert [abs(value) for value in values] == [1, 1, 0, 0]
    assert 0.4 < HALDANE_CRITICAL_MASS < 0.8


async def test_run_sweep_gapless_row() -> Any:
    """Test that gapless points are marked and the other rows survive."""
    config = _config(
        grid=24,
        methods=["obstruction", "plaquette"],
        params={"t2": 0.0},
        sweep=[{"name": "M", "start": 0.0, "stop": 0.5, "steps": 2}],
    )
    rows = await run_sweep(config, threads=2)

    assert [row.status for row in rows] == [const.GAPLESS, "ok"]
    assert [record["value"] for record in rows[0].records(config.methods)] == [
        const.GAPLESS,
        const.GAPLESS,
    ]
    assert [result.value for result in rows[1].results] == [0, 0]


def test_sweep_row_defaults() -> Any:
    """Test an empty successful row."""
    row = SweepRow(params={"M": 0.0}, results=())

    assert row.status == "ok"
    assert row.records(("plaquette",)) == []
