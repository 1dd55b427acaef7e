"""Parameter sweeps over built-in models.

Each parameter point is computed in a worker thread; the points are
fanned out with asyncio and come back in row-major parameter order.
"""

import logging
import time
from asyncio import gather, get_running_loop
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from python_blochobs import const
from python_blochobs.config import RunConfig, sweep_points, thread_count
from python_blochobs.exceptions import BlochObsError, GapClosed
from python_blochobs.invariants import METHODS, InvariantResult
from python_blochobs.models import Params, build_model

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    """Invariants at one parameter point."""

    params: Dict[str, float]
    """Full parameter map of the point, including the swept values."""

    results: Tuple[InvariantResult, ...]
    wall_ms: Tuple[float, ...] = ()

    status: str = "ok"
    """"ok", const.GAPLESS or "failed"."""

    detail: str = ""

    def records(self, methods: Tuple[str, ...]) -> List[Dict[str, Any]]:
        """Return one flat record per method, parameters first."""
        if self.status != "ok":
            return [
                {
                    **self.params,
                    "method": method,
                    "raw": None,
                    "value": self.status,
                    "snap_residual": None,
                    "grid_N": None,
                }
                for method in methods
            ]
        return [{**self.params, **result.as_dict()} for result in self.results]


def compute_point(config: RunConfig, point: Dict[str, float]) -> SweepRow:
    """Compute the selected invariants at one parameter point.

    A gap closing or any other computational failure marks the row
    instead of raising.
    """
    assert config.model is not None
    params = dict(Params({**config.params, **point}))
    results: List[InvariantResult] = []
    timings: List[float] = []
    try:
        model = build_model(config.model, params)
        for method in config.methods:
            start = time.perf_counter()
            results.append(METHODS[method](model, config.grid, config.tolerances))
            timings.append(1000 * (time.perf_counter() - start))
    except GapClosed as err:
        _LOGGER.info("gapless at %s: %s", point, err)
        return SweepRow(
            params=params, results=(), status=const.GAPLESS, detail=str(err)
        )
    except BlochObsError as err:
        _LOGGER.warning("failed at %s: %s", point, err)
        return SweepRow(params=params, results=(), status="failed", detail=str(err))

    return SweepRow(params=params, results=tuple(results), wall_ms=tuple(timings))


async def run_sweep(config: RunConfig, threads: Optional[int] = None) -> List[SweepRow]:
    """Compute every point of the configured sweep.

    Args:
        config: A validated run with a built-in model and sweep axes.
        threads: Worker cap; defaults to BLOCHOBS_THREADS or the CPU count.
    """
    points = sweep_points(config.sweep)
    workers = threads or thread_count()
    _LOGGER.info("sweeping %d points on %d threads", len(points), workers)

    loop = get_running_loop()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = await gather(
            *(
                loop.run_in_executor(pool, compute_point, config, point)
                for point in points
            )
        )
    return list(rows)
