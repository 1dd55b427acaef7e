"""Tolerances and run configuration."""

import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import voluptuous as vol

from python_blochobs import const
from python_blochobs.models import BUILTIN_SCHEMAS, Params, builtin_params


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every computation."""

    herm: float = const.TOL_HERM
    rank: float = const.TOL_RANK
    unitary: float = const.TOL_UNITARY
    branch: float = const.TOL_BRANCH
    gauge: float = const.TOL_GAUGE
    gap: float = const.TOL_GAP
    cont: float = const.TOL_CONT
    compat: float = const.TOL_COMPAT
    snap: float = const.SNAP_TOLERANCE
    step: float = const.STEP_LIMIT
    max_grid: int = const.MAX_GRID

    def with_overrides(self, overrides: Dict[str, Any]) -> "Tolerances":
        """Return a copy with validated overrides applied."""
        return replace(self, **TOLERANCE_SCHEMA(dict(overrides)))

    def as_dict(self) -> Dict[str, Any]:
        """Return the tolerances as a plain dict."""
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()

_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))

TOLERANCE_SCHEMA = vol.Schema(
    {
        vol.Optional("herm"): _POSITIVE,
        vol.Optional("rank"): _POSITIVE,
        vol.Optional("unitary"): _POSITIVE,
        vol.Optional("branch"): _POSITIVE,
        vol.Optional("gauge"): _POSITIVE,
        vol.Optional("gap"): _POSITIVE,
        vol.Optional("cont"): _POSITIVE,
        vol.Optional("compat"): _POSITIVE,
        vol.Optional("snap"): vol.All(_POSITIVE, vol.Range(max=0.5)),
        vol.Optional("step"): vol.All(_POSITIVE, vol.Range(max=3.14159)),
        vol.Optional("max_grid"): vol.All(
            vol.Coerce(int), vol.Range(min=const.MIN_GRID)
        ),
    }
)


def _even_grid(value: int) -> int:
    if value % 2:
        raise vol.Invalid("grid must be even")
    return value


GRID = vol.All(vol.Coerce(int), vol.Range(min=const.MIN_GRID), _even_grid)

SWEEP_AXIS_SCHEMA = vol.Schema(
    {
        vol.Required("name"): str,
        vol.Required("start"): vol.Coerce(float),
        vol.Required("stop"): vol.Coerce(float),
        vol.Required("steps"): vol.All(vol.Coerce(int), vol.Range(min=2)),
    }
)


def _check_model(config: Dict[str, Any]) -> Dict[str, Any]:
    """Require exactly one model source and validate builtin parameters."""
    if (config["model"] is None) == (config["model_file"] is None):
        raise vol.Invalid("give exactly one of --model and --model-file")

    if config["model"] is not None:
        swept = {axis["name"]: axis["start"] for axis in config["sweep"]}
        config["params"] = builtin_params(
            config["model"], {**config["params"], **swept}
        )
    elif config["sweep"]:
        raise vol.Invalid("sweeps need a builtin --model")

    return config


RUN_CONFIG_SCHEMA = vol.Schema(
    vol.All(
        {
            vol.Optional("model", default=None): vol.Any(
                None, vol.In(sorted(BUILTIN_SCHEMAS))
            ),
            vol.Optional("params", default=dict): {str: vol.Any(float, int, bool)},
            vol.Optional("model_file", default=None): vol.Any(None, str),
            vol.Optional("invariant", default="all"): vol.In(
                sorted(const.INVARIANT_METHODS)
            ),
            vol.Optional("methods", default=["all"]): [
                vol.In(const.ALL_METHODS + ("all",))
            ],
            vol.Optional("grid", default=64): GRID,
            vol.Optional("out", default=None): vol.Any(None, str),
            vol.Optional("format", default="json"): vol.In(["json", "csv"]),
            vol.Optional("sweep", default=list): vol.All(
                [SWEEP_AXIS_SCHEMA], vol.Length(max=2)
            ),
            vol.Optional("tolerances", default=dict): TOLERANCE_SCHEMA,
            vol.Optional("target", default="boundary"): vol.In(["boundary", "cell"]),
            vol.Optional("seed", default=0): vol.Coerce(int),
        },
        _check_model,
    )
)


@dataclass(frozen=True)
class RunConfig:
    """A validated command-line run."""

    model: Optional[str]
    """Builtin model name, or None for a hopping file."""

    params: Params
    model_file: Optional[str]
    invariant: str
    methods: Tuple[str, ...]
    """Selected method tags, already intersected with the invariant."""

    grid: int
    out: Optional[str]
    format: str
    sweep: Tuple[Dict[str, Any], ...]
    tolerances: Tolerances
    target: str
    seed: int

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "RunConfig":
        """Validate a raw configuration mapping.

        Raises:
            vol.Invalid: The configuration is invalid.
        """
        config = RUN_CONFIG_SCHEMA(raw)
        allowed = const.INVARIANT_METHODS[config["invariant"]]
        requested = config["methods"]
        if "all" in requested:
            methods = allowed
        else:
            methods = tuple(method for method in allowed if method in requested)
        if not methods:
            raise vol.Invalid(
                f"no method of {requested} computes the {config['invariant']} invariant"
            )

        return cls(
            model=config["model"],
            params=Params(config["params"]),
            model_file=config["model_file"],
            invariant=config["invariant"],
            methods=methods,
            grid=config["grid"],
            out=config["out"],
            format=config["format"],
            sweep=tuple(config["sweep"]),
            tolerances=DEFAULT_TOLERANCES.with_overrides(config["tolerances"]),
            target=config["target"],
            seed=config["seed"],
        )

    def describe(self) -> Dict[str, Any]:
        """Return a JSON-friendly description of the run."""
        return {
            "model": self.model,
            "model_file": self.model_file,
            "params": dict(sorted(self.params.items())),
            "invariant": self.invariant,
            "methods": list(self.methods),
            "grid_N": self.grid,
            "sweep": [dict(axis) for axis in self.sweep],
            "tolerances": self.tolerances.as_dict(),
        }


def thread_count(default: Optional[int] = None) -> int:
    """Return the sweep concurrency cap from BLOCHOBS_THREADS."""
    fallback = default or os.cpu_count() or 1
    value = os.environ.get(const.THREADS_ENV)
    if not value:
        return fallback
    return int(vol.Schema(vol.All(vol.Coerce(int), vol.Range(min=1)))(value))


def sweep_points(axes: Tuple[Dict[str, Any], ...]) -> List[Dict[str, float]]:
    """Return parameter points in row-major order over up to two axes."""
    points: List[Dict[str, float]] = [{}]
    for axis in axes:
        step = (axis["stop"] - axis["start"]) / (axis["steps"] - 1)
        values = [axis["start"] + index * step for index in range(axis["steps"])]
        points = [
            {**point, axis["name"]: value} for point in points for value in values
        ]
    return points
