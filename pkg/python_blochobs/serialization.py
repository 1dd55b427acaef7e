"""Hopping files and frame export files.

Both formats are JSON documents in which complex matrices are written as
{"re": [[...]], "im": [[...]]} pairs of real arrays.
"""

import json
import logging
from typing import Any, Dict, List, Optional

import numpy as np
import voluptuous as vol

from python_blochobs import const
from python_blochobs.exceptions import ParseError
from python_blochobs.frames import BoundaryFrame, FrameField, ObstructionSet
from python_blochobs.models import BlochModel, TimeReversal

_LOGGER = logging.getLogger(__name__)


def _rectangular(rows: List[List[float]]) -> List[List[float]]:
    if len({len(row) for row in rows}) > 1:
        raise vol.Invalid("ragged matrix rows")
    return rows


def _matching_parts(data: Dict[str, Any]) -> Dict[str, Any]:
    """Require "im", when given, to have the shape of "re"."""
    if data["im"] and np.shape(data["im"]) != np.shape(data["re"]):
        raise vol.Invalid(
            f"im shape {np.shape(data['im'])} != re shape {np.shape(data['re'])}"
        )
    return data


_REAL_MATRIX = vol.All([[vol.Coerce(float)]], _rectangular)

COMPLEX_MATRIX = vol.All(
    {vol.Required("re"): _REAL_MATRIX, vol.Optional("im", default=list): _REAL_MATRIX},
    _matching_parts,
)

MODEL_FILE_SCHEMA = vol.Schema(
    {
        vol.Required("n"): vol.All(int, vol.Range(min=2)),
        vol.Required("m"): vol.All(int, vol.Range(min=1)),
        vol.Optional("lattice"): vol.All(
            [vol.All([vol.Coerce(float)], vol.Length(min=2, max=2))],
            vol.Length(min=2, max=2),
        ),
        vol.Optional("name", default="custom"): str,
        vol.Required("hoppings"): vol.All(
            [
                vol.All(
                    {
                        vol.Required("R"): vol.All([int], vol.Length(min=2, max=2)),
                        vol.Required("re"): _REAL_MATRIX,
                        vol.Optional("im", default=list): _REAL_MATRIX,
                    },
                    _matching_parts,
                )
            ],
            vol.Length(min=1, msg="empty hopping list"),
        ),
        vol.Optional("tau"): vol.All([COMPLEX_MATRIX], vol.Length(min=2, max=2)),
        vol.Optional("trs"): {
            vol.Required("u_theta"): COMPLEX_MATRIX,
            vol.Required("epsilon"): COMPLEX_MATRIX,
        },
    }
)


def encode_matrix(matrix: np.ndarray) -> Dict[str, Any]:
    """Return the {"re", "im"} form of a complex array."""
    array = np.asarray(matrix, dtype=complex)
    return {"re": array.real.tolist(), "im": array.imag.tolist()}


def decode_matrix(data: Dict[str, Any]) -> np.ndarray:
    """Inverse of encode_matrix; a missing or empty "im" means zero."""
    real = np.asarray(data["re"], dtype=float)
    if not data.get("im"):
        return real.astype(complex)
    return real + 1j * np.asarray(data["im"], dtype=float)


def _read(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise ParseError(f"({path}: {err})") from err


def _write(path: str, document: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, sort_keys=True)
        handle.write("\n")
    _LOGGER.debug("wrote %s", path)


def parse_model(document: Any) -> BlochModel:
    """Build a model from a decoded hopping document.

    Raises:
        ParseError: The document does not match the hopping format.
        HermiticityViolation: H_{-R} != H_R†.
        TrsInconsistent: The time-reversal data are inconsistent.
        RepresentationError: τ is not a commuting pair of unitaries.
    """
    try:
        data = MODEL_FILE_SCHEMA(document)
    except vol.Invalid as err:
        raise ParseError(f"({err})") from err

    hoppings: Dict[Any, np.ndarray] = {}
    for entry in data["hoppings"]:
        vector = tuple(entry["R"])
        if vector in hoppings:
            raise ParseError(f"(duplicate hopping R={list(vector)})")
        hoppings[vector] = decode_matrix(entry)

    trs: Optional[TimeReversal] = None
    if "trs" in data:
        trs = TimeReversal(
            u_theta=decode_matrix(data["trs"]["u_theta"]),
            epsilon=decode_matrix(data["trs"]["epsilon"]),
        )

    tau = None
    if "tau" in data:
        tau = tuple(decode_matrix(item) for item in data["tau"])

    extra: Dict[str, Any] = {}
    if "lattice" in data:
        extra["lattice"] = np.asarray(data["lattice"], dtype=float)

    return BlochModel(
        n=data["n"],
        m=data["m"],
        hoppings=hoppings,
        tau=tau,
        trs=trs,
        name=data["name"],
        **extra,
    )


def load_model(path: str) -> BlochModel:
    """Load a model from a hopping file."""
    _LOGGER.debug("loading model from %s", path)
    return parse_model(_read(path))


def model_document(model: BlochModel) -> Dict[str, Any]:
    """Return the hopping document of a model."""
    document: Dict[str, Any] = {
        "n": model.n,
        "m": model.m,
        "name": model.name,
        "lattice": np.asarray(model.lattice, dtype=float).tolist(),
        "hoppings": [
            {"R": list(vector), **encode_matrix(model.hoppings[vector])}
            for vector in sorted(model.hoppings)
        ],
    }
    if model.tau is not None:
        document["tau"] = [encode_matrix(item) for item in model.tau]
    if model.trs is not None:
        document["trs"] = {
            "u_theta": encode_matrix(model.trs.u_theta),
            "epsilon": encode_matrix(model.trs.epsilon),
        }
    return document


def dump_model(model: BlochModel, path: str) -> None:
    """Write a model as a hopping file."""
    _write(path, model_document(model))


FRAME_FILE_SCHEMA = vol.Schema(
    {
        vol.Required("cell"): vol.In(const.CELLS + ("path",)),
        vol.Required("N"): int,
        vol.Optional("shape"): [int],
        vol.Required("nodes"): list,
        vol.Required("frames"): [COMPLEX_MATRIX],
        vol.Optional("boundary"): {
            vol.Required("nodes"): list,
            vol.Required("frames"): [COMPLEX_MATRIX],
            vol.Required("gauge"): [COMPLEX_MATRIX],
        },
        vol.Optional("obstructions"): [
            {
                vol.Required("point"): str,
                vol.Required("k"): [vol.Coerce(float)],
                vol.Required("unitary"): COMPLEX_MATRIX,
                vol.Required("log"): COMPLEX_MATRIX,
                vol.Required("compat_residual"): vol.Coerce(float),
            }
        ],
    },
    extra=vol.ALLOW_EXTRA,
)


def frames_document(
    psi: FrameField,
    boundary: Optional[BoundaryFrame] = None,
    obstructions: Optional[ObstructionSet] = None,
) -> Dict[str, Any]:
    """Return the export document of a frame field."""
    grid_shape = list(psi.momenta.shape[:-1])
    document: Dict[str, Any] = {
        "cell": psi.cell,
        "N": psi.grid_n if psi.cell in const.CELLS else len(psi.momenta) - 1,
        "shape": grid_shape,
        "nodes": psi.momenta.reshape(-1, 2).tolist(),
        "frames": [
            encode_matrix(frame)
            for frame in psi.frames.reshape((-1,) + psi.frames.shape[-2:])
        ],
    }
    if boundary is not None:
        document["boundary"] = {
            "nodes": boundary.path.nodes.tolist(),
            "frames": [encode_matrix(frame) for frame in boundary.frames],
            "gauge": [encode_matrix(gauge) for gauge in boundary.gauge],
        }
    if obstructions is not None:
        document["obstructions"] = [
            {
                "point": point,
                "k": [float(value) for value in momentum],
                "unitary": encode_matrix(unitary),
                "log": encode_matrix(log.T),
                "compat_residual": float(residual),
            }
            for point, momentum, unitary, log, residual in zip(
                obstructions.points,
                obstructions.momenta,
                obstructions.unitaries,
                obstructions.logs,
                obstructions.compat_residuals,
            )
        ]
    return document


def dump_frames(
    path: str,
    psi: FrameField,
    boundary: Optional[BoundaryFrame] = None,
    obstructions: Optional[ObstructionSet] = None,
) -> None:
    """Write a frame export file."""
    _write(path, frames_document(psi, boundary, obstructions))


def load_frames(path: str) -> FrameField:
    """Read the frame field of a frame export file back.

    Raises:
        ParseError: The file is not a frame export file.
    """
    try:
        data = FRAME_FILE_SCHEMA(_read(path))
    except vol.Invalid as err:
        raise ParseError(f"({err})") from err

    shape: List[int] = data.get("shape") or [len(data["nodes"])]
    frames = np.array([decode_matrix(frame) for frame in data["frames"]])
    if frames.shape[0] != int(np.prod(shape)):
        raise ParseError(f"({frames.shape[0]} frames for grid shape {shape})")

    return FrameField(
        momenta=np.asarray(data["nodes"], dtype=float).reshape(tuple(shape) + (2,)),
        frames=frames.reshape(tuple(shape) + frames.shape[-2:]),
        cell=data["cell"],
    )
