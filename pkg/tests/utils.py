"""Test utilities."""

import json
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np

from python_blochobs.linalg import dagger, expi_hermitian


def random_hermitian(
    rng: np.random.Generator, size: int, scale: float = 1.0
) -> np.ndarray:
    """Return a random Hermitian matrix."""
    matrix = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    return 0.5 * scale * (matrix + dagger(matrix))


def random_unitary(rng: np.random.Generator, size: int) -> np.ndarray:
    """Return a Haar-ish random unitary from a QR decomposition."""
    matrix = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    unitary, upper = np.linalg.qr(matrix)
    return unitary * (np.diag(upper) / np.abs(np.diag(upper)))


def random_frame(rng: np.random.Generator, rows: int, columns: int) -> np.ndarray:
    """Return a random orthonormal rows×columns frame."""
    return random_unitary(rng, rows)[:, :columns]


def smooth_periodic_gauge(
    momenta: np.ndarray, size: int, rng: np.random.Generator, amplitude: float = 0.4
) -> np.ndarray:
    """Return a smooth unitary field W(k) with W(k + e1) = W(k + e2) = W(k)."""
    generator = np.zeros(momenta.shape[:-1] + (size, size), dtype=complex)
    for harmonic in ((1, 0), (0, 1), (1, 1)):
        phase = 2 * np.pi * (momenta @ np.array(harmonic, dtype=float))
        cosine, sine = random_hermitian(rng, size), random_hermitian(rng, size)
        generator += np.cos(phase)[..., None, None] * cosine
        generator += np.sin(phase)[..., None, None] * sine
    return expi_hermitian(generator, amplitude)


def solid_angle_degree(
    d_vector: Callable[[np.ndarray], np.ndarray], grid_n: int
) -> int:
    """Degree of k ↦ d(k)/|d(k)| on the torus by a triangulated solid-angle sum.

    Every grid square is split into two triangles whose signed solid
    angles are computed with the Van Oosterom–Strackee formula.
    """
    axis = np.arange(grid_n + 1) / grid_n
    momenta = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)
    unit = d_vector(momenta)
    unit = unit / np.linalg.norm(unit, axis=-1, keepdims=True)

    def solid_angle(
        first: np.ndarray, second: np.ndarray, third: np.ndarray
    ) -> np.ndarray:
        numerator = np.einsum("...i,...i", first, np.cross(second, third))
        denominator = (
            1
            + np.einsum("...i,...i", first, second)
            + np.einsum("...i,...i", second, third)
            + np.einsum("...i,...i", third, first)
        )
        return 2 * np.arctan2(numerator, denominator)

    corner = unit[:-1, :-1]
    right, top, diagonal = unit[1:, :-1], unit[:-1, 1:], unit[1:, 1:]
    total = np.sum(solid_angle(corner, right, diagonal)) + np.sum(
        solid_angle(corner, diagonal, top)
    )
    return int(round(total / (4 * np.pi)))


def qwz_d_vector(u: float, winding: int) -> Callable[[np.ndarray], np.ndarray]:
    """Return the d-vector of the qwz builder."""

    def d_vector(momenta: np.ndarray) -> np.ndarray:
        first = 2 * np.pi * winding * momenta[..., 0]
        second = 2 * np.pi * momenta[..., 1]
        return np.stack(
            [np.sin(first), np.sin(second), u + np.cos(first) + np.cos(second)], axis=-1
        )

    return d_vector


def write_json(path: Path, document: Dict[str, Any]) -> str:
    """Write a JSON document and return its path as a string."""
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def load_json(path: Path) -> Any:
    """Read a JSON document."""
    return json.loads(Path(path).read_text(encoding="utf-8"))
