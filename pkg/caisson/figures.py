"""
CSV and SVG output. Re-running with the same inputs reproduces the files byte for byte.
"""

import csv
import logging
import math
import pathlib
import typing

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .circuit_certificates import (  # noqa: E402
    BarycentricCircuit,
    hypocycloid_implicit,
    psi,
)
from .membership import GridRaster  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "caisson"

PathLike = typing.Union[str, pathlib.Path]


def write_raster_csv(grid: GridRaster, out: typing.TextIO):
    """One line per pixel: its centre and 1 for members, 0 otherwise"""
    writer = csv.writer(out, dialect="excel", lineterminator="\n")
    writer.writerow(["x", "y", "flag"])
    xs, ys = grid.centres()
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            writer.writerow([f"{x:.12g}", f"{y:.12g}", int(grid.flags[i, j])])


def read_raster_csv(path: PathLike) -> np.ndarray:
    """Flags of a raster written by write_raster_csv, rows ordered by y"""
    with pathlib.Path(path).open() as fd:
        rows = list(csv.DictReader(fd))
    size = math.isqrt(len(rows))
    return np.array([int(r["flag"]) for r in rows], dtype=bool).reshape(size, size)


def _save(fig, path: PathLike):
    fig.savefig(str(path), format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug("Wrote %s", path)


def write_raster_svg(grid: GridRaster, path: PathLike, title: typing.Optional[str] = None):
    fig, ax = plt.subplots(figsize=(5, 5))
    window = grid.window
    ax.imshow(
        grid.flags,
        origin="lower",
        extent=window.as_list(),
        cmap="Greys",
        vmin=0,
        vmax=1,
        interpolation="nearest",
    )
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    _save(fig, path)


def write_region_svg(
    circuit: BarycentricCircuit,
    path: PathLike,
    c: typing.Optional[complex] = None,
    example: typing.Optional[str] = None,
    samples: int = 96,
):
    """
    The sampled region ψ(𝕋^n) in the plane of c_γ, the query point and, for the reference
    circuits, the zero set of their implicit boundary
    """
    n = circuit.n
    axes = [np.linspace(0, 2 * math.pi, samples, endpoint=False)] * n
    phis = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    values = psi(circuit, phis)

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(values.real, values.imag, s=0.2, color="0.6", rasterized=False)
    bound = circuit.outer_bound / 2 * 1.1
    if example is not None:
        xs = np.linspace(-bound, bound, 400)
        x, y = np.meshgrid(xs, xs)
        r, theta = np.hypot(x, y), np.arctan2(y, x)
        h = np.vectorize(lambda a, b: hypocycloid_implicit(example, a, b))(r, theta)
        ax.contour(x, y, h, levels=[0], colors="black", linewidths=0.8)
    if c is not None:
        ax.plot([c.real], [c.imag], marker="x", color="red")
    ax.set_xlim(-bound, bound)
    ax.set_ylim(-bound, bound)
    ax.set_aspect("equal")
    _save(fig, path)
