"""Partition images as SVG or binary PPM"""
import logging
import os
from typing import Dict, List, Tuple

import numpy as np

from models.graph import Graph
from models.partition import PartitionView
from services.graph_generators import lattice_cells
from utils.errors import InvalidArgumentError, UnsupportedGraphError

logger = logging.getLogger(__name__)

# Part i gets PALETTE[i % len(PALETTE)]; parts are in canonical order
PALETTE: Tuple[Tuple[int, int, int], ...] = (
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
)


def part_colors(p: PartitionView) -> List[Tuple[int, int, int]]:
    """Fill color per vertex"""
    colors = [PALETTE[0]] * p.n
    for index, part in enumerate(p.parts):
        for v in part:
            colors[v] = PALETTE[index % len(PALETTE)]
    return colors


def _hex(color: Tuple[int, int, int]) -> str:
    return '#%02x%02x%02x' % color


def _lattice_origin(g: Graph) -> Tuple[int, int, int, int]:
    cells = lattice_cells(g)
    xs = [x for x, _ in cells]
    ys = [y for _, y in cells]
    return min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1


def render_svg(g: Graph, p: PartitionView, cell_size: int = 10) -> str:
    """
    SVG text for a partition

    Lattice graphs get one square cell per vertex; other graphs with
    coordinates get one circle per vertex over the edge drawing.
    """
    colors = part_colors(p)
    if lattice_cells(g):
        x0, y0, width, height = _lattice_origin(g)
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * cell_size}" '
            f'height="{height * cell_size}" viewBox="0 0 {width * cell_size} {height * cell_size}">'
        ]
        for v, (x, y) in enumerate(g.coords):
            col, row = int(round(x)) - x0, int(round(y)) - y0
            lines.append(
                f'<rect x="{col * cell_size}" y="{row * cell_size}" width="{cell_size}" '
                f'height="{cell_size}" fill="{_hex(colors[v])}"/>')
        lines.append('</svg>')
        return '\n'.join(lines) + '\n'

    xs = [x for x, _ in g.coords]
    ys = [y for _, y in g.coords]
    scale = float(cell_size)
    radius = cell_size / 3
    pad = cell_size
    width = (max(xs) - min(xs)) * scale + 2 * pad
    height = (max(ys) - min(ys)) * scale + 2 * pad

    def point(v: int) -> Tuple[str, str]:
        x, y = g.coords[v]
        return f"{(x - min(xs)) * scale + pad:.3f}", f"{(y - min(ys)) * scale + pad:.3f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">'
    ]
    for u, v in g.edges:
        (x1, y1), (x2, y2) = point(u), point(v)
        lines.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#999999" stroke-width="1"/>')
    for v in range(g.n):
        cx, cy = point(v)
        lines.append(f'<circle cx="{cx}" cy="{cy}" r="{radius:.3f}" fill="{_hex(colors[v])}"/>')
    lines.append('</svg>')
    return '\n'.join(lines) + '\n'


def render_ppm(g: Graph, p: PartitionView, cell_size: int = 10) -> bytes:
    """
    Binary PPM (P6) for a partition of a lattice graph

    Cells outside the vertex set are white.

    Raises:
        UnsupportedGraphError: Coordinates are not integral lattice points
    """
    if not lattice_cells(g):
        raise UnsupportedGraphError("PPM rendering needs integral lattice coordinates")
    colors = part_colors(p)
    x0, y0, width, height = _lattice_origin(g)
    pixels = np.full((height * cell_size, width * cell_size, 3), 255, dtype=np.uint8)
    for v, (x, y) in enumerate(g.coords):
        col, row = int(round(x)) - x0, int(round(y)) - y0
        pixels[row * cell_size:(row + 1) * cell_size, col * cell_size:(col + 1) * cell_size] = colors[v]
    header = f"P6\n{width * cell_size} {height * cell_size}\n255\n".encode('ascii')
    return header + pixels.tobytes()


def render_partition(g: Graph, p: PartitionView, path: str, cell_size: int = 10) -> str:
    """
    Write an image of a partition; the format follows the file extension

    Args:
        g: Graph with coordinates
        p: Partition of g's vertices
        path: Destination ending in .svg or .ppm
        cell_size: Pixels per lattice cell

    Returns:
        The path written

    Raises:
        UnsupportedGraphError: Graph has no coordinates
        InvalidArgumentError: Unknown extension, bad cell size or vertex count mismatch
    """
    if g.coords is None:
        raise UnsupportedGraphError(f"{g!r} has no vertex coordinates to render")
    if p.n != g.n:
        raise InvalidArgumentError(f"Partition covers {p.n} vertices, graph has {g.n}")
    if cell_size < 1:
        raise InvalidArgumentError("cell_size must be positive")

    extension = os.path.splitext(path)[1].lower()
    renderers: Dict[str, str] = {'.svg': 'svg', '.ppm': 'ppm'}
    if extension not in renderers:
        raise InvalidArgumentError(f"Unsupported image extension '{extension}'. Use .svg or .ppm")

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if renderers[extension] == 'svg':
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(render_svg(g, p, cell_size))
    else:
        with open(path, 'wb') as handle:
            handle.write(render_ppm(g, p, cell_size))
    logger.info(f"Rendered {p.k}-part partition of {g!r} to {path}")
    return path
