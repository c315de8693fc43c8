"""Generate centroidal Voronoi meshes of the unit square in the JSON mesh format.

Usage: python3 scripts/make_fixtures.py [out_dir]
"""

import json
import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Voronoi
from shapely.geometry import Polygon, box

SIZES = [16, 64, 256, 1024, 4096]
LLOYD_STEPS = 40
SEED = 20240607


def clipped_cells(points):
    # mirror the generators across the four sides so every cell is bounded
    mirrored = [points]
    for axis, value in [(0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)]:
        m = points.copy()
        m[:, axis] = 2 * value - m[:, axis]
        mirrored.append(m)
    vor = Voronoi(np.vstack(mirrored))
    square = box(0.0, 0.0, 1.0, 1.0)
    cells = []
    for i in range(len(points)):
        region = vor.regions[vor.point_region[i]]
        poly = Polygon(vor.vertices[region]).intersection(square)
        cells.append(poly)
    return cells


def lloyd(n, rng):
    pts = rng.random((n, 2))
    for _ in range(LLOYD_STEPS):
        pts = np.array([[c.centroid.x, c.centroid.y] for c in clipped_cells(pts)])
    return pts


def to_mesh(cells):
    index = {}
    vertices = []
    elements = []

    def vid(x, y):
        key = (round(x, 9), round(y, 9))
        if key not in index:
            index[key] = len(vertices)
            vertices.append([float(key[0]), float(key[1])])
        return index[key]

    for cell in cells:
        ring = list(cell.exterior.coords)[:-1]
        if Polygon(ring).exterior.is_ccw is False:
            ring.reverse()
        loop = []
        for x, y in ring:
            v = vid(x, y)
            if not loop or loop[-1] != v:
                loop.append(v)
        if loop[0] == loop[-1]:
            loop.pop()
        elements.append(loop)
    return {"vertices": vertices, "elements": elements}


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "crates/cli/fixtures"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    for n in SIZES:
        mesh = to_mesh(clipped_cells(lloyd(n, rng)))
        path = out / f"voronoi_{n}.json"
        path.write_text(json.dumps(mesh, separators=(",", ":")))
        print(path, len(mesh["elements"]), "elements", len(mesh["vertices"]), "vertices")


if __name__ == "__main__":
    main()
