"""Generate the bundled channel-with-cylinder mesh in Triangle text layout.

Channel [0, 2.2] x [0, 0.41], circular hole of radius 0.05 at (0.2, 0.2)
approximated by a regular polygon. Boundary markers:
  1 = channel walls (top, bottom), 2 = inflow (x = 0),
  3 = outflow (x = 2.2), 4 = cylinder.

Usage: python3 tools/gen_cylinder_mesh.py crates/core/data/cylinder
"""
import math
import sys

import numpy as np
import triangle

L, H = 2.2, 0.41
CX, CY, R = 0.2, 0.2, 0.05
N_CIRCLE = 48
N_INFLOW = 10
N_WALL = 44
MAX_AREA = 2.0e-3
NEAR_AREA = 2.6e-4
NEAR_RADIUS = 0.25


def boundary():
    pts, segs, marks = [], [], []

    def add_polyline(coords, marker, closed=False):
        start = len(pts)
        pts.extend(coords)
        n = len(coords)
        last = n if closed else n - 1
        for i in range(last):
            segs.append((start + i, start + (i + 1) % n))
            marks.append(marker)

    # outer boundary, counterclockwise, corners shared
    bottom = [(L * i / N_WALL, 0.0) for i in range(N_WALL + 1)]
    right = [(L, H * i / N_INFLOW) for i in range(1, N_INFLOW + 1)]
    top = [(L - L * i / N_WALL, H) for i in range(1, N_WALL + 1)]
    left = [(0.0, H - H * i / N_INFLOW) for i in range(1, N_INFLOW)]
    outer = bottom + right + top + left
    nb, nr, nt = len(bottom), len(right), len(top)
    pts.extend(outer)
    n = len(outer)
    for i in range(n):
        a, b = i, (i + 1) % n
        if i < nb - 1:
            m = 1
        elif i < nb - 1 + nr:
            m = 3
        elif i < nb - 1 + nr + nt:
            m = 1
        else:
            m = 2
        segs.append((a, b))
        marks.append(m)

    circle = [
        (CX + R * math.cos(2 * math.pi * k / N_CIRCLE), CY + R * math.sin(2 * math.pi * k / N_CIRCLE))
        for k in range(N_CIRCLE)
    ]
    add_polyline(circle, 4, closed=True)
    return pts, segs, marks


def main(stem):
    pts, segs, marks = boundary()
    geom = dict(
        vertices=np.array(pts),
        segments=np.array(segs),
        segment_markers=np.array(marks).reshape(-1, 1),
        holes=np.array([[CX, CY]]),
    )
    mesh = triangle.triangulate(geom, "pq30Ya%g" % MAX_AREA)
    # graded refinement around the cylinder and its wake
    tri = mesh["triangles"]
    v = mesh["vertices"]
    cent = v[tri].mean(axis=1)
    d = np.hypot(cent[:, 0] - CX, cent[:, 1] - CY)
    wake = (cent[:, 0] > CX) & (cent[:, 0] < 0.9) & (np.abs(cent[:, 1] - CY) < 0.1)
    area = np.where((d < NEAR_RADIUS) | wake, NEAR_AREA, MAX_AREA)
    mesh["triangle_max_area"] = area.reshape(-1, 1)
    mesh = triangle.triangulate(mesh, "rpq30Ya")

    v = mesh["vertices"]
    vm = mesh["vertex_markers"].ravel()
    tri = mesh["triangles"]
    seg = mesh["segments"]
    sm = mesh["segment_markers"].ravel()

    with open(stem + ".node", "w") as f:
        f.write("# channel 2.2 x 0.41 with cylinder r=0.05 at (0.2,0.2)\n")
        f.write("%d 2 0 1\n" % len(v))
        for i, (x, y) in enumerate(v):
            f.write("%d %.17g %.17g %d\n" % (i + 1, x, y, vm[i]))
    with open(stem + ".ele", "w") as f:
        f.write("%d 3 0\n" % len(tri))
        for i, t in enumerate(tri):
            f.write("%d %d %d %d\n" % (i + 1, t[0] + 1, t[1] + 1, t[2] + 1))
    with open(stem + ".edge", "w") as f:
        f.write("%d 1\n" % len(seg))
        for i, s in enumerate(seg):
            f.write("%d %d %d %d\n" % (i + 1, s[0] + 1, s[1] + 1, sm[i]))
    print("vertices", len(v), "triangles", len(tri), "boundary edges", len(seg))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "cylinder")
