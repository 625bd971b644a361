#!/usr/bin/env python3
"""Regenerates the experiment fixtures under data/.

usage: make_fixtures.py <path-to-thermoid-binary> [data-dir]

The plate mesh comes from `thermoid generate`; the bridge truss and the dam
wedge are built here from the dimensions of the three experiments. Sensor
coordinates are approximate placements, not surveyed positions.
"""

import itertools
import json
import math
import os
import subprocess
import sys


def dump(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")


def sensors_json(points, channels):
    out, sid = [], 0
    for p in points:
        for d in channels:
            out.append({"id": sid, "pos": list(p), "kind": "displacement", "dir": list(d), "weight": 1.0})
            sid += 1
    return {"sensors": out}


XY = [(1, 0, 0), (0, 1, 0)]
XYZ = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


# ---------------------------------------------------------------------------
# plate with a hole

def plate(binary, root):
    d = os.path.join(root, "plate")
    os.makedirs(d, exist_ok=True)
    subprocess.run([binary, "generate", "--out", os.path.join(d, "mesh.json"),
                    "--load-out", os.path.join(d, "load.json"), "--load-total", "1e5"], check=True)
    six = [(10, 28, 0), (30, 28, 0), (50, 28, 0), (10, 2, 0), (30, 2, 0), (50, 2, 0)]
    fourteen = ([(x, 28, 0) for x in (6, 18, 30, 42, 54)] + [(x, 15, 0) for x in (12, 22, 38, 48)]
                + [(x, 2, 0) for x in (6, 18, 30, 42, 54)])
    dump(os.path.join(d, "sensors_6.json"), sensors_json(six, XY))
    dump(os.path.join(d, "sensors_14.json"), sensors_json(fourteen, XY))
    for n in (6, 14):
        dump(os.path.join(d, f"plate-{n}.json"), {
            "name": f"plate-{n}",
            "mesh": "mesh.json",
            "load_cases": ["load.json"],
            "sensors": f"sensors_{n}.json",
            "target": {"regions": [{"box": {"min": [15, 26, -1], "max": [20, 30, 1]}, "value": 10.0}],
                       "default": 0.0},
            "filter": {"enabled": True, "radius": 5.0},
            "bounds": {"enabled": True, "lower": -5.0, "upper": 15.0, "beta": 1.0},
            "optimizer": {"step_rule": "barzilai_borwein", "max_step": 2.5e-3, "max_iterations": 5000,
                          "convergence_factor": 1e-5},
            "interpolation": {"k": 3, "variogram": "gaussian"},
            "output": f"../../out/plate-{n}",
        })


# ---------------------------------------------------------------------------
# bridge: two arched Pratt-style trusses joined by transverse members and
# lateral bracing, 40 nodes and 134 members

def bridge(root):
    d = os.path.join(root, "bridge")
    os.makedirs(d, exist_ok=True)
    nodes, index = [], {}

    def node(x, y, z, key):
        index[key] = len(nodes)
        nodes.append({"id": len(nodes), "x": float(x), "y": float(y), "z": float(z)})

    bottom_x = [-20 + 4 * i for i in range(11)]
    top_x = [-16 + 4 * i for i in range(9)]
    for side, y in enumerate((0.0, 5.0)):
        for i, x in enumerate(bottom_x):
            node(x, y, 0.0, ("b", side, i))
        for i, x in enumerate(top_x):
            node(x, y, 10.0 * (1.0 - (x / 20.0) ** 2), ("t", side, i))

    CHORD, WEB, BRACE = 0, 1, 2
    areas = {CHORD: 0.01, WEB: 0.0025, BRACE: 1e-4}
    members = []

    def member(a, b, group):
        members.append((index[a], index[b], group))

    for s in (0, 1):
        for i in range(10):
            member(("b", s, i), ("b", s, i + 1), CHORD)
        for i in range(8):
            member(("t", s, i), ("t", s, i + 1), CHORD)
        for i in range(9):
            member(("t", s, i), ("b", s, i + 1), WEB)  # verticals
        member(("b", s, 0), ("t", s, 0), WEB)  # end diagonals
        member(("b", s, 10), ("t", s, 8), WEB)
        for i in range(8):  # panel diagonals falling toward midspan
            if top_x[i] < 0:
                member(("t", s, i), ("b", s, i + 2), WEB)
            else:
                member(("t", s, i + 1), ("b", s, i + 1), WEB)
    for i in range(11):
        member(("b", 0, i), ("b", 1, i), BRACE)
    for i in range(9):
        member(("t", 0, i), ("t", 1, i), BRACE)
    for i in range(10):
        member(("b", 0, i), ("b", 1, i + 1), BRACE)
        member(("b", 1, i), ("b", 0, i + 1), BRACE)
    for i in range(8):
        member(("t", 0, i), ("t", 1, i + 1), BRACE)
        member(("t", 1, i), ("t", 0, i + 1), BRACE)
    for bi, ti in ((0, 0), (10, 8)):  # end portals
        member(("b", 0, bi), ("t", 1, ti), BRACE)
        member(("b", 1, bi), ("t", 0, ti), BRACE)
    assert len(nodes) == 40 and len(members) == 134, (len(nodes), len(members))

    mesh = {
        "dimension": 3,
        "nodes": nodes,
        "materials": [{"id": 0, "rho": 7800.0, "young": 2e11, "poisson": 0.3, "alpha": 1e-5}],
        "elements": [{"id": k, "kind": "truss3d", "nodes": [a, b], "material": 0, "section": areas[g]}
                     for k, (a, b, g) in enumerate(members)],
        "dirichlet": [{"node": index[("b", s, i)], "dofs": "xyz"} for s in (0, 1) for i in (0, 10)],
    }
    dump(os.path.join(d, "mesh.json"), mesh)
    dump(os.path.join(d, "load.json"), {"id": 0, "nodal_loads": [], "body_force": [0.0, 0.0, -9.81]})

    pos = lambda key: (nodes[index[key]]["x"], nodes[index[key]]["y"], nodes[index[key]]["z"])
    eight = [pos(("b", s, i)) for s in (0, 1) for i in (2, 4, 6, 8)]
    twenty = ([pos(("b", s, i)) for s in (0, 1) for i in (1, 3, 5, 7, 9)]
              + [pos(("t", s, i)) for s in (0, 1) for i in (1, 3, 4, 5, 7)])
    dump(os.path.join(d, "sensors_8.json"), sensors_json(eight, XYZ))
    dump(os.path.join(d, "sensors_20.json"), sensors_json(twenty, XYZ))
    for n in (8, 20):
        dump(os.path.join(d, f"bridge-{n}.json"), {
            "name": f"bridge-{n}",
            "mesh": "mesh.json",
            "load_cases": ["load.json"],
            "sensors": f"sensors_{n}.json",
            "target": {"regions": [{"box": {"min": [0.5, -0.1, -1.0], "max": [21.0, 0.1, 11.0]}, "value": 10.0}],
                       "default": 0.0},
            "filter": {"enabled": True, "radius": 6.0},
            "bounds": {"enabled": True, "lower": -5.0, "upper": 15.0, "beta": 1.0},
            "optimizer": {"step_rule": "barzilai_borwein", "max_step": 2.5e-2, "max_iterations": 5000,
                          "convergence_factor": 1e-5},
            "interpolation": {"k": 3, "variogram": "gaussian"},
            "output": f"../../out/bridge-{n}",
        })


# ---------------------------------------------------------------------------
# dam: 45 degree wedge of a thick arch, tetrahedralized structured grid

DAM_A = (65.0, 0.0)          # downstream toe (radius, elevation)
DAM_B = (266.863, 6.6612)    # upstream heel
DAM_C = (224.0, 219.24)      # upstream crest
DAM_D = (210.0, 219.24)      # downstream crest
DAM_T = [0.0, 0.04, 0.08, 0.15, 0.25, 0.4, 0.6, 0.8, 1.0]
DAM_NS, DAM_NTH = 13, 9
WATER_TOP = 211.01
BASE_PRESSURE = 2.1546e6     # 45000 psf


def lerp(p, q, t):
    return (p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)


def section_point(s, t):
    low = lerp(DAM_A, DAM_B, t)
    high = lerp(DAM_D, DAM_C, t)
    return lerp(low, high, s)


def to_xyz(r, y, theta_deg):
    th = math.radians(theta_deg)
    return (r * math.cos(th), y, -r * math.sin(th))


def sub(a, b):
    return [a[i] - b[i] for i in range(3)]


def cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def dot(a, b):
    return sum(a[i] * b[i] for i in range(3))


def dam(root):
    d = os.path.join(root, "dam")
    os.makedirs(d, exist_ok=True)
    ns, nt, nth = DAM_NS, len(DAM_T), DAM_NTH
    thetas = [45.0 * k / (nth - 1) for k in range(nth)]
    idx = lambda i, j, k: (i * nt + j) * nth + k
    pts = []
    for i in range(ns):
        for j in range(nt):
            r, y = section_point(i / (ns - 1), DAM_T[j])
            for k in range(nth):
                pts.append(to_xyz(r, y, thetas[k]))
    nodes = [{"id": n, "x": p[0], "y": p[1], "z": p[2]} for n, p in enumerate(pts)]

    elements = []
    for i, j, k in itertools.product(range(ns - 1), range(nt - 1), range(nth - 1)):
        corner = lambda b: idx(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1))
        for perm in itertools.permutations((1, 2, 4)):
            tet = [corner(0), corner(perm[0]), corner(perm[0] | perm[1]), corner(7)]
            a, b, c, e = (pts[v] for v in tet)
            if dot(cross(sub(b, a), sub(c, a)), sub(e, a)) < 0:
                tet[1], tet[2] = tet[2], tet[1]
            elements.append({"id": len(elements), "kind": "tet4", "nodes": tet, "material": 0})

    dirichlet = {}
    for i, j, k in itertools.product(range(ns), range(nt), range(nth)):
        n = idx(i, j, k)
        if i == 0 or k == nth - 1:
            dirichlet[n] = "xyz"
        elif k == 0:
            dirichlet[n] = "z"
    mesh = {
        "dimension": 3,
        "nodes": nodes,
        "materials": [{"id": 0, "rho": 2400.0, "young": 3e10, "poisson": 0.15, "alpha": 1e-5}],
        "elements": elements,
        "dirichlet": [{"node": n, "dofs": v} for n, v in sorted(dirichlet.items())],
    }
    dump(os.path.join(d, "mesh.json"), mesh)

    # hydrostatic pressure on the upstream face lumped to nodes (quarter of
    # each face quad per corner, pressure taken at the quad centre)
    force = {}
    j = nt - 1
    for i, k in itertools.product(range(ns - 1), range(nth - 1)):
        q = [idx(i, j, k), idx(i + 1, j, k), idx(i + 1, j, k + 1), idx(i, j, k + 1)]
        p = [pts[v] for v in q]
        area_vec = [0.5 * c for c in cross(sub(p[2], p[0]), sub(p[3], p[1]))]
        centre = [sum(c[m] for c in p) / 4.0 for m in range(3)]
        radial = [centre[0], 0.0, centre[2]]
        if dot(area_vec, radial) < 0:
            area_vec = [-c for c in area_vec]  # outward = away from the axis
        pressure = BASE_PRESSURE * max(0.0, 1.0 - centre[1] / WATER_TOP)
        for v in q:
            f = force.setdefault(v, [0.0, 0.0, 0.0])
            for m in range(3):
                f[m] -= 0.25 * pressure * area_vec[m]
    loads = [{"node": n, "f": f} for n, f in sorted(force.items()) if n not in dirichlet or dirichlet[n] != "xyz"]
    dump(os.path.join(d, "load.json"), {"id": 0, "nodal_loads": loads, "body_force": [0.0, -9.81, 0.0]})

    # target: 10 on the downstream face and crest, 5 within 14 m of them
    ax, ay = DAM_A
    dx, dy = DAM_D[0] - ax, DAM_D[1] - ay
    length = math.hypot(dx, dy)
    with open(os.path.join(d, "target.csv"), "w") as f:
        f.write("node_id,delta_T\n")
        for i, j, k in itertools.product(range(ns), range(nt), range(nth)):
            r, y = section_point(i / (ns - 1), DAM_T[j])
            depth_face = abs((r - ax) * dy - (y - ay) * dx) / length
            depth_top = DAM_D[1] - y
            depth = min(depth_face, depth_top)
            value = 10.0 if depth < 1e-9 else (5.0 if depth <= 14.0 else 0.0)
            f.write(f"{idx(i, j, k)},{value}\n")

    planes = (11.25, 22.5, 33.75)
    base27 = ([(155.0, y) for y in (20.0, 50.0, 80.0, 110.0)] + [(222.0, y) for y in (40.0, 80.0, 120.0, 160.0, 200.0)])
    extra36 = [(100.0, y) for y in (10.0, 25.0, 40.0)]
    layout27 = [to_xyz(r, y, th) for th in planes for r, y in base27]
    layout36 = layout27 + [to_xyz(r, y, th) for th in planes for r, y in extra36]
    extra59 = ([to_xyz(185.0, y, th) for th in planes for y in (30.0, 70.0, 100.0)]
               + [to_xyz(130.0, y, th) for th in planes for y in (15.0, 45.0, 70.0)]
               + [to_xyz(215.0, 210.0, th) for th in (5.625, 16.875, 22.5, 28.125, 39.375)])
    layout59 = layout36 + extra59
    assert (len(layout27), len(layout36), len(layout59)) == (27, 36, 59)
    for n, layout in ((27, layout27), (36, layout36), (59, layout59)):
        dump(os.path.join(d, f"sensors_{n}.json"), sensors_json(layout, XYZ))
        dump(os.path.join(d, f"dam-{n}.json"), {
            "name": f"dam-{n}",
            "mesh": "mesh.json",
            "load_cases": ["load.json"],
            "sensors": f"sensors_{n}.json",
            "target": {"field": "target.csv"},
            "filter": {"enabled": True, "radius": 50.0},
            "bounds": {"enabled": True, "lower": -10.0, "upper": 30.0, "beta": 1.0},
            "optimizer": {"step_rule": "barzilai_borwein", "max_step": 0.1, "max_iterations": 5000,
                          "convergence_factor": 1e-5},
            "interpolation": {"k": 5, "variogram": "gaussian"},
            "output": f"../../out/dam-{n}",
        })


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    binary = sys.argv[1]
    root = sys.argv[2] if len(sys.argv) > 2 else os.path.join(os.path.dirname(__file__), "..", "..", "data")
    plate(binary, root)
    bridge(root)
    dam(root)
