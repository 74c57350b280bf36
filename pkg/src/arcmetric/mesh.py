"""Scale-window meshes of a germ and graph geodesics on them.

At scale t the germ is sampled inside the ball of radius 4t with vertex
spacing at most the requested resolution.  Edges join vertices within twice
the resolution on the same sheet; vertices of different sheets closer than
half the resolution are glued.  Graph distances with Euclidean edge weights
dominate the straight-line distance, and refining the mesh can only shrink
them, so they bracket the true inner distance from above.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .germs import GermModel, Sheet


class MeshError(RuntimeError):
    """Disconnected or unusable mesh; the resolution is too coarse."""


class PointGraph:
    """Vertices on the germ plus a weighted neighbor graph."""

    def __init__(self, points: np.ndarray, sheet_index: np.ndarray,
                 graph: csr_matrix, resolution: float):
        self.points = points
        self.sheet_index = sheet_index
        self.graph = graph
        self.resolution = resolution
        self.tree = cKDTree(points)
        self._source_cache: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.points)

    def nearest_vertex(self, x: np.ndarray, max_snap: float | None = None) -> int:
        d, i = self.tree.query(np.asarray(x, dtype=float))
        limit = self.resolution if max_snap is None else max_snap
        if d > limit:
            raise MeshError(
                f"point {np.asarray(x).tolist()} is {d:.3e} from the mesh "
                f"(limit {limit:.3e})"
            )
        return int(i)

    def distances_from(self, source: int) -> np.ndarray:
        cached = self._source_cache.get(source)
        if cached is None:
            cached = dijkstra(self.graph, directed=False, indices=source)
            self._source_cache[source] = cached
        return cached

    def _attach(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        idx = np.asarray(
            self.tree.query_ball_point(x, 2.0 * self.resolution), dtype=int
        )
        if len(idx) == 0:
            d, _ = self.tree.query(x)
            raise MeshError(
                f"point {x.tolist()} is {d:.3e} from the mesh "
                f"(limit {2.0 * self.resolution:.3e})"
            )
        return idx, np.linalg.norm(self.points[idx] - x, axis=1)

    def distance(self, x: np.ndarray, y: np.ndarray) -> float:
        """Geodesic between germ points, entering the graph as extra nodes.

        Joining x and y to every vertex within the edge radius (instead of
        snapping to the single nearest vertex) keeps the estimate free of
        grid-phase noise, so refining the mesh changes it smoothly.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ix, wx = self._attach(x)
        iy, wy = self._attach(y)
        n = len(self.points)
        joint = csr_matrix(
            (wx, (np.full(len(ix), n), ix)), shape=(n + 1, n + 1)
        )
        aug = self.graph.copy()
        aug.resize((n + 1, n + 1))
        dist = dijkstra(aug + joint, directed=False, indices=n)
        d = float(np.min(dist[iy] + wy))
        # The two extra nodes follow the same chord rule as mesh vertices.
        gap = float(np.linalg.norm(x - y))
        if gap <= 2.0 * self.resolution:
            d = min(d, gap)
        if math.isinf(d):
            raise MeshError("vertices are in different components")
        return d


def _numeric_jacobian(sheet: Sheet, params: list[float], j: int, h: float) -> float:
    up = list(params)
    dn = list(params)
    lo, hi = (float(b) for b in sheet.bounds[j])
    up[j] = min(params[j] + h, hi)
    dn[j] = max(params[j] - h, lo)
    if up[j] == dn[j]:
        return 0.0
    diff = sheet.evaluate(up) - sheet.evaluate(dn)
    return float(np.linalg.norm(diff)) / (up[j] - dn[j])


def _march_radial(sheet: Sheet, window: float, step_len: float,
                  probe: "callable", radial: int) -> list[float]:
    """Radial parameter values with image spacing about step_len."""
    lo, hi = (float(b) for b in sheet.bounds[radial])
    values = [0.0 if lo <= 0.0 <= hi else lo]
    u = values[0]
    guard = 0
    while guard < 2_000_000:
        guard += 1
        speed = max(probe(u), 1e-9)
        u = u + step_len / speed
        if u > hi:
            break
        values.append(u)
        if probe_norm_exceeds(sheet, u, radial, window):
            break
    else:
        raise MeshError("radial march did not terminate")
    return values


def probe_norm_exceeds(sheet: Sheet, u: float, radial: int, window: float) -> bool:
    # Minimum image norm over a few angular probes; once even the closest
    # probe leaves the window the march can stop.
    others = [j for j in range(sheet.param_dim) if j != radial]
    if not others:
        return float(np.linalg.norm(sheet.evaluate([u]))) > window
    j = others[0]
    lo, hi = (float(b) for b in sheet.bounds[j])
    norms = []
    for v in np.linspace(lo, hi, 5):
        params = [0.0, 0.0]
        params[radial] = u
        params[j] = float(v)
        norms.append(float(np.linalg.norm(sheet.evaluate(params))))
    return min(norms) > window


def _sheet_points(sheet: Sheet, window: float, resolution: float) -> np.ndarray:
    step = 0.85 * resolution
    rows: list[list[float]] = []
    if sheet.param_dim == 1:
        probe = lambda u: _numeric_jacobian(sheet, [u], 0, max(1e-9, 1e-4 * resolution))
        us = _march_radial(sheet, window, step, probe, 0)
        rows = [[u] for u in us]
    elif any(sheet.angular):
        radial = sheet.angular.index(False)
        ang = 1 - radial
        lo_a, hi_a = (float(b) for b in sheet.bounds[ang])
        probes = np.linspace(lo_a, hi_a, 5)
        h = max(1e-9, 1e-4 * resolution)

        def speed_along(u: float, axis: int) -> float:
            best = 0.0
            for v in probes:
                params = [0.0, 0.0]
                params[radial] = u
                params[ang] = float(v)
                best = max(best, _numeric_jacobian(sheet, params, axis, h))
            return best

        us = _march_radial(sheet, window, step, lambda u: speed_along(u, radial), radial)
        for u in us:
            speed = speed_along(u, ang)
            n = max(1, int(math.ceil(speed * (hi_a - lo_a) / step)) + 1)
            for v in np.linspace(lo_a, hi_a, n):
                params = [0.0, 0.0]
                params[radial] = u
                params[ang] = float(v)
                rows.append(params)
    else:
        # Two radial parameters: uniform grid sized from the largest local
        # stretch inside the window.
        lob = [float(lo) for lo, _ in sheet.bounds]
        hib = [float(hi) for _, hi in sheet.bounds]

        def norm_at(lam: float) -> float:
            params = [
                min(max(lam, lob[j]), hib[j]) if hib[j] > 0 else lob[j]
                for j in range(2)
            ]
            return float(np.linalg.norm(sheet.evaluate(params)))

        lam = 1e-9
        limit = max(abs(v) for v in hib + lob)
        while norm_at(lam) < window and lam < limit:
            lam *= 1.3
        ext = 1.3 * lam
        boxes = [(max(lob[j], -ext), min(hib[j], ext)) for j in range(2)]
        h = max(1e-9, 1e-4 * resolution)
        jmax = 1e-9
        for u in np.linspace(boxes[0][0], boxes[0][1], 7):
            for v in np.linspace(boxes[1][0], boxes[1][1], 7):
                for j in range(2):
                    jmax = max(jmax, _numeric_jacobian(sheet, [u, v], j, h))
        du = step / jmax
        nu = max(2, int(math.ceil((boxes[0][1] - boxes[0][0]) / du)) + 1)
        nv = max(2, int(math.ceil((boxes[1][1] - boxes[1][0]) / du)) + 1)
        if nu * nv > 4_000_000:
            raise MeshError(
                f"mesh would need {nu * nv} vertices; coarsen the resolution"
            )
        uu, vv = np.meshgrid(
            np.linspace(boxes[0][0], boxes[0][1], nu),
            np.linspace(boxes[1][0], boxes[1][1], nv),
            indexing="ij",
        )
        params = np.column_stack([uu.ravel(), vv.ravel()])
        arr = sheet.evaluate_many(params)
        keep = np.linalg.norm(arr, axis=1) <= window * (1.0 + 1e-9)
        return arr[keep]
    arr = sheet.evaluate_many(np.asarray(rows, dtype=float))
    keep = np.linalg.norm(arr, axis=1) <= window * (1.0 + 1e-9)
    return arr[keep]


def mesh_at_scale(germ: GermModel, t: float, resolution: float) -> PointGraph:
    """Point graph of the germ inside the 4t ball at the given resolution."""
    if not 0.0 < t <= float(germ.radius):
        raise ValueError(f"scale t={t} outside (0, {float(germ.radius)}]")
    if resolution > t / 8.0 or resolution <= 0.0:
        raise ValueError("resolution must lie in (0, t/8]")
    key = (round(float(t), 15), round(float(resolution), 15))
    cached = germ._mesh_cache.get(key)
    if cached is not None:
        return cached
    window = 4.0 * t
    chunks = []
    ids = []
    for si, sheet in enumerate(germ.sheets):
        pts = _sheet_points(sheet, window, resolution)
        if len(pts):
            chunks.append(pts)
            ids.append(np.full(len(pts), si, dtype=int))
    points = np.vstack(chunks)
    sheet_index = np.concatenate(ids)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    offsets = np.cumsum([0] + [len(c) for c in chunks])
    for k, pts in enumerate(chunks):
        tree = cKDTree(pts)
        pairs = tree.query_pairs(2.0 * resolution, output_type="ndarray")
        if len(pairs):
            rows.append(pairs[:, 0] + offsets[k])
            cols.append(pairs[:, 1] + offsets[k])
    glue_tree = cKDTree(points)
    glue = glue_tree.query_pairs(0.5 * resolution, output_type="ndarray")
    if len(glue):
        cross = sheet_index[glue[:, 0]] != sheet_index[glue[:, 1]]
        glue = glue[cross]
        if len(glue):
            rows.append(glue[:, 0])
            cols.append(glue[:, 1])
    if not rows:
        raise MeshError("mesh has no edges; resolution too coarse")
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    w = np.linalg.norm(points[r] - points[c], axis=1)
    n = len(points)
    graph = csr_matrix(
        (np.concatenate([w, w]), (np.concatenate([r, c]), np.concatenate([c, r]))),
        shape=(n, n),
    )
    ncomp, labels = connected_components(graph, directed=False)
    if ncomp != 1:
        sizes = np.bincount(labels)
        raise MeshError(
            f"mesh of {germ.name} at t={t:.4g} split into {ncomp} components "
            f"(sizes {sorted(sizes.tolist(), reverse=True)[:4]}...); "
            "the resolution is too coarse for the sheet gluing"
        )
    pg = PointGraph(points, sheet_index, graph, resolution)
    germ._mesh_cache[key] = pg
    return pg


def inner_distance_numeric(
    germ: GermModel, x: np.ndarray, y: np.ndarray, t: float, resolution: float
) -> float:
    """Graph geodesic between germ points x and y at the given mesh scale."""
    mesh = mesh_at_scale(germ, t, resolution)
    return mesh.distance(x, y)
