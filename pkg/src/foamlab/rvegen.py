"""Stochastic and regularized 2D foam RVE wall networks with periodic edges.

An RVE is a square window [0, H]^2 cut out of a periodic planar tessellation.
Random morphologies come from the Voronoi diagram of uniformly sampled seeds
(with a periodic minimum-separation rule); the diagram is computed on a
replicated seed set and clipped back to the window, which makes left/right
boundary vertices pair exactly under translation by (+H, 0). Wall thickness
follows the relative-density identity t = H^2 * mu / L_cell with L_cell the
total in-window wall length.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.spatial import Voronoi

from . import _kernels
from .errors import (
    DomainError,
    GenerationError,
    InvalidConfigError,
    PerturbationError,
)
from .rng import derive_seed

MORPHOLOGIES = ("random-convex", "concave-perturbed", "regular-hex", "regular-square")

# geometric tolerances, relative to H
MERGE_TOL = 1e-7     # duplicate-vertex merging after clipping
PAIR_TOL = 1e-6      # boundary partner matching before snapping
CROSS_TOL = 1e-9     # collinearity threshold in signed-turn tests


@dataclass(frozen=True)
class RveConfig:
    """Generation parameters for one RVE realization."""

    H: float
    phi_cell: Optional[float] = None
    n_cells: Optional[int] = None
    mu_target: Optional[float] = None
    t_fixed: Optional[float] = None
    min_sep_factor: float = 0.3
    morphology: str = "random-convex"
    concavity_count: int = 1
    rng_seed: int = 0

    def validate(self):
        if self.H <= 0:
            raise InvalidConfigError(f"H must be positive, got {self.H}")
        if (self.mu_target is None) == (self.t_fixed is None):
            raise InvalidConfigError("exactly one of mu_target, t_fixed must be set")
        if self.mu_target is not None and not (0.0 < self.mu_target < 1.0):
            raise InvalidConfigError(f"mu_target must lie in (0, 1), got {self.mu_target}")
        if self.t_fixed is not None and self.t_fixed <= 0:
            raise InvalidConfigError(f"t_fixed must be positive, got {self.t_fixed}")
        if (self.phi_cell is None) == (self.n_cells is None):
            raise InvalidConfigError("exactly one of phi_cell, n_cells must be set")
        if self.n_cells is not None and self.n_cells < 1:
            raise InvalidConfigError(f"n_cells must be >= 1, got {self.n_cells}")
        if self.phi_cell is not None and not (0.0 < self.phi_cell <= self.H):
            raise InvalidConfigError(f"phi_cell must lie in (0, H], got {self.phi_cell}")
        if not (0.0 <= self.min_sep_factor <= 0.9):
            raise InvalidConfigError(
                f"min_sep_factor must lie in [0, 0.9], got {self.min_sep_factor}"
            )
        if self.morphology not in MORPHOLOGIES:
            raise InvalidConfigError(f"unknown morphology {self.morphology!r}")
        if self.concavity_count < 0:
            raise InvalidConfigError("concavity_count must be >= 0")


@dataclass
class RveGeometry:
    """Wall network of one RVE window with periodic boundary pairing.

    vertices are in [0, H]^2 with boundary coordinates snapped exactly onto
    the window edges; boundary_pairs holds (left, right) vertex indices
    related by translation (+H, 0) exactly. density_mode records whether the
    geometry realizes a density target ("mu") or carries a fixed thickness
    ("t"); concavity perturbations recompute the dependent quantity.
    """

    H: float
    vertices: np.ndarray          # (nv, 2) float64
    walls: np.ndarray             # (nw, 2) int64
    boundary_pairs: np.ndarray    # (np, 2) int64, (left, right)
    bottom_vertices: np.ndarray   # int64
    top_vertices: np.ndarray      # int64
    n_cells: int
    L_cell: float
    t_cell: float
    mu_realized: float
    density_mode: str = "mu"      # "mu" or "t"
    _bt_pairs: Optional[np.ndarray] = field(default=None, repr=False)

    # -- derived topology ---------------------------------------------------

    def wall_lengths(self) -> np.ndarray:
        d = self.vertices[self.walls[:, 1]] - self.vertices[self.walls[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def bt_pairs(self) -> np.ndarray:
        """(bottom, top) vertex pairs related by translation (0, +H)."""
        if self._bt_pairs is None:
            self._bt_pairs = _match_pairs(
                self.vertices, self.bottom_vertices, self.top_vertices, axis=1, H=self.H
            )
        return self._bt_pairs

    def vertex_classes(self) -> np.ndarray:
        """Torus vertex identification (periodic pair merging), as root ids."""
        parent = np.arange(len(self.vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for l, r in self.boundary_pairs:
            union(l, r)
        for b, t in self.bt_pairs():
            union(b, t)
        return np.array([find(i) for i in range(len(self.vertices))])

    def euler_face_count(self) -> int:
        """Face count of the torus wall map via V - E + F = 0."""
        classes = self.vertex_classes()
        nv = len(np.unique(classes))
        return len(self.walls) - nv

    def faces(self) -> list:
        """All torus faces as unwrapped CCW polygons (see _torus_faces)."""
        return _torus_faces(self)

    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.vertices), dtype=bool)
        for arr in (
            self.boundary_pairs[:, 0],
            self.boundary_pairs[:, 1],
            self.bottom_vertices,
            self.top_vertices,
        ):
            mask[np.asarray(arr, dtype=int)] = True
        return mask

    # -- serialization -------------------------------------------------------

    def dumps(self) -> str:
        lines = [
            "foamlab-rve-v1 H=%.17g t_cell=%.17g mu_realized=%.17g n_cells=%d mode=%s"
            % (self.H, self.t_cell, self.mu_realized, self.n_cells, self.density_mode)
        ]
        for x, y in self.vertices:
            lines.append("v %.17g %.17g" % (x, y))
        for i, j in self.walls:
            lines.append("w %d %d" % (i, j))
        for i, j in self.boundary_pairs:
            lines.append("p %d %d" % (i, j))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.dumps())


def loads_geometry(text: str) -> RveGeometry:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "foamlab-rve-v1":
        raise InvalidConfigError(f"unsupported geometry format: {head[0]!r}")
    kv = dict(tok.split("=", 1) for tok in head[1:])
    H = float(kv["H"])
    verts, walls, pairs = [], [], []
    for ln in lines[1:]:
        tok = ln.split()
        if tok[0] == "v":
            verts.append((float(tok[1]), float(tok[2])))
        elif tok[0] == "w":
            walls.append((int(tok[1]), int(tok[2])))
        elif tok[0] == "p":
            pairs.append((int(tok[1]), int(tok[2])))
        else:
            raise InvalidConfigError(f"unknown geometry record {tok[0]!r}")
    V = np.array(verts, dtype=float).reshape(-1, 2)
    tol = MERGE_TOL * H
    bottom = np.flatnonzero(np.abs(V[:, 1]) <= tol) if len(V) else np.array([], dtype=int)
    top = np.flatnonzero(np.abs(V[:, 1] - H) <= tol) if len(V) else np.array([], dtype=int)
    return RveGeometry(
        H=H,
        vertices=V,
        walls=np.array(walls, dtype=np.int64).reshape(-1, 2),
        boundary_pairs=np.array(pairs, dtype=np.int64).reshape(-1, 2),
        bottom_vertices=bottom.astype(np.int64),
        top_vertices=top.astype(np.int64),
        n_cells=int(kv["n_cells"]),
        L_cell=_total_length(V, np.array(walls, dtype=np.int64).reshape(-1, 2)),
        t_cell=float(kv["t_cell"]),
        mu_realized=float(kv["mu_realized"]),
        density_mode=kv.get("mode", "t"),
    )


def load_geometry(path) -> RveGeometry:
    with open(path) as f:
        return loads_geometry(f.read())


# ---------------------------------------------------------------------------
# scalar relations
# ---------------------------------------------------------------------------

def estimate_cell_count(H: float, phi_cell: float) -> int:
    """Cell count matching a target mean cell size: (H/phi)^2, half-up."""
    if H <= 0 or phi_cell <= 0:
        raise InvalidConfigError("H and phi_cell must be positive")
    if phi_cell > H:
        raise InvalidConfigError("phi_cell cannot exceed H")
    return max(1, int(math.floor((H / phi_cell) ** 2 + 0.5)))


def wall_thickness(mu: float, H: float, L_cell: float) -> float:
    """Uniform wall thickness realizing relative density mu: H^2*mu/L_cell."""
    if not (0.0 <= mu < 1.0):
        raise DomainError(f"mu must lie in [0, 1), got {mu}")
    if H <= 0:
        raise DomainError(f"H must be positive, got {H}")
    if L_cell <= 0:
        raise DomainError(f"L_cell must be positive, got {L_cell}")
    return H * H * mu / L_cell


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def generate_rve(config: RveConfig) -> RveGeometry:
    """Generate one RVE; a pure function of the config (incl. rng_seed)."""
    config.validate()
    n = config.n_cells if config.n_cells is not None else estimate_cell_count(
        config.H, config.phi_cell
    )
    if config.morphology == "regular-square":
        side = max(1, int(math.floor(math.sqrt(n) + 0.5)))
        return regular_lattice("square", config.H, side, mu=config.mu_target, t=config.t_fixed)
    if config.morphology == "regular-hex":
        side = max(1, int(math.floor(math.sqrt(n / 1.1547) + 0.5)))
        return regular_lattice("hex", config.H, side, mu=config.mu_target, t=config.t_fixed)

    rng = np.random.default_rng(config.rng_seed)
    seeds = _sample_seeds(config.H, n, config.min_sep_factor, rng)
    segs = _periodic_voronoi_segments(seeds, config.H)
    geom = _geometry_from_segments(
        segs, config.H, mu_target=config.mu_target, t_fixed=config.t_fixed
    )
    if geom.n_cells != n:
        raise GenerationError(
            f"periodic Voronoi produced {geom.n_cells} cells for {n} seeds"
        )
    if config.morphology == "concave-perturbed":
        geom = apply_concavity(
            geom, derive_seed(config.rng_seed, "concavity"), config.concavity_count
        )
    return geom


def _sample_seeds(H, n, min_sep_factor, rng):
    """Uniform seeds with a periodic hard-core distance, by rejection."""
    min_d = min_sep_factor * H / math.sqrt(n)
    dmin2 = min_d * min_d
    pts = np.empty((n, 2))
    count = 0
    budget = 10000 * n
    for _ in range(budget):
        x, y = rng.uniform(0.0, H, 2)
        if min_sep_factor == 0.0 or not _kernels.periodic_too_close(pts, count, x, y, H, dmin2):
            pts[count, 0] = x
            pts[count, 1] = y
            count += 1
            if count == n:
                return pts
    raise GenerationError(
        f"seed rejection sampling failed: placed {count}/{n} seeds "
        f"with min separation {min_d:.4g}"
    )


def _periodic_voronoi_segments(seeds, H):
    """Finite Voronoi ridges of the replicated seed set, clipped to [0,H]^2."""
    rep = 1 if len(seeds) >= 10 else 2
    shifts = [(dx, dy) for dy in range(-rep, rep + 1) for dx in range(-rep, rep + 1)]
    all_pts = np.vstack([seeds + np.array(s, dtype=float) * H for s in shifts])
    vor = Voronoi(all_pts)
    segs = []
    for (v1, v2) in vor.ridge_vertices:
        if v1 == -1 or v2 == -1:
            continue
        a = vor.vertices[v1]
        b = vor.vertices[v2]
        piece = _clip_segment(a, b, H)
        if piece is not None:
            segs.append(piece)
    return segs


def _clip_segment(a, b, H):
    """Liang-Barsky clip of segment a-b to [0,H]^2; None if outside."""
    d = b - a
    t0, t1 = 0.0, 1.0
    for dim in range(2):
        for sign, bound in ((-1.0, 0.0), (1.0, H)):
            denom = sign * d[dim]
            num = sign * (bound - a[dim])
            if abs(denom) < 1e-14:
                if sign * a[dim] > sign * bound:
                    return None
            else:
                t = num / denom
                if denom > 0:
                    t1 = min(t1, t)
                else:
                    t0 = max(t0, t)
    if t0 >= t1:
        return None
    pa = a + t0 * d
    pb = a + t1 * d
    if math.hypot(pb[0] - pa[0], pb[1] - pa[1]) <= 1e-9 * H:
        return None
    return pa, pb


def _geometry_from_segments(segs, H, mu_target=None, t_fixed=None):
    """Merge clipped segments into a paired, snapped RVE wall network."""
    tol = MERGE_TOL * H
    verts = []
    grid = {}

    def vid(p):
        kx, ky = int(math.floor(p[0] / tol)), int(math.floor(p[1] / tol))
        for gx in (kx - 1, kx, kx + 1):
            for gy in (ky - 1, ky, ky + 1):
                for i in grid.get((gx, gy), ()):
                    q = verts[i]
                    if abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol:
                        return i
        verts.append([p[0], p[1]])
        i = len(verts) - 1
        grid.setdefault((kx, ky), []).append(i)
        return i

    wall_set = {}
    for pa, pb in segs:
        i, j = vid(pa), vid(pb)
        if i == j:
            continue
        key = (min(i, j), max(i, j))
        wall_set[key] = None
    V = np.array(verts, dtype=float)
    walls = np.array(sorted(wall_set), dtype=np.int64).reshape(-1, 2)
    if len(walls) == 0:
        raise GenerationError("tessellation produced no walls inside the window")

    # snap boundary coordinates exactly onto the window edges
    on_l = np.abs(V[:, 0]) <= tol
    on_r = np.abs(V[:, 0] - H) <= tol
    on_b = np.abs(V[:, 1]) <= tol
    on_t = np.abs(V[:, 1] - H) <= tol
    if np.any((on_l | on_r) & (on_b | on_t)):
        raise GenerationError("degenerate vertex on a window corner")
    V[on_l, 0] = 0.0
    V[on_r, 0] = H
    V[on_b, 1] = 0.0
    V[on_t, 1] = H

    left = np.flatnonzero(on_l)
    right = np.flatnonzero(on_r)
    pairs = _match_pairs(V, left, right, axis=0, H=H)
    # snap partners to exact translates of their masters
    V[pairs[:, 1], 1] = V[pairs[:, 0], 1]
    bottom = np.flatnonzero(on_b)
    top = np.flatnonzero(on_t)
    bt = _match_pairs(V, bottom, top, axis=1, H=H)
    V[bt[:, 1], 0] = V[bt[:, 0], 0]

    L_cell = _total_length(V, walls)
    if mu_target is not None:
        t = wall_thickness(mu_target, H, L_cell)
        mode = "mu"
    else:
        t = t_fixed
        mode = "t"
    mu = t * L_cell / (H * H)

    geom = RveGeometry(
        H=H,
        vertices=V,
        walls=walls,
        boundary_pairs=pairs,
        bottom_vertices=bottom.astype(np.int64),
        top_vertices=top.astype(np.int64),
        n_cells=0,
        L_cell=L_cell,
        t_cell=t,
        mu_realized=mu,
        density_mode=mode,
        _bt_pairs=bt,
    )
    _check_connected(geom)
    geom.n_cells = geom.euler_face_count()
    return geom


def _match_pairs(V, side_a, side_b, axis, H):
    """Match boundary vertices across the window by translation along axis."""
    other = 1 - axis
    if len(side_a) != len(side_b):
        raise GenerationError(
            f"unbalanced boundary vertices: {len(side_a)} vs {len(side_b)}"
        )
    pairs = []
    used = set()
    for a in side_a:
        best, best_d = -1, np.inf
        for b in side_b:
            if b in used:
                continue
            d = abs(V[a, other] - V[b, other])
            if d < best_d:
                best, best_d = b, d
        if best < 0 or best_d > PAIR_TOL * H:
            raise GenerationError(
                f"no periodic partner for boundary vertex {a} (gap {best_d:.3g})"
            )
        used.add(best)
        pairs.append((a, best))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _total_length(V, walls):
    if len(walls) == 0:
        return 0.0
    d = V[walls[:, 1]] - V[walls[:, 0]]
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def _check_connected(geom):
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    classes = geom.vertex_classes()
    _, compact = np.unique(classes, return_inverse=True)
    n = compact.max() + 1
    i = compact[geom.walls[:, 0]]
    j = compact[geom.walls[:, 1]]
    adj = coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise GenerationError(f"wall graph has {ncomp} connected components")


# ---------------------------------------------------------------------------
# regular lattices
# ---------------------------------------------------------------------------

def regular_lattice(kind: str, H: float, n: int, mu: float = None, t: float = None) -> RveGeometry:
    """Periodic regular square-grid or honeycomb wall network.

    n is the cell count per side. For the honeycomb the row count is rounded
    to the nearest even integer near n*2/sqrt(3); exactly regular hexagons
    cannot tile a square period, so cells are slightly anisometric but stay
    convex.
    """
    if n < 1:
        raise InvalidConfigError(f"n must be >= 1, got {n}")
    if H <= 0:
        raise InvalidConfigError(f"H must be positive, got {H}")
    if (mu is None) == (t is None):
        raise InvalidConfigError("exactly one of mu, t must be set")
    if kind == "square":
        return _square_lattice(H, n, mu, t)
    if kind == "hex":
        return _hex_lattice(H, n, mu, t)
    raise InvalidConfigError(f"unknown lattice kind {kind!r}")


def _square_lattice(H, n, mu, t):
    # grid lines at (i + 1/2) H/n in both directions; offset dodges the window edges
    xs = [(i + 0.5) * H / n for i in range(n)]
    segs = []
    cuts = [0.0] + xs + [H]
    for x in xs:
        for k in range(len(cuts) - 1):
            segs.append((np.array([x, cuts[k]]), np.array([x, cuts[k + 1]])))
    for y in xs:
        for k in range(len(cuts) - 1):
            segs.append((np.array([cuts[k], y]), np.array([cuts[k + 1], y])))
    return _geometry_from_segments(segs, H, mu_target=mu, t_fixed=t)


def _hex_lattice(H, n, mu, t):
    nx = n
    ny = max(2, 2 * int(math.floor(n * 2.0 / math.sqrt(3.0) / 2.0 + 0.5)))
    ax = H / nx
    ay = H / ny
    # generic fractional offsets keep tessellation vertices off the window
    # corners; a global shift of a periodic pattern stays periodic
    pts = []
    for j in range(ny):
        for i in range(nx):
            x = (i + 0.31 + 0.5 * (j % 2)) * ax
            y = (j + 0.43) * ay
            pts.append((x % H, y % H))
    segs = _periodic_voronoi_segments(np.array(pts), H)
    return _geometry_from_segments(segs, H, mu_target=mu, t_fixed=t)


# ---------------------------------------------------------------------------
# torus face extraction
# ---------------------------------------------------------------------------

def _torus_faces(geom):
    """Extract all faces of the periodic wall map.

    Returns a list of dicts with keys:
      poly     -- (k, 2) unwrapped CCW polygon (one period, no torus winding)
      verts    -- in-window vertex index per polygon point
      walls    -- wall index per polygon edge
    Faces are traced by the half-edge angular walk on the vertex classes.
    """
    V = geom.vertices
    walls = geom.walls
    classes = geom.vertex_classes()

    # directed edges 2k (i->j) and 2k+1 (j->i)
    nw = len(walls)
    out_edges = {}
    for k in range(nw):
        i, j = walls[k]
        d = V[j] - V[i]
        ang_ij = math.atan2(d[1], d[0])
        ang_ji = math.atan2(-d[1], -d[0])
        out_edges.setdefault(classes[i], []).append((ang_ij, 2 * k))
        out_edges.setdefault(classes[j], []).append((ang_ji, 2 * k + 1))
    order = {}
    for c, lst in out_edges.items():
        lst.sort()
        for pos, (_, de) in enumerate(lst):
            order[de] = (c, pos)

    def next_edge(de):
        rev = de ^ 1
        c, pos = order[rev]
        lst = out_edges[c]
        return lst[(pos - 1) % len(lst)][1]

    seen = np.zeros(2 * nw, dtype=bool)
    faces = []
    for start in range(2 * nw):
        if seen[start]:
            continue
        cycle = []
        de = start
        while not seen[de]:
            seen[de] = True
            cycle.append(de)
            de = next_edge(de)
        # unwrap polygon coordinates by accumulating segment vectors
        k0 = cycle[0] >> 1
        tail0 = walls[k0][cycle[0] & 1]
        p = np.array(V[tail0])
        poly = [p.copy()]
        vids = [int(tail0)]
        wids = []
        for de2 in cycle:
            k = de2 >> 1
            i, j = walls[k]
            if de2 & 1:
                i, j = j, i
            p = p + (V[j] - V[i])
            poly.append(p.copy())
            vids.append(int(j))
            wids.append(int(k))
        poly = np.array(poly)
        if np.linalg.norm(poly[-1] - poly[0]) > PAIR_TOL * geom.H:
            raise GenerationError("face walk failed to close (torus winding)")
        faces.append({"poly": poly[:-1], "verts": vids[:-1], "walls": wids})

    # orient polygons CCW
    for f in faces:
        if _signed_area(f["poly"]) < 0:
            f["poly"] = f["poly"][::-1].copy()
            f["verts"] = f["verts"][::-1]
            f["walls"] = f["walls"][::-1]
    return faces


def _signed_area(poly):
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_is_convex(poly, scale=None) -> bool:
    """Signed-turn convexity test; collinear points are tolerated."""
    n = len(poly)
    if n < 4:
        return True
    e = np.roll(poly, -1, axis=0) - poly
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    if scale is None:
        scale = float(np.max(np.hypot(e[:, 0], e[:, 1]))) or 1.0
    thresh = CROSS_TOL * scale * scale
    has_pos = np.any(cross > thresh)
    has_neg = np.any(cross < -thresh)
    return not (has_pos and has_neg)


def count_concave_faces(geom) -> int:
    return sum(0 if polygon_is_convex(f["poly"]) else 1 for f in geom.faces())


# ---------------------------------------------------------------------------
# concavity perturbations
# ---------------------------------------------------------------------------

def apply_concavity(geom: RveGeometry, rng_seed: int, count: int) -> RveGeometry:
    """Perturb the network so at least one cell per perturbation turns concave.

    Each perturbation either removes one interior wall (merging two cells)
    or displaces one interior vertex inward past the chord of its face
    neighbours. Candidates that would disconnect the graph, cross other
    walls, or fail to produce a concave cell are retried; running out of
    candidates raises PerturbationError.
    """
    if count < 0:
        raise InvalidConfigError("count must be >= 0")
    if count == 0:
        return geom
    boundary = geom.boundary_vertex_mask()
    interior_walls = [
        k for k in range(len(geom.walls))
        if not boundary[geom.walls[k, 0]] and not boundary[geom.walls[k, 1]]
    ]
    if len(interior_walls) < count:
        raise PerturbationError(
            f"need {count} interior walls, geometry has {len(interior_walls)}"
        )
    rng = np.random.default_rng(rng_seed)
    g = replace(
        geom,
        vertices=geom.vertices.copy(),
        walls=geom.walls.copy(),
        _bt_pairs=None,
    )
    for _ in range(count):
        g = _perturb_once(g, rng)
    L = _total_length(g.vertices, g.walls)
    if g.density_mode == "mu":
        t = wall_thickness(g.mu_realized, g.H, L)
    else:
        t = g.t_cell
    g.L_cell = L
    g.t_cell = t
    g.mu_realized = t * L / (g.H * g.H)
    g.n_cells = g.euler_face_count()
    return g


def _perturb_once(g, rng):
    boundary = g.boundary_vertex_mask()
    modes = ["remove", "displace"] if rng.random() < 0.5 else ["displace", "remove"]
    for mode in modes:
        if mode == "remove":
            cand = [
                k for k in range(len(g.walls))
                if not boundary[g.walls[k, 0]] and not boundary[g.walls[k, 1]]
            ]
            rng.shuffle(cand)
            for k in cand:
                trial = replace(g, walls=np.delete(g.walls, k, axis=0), _bt_pairs=None)
                if _perturbation_ok(trial, expect_faces=g.euler_face_count() - 1):
                    return trial
        else:
            deg = np.zeros(len(g.vertices), dtype=int)
            for i, j in g.walls:
                deg[i] += 1
                deg[j] += 1
            cand = [v for v in range(len(g.vertices)) if not boundary[v] and deg[v] >= 3]
            rng.shuffle(cand)
            faces = g.faces()
            for v in cand:
                trial = _displace_vertex(g, faces, v, rng)
                if trial is not None and _perturbation_ok(
                    trial, expect_faces=g.euler_face_count()
                ):
                    return trial
    raise PerturbationError("no admissible concavity candidate remains")


def _displace_vertex(g, faces, v, rng):
    incident = [f for f in faces if v in f["verts"]]
    if not incident:
        return None
    f = incident[rng.integers(len(incident))]
    k = f["verts"].index(v)
    poly = f["poly"]
    n = len(poly)
    pv = poly[k]
    pa = poly[(k - 1) % n]
    pb = poly[(k + 1) % n]
    chord = pb - pa
    L2 = float(chord @ chord)
    if L2 <= 0:
        return None
    proj = pa + chord * float((pv - pa) @ chord) / L2
    new_unwrapped = proj + (proj - pv) * 0.25
    offset = pv - g.vertices[v]
    newpos = new_unwrapped - offset
    if not (0 < newpos[0] < g.H and 0 < newpos[1] < g.H):
        return None
    V2 = g.vertices.copy()
    V2[v] = newpos
    if _walls_cross(V2, g.walls, v, g.H):
        return None
    return replace(g, vertices=V2, _bt_pairs=None)


def _walls_cross(V, walls, moved, H):
    """Do walls incident to the moved vertex now cross any other wall?"""
    inc = [k for k in range(len(walls)) if moved in walls[k]]
    for k in inc:
        a1, a2 = V[walls[k, 0]], V[walls[k, 1]]
        for m in range(len(walls)):
            if m == k:
                continue
            if walls[m, 0] in walls[k] or walls[m, 1] in walls[k]:
                continue
            b1, b2 = V[walls[m, 0]], V[walls[m, 1]]
            if _segments_intersect(a1, a2, b1, b2, 1e-12 * H):
                return True
    return False


def _segments_intersect(p1, p2, q1, q2, eps):
    d1 = p2 - p1
    d2 = q2 - q1
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < eps * eps:
        return False
    r = q1 - p1
    t = (r[0] * d2[1] - r[1] * d2[0]) / denom
    u = (r[0] * d1[1] - r[1] * d1[0]) / denom
    return eps < t < 1 - eps and eps < u < 1 - eps


def _perturbation_ok(trial, expect_faces):
    try:
        _check_connected(trial)
        faces = trial.faces()
    except GenerationError:
        return False
    if len(faces) != expect_faces or trial.euler_face_count() != expect_faces:
        return False
    if any(abs(_signed_area(f["poly"])) <= 0.0 for f in faces):
        return False
    return any(not polygon_is_convex(f["poly"]) for f in faces)


# ---------------------------------------------------------------------------
# rasterization
# ---------------------------------------------------------------------------

def rasterize(geom: RveGeometry, px: int) -> np.ndarray:
    """8-bit grayscale image of the wall network.

    White background, black walls with a 2-device-pixel stroke regardless of
    t_cell (morphology is the only image signal). Row 0 is the top of the
    RVE. Deterministic bytes for identical geometry.
    """
    if px < 64:
        raise InvalidConfigError(f"px must be >= 64, got {px}")
    img = np.full((px, px), 255, dtype=np.uint8)
    if len(geom.walls) == 0:
        return img
    scale = px / geom.H
    a = geom.vertices[geom.walls[:, 0]]
    b = geom.vertices[geom.walls[:, 1]]
    segs = np.column_stack([
        a[:, 0] * scale,
        (geom.H - a[:, 1]) * scale,
        b[:, 0] * scale,
        (geom.H - b[:, 1]) * scale,
    ])
    _kernels.paint_segments(img, segs, 1.0)
    return img


def save_png(img: np.ndarray, path):
    from PIL import Image

    Image.fromarray(img, mode="L").save(path, format="PNG")


def png_bytes(img: np.ndarray) -> bytes:
    import io

    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(img, mode="L").save(buf, format="PNG")
    return buf.getvalue()
