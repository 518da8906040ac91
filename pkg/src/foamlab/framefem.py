"""2D Timoshenko-frame FE compression of RVE wall networks.

Walls become shear-deformable frame elements (3 DOFs per node: ux, uy,
rotation) with a square t x t cross-section so the force normalization
F / (0.01 * H * t) returns the modulus of a slab of out-of-plane depth t.
Periodic side constraints are eliminated master-slave, which keeps the
reduced stiffness symmetric positive definite. Units: mm, N, MPa.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import (
    EmptyModelError,
    MechanismError,
    SingularElementError,
    SolverError,
)
from .rvegen import RveGeometry

SHEAR_K = 5.0 / 6.0          # shear correction for the rectangular wall section
COMPRESSION_STRAIN = 0.01    # prescribed top displacement is 0.01 * H downward


@dataclass(frozen=True)
class WallMaterial:
    """Cell-wall matrix material (isotropic linear elastic)."""

    E0: float            # MPa
    nu0: float = 0.3
    rho0: float = 2700.0  # kg/m^3

    def __post_init__(self):
        if self.E0 <= 0:
            raise SingularElementError(f"E0 must be positive, got {self.E0}")
        if not (-1.0 < self.nu0 < 0.5):
            raise SingularElementError(f"nu0 must lie in (-1, 0.5), got {self.nu0}")

    @property
    def G0(self) -> float:
        return self.E0 / (2.0 * (1.0 + self.nu0))


@dataclass
class FrameModel:
    """Assembled frame problem: mesh, constraints, and load meta."""

    nodes: np.ndarray           # (n, 2)
    elem_nodes: np.ndarray      # (m, 2) int64
    elem_t: np.ndarray          # (m,) section depth (in-plane)
    elem_w: np.ndarray          # (m,) section out-of-plane width
    material: WallMaterial
    dirichlet: list             # (node, dof, value); dof 0=ux 1=uy 2=rot
    ties: list                  # (master node, slave node, (dofs...))
    top_nodes: np.ndarray
    bottom_nodes: np.ndarray
    H: float
    t_cell: float

    @property
    def n_dofs(self) -> int:
        return 3 * len(self.nodes)


@dataclass
class SolveResult:
    """Displacements, constraint reactions, and the top-edge resultant."""

    displacements: np.ndarray   # (n, 3)
    reactions: list             # (node, dof, force) at Dirichlet DOFs
    F_top: float                # N, positive in compression
    reaction_balance: float     # |sum of vertical reactions| / |F_top|
    n_nodes: int
    n_elements: int

    def to_record(self, modulus: Optional[float] = None) -> dict:
        rec = {
            "F_top_N": self.F_top,
            "reaction_balance": self.reaction_balance,
            "mesh": {"nodes": self.n_nodes, "elements": self.n_elements},
            "displacements": self.displacements.tolist(),
            "reactions": [
                {"node": int(n), "dof": int(d), "force": float(f)}
                for (n, d, f) in self.reactions
            ],
        }
        if modulus is not None:
            rec["modulus_mpa"] = modulus
        return rec


def element_stiffness(p_i, p_j, t: float, w: float, material: WallMaterial,
                      k_shear: float = SHEAR_K) -> np.ndarray:
    """Global 6x6 stiffness of one shear-deformable frame element."""
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    L = math.hypot(p_j[0] - p_i[0], p_j[1] - p_i[1])
    if L <= 0:
        raise SingularElementError("zero-length element")
    if t <= 0 or w <= 0:
        raise SingularElementError("element section must have positive area")
    vals = _kernels.frame_coo_values(
        np.vstack([p_i, p_j]),
        np.array([[0, 1]], dtype=np.int64),
        np.array([t], dtype=float),
        np.array([w], dtype=float),
        material.E0,
        material.G0,
        k_shear,
    )
    return vals.reshape(6, 6)


def mesh_geometry(geom: RveGeometry, material: WallMaterial,
                  target_h: Optional[float] = None,
                  fix_top_rotation: bool = False) -> FrameModel:
    """Subdivide walls into frame elements and attach the compression BCs.

    Each wall becomes max(2, ceil(length/target_h)) equal elements. Periodic
    pairs tie (ux, uy) of the right vertex to its left partner; pairs whose
    members sit on the loaded edges are skipped because the Dirichlet rows
    already force identical motion there. Bottom vertices are fully fixed,
    top vertices get uy = -0.01*H and ux = 0 with rotation free by default.
    """
    if len(geom.walls) == 0:
        raise EmptyModelError("geometry has no walls")
    if target_h is None:
        target_h = geom.H / 100.0
    if target_h <= 0:
        raise EmptyModelError(f"target_h must be positive, got {target_h}")

    V = geom.vertices
    nodes = [tuple(p) for p in V]
    conn = []
    lengths = np.hypot(
        V[geom.walls[:, 1], 0] - V[geom.walls[:, 0], 0],
        V[geom.walls[:, 1], 1] - V[geom.walls[:, 0], 1],
    )
    for (i, j), L in zip(geom.walls, lengths):
        ne = max(2, int(math.ceil(L / target_h)))
        prev = int(i)
        a, b = V[i], V[j]
        for k in range(1, ne):
            nodes.append(tuple(a + (b - a) * (k / ne)))
            cur = len(nodes) - 1
            conn.append((prev, cur))
            prev = cur
        conn.append((prev, int(j)))

    m = len(conn)
    elem_nodes = np.array(conn, dtype=np.int64)
    elem_t = np.full(m, geom.t_cell)
    elem_w = np.full(m, geom.t_cell)

    loaded = set(int(v) for v in geom.bottom_vertices) | set(int(v) for v in geom.top_vertices)
    ties = [
        (int(l), int(r), (0, 1))
        for (l, r) in geom.boundary_pairs
        if int(l) not in loaded and int(r) not in loaded
    ]
    dirichlet = []
    for v in geom.bottom_vertices:
        dirichlet += [(int(v), 0, 0.0), (int(v), 1, 0.0), (int(v), 2, 0.0)]
    for v in geom.top_vertices:
        dirichlet += [(int(v), 0, 0.0), (int(v), 1, -COMPRESSION_STRAIN * geom.H)]
        if fix_top_rotation:
            dirichlet.append((int(v), 2, 0.0))

    return FrameModel(
        nodes=np.array(nodes, dtype=float),
        elem_nodes=elem_nodes,
        elem_t=elem_t,
        elem_w=elem_w,
        material=material,
        dirichlet=dirichlet,
        ties=ties,
        top_nodes=np.asarray(geom.top_vertices, dtype=np.int64),
        bottom_nodes=np.asarray(geom.bottom_vertices, dtype=np.int64),
        H=geom.H,
        t_cell=geom.t_cell,
    )


def assemble_stiffness(model: FrameModel) -> sp.csr_matrix:
    """Sparse global stiffness; exactly symmetric by construction."""
    lens = np.hypot(
        model.nodes[model.elem_nodes[:, 1], 0] - model.nodes[model.elem_nodes[:, 0], 0],
        model.nodes[model.elem_nodes[:, 1], 1] - model.nodes[model.elem_nodes[:, 0], 1],
    )
    if np.any(lens <= 0):
        raise SingularElementError("zero-length element in mesh")
    vals = _kernels.frame_coo_values(
        model.nodes,
        model.elem_nodes,
        model.elem_t,
        model.elem_w,
        model.material.E0,
        model.material.G0,
        SHEAR_K,
    )
    dofs = np.empty((len(model.elem_nodes), 6), dtype=np.int64)
    dofs[:, 0:3] = 3 * model.elem_nodes[:, 0:1] + np.arange(3)
    dofs[:, 3:6] = 3 * model.elem_nodes[:, 1:2] + np.arange(3)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = model.n_dofs
    return sp.coo_matrix((vals.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _constraint_maps(model: FrameModel):
    n = model.n_dofs
    master = np.arange(n)
    for (mn, sn, dlist) in model.ties:
        for d in dlist:
            master[3 * sn + d] = 3 * mn + d
    dirich = {}
    for (node, dof, val) in model.dirichlet:
        dirich[3 * node + dof] = float(val)
    for d, m in enumerate(master):
        if m != d and (d in dirich or m in dirich):
            raise SolverError(f"dof {d} is both tied and Dirichlet-constrained")
    return master, dirich


def _check_mechanism(model: FrameModel):
    """Every connected piece (elements + ties) must reach a Dirichlet node."""
    from scipy.sparse.csgraph import connected_components

    n = len(model.nodes)
    i = list(model.elem_nodes[:, 0])
    j = list(model.elem_nodes[:, 1])
    for (mn, sn, _d) in model.ties:
        i.append(mn)
        j.append(sn)
    adj = sp.coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp == 1 and model.dirichlet:
        return
    anchored = np.zeros(ncomp, dtype=bool)
    for (node, _dof, _val) in model.dirichlet:
        anchored[labels[node]] = True
    for c in range(ncomp):
        if not anchored[c]:
            members = np.flatnonzero(labels == c)
            raise MechanismError(
                f"floating substructure: nodes {members[:10].tolist()} "
                f"({len(members)} total) have no constraint"
            )


def solve_linear(model: FrameModel, loads: Optional[dict] = None) -> SolveResult:
    """Solve K u = f after master-slave tie elimination and Dirichlet rows.

    loads maps (node, dof) -> force; the compression problem itself has no
    external loads, only prescribed displacements.
    """
    _check_mechanism(model)
    K = assemble_stiffness(model)
    n = model.n_dofs
    master, dirich = _constraint_maps(model)

    f_ext = np.zeros(n)
    if loads:
        for (node, dof), val in loads.items():
            f_ext[3 * node + dof] += val

    g = np.zeros(n)
    free = [d for d in range(n) if master[d] == d and d not in dirich]
    if not free:
        raise SolverError("no free DOF after constraint elimination")
    fmap = {d: k for k, d in enumerate(free)}
    crows, ccols = [], []
    for d in range(n):
        m = master[d]
        if m in dirich:
            g[d] = dirich[m]
        else:
            crows.append(d)
            ccols.append(fmap[m])
    C = sp.coo_matrix(
        (np.ones(len(crows)), (crows, ccols)), shape=(n, len(free))
    ).tocsr()

    Kr = (C.T @ K @ C).tocsc()
    rhs = C.T @ (f_ext - K @ g)
    try:
        q = spla.spsolve(Kr, rhs)
    except RuntimeError as exc:
        raise SolverError(f"reduced stiffness could not be factorized: {exc}") from exc
    if not np.all(np.isfinite(q)):
        raise SolverError("singular reduced stiffness (non-finite solution)")
    res = np.linalg.norm(Kr @ q - rhs)
    if res > 1e-8 * (np.linalg.norm(rhs) + 1.0):
        raise SolverError(f"linear solve residual too large: {res:.3e}")

    u = C @ q + g
    r = K @ u - f_ext
    reactions = [
        (node, dof, float(r[3 * node + dof])) for (node, dof, _v) in model.dirichlet
    ]
    F_top = -float(sum(r[3 * v + 1] for v in model.top_nodes))
    total_y = float(sum(rv for (_n, d, rv) in reactions if d == 1))
    balance = abs(total_y) / max(abs(F_top), 1e-300)
    return SolveResult(
        displacements=u.reshape(-1, 3),
        reactions=reactions,
        F_top=F_top,
        reaction_balance=balance,
        n_nodes=len(model.nodes),
        n_elements=len(model.elem_nodes),
    )


def solve_compression(model: FrameModel) -> SolveResult:
    return solve_linear(model, loads=None)


def homogenized_modulus(geom: RveGeometry, material: WallMaterial,
                        target_h: Optional[float] = None,
                        fix_top_rotation: bool = False) -> float:
    """Effective compressive modulus E = F_top / (0.01 * H * t_cell), MPa."""
    model = mesh_geometry(geom, material, target_h=target_h,
                          fix_top_rotation=fix_top_rotation)
    result = solve_compression(model)
    return result.F_top / (COMPRESSION_STRAIN * geom.H * geom.t_cell)
