"""Identified degrees of freedom and assembly of the wave operators.

The periodic constraint u(X) = u(X') for identified boundary points is
built into the basis: all mesh nodes of one equivalence class share a
single degree of freedom, and element contributions accumulate over class
members.  Three sparse symmetric matrices are assembled with the weight
w(X) = (1 - |X|^2)^(-1/2):

    mass       m_ij = int w e_i e_j
    stiffness  k_ij = int w  grad e_i . grad e_j
    radial     d_ij = -int w (X . grad e_i)(X . grad e_j)

The stored object is the lower triangle in compressed sparse rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import ClassSizeError, NoConvergence, WeightSingularity
from .meshing import TetMesh
from .quadrature import QuadratureRule, quadrature_rule


class SparseSymMatrix:
    """Symmetric matrix stored as its lower triangle in CSR form."""

    def __init__(self, lower: sp.csr_matrix):
        n, m = lower.shape
        assert n == m
        self.n = n
        self.lower = lower
        strict = sp.tril(lower, k=-1)
        self._full = (lower + strict.T).tocsr()

    @classmethod
    def from_triplets(cls, n: int, rows, cols, vals) -> "SparseSymMatrix":
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        vals = np.asarray(vals, dtype=float)
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        # canonical accumulation order: element order then does not influence
        # round-off, so assembly is bit-identical under tet permutations
        order = np.lexsort((vals, cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        keys = rows.astype(np.int64) * n + cols
        uniq, inverse = np.unique(keys, return_inverse=True)
        acc = np.zeros(len(uniq))
        np.add.at(acc, inverse, vals)
        lower = sp.csr_matrix((acc, (uniq // n, uniq % n)), shape=(n, n))
        lower.sort_indices()
        return cls(lower)

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return self._full @ x

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._full @ x

    def diagonal(self) -> np.ndarray:
        return self.lower.diagonal()

    def to_dense(self) -> np.ndarray:
        return self._full.toarray()

    def quad_form(self, x: np.ndarray) -> float:
        return float(x @ (self._full @ x))

    def max_abs(self) -> float:
        return float(np.abs(self.lower.data).max()) if self.lower.nnz else 0.0

    @property
    def nnz_lower(self) -> int:
        return self.lower.nnz

    def scaled_sum(self, other: "SparseSymMatrix", alpha: float = 1.0) -> "SparseSymMatrix":
        return SparseSymMatrix((self.lower + alpha * other.lower).tocsr())

    def total_sum(self) -> float:
        strict = sp.tril(self.lower, k=-1)
        return float(self.lower.sum() + strict.sum())

    def save_matrix_market(self, path) -> None:
        scipy.io.mmwrite(path, self._full.tocoo(), symmetry="symmetric")


class Operators(NamedTuple):
    mass: SparseSymMatrix
    stiffness: SparseSymMatrix
    radial: SparseSymMatrix

    @property
    def wave(self) -> SparseSymMatrix:
        """stiffness + radial, the spatial operator of the scheme."""
        return self.stiffness.scaled_sum(self.radial)


@dataclass
class DofMap:
    """Mesh vertices to identified degrees of freedom."""

    node_to_dof: np.ndarray              # (n_vertices,)
    dof_to_node: np.ndarray              # (n_dofs,) canonical representative
    n_interior: int
    n_edge_nodes: int                    # boundary nodes in classes of three
    n_face_nodes: int                    # boundary nodes in classes of two
    n_corner_classes: int                # classes of four
    classes: list = field(repr=False)    # boundary classes as node tuples

    @property
    def n_dofs(self) -> int:
        return len(self.dof_to_node)

    @property
    def per_edge_count(self) -> float:
        """Identified nodes per dodecahedron edge (30 edges)."""
        return self.n_edge_nodes / 30.0

    @property
    def per_face_count(self) -> float:
        """Identified nodes per face interior (12 faces)."""
        return self.n_face_nodes / 12.0

    def formula_count(self) -> float:
        """10 (per-edge) + 6 (per-face) + interior + 5 corner unknowns."""
        return (10.0 * self.per_edge_count + 6.0 * self.per_face_count
                + self.n_interior + 5.0)


def build_dof_map(mesh: TetMesh) -> DofMap:
    """Group boundary nodes by the transitive closure of their partners."""
    n = len(mesh.vertices)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    for v, d in mesh.partners.items():
        for p in d.values():
            ri, rj = find(v), find(p)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list] = {}
    for v in mesh.node_faces:
        groups.setdefault(find(v), []).append(v)

    n_edge = n_face = n_corner = 0
    classes = []
    for root, members in sorted(groups.items()):
        size = len(members)
        if size == 2:
            n_face += size
        elif size == 3:
            n_edge += size
        elif size == 4:
            n_corner += 1
        else:
            raise ClassSizeError(
                f"boundary class {sorted(members)} has size {size}, expected 2, 3 or 4")
        classes.append(tuple(sorted(members)))

    boundary = set(mesh.node_faces)
    n_interior = n - len(boundary)
    reps = sorted({find(v) for v in range(n)})
    rep_index = {r: k for k, r in enumerate(reps)}
    node_to_dof = np.array([rep_index[find(v)] for v in range(n)], dtype=np.int64)
    dof_to_node = np.array(reps, dtype=np.int64)

    dof_map = DofMap(node_to_dof=node_to_dof, dof_to_node=dof_to_node,
                     n_interior=n_interior, n_edge_nodes=n_edge,
                     n_face_nodes=n_face, n_corner_classes=n_corner,
                     classes=classes)
    if dof_map.n_dofs != round(dof_map.formula_count()):
        raise ClassSizeError(
            f"dof count {dof_map.n_dofs} violates the identified-node formula "
            f"{dof_map.formula_count()}")
    return dof_map


def assemble(mesh: TetMesh, dof_map: DofMap,
             rule: QuadratureRule | None = None) -> Operators:
    """Assemble mass, stiffness and radial matrices on identified dofs."""
    if rule is None:
        rule = quadrature_rule(4)
    verts = mesh.vertices[mesh.tets]            # (T, 4, 3)
    edges = verts[:, 1:] - verts[:, :1]         # (T, 3, 3)
    det = np.linalg.det(edges)                  # 6 * volume, positive
    inv = np.linalg.inv(edges)                  # rows of inv are grad lam_1..3
    grads = np.empty_like(verts)
    grads[:, 1:, :] = np.transpose(inv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)

    pts = np.einsum("mi,til->tml", rule.points, verts)      # (T, m, 3)
    r2 = np.einsum("tml,tml->tm", pts, pts)
    if r2.max() >= 1.0:
        raise WeightSingularity("quadrature point outside the unit ball")
    w = 1.0 / np.sqrt(1.0 - r2)                              # (T, m)

    wq = w * rule.weights                                    # (T, m)
    bb = np.einsum("mi,mj->mij", rule.points, rule.points)   # (m, 4, 4)
    m_loc = np.einsum("tm,mij->tij", wq, bb) * det[:, None, None]

    gg = np.einsum("til,tjl->tij", grads, grads)
    k_loc = (wq.sum(axis=1) * det)[:, None, None] * gg

    s = np.einsum("tml,til->tmi", pts, grads)                # (T, m, 4)
    d_loc = -np.einsum("tm,tmi,tmj->tij", wq, s, s) * det[:, None, None]

    dof = dof_map.node_to_dof[mesh.tets]                     # (T, 4)
    rows = np.repeat(dof, 4, axis=1).ravel()
    cols = np.tile(dof, (1, 4)).ravel()
    n = dof_map.n_dofs
    return Operators(
        mass=SparseSymMatrix.from_triplets(n, rows, cols, m_loc.ravel()),
        stiffness=SparseSymMatrix.from_triplets(n, rows, cols, k_loc.ravel()),
        radial=SparseSymMatrix.from_triplets(n, rows, cols, d_loc.ravel()),
    )


def estimate_spectral_bound(mass: SparseSymMatrix, wave: SparseSymMatrix,
                            tol: float = 1e-4, max_iter: int = 10000,
                            seed: int = 0) -> tuple[float, float]:
    """Largest generalized eigenvalue of (wave, mass) by power iteration.

    Returns (lambda_max, dt_max) with dt_max = 2 / sqrt(lambda_max), the
    stability limit of the explicit scheme.
    """
    from .evolve import make_preconditioner, pcg_solve

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(mass.n)
    x /= np.linalg.norm(x)
    precond = make_preconditioner(mass, kind="ic0")
    lam = 0.0
    y = None
    for _ in range(max_iter):
        ax = wave @ x
        y = pcg_solve(mass, ax, precond, tol=1e-10, x0=y)
        lam_new = float(x @ ax) / float(x @ (mass @ x))
        x = y / np.linalg.norm(y)
        if lam_new > 0 and abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    else:
        raise NoConvergence(f"power iteration did not settle in {max_iter} iterations")
    return lam, 2.0 / np.sqrt(lam)
