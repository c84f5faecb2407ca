"""Conservative leapfrog evolution with preconditioned CG mass solves.

The two-level recurrence

    mass (U^{n+1} - 2 U^n + U^{n-1}) + dt^2 wave U^n = 0

conserves the discrete energy

    E(n dt) = < mass (U^n - U^{n-1})/dt, (U^n - U^{n-1})/dt >
              + < wave U^{n-1}, U^n >

exactly in exact arithmetic; the only drift comes from the inexact mass
solves, so the solver tolerance is kept tight and solves are warm-started
from a linear predictor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import cKDTree

from .assembly import DofMap, SparseSymMatrix
from .domain import VERTEX_X0, FundamentalDomain, lift_many
from .errors import BreakdownPivot, EnergyBlowup, NoConvergence, NotInDomain
from .meshing import TetMesh

# spherical diameter of the domain; probe windows should start after one crossing
DOMAIN_DIAMETER = 2.0 * math.acos(VERTEX_X0)


# -- initial data --------------------------------------------------------------

def bump_profile(domain: FundamentalDomain, points: np.ndarray,
                 center, radius: float, amplitude: float) -> np.ndarray:
    """Smooth compactly supported bump around `center` in spherical distance.

    amplitude * exp(d / (d - radius)) inside d < radius, zero outside;
    continuous at d = radius with all derivatives vanishing.
    """
    center = np.asarray(center, dtype=float)
    if not domain.contains(center, tol=1e-9):
        raise NotInDomain(f"bump center {center} is outside the domain")
    if radius <= 0:
        raise ValueError("bump radius must be positive")
    q0 = lift_many(center[None, :])[0]
    q = lift_many(np.asarray(points, dtype=float))
    d = np.arccos(np.clip(q @ q0, -1.0, 1.0))
    out = np.zeros(len(d))
    inside = d < radius
    out[inside] = amplitude * np.exp(d[inside] / (d[inside] - radius))
    return out


def initial_bump(mesh: TetMesh, dof_map: DofMap, domain: FundamentalDomain,
                 center=(0.0, 0.0, 0.0), radius: float = 0.3,
                 amplitude: float = 100.0) -> np.ndarray:
    """Bump evaluated at the dof representative vertices."""
    pts = mesh.vertices[dof_map.dof_to_node]
    return bump_profile(domain, pts, center, radius, amplitude)


def initial_random(seed: int, amplitude: float, n_dofs: int) -> np.ndarray:
    """Reproducible uniform noise in [-amplitude, amplitude] (PCG64 stream)."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    return rng.uniform(-amplitude, amplitude, n_dofs)


# -- preconditioners ------------------------------------------------------------

class Preconditioner:
    """Application of an SPD approximation of the mass inverse."""

    def __init__(self, kind: str, apply_fn):
        self.kind = kind
        self._apply = apply_fn

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self._apply(r)


def ic0_factor(mass: SparseSymMatrix) -> sp.csr_matrix:
    """Zero-fill incomplete Cholesky on the lower-triangle sparsity of mass."""
    a = mass.lower
    n = mass.n
    indptr, indices, data = a.indptr, a.indices, a.data
    rows: list[dict] = [dict() for _ in range(n)]
    for i in range(n):
        row_i = rows[i]
        for idx in range(indptr[i], indptr[i + 1]):
            j = indices[idx]
            v = data[idx]
            if j < i:
                row_j = rows[j]
                s = 0.0
                if len(row_i) <= len(row_j):
                    for k, lik in row_i.items():
                        if k < j:
                            ljk = row_j.get(k)
                            if ljk is not None:
                                s += lik * ljk
                else:
                    for k, ljk in row_j.items():
                        if k < j:
                            lik = row_i.get(k)
                            if lik is not None:
                                s += lik * ljk
                row_i[j] = (v - s) / row_j[j]
            elif j == i:
                pivot = v - sum(l * l for l in row_i.values())
                if pivot <= 0.0:
                    raise BreakdownPivot(f"nonpositive pivot {pivot:.3e} at row {i}")
                row_i[i] = math.sqrt(pivot)
    counts = np.fromiter((len(r) for r in rows), dtype=np.int64, count=n)
    out_indptr = np.concatenate([[0], np.cumsum(counts)])
    out_indices = np.empty(out_indptr[-1], dtype=np.int64)
    out_data = np.empty(out_indptr[-1])
    pos = 0
    for i in range(n):
        cols = sorted(rows[i])
        for c in cols:
            out_indices[pos] = c
            out_data[pos] = rows[i][c]
            pos += 1
    return sp.csr_matrix((out_data, out_indices, out_indptr), shape=(n, n))


def make_preconditioner(mass: SparseSymMatrix, kind: str = "ic0") -> Preconditioner:
    if kind == "jacobi":
        inv_diag = 1.0 / mass.diagonal()
        return Preconditioner("jacobi", lambda r: inv_diag * r)
    if kind == "ic0":
        try:
            factor = ic0_factor(mass)
        except BreakdownPivot as exc:
            warnings.warn(f"IC(0) broke down ({exc}); falling back to Jacobi")
            return make_preconditioner(mass, "jacobi")
        # SuperLU on the already-triangular factor gives C-speed substitutions
        lu = spla.splu(factor.tocsc(), permc_spec="NATURAL",
                       diag_pivot_thresh=0.0, options={"SymmetricMode": True})

        def apply_ic0(r):
            return lu.solve(lu.solve(r, trans="N"), trans="T")

        return Preconditioner("ic0", apply_ic0)
    raise ValueError(f"unknown preconditioner kind {kind!r}")


# -- linear solver ---------------------------------------------------------------

def pcg_solve(mass: SparseSymMatrix, b: np.ndarray,
              precond: Preconditioner | None = None, tol: float = 1e-12,
              max_iter: int | None = None, x0: np.ndarray | None = None,
              info: dict | None = None) -> np.ndarray:
    """Preconditioned conjugate gradients to relative residual tol.

    If `info` is a dict it receives the iteration count under "iterations".
    """
    n = len(b)
    if max_iter is None:
        max_iter = max(200, int(10 * math.sqrt(n)))
    if precond is None:
        precond = make_preconditioner(mass, "jacobi")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        if info is not None:
            info["iterations"] = 0
        return np.zeros(n)
    x = np.zeros(n) if x0 is None else x0.astype(float).copy()
    r = b - (mass @ x)
    target = tol * b_norm
    if np.linalg.norm(r) <= target:
        if info is not None:
            info["iterations"] = 0
        return x
    z = precond.apply(r)
    p = z.copy()
    rz = float(r @ z)
    for it in range(max_iter):
        ap = mass @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= target:
            true_r = b - (mass @ x)
            if np.linalg.norm(true_r) <= 2 * target:
                if info is not None:
                    info["iterations"] = it + 1
                return x
            r = true_r          # drift safeguard: restart from the true residual
            z = precond.apply(r)
            p = z.copy()
            rz = float(r @ z)
            continue
        z = precond.apply(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(
        f"pcg: residual {np.linalg.norm(b - (mass @ x)) / b_norm:.3e} "
        f"after {max_iter} iterations (target {tol:.1e})")


# -- states, probes, energy ------------------------------------------------------

@dataclass
class WaveState:
    u_cur: np.ndarray
    u_prev: np.ndarray
    step: int
    dt: float


@dataclass
class ProbeSet:
    nodes: np.ndarray        # mesh vertex of each probe (dof representative)
    dofs: np.ndarray
    window: tuple            # (first, last) recorded step, inclusive


def snap_probes(mesh: TetMesh, dof_map: DofMap, points, window: tuple,
                dt: float, force_window: bool = False) -> ProbeSet:
    """Snap probe points to the nearest dof representative vertices."""
    reps = mesh.vertices[dof_map.dof_to_node]
    tree = cKDTree(reps)
    _, dofs = tree.query(np.atleast_2d(np.asarray(points, dtype=float)))
    dofs = np.atleast_1d(dofs).astype(np.int64)
    first, last = window
    if first * dt < DOMAIN_DIAMETER and not force_window:
        warnings.warn(
            f"recording window starts at t = {first * dt:.3f} before one domain "
            f"crossing ({DOMAIN_DIAMETER:.6f}); transients will pollute the spectrum")
    return ProbeSet(nodes=dof_map.dof_to_node[dofs], dofs=dofs, window=(first, last))


def discrete_energy(mass: SparseSymMatrix, wave: SparseSymMatrix,
                    u_cur: np.ndarray, u_prev: np.ndarray, dt: float) -> float:
    """Conserved quadratic form of the leapfrog recurrence."""
    v = (u_cur - u_prev) / dt
    return float(v @ (mass @ v)) + float(u_cur @ (wave @ u_prev))


@dataclass
class LeapfrogResult:
    state: WaveState
    energy: np.ndarray                   # energy at steps 0..n (0 = initial pair)
    probe_signals: np.ndarray | None     # (samples, n_probes)
    snapshots: list = field(repr=False, default_factory=list)
    solve_iterations: int = 0


def leapfrog_run(mass: SparseSymMatrix, wave: SparseSymMatrix,
                 u0: np.ndarray, dt: float, steps: int,
                 v0: np.ndarray | None = None,
                 u_prev: np.ndarray | None = None,
                 probes: ProbeSet | None = None,
                 snapshot_every: int = 0,
                 dt_max: float | None = None, force: bool = False,
                 solve_tol: float = 1e-13,
                 precond: Preconditioner | None = None,
                 two_phase_start: bool = False,
                 energy_guard: float = 10.0) -> LeapfrogResult:
    """Run the explicit scheme for `steps` steps.

    The previous level is built from u0 and the initial velocity v0 by a
    second-order Taylor start (default v0 = 0); passing `u_prev` instead
    restarts from an explicit level pair, e.g. for time reversal.  Solves
    warm-start from a linear predictor; `two_phase_start` additionally runs
    a loose diagonal-preconditioned pass before the main solve (usually the
    predictor alone is faster).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt_max is not None and not force and dt > 0.95 * dt_max * (1 + 1e-12):
        raise ValueError(f"dt {dt} exceeds 0.95 * dt_max = {0.95 * dt_max}; "
                         "pass force=True to override")
    if precond is None:
        precond = make_preconditioner(mass, "ic0")

    u_cur = np.asarray(u0, dtype=float).copy()
    if u_prev is not None:
        if v0 is not None:
            raise ValueError("give either v0 or u_prev, not both")
        u_prev = np.asarray(u_prev, dtype=float).copy()
    else:
        a0 = wave @ u_cur
        z = pcg_solve(mass, a0, precond, tol=solve_tol)
        u_prev = u_cur - 0.5 * dt * dt * z
        if v0 is not None:
            u_prev -= dt * np.asarray(v0, dtype=float)

    m_cur = mass @ u_cur
    m_prev = mass @ u_prev
    energy = np.empty(steps + 1)
    energy[0] = (float((m_cur - m_prev) @ (u_cur - u_prev)) / (dt * dt)
                 + float((wave @ u_prev) @ u_cur))
    e_ref = None

    signals = None
    sample_count = 0
    if probes is not None:
        first, last = probes.window
        signals = np.empty((max(0, last - first + 1), len(probes.dofs)))
        if first == 0:
            signals[0] = u_cur[probes.dofs]
            sample_count = 1
    snapshots = []
    if snapshot_every:
        snapshots.append((0, u_cur.copy()))

    jacobi = make_preconditioner(mass, "jacobi") if two_phase_start else None
    dt2 = dt * dt
    for n in range(1, steps + 1):
        a_cur = wave @ u_cur
        rhs = 2.0 * m_cur - m_prev - dt2 * a_cur
        x0 = 2.0 * u_cur - u_prev
        if jacobi is not None:
            x0 = pcg_solve(mass, rhs, jacobi, tol=math.sqrt(solve_tol), x0=x0)
        u_new = pcg_solve(mass, rhs, precond, tol=solve_tol, x0=x0)
        m_new = mass @ u_new
        e = float((m_new - m_cur) @ (u_new - u_cur)) / dt2 + float(a_cur @ u_new)
        energy[n] = e
        if e_ref is None:
            e_ref = e
        elif abs(e) > energy_guard * max(abs(e_ref), 1e-300):
            raise EnergyBlowup(
                f"energy {e:.6e} exceeded {energy_guard} x E(dt) = "
                f"{energy_guard * e_ref:.6e} at step {n}")
        u_prev, u_cur = u_cur, u_new
        m_prev, m_cur = m_cur, m_new
        if probes is not None and probes.window[0] <= n <= probes.window[1]:
            signals[sample_count] = u_cur[probes.dofs]
            sample_count += 1
        if snapshot_every and n % snapshot_every == 0:
            snapshots.append((n, u_cur.copy()))

    if signals is not None:
        signals = signals[:sample_count]
    return LeapfrogResult(state=WaveState(u_cur=u_cur, u_prev=u_prev,
                                          step=steps, dt=dt),
                          energy=energy, probe_signals=signals,
                          snapshots=snapshots)
