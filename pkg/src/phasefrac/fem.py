"""Vectorized assembly of the coupled displacement / phase-field system.

Equal-order bilinear (quad4) / trilinear (hex8) interpolation for both
fields, full Gauss quadrature. The two global blocks are assembled from the
same quadrature sweep:

* displacement: K_uu = sum B^T C B, r_u = sum B^T sigma (internal force; no
  external loads, so residual = internal force and the entries at fixed dofs
  are the reactions),
* phase field:  K_pp = sum Gc*ell grad(N) grad(N) + (Gc/ell + 2 H) N N,
  r_p = sum Gc*ell grad(N).grad(phi) + (Gc/ell) phi N - 2 (1 - phi) H N.

There is no coupling block: schemes treat the off-diagonal terms as zero and
iterate. With ``live_history`` the crack drive H is refreshed from the
current displacement during the sweep (floored by the committed history), so
one assembly gives both blocks a consistent simultaneous linearization;
with ``live_history=False`` H stays at the committed value (staggered).

Element data (physical gradients, B matrices, scatter indices) is computed
once per mesh and cached on the mesh instance. Assembly can shard the
element range across threads; per-element results never cross shard
boundaries and shards are merged in element order, so the assembled system
is bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .constitutive import (
    MaterialModel,
    degradation,
    stress_and_tangent,
)
from .elements import InvertedElementError, shape_table
from .mesh_io import Mesh

__all__ = [
    "ElementBatch",
    "GlobalSystem",
    "FieldState",
    "element_batch",
    "assemble_system",
    "phase_field_energy",
    "quadrature_strains",
    "dirichlet_arrays",
    "dof_indices",
    "condense",
]

_DOF_COMP = {"x": 0, "y": 1, "z": 2}


@dataclass
class FieldState:
    """Nodal unknowns: flat displacement vector and phase field."""

    u: np.ndarray  # (n_nodes * dim,)
    phi: np.ndarray  # (n_nodes,)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "FieldState":
        return cls(np.zeros(mesh.n_nodes * mesh.dim), np.zeros(mesh.n_nodes))

    def copy(self) -> "FieldState":
        return FieldState(self.u.copy(), self.phi.copy())


@dataclass
class ElementBatch:
    """Geometry-derived arrays shared by every assembly over one mesh."""

    n_elements: int
    n_nodes: int
    dim: int
    ntens: int
    conn: np.ndarray  # (ne, nn)
    shape: np.ndarray  # (nq, nn)
    dn_dx: np.ndarray  # (ne, nq, nn, dim)
    wdet: np.ndarray  # (ne, nq)
    bmat: np.ndarray  # (ne, nq, ntens, nn, dim)
    udof: np.ndarray  # (ne, nn*dim)
    rows_u: np.ndarray
    cols_u: np.ndarray
    rows_p: np.ndarray
    cols_p: np.ndarray
    bfold: np.ndarray  # (ne, nq, ntens, nn*dim) bmat with the dof axes merged
    dfold: np.ndarray  # (ne, nq*dim, nn) dn_dx folded for batched matmul
    nn_outer: np.ndarray  # (nq, nn, nn) shape-function outer products


def element_batch(mesh: Mesh) -> ElementBatch:
    cached = getattr(mesh, "_element_batch", None)
    if cached is not None:
        return cached
    kind = mesh.kind
    dim, nn, ntens = kind.dim, kind.n_nodes, kind.ntens
    shape, dn_ref, weights = shape_table(kind)
    conn = mesh.elements
    coords = mesh.nodes[conn]  # (ne, nn, dim)
    jac = np.einsum("eia,qib->eqab", coords, dn_ref)
    det = np.linalg.det(jac)
    if det.min() <= 0.0:
        bad = np.nonzero((det <= 0.0).any(axis=1))[0]
        raise InvertedElementError(
            f"{len(bad)} element(s) with non-positive Jacobian: "
            + ", ".join(str(e) for e in bad[:10])
        )
    dn_dx = np.einsum("qib,eqba->eqia", dn_ref, np.linalg.inv(jac))
    wdet = det * weights

    ne, nq = det.shape
    bmat = np.zeros((ne, nq, ntens, nn, dim))
    # normal components, then engineering shear rows (xy, xz, yz order)
    for a in range(dim):
        bmat[:, :, a, :, a] = dn_dx[..., a]
    shear_pairs = [(0, 1)] if dim == 2 else [(0, 1), (0, 2), (1, 2)]
    for row, (a, b) in enumerate(shear_pairs, start=3):
        bmat[:, :, row, :, a] = dn_dx[..., b]
        bmat[:, :, row, :, b] = dn_dx[..., a]

    udof = (conn[:, :, None] * dim + np.arange(dim)).reshape(ne, nn * dim)
    ndpe = nn * dim
    rows_u = np.broadcast_to(udof[:, :, None], (ne, ndpe, ndpe)).ravel()
    cols_u = np.broadcast_to(udof[:, None, :], (ne, ndpe, ndpe)).ravel()
    rows_p = np.broadcast_to(conn[:, :, None], (ne, nn, nn)).ravel()
    cols_p = np.broadcast_to(conn[:, None, :], (ne, nn, nn)).ravel()

    bfold = bmat.reshape(ne, nq, ntens, nn * dim)
    dfold = np.ascontiguousarray(dn_dx.transpose(0, 1, 3, 2).reshape(ne, nq * dim, nn))
    nn_outer = shape[:, :, None] * shape[:, None, :]

    batch = ElementBatch(
        ne, mesh.n_nodes, dim, ntens, conn, shape, dn_dx, wdet, bmat,
        udof, rows_u, cols_u, rows_p, cols_p, bfold, dfold, nn_outer,
    )
    mesh._element_batch = batch
    return batch


@dataclass
class GlobalSystem:
    """One assembly sweep: residuals, tangent blocks, and crack drive."""

    k_uu: sp.csr_matrix | None
    r_u: np.ndarray | None
    k_pp: sp.csr_matrix | None
    r_p: np.ndarray | None
    h_eff: np.ndarray  # (ne, nq) drive used by the phase block this sweep
    psi_plus: np.ndarray  # (ne, nq) tensile energy of the current strains


def _chunk_slices(n: int, workers: int):
    workers = max(1, min(workers, n))
    bounds = np.linspace(0, n, workers + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _sweep_chunk(batch, model, u, phi, history, sl, live_history, want_u, want_phi):
    conn = batch.conn[sl]
    bfold = batch.bfold[sl]  # (nc, nq, ntens, nd)
    wdet = batch.wdet[sl]
    shape = batch.shape
    nc = len(conn)
    nq, nn = shape.shape
    dim, ntens = batch.dim, batch.ntens
    nd = nn * dim

    ue = u.reshape(-1, dim)[conn].reshape(nc, nd, 1)
    pe = phi[conn]  # (nc, nn)
    eps = np.matmul(bfold.reshape(nc, nq * ntens, nd), ue).reshape(nc, nq, ntens)
    phi_q = pe @ shape.T

    pv = stress_and_tangent(eps, phi_q, model)
    h_eff = np.maximum(history[sl], pv.psi_plus) if live_history else history[sl]

    ku = fu = kp = fp = None
    if want_u:
        cbf = np.matmul(pv.tangent, bfold).reshape(nc, nq * ntens, nd)
        wb = (bfold * wdet[:, :, None, None]).reshape(nc, nq * ntens, nd)
        ku = np.matmul(wb.transpose(0, 2, 1), cbf)
        fu = np.matmul(pv.stress.reshape(nc, 1, nq * ntens), wb)[:, 0, :]
    if want_phi:
        gc, ell = model.fracture.Gc, model.fracture.ell
        dfold = batch.dfold[sl]  # (nc, nq*dim, nn)
        dw = dfold * np.repeat((gc * ell) * wdet, dim, axis=1)[:, :, None]
        kp = np.matmul(dw.transpose(0, 2, 1), dfold)
        kp += np.tensordot((gc / ell + 2.0 * h_eff) * wdet, batch.nn_outer, axes=([1], [0]))
        grad_phi = np.matmul(dfold, pe[:, :, None])  # (nc, nq*dim, 1)
        fp = np.matmul(dw.transpose(0, 2, 1), grad_phi)[:, :, 0]
        fp += (((gc / ell) * phi_q - 2.0 * (1.0 - phi_q) * h_eff) * wdet) @ shape
    return ku, fu, kp, fp, h_eff, pv.psi_plus


def assemble_system(
    mesh: Mesh,
    state: FieldState,
    model: MaterialModel,
    history: np.ndarray,
    *,
    live_history: bool = True,
    blocks=("u", "phi"),
    workers: int = 1,
) -> GlobalSystem:
    """One quadrature sweep over the mesh; see the module docstring."""
    batch = element_batch(mesh)
    want_u, want_phi = "u" in blocks, "phi" in blocks
    slices = _chunk_slices(batch.n_elements, workers)

    args = [
        (batch, model, state.u, state.phi, history, sl, live_history, want_u, want_phi)
        for sl in slices
    ]
    if len(slices) == 1:
        parts = [_sweep_chunk(*args[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(slices)) as pool:
            parts = list(pool.map(lambda a: _sweep_chunk(*a), args))

    def merged(i):
        return np.concatenate([p[i] for p in parts], axis=0)

    ndof_u = batch.n_nodes * batch.dim
    k_uu = r_u = k_pp = r_p = None
    if want_u:
        k_uu = sp.coo_matrix(
            (merged(0).ravel(), (batch.rows_u, batch.cols_u)), shape=(ndof_u, ndof_u)
        ).tocsr()
        r_u = np.zeros(ndof_u)
        np.add.at(r_u, batch.udof.ravel(), merged(1).ravel())
    if want_phi:
        k_pp = sp.coo_matrix(
            (merged(2).ravel(), (batch.rows_p, batch.cols_p)),
            shape=(batch.n_nodes, batch.n_nodes),
        ).tocsr()
        r_p = np.zeros(batch.n_nodes)
        np.add.at(r_p, batch.conn.ravel(), merged(3).ravel())
    return GlobalSystem(k_uu, r_u, k_pp, r_p, merged(4), merged(5))


def quadrature_strains(mesh: Mesh, state: FieldState) -> np.ndarray:
    """Engineering-Voigt strains at every quadrature point, (ne, nq, ntens)."""
    batch = element_batch(mesh)
    ue = state.u.reshape(-1, batch.dim)[batch.conn]
    return np.einsum("eqtia,eia->eqt", batch.bmat, ue)


def phase_field_energy(mesh: Mesh, state: FieldState, model: MaterialModel):
    """(elastic, fracture) energy of the current state.

    Elastic energy is the stored energy consistent with the stress: the
    hybrid formulation degrades all of psi0, the anisotropic one only the
    tensile part.
    """
    from .constitutive import Formulation, elastic_matrix, split_energy, voigt_to_tensor

    batch = element_batch(mesh)
    eps = quadrature_strains(mesh, state)
    phi_q = np.einsum("qi,ei->eq", batch.shape, state.phi[batch.conn])
    g = degradation(phi_q)[0]
    if model.formulation is Formulation.HYBRID:
        cmat = elastic_matrix(model.elastic, batch.ntens)
        psi0 = 0.5 * np.einsum("eqt,ts,eqs->eq", eps, cmat, eps)
        density = g * psi0
    else:
        psi_p, psi_m = split_energy(
            voigt_to_tensor(eps), model.elastic, model.split, model.spectral_trace
        )
        density = g * psi_p + psi_m
    elastic = float((density * batch.wdet).sum())

    gc, ell = model.fracture.Gc, model.fracture.ell
    grad_phi = np.einsum("eqia,ei->eqa", batch.dn_dx, state.phi[batch.conn])
    gamma = phi_q**2 / (2.0 * ell) + 0.5 * ell * (grad_phi**2).sum(axis=-1)
    fracture = float((gc * gamma * batch.wdet).sum())
    return elastic, fracture


def dof_indices(mesh: Mesh, node_ids: np.ndarray, dof: str) -> np.ndarray:
    """Global displacement dof indices of the given nodes and component."""
    comp = _DOF_COMP[dof]
    if comp >= mesh.dim:
        raise ValueError(f"dof {dof!r} not available on a {mesh.dim}D mesh")
    return np.asarray(node_ids, dtype=int) * mesh.dim + comp


def dirichlet_arrays(mesh: Mesh, boundary_conditions, load_factor: float):
    """Resolve constraints at one load level.

    Returns (u_idx, u_val, phi_idx, phi_val), deduplicated; conflicting
    prescriptions of the same dof are an error.
    """
    u_map: dict[int, float] = {}
    p_map: dict[int, float] = {}
    for bc in boundary_conditions:
        if bc.node_set not in mesh.node_sets:
            raise ValueError(
                f"unknown node set {bc.node_set!r}; mesh has "
                f"{sorted(mesh.node_sets)}"
            )
        ids = mesh.node_sets[bc.node_set]
        if bc.dof == "phi":
            for i in ids:
                prev = p_map.setdefault(int(i), bc.value)
                if prev != bc.value:
                    raise ValueError(f"conflicting phase values at node {i}")
        else:
            value = bc.value * load_factor if bc.ramped else bc.value
            for d in dof_indices(mesh, ids, bc.dof):
                prev = u_map.setdefault(int(d), value)
                if prev != value:
                    raise ValueError(f"conflicting displacement values at dof {d}")
    u_idx = np.fromiter(u_map.keys(), dtype=int, count=len(u_map))
    p_idx = np.fromiter(p_map.keys(), dtype=int, count=len(p_map))
    return (
        u_idx,
        np.fromiter(u_map.values(), dtype=float, count=len(u_map)),
        p_idx,
        np.fromiter(p_map.values(), dtype=float, count=len(p_map)),
    )


def condense(k: sp.csr_matrix, r: np.ndarray, fixed_idx: np.ndarray):
    """Restrict a linearized block to its free dofs.

    Fixed values are already substituted into the state before assembly and
    corrections at fixed dofs are zero, so plain row/column deletion is
    exact. Returns (k_ff, r_f, free_idx).
    """
    n = r.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[fixed_idx] = False
    free = np.nonzero(mask)[0]
    return k[free][:, free], r[free], free
