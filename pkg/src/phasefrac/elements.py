"""Isoparametric element kinds: shape functions, quadrature, Jacobians.

Two fully integrated low-order elements carry the whole package:

* ``QUAD4`` - 4-node bilinear quadrilateral, plane strain, 2x2 Gauss points
* ``HEX8`` - 8-node trilinear hexahedron, 2x2x2 Gauss points

Displacement and phase field share the same interpolation (equal order).
Node ordering matches the VTK cell conventions, so meshes dump straight to
legacy VTK without permutation.
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache

import numpy as np

__all__ = [
    "ElementKind",
    "InvertedElementError",
    "gauss_rule",
    "shape_functions",
    "shape_table",
    "jacobian_volumes",
]

# reference corner coordinates
_QUAD4_CORNERS = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
_HEX8_CORNERS = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)


class ElementKind(str, Enum):
    QUAD4 = "quad4"
    HEX8 = "hex8"

    @property
    def dim(self) -> int:
        return 2 if self is ElementKind.QUAD4 else 3

    @property
    def n_nodes(self) -> int:
        return 4 if self is ElementKind.QUAD4 else 8

    @property
    def ntens(self) -> int:
        """Voigt components carried: plane strain stores zz explicitly."""
        return 4 if self is ElementKind.QUAD4 else 6

    @property
    def vtk_cell_type(self) -> int:
        return 9 if self is ElementKind.QUAD4 else 12


class InvertedElementError(ValueError):
    """Raised when an element maps with non-positive Jacobian determinant."""


def gauss_rule(kind: ElementKind):
    """Full 2-point tensor Gauss rule: (points (nq, dim), weights (nq,))."""
    a = 1.0 / np.sqrt(3.0)
    axes = [np.array([-a, a])] * kind.dim
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    return points, np.ones(len(points))


def shape_functions(kind: ElementKind, xi) -> tuple[np.ndarray, np.ndarray]:
    """Shape values and reference-coordinate gradients at one local point.

    Returns
    -------
    N : (n_nodes,)
    dN : (n_nodes, dim) with dN[i, a] = dN_i/dxi_a
    """
    xi = np.asarray(xi, dtype=float)
    corners = _QUAD4_CORNERS if kind is ElementKind.QUAD4 else _HEX8_CORNERS
    # tensor-product form N_i = prod_a (1 + xi_a * c_ia) / 2
    terms = 0.5 * (1.0 + corners * xi)  # (n_nodes, dim)
    n = terms.prod(axis=1)
    dn = np.empty_like(corners)
    for a in range(kind.dim):
        others = np.delete(terms, a, axis=1).prod(axis=1)
        dn[:, a] = 0.5 * corners[:, a] * others
    return n, dn


@lru_cache(maxsize=None)
def shape_table(kind: ElementKind):
    """Shape data tabulated at all quadrature points (cached).

    Returns
    -------
    N : (nq, n_nodes)
    dN : (nq, n_nodes, dim)
    weights : (nq,)
    """
    points, weights = gauss_rule(kind)
    n_list, dn_list = [], []
    for xi in points:
        n, dn = shape_functions(kind, xi)
        n_list.append(n)
        dn_list.append(dn)
    return np.array(n_list), np.array(dn_list), weights


def jacobian_volumes(nodes: np.ndarray, conn: np.ndarray, kind: ElementKind) -> np.ndarray:
    """det(J) * gauss weight at every quadrature point of every element.

    Parameters
    ----------
    nodes : (n_nodes_total, dim)
    conn : (n_elem, n_nodes_per_elem) integer connectivity

    Raises
    ------
    InvertedElementError
        if any determinant is non-positive; the message names the offending
        element indices.
    """
    _, dn, weights = shape_table(kind)
    coords = nodes[conn]  # (n_elem, nn, dim)
    # J[e, q, a, b] = d x_a / d xi_b = sum_i coords[e, i, a] * dN[q, i, b]
    jac = np.einsum("eia,qib->eqab", coords, dn)
    det = np.linalg.det(jac)
    if (det <= 0).any():
        bad = np.unique(np.nonzero((det <= 0).any(axis=1))[0])
        preview = ", ".join(str(b) for b in bad[:10])
        more = "" if len(bad) <= 10 else f" (+{len(bad) - 10} more)"
        raise InvertedElementError(
            f"{len(bad)} element(s) with non-positive Jacobian: {preview}{more}"
        )
    return det * weights
