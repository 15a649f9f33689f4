"""Small-strain constitutive pieces for phase field brittle fracture.

Voigt storage convention used throughout the package:

* 3D (6 components):     (xx, yy, zz, xy, xz, yz)
* plane strain (4):      (xx, yy, zz, xy), eps_zz carried explicitly as zero

Strain vectors hold *engineering* shear (gamma = 2*eps_ij for i != j); stress
vectors hold true tensor components. Tangent matrices act on engineering
strain vectors and return stress vectors, so they contract with B-matrices
directly and no factor bookkeeping leaks out of this module.

Every function broadcasts over leading axes: a single evaluation point is
shape (3, 3) / (ntens,), a batch of quadrature points is (n, 3, 3) /
(n, ntens). The assembly code relies on this to evaluate whole meshes in one
call.

Units are consistent mm - N - MPa (energies per volume in MPa = N*mm/mm^3,
fracture toughness in N/mm).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ElasticProps",
    "FractureProps",
    "SplitScheme",
    "Formulation",
    "TraceConvention",
    "MaterialModel",
    "PointValues",
    "voigt_to_tensor",
    "tensor_to_strain_voigt",
    "tensor_to_stress_voigt",
    "tangent_to_voigt",
    "elastic_matrix",
    "degradation",
    "strain_energy",
    "spectral_decompose",
    "macaulay_plus",
    "macaulay_minus",
    "heaviside",
    "split_energy",
    "projection_plus",
    "stress_and_tangent",
    "update_history",
    "phase_source",
    "phase_source_derivative",
    "crack_density",
    "homogeneous_phase",
    "homogeneous_strength",
]

# Voigt component -> tensor index pairs. Plane strain uses the first four.
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))

_I3 = np.eye(3)

# Tolerance of the repeated-eigenvalue rule in projection_plus: two principal
# strains count as equal when |e_a - e_b| < tol * max(1, |e_a| + |e_b|).
DEGENERACY_TOL = 1.0e-9


class SplitScheme(str, Enum):
    """How the elastic energy is separated into crack-driving and inert parts."""

    NOSPLIT = "nosplit"
    VOLDEV = "voldev"
    SPECTRAL = "spectral"


class Formulation(str, Enum):
    """Whether the split also enters the stress (anisotropic) or only the
    crack drive (hybrid: one degraded linear momentum equation)."""

    HYBRID = "hybrid"
    ANISOTROPIC = "anisotropic"


class TraceConvention(str, Enum):
    """Convention for the volumetric term of the spectral energy split.

    LITERAL squares the traces of the positive/negative strain tensors
    themselves: psi+- = lam/2 * tr(eps+-)^2 + mu * tr[(eps+-)^2]. Under this
    reading psi+ + psi- > psi0 whenever principal strains carry mixed signs.

    MACAULAY uses the positive/negative part of the *full* trace,
    psi+- = lam/2 * <tr eps>+-^2 + mu * tr[(eps+-)^2], which restores the
    partition psi+ + psi- = psi0 exactly. The anisotropic stress path always
    uses the MACAULAY volumetric term regardless of this switch, because its
    tangent (Heaviside of the full trace) is the derivative of that form only;
    the switch affects the reported energy split and hence the history drive.
    """

    LITERAL = "literal"
    MACAULAY = "macaulay"


@dataclass(frozen=True)
class ElasticProps:
    """Isotropic linear elasticity, parameterized by Young's modulus and
    Poisson's ratio.

    Attributes
    ----------
    E : float
        Young's modulus [MPa]. Must be positive.
    nu : float
        Poisson's ratio, in (-1, 0.5) exclusive.
    """

    E: float
    nu: float

    def __post_init__(self):
        if self.E <= 0.0:
            raise ValueError(f"Young's modulus must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"Poisson's ratio must lie in (-1, 0.5), got {self.nu}")

    @property
    def lam(self) -> float:
        """First Lame parameter."""
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def mu(self) -> float:
        """Shear modulus."""
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def bulk(self) -> float:
        """Bulk modulus."""
        return self.lam + 2.0 * self.mu / 3.0


@dataclass(frozen=True)
class FractureProps:
    """Fracture toughness Gc [N/mm] and regularization length ell [mm]."""

    Gc: float
    ell: float

    def __post_init__(self):
        if self.Gc <= 0.0:
            raise ValueError(f"Gc must be positive, got {self.Gc}")
        if self.ell <= 0.0:
            raise ValueError(f"ell must be positive, got {self.ell}")


@dataclass(frozen=True)
class MaterialModel:
    """Complete material description: elasticity + fracture + split choice.

    With ``split=NOSPLIT`` there is no tensile/compressive decomposition to
    act on, so the formulation is forced to HYBRID (a single degraded
    momentum equation) regardless of what was requested.
    """

    elastic: ElasticProps
    fracture: FractureProps
    split: SplitScheme = SplitScheme.NOSPLIT
    formulation: Formulation = Formulation.HYBRID
    spectral_trace: TraceConvention = TraceConvention.LITERAL

    def __post_init__(self):
        if self.split == SplitScheme.NOSPLIT:
            object.__setattr__(self, "formulation", Formulation.HYBRID)


@dataclass
class PointValues:
    """Constitutive output at evaluation points (batched arrays).

    stress : (..., ntens) true stress components
    tangent : (..., ntens, ntens) algorithmic tangent on engineering strain
    psi_plus, psi_minus : (...) crack-driving / inert energy densities
    """

    stress: np.ndarray
    tangent: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray


# ---------------------------------------------------------------------------
# Voigt machinery
# ---------------------------------------------------------------------------


def voigt_to_tensor(v: np.ndarray) -> np.ndarray:
    """Expand engineering-strain Voigt vectors (..., 4|6) to tensors (..., 3, 3)."""
    v = np.asarray(v, dtype=float)
    ntens = v.shape[-1]
    if ntens not in (4, 6):
        raise ValueError(f"expected 4 or 6 Voigt components, got {ntens}")
    t = np.zeros(v.shape[:-1] + (3, 3))
    for a, (i, j) in enumerate(_VOIGT_PAIRS[:ntens]):
        if i == j:
            t[..., i, j] = v[..., a]
        else:
            t[..., i, j] = 0.5 * v[..., a]
            t[..., j, i] = 0.5 * v[..., a]
    return t


def tensor_to_strain_voigt(t: np.ndarray, ntens: int) -> np.ndarray:
    """Collapse strain tensors (..., 3, 3) to engineering Voigt (..., ntens)."""
    t = np.asarray(t, dtype=float)
    v = np.empty(t.shape[:-2] + (ntens,))
    for a, (i, j) in enumerate(_VOIGT_PAIRS[:ntens]):
        v[..., a] = t[..., i, j] if i == j else t[..., i, j] + t[..., j, i]
    return v


def tensor_to_stress_voigt(t: np.ndarray, ntens: int) -> np.ndarray:
    """Collapse stress tensors (..., 3, 3) to Voigt (..., ntens); no shear factor."""
    t = np.asarray(t, dtype=float)
    v = np.empty(t.shape[:-2] + (ntens,))
    for a, (i, j) in enumerate(_VOIGT_PAIRS[:ntens]):
        v[..., a] = t[..., i, j]
    return v


def tangent_to_voigt(c4: np.ndarray, ntens: int) -> np.ndarray:
    """Map a minor-symmetric fourth-order tensor (..., 3, 3, 3, 3) to the
    (..., ntens, ntens) matrix acting on engineering-strain vectors.

    Because the strain vector carries gamma = 2*eps on shear slots, the
    matrix entry is simply C[i,j,k,l] for both normal and shear columns.
    """
    c4 = np.asarray(c4, dtype=float)
    m = np.empty(c4.shape[:-4] + (ntens, ntens))
    pairs = _VOIGT_PAIRS[:ntens]
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            m[..., a, b] = c4[..., i, j, k, l]
    return m


def elastic_matrix(elastic: ElasticProps, ntens: int) -> np.ndarray:
    """Undegraded isotropic stiffness matrix (ntens x ntens, engineering shear)."""
    lam, mu = elastic.lam, elastic.mu
    c = np.zeros((ntens, ntens))
    c[:3, :3] = lam
    c[np.arange(3), np.arange(3)] += 2.0 * mu
    for a in range(3, ntens):
        c[a, a] = mu
    return c


# ---------------------------------------------------------------------------
# Scalar building blocks
# ---------------------------------------------------------------------------


def macaulay_plus(x):
    """Positive part <x>+ = (x + |x|)/2."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (x + np.abs(x))


def macaulay_minus(x):
    """Negative part <x>- = (x - |x|)/2."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (x - np.abs(x))


def heaviside(x):
    """Step function with H(0) = 1, matching the tangent convention."""
    return np.where(np.asarray(x, dtype=float) >= 0.0, 1.0, 0.0)


def degradation(phi):
    """Quadratic stiffness degradation.

    Returns
    -------
    g : (1 - phi)^2
    dg : derivative -2 (1 - phi)

    No residual-stiffness floor and no clamping of phi: irreversibility is the
    history field's job, and phi approaches but never reaches 1 in practice.
    """
    phi = np.asarray(phi, dtype=float)
    one = 1.0 - phi
    return one * one, -2.0 * one


def strain_energy(eps: np.ndarray, elastic: ElasticProps) -> np.ndarray:
    """Undegraded strain energy density psi0 = lam/2 tr(eps)^2 + mu eps:eps."""
    eps = np.asarray(eps, dtype=float)
    tr = np.trace(eps, axis1=-2, axis2=-1)
    return 0.5 * elastic.lam * tr * tr + elastic.mu * np.einsum(
        "...ij,...ij->...", eps, eps
    )


def spectral_decompose(eps: np.ndarray):
    """Eigendecomposition of symmetric strain tensors, sorted descending.

    Returns
    -------
    vals : (..., 3) principal strains, vals[..., 0] >= vals[..., 1] >= vals[..., 2]
    vecs : (..., 3, 3) orthonormal principal directions as columns,
        so eps = sum_a vals[a] * vecs[:, a] outer vecs[:, a].
    """
    vals, vecs = np.linalg.eigh(np.asarray(eps, dtype=float))
    return vals[..., ::-1], vecs[..., :, ::-1]


# ---------------------------------------------------------------------------
# Energy splits
# ---------------------------------------------------------------------------


def split_energy(
    eps: np.ndarray,
    elastic: ElasticProps,
    scheme: SplitScheme,
    trace_convention: TraceConvention = TraceConvention.LITERAL,
):
    """Tensile/compressive energy split (psi_plus, psi_minus) of psi0.

    NOSPLIT returns (psi0, 0): the full energy drives the crack.

    VOLDEV splits volumetric/deviatoric: the positive-volumetric and the
    whole deviatoric part drive the crack, compression volume does not.
    psi+ + psi- = psi0 holds identically.

    SPECTRAL splits by sign of the principal strains. The volumetric term
    follows ``trace_convention``; see TraceConvention for why the partition
    of psi0 is exact only under MACAULAY.
    """
    eps = np.asarray(eps, dtype=float)
    if scheme == SplitScheme.NOSPLIT:
        psi0 = strain_energy(eps, elastic)
        return psi0, np.zeros_like(psi0)

    if scheme == SplitScheme.VOLDEV:
        k, mu = elastic.bulk, elastic.mu
        tr = np.trace(eps, axis1=-2, axis2=-1)
        dev = eps - (tr[..., None, None] / 3.0) * _I3
        dev_sq = np.einsum("...ij,...ij->...", dev, dev)
        tp, tm = macaulay_plus(tr), macaulay_minus(tr)
        return 0.5 * k * tp * tp + mu * dev_sq, 0.5 * k * tm * tm

    if scheme == SplitScheme.SPECTRAL:
        lam, mu = elastic.lam, elastic.mu
        vals = np.linalg.eigvalsh(eps)
        ep, em = macaulay_plus(vals), macaulay_minus(vals)
        if trace_convention == TraceConvention.LITERAL:
            tp = ep.sum(axis=-1)
            tm = em.sum(axis=-1)
        else:
            tr = vals.sum(axis=-1)
            tp, tm = macaulay_plus(tr), macaulay_minus(tr)
        psi_p = 0.5 * lam * tp * tp + mu * (ep * ep).sum(axis=-1)
        psi_m = 0.5 * lam * tm * tm + mu * (em * em).sum(axis=-1)
        return psi_p, psi_m

    raise ValueError(f"unknown split scheme {scheme!r}")


def _projection_from_eigen(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """P+ = d(eps+)/d(eps) from a descending eigendecomposition."""
    hv = heaviside(vals)
    p = np.einsum("...a,...ia,...ja,...ka,...la->...ijkl", hv, vecs, vecs, vecs, vecs)

    va = vals[..., :, None]
    vb = vals[..., None, :]
    diff = va - vb
    pos = macaulay_plus(vals)
    num = pos[..., :, None] - pos[..., None, :]
    # Repeated-eigenvalue rule: when the gap is below tolerance the divided
    # difference <e_a>+ - <e_b>+ over e_a - e_b degenerates to the step H(e_a).
    degen = np.abs(diff) < DEGENERACY_TOL * np.maximum(1.0, np.abs(va) + np.abs(vb))
    f = np.where(degen, np.broadcast_to(hv[..., :, None], diff.shape),
                 num / np.where(degen, 1.0, diff))
    f = np.where(np.eye(3, dtype=bool), 0.0, f)

    p += 0.5 * np.einsum("...ab,...ia,...jb,...ka,...lb->...ijkl", f, vecs, vecs, vecs, vecs)
    p += 0.5 * np.einsum("...ab,...ia,...jb,...kb,...la->...ijkl", f, vecs, vecs, vecs, vecs)
    return p


def projection_plus(eps: np.ndarray) -> np.ndarray:
    """Fourth-order positive projection tensor P+ with P+ : eps = eps+.

    Diagonal term: sum_a H(e_a) n_a (x) n_a (x) n_a (x) n_a. Pairwise term for
    a != b: (<e_a>+ - <e_b>+)/(e_a - e_b)/2 * n_a (x) n_b (x) (n_a (x) n_b +
    n_b (x) n_a), with the divided difference replaced by H(e_a) when
    |e_a - e_b| < 1e-9 * max(1, |e_a| + |e_b|). The complement is
    P- = I_sym - P+.
    """
    vals, vecs = spectral_decompose(eps)
    return _projection_from_eigen(vals, vecs)


def _identity_sym4() -> np.ndarray:
    i, j, k, l = np.meshgrid(*([np.arange(3)] * 4), indexing="ij")
    return 0.5 * ((i == k) & (j == l)).astype(float) + 0.5 * (
        (i == l) & (j == k)
    ).astype(float)


_ISYM4 = _identity_sym4()
_J4 = np.einsum("ij,kl->ijkl", _I3, _I3)


# ---------------------------------------------------------------------------
# Stress and algorithmic tangent
# ---------------------------------------------------------------------------


def stress_and_tangent(strain: np.ndarray, phi, model: MaterialModel) -> PointValues:
    """Stress, consistent tangent and energy split at material points.

    Parameters
    ----------
    strain : (..., 4|6) engineering-strain Voigt vectors (4 = plane strain).
    phi : broadcastable to strain.shape[:-1]; phase field value.
    model : material description. The formulation decides how the split acts:

    * HYBRID: one degraded momentum equation, sigma = g(phi) * C0 : eps and
      tangent g(phi) * C0; the split only selects what drives the history
      field (psi_plus).
    * ANISOTROPIC: sigma = g(phi) * dpsi+/deps + dpsi-/deps, with the
      matching tangent. For SPECTRAL the volumetric term uses the Macaulay
      bracket of the full trace (see TraceConvention) so that the tangent
      lam*(g*H(tr) + H(-tr)) J + 2*mu*(g*P+ + P-) is its exact derivative.

    Returns
    -------
    PointValues with stress (..., ntens), tangent (..., ntens, ntens) and the
    energy split psi_plus / psi_minus (...).
    """
    strain = np.asarray(strain, dtype=float)
    ntens = strain.shape[-1]
    base = strain.shape[:-1]
    phi = np.broadcast_to(np.asarray(phi, dtype=float), base)
    elastic = model.elastic

    eps = voigt_to_tensor(strain)
    psi_p, psi_m = split_energy(eps, elastic, model.split, model.spectral_trace)
    g, _ = degradation(phi)

    if model.formulation == Formulation.HYBRID:
        c0 = elastic_matrix(elastic, ntens)
        sig0 = strain @ c0.T
        stress = g[..., None] * sig0
        tangent = g[..., None, None] * np.broadcast_to(c0, base + (ntens, ntens))
        return PointValues(stress, np.ascontiguousarray(tangent), psi_p, psi_m)

    # Anisotropic: split enters the stress.
    if model.split == SplitScheme.VOLDEV:
        k, mu = elastic.bulk, elastic.mu
        tr = np.trace(eps, axis1=-2, axis2=-1)
        dev = eps - (tr[..., None, None] / 3.0) * _I3
        vol = g * k * macaulay_plus(tr) + k * macaulay_minus(tr)
        sig_t = vol[..., None, None] * _I3 + (2.0 * mu * g)[..., None, None] * dev
        stress = tensor_to_stress_voigt(sig_t, ntens)

        jv = np.zeros((ntens, ntens))
        jv[:3, :3] = 1.0
        isym_v = np.diag([1.0, 1.0, 1.0] + [0.5] * (ntens - 3))
        pdev_v = isym_v - jv / 3.0
        cj = k * (g * heaviside(tr) + heaviside(-tr))
        tangent = cj[..., None, None] * jv + (2.0 * mu * g)[..., None, None] * pdev_v
        return PointValues(stress, tangent, psi_p, psi_m)

    if model.split == SplitScheme.SPECTRAL:
        lam, mu = elastic.lam, elastic.mu
        vals, vecs = spectral_decompose(eps)
        ep_vals = macaulay_plus(vals)
        eps_p = np.einsum("...a,...ia,...ja->...ij", ep_vals, vecs, vecs)
        eps_m = eps - eps_p
        tr = vals.sum(axis=-1)
        vol = g * lam * macaulay_plus(tr) + lam * macaulay_minus(tr)
        sig_t = (
            vol[..., None, None] * _I3
            + (2.0 * mu * g)[..., None, None] * eps_p
            + 2.0 * mu * eps_m
        )
        stress = tensor_to_stress_voigt(sig_t, ntens)

        p_plus = _projection_from_eigen(vals, vecs)
        p_minus = _ISYM4 - p_plus
        cj = lam * (g * heaviside(tr) + heaviside(-tr))
        c4 = (
            cj[..., None, None, None, None] * _J4
            + 2.0 * mu * (g[..., None, None, None, None] * p_plus + p_minus)
        )
        tangent = tangent_to_voigt(c4, ntens)
        return PointValues(stress, tangent, psi_p, psi_m)

    raise ValueError(f"unsupported split/formulation pair {model.split}, {model.formulation}")


# ---------------------------------------------------------------------------
# History field and phase equation source
# ---------------------------------------------------------------------------


def update_history(history, psi_plus):
    """Irreversibility: H <- max(H, psi_plus), elementwise."""
    return np.maximum(history, psi_plus)


def phase_source(phi, history, fracture: FractureProps):
    """Source term r of the screened-Poisson form of the phase equation,
    laplacian(phi) = r, with r = phi/ell^2 - 2(1 - phi) H / (Gc ell)."""
    phi = np.asarray(phi, dtype=float)
    history = np.asarray(history, dtype=float)
    ell, gc = fracture.ell, fracture.Gc
    return phi / ell**2 - 2.0 * (1.0 - phi) * history / (gc * ell)


def phase_source_derivative(history, fracture: FractureProps):
    """dr/dphi = 1/ell^2 + 2 H / (Gc ell); strictly positive, so the phase
    block stays symmetric positive definite for any H >= 0."""
    history = np.asarray(history, dtype=float)
    return 1.0 / fracture.ell**2 + 2.0 * history / (fracture.Gc * fracture.ell)


def crack_density(phi, grad_phi, ell: float):
    """Regularized crack surface density phi^2/(2 ell) + ell/2 |grad phi|^2.

    grad_phi has the gradient components on the last axis.
    """
    phi = np.asarray(phi, dtype=float)
    grad_phi = np.asarray(grad_phi, dtype=float)
    return phi * phi / (2.0 * ell) + 0.5 * ell * (grad_phi * grad_phi).sum(axis=-1)


def homogeneous_phase(history, fracture: FractureProps):
    """Pointwise equilibrium phase value for a uniform state (no gradient):
    phi = 2 ell H / (Gc + 2 ell H)."""
    history = np.asarray(history, dtype=float)
    two_lh = 2.0 * fracture.ell * history
    return two_lh / (fracture.Gc + two_lh)


def homogeneous_strength(E: float, Gc: float, ell: float) -> float:
    """Peak nominal stress of the homogeneous 1D bar, (9/16) sqrt(E Gc / (3 ell)).

    Follows from maximizing sigma = (1 - phi)^2 E eps along the homogeneous
    equilibrium phi(eps); the maximum sits at eps* = sqrt(Gc / (3 ell E)).
    """
    return 9.0 / 16.0 * np.sqrt(E * Gc / (3.0 * ell))
