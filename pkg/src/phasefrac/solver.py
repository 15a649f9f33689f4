"""Incremental quasi-static solution of the coupled fracture problem.

Two families of schemes advance the increment:

* **monolithic** — both blocks are solved within one iteration loop over a
  shared state. Each iteration assembles with a *live* crack drive
  (H = max of committed history and the tensile energy of the current
  displacements), solves the displacement and phase blocks from that same
  linearization, and applies both corrections. The off-diagonal coupling is
  never formed, so convergence is linear, not quadratic — the high
  iteration counts near rupture are expected behavior, not a defect.
* **staggered** — the displacement subproblem is solved to convergence with
  the phase field frozen, then the phase block is solved once. Single-pass
  freezes the drive at the previous increment's committed history and
  accepts the result (robust, never stalls, needs small steps for
  accuracy). Multi-pass repeats the alternation, refreshing the drive from
  the current displacements, until the combined correction drops below
  ``stagger_tol``.

Convergence of a Newton loop requires, on the free dofs, the residual of
each active block to fall to ``tol_rel`` times its value at the start of
the increment (or below ``tol_abs``), and the latest correction to be small
against the field (``tol_rel`` relative, floored by ``tol_abs``). The first
solve of an increment is the incremental predictor — its correction IS the
increment — so the correction test applies from the second solve on. A
converged linear increment therefore reports exactly one iteration.

The history field is committed once per increment, from the final state,
whether or not the increment converged (the record carries the flag); a
non-converged state that is accepted must still never heal.

Iteration counts reported per increment are linear-solver passes over a
block pair (monolithic) or single blocks (staggered u-solves plus the
phase solve), which is what makes "two iterations per staggered step"
the expected reading for a linear-in-u formulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse.linalg as spla

from .constitutive import MaterialModel
from .fem import (
    FieldState,
    assemble_system,
    condense,
    dirichlet_arrays,
    dof_indices,
    element_batch,
    phase_field_energy,
)
from .mesh_io import Mesh

__all__ = [
    "Scheme",
    "SolveConfig",
    "IncrementRecord",
    "RunResult",
    "SolverError",
    "SingularSystemError",
    "DivergenceError",
    "NonConvergenceError",
    "linear_solve",
    "run",
]


class SolverError(RuntimeError):
    pass


class SingularSystemError(SolverError):
    """The linear solve failed or produced an untrustworthy solution."""


class DivergenceError(SolverError):
    """NaN or Inf appeared in a residual or solution: a bug or a blown-up
    state, never treated as plain non-convergence."""


class NonConvergenceError(SolverError):
    """Raised only when configured to stop on a non-converged increment."""


class Scheme(str, Enum):
    MONOLITHIC = "monolithic"
    STAGGERED_SINGLE = "staggered-single"
    STAGGERED_MULTI = "staggered-multi"


@dataclass
class SolveConfig:
    scheme: Scheme = Scheme.MONOLITHIC
    n_increments: int = 100
    max_iterations: int = 500
    tol_rel: float = 1.0e-6
    tol_abs: float = 1.0e-10
    extrapolate: bool = False
    stagger_tol: float = 1.0e-6
    workers: int = 1
    stop_on_nonconverged: bool = False
    load_schedule: np.ndarray | None = None  # explicit load factors, else 1/n..1

    def __post_init__(self):
        if self.n_increments < 1:
            raise ValueError("n_increments must be >= 1")
        if self.tol_rel <= 0 or self.tol_abs <= 0 or self.stagger_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.load_schedule is not None:
            sched = np.asarray(self.load_schedule, dtype=float)
            if sched.ndim != 1 or len(sched) != self.n_increments:
                raise ValueError("load_schedule must have n_increments entries")
            self.load_schedule = sched

    def factors(self) -> np.ndarray:
        if self.load_schedule is not None:
            return self.load_schedule
        return np.linspace(1.0 / self.n_increments, 1.0, self.n_increments)


@dataclass
class IncrementRecord:
    increment: int
    load_factor: float
    displacement: float
    force: float
    iterations: int
    converged: bool
    elastic_energy: float
    fracture_energy: float
    phi_max: float
    residual_initial: float
    residual_final: float


@dataclass
class RunResult:
    records: list
    state: FieldState
    history: np.ndarray
    mesh: Mesh
    converged: bool

    @property
    def cumulative_iterations(self) -> int:
        return int(sum(r.iterations for r in self.records))

    def curve(self) -> np.ndarray:
        """(n, 2) array of (displacement, force) per increment."""
        return np.array([[r.displacement, r.force] for r in self.records])


class ReusableLU:
    """Sparse direct solve that recycles the previous factorization.

    Between nonlinear iterations a block matrix drifts only as far as the
    fields moved, so the last LU usually reduces the new system's residual
    by orders of magnitude per application.  The result is still the
    direct-solve answer for the matrix passed in — it is refined until the
    relative defect is below ``target`` — and a fresh factorization is
    computed whenever the stale one stops contracting.  Deterministic for
    a fixed call sequence.
    """

    target = 1e-13
    max_refine = 8

    def __init__(self):
        self._lu = None
        self._pattern = None

    def solve(self, k, rhs: np.ndarray) -> np.ndarray:
        if rhs.size == 0:
            return rhs.copy()
        nb = np.linalg.norm(rhs)
        if not np.isfinite(nb):
            raise SingularSystemError("right-hand side is not finite")
        if nb == 0.0:
            return np.zeros_like(rhs)
        kc = k.tocsc()
        if self._lu is not None and self._same_pattern(kc):
            x = self._refine(kc, rhs, nb)
            if x is not None:
                return x
        return self._fresh(kc, rhs, nb)

    def _same_pattern(self, kc) -> bool:
        indptr, indices = self._pattern
        return (
            indices.size == kc.indices.size
            and np.array_equal(indptr, kc.indptr)
            and np.array_equal(indices, kc.indices)
        )

    def _refine(self, kc, rhs, nb):
        x = self._lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            return None
        r = rhs - kc @ x
        nr = np.linalg.norm(r)
        for _ in range(self.max_refine):
            if nr <= self.target * nb:
                return x
            x = x + self._lu.solve(r)
            r = rhs - kc @ x
            nr_new = np.linalg.norm(r)
            if not np.isfinite(nr_new) or nr_new > 0.5 * nr:
                return None
            nr = nr_new
        return x if nr <= self.target * nb else None

    def _fresh(self, kc, rhs, nb):
        try:
            # both FE blocks are symmetric: the AT_PLUS_A ordering roughly
            # halves the fill, and symmetric-mode pivoting skips the search
            self._lu = spla.splu(
                kc,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except (RuntimeError, ValueError) as exc:
            self._lu = None
            raise SingularSystemError(f"direct solve failed: {exc}") from exc
        self._pattern = (kc.indptr.copy(), kc.indices.copy())
        x = self._lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("direct solve returned non-finite values")
        defect = np.linalg.norm(kc @ x - rhs)
        if defect > 1e-8 * max(nb, 1.0):
            raise SingularSystemError(
                f"solution defect {defect:.3e} too large; system singular or "
                "severely ill-conditioned"
            )
        return x


def linear_solve(k, rhs: np.ndarray) -> np.ndarray:
    """One-shot sparse direct solve with a trust check on the result."""
    return ReusableLU().solve(k, rhs)


def _norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def _check_finite(value: float, what: str, increment: int, iteration: int):
    if not np.isfinite(value):
        raise DivergenceError(
            f"{what} is not finite at increment {increment}, iteration "
            f"{iteration}: the state has blown up"
        )


def _residual_ok(norm: float, initial: float, cfg: SolveConfig) -> bool:
    return norm <= cfg.tol_rel * initial or norm <= cfg.tol_abs


def _correction_ok(step: float, field_norm: float, cfg: SolveConfig) -> bool:
    return step <= max(cfg.tol_rel * field_norm, cfg.tol_abs)


def _free_norm(r: np.ndarray, fixed_idx: np.ndarray) -> float:
    mask = np.ones(len(r), dtype=bool)
    mask[fixed_idx] = False
    return _norm(r[mask])


class _Increment:
    """Scratch context for one load increment on one mesh."""

    def __init__(
        self, mesh, model, history, u_idx, p_idx, cfg, increment, lus=None
    ):
        self.mesh = mesh
        self.model = model
        self.history = history
        self.u_idx = u_idx
        self.p_idx = p_idx
        self.cfg = cfg
        self.increment = increment
        self.lu_u, self.lu_p = lus if lus is not None else (
            ReusableLU(),
            ReusableLU(),
        )

    def assemble(self, state, blocks, live_history, history=None):
        return assemble_system(
            self.mesh,
            state,
            self.model,
            self.history if history is None else history,
            live_history=live_history,
            blocks=blocks,
            workers=self.cfg.workers,
        )

    def monolithic(self, state, ref_norms=None):
        cfg = self.cfg
        system = self.assemble(state, ("u", "phi"), live_history=True)
        ku, ru, free_u = condense(system.k_uu, system.r_u, self.u_idx)
        kp, rp, free_p = condense(system.k_pp, system.r_p, self.p_idx)
        # The relative-residual reference is the increment's unextrapolated
        # starting residual when one is supplied: a sharper predictor must
        # not tighten the stopping test it is measured against.
        r0_u, r0_p = ref_norms if ref_norms is not None else (_norm(ru), _norm(rp))
        self.residual_initial = max(r0_u, r0_p)
        for it in range(1, cfg.max_iterations + 1):
            du = self.lu_u.solve(ku, -ru)
            dphi = self.lu_p.solve(kp, -rp)
            state.u[free_u] += du
            state.phi[free_p] += dphi
            system = self.assemble(state, ("u", "phi"), live_history=True)
            ku, ru, free_u = condense(system.k_uu, system.r_u, self.u_idx)
            kp, rp, free_p = condense(system.k_pp, system.r_p, self.p_idx)
            nu, np_ = _norm(ru), _norm(rp)
            _check_finite(nu + np_, "residual", self.increment, it)
            self.residual_final = max(nu, np_)
            resid = _residual_ok(nu, r0_u, cfg) and _residual_ok(np_, r0_p, cfg)
            corr = it == 1 or (
                _correction_ok(_norm(du), _norm(state.u), cfg)
                and _correction_ok(_norm(dphi), _norm(state.phi), cfg)
            )
            if resid and corr:
                return it, True, system
        return cfg.max_iterations, False, system

    def _newton_u(self, state, budget, ref_norm=None):
        """Displacement Newton with the phase field frozen. Returns
        (solves, converged, last assembled u-system)."""
        cfg = self.cfg
        system = self.assemble(state, ("u",), live_history=False)
        ku, ru, free_u = condense(system.k_uu, system.r_u, self.u_idx)
        r0 = _norm(ru) if ref_norm is None else ref_norm
        self.residual_initial = max(self.residual_initial, r0)
        for it in range(1, budget + 1):
            du = self.lu_u.solve(ku, -ru)
            state.u[free_u] += du
            system = self.assemble(state, ("u",), live_history=False)
            ku, ru, free_u = condense(system.k_uu, system.r_u, self.u_idx)
            nu = _norm(ru)
            _check_finite(nu, "displacement residual", self.increment, it)
            self.residual_final = nu
            if _residual_ok(nu, r0, cfg) and (
                it == 1 or _correction_ok(_norm(du), _norm(state.u), cfg)
            ):
                return it, True, system
        return budget, False, system

    def staggered(self, state, multi_pass: bool, ref_norms=None):
        cfg = self.cfg
        self.residual_initial = 0.0
        self.residual_final = np.inf
        total = 0
        converged = True
        max_passes = cfg.max_iterations if multi_pass else 1
        for p in range(1, max_passes + 1):
            u_before, phi_before = state.u.copy(), state.phi.copy()
            budget = max(1, cfg.max_iterations - total - 1)
            ref_u = ref_norms[0] if (ref_norms is not None and p == 1) else None
            solves, ok, usys = self._newton_u(state, budget, ref_norm=ref_u)
            total += solves
            converged = ok
            # alternate minimization: the phase solve is driven by the
            # displacements just computed, floored by the committed history
            drive = np.maximum(self.history, usys.psi_plus)
            psys = self.assemble(state, ("phi",), live_history=False, history=drive)
            kp, rp, free_p = condense(psys.k_pp, psys.r_p, self.p_idx)
            _check_finite(_norm(rp), "phase residual", self.increment, total)
            state.phi[free_p] += self.lu_p.solve(kp, -rp)
            total += 1
            if multi_pass:
                step = max(
                    _norm(state.u - u_before) / max(_norm(state.u), 1e-30),
                    _norm(state.phi - phi_before) / max(_norm(state.phi), 1e-30),
                )
                if step <= cfg.stagger_tol:
                    return total, converged, None
                if total >= cfg.max_iterations:
                    return total, False, None
        return total, converged, None


def run(
    mesh: Mesh,
    model: MaterialModel,
    boundary_conditions,
    config: SolveConfig,
    monitor=("top", "y"),
    on_increment=None,
) -> RunResult:
    """March the load schedule and return the full response history.

    ``monitor`` names the node set and displacement component whose reaction
    is reported as "force"; the "displacement" column is the ramped boundary
    value prescribed on that set at each increment's load factor.
    """
    batch = element_batch(mesh)
    history = np.zeros_like(batch.wdet)
    state = FieldState.zeros(mesh)

    monitor_set, monitor_dof = monitor
    monitor_dofs = dof_indices(mesh, mesh.node_sets[monitor_set], monitor_dof)
    monitor_amplitude = next(
        (
            bc.value
            for bc in boundary_conditions
            if bc.node_set == monitor_set and bc.dof == monitor_dof and bc.ramped
        ),
        1.0,
    )

    records = []
    prev_states = []  # last two accepted (state, factor) pairs
    factors = config.factors()
    all_ok = True
    lus = (ReusableLU(), ReusableLU())  # one factorization cache per block

    for k, factor in enumerate(factors, start=1):
        u_idx, u_val, p_idx, p_val = dirichlet_arrays(
            mesh, boundary_conditions, factor
        )
        ctx = _Increment(mesh, model, history, u_idx, p_idx, config, k, lus)

        ref_norms = None
        if config.extrapolate and len(prev_states) == 2:
            (s1, f1), (s2, f2) = prev_states
            if f2 != f1:
                # Measure the stopping-test reference at the unextrapolated
                # start (previous state plus new boundary values), then
                # extrapolate. A sharper predictor must not tighten the
                # stopping test it is measured against. Both fields are
                # extrapolated together: a stretched displacement field
                # paired with a stale damage field is off the solution
                # trajectory and converges slower than no predictor at all.
                state.u[u_idx] = u_val
                state.phi[p_idx] = p_val
                ref = ctx.assemble(state, ("u", "phi"), live_history=True)
                ref_norms = (
                    _free_norm(ref.r_u, u_idx),
                    _free_norm(ref.r_p, p_idx),
                )
                w = (factor - f2) / (f2 - f1)
                state.u = s2.u + w * (s2.u - s1.u)
                state.phi = s2.phi + w * (s2.phi - s1.phi)

        state.u[u_idx] = u_val
        state.phi[p_idx] = p_val

        if config.scheme is Scheme.MONOLITHIC:
            iterations, ok, final = ctx.monolithic(state, ref_norms=ref_norms)
        else:
            iterations, ok, final = ctx.staggered(
                state,
                multi_pass=config.scheme is Scheme.STAGGERED_MULTI,
                ref_norms=ref_norms,
            )
        if final is None:
            final = ctx.assemble(state, ("u",), live_history=False)

        history = np.maximum(history, final.psi_plus)
        elastic, fracture = phase_field_energy(mesh, state, model)
        record = IncrementRecord(
            increment=k,
            load_factor=float(factor),
            displacement=float(factor * monitor_amplitude),
            force=float(final.r_u[monitor_dofs].sum()),
            iterations=iterations,
            converged=ok,
            elastic_energy=elastic,
            fracture_energy=fracture,
            phi_max=float(state.phi.max()),
            residual_initial=float(ctx.residual_initial),
            residual_final=float(ctx.residual_final),
        )
        records.append(record)
        all_ok &= ok
        if not ok and config.stop_on_nonconverged:
            raise NonConvergenceError(
                f"increment {k} did not converge within "
                f"{config.max_iterations} iterations"
            )

        if ok:
            prev_states.append((state.copy(), float(factor)))
            if len(prev_states) > 2:
                prev_states.pop(0)
        if on_increment is not None:
            on_increment(record, state, history)

    return RunResult(records, state, history, mesh, all_ok)
