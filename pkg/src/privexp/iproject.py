"""Information projection onto intersections of fixed-marginal families.

``i_project`` runs cyclic iterative scaling: each step rescales the current
tensor so one marginal matches its target exactly. For linear
(fixed-marginal) constraint families this is coordinate ascent on the
concave dual of the projection problem, so the dual objective is
nondecreasing step by step and converges to the primal minimum; the solver
asserts that certificate every sweep. The primal value D(iterate || ref) is
*not* monotone in general and is only reported.

``brute_force_i_project`` is the independent oracle: it parameterizes the
feasible polytope explicitly (particular solution plus null-space basis) and
takes an exhaustive grid minimum. It refuses problems with more than three
free dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog
from scipy.special import xlogy

from .errors import DimensionMismatch, Infeasible, SupportMismatch, TooLarge
from .probcore import JointPmf, _check_weights, _kl_bits

__all__ = [
    "MarginalConstraint",
    "IProjectionResult",
    "i_project",
    "brute_force_i_project",
]

_LOG2E = math.log2(math.e)

PLATEAU_SWEEPS = 100
ORACLE_MAX_FREE_DIM = 3


@dataclass(frozen=True, eq=False)
class MarginalConstraint:
    """Fixes the marginal over ``axes`` (names in the reference) to ``target``."""

    axes: tuple[str, ...]
    target: np.ndarray
    name: str = ""

    def __post_init__(self):
        t = np.asarray(self.target, dtype=float)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "axes", tuple(self.axes))
        if t.ndim != len(self.axes):
            raise DimensionMismatch(
                f"target rank {t.ndim} does not match {len(self.axes)} axes"
            )
        _check_weights(t.reshape(-1), f"constraint target {self.name or self.axes}")


@dataclass(frozen=True, eq=False)
class IProjectionResult:
    min_kl: float
    argmin: JointPmf
    iterations: int
    converged: bool
    residual: float = 0.0
    # dual ascent certificate, one value per sweep (nondecreasing)
    dual_trace: tuple = field(default_factory=tuple)
    # primal D(iterate || ref) per sweep; informational only
    primal_trace: tuple = field(default_factory=tuple)


def _constraint_views(reference: JointPmf, constraints) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Resolve axis names and reorder targets to ascending axis order."""
    views = []
    for c in constraints:
        ids = tuple(reference.axis_index(a) for a in c.axes)
        if len(set(ids)) != len(ids):
            raise DimensionMismatch(f"constraint repeats an axis: {c.axes}")
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        target = np.transpose(np.asarray(c.target, dtype=float), axes=order)
        sorted_ids = tuple(ids[i] for i in order)
        shape = tuple(reference.shape[i] for i in sorted_ids)
        if target.shape != shape:
            raise DimensionMismatch(
                f"constraint on {c.axes}: target shape {c.target.shape} "
                f"does not match reference axes {shape}"
            )
        views.append((sorted_ids, target))
    return views


def _marginal(P: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    drop = tuple(i for i in range(P.ndim) if i not in keep)
    return P.sum(axis=drop)


def _expand(arr: np.ndarray, keep: tuple[int, ...], ndim: int) -> np.ndarray:
    idx = [None] * ndim
    for axis in keep:
        idx[axis] = slice(None)
    return arr[tuple(idx)]


def i_project(
    reference: JointPmf,
    constraints,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> IProjectionResult:
    """Minimize D(P || reference) over all P matching the constraint marginals.

    Raises SupportMismatch when a constraint needs mass where the reference
    marginal has none, and Infeasible when residuals stop shrinking above
    ``tol`` (contradictory constraints) or ``max_iter`` sweeps pass.
    """
    ref = np.asarray(reference.probs, dtype=float)
    views = _constraint_views(reference, constraints)
    if not views:
        return IProjectionResult(0.0, reference, 0, True, 0.0, (), ())

    for keep, target in views:
        m = _marginal(ref, keep)
        if np.any((target > 0) & (m <= 0)):
            raise SupportMismatch(
                f"constraint on axes {keep} requires mass outside the reference support"
            )

    P = ref.copy()
    dual = 0.0
    dual_trace: list[float] = []
    primal_trace: list[float] = []
    best_resid = math.inf
    stall = 0

    for sweep in range(1, int(max_iter) + 1):
        for keep, target in views:
            cur = _marginal(P, keep)
            dead = (target > 0) & (cur <= 0)
            if np.any(dead):
                raise SupportMismatch(
                    f"constraint on axes {keep} lost support during scaling; "
                    "constraints are jointly unsatisfiable on this reference"
                )
            ratio = np.where(cur > 0, target / np.where(cur > 0, cur, 1.0), 0.0)
            P *= _expand(ratio, keep, P.ndim)
            pos = target > 0
            dual += float((target[pos] * np.log2(ratio[pos])).sum())

        resid = max(
            0.5 * np.abs(_marginal(P, keep) - target).sum() for keep, target in views
        )
        if dual_trace:
            assert dual >= dual_trace[-1] - 1e-8, (
                f"dual certificate decreased at sweep {sweep}: "
                f"{dual_trace[-1]} -> {dual}"
            )
        dual_trace.append(dual)
        primal_trace.append(_kl_bits(P.reshape(-1), ref.reshape(-1)))

        if resid <= tol:
            total = P.sum()
            P = P / total  # guards float drift only; mass is 1 by construction
            return IProjectionResult(
                min_kl=_kl_bits(P.reshape(-1), ref.reshape(-1)),
                argmin=JointPmf(P, reference.axes, reference.alphabets),
                iterations=sweep,
                converged=True,
                residual=float(resid),
                dual_trace=tuple(dual_trace),
                primal_trace=tuple(primal_trace),
            )

        if resid < best_resid - 1e-14:
            best_resid = resid
            stall = 0
        else:
            stall += 1
            if stall >= PLATEAU_SWEEPS:
                raise Infeasible(
                    f"residual plateaued at {resid:.3e} > tol={tol:.1e} "
                    f"after {sweep} sweeps"
                )

    raise Infeasible(f"residual {best_resid:.3e} still above tol after {max_iter} sweeps")


# ---------------------------------------------------------------------------
# exhaustive oracle


def _constraint_system(reference: JointPmf, views) -> tuple[np.ndarray, np.ndarray]:
    """Linear system A p = b over flattened tensors (includes total mass)."""
    shape = reference.shape
    ncells = int(np.prod(shape))
    rows = [np.ones(ncells)]
    rhs = [1.0]
    for keep, target in views:
        grid = np.indices(shape).reshape(len(shape), ncells)
        for cell in np.ndindex(target.shape):
            sel = np.ones(ncells, dtype=bool)
            for axis, value in zip(keep, cell):
                sel &= grid[axis] == value
            rows.append(sel.astype(float))
            rhs.append(float(target[cell]))
    return np.vstack(rows), np.asarray(rhs)


def brute_force_i_project(
    reference: JointPmf,
    constraints,
    grid_step: float = 1e-3,
) -> IProjectionResult:
    """Exhaustive grid minimum of D(P || reference) over the feasible polytope.

    The polytope is written as ``x0 + N t`` with ``N`` an orthonormal
    null-space basis, so ``grid_step`` is a Euclidean step in probability
    space. Free dimension above ORACLE_MAX_FREE_DIM raises TooLarge.
    """
    ref = np.asarray(reference.probs, dtype=float).reshape(-1)
    views = _constraint_views(reference, constraints)
    A, b = _constraint_system(reference, views)

    feas = linprog(
        c=np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=(0.0, 1.0), method="highs"
    )
    if not feas.success:
        raise Infeasible("constraint polytope is empty")
    x0 = np.clip(feas.x, 0.0, None)

    N = null_space(A)
    d = N.shape[1]
    if d > ORACLE_MAX_FREE_DIM:
        raise TooLarge(f"free dimension {d} exceeds oracle limit {ORACLE_MAX_FREE_DIM}")

    if d == 0:
        cand = x0[None, :]
    else:
        spans = []
        for i in range(d):
            lo = linprog(
                c=np.eye(d)[i], A_ub=-N, b_ub=x0, bounds=(None, None), method="highs"
            )
            hi = linprog(
                c=-np.eye(d)[i], A_ub=-N, b_ub=x0, bounds=(None, None), method="highs"
            )
            if not (lo.success and hi.success):
                raise Infeasible("could not bound the feasible polytope")
            spans.append((float(lo.x[i]) - grid_step, float(hi.x[i]) + grid_step))
        axes_pts = [
            np.arange(lo, hi + grid_step / 2, grid_step) for lo, hi in spans
        ]
        mesh = np.meshgrid(*axes_pts, indexing="ij")
        T = np.stack([m.reshape(-1) for m in mesh], axis=1)
        cand = x0[None, :] + T @ N.T

    ok = np.all(cand >= -1e-12, axis=1)
    cand = np.clip(cand[ok], 0.0, None)
    if cand.shape[0] == 0:
        raise Infeasible("no grid point fell inside the polytope; shrink grid_step")

    support = ref > 0
    values = np.full(cand.shape[0], np.inf)
    leak = cand[:, ~support].sum(axis=1) if (~support).any() else np.zeros(cand.shape[0])
    inside = leak <= 1e-12
    block = cand[inside][:, support]
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = xlogy(block, block / ref[support]).sum(axis=1) * _LOG2E
    values[inside] = contrib

    best = int(np.argmin(values))  # first occurrence: lexicographic tie-break
    total = cand[best].sum()
    argmin = (cand[best] / total).reshape(reference.shape)
    return IProjectionResult(
        min_kl=float(values[best]),
        argmin=JointPmf(argmin, reference.axes, reference.alphabets),
        iterations=int(cand.shape[0]),
        converged=True,
        residual=0.0,
    )
