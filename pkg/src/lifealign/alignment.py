"""Joint weighted least-squares adjustment of all transition matrices.

Finds the minimal perturbation of the stacked transition-probability
vector, in the metric of inverse squared initial values, such that the
implied survival curve equals an exogenous life table.  The constraint is
nonlinear, so the Lagrange system is solved by repeated linearization:
each pass recomputes the survival Jacobian at the current iterate and
re-solves for the cumulative update.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .lifetable import LifeTable
from .multistate import survival_curve

__all__ = [
    "stack",
    "unstack",
    "survival_jacobian",
    "align",
    "AlignmentReport",
    "RankDeficientError",
    "AlignmentError",
]


class AlignmentError(RuntimeError):
    pass


class RankDeficientError(AlignmentError):
    """The linearized constraint system is rank deficient.

    `age` is the survival age most aligned with the deficient direction,
    i.e. the constraint that cannot be moved independently.
    """

    def __init__(self, age: int):
        self.age = age
        super().__init__(
            f"constraint system is rank deficient near age {age}; the target "
            "is structurally unreachable (pass allow_rank_deficient=True for "
            "a minimum-norm solve)"
        )


@dataclass(frozen=True)
class AlignmentReport:
    iterations: int
    final_residual: float
    objective: float
    clamped_entries: int
    converged: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def stack(matrices: np.ndarray) -> np.ndarray:
    """Flatten (n_ages, S, S) matrices age-major, column-major within each
    matrix: entry (age a, column q, row r) lands at a*S*S + q*S + r."""
    m = np.asarray(matrices, dtype=float)
    return m.transpose(0, 2, 1).reshape(-1).copy()


def unstack(n: np.ndarray, n_states: int) -> np.ndarray:
    """Inverse of stack."""
    v = np.asarray(n, dtype=float)
    if v.size % (n_states * n_states) != 0:
        raise ValueError(
            f"stacked vector length {v.size} is not a multiple of {n_states}^2"
        )
    n_ages = v.size // (n_states * n_states)
    return v.reshape(n_ages, n_states, n_states).transpose(0, 2, 1).copy()


def survival_jacobian(matrices: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of the survival curve w.r.t. the stacked vector.

    Row i-1 (survival to age i), column for entry (a, q, r):
    d s_i / d(M_a)_{rq} = [1' M_{i-1}...M_{a+1}]_r [M_{a-1}...M_0 x0]_q / 1'x0
    for a < i, zero otherwise.  Prefix cohort vectors are shared across
    constraints; suffix row vectors are accumulated per constraint.
    """
    m = np.asarray(matrices, dtype=float)
    n_ages, s, _ = m.shape
    x = np.asarray(x0, dtype=float)
    total = x.sum()

    prefix = np.empty((n_ages, s))  # prefix[a] = M_{a-1}...M_0 x0
    v = x.copy()
    for a in range(n_ages):
        prefix[a] = v
        v = m[a] @ v

    jac = np.zeros((n_ages, n_ages * s * s))
    for i in range(1, n_ages + 1):
        row = np.ones(s)  # 1' M_{i-1}...M_{a+1}, built from a = i-1 down
        for a in range(i - 1, -1, -1):
            block = np.outer(prefix[a], row) / total  # (q, r) order
            jac[i - 1, a * s * s : (a + 1) * s * s] = block.reshape(-1)
            row = row @ m[a]
    return jac


def _solve_psd(
    a: np.ndarray,
    rhs: np.ndarray,
    allow_rank_deficient: bool,
    rel_threshold: float = 1e-12,
) -> np.ndarray:
    """Solve the symmetric PSD system a @ x = rhs via eigendecomposition,
    with an explicit error on rank deficiency."""
    w, q = np.linalg.eigh(a)
    cutoff = rel_threshold * w.max()
    deficient = w <= cutoff
    if deficient.any() and not allow_rank_deficient:
        null_vec = q[:, int(np.argmin(w))]
        raise RankDeficientError(age=int(np.argmax(np.abs(null_vec))) + 1)
    inv_w = np.where(deficient, 0.0, 1.0 / np.where(deficient, 1.0, w))
    return q @ (inv_w * (q.T @ rhs))


def _validate_target(s_star: np.ndarray, n_ages: int) -> np.ndarray:
    s = np.asarray(s_star, dtype=float)
    if s.shape != (n_ages,):
        raise ValueError(f"target must cover ages 1..{n_ages}, got shape {s.shape}")
    if s[0] > 1.0 or np.any(s <= 0.0):
        raise ValueError("target survival must be in (0, 1]")
    bad = np.nonzero(np.diff(s) > 0.0)[0]
    if bad.size:
        raise ValueError(
            f"target survival is increasing at age {int(bad[0]) + 2}; infeasible"
        )
    return s


def _clamp(n: np.ndarray, n_states: int) -> tuple[np.ndarray, int]:
    """Project onto valid probabilities: entries in [0,1], column sums <= 1.
    Columns exceeding unit mass are rescaled proportionally.  Returns the
    projected vector and the number of touched entries."""
    mats = unstack(n, n_states)
    clamped = int(np.sum((mats < 0.0) | (mats > 1.0)))
    mats = np.clip(mats, 0.0, 1.0)
    colsums = mats.sum(axis=1)  # (n_ages, S) sums over destination rows
    over = colsums > 1.0
    if over.any():
        clamped += int(np.sum(over))
        scale = np.where(over, 1.0 / np.where(over, colsums, 1.0), 1.0)
        mats = mats * scale[:, None, :]
    return stack(mats), clamped


def align(
    matrices0: np.ndarray,
    x0: np.ndarray,
    target: LifeTable | np.ndarray,
    tolerance: float = 1e-9,
    max_iterations: int = 100,
    damping: float = 1.0,
    allow_rank_deficient: bool = False,
) -> tuple[np.ndarray, AlignmentReport]:
    """Adjust the matrices so the survival curve matches the target.

    Returns the adjusted matrices and an AlignmentReport.  Non-convergence
    within max_iterations returns the best iterate with converged=False;
    a structurally unreachable target raises RankDeficientError.
    """
    m0 = np.asarray(matrices0, dtype=float)
    n_ages, n_states = m0.shape[0], m0.shape[1]
    s_star = target.survival if isinstance(target, LifeTable) else target
    s_star = _validate_target(s_star, n_ages)
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must be in (0, 1], got {damping}")

    n0 = stack(m0)
    weights = n0**2  # frozen at the initial vector
    scale = max(1.0, np.abs(n0).max())

    cum = np.zeros_like(n0)
    iterations = 0
    total_clamped = 0
    best_cum, best_residual = cum.copy(), np.inf
    converged = False

    for clamp_round in range(11):
        converged = False
        for _ in range(max_iterations):
            mats = unstack(n0 + cum, n_states)
            s_cur = survival_curve(mats, x0)
            residual = s_star - s_cur
            jac = survival_jacobian(mats, x0)
            gram = (jac * weights) @ jac.T
            lam = _solve_psd(gram, jac @ cum + residual, allow_rank_deficient)
            delta = weights * (jac.T @ lam) - cum
            cum = cum + damping * delta
            iterations += 1

            s_new = survival_curve(unstack(n0 + cum, n_states), x0)
            res_norm = np.abs(s_star - s_new).max()
            if res_norm < best_residual:
                best_residual, best_cum = res_norm, cum.copy()
            if res_norm <= tolerance and damping * np.abs(delta).max() <= tolerance * scale:
                converged = True
                break

        if not converged:
            cum = best_cum
            break
        clamped_n, n_clamped = _clamp(n0 + cum, n_states)
        if n_clamped == 0:
            break
        total_clamped += n_clamped
        cum = clamped_n - n0
    else:
        raise AlignmentError(
            f"probability clamping did not settle after 10 rounds "
            f"({total_clamped} entries touched); target incompatible with "
            "valid transition probabilities"
        )

    n_final = n0 + cum
    mats_final = unstack(n_final, n_states)
    final_residual = float(np.abs(s_star - survival_curve(mats_final, x0)).max())
    nz = weights > 0.0
    objective = float(0.5 * np.sum(cum[nz] ** 2 / weights[nz]))
    report = AlignmentReport(
        iterations=iterations,
        final_residual=final_residual,
        objective=objective,
        clamped_entries=total_clamped,
        converged=converged and final_residual <= tolerance,
    )
    return mats_final, report
