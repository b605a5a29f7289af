"""Cohort propagation through the annual transition matrices.

Survival curve, state-occupancy probabilities conditional on the birth
state, expected remaining years per state, and healthy/unhealthy life
expectancy.  All quantities use the whole-year convention: a person
contributes one year in state j for each birthday reached in state j.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .probit import HealthMeasure

__all__ = [
    "survival_curve",
    "occupancy",
    "expected_years",
    "state_mix_at_age",
    "healthy_life_expectancy",
    "HealthExpectancy",
    "tensor_to_csv",
]


def _check_matrices(matrices: np.ndarray) -> np.ndarray:
    m = np.asarray(matrices, dtype=float)
    if m.ndim != 3 or m.shape[1] != m.shape[2]:
        raise ValueError(f"matrices must have shape (n_ages, S, S), got {m.shape}")
    return m


def survival_curve(matrices: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Proportion of the x0 cohort surviving to each later birthday.

    Element i-1 is survival to exact age i, for i = 1..n_ages.
    """
    m = _check_matrices(matrices)
    x = np.asarray(x0, dtype=float)
    if x.shape != (m.shape[1],):
        raise ValueError(f"x0 shape {x.shape} does not match matrices {m.shape}")
    total = x.sum()
    if total <= 0.0:
        raise ValueError("x0 must have positive total mass")
    out = np.empty(m.shape[0])
    for a in range(m.shape[0]):
        x = m[a] @ x
        out[a] = x.sum() / total
    return out


def occupancy(matrices: np.ndarray) -> np.ndarray:
    """Occupancy probabilities N, shape (n_ages + 1, S, S).

    N[i][j, k] is the probability of being alive in state j on the i-th
    birthday for a cohort that started entirely in state k at birth;
    N[0] is the identity.  Column sums below 1 are cumulative mortality.
    """
    m = _check_matrices(matrices)
    n_ages, s, _ = m.shape
    out = np.empty((n_ages + 1, s, s))
    out[0] = np.eye(s)
    for a in range(n_ages):
        out[a + 1] = m[a] @ out[a]
    return out


def expected_years(matrices: np.ndarray) -> np.ndarray:
    """Expected future state-years Z, shape (n_ages, S, S).

    Z[a][j, k] is the expected number of later birthdays reached in state
    j given state k at age a.  Backward recursion Z[a] = (I + Z[a+1]) M_a
    with Z at the final age equal to the final matrix; the age-a matrix
    multiplies on the right so the chain products match the forward
    propagation x_{i+1} = M_i x_i.
    """
    m = _check_matrices(matrices)
    n_ages, s, _ = m.shape
    out = np.empty_like(m)
    out[n_ages - 1] = m[n_ages - 1]
    eye = np.eye(s)
    for a in range(n_ages - 2, -1, -1):
        out[a] = (eye + out[a + 1]) @ m[a]
    return out


def state_mix_at_age(matrices: np.ndarray, x0: np.ndarray, age: int) -> np.ndarray:
    """Distribution over living states at `age`, conditional on survival."""
    m = _check_matrices(matrices)
    x = np.asarray(x0, dtype=float)
    if not 0 <= age <= m.shape[0]:
        raise ValueError(f"age must be in [0, {m.shape[0]}], got {age}")
    for a in range(age):
        x = m[a] @ x
    total = x.sum()
    if total <= 0.0:
        raise ValueError(f"no survivors at age {age}")
    return x / total


@dataclass(frozen=True)
class HealthExpectancy:
    le: float
    hle: float
    uhle: float
    pct_healthy: float


def healthy_life_expectancy(
    matrices: np.ndarray,
    measure: HealthMeasure,
    at_age: int,
    mix: np.ndarray,
) -> HealthExpectancy:
    """Life and healthy-life expectancy at `at_age` under a state mix.

    Healthy states are very_good/good for SAH and none_slight for HH.
    """
    mix = np.asarray(mix, dtype=float)
    if abs(mix.sum() - 1.0) > 1e-9:
        raise ValueError(f"mix must sum to 1, got {mix.sum()}")
    z = expected_years(matrices)[at_age]
    healthy = list(measure.healthy_states)
    le = float(mix @ z.sum(axis=0))
    hle = float(mix @ z[healthy].sum(axis=0))
    if le == 0.0:
        raise ValueError("zero life expectancy")
    return HealthExpectancy(
        le=le, hle=hle, uhle=le - hle, pct_healthy=100.0 * hle / le
    )


def tensor_to_csv(tensor: np.ndarray, value_name: str = "value") -> str:
    """Long-format CSV (age, destination_state, birth_state, value)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["age", "destination_state", "birth_state", value_name])
    for age in range(tensor.shape[0]):
        for j in range(tensor.shape[1]):
            for k in range(tensor.shape[2]):
                w.writerow([age, j, k, repr(float(tensor[age, j, k]))])
    return buf.getvalue()
