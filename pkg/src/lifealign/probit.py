"""Ordered-probit health-state transition probabilities.

Each living state k has one equation per age regime (under 65 / 65 and
over).  The linear predictor is age_coeff * age + gender_coeff * female
(female coded 1), and destination probabilities are consecutive
differences of the normal CDF at the cutpoints, with death taking the
upper residual mass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .normal import standard_normal_cdf

__all__ = [
    "Gender",
    "HealthMeasure",
    "ProbitEquation",
    "ProbitCoefficientSet",
    "Covariates",
    "standard_normal_cdf",
    "transition_distribution",
    "build_transition_matrix",
    "build_all_matrices",
    "load_coefficients",
    "bundled_coefficients",
]

MAX_AGE = 99
AGE_REGIME_BOUNDARY = 65


class Gender(Enum):
    MALE = "m"
    FEMALE = "f"


class HealthMeasure(Enum):
    """Health classification: SAH (self-assessed, 4 living states) or HH
    (hampering condition, 2 living states).  State 0 is the best living
    state; death is implicit as the residual."""

    SAH = "sah"
    HH = "hh"

    @property
    def living_states(self) -> tuple[str, ...]:
        if self is HealthMeasure.SAH:
            return ("very_good", "good", "fair", "bad_very_bad")
        return ("none_slight", "severe")

    @property
    def n_states(self) -> int:
        return len(self.living_states)

    @property
    def healthy_states(self) -> tuple[int, ...]:
        """Indices of the states counted as healthy life."""
        if self is HealthMeasure.SAH:
            return (0, 1)
        return (0,)


@dataclass(frozen=True)
class ProbitEquation:
    """Cutpoints and covariate coefficients for one initial living state.

    Standard errors are carried for provenance only and never enter the
    computation.
    """

    initial_state: int
    cutpoints: tuple[float, ...]
    age_coeff: float
    gender_coeff: float
    cutpoint_std_errors: tuple[float, ...] = ()
    coeff_std_errors: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cutpoints)
        object.__setattr__(self, "cutpoints", cuts)
        if any(not np.isfinite(c) for c in cuts):
            raise ValueError("cutpoints must be finite")
        for a, b in zip(cuts, cuts[1:]):
            if a > b:
                raise ValueError(f"cutpoints must be non-decreasing, got {cuts}")
        if self.cutpoint_std_errors and len(self.cutpoint_std_errors) != len(cuts):
            raise ValueError("cutpoint_std_errors shape mismatch")

    def linear_predictor(self, age: float, gender: Gender) -> float:
        return self.age_coeff * age + self.gender_coeff * (gender is Gender.FEMALE)


@dataclass(frozen=True)
class Covariates:
    age: int
    gender: Gender

    def __post_init__(self):
        if not 0 <= self.age <= MAX_AGE:
            raise ValueError(f"age must be in [0, {MAX_AGE}], got {self.age}")


@dataclass(frozen=True)
class ProbitCoefficientSet:
    """Full coefficient set for one health measure: one equation per
    living state in each of the two age regimes."""

    measure: HealthMeasure
    under65: tuple[ProbitEquation, ...]
    over65: tuple[ProbitEquation, ...]
    age_regime_boundary: int = AGE_REGIME_BOUNDARY

    def __post_init__(self):
        n = self.measure.n_states
        for name, eqs in (("under65", self.under65), ("over65", self.over65)):
            states = sorted(eq.initial_state for eq in eqs)
            if states != list(range(n)):
                raise ValueError(
                    f"{name} must have exactly one equation per living state "
                    f"0..{n - 1}, got states {states}"
                )
            expected = len(eqs[0].cutpoints)
            if expected != n:
                raise ValueError(
                    f"{name} equations must have {n} cutpoints, got {expected}"
                )
        object.__setattr__(self, "under65", _by_state(self.under65))
        object.__setattr__(self, "over65", _by_state(self.over65))

    def equations_for_age(self, age: int) -> tuple[ProbitEquation, ...]:
        return self.under65 if age < self.age_regime_boundary else self.over65


def _by_state(eqs: Iterable[ProbitEquation]) -> tuple[ProbitEquation, ...]:
    return tuple(sorted(eqs, key=lambda e: e.initial_state))


def transition_distribution(eq: ProbitEquation, cov: Covariates) -> np.ndarray:
    """Probability distribution over destination states, best living state
    first, death last.  Entries are consecutive CDF differences at the
    cutpoints minus the linear predictor, so they sum to one exactly up
    to rounding."""
    xb = eq.linear_predictor(cov.age, cov.gender)
    cdf = np.array([standard_normal_cdf(c - xb) for c in eq.cutpoints])
    probs = np.empty(len(cdf) + 1)
    probs[0] = cdf[0]
    probs[1:-1] = np.diff(cdf)
    probs[-1] = 1.0 - cdf[-1]
    return probs


def build_transition_matrix(
    cset: ProbitCoefficientSet, age: int, gender: Gender
) -> np.ndarray:
    """Annual living-to-living transition matrix at one age.

    Column k holds the destination probabilities for initial state k;
    death probability is the complement of the column sum.  The regime is
    chosen by age at the start of the interval.
    """
    cov = Covariates(age=age, gender=gender)
    n = cset.measure.n_states
    m = np.empty((n, n))
    for eq in cset.equations_for_age(age):
        m[:, eq.initial_state] = transition_distribution(eq, cov)[:n]
    return m


def build_all_matrices(cset: ProbitCoefficientSet, gender: Gender) -> np.ndarray:
    """Transition matrices for ages 0..99, shape (100, S, S)."""
    return np.stack(
        [build_transition_matrix(cset, age, gender) for age in range(MAX_AGE + 1)]
    )


# ---------------------------------------------------------------------------
# Coefficient file I/O


def _parse_equation(record: dict, measure: HealthMeasure) -> ProbitEquation:
    try:
        state = record["state"]
        cutpoints = record["cutpoints"]
        age_coeff = record["age_coeff"]
        gender_coeff = record["gender_coeff"]
    except KeyError as exc:
        raise ValueError(f"coefficient record missing field {exc}") from exc
    try:
        state_index = measure.living_states.index(state)
    except ValueError:
        raise ValueError(
            f"unknown state {state!r} for measure {measure.value}; "
            f"expected one of {measure.living_states}"
        ) from None
    se = record.get("std_errors", {})
    return ProbitEquation(
        initial_state=state_index,
        cutpoints=tuple(cutpoints),
        age_coeff=float(age_coeff),
        gender_coeff=float(gender_coeff),
        cutpoint_std_errors=tuple(se.get("cutpoints", ())),
        coeff_std_errors=(
            float(se.get("age_coeff", 0.0)),
            float(se.get("gender_coeff", 0.0)),
        ),
    )


def _parse_blocks(doc) -> dict[str, tuple[HealthMeasure, list[ProbitEquation]]]:
    blocks = doc if isinstance(doc, list) else [doc]
    out = {}
    for block in blocks:
        measure = HealthMeasure(block["measure"])
        regime = block["regime"]
        if regime not in ("under65", "over65"):
            raise ValueError(f"regime must be 'under65' or 'over65', got {regime!r}")
        if regime in out:
            raise ValueError(f"duplicate regime block {regime!r}")
        eqs = [_parse_equation(r, measure) for r in block["equations"]]
        out[regime] = (measure, eqs)
    return out


def load_coefficients(*sources) -> ProbitCoefficientSet:
    """Load a coefficient set from one or more JSON files.

    Each file holds either a single regime block {measure, regime,
    equations} or a list of blocks; together the sources must supply both
    regimes for a single measure.
    """
    blocks: dict[str, tuple[HealthMeasure, list[ProbitEquation]]] = {}
    for src in sources:
        if isinstance(src, (str, Path)):
            with open(src, encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            doc = json.load(src)
        for regime, parsed in _parse_blocks(doc).items():
            if regime in blocks:
                raise ValueError(f"duplicate regime block {regime!r} across files")
            blocks[regime] = parsed
    missing = {"under65", "over65"} - blocks.keys()
    if missing:
        raise ValueError(f"missing regime block(s): {sorted(missing)}")
    measures = {m for m, _ in blocks.values()}
    if len(measures) != 1:
        raise ValueError("regime blocks disagree on the health measure")
    (measure,) = measures
    return ProbitCoefficientSet(
        measure=measure,
        under65=tuple(blocks["under65"][1]),
        over65=tuple(blocks["over65"][1]),
    )


def bundled_coefficients(measure: HealthMeasure) -> ProbitCoefficientSet:
    """The UK coefficient set shipped with the package."""
    pkg = resources.files("lifealign.data")
    with (
        pkg.joinpath(f"{measure.value}_under65.json").open(encoding="utf-8") as f1,
        pkg.joinpath(f"{measure.value}_over65.json").open(encoding="utf-8") as f2,
    ):
        return load_coefficients(f1, f2)
