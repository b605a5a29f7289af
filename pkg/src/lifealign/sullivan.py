"""Prevalence-based (Sullivan) healthy life expectancy.

Person-years in each age group come from the life-table identity
L = e_x l_x - e_{x+n} l_{x+n}; healthy person-years discount each group
by its ill-health prevalence; HLE is their sum divided by survivors at
the starting age.  Beyond the table end, l and e are taken as zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LifeTableSchedule",
    "PrevalenceSchedule",
    "person_years",
    "healthy_person_years",
    "sullivan_hle",
    "load_schedule",
    "load_prevalence",
]


@dataclass(frozen=True)
class LifeTableSchedule:
    """Survivors l_x and remaining life expectancy e_x at exact ages."""

    ages: tuple[int, ...]
    survivors: tuple[float, ...]
    expectancy: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.ages) == len(self.survivors) == len(self.expectancy)):
            raise ValueError("schedule columns must have equal length")
        if list(self.ages) != sorted(set(self.ages)):
            raise ValueError("ages must be strictly increasing")
        l = np.asarray(self.survivors)
        if np.any(np.diff(l) > 0.0):
            age = self.ages[int(np.argmax(np.diff(l) > 0.0)) + 1]
            raise ValueError(f"survivors increase at age {age}")

    def at(self, age: int) -> tuple[float, float]:
        """(l, e) at an exact age; (0, 0) beyond the table end."""
        if age > self.ages[-1]:
            return 0.0, 0.0
        try:
            i = self.ages.index(age)
        except ValueError:
            raise ValueError(f"age {age} not present in the schedule") from None
        return self.survivors[i], self.expectancy[i]


@dataclass(frozen=True)
class PrevalenceSchedule:
    """Proportion in ill-health per age group [age_from, age_to)."""

    age_from: tuple[int, ...]
    age_to: tuple[int, ...]
    rate: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.age_from) == len(self.age_to) == len(self.rate)):
            raise ValueError("prevalence columns must have equal length")
        for lo, hi, d in zip(self.age_from, self.age_to, self.rate):
            if hi <= lo:
                raise ValueError(f"empty age group [{lo}, {hi})")
            if not 0.0 <= d <= 1.0:
                raise ValueError(f"ill-health rate {d} outside [0, 1]")
        for hi, lo_next in zip(self.age_to, self.age_from[1:]):
            if hi != lo_next:
                raise ValueError(
                    f"age groups must partition the range: gap/overlap at {hi}/{lo_next}"
                )


def person_years(schedule: LifeTableSchedule, x: int, n: int) -> float:
    """Average person-years lived in [x, x+n) in the stationary population."""
    lx, ex = schedule.at(x)
    ln, en = schedule.at(x + n)
    out = ex * lx - en * ln
    if out < 0.0:
        raise ValueError(f"inconsistent schedule: negative person-years in [{x}, {x + n})")
    return out


def healthy_person_years(years: float, ill_rate: float) -> float:
    """Person-years lived without ill-health."""
    return years * (1.0 - ill_rate)


def sullivan_hle(
    schedule: LifeTableSchedule, prevalence: PrevalenceSchedule, from_age: int
) -> float:
    """Healthy life expectancy at from_age by Sullivan's method."""
    if from_age not in prevalence.age_from:
        raise ValueError(f"from_age {from_age} is not an age-group boundary")
    l_from, _ = schedule.at(from_age)
    if l_from == 0.0:
        raise ValueError(f"no survivors at age {from_age}")
    total = 0.0
    for lo, hi, d in zip(prevalence.age_from, prevalence.age_to, prevalence.rate):
        if lo < from_age:
            continue
        total += healthy_person_years(person_years(schedule, lo, hi - lo), d)
    return total / l_from


def load_schedule(source) -> LifeTableSchedule:
    """CSV with header age,lx,ex."""
    rows = _read_csv(source, ("age", "lx", "ex"))
    return LifeTableSchedule(
        ages=tuple(int(r[0]) for r in rows),
        survivors=tuple(float(r[1]) for r in rows),
        expectancy=tuple(float(r[2]) for r in rows),
    )


def load_prevalence(source) -> PrevalenceSchedule:
    """CSV with header age_from,age_to,ill_health_rate."""
    rows = _read_csv(source, ("age_from", "age_to", "ill_health_rate"))
    return PrevalenceSchedule(
        age_from=tuple(int(r[0]) for r in rows),
        age_to=tuple(int(r[1]) for r in rows),
        rate=tuple(float(r[2]) for r in rows),
    )


def _read_csv(source, columns: tuple[str, ...]) -> list[list[str]]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    else:
        rows = list(csv.reader(source))
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError("empty input")
    header = [c.strip().lower() for c in rows[0]]
    try:
        idx = [header.index(c) for c in columns]
    except ValueError:
        raise ValueError(f"expected header {','.join(columns)}, got {header}") from None
    return [[r[i] for i in idx] for r in rows[1:]]
