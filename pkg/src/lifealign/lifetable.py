"""Exogenous life tables: the survival-proportion target and aggregate
life expectancy.

CSV format: header ``age,survival`` (proportion surviving to exact age i,
ages 1..100) or ``age,qx`` (annual death probabilities, ages 0..99,
converted via cumulative products of 1 - qx).  Ages must be consecutive
integers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["LifeTable", "load_life_table", "life_expectancy_from_survival"]

N_AGES = 100


@dataclass(frozen=True)
class LifeTable:
    """Survival proportions s*_i for exact ages 1..100 (survival[i-1] = s*_i)."""

    survival: np.ndarray
    gender: str | None = None
    base_year: int | None = None

    def __post_init__(self):
        s = np.asarray(self.survival, dtype=float)
        object.__setattr__(self, "survival", s)
        s.setflags(write=False)
        if s.shape != (N_AGES,):
            raise ValueError(f"survival must cover ages 1..{N_AGES}, got {s.shape}")
        if s[0] > 1.0:
            raise ValueError(f"survival to age 1 exceeds 1: {s[0]}")
        if np.any(s <= 0.0):
            age = int(np.argmax(s <= 0.0)) + 1
            raise ValueError(f"survival must be strictly positive, non-positive at age {age}")
        bad = np.nonzero(np.diff(s) > 0.0)[0]
        if bad.size:
            raise ValueError(f"non-monotone at age {int(bad[0]) + 2}")

    def life_expectancy(self, from_age: int, half_year: bool = False) -> float:
        return life_expectancy_from_survival(self.survival, from_age, half_year)

    def serialize(self) -> str:
        """CSV text that load_life_table reads back bit-exactly."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["age", "survival"])
        for i, s in enumerate(self.survival, start=1):
            w.writerow([i, repr(float(s))])
        return buf.getvalue()


def _read_rows(source) -> tuple[list[str], list[list[str]]]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    else:
        rows = list(csv.reader(source))
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError("empty life table")
    return [c.strip().lower() for c in rows[0]], rows[1:]


def load_life_table(
    source, gender: str | None = None, base_year: int | None = None
) -> LifeTable:
    """Read and validate a life table from a CSV path or text stream."""
    header, body = _read_rows(source)
    if "survival" in header and "qx" in header:
        raise ValueError("life table must have either a survival or a qx column, not both")
    if "survival" in header:
        kind = "survival"
        first_age = 1
    elif "qx" in header:
        kind = "qx"
        first_age = 0
    else:
        raise ValueError(f"expected header age,survival or age,qx, got {header}")
    if "age" not in header:
        raise ValueError(f"expected an age column, got {header}")
    age_col = header.index("age")
    val_col = header.index(kind)

    values = np.empty(N_AGES)
    expected_age = first_age
    for row in body:
        age = int(row[age_col])
        if age != expected_age:
            raise ValueError(f"missing age {expected_age} (found {age})")
        values[age - first_age] = float(row[val_col])
        expected_age += 1
    if expected_age != first_age + N_AGES:
        raise ValueError(f"missing age {expected_age} (table ends early)")

    if kind == "qx":
        if np.any(values < 0.0) or np.any(values >= 1.0):
            raise ValueError("qx values must lie in [0, 1)")
        survival = np.cumprod(1.0 - values)
    else:
        survival = values
    return LifeTable(survival=survival, gender=gender, base_year=base_year)


def life_expectancy_from_survival(
    survival: np.ndarray, from_age: int, half_year: bool = False
) -> float:
    """Expected years lived beyond from_age, conditional on surviving to it.

    Discrete annual convention: the sum of survival probabilities to each
    later birthday.  half_year adds the conventional +0.5 adjustment for
    comparison with official actuarial tables.
    """
    s = np.asarray(survival, dtype=float)
    if not 0 <= from_age <= N_AGES - 1:
        raise ValueError(f"from_age must be in [0, {N_AGES - 1}], got {from_age}")
    base = 1.0 if from_age == 0 else s[from_age - 1]
    if base == 0.0:
        raise ValueError(f"no survivors at age {from_age}")
    le = float(np.sum(s[from_age:]) / base)
    return le + 0.5 if half_year else le
