"""Incidence-based healthy life expectancy with life-table-consistent
transition matrices."""

__version__ = "0.1.0"

from .probit import (
    Gender,
    HealthMeasure,
    ProbitCoefficientSet,
    ProbitEquation,
    Covariates,
    build_all_matrices,
    build_transition_matrix,
    bundled_coefficients,
    load_coefficients,
    standard_normal_cdf,
    transition_distribution,
)
from .lifetable import LifeTable, life_expectancy_from_survival, load_life_table
from .multistate import (
    HealthExpectancy,
    expected_years,
    healthy_life_expectancy,
    occupancy,
    state_mix_at_age,
    survival_curve,
)
from .alignment import (
    AlignmentError,
    AlignmentReport,
    RankDeficientError,
    align,
    stack,
    survival_jacobian,
    unstack,
)
from .sullivan import (
    LifeTableSchedule,
    PrevalenceSchedule,
    healthy_person_years,
    person_years,
    sullivan_hle,
)
from .simcheck import SimulationConfig, SimulationResult, cross_validate, simulate
