import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA
from lifealign.probit import (
    Covariates,
    Gender,
    HealthMeasure,
    ProbitCoefficientSet,
    ProbitEquation,
    build_all_matrices,
    build_transition_matrix,
    bundled_coefficients,
    load_coefficients,
    transition_distribution,
)

# mpmath oracle (40 digits), SAH under-65 very_good, age 30, male
SAH_VG_30_M = [
    0.61562104831416912,
    0.32012346386689504,
    0.052062719130102738,
    0.011438406066563697,
    0.00075436262226940214,
]
# mpmath oracle, HH over-65 severe, age 80, female
HH_SEV_80_F = [
    0.21828450660712376,
    0.7017048542568426,
    0.080010639136033643,
]


@pytest.fixture(scope="module")
def sah():
    return bundled_coefficients(HealthMeasure.SAH)


@pytest.fixture(scope="module")
def hh():
    return bundled_coefficients(HealthMeasure.HH)


def test_measure_state_structure():
    assert HealthMeasure.SAH.n_states == 4
    assert HealthMeasure.HH.n_states == 2
    assert HealthMeasure.SAH.healthy_states == (0, 1)
    assert HealthMeasure.HH.healthy_states == (0,)


def test_frozen_sah_distribution(sah):
    eq = sah.under65[0]
    p = transition_distribution(eq, Covariates(age=30, gender=Gender.MALE))
    np.testing.assert_allclose(p, SAH_VG_30_M, atol=1e-13, rtol=0)


def test_frozen_hh_distribution(hh):
    eq = hh.over65[1]
    p = transition_distribution(eq, Covariates(age=80, gender=Gender.FEMALE))
    np.testing.assert_allclose(p, HH_SEV_80_F, atol=1e-13, rtol=0)


@settings(max_examples=200, deadline=None)
@given(
    age=st.integers(0, 99),
    gender=st.sampled_from([Gender.MALE, Gender.FEMALE]),
    measure=st.sampled_from([HealthMeasure.SAH, HealthMeasure.HH]),
    state=st.integers(0, 3),
)
def test_distribution_is_probability_vector(age, gender, measure, state):
    cset = bundled_coefficients(measure)
    eq = cset.equations_for_age(age)[state % measure.n_states]
    p = transition_distribution(eq, Covariates(age=age, gender=gender))
    assert np.all(p >= 0.0) and np.all(p <= 1.0)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_gender_effect_is_the_published_coefficient(sah):
    eq = sah.under65[0]
    xb_m = eq.linear_predictor(40, Gender.MALE)
    xb_f = eq.linear_predictor(40, Gender.FEMALE)
    assert xb_f - xb_m == pytest.approx(0.078, abs=1e-15)


def test_matrix_columns_match_distributions(sah):
    m = build_transition_matrix(sah, 30, Gender.MALE)
    assert m.shape == (4, 4)
    for k in range(4):
        p = transition_distribution(
            sah.under65[k], Covariates(age=30, gender=Gender.MALE)
        )
        np.testing.assert_allclose(m[:, k], p[:4], atol=0, rtol=0)
        assert m[:, k].sum() == pytest.approx(1.0 - p[4], abs=1e-12)


def test_regime_switch_at_65(hh):
    m64 = build_transition_matrix(hh, 64, Gender.FEMALE)
    m65 = build_transition_matrix(hh, 65, Gender.FEMALE)
    # different coefficient tables produce a visible discontinuity
    assert np.abs(m65 - m64).max() > 1e-3


def test_column_sums_substochastic(sah, hh):
    for cset, gender in [(sah, Gender.MALE), (sah, Gender.FEMALE), (hh, Gender.MALE)]:
        mats = build_all_matrices(cset, gender)
        sums = mats.sum(axis=1)
        assert np.all(sums <= 1.0 + 1e-12)
        assert np.all(sums >= 0.0)


def test_build_all_matrices_structure(sah):
    mats = build_all_matrices(sah, Gender.FEMALE)
    assert mats.shape == (100, 4, 4)
    np.testing.assert_array_equal(
        mats[30], build_transition_matrix(sah, 30, Gender.FEMALE)
    )


def test_golden_sah_male(sah):
    golden = np.load(f"{DATA}/sah_male_golden.npy")
    mats = build_all_matrices(sah, Gender.MALE)
    np.testing.assert_allclose(mats, golden, atol=1e-12, rtol=0)


def test_age_out_of_range(sah):
    with pytest.raises(ValueError):
        build_transition_matrix(sah, 100, Gender.MALE)
    with pytest.raises(ValueError):
        build_transition_matrix(sah, -1, Gender.MALE)


def test_unordered_cutpoints_rejected():
    with pytest.raises(ValueError, match="non-decreasing"):
        ProbitEquation(initial_state=0, cutpoints=(1.0, 0.5), age_coeff=0.0, gender_coeff=0.0)


def test_missing_state_rejected(sah):
    with pytest.raises(ValueError, match="one equation per living state"):
        ProbitCoefficientSet(
            measure=HealthMeasure.SAH,
            under65=sah.under65[:3],
            over65=sah.over65,
        )


def test_loader_roundtrip_and_validation(tmp_path):
    cset = bundled_coefficients(HealthMeasure.HH)
    assert cset.measure is HealthMeasure.HH
    assert len(cset.under65) == 2 and len(cset.over65) == 2

    # single file holding both regime blocks
    doc = []
    for regime, eqs in (("under65", cset.under65), ("over65", cset.over65)):
        doc.append(
            {
                "measure": "hh",
                "regime": regime,
                "equations": [
                    {
                        "state": HealthMeasure.HH.living_states[eq.initial_state],
                        "cutpoints": list(eq.cutpoints),
                        "age_coeff": eq.age_coeff,
                        "gender_coeff": eq.gender_coeff,
                    }
                    for eq in eqs
                ],
            }
        )
    combined = tmp_path / "hh.json"
    combined.write_text(json.dumps(doc))
    reloaded = load_coefficients(combined)
    for a, b in zip(reloaded.under65, cset.under65):
        assert a.cutpoints == b.cutpoints
        assert a.age_coeff == b.age_coeff

    with pytest.raises(ValueError, match="missing regime"):
        load_coefficients(io.StringIO(json.dumps(doc[0])))
    bad = dict(doc[0])
    bad["regime"] = "under70"
    with pytest.raises(ValueError, match="regime"):
        load_coefficients(io.StringIO(json.dumps([bad, doc[1]])))
