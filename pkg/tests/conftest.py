import numpy as np
import pytest

from lifealign.probit import Gender, HealthMeasure, bundled_coefficients, build_all_matrices

DATA = __file__.rsplit("/", 1)[0] + "/data"


@pytest.fixture(scope="session")
def sah_male_matrices():
    return build_all_matrices(bundled_coefficients(HealthMeasure.SAH), Gender.MALE)


@pytest.fixture(scope="session")
def hh_female_matrices():
    return build_all_matrices(bundled_coefficients(HealthMeasure.HH), Gender.FEMALE)


@pytest.fixture
def toy_chain():
    """Hand-sized 2-state, 3-age chain with strictly sub-stochastic columns."""
    m = np.array(
        [
            [[0.80, 0.10], [0.15, 0.70]],
            [[0.70, 0.05], [0.20, 0.60]],
            [[0.60, 0.05], [0.25, 0.50]],
        ]
    )
    return m


def enumerate_paths(matrices):
    """Exhaustive path oracle: returns (N, Z) by summing over every state
    sequence of the chain, death treated as an absorbing extra state.

    N has shape (n_ages+1, S, S): N[i][j,k] = P(alive in j at birthday i |
    born in k).  Z has shape (n_ages, S, S): expected later birthdays
    reached in j given alive in k at age a.
    """
    m = np.asarray(matrices, dtype=float)
    n_ages, s, _ = m.shape
    death = s
    # full transition matrix including death
    full = np.zeros((n_ages, s + 1, s + 1))
    full[:, :s, :s] = m
    full[:, death, :s] = 1.0 - m.sum(axis=1)
    full[:, death, death] = 1.0

    n_tensor = np.zeros((n_ages + 1, s, s))
    n_tensor[0] = np.eye(s)
    z_tensor = np.zeros((n_ages, s, s))
    for k in range(s):
        # paths from birth
        probs = {(k,): 1.0}
        for a in range(n_ages):
            nxt = {}
            for path, p in probs.items():
                cur = path[-1]
                for j in range(s + 1):
                    q = p * full[a, j, cur]
                    if q > 0.0:
                        nxt[path + (j,)] = nxt.get(path + (j,), 0.0) + q
            probs = nxt
        for path, p in probs.items():
            for i, st in enumerate(path):
                if st != death and i > 0:
                    n_tensor[i, st, k] += p
    for a in range(n_ages):
        for k in range(s):
            probs = {(k,): 1.0}
            for t in range(a, n_ages):
                nxt = {}
                for path, p in probs.items():
                    cur = path[-1]
                    if cur == death:
                        nxt[path + (death,)] = nxt.get(path + (death,), 0.0) + p
                        continue
                    for j in range(s + 1):
                        q = p * full[t, j, cur]
                        if q > 0.0:
                            nxt[path + (j,)] = nxt.get(path + (j,), 0.0) + q
                probs = nxt
            for path, p in probs.items():
                for st in path[1:]:
                    if st != death:
                        z_tensor[a, st, k] += p
    return n_tensor, z_tensor
