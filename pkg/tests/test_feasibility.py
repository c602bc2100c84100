import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logspect import (
    FeasibilityReport,
    FilterSpec,
    GraphEnsembleSpec,
    InfeasibleError,
    ParameterError,
    delta_min,
    infeasibility_frequency,
    rank_certificate,
    solve_rspect,
    true_covariance,
)
from logspect.feasibility import feasibility_report
from conftest import connected_er, small_instance
from oracles import A_explicit, B_explicit, pairs_lower_colmajor


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2))
def test_m2_closed_form(h11, h22, h12):
    # shift to make C positive definite; the commutator ignores the shift
    C = np.array([[h11, h12], [h12, h22]])
    C = C + (abs(np.linalg.eigvalsh(C)).max() + 1) * np.eye(2)
    assert delta_min(C) == pytest.approx(math.sqrt(2) * abs(h11 - h22), abs=1e-8)


def test_m2_rank_certificate():
    assert rank_certificate(np.array([[2.0, 0.3], [0.3, 0.5]])) == (1, True)
    assert rank_certificate(np.array([[1.0, 0.3], [0.3, 1.0]])) == (0, False)


def test_exact_covariance_is_rank_deficient_and_feasible(rng):
    g = connected_er(6, 0.5, rng)
    C = true_covariance(FilterSpec.lowpass_exp(), g)
    rank, full = rank_certificate(C)
    assert not full and rank < 15
    assert delta_min(C) < 1e-6 * np.abs(C.eigh[0]).max()


def _kkt_gap(C, S):
    """Violation of the first-order conditions of min ||K y||^2 on the set
    {y >= 0, first-row pairs sum to 1}, computed with explicit matrices."""
    m = C.shape[0]
    P = pairs_lower_colmajor(m)
    y = np.array([S[i, j] for i, j in P])
    K = A_explicit(C) @ B_explicit(m)
    g = 2 * K.T @ (K @ y)
    first = np.array([j == 0 for _, j in P])
    mu = np.min(g[first])  # multiplier of the sum constraint
    r = np.concatenate([g[first] - mu, g[~first]])
    yy = np.concatenate([y[first], y[~first]])
    # complementarity and dual feasibility, scaled by ||K||^2
    return max(np.max(np.abs(r * yy)), -min(0.0, r.min())) / np.linalg.norm(K, 2) ** 2, y, first


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.integers(3, 6))
def test_delta_min_satisfies_kkt(seed, m):
    rng = np.random.default_rng(seed)
    _, C, _ = small_instance(rng, m=m, n=30)
    info = delta_min(C, return_info=True)
    gap, y, first = _kkt_gap(C.C, info.S)
    assert gap < 1e-6
    assert np.all(y >= 0) and y[first].sum() == pytest.approx(1.0, abs=1e-12)
    K = A_explicit(C.C) @ B_explicit(m)
    assert info.value == pytest.approx(np.linalg.norm(K @ y), rel=1e-9, abs=1e-12)


def test_rspect_switches_at_delta_min(rng):
    _, C, _ = small_instance(rng, m=5, n=50)
    dmin = delta_min(C)
    assert dmin > 0
    with pytest.raises(InfeasibleError) as e:
        solve_rspect(C, 0.99 * dmin)
    assert e.value.delta_min == pytest.approx(dmin)
    r = solve_rspect(C, 1.01 * dmin)
    assert r.S_hat.W[0].sum() == pytest.approx(1.0)


@given(st.floats(-50, 50))
def test_identity_shift_invariance(shift):
    rng = np.random.default_rng(4)
    _, C, _ = small_instance(rng, m=5, n=40)
    shifted = C.C + (shift + abs(min(shift, 0)) + 1.0) * np.eye(5)
    assert delta_min(shifted) == pytest.approx(delta_min(C), rel=1e-6)


def test_report_and_validation(rng):
    _, C, _ = small_instance(rng, m=4, n=20)
    rep = feasibility_report(C)
    assert rep.certificate_kind == ("RankCertificate" if rep.full_column_rank else "DeltaMinOnly")
    assert '"delta_min"' in rep.to_json()
    with pytest.raises(ParameterError):
        FeasibilityReport(4, 99, False, 0.0, "DeltaMinOnly")
    with pytest.raises(ParameterError):
        FeasibilityReport(4, 1, False, -1.0, "DeltaMinOnly")
    with pytest.raises(ParameterError):
        FeasibilityReport(4, 1, False, 0.0, "Other")
    with pytest.raises(ParameterError):
        delta_min(np.eye(1))


def test_iteration_cap_warns(rng):
    _, C, _ = small_instance(rng, m=6, n=30)
    with pytest.warns(RuntimeWarning, match="iteration cap"):
        delta_min(C, max_iters=3)


def test_frequency_interface():
    ens = GraphEnsembleSpec("ER", 8, 0.3)
    with pytest.raises(ParameterError):
        infeasibility_frequency(ens, trials=0)
    with pytest.raises(ParameterError):
        infeasibility_frequency(ens, n_samples=0)
    f, mean, vals = infeasibility_frequency(ens, n_samples=20, trials=6, seed=3, return_values=True)
    assert 0 <= f <= 1 and vals.shape == (6,) and mean == pytest.approx(vals.mean())
    f2, mean2 = infeasibility_frequency(ens, n_samples=20, trials=6, seed=3, workers=3)
    assert (f2, mean2) == (f, mean)
    # exact covariances are feasible; the first-order solver gets within
    # about 1e-7 of the covariance scale (a few hundred here)
    f_exact, _, v = infeasibility_frequency(ens, FilterSpec.quadratic(), n_samples=None, trials=4,
                                            tol_pos=1e-3, return_values=True)
    assert f_exact == 0.0 and np.all(v < 1e-4)
