import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddpredict.errors import MaxIterationsWarning, NonFiniteError
from ddpredict.linalg import (SolveOptions, lasso_objective, lq_factor, make_solver, numerical_rank,
                              project_onto_rows, solve, solve_lasso, solve_min_norm, solve_ridge,
                              truncate_lq)

from conftest import cd_lasso


def normal_eq_projection(d, x):
    return x @ d.T @ np.linalg.solve(d @ d.T, d)


# -- LQ ----------------------------------------------------------------------

def test_lq_identity():
    f = lq_factor(np.eye(2), 1)
    assert np.allclose(f.l11, [[1]]) and np.allclose(f.l21, [[0]]) and np.allclose(f.l22, [[1]])
    q = np.vstack([f.q1, f.q2])
    assert np.allclose(q @ q.T, np.eye(2))


def test_lq_duplicate_rows_truncation_exact():
    a = np.array([[3.0, 4.0], [3.0, 4.0]])
    f = lq_factor(a, 1)
    assert abs(f.l22[0, 0]) < 1e-14
    assert np.allclose(truncate_lq(f), a)


def test_lq_random_reconstruction():
    a = np.random.default_rng(1).standard_normal((5, 12))
    f = lq_factor(a, 2)
    assert np.linalg.norm(f.reconstruct() - a) <= 1e-10 * np.linalg.norm(a)
    assert f.l11.shape == (2, 2) and f.l21.shape == (3, 2) and f.l22.shape == (3, 3)
    assert f.q1.shape == (2, 12) and f.q2.shape == (3, 12)


def test_lq_sign_convention():
    a = np.random.default_rng(2).standard_normal((4, 9))
    f = lq_factor(a, 2)
    assert np.all(np.diag(f.l11) >= 0) and np.all(np.diag(f.l22) >= 0)
    assert np.allclose(np.triu(f.l11, 1), 0)


@pytest.mark.parametrize("split", [0, 3, -1])
def test_lq_bad_split(split):
    with pytest.raises(ValueError):
        lq_factor(np.ones((3, 5)), split)


def test_lq_rejects_tall_and_nonfinite():
    with pytest.raises(ValueError):
        lq_factor(np.ones((4, 2)), 1)
    a = np.ones((2, 3))
    a[0, 0] = np.nan
    with pytest.raises(NonFiniteError):
        lq_factor(a, 1)


def test_truncate_rank_one():
    a = np.outer([1.0, 2.0], [1.0, -1.0, 3.0])
    assert np.allclose(truncate_lq(lq_factor(a, 1)), a)


def test_truncate_identity():
    t = truncate_lq(lq_factor(np.eye(2), 1))
    assert np.allclose(np.abs(t), [[1, 0], [0, 0]])


def test_truncation_error_equals_l22():
    a = np.random.default_rng(3).standard_normal((4, 10))
    f = lq_factor(a, 3)
    err = np.linalg.norm(a - truncate_lq(f))
    assert abs(err - np.linalg.norm(f.l22)) <= 1e-10 * np.linalg.norm(a)
    assert numerical_rank(truncate_lq(f)) <= 3


@settings(max_examples=40, deadline=None)
@given(rows=st.integers(2, 20), extra=st.integers(0, 40), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_lq_properties(rows, extra, seed, data):
    cols = rows + extra
    split = data.draw(st.integers(1, rows - 1))
    a = np.random.default_rng(seed).standard_normal((rows, cols))
    f = lq_factor(a, split)
    nrm = np.linalg.norm(a)
    q = np.vstack([f.q1, f.q2])
    assert np.linalg.norm(f.reconstruct() - a) <= 1e-10 * nrm
    assert np.linalg.norm(q @ q.T - np.eye(rows)) <= 1e-10
    assert abs(np.linalg.norm(a - truncate_lq(f)) - np.linalg.norm(f.l22)) <= 1e-10 * nrm


# -- projection ----------------------------------------------------------------

def test_project_orthogonal_row():
    assert np.allclose(project_onto_rows([[1, 0, 0]], [0, 1, 0]), 0)


def test_project_in_row_space():
    assert np.allclose(project_onto_rows([[1, 1, 1]], [2, 2, 2]), [2, 2, 2])


def test_project_matches_normal_equations():
    rng = np.random.default_rng(4)
    d, x = rng.standard_normal((3, 8)), rng.standard_normal(8)
    p = project_onto_rows(d, x)
    ref = normal_eq_projection(d, x)
    assert np.linalg.norm(p - ref) <= 1e-8 * np.linalg.norm(ref)


@settings(max_examples=30, deadline=None)
@given(rows=st.integers(1, 10), extra=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_projection_idempotent(rows, extra, seed):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((rows, rows + extra))
    x = rng.standard_normal(rows + extra)
    p = project_onto_rows(d, x)
    assert np.linalg.norm(project_onto_rows(d, p) - p) <= 1e-8 * max(1.0, np.linalg.norm(p))
    ref = normal_eq_projection(d, x)
    assert np.linalg.norm(p - ref) <= 1e-8 * max(1.0, np.linalg.norm(ref))


def test_project_dimension_errors():
    with pytest.raises(ValueError):
        project_onto_rows(np.ones((2, 4)), np.ones(3))
    with pytest.raises(ValueError):
        project_onto_rows(np.eye(3), np.ones(3))


# -- min norm ----------------------------------------------------------------

def test_min_norm_identity():
    assert np.allclose(solve_min_norm(np.eye(2), [3, 4]), [3, 4])


def test_min_norm_symmetric():
    assert np.allclose(solve_min_norm([[1.0, 1.0]], [2.0]), [1, 1])


def test_min_norm_normal_equations():
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal((4, 9)), rng.standard_normal(4)
    assert np.allclose(solve_min_norm(a, b), a.T @ np.linalg.solve(a @ a.T, b), atol=1e-9, rtol=0)


def test_min_norm_rank_deficient_and_tall():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((3, 7))
    a = np.vstack([a, a[0] + a[1]])
    b = rng.standard_normal(4)
    assert np.allclose(solve_min_norm(a, b), np.linalg.pinv(a) @ b, atol=1e-9)
    tall = rng.standard_normal((9, 4))
    bt = rng.standard_normal(9)
    assert np.allclose(solve_min_norm(tall, bt), np.linalg.pinv(tall) @ bt, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(rows=st.integers(1, 10), cols=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_min_norm_in_row_space(rows, cols, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((rows, cols)), rng.standard_normal(rows)
    g = solve_min_norm(a, b)
    pinv = np.linalg.pinv(a)
    assert np.linalg.norm((np.eye(cols) - pinv @ a) @ g) <= 1e-8 * max(1.0, np.linalg.norm(g))
    assert np.linalg.norm(g - pinv @ b) <= 1e-8 * max(1.0, np.linalg.norm(g))


def test_min_norm_rejects_nan():
    with pytest.raises(NonFiniteError):
        solve_min_norm(np.eye(2), [np.nan, 1])


# -- ridge ---------------------------------------------------------------------

def test_ridge_closed_form():
    assert np.allclose(solve_ridge(np.eye(2), [1, 0], 0.5), [0.5, 0])


def test_ridge_small_lambda_is_min_norm():
    rng = np.random.default_rng(7)
    a, b = rng.standard_normal((3, 6)), rng.standard_normal(3)
    assert np.allclose(solve_ridge(a, b, 1e-12), solve_min_norm(a, b), atol=1e-8)


@pytest.mark.parametrize("shape", [(5, 8), (8, 5)])
def test_ridge_normal_equations(shape):
    rng = np.random.default_rng(8)
    a, b = rng.standard_normal(shape), rng.standard_normal(shape[0])
    g = solve_ridge(a, b, 0.1)
    assert np.linalg.norm((a.T @ a + 0.2 * np.eye(shape[1])) @ g - a.T @ b) <= 1e-9


def test_ridge_needs_positive_lambda():
    with pytest.raises(ValueError):
        solve_ridge(np.eye(2), [1, 1], 0.0)


# -- lasso ---------------------------------------------------------------------

def test_lasso_soft_threshold():
    assert np.allclose(solve_lasso(np.eye(2), [2.0, 0.5], 1.0), [1.0, 0.0], atol=1e-7)


def test_lasso_full_shrinkage():
    rng = np.random.default_rng(9)
    a, b = rng.standard_normal((4, 6)), rng.standard_normal(4)
    lam = np.abs(a.T @ b).max()
    assert np.all(solve_lasso(a, b, lam) == 0)


def test_lasso_matches_coordinate_descent():
    rng = np.random.default_rng(10)
    a, b = rng.standard_normal((5, 8)), rng.standard_normal(5)
    g = solve_lasso(a, b, 0.2)
    ref = cd_lasso(a, b, 0.2)
    assert abs(lasso_objective(a, b, g, 0.2) - lasso_objective(a, b, ref, 0.2)) <= 1e-6


def test_lasso_subgradient_conditions():
    rng = np.random.default_rng(11)
    a, b = rng.standard_normal((5, 8)), rng.standard_normal(5)
    lam = 0.2
    g = solve_lasso(a, b, lam)
    grad = a.T @ (a @ g - b)
    nz = g != 0
    assert np.all(np.abs(grad[~nz]) <= lam + 1e-6)
    assert np.allclose(grad[nz], -lam * np.sign(g[nz]), atol=1e-6)


@pytest.mark.parametrize("accelerated", [False, True])
def test_lasso_objective_monotone(accelerated):
    rng = np.random.default_rng(12)
    a, b = rng.standard_normal((6, 10)), rng.standard_normal(6)
    objs = []
    opts = SolveOptions("lasso", 0.1, accelerated=accelerated)
    solve_lasso(a, b, 0.1, opts, callback=lambda g: objs.append(lasso_objective(a, b, g, 0.1)))
    assert len(objs) > 5
    assert np.all(np.diff(objs) <= 1e-12)


def test_accelerated_lasso_agrees():
    rng = np.random.default_rng(17)
    a, b = rng.standard_normal((7, 40)), rng.standard_normal(7)
    g = solve_lasso(a, b, 0.05, SolveOptions("lasso", 0.05, max_iters=100_000, accelerated=True))
    ref = cd_lasso(a, b, 0.05)
    assert abs(lasso_objective(a, b, g, 0.05) - lasso_objective(a, b, ref, 0.05)) <= 1e-6


def test_lasso_max_iterations_warns():
    rng = np.random.default_rng(13)
    a, b = rng.standard_normal((5, 8)), rng.standard_normal(5)
    with pytest.warns(MaxIterationsWarning):
        g = solve_lasso(a, b, 0.01, SolveOptions("lasso", 0.01, max_iters=3))
    assert np.all(np.isfinite(g))


# -- dispatch and rank ----------------------------------------------------------

def test_lambda_zero_forces_min_norm():
    rng = np.random.default_rng(14)
    a, b = rng.standard_normal((3, 7)), rng.standard_normal(3)
    for mode in ("ridge", "lasso"):
        assert np.allclose(solve(a, b, SolveOptions(mode, 0.0)), solve_min_norm(a, b))


def test_make_solver_reuse():
    rng = np.random.default_rng(15)
    a = rng.standard_normal((3, 7))
    s = make_solver(a, SolveOptions("ridge", 0.3))
    for _ in range(3):
        b = rng.standard_normal(3)
        assert np.allclose(s(b), solve_ridge(a, b, 0.3))


def test_solve_options_validation():
    with pytest.raises(ValueError):
        SolveOptions("ridge", -1.0)
    with pytest.raises(ValueError):
        SolveOptions("bogus")
    with pytest.raises(ValueError):
        SolveOptions(max_iters=0)


def test_numerical_rank_examples():
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.outer([1.0, 2, 3], [4.0, 5, 6, 7])) == 1
    with pytest.raises(ValueError):
        numerical_rank(np.eye(2), tol=1.5)


def test_no_warnings_on_clean_solves():
    rng = np.random.default_rng(16)
    a, b = rng.standard_normal((4, 6)), rng.standard_normal(4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_lasso(a, b, 0.5)
