import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from evokit.core import ConfigError, Dtype, RngStream, ShapeError, SolutionBatch
from evokit.problem import (
    Problem,
    eval_kursawe,
    eval_rastrigin,
    eval_sphere,
    kursawe_problem,
    rastrigin_problem,
    sphere_problem,
)


def test_generate_within_bounds_and_deterministic():
    p = sphere_problem(5, bounds=(-10, 10))
    b1 = p.generate_batch(200, RngStream(3))
    b2 = p.generate_batch(200, RngStream(3))
    assert np.all((b1.values >= -10) & (b1.values <= 10))
    assert not b1.evaluated.any()
    assert np.array_equal(b1.values, b2.values)


def test_degenerate_bounds_rejected():
    with pytest.raises(ConfigError):
        Problem("min", eval_sphere, 3, initial_bounds=(3.0, 3.0))
    with pytest.raises(ConfigError):
        Problem("min", eval_sphere, 3, Dtype.INT64)


def test_integer_and_boolean_initialization():
    p = Problem("min", lambda x: x.sum(axis=1).astype(float), 4, Dtype.INT64, (0, 2))
    v = p.generate_batch(2000, RngStream(1)).values
    assert v.dtype == np.int64
    # both bounds are reachable
    assert set(np.unique(v).tolist()) == {0, 1, 2}
    pb = Problem("max", lambda x: x.sum(axis=1).astype(float), 4, Dtype.BOOL)
    vb = pb.generate_batch(2000, RngStream(1)).values
    assert vb.dtype == bool and 0.45 < vb.mean() < 0.55


def test_evaluate_sphere_rows():
    p = sphere_problem(2)
    b = SolutionBatch(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert p.evaluate(b) == 0
    assert b.evals[:, 0].tolist() == [0.0, 25.0]
    assert b.evaluated.all()


def test_evaluate_empty_batch_is_noop():
    p = sphere_problem(2)
    b = SolutionBatch(np.empty((0, 2)))
    assert p.evaluate(b) == 0


def test_evaluate_wrong_fitness_shape():
    p = Problem(("min", "min"), eval_sphere, 2, initial_bounds=(-1, 1))
    with pytest.raises(ShapeError):
        p.evaluate(SolutionBatch(np.zeros((3, 2)), num_objectives=2))


def test_nonfinite_counted_not_raised():
    p = Problem("min", lambda x: np.where(x[:, 0] > 0, np.inf, 1.0), 1, initial_bounds=(-1, 1))
    b = SolutionBatch(np.array([[1.0], [-1.0], [2.0]]))
    assert p.evaluate(b) == 2
    assert np.isinf(b.evals[0, 0]) and b.evaluated.all()


@pytest.mark.parametrize("workers", [1, 2, 4, 8])
def test_evaluate_worker_invariance(workers):
    base = rastrigin_problem(30)
    values = base.generate_values(101, RngStream(5))
    reference = base.evaluate_values(values)
    assert np.array_equal(base.with_workers(workers).evaluate_values(values), reference)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_evaluation_is_row_local(seed):
    gen = np.random.default_rng(seed)
    x = gen.uniform(-5, 5, size=(17, 3))
    perm = gen.permutation(17)
    assert np.array_equal(eval_kursawe(x[perm]), eval_kursawe(x)[perm])
    assert np.array_equal(eval_rastrigin(x[perm]), eval_rastrigin(x)[perm])


def test_sphere_examples():
    assert eval_sphere(np.zeros((1, 4)))[0] == 0.0
    assert eval_sphere(np.array([[3.0, 4.0]]))[0] == 25.0
    assert eval_sphere(np.ones((1, 7)))[0] == 7.0


def test_rastrigin_examples():
    for n in (1, 5, 100):
        assert eval_rastrigin(np.zeros((1, n)))[0] == 0.0
        assert eval_rastrigin(np.full((1, n), 0.5))[0] == pytest.approx(20.25 * n, rel=1e-12)
    assert eval_rastrigin(np.array([[1.0, 1.0]]))[0] == pytest.approx(2.0, abs=1e-12)


def test_kursawe_examples():
    np.testing.assert_allclose(eval_kursawe(np.zeros((1, 3)))[0], [-20.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(eval_kursawe(np.ones((1, 3)))[0], [-15.0728, 15.6221], atol=1e-3)
    x = np.random.default_rng(0).normal(size=(50, 3))
    np.testing.assert_array_equal(eval_kursawe(-x)[:, 0], eval_kursawe(x)[:, 0])
    with pytest.raises(ShapeError):
        eval_kursawe(np.zeros((2, 4)))


def test_builtins_match_scalar_oracles():
    gen = np.random.default_rng(2024)
    for _ in range(1000 // 50):
        x = gen.uniform(-6, 6, size=(50, 3))
        np.testing.assert_allclose(eval_sphere(x), [oracles.sphere(r) for r in x], rtol=1e-12)
        np.testing.assert_allclose(eval_rastrigin(x), [oracles.rastrigin(r) for r in x], rtol=1e-12)
        np.testing.assert_allclose(eval_kursawe(x), [oracles.kursawe(r) for r in x], rtol=1e-12, atol=1e-12)


def test_kursawe_problem_layout():
    p = kursawe_problem()
    assert p.num_objectives == 2 and p.solution_length == 3
