import numpy as np
import pytest

import oracles
from evokit.core import ContractError, RngStream
from evokit.ga import GeneticAlgorithm, TwoPointCrossOver
from evokit.gp import (
    NUM_OPCODES,
    Opcode,
    default_cases,
    gp_fitness,
    gp_interpret,
    gp_problem,
    opcode_mutation,
    target_quadratic,
)

X, ONE, ADD, SUB, MUL, DIV, PAD = (
    Opcode.PUSH_X,
    Opcode.PUSH_1,
    Opcode.ADD,
    Opcode.SUB,
    Opcode.MUL,
    Opcode.DIV,
    Opcode.PAD,
)


def _run(program, x):
    return gp_interpret(np.array([program]), np.array([x], dtype=float))[0, 0]


def test_examples():
    assert _run([X, X, ADD] + [PAD] * 5, 3.0) == 6.0
    assert _run([PAD] * 8, 3.0) == 0.0
    assert _run([ONE, X, DIV], 0.0) == 1.0
    # left operand is the one pushed first
    assert _run([X, ONE, SUB], 5.0) == 4.0
    assert _run([ONE, X, DIV], 4.0) == 0.25


def test_underflow_is_a_no_op():
    assert _run([X, ADD, ADD, ONE, ADD], 2.0) == 3.0
    assert _run([ADD, MUL, X], 2.0) == 2.0
    assert _run([SUB], 2.0) == 0.0


def test_invalid_opcode_rejected_before_running():
    calls = []
    with pytest.raises(ContractError):
        gp_interpret(np.array([[1, 7]]), [0.0], step_hook=calls.append)
    with pytest.raises(ContractError):
        gp_interpret(np.array([[1, -1]]), [0.0])
    assert calls == []


def test_matches_scalar_interpreter_on_random_programs():
    gen = np.random.default_rng(0)
    programs = gen.integers(0, NUM_OPCODES, size=(1000, 20))
    cases = gen.uniform(-3, 3, size=10)
    cases[0] = 0.0
    got = gp_interpret(programs, cases)
    want = np.array([[oracles.interpret_one(p, x) for x in cases] for p in programs])
    np.testing.assert_array_equal(got, want)


@pytest.mark.parametrize("pop", [1, 10, 1000])
def test_step_count_is_program_length(pop):
    steps = []
    programs = np.random.default_rng(pop).integers(0, NUM_OPCODES, size=(pop, 13))
    gp_interpret(programs, default_cases(4), step_hook=steps.append)
    assert steps == list(range(13))


def test_fitness_examples():
    exact = [X, X, MUL, X, ADD, ONE, ADD] + [PAD] * 13
    assert gp_fitness(np.array([exact]))[0, 0] == 0.0
    pad = np.zeros((1, 20), dtype=np.int64)
    assert gp_fitness(pad, target=lambda x: x * x, cases=[1.0, 2.0])[0, 0] == 8.5
    rand = np.random.default_rng(1).integers(0, NUM_OPCODES, size=(300, 20))
    f = gp_fitness(rand)
    assert f.shape == (300, 1) and np.all(f >= 0)
    np.testing.assert_allclose(target_quadratic(np.array([0.0, 1.0])), [1.0, 3.0])


def test_mutation_keeps_opcodes_valid():
    gen = np.random.default_rng(0)
    values = gen.integers(0, NUM_OPCODES, size=(200, 20))
    out = opcode_mutation()(values, gen)
    assert out.dtype == values.dtype
    assert out.min() >= 0 and out.max() < NUM_OPCODES
    assert 0 < (out != values).mean() < 0.1
    np.testing.assert_array_equal(opcode_mutation(0.0)(values, gen), values)


def test_gp_search_improves():
    problem = gp_problem()
    pop = problem.generate_batch(50, RngStream(0))
    assert pop.values.min() >= 0 and pop.values.max() == NUM_OPCODES - 1
    ga = GeneticAlgorithm(problem, popsize=200, operators=[TwoPointCrossOver(problem), opcode_mutation()], seed=3)
    start = ga.population.evals.min()
    ga.run(30)
    assert ga.population.evals.min() < start
