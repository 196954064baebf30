# Copyright 2024 Curtin University
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Author: qbounds developers

import io
import unittest
from unittest.mock import patch

import numpy as np

from qbounds.exceptions import InconsistentEqualities, InvalidInput
from qbounds.linalg import SIGMA_Y, trace_norm
from qbounds.sdp import (
    EMBEDDED_TRACE_SCALE,
    BlockSpec,
    LmiProblem,
    IterationRecord,
    SdpSolution,
    SolverOptions,
    SolverStatus,
    eliminate_equalities,
    real_embed,
    solve,
)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def dominance_problem(z: np.ndarray) -> LmiProblem:
    """minimize tr V over real symmetric V subject to V >= Z."""

    d = z.shape[0]
    c, fs = [], []
    for u in range(d):
        for v in range(u, d):
            unit = np.zeros((d, d))
            unit[u, v] = unit[v, u] = 1.0
            fs.append(real_embed(unit))
            c.append(1.0 if u == v else 0.0)
    return LmiProblem(c=c, f0=-real_embed(z), fs=tuple(fs), blocks=(BlockSpec(2 * d, EMBEDDED_TRACE_SCALE),))


def max_eigenvalue_problem(a: np.ndarray) -> LmiProblem:
    n = a.shape[0]
    return LmiProblem(c=[1.0], f0=-a, fs=(np.eye(n),), blocks=(BlockSpec(n),))


class TestLmiProblem(unittest.TestCase):
    def test_invalid(self):
        with self.assertRaises(InvalidInput):
            LmiProblem(c=[1.0], f0=np.zeros((2, 2)), fs=(np.array([[0.0, 1.0], [0.0, 0.0]]),), blocks=(BlockSpec(2),))
        with self.assertRaises(InvalidInput):
            LmiProblem(c=[1.0], f0=np.zeros((2, 2)), fs=(np.ones((2, 2)),), blocks=(BlockSpec(1), BlockSpec(1)))
        with self.assertRaises(InvalidInput):
            LmiProblem(c=[1.0, 2.0], f0=np.zeros((2, 2)), fs=(np.eye(2),), blocks=(BlockSpec(2),))
        with self.assertRaises(InvalidInput):
            LmiProblem(c=[1.0], f0=np.zeros((3, 3)), fs=(np.eye(3),), blocks=(BlockSpec(2),))
        with self.assertRaises(InvalidInput):
            LmiProblem(c=[1.0], f0=np.zeros((2, 2)), fs=(np.eye(2),), blocks=(BlockSpec(2),), eq_matrix=[[1.0]])

    def test_from_blocks(self):
        problem = LmiProblem.from_blocks(
            c=[1.0, 0.0],
            f0_blocks=[np.eye(2), np.array([[3.0]])],
            fs_blocks=[[np.eye(2), np.zeros((1, 1))], [np.zeros((2, 2)), np.array([[1.0]])]],
            blocks=[BlockSpec(2), BlockSpec(1, label="scalar")],
        )
        self.assertEqual(3, problem.size)
        self.assertEqual(2, problem.n_vars)
        value = problem.evaluate(np.array([1.0, -1.0]))
        np.testing.assert_allclose(problem.block(value, 0), 2 * np.eye(2))
        self.assertEqual(2.0, problem.block_trace(value, 1))

    def test_embedded_trace(self):
        h = np.array([[2.0, 1j], [-1j, 3.0]])
        problem = LmiProblem(c=[], f0=real_embed(h), fs=(), blocks=(BlockSpec(4, EMBEDDED_TRACE_SCALE),))
        self.assertAlmostEqual(5.0, problem.block_trace(problem.f0, 0))


class TestRealEmbed(unittest.TestCase):
    def test_sigma_y(self):
        np.testing.assert_allclose(np.linalg.eigvalsh(real_embed(SIGMA_Y)), [-1, -1, 1, 1], atol=1e-14)

    def test_spectrum_doubles(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            h = random_hermitian(rng, int(rng.integers(1, 5)))
            expected = np.sort(np.repeat(np.linalg.eigvalsh(h), 2))
            np.testing.assert_allclose(np.linalg.eigvalsh(real_embed(h)), expected, atol=1e-10)

    def test_invalid(self):
        with self.assertRaises(InvalidInput):
            real_embed(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestEliminateEqualities(unittest.TestCase):
    def test_single_equality(self):
        problem = LmiProblem(
            c=[1.0, 1.0],
            f0=np.eye(1),
            fs=(np.zeros((1, 1)), np.zeros((1, 1))),
            blocks=(BlockSpec(1),),
            eq_matrix=[[1.0, 1.0]],
            eq_rhs=[1.0],
        )
        reduction = eliminate_equalities(problem)
        self.assertEqual(1, reduction.problem.n_vars)
        for w in (-3.0, 0.0, 2.5):
            y = reduction.recover(np.array([w]))
            self.assertAlmostEqual(1.0, y[0] + y[1], places=12)

    def test_random_equalities(self):
        rng = np.random.default_rng(2)
        e = rng.normal(size=(3, 7))
        d = rng.normal(size=3)
        problem = LmiProblem(
            c=np.ones(7),
            f0=np.eye(1),
            fs=tuple(np.zeros((1, 1)) for _ in range(7)),
            blocks=(BlockSpec(1),),
            eq_matrix=e,
            eq_rhs=d,
        )
        reduction = eliminate_equalities(problem)
        self.assertEqual(4, reduction.problem.n_vars)
        for _ in range(5):
            y = reduction.recover(rng.normal(size=4))
            self.assertLessEqual(np.linalg.norm(e @ y - d), 1e-10)

    def test_inconsistent(self):
        problem = LmiProblem(
            c=[1.0, 1.0],
            f0=np.eye(1),
            fs=(np.zeros((1, 1)), np.zeros((1, 1))),
            blocks=(BlockSpec(1),),
            eq_matrix=[[1.0, 1.0], [1.0, 1.0]],
            eq_rhs=[0.0, 1.0],
        )
        with self.assertRaises(InconsistentEqualities):
            eliminate_equalities(problem)


class TestSolve(unittest.TestCase):
    def test_scalar(self):
        problem = LmiProblem(c=[1.0], f0=-np.eye(1), fs=(np.eye(1),), blocks=(BlockSpec(1),))
        solution = solve(problem)
        self.assertEqual(SolverStatus.optimal, solution.status)
        self.assertAlmostEqual(1.0, solution.y[0], delta=1e-7)
        self.assertAlmostEqual(1.0, solution.primal_objective, delta=1e-7)
        self.assertTrue(solution.accurate(1e-7))

    def test_max_eigenvalue(self):
        rng = np.random.default_rng(4)
        for n in (2, 3, 5):
            a = rng.normal(size=(n, n))
            a = (a + a.T) / 2
            solution = solve(max_eigenvalue_problem(a))
            self.assertEqual(SolverStatus.optimal, solution.status)
            self.assertAlmostEqual(np.linalg.eigvalsh(a)[-1], solution.primal_objective, delta=1e-8)

    def test_hermitian_dominance(self):
        rng = np.random.default_rng(8)
        for d in (2, 3, 4):
            z = random_hermitian(rng, d)
            expected = np.trace(z.real) + trace_norm(z.imag)
            problem = dominance_problem(z)
            solution = solve(problem)
            self.assertEqual(SolverStatus.optimal, solution.status)
            self.assertAlmostEqual(expected, solution.primal_objective, delta=1e-7 * (1 + abs(expected)))
            self.assertGreaterEqual(np.linalg.eigvalsh(solution.s)[0], -1e-8 * (1 + np.linalg.norm(problem.f0)))

    def test_equalities(self):
        problem = LmiProblem(
            c=[1.0, 2.0],
            f0=np.zeros((2, 2)),
            fs=(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])),
            blocks=(BlockSpec(1), BlockSpec(1)),
            eq_matrix=[[1.0, 1.0]],
            eq_rhs=[1.0],
        )
        solution = solve(problem)
        self.assertEqual(SolverStatus.optimal, solution.status)
        np.testing.assert_allclose(solution.y, [1.0, 0.0], atol=1e-7)
        self.assertAlmostEqual(1.0, solution.primal_objective, delta=1e-7)
        self.assertAlmostEqual(1.0, solution.y[0] + solution.y[1], places=10)

    def test_no_free_variables(self):
        problem = LmiProblem(
            c=[1.0],
            f0=np.zeros((1, 1)),
            fs=(np.eye(1),),
            blocks=(BlockSpec(1),),
            eq_matrix=[[1.0]],
            eq_rhs=[2.0],
        )
        solution = solve(problem)
        self.assertEqual(SolverStatus.optimal, solution.status)
        self.assertAlmostEqual(2.0, solution.primal_objective, places=12)

    def test_infeasible(self):
        problem = LmiProblem(
            c=[1.0], f0=np.diag([0.0, -1.0]), fs=(np.diag([1.0, -1.0]),), blocks=(BlockSpec(1), BlockSpec(1))
        )
        solution = solve(problem, SolverOptions(max_iter=100))
        self.assertNotEqual(SolverStatus.optimal, solution.status)
        self.assertFalse(solution.accurate(1e-7))

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        problem = dominance_problem(random_hermitian(rng, 3))
        first, second = solve(problem), solve(problem)
        self.assertEqual(first.status, second.status)
        np.testing.assert_array_equal(first.y, second.y)
        self.assertEqual(first.primal_objective, second.primal_objective)

    def test_scale_invariance(self):
        rng = np.random.default_rng(10)
        problem = dominance_problem(random_hermitian(rng, 2))
        scaled = LmiProblem(c=10 * problem.c, f0=problem.f0, fs=problem.fs, blocks=problem.blocks)
        base, tenfold = solve(problem), solve(scaled)
        self.assertAlmostEqual(10 * base.primal_objective, tenfold.primal_objective, delta=1e-7 * abs(tenfold.primal_objective))

    def test_trace(self):
        problem = max_eigenvalue_problem(np.diag([1.0, 3.0]))
        with patch("sys.stderr", new_callable=io.StringIO) as stderr:
            solution = solve(problem, SolverOptions(trace=True))
        lines = stderr.getvalue().splitlines()
        self.assertEqual(len(solution.history), len(lines))
        self.assertEqual(solution.iterations + 1, len(solution.history))
        last = solution.history[-1]
        self.assertLessEqual(last.dual_objective, last.primal_objective + 1e-8)



class TestSdpSolution(unittest.TestCase):
    def stopped(self, status: SolverStatus, primal_infeasibility: float = 1e-10, gap: float = 1e-10) -> SdpSolution:
        record = IterationRecord(
            iteration=40,
            primal_objective=2.0,
            dual_objective=2.0 - gap,
            gap=gap,
            primal_infeasibility=primal_infeasibility,
            dual_infeasibility=1e-10,
        )
        return SdpSolution(
            status=status,
            y=np.array([1.0, 2.0]),
            z=np.eye(2),
            s=np.eye(2),
            primal_objective=2.0,
            dual_objective=2.0 - gap,
            iterations=40,
            primal_infeasibility=primal_infeasibility,
            dual_infeasibility=1e-10,
            history=[record],
        )

    def test_numerical_failure_at_optimum(self):
        self.assertTrue(self.stopped(SolverStatus.numerical_failure).accurate(1e-7))
        self.assertTrue(self.stopped(SolverStatus.max_iterations).accurate(1e-7))

    def test_numerical_failure_away_from_optimum(self):
        self.assertFalse(self.stopped(SolverStatus.numerical_failure, primal_infeasibility=1e-3).accurate(1e-7))
        self.assertFalse(self.stopped(SolverStatus.numerical_failure, gap=1e-4).accurate(1e-7))

    def test_infeasible_never_accurate(self):
        self.assertFalse(self.stopped(SolverStatus.infeasible).accurate(1e-7))

    def test_non_finite_iterate(self):
        solution = self.stopped(SolverStatus.numerical_failure)
        solution.y = np.array([np.nan, 1.0])
        self.assertFalse(solution.accurate(1e-7))


if __name__ == "__main__":
    unittest.main()
