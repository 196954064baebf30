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

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from qbounds.exceptions import InconsistentEqualities, InvalidInput

EMBEDDED_TRACE_SCALE = 0.5


class SolverStatus(Enum):
    optimal = "Optimal"
    max_iterations = "MaxIterations"
    infeasible = "Infeasible"
    numerical_failure = "NumericalFailure"


@dataclass(frozen=True)
class BlockSpec:
    """Metadata of one diagonal block of an LMI.

    :param size: number of rows of the block.
    :param trace_scale: factor that converts the trace of the block to the trace of the matrix it
        represents; 0.5 for real embeddings of Hermitian blocks.
    :param label: optional name used in logs.
    """

    size: int
    trace_scale: float = 1.0
    label: str = ""


@dataclass(frozen=True)
class LmiProblem:
    """minimize c.y + offset subject to F0 + sum_i y_i F_i >= 0 and E y = d.

    :param c: objective vector of length m.
    :param f0: constant symmetric block-diagonal matrix.
    :param fs: m symmetric block-diagonal coefficient matrices.
    :param blocks: block structure of the constraint matrices.
    :param eq_matrix: optional p x m equality matrix E.
    :param eq_rhs: optional right-hand side d of length p.
    :param objective_offset: constant added to the objective.
    """

    c: np.ndarray
    f0: np.ndarray
    fs: Tuple[np.ndarray, ...]
    blocks: Tuple[BlockSpec, ...]
    eq_matrix: Optional[np.ndarray] = None
    eq_rhs: Optional[np.ndarray] = None
    objective_offset: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        f0 = np.asarray(self.f0, dtype=float)
        fs = tuple(np.asarray(f, dtype=float) for f in self.fs)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "fs", fs)
        object.__setattr__(self, "blocks", tuple(self.blocks))

        n = sum(block.size for block in self.blocks)
        if f0.shape != (n, n):
            raise InvalidInput(f"LmiProblem: f0 has shape {f0.shape}, blocks describe size {n}")
        if len(fs) != c.shape[0]:
            raise InvalidInput(f"LmiProblem: {len(fs)} coefficient matrices for {c.shape[0]} variables")
        mask = self._off_block_mask()
        for name, f in [("f0", f0)] + [(f"fs[{i}]", f) for i, f in enumerate(fs)]:
            if f.shape != (n, n) or not np.all(np.isfinite(f)):
                raise InvalidInput(f"LmiProblem: {name} must be a finite {n}x{n} matrix")
            if np.max(np.abs(f - f.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(f), initial=0.0)):
                raise InvalidInput(f"LmiProblem: {name} is not symmetric")
            if np.any(f[mask] != 0):
                raise InvalidInput(f"LmiProblem: {name} has entries outside its diagonal blocks")

        if (self.eq_matrix is None) != (self.eq_rhs is None):
            raise InvalidInput("LmiProblem: eq_matrix and eq_rhs must be given together")
        if self.eq_matrix is not None:
            eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
            eq_rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
            if eq_matrix.shape != (eq_rhs.shape[0], c.shape[0]):
                raise InvalidInput(f"LmiProblem: equality matrix has shape {eq_matrix.shape}")
            object.__setattr__(self, "eq_matrix", eq_matrix)
            object.__setattr__(self, "eq_rhs", eq_rhs)

    def _off_block_mask(self) -> np.ndarray:
        n = sum(block.size for block in self.blocks)
        mask = np.ones((n, n), dtype=bool)
        start = 0
        for block in self.blocks:
            mask[start : start + block.size, start : start + block.size] = False
            start += block.size
        return mask

    @staticmethod
    def from_blocks(
        c: Sequence[float],
        f0_blocks: Sequence[np.ndarray],
        fs_blocks: Sequence[Sequence[np.ndarray]],
        blocks: Sequence[BlockSpec],
        eq_matrix: Optional[np.ndarray] = None,
        eq_rhs: Optional[np.ndarray] = None,
        objective_offset: float = 0.0,
    ) -> LmiProblem:
        """Assemble a problem from per-block matrices.

        :param c: objective vector.
        :param f0_blocks: constant matrix of each block.
        :param fs_blocks: for each variable, its coefficient matrix in each block.
        :param blocks: block metadata.
        :return: the problem with dense block-diagonal matrices.
        """

        return LmiProblem(
            c=np.asarray(c, dtype=float),
            f0=scipy.linalg.block_diag(*f0_blocks),
            fs=tuple(scipy.linalg.block_diag(*per_block) for per_block in fs_blocks),
            blocks=tuple(blocks),
            eq_matrix=eq_matrix,
            eq_rhs=eq_rhs,
            objective_offset=objective_offset,
        )

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def size(self) -> int:
        return self.f0.shape[0]

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        if self.n_vars == 0:
            return self.f0.copy()
        return self.f0 + np.tensordot(np.asarray(y, dtype=float), np.array(self.fs), axes=1)

    def objective(self, y: np.ndarray) -> float:
        return float(self.c @ np.asarray(y, dtype=float)) + self.objective_offset

    def block(self, matrix: np.ndarray, k: int) -> np.ndarray:
        start = sum(block.size for block in self.blocks[:k])
        size = self.blocks[k].size
        return matrix[start : start + size, start : start + size]

    def block_trace(self, matrix: np.ndarray, k: int) -> float:
        """Trace of block k, converted to the trace of the matrix the block represents."""

        return self.blocks[k].trace_scale * float(np.trace(self.block(matrix, k)))


@dataclass(frozen=True)
class EliminatedProblem:
    """An equality-free problem in w, with y = particular + basis @ w."""

    problem: LmiProblem
    particular: np.ndarray
    basis: np.ndarray

    def recover(self, w: np.ndarray) -> np.ndarray:
        return self.particular + self.basis @ np.asarray(w, dtype=float)


@dataclass
class SolverOptions:
    gap_tol: float = 1e-9
    feas_tol: float = 1e-9
    max_iter: int = 200
    step_frac: float = 0.98
    trace: bool = False


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    primal_objective: float
    dual_objective: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float


@dataclass
class SdpSolution:
    """Result of solve.

    :param status: termination status.
    :param y: primal variables in the original (non-eliminated) space.
    :param z: dual matrix.
    :param s: F(y) at the returned point.
    :param primal_objective: c.y + offset.
    :param dual_objective: -Tr(F0 Z) + offset of the equality-free problem.
    :param iterations: number of iterations performed.
    :param history: per-iteration records.
    """

    status: SolverStatus
    y: np.ndarray
    z: np.ndarray
    s: np.ndarray
    primal_objective: float
    dual_objective: float
    iterations: int
    primal_infeasibility: float = 0.0
    dual_infeasibility: float = 0.0
    history: List[IterationRecord] = field(default_factory=list)

    @property
    def relative_gap(self) -> float:
        return abs(self.primal_objective - self.dual_objective) / (1 + abs(self.primal_objective))

    def accurate(self, tol: float) -> bool:
        """True when the last iterate has duality gap, complementarity and both infeasibilities below tol.

        A numerical failure keeps the last iterate it could factorise, so it is judged the same way.
        """

        if self.status == SolverStatus.infeasible or not np.all(np.isfinite(self.y)):
            return False
        complementarity = self.history[-1].gap / (1 + abs(self.primal_objective)) if self.history else 0.0
        return (
            self.relative_gap <= tol
            and complementarity <= tol
            and self.primal_infeasibility <= tol
            and self.dual_infeasibility <= tol
        )


def real_embed(h) -> np.ndarray:
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.

    H is PSD iff the embedding is PSD. Each eigenvalue of H appears twice, so traces of embedded
    blocks carry EMBEDDED_TRACE_SCALE.
    """

    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidInput(f"real_embed: expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(h), initial=0.0)):
        raise InvalidInput("real_embed: matrix is not Hermitian")
    h = (h + h.conj().T) / 2
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def eliminate_equalities(problem: LmiProblem, tol: float = 1e-10) -> EliminatedProblem:
    """Remove E y = d by substituting y = y0 + N w, with N a basis of the null space of E.

    :param problem: problem with or without equalities.
    :param tol: relative residual tolerance for consistency of E y = d.
    :return: the equality-free problem in w and the map back to y.
    """

    m = problem.n_vars
    if problem.eq_matrix is None or problem.eq_matrix.shape[0] == 0:
        return EliminatedProblem(problem=problem, particular=np.zeros(m), basis=np.eye(m))

    e, d = problem.eq_matrix, problem.eq_rhs
    particular = scipy.linalg.lstsq(e, d)[0]
    residual = float(np.linalg.norm(e @ particular - d))
    if residual > tol * (1 + float(np.linalg.norm(d))):
        raise InconsistentEqualities(f"eliminate_equalities: E y = d has no solution (residual {residual:.3e})")
    basis = scipy.linalg.null_space(e)

    f0 = problem.evaluate(particular)
    fs = np.array(problem.fs)
    reduced_fs = tuple(np.tensordot(basis[:, j], fs, axes=1) for j in range(basis.shape[1]))
    reduced = LmiProblem(
        c=basis.T @ problem.c,
        f0=(f0 + f0.T) / 2,
        fs=tuple((f + f.T) / 2 for f in reduced_fs),
        blocks=problem.blocks,
        objective_offset=problem.objective(particular),
    )
    return EliminatedProblem(problem=reduced, particular=particular, basis=basis)


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha dx positive semidefinite, for positive definite x."""

    lower = scipy.linalg.cholesky(x, lower=True)
    half = scipy.linalg.solve_triangular(lower, dx, lower=True)
    scaled = scipy.linalg.solve_triangular(lower, half.T, lower=True)
    smallest = float(np.linalg.eigvalsh((scaled + scaled.T) / 2)[0])
    return np.inf if smallest >= 0 else -1.0 / smallest


def _solve_schur(m: np.ndarray, rhs: np.ndarray, factor) -> np.ndarray:
    if factor is not None:
        return scipy.linalg.cho_solve(factor, rhs)
    return scipy.linalg.lstsq(m, rhs)[0]


def _solve_equality_free(problem: LmiProblem, options: SolverOptions) -> SdpSolution:
    n, m = problem.size, problem.n_vars
    f0, c = problem.f0, problem.c
    norm_f0 = float(np.linalg.norm(f0))
    norm_c = float(np.linalg.norm(c))

    if m == 0:
        s = f0.copy()
        smallest = float(np.linalg.eigvalsh(s)[0])
        feasible = smallest >= -options.feas_tol * (1 + norm_f0)
        return SdpSolution(
            status=SolverStatus.optimal if feasible else SolverStatus.infeasible,
            y=np.zeros(0),
            z=np.zeros((n, n)),
            s=s,
            primal_objective=problem.objective_offset,
            dual_objective=problem.objective_offset,
            iterations=0,
            primal_infeasibility=max(0.0, -smallest),
        )

    fs = np.array(problem.fs)
    identity = np.eye(n)
    start = 1.0 + norm_f0
    y = np.zeros(m)
    s = start * identity
    z = start * identity

    history = []
    status = SolverStatus.max_iterations
    pinf = dinf = np.inf
    pobj = dobj = 0.0
    iteration = 0
    for iteration in range(options.max_iter + 1):
        rp = problem.evaluate(y) - s
        rd = c - np.einsum("iab,ab->i", fs, z)
        gap = float(np.sum(s * z))
        mu = gap / n
        pobj = problem.objective(y)
        dobj = -float(np.sum(f0 * z)) + problem.objective_offset
        pinf = float(np.linalg.norm(rp)) / (1 + norm_f0)
        dinf = float(np.linalg.norm(rd)) / (1 + norm_c)
        record = IterationRecord(iteration, pobj, dobj, gap, pinf, dinf)
        history.append(record)
        if options.trace:
            sys.stderr.write(f"{iteration:4d} {pobj: .12e} {dobj: .12e} {gap: .4e} {pinf: .3e} {dinf: .3e}\n")

        scale = 1 + abs(pobj)
        if (
            pinf <= options.feas_tol
            and dinf <= options.feas_tol
            and gap / scale <= options.gap_tol
            and abs(pobj - dobj) / scale <= options.gap_tol
        ):
            status = SolverStatus.optimal
            break
        if iteration == options.max_iter:
            break
        if float(np.max(np.abs(y))) > 1e12 or float(np.trace(z)) > 1e14 * (1 + start):
            status = SolverStatus.infeasible
            break

        try:
            lower = scipy.linalg.cholesky(s, lower=True)
            s_inv = scipy.linalg.cho_solve((lower, True), identity)
            s_inv = (s_inv + s_inv.T) / 2
        except (np.linalg.LinAlgError, ValueError):
            status = SolverStatus.numerical_failure
            break

        projected = np.matmul(np.matmul(s_inv, fs), z)
        schur = np.einsum("iab,jba->ij", fs, projected)
        schur = (schur + schur.T) / 2
        try:
            factor = scipy.linalg.cho_factor(schur)
        except (np.linalg.LinAlgError, ValueError):
            factor = None

        feasibility_term = s_inv @ rp @ z

        def direction(target: float, correction: Optional[np.ndarray]):
            rc = target * s_inv - z
            if correction is not None:
                rc = rc - s_inv @ correction
            rhs = np.einsum("iab,ba->i", fs, rc - feasibility_term) - rd
            dy = _solve_schur(schur, rhs, factor)
            ds = np.tensordot(dy, fs, axes=1) + rp
            dz = rc - s_inv @ ds @ z
            return dy, (ds + ds.T) / 2, (dz + dz.T) / 2

        try:
            dy_aff, ds_aff, dz_aff = direction(0.0, None)
            alpha_p = min(1.0, _max_step(s, ds_aff))
            alpha_d = min(1.0, _max_step(z, dz_aff))
            mu_aff = float(np.sum((s + alpha_p * ds_aff) * (z + alpha_d * dz_aff))) / n
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

            dy, ds, dz = direction(sigma * mu, ds_aff @ dz_aff)
            alpha_p = min(1.0, options.step_frac * _max_step(s, ds))
            alpha_d = min(1.0, options.step_frac * _max_step(z, dz))
        except (np.linalg.LinAlgError, ValueError):
            status = SolverStatus.numerical_failure
            break
        if not np.all(np.isfinite(dy)) or not (np.all(np.isfinite(ds)) and np.all(np.isfinite(dz))):
            status = SolverStatus.numerical_failure
            break

        y = y + alpha_p * dy
        s = s + alpha_p * ds
        z = z + alpha_d * dz
        s = (s + s.T) / 2
        z = (z + z.T) / 2

    return SdpSolution(
        status=status,
        y=y,
        z=z,
        s=problem.evaluate(y),
        primal_objective=pobj,
        dual_objective=dobj,
        iterations=iteration,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        history=history,
    )


def solve(problem: LmiProblem, options: Optional[SolverOptions] = None) -> SdpSolution:
    """Solve an LMI problem with an infeasible-start primal-dual interior-point method.

    Search directions use the HKM scaling with Mehrotra predictor-corrector steps; equalities are
    eliminated first and the solution is mapped back to the original variables.

    :param problem: the problem.
    :param options: tolerances and iteration limits.
    :return: the solution and its diagnostics.
    """

    options = options or SolverOptions()
    reduction = eliminate_equalities(problem)
    solution = _solve_equality_free(reduction.problem, options)

    y = reduction.recover(solution.y)
    solution.y = y
    solution.s = problem.evaluate(y)
    solution.primal_objective = problem.objective(y)
    logging.debug(
        f"solve: {solution.status.value} after {solution.iterations} iterations, "
        f"primal {solution.primal_objective:.12g}, dual {solution.dual_objective:.12g}"
    )
    return solution
