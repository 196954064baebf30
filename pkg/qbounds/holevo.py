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
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from qbounds.config import Bound
from qbounds.detector import DetectorParams, Scenario, StatModel, stat_model
from qbounds.exceptions import InvalidInput, RankDeficient, SingularInformation, SolverFailure
from qbounds.fisher import AnalyticBounds, analytic_two_param, fisher_bundle, scalar_crbs
from qbounds.linalg import commutator, eigh, psd_factor, trace_norm
from qbounds.sdp import (
    EMBEDDED_TRACE_SCALE,
    BlockSpec,
    LmiProblem,
    SdpSolution,
    SolverOptions,
    SolverStatus,
    real_embed,
    solve,
)

HIERARCHY_TOL = 1e-6
ACCEPT_TOL = 1e-7


def hermitian_basis(n: int) -> List[np.ndarray]:
    """Orthonormal basis of n x n Hermitian matrices under the Hilbert-Schmidt inner product.

    The identity comes first, then symmetric and antisymmetric off-diagonal elements, then the
    traceless diagonal ones. For n = 2 this is {I, sigma_x, sigma_y, sigma_z} / sqrt(2).
    """

    if n < 1:
        raise InvalidInput(f"hermitian_basis: dimension must be positive, got {n}")
    basis = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for j in range(n):
        for k in range(j + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            basis.extend([sym, anti])
    for level in range(1, n):
        diag = np.zeros(n)
        diag[:level] = 1.0
        diag[level] = -level
        basis.append(np.diag(diag / np.sqrt(level * (level + 1))).astype(complex))
    return basis


class HolevoResult(NamedTuple):
    value: float
    x_opt: List[np.ndarray]


class NagaokaResult(NamedTuple):
    value: float
    x_opt: List[np.ndarray]


@dataclass(frozen=True)
class VariationalProblem:
    """An assembled bound problem and where its observables live in the variable vector."""

    problem: LmiProblem
    basis: Tuple[np.ndarray, ...]
    x_offset: int
    dim: int

    def observables(self, y: np.ndarray) -> List[np.ndarray]:
        size = len(self.basis)
        coefs = np.asarray(y)[self.x_offset : self.x_offset + self.dim * size].reshape(self.dim, size)
        return [sum(coef * element for coef, element in zip(row, self.basis)) for row in coefs]


def _unbiasedness(model: StatModel, basis: Sequence[np.ndarray], n_vars: int, x_offset: int):
    """Equalities Tr[rho X_u] = 0 and Tr[X_u d_v rho] = delta_uv on the basis coefficients of X."""

    d, size = model.dim, len(basis)
    local = np.array(
        [[np.trace(model.rho @ element).real for element in basis]]
        + [[np.trace(deriv @ element).real for element in basis] for deriv in model.derivs]
    )
    rows, rhs = [], []
    for u in range(d):
        for r in range(d + 1):
            row = np.zeros(n_vars)
            row[x_offset + u * size : x_offset + (u + 1) * size] = local[r]
            rows.append(row)
            rhs.append(1.0 if r == u + 1 else 0.0)

    eq_matrix = np.array(rows)
    if np.linalg.matrix_rank(eq_matrix) < eq_matrix.shape[0]:
        raise RankDeficient("the locally unbiased conditions are not independent; the derivatives are degenerate")
    return eq_matrix, np.array(rhs)


def _embedded(blocks: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [real_embed(block) for block in blocks]


def holevo_problem(model: StatModel) -> VariationalProblem:
    """Assemble the Holevo bound as an LMI.

    Variables are the basis coefficients x of the observables X_u and a real symmetric V. The
    constraint V >= Z[X] with Z_uv = Tr[rho X_u X_v] is written as the Schur complement
    [[V, x S^H], [S x^T, I]] >= 0 where G = S^H S is the Gram matrix Tr[rho E_k E_l].
    """

    d = model.dim
    n = model.rho.shape[0]
    basis = hermitian_basis(n)
    size = len(basis)
    gram = np.array([[np.trace(model.rho @ ek @ el) for el in basis] for ek in basis])
    factor = psd_factor(gram)
    rank = factor.shape[0]

    pairs = [(u, v) for u in range(d) for v in range(u, d)]
    n_x = d * size
    n_vars = n_x + len(pairs)
    block = d + rank

    constant = np.zeros((block, block), dtype=complex)
    constant[d:, d:] = np.eye(rank)
    coefficients = []
    for u in range(d):
        for k in range(size):
            h = np.zeros((block, block), dtype=complex)
            h[u, d:] = factor[:, k].conj()
            h[d:, u] = factor[:, k]
            coefficients.append(h)
    for u, v in pairs:
        h = np.zeros((block, block), dtype=complex)
        h[u, v] = h[v, u] = 1.0
        coefficients.append(h)

    c = np.zeros(n_vars)
    for i, (u, v) in enumerate(pairs):
        if u == v:
            c[n_x + i] = 1.0

    eq_matrix, eq_rhs = _unbiasedness(model, basis, n_vars, x_offset=0)
    problem = LmiProblem.from_blocks(
        c=c,
        f0_blocks=_embedded([constant]),
        fs_blocks=[_embedded([h]) for h in coefficients],
        blocks=[BlockSpec(size=2 * block, trace_scale=EMBEDDED_TRACE_SCALE, label="holevo")],
        eq_matrix=eq_matrix,
        eq_rhs=eq_rhs,
    )
    return VariationalProblem(problem=problem, basis=tuple(basis), x_offset=0, dim=d)


def nagaoka_problem(model: StatModel) -> VariationalProblem:
    """Assemble the Nagaoka-Hayashi bound as an LMI.

    Variables are the basis coefficients of the blocks L_uv (u <= v, so L_vu = L_uv) followed by
    those of the observables X_u. The constraint is [[L, X], [X^H, I]] >= 0 with X the column of the
    X_u, and the objective is sum_u Tr[rho L_uu].
    """

    d = model.dim
    n = model.rho.shape[0]
    basis = hermitian_basis(n)
    size = len(basis)
    pairs = [(u, v) for u in range(d) for v in range(u, d)]
    x_offset = len(pairs) * size
    n_vars = x_offset + d * size
    block = (d + 1) * n

    def placed(row: int, col: int, element: np.ndarray) -> np.ndarray:
        h = np.zeros((block, block), dtype=complex)
        h[row * n : (row + 1) * n, col * n : (col + 1) * n] = element
        if row != col:
            h[col * n : (col + 1) * n, row * n : (row + 1) * n] = element.conj().T
        return h

    constant = np.zeros((block, block), dtype=complex)
    constant[d * n :, d * n :] = np.eye(n)
    coefficients = []
    c = np.zeros(n_vars)
    for i, (u, v) in enumerate(pairs):
        for k, element in enumerate(basis):
            coefficients.append(placed(u, v, element))
            if u == v:
                c[i * size + k] = np.trace(model.rho @ element).real
    for u in range(d):
        for element in basis:
            coefficients.append(placed(u, d, element))

    eq_matrix, eq_rhs = _unbiasedness(model, basis, n_vars, x_offset=x_offset)
    problem = LmiProblem.from_blocks(
        c=c,
        f0_blocks=_embedded([constant]),
        fs_blocks=[_embedded([h]) for h in coefficients],
        blocks=[BlockSpec(size=2 * block, trace_scale=EMBEDDED_TRACE_SCALE, label="nagaoka-hayashi")],
        eq_matrix=eq_matrix,
        eq_rhs=eq_rhs,
    )
    return VariationalProblem(problem=problem, basis=tuple(basis), x_offset=x_offset, dim=d)


def _checked(solution: SdpSolution, name: str) -> SdpSolution:
    if solution.status == SolverStatus.optimal:
        return solution
    if solution.status in (SolverStatus.max_iterations, SolverStatus.numerical_failure) and solution.accurate(ACCEPT_TOL):
        logging.warning(
            f"{name}: accepting last iterate after {solution.status.value} at iteration {solution.iterations}, "
            f"relative gap {solution.relative_gap:.3e}"
        )
        return solution
    raise SolverFailure(
        f"{name}: solver stopped with status {solution.status.value} after {solution.iterations} iterations "
        f"(relative gap {solution.relative_gap:.3e})",
        solution=solution,
    )


def hcrb(model: StatModel, options: Optional[SolverOptions] = None) -> HolevoResult:
    """Holevo Cramer-Rao bound for the identity weight matrix.

    :param model: the statistical model.
    :param options: solver options.
    :return: the bound and the optimal observables.
    """

    assembled = holevo_problem(model)
    solution = _checked(solve(assembled.problem, options), "hcrb")
    return HolevoResult(value=solution.primal_objective, x_opt=assembled.observables(solution.y))


def nagaoka_hayashi(model: StatModel, options: Optional[SolverOptions] = None) -> NagaokaResult:
    """Nagaoka-Hayashi bound for the identity weight matrix; needs at least two parameters."""

    if model.dim < 2:
        raise InvalidInput("nagaoka_hayashi: the bound is defined for two or more parameters")
    assembled = nagaoka_problem(model)
    solution = _checked(solve(assembled.problem, options), "nagaoka_hayashi")
    return NagaokaResult(value=solution.primal_objective, x_opt=assembled.observables(solution.y))


def holevo_functional(model: StatModel, xs: Sequence[np.ndarray]) -> float:
    """tr Re Z[X] + ||Im Z[X]||_1 for observables xs."""

    z = np.array([[np.trace(model.rho @ xu @ xv) for xv in xs] for xu in xs])
    return float(np.trace(z.real)) + trace_norm(z.imag)


def nagaoka_functional(model: StatModel, xs: Sequence[np.ndarray]) -> float:
    """Tr[rho X1^2] + Tr[rho X2^2] + TrAbs[rho [X1, X2]] for a pair of observables."""

    if len(xs) != 2:
        raise InvalidInput(f"nagaoka_functional: expected two observables, got {len(xs)}")
    x1, x2 = xs
    root = eigh(model.rho).sqrt()
    curvature = 1j * root @ commutator(x1, x2) @ root
    return float(np.trace(model.rho @ x1 @ x1).real + np.trace(model.rho @ x2 @ x2).real) + trace_norm(curvature)


@dataclass
class BoundReport:
    """Every bound computed at one point, with the hierarchy check and closed-form comparison.

    Absent bounds are None, either because they were not requested or because an information matrix
    was singular at this point; the latter is recorded in notes. Relative deviations from the closed forms are recorded in
    analytic_deviation when the closed forms apply.
    """

    labels: Tuple[str, ...]
    c_sld: Optional[float] = None
    c_rld: Optional[float] = None
    c_upper: Optional[float] = None
    c_hcrb: Optional[float] = None
    c_nagaoka: Optional[float] = None
    c_most_informative: Optional[float] = None
    hierarchy_ok: bool = True
    analytic: Optional[AnalyticBounds] = None
    analytic_deviation: Dict[str, float] = field(default_factory=dict)
    analytic_d_deviation: Optional[float] = None
    notes: List[str] = field(default_factory=list)
    params: Optional[DetectorParams] = None

    def to_dict(self) -> Dict:
        return dict(
            labels=list(self.labels),
            params=self.params.to_dict() if self.params is not None else None,
            c_sld=self.c_sld,
            c_rld=self.c_rld,
            c_upper=self.c_upper,
            c_hcrb=self.c_hcrb,
            c_nagaoka=self.c_nagaoka,
            c_most_informative=self.c_most_informative,
            hierarchy_ok=self.hierarchy_ok,
            analytic=self.analytic.to_dict() if self.analytic is not None else None,
            analytic_deviation=self.analytic_deviation,
            analytic_d_deviation=self.analytic_d_deviation,
            notes=self.notes,
        )


def check_hierarchy(report: BoundReport, tol: float = HIERARCHY_TOL) -> bool:
    """c_sld, c_rld <= c_hcrb <= c_nagaoka, c_hcrb <= c_upper <= 2 c_sld, to tol relative.

    Comparisons involving an absent bound are skipped.
    """

    sld, rld, upper = report.c_sld, report.c_rld, report.c_upper
    hcrb_, nagaoka = report.c_hcrb, report.c_nagaoka
    present = [v for v in (sld, rld, upper, hcrb_, nagaoka) if v is not None]
    if not present:
        return True
    slack = tol * max(1.0, max(abs(v) for v in present))

    def below(low: Optional[float], high: Optional[float], factor: float = 1.0) -> bool:
        return low is None or high is None or low <= factor * high + slack

    ok = below(sld, upper) and below(upper, sld, 2.0)
    if hcrb_ is not None:
        ok = ok and below(sld, hcrb_) and below(rld, hcrb_) and below(hcrb_, upper) and below(hcrb_, nagaoka)
    else:
        ok = ok and below(sld, nagaoka) and below(rld, nagaoka)
    return bool(ok)


def _closed_form_applies(model: StatModel) -> bool:
    return (
        model.params is not None
        and model.params.scenario == Scenario.unbounded
        and sorted(model.labels) == ["phi", "theta"]
    )


def _absent(report: BoundReport, stage: str, error: SingularInformation):
    report.notes.append(f"{stage}: SingularInformation: {error}")
    logging.warning(f"bound_report: {stage} left absent at {report.params}: {error}")


def bound_report(
    model: StatModel,
    bounds: Optional[Iterable[str]] = None,
    options: Optional[SolverOptions] = None,
) -> BoundReport:
    """Compute the requested bounds at one point and check their ordering.

    A SingularInformation leaves the affected bounds absent and is recorded in the report notes.

    :param model: the statistical model.
    :param bounds: names from Bound; all of them when None.
    :param options: solver options for the Holevo and Nagaoka-Hayashi problems.
    :return: the report.
    """

    wanted = set(Bound.all() if bounds is None else bounds)
    bundle = fisher_bundle(model)
    report = BoundReport(labels=model.labels, params=model.params)
    try:
        scalar = scalar_crbs(bundle)
        report.c_sld, report.c_rld, report.c_upper = scalar.c_sld, scalar.c_rld, scalar.c_upper
    except SingularInformation as e:
        _absent(report, "scalar bounds", e)

    if Bound.hcrb in wanted or Bound.nagaoka in wanted:
        try:
            report.c_hcrb = hcrb(model, options).value
        except SingularInformation as e:
            _absent(report, "hcrb", e)
    if Bound.nagaoka in wanted:
        if model.dim == 1:
            report.c_nagaoka = report.c_hcrb
            report.notes.append("single parameter: the Nagaoka-Hayashi bound equals the Holevo bound")
        else:
            try:
                report.c_nagaoka = nagaoka_hayashi(model, options).value
            except SingularInformation as e:
                _absent(report, "nagaoka_hayashi", e)
            if model.dim == 2:
                report.c_most_informative = report.c_nagaoka

    if Bound.analytic in wanted and _closed_form_applies(model):
        analytic = analytic_two_param(model.params)
        report.analytic = analytic
        pairs = {
            Bound.sld: (report.c_sld, analytic.c_sld),
            Bound.rld: (report.c_rld, analytic.c_rld),
            Bound.hcrb: (report.c_hcrb, analytic.c_hcrb),
            Bound.nagaoka: (report.c_nagaoka, analytic.c_nb),
        }
        report.analytic_deviation = {
            name: abs(computed - expected) / abs(expected)
            for name, (computed, expected) in pairs.items()
            if computed is not None
        }
        expected_d = analytic.d_matrix if model.labels == ("theta", "phi") else -analytic.d_matrix
        report.analytic_d_deviation = float(np.max(np.abs(bundle.uhlmann - expected_d)))

    report.hierarchy_ok = check_hierarchy(report)
    if not report.hierarchy_ok:
        logging.warning(f"bound_report: bound hierarchy violated at {model.params}: {report.to_dict()}")
    return report


@dataclass
class ScenarioComparison:
    unbounded: BoundReport
    bounded: BoundReport
    differences: Dict[str, float]


def compare_scenarios(
    p: DetectorParams,
    labels: Sequence[str],
    z: float,
    bounds: Optional[Iterable[str]] = None,
    options: Optional[SolverOptions] = None,
) -> ScenarioComparison:
    """Evaluate one point with and without a reflecting boundary at distance z.

    :return: both reports and, per bound, bounded minus unbounded.
    """

    bounds = [b for b in (Bound.all() if bounds is None else bounds) if b != Bound.analytic]
    unbounded = bound_report(stat_model(p.replace(scenario=Scenario.unbounded, z=None), labels), bounds, options)
    bounded = bound_report(stat_model(p.replace(scenario=Scenario.bounded, z=z), labels), bounds, options)

    differences = {}
    for name in (Bound.sld, Bound.rld, Bound.upper, Bound.hcrb, Bound.nagaoka):
        before, after = getattr(unbounded, f"c_{name}"), getattr(bounded, f"c_{name}")
        if before is not None and after is not None:
            differences[name] = after - before
    return ScenarioComparison(unbounded=unbounded, bounded=bounded, differences=differences)


def pure_state_gap(
    p: DetectorParams,
    labels: Sequence[str],
    taus: Sequence[float],
    options: Optional[SolverOptions] = None,
) -> List[Tuple[float, float]]:
    """Relative gap (c_nagaoka - c_hcrb) / c_hcrb along a sequence of proper times.

    :return: (tau, gap) pairs in the order of taus.
    """

    gaps = []
    for tau in taus:
        model = stat_model(p.replace(tau=tau), labels)
        holevo = hcrb(model, options).value
        nagaoka = nagaoka_hayashi(model, options).value
        gaps.append((tau, (nagaoka - holevo) / holevo))
        logging.info(f"pure_state_gap: tau={tau:g} relative gap {gaps[-1][1]:.3e}")
    return gaps
