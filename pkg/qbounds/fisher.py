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

import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from qbounds.detector import DetectorParams, Scenario, StatModel
from qbounds.exceptions import (
    BoundedScenarioUnsupported,
    IncompletePovm,
    RankDeficient,
    SingularInformation,
)
from qbounds.linalg import anticommutator, as_hermitian, eigh, trace_norm

RANK_TOL = 1e-12
COND_MAX = 1e12


@dataclass(frozen=True)
class FisherBundle:
    """SLD and RLD operators of a model and the matrices built from them.

    :param labels: parameter names.
    :param slds: symmetric logarithmic derivatives, one per parameter.
    :param rlds: right logarithmic derivatives, one per parameter.
    :param j_sld: real symmetric SLD quantum Fisher information matrix.
    :param j_rld: Hermitian RLD quantum Fisher information matrix.
    :param uhlmann: real antisymmetric Uhlmann curvature matrix.
    """

    labels: Tuple[str, ...]
    slds: Tuple[np.ndarray, ...]
    rlds: Tuple[np.ndarray, ...]
    j_sld: np.ndarray
    j_rld: np.ndarray
    uhlmann: np.ndarray


class ScalarCrbs(NamedTuple):
    c_sld: float
    c_rld: float
    c_upper: float


@dataclass(frozen=True)
class AnalyticBounds:
    """Closed-form bounds of the (theta, phi) detector model in the unbounded vacuum."""

    c_sld: float
    c_rld: float
    c_hcrb: float
    c_nb: float
    c_z: float
    d_matrix: np.ndarray

    def to_dict(self) -> Dict:
        return dict(
            c_sld=self.c_sld,
            c_rld=self.c_rld,
            c_hcrb=self.c_hcrb,
            c_nb=self.c_nb,
            c_z=self.c_z,
            d_matrix=self.d_matrix.tolist(),
        )


def _full_rank_spectrum(model: StatModel):
    dec = eigh(model.rho)
    if dec.values[0] <= RANK_TOL:
        raise RankDeficient(
            f"the state has eigenvalue {dec.values[0]:.3e} <= {RANK_TOL}; logarithmic derivatives are undefined"
        )
    return dec


def sld_operators(model: StatModel) -> List[np.ndarray]:
    """Solve the Lyapunov equation (rho L + L rho)/2 = d rho in the eigenbasis of rho.

    :param model: the statistical model.
    :return: one Hermitian SLD per parameter.
    """

    dec = _full_rank_spectrum(model)
    v = dec.vectors
    weights = 2.0 / (dec.values[:, None] + dec.values[None, :])
    slds = []
    for deriv in model.derivs:
        in_basis = v.conj().T @ deriv @ v
        sld = v @ (weights * in_basis) @ v.conj().T
        slds.append((sld + sld.conj().T) / 2)
    return slds


def rld_operators(model: StatModel) -> List[np.ndarray]:
    """L^R = rho^-1 d rho, the solution of rho L^R = d rho."""

    rho_inv = _full_rank_spectrum(model).inverse()
    return [rho_inv @ deriv for deriv in model.derivs]


def sld_residual(model: StatModel, slds: Sequence[np.ndarray]) -> float:
    return max(float(np.max(np.abs(anticommutator(model.rho, sld) / 2 - deriv))) for sld, deriv in zip(slds, model.derivs))


def rld_residual(model: StatModel, rlds: Sequence[np.ndarray]) -> float:
    return max(float(np.max(np.abs(model.rho @ rld - deriv))) for rld, deriv in zip(rlds, model.derivs))


def fisher_bundle(model: StatModel) -> FisherBundle:
    """Compute both logarithmic derivatives and the SLD, RLD and Uhlmann matrices of a model.

    J^S_uv = Re Tr[rho L_u L_v], D_uv = Im Tr[rho L_u L_v] and J^R_uv = Tr[L^R_u^H rho L^R_v].
    """

    slds = sld_operators(model)
    rlds = rld_operators(model)
    d = model.dim
    products = np.empty((d, d), dtype=complex)
    j_rld = np.empty((d, d), dtype=complex)
    for u in range(d):
        for v in range(d):
            products[u, v] = np.trace(model.rho @ slds[u] @ slds[v])
            j_rld[u, v] = np.trace(rlds[u].conj().T @ model.rho @ rlds[v])

    j_sld = (products.real + products.real.T) / 2
    uhlmann = (products.imag - products.imag.T) / 2
    j_rld = (j_rld + j_rld.conj().T) / 2
    return FisherBundle(
        labels=model.labels,
        slds=tuple(slds),
        rlds=tuple(rlds),
        j_sld=j_sld,
        j_rld=j_rld,
        uhlmann=uhlmann,
    )


def _guarded_inverse(matrix: np.ndarray, name: str) -> np.ndarray:
    dec = eigh(matrix)
    if dec.condition_number >= COND_MAX:
        raise SingularInformation(f"{name} has condition number {dec.condition_number:.3e}; a parameter is unidentifiable")
    return dec.inverse()


def scalar_crbs(f: FisherBundle) -> ScalarCrbs:
    """SLD-, RLD- and upper (SLD plus curvature) bounds for the identity weight matrix.

    :param f: Fisher bundle of the model.
    :return: (c_sld, c_rld, c_upper).
    """

    j_sld_inv = _guarded_inverse(f.j_sld, "scalar_crbs: J^S").real
    j_rld_inv = _guarded_inverse(f.j_rld, "scalar_crbs: J^R")

    c_sld = float(np.trace(j_sld_inv))
    c_rld = float(np.trace(j_rld_inv.real)) + trace_norm(j_rld_inv.imag)
    c_upper = c_sld + trace_norm(j_sld_inv @ f.uhlmann @ j_sld_inv)
    return ScalarCrbs(c_sld=c_sld, c_rld=c_rld, c_upper=c_upper)


def classical_fim(model: StatModel, povm: Sequence) -> np.ndarray:
    """Classical Fisher information of the outcome distribution of a POVM.

    :param model: the statistical model.
    :param povm: positive operators summing to the identity.
    :return: d x d Fisher information matrix.
    """

    elements = [as_hermitian(element, name="POVM element") for element in povm]
    if len(elements) == 0:
        raise IncompletePovm("classical_fim: empty POVM")
    for element in elements:
        if element.shape != model.rho.shape:
            raise IncompletePovm(f"classical_fim: POVM element of shape {element.shape} does not act on the state")
        if eigh(element).values[0] < -1e-12:
            raise IncompletePovm("classical_fim: POVM element is not positive semidefinite")
    completeness = float(np.max(np.abs(sum(elements) - np.eye(model.rho.shape[0]))))
    if completeness > 1e-10:
        raise IncompletePovm(f"classical_fim: POVM elements deviate from the identity by {completeness:.3e}")

    fim = np.zeros((model.dim, model.dim))
    for element in elements:
        p = float(np.trace(model.rho @ element).real)
        if p <= 1e-14:
            continue
        grad = np.array([np.trace(deriv @ element).real for deriv in model.derivs])
        fim += np.outer(grad, grad) / p
    return fim


def analytic_two_param(p: DetectorParams) -> AnalyticBounds:
    """Closed-form bounds for jointly estimating theta and phi in the unbounded vacuum.

    :param p: detector point; must be unbounded.
    :return: SLD, RLD, Holevo, Nagaoka and upper bounds with the Uhlmann curvature matrix.
    """

    if p.scenario != Scenario.unbounded:
        raise BoundedScenarioUnsupported("analytic_two_param: closed forms exist only for the unbounded vacuum")

    theta, tau, x = p.theta, p.tau, math.pi * p.a_inv
    coth = 1 / math.tanh(x)
    growth = math.exp(tau * coth)
    csc2 = 1 / math.sin(theta) ** 2
    cos = math.cos(theta)

    denominator = (3 + math.cos(2 * theta)) * math.cosh(2 * x) + 2 * (
        2 * growth * cos**2 + math.sin(theta) ** 2 + 2 * math.sinh(2 * x) * cos
    )
    numerator = (
        4 * growth
        + 2 * math.cos(2 * theta) * math.cosh(x) ** 2
        + 3 * math.cosh(2 * x)
        + 4 * math.sinh(2 * x) * cos
        - 1
    )
    cross = (coth + (1 - growth) * cos) * (math.tanh(x) / math.sin(theta)) * numerator
    rld_weight = 1 + growth * csc2

    c_sld = (csc2 + numerator / denominator) * growth
    c_rld = rld_weight * numerator / denominator + 2 * math.sqrt(cross**2 / denominator**2)

    curvature_factor = (growth - 1) * math.tanh(x) * cos - 1
    c_z = c_sld + 2 * math.sqrt(numerator**2 * curvature_factor**2 * csc2 / denominator**2)
    det_term = numerator * growth**2 * csc2 / denominator
    c_nb = c_sld + 2 * math.sqrt(det_term)

    midpoint = (c_sld + c_z) / 2
    if c_rld >= midpoint:
        c_hcrb = c_rld
    else:
        c_hcrb = c_rld + (midpoint - c_rld) ** 2 / (c_z - c_rld)

    curvature = math.exp(-2 * tau * coth) * math.sin(theta) * (1 + (1 - growth) * math.tanh(x) * cos)
    d_matrix = np.array([[0.0, curvature], [-curvature, 0.0]])
    return AnalyticBounds(c_sld=c_sld, c_rld=c_rld, c_hcrb=c_hcrb, c_nb=c_nb, c_z=c_z, d_matrix=d_matrix)
