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

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from qbounds.exceptions import EmptyParameterSet, InvalidInput, Unphysical
from qbounds.linalg import IDENTITY2, PAULIS, SIGMA_Z, as_hermitian, commutator, eigh

PARAM_LABELS = ("theta", "phi", "a_inv")


class Scenario(str, Enum):
    """Field vacuum seen by the detector."""

    unbounded = "unbounded"
    bounded = "bounded"


@dataclass(frozen=True)
class DetectorParams:
    """A point in the parameter space of the accelerated detector, in dimensionless units.

    :param theta: polar angle of the initial state, strictly inside (0, pi).
    :param phi: azimuthal angle of the initial state.
    :param a_inv: inverse acceleration in units of the energy gap, > 0.
    :param tau: proper time in units of the inverse spontaneous emission rate, > 0.
    :param scenario: unbounded or bounded (reflecting boundary) vacuum.
    :param z: distance to the boundary, required and > 0 when bounded, ignored otherwise.
    :param omega_eff: renormalised energy gap in units of the emission rate, >= 0.
    """

    theta: float
    phi: float
    a_inv: float
    tau: float
    scenario: Scenario = Scenario.unbounded
    z: Optional[float] = None
    omega_eff: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        for name in ("theta", "phi", "a_inv", "tau", "omega_eff"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInput(f"DetectorParams: {name} must be finite, got {getattr(self, name)}")
        if not 0.0 < self.theta < math.pi:
            raise InvalidInput(f"DetectorParams: theta must lie strictly inside (0, pi), got {self.theta}")
        if self.a_inv <= 0:
            raise InvalidInput(f"DetectorParams: a_inv must be positive, got {self.a_inv}")
        if self.tau <= 0:
            raise InvalidInput(f"DetectorParams: tau must be positive, got {self.tau}")
        if self.omega_eff < 0:
            raise InvalidInput(f"DetectorParams: omega_eff must be non-negative, got {self.omega_eff}")
        if self.scenario == Scenario.bounded and (self.z is None or not math.isfinite(self.z) or self.z <= 0):
            raise InvalidInput(f"DetectorParams: the bounded scenario requires z > 0, got {self.z}")

    def replace(self, **changes) -> DetectorParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict:
        return dict(
            theta=self.theta,
            phi=self.phi,
            a_inv=self.a_inv,
            tau=self.tau,
            scenario=self.scenario.value,
            z=self.z,
            omega_eff=self.omega_eff,
        )

    @staticmethod
    def from_dict(dict_: Dict) -> DetectorParams:
        return DetectorParams(
            theta=dict_["theta"],
            phi=dict_.get("phi", 0.0),
            a_inv=dict_["a_inv"],
            tau=dict_["tau"],
            scenario=Scenario(dict_.get("scenario", Scenario.unbounded)),
            z=dict_.get("z"),
            omega_eff=dict_.get("omega_eff", 0.0),
        )


@dataclass(frozen=True)
class KossakowskiCoeffs:
    a_coef: float
    b_coef: float


@dataclass(frozen=True)
class BlochState:
    w1: float
    w2: float
    w3: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3], dtype=float)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class StatModel:
    """A qubit state together with its derivatives with respect to the estimated parameters.

    :param rho: the 2x2 density matrix.
    :param derivs: derivative of rho for each label, in the order of labels.
    :param labels: names of the estimated parameters.
    :param params: the detector point the model was built at, when it comes from the detector.
    """

    rho: np.ndarray
    derivs: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...]
    params: Optional[DetectorParams] = None

    @property
    def dim(self) -> int:
        return len(self.labels)

    def deriv(self, label: str) -> np.ndarray:
        return self.derivs[self.labels.index(label)]

    @staticmethod
    def from_arrays(rho, derivs: Sequence, labels: Sequence[str], params: Optional[DetectorParams] = None) -> StatModel:
        """Validate a state and its derivatives and wrap them in a StatModel.

        :param rho: density matrix, unit trace and positive semidefinite.
        :param derivs: traceless Hermitian derivatives.
        :param labels: one label per derivative.
        :param params: optional originating detector point.
        :return: the model.
        """

        if len(derivs) == 0:
            raise EmptyParameterSet("StatModel.from_arrays: at least one parameter is required")
        if len(derivs) != len(labels) or len(set(labels)) != len(labels):
            raise InvalidInput(f"StatModel.from_arrays: labels {list(labels)} do not match {len(derivs)} derivatives")

        rho = as_hermitian(rho, name="rho")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise InvalidInput(f"StatModel.from_arrays: tr(rho) = {np.trace(rho).real} is not 1")
        if eigh(rho).values[0] < -1e-12:
            raise InvalidInput("StatModel.from_arrays: rho is not positive semidefinite")

        checked = []
        for label, deriv in zip(labels, derivs):
            deriv = as_hermitian(deriv, name=f"d rho / d {label}")
            if deriv.shape != rho.shape:
                raise InvalidInput(f"StatModel.from_arrays: derivative {label} has shape {deriv.shape}")
            if abs(np.trace(deriv)) > 1e-10:
                raise InvalidInput(f"StatModel.from_arrays: derivative {label} is not traceless")
            checked.append(deriv)

        return StatModel(rho=rho, derivs=tuple(checked), labels=tuple(labels), params=params)


def boundary_factor(a_inv: float, z: float) -> float:
    """Correction to the transition rates from a reflecting boundary at distance z.

    :param a_inv: dimensionless inverse acceleration.
    :param z: dimensionless distance to the boundary.
    :return: the factor, 0 on the boundary and 1 far away from it.
    """

    if not (a_inv > 0 and z > 0) or not (math.isfinite(a_inv) and math.isfinite(z)):
        raise InvalidInput(f"boundary_factor: a_inv and z must be positive, got a_inv={a_inv}, z={z}")
    return 1.0 - math.sin(2 * a_inv * math.asinh(z / a_inv)) / (2 * z * math.sqrt(1 + (z / a_inv) ** 2))


def _boundary_factor_derivative(a_inv: float, z: float) -> float:
    """d f / d a_inv of boundary_factor at fixed z."""

    root = math.sqrt(1 + (z / a_inv) ** 2)
    arg = 2 * a_inv * math.asinh(z / a_inv)
    d_arg = 2 * math.asinh(z / a_inv) - 2 * z / (a_inv * root)
    den = 2 * z * root
    d_den = -2 * z**3 / (a_inv**3 * root)
    return -(math.cos(arg) * d_arg * den - math.sin(arg) * d_den) / den**2


def _coth(x: float) -> float:
    e = math.exp(-2 * x)
    return (1 + e) / (1 - e)


def _csch2(x: float) -> float:
    e = math.exp(-2 * x)
    return 4 * e / (1 - e) ** 2


def _rate_factor(p: DetectorParams) -> Tuple[float, float]:
    """The boundary factor and its a_inv derivative, (1, 0) for the unbounded vacuum."""

    if p.scenario == Scenario.unbounded:
        return 1.0, 0.0
    return boundary_factor(p.a_inv, p.z), _boundary_factor_derivative(p.a_inv, p.z)


def kossakowski(p: DetectorParams) -> KossakowskiCoeffs:
    """Dissipator coefficients A = f coth(pi a)/4 and B = f/4 for the detector point p."""

    f, _ = _rate_factor(p)
    return KossakowskiCoeffs(a_coef=f * _coth(math.pi * p.a_inv) / 4, b_coef=f / 4)


def _a_coef_derivative(p: DetectorParams) -> float:
    f, df = _rate_factor(p)
    x = math.pi * p.a_inv
    return (df * _coth(x) - f * math.pi * _csch2(x)) / 4


def bloch_evolve(p: DetectorParams) -> BlochState:
    """Closed-form Bloch vector of the detector at proper time p.tau."""

    c = kossakowski(p)
    decay = math.exp(-2 * c.a_coef * p.tau)
    relax = decay**2
    angle = p.omega_eff * p.tau + p.phi
    s = math.sin(p.theta)
    return BlochState(
        w1=s * decay * math.cos(angle),
        w2=s * decay * math.sin(angle),
        w3=math.cos(p.theta) * relax - math.tanh(math.pi * p.a_inv) * (1 - relax),
    )


def density_matrix(b: BlochState) -> np.ndarray:
    """rho = (I + w . sigma) / 2."""

    if b.length > 1 + 1e-12:
        raise Unphysical(f"density_matrix: Bloch vector length {b.length} exceeds 1")
    return (IDENTITY2 + sum(w * sigma for w, sigma in zip(b.vector, PAULIS))) / 2


def _bloch_derivatives(p: DetectorParams) -> Dict[str, np.ndarray]:
    c = kossakowski(p)
    b = bloch_evolve(p)
    decay = math.exp(-2 * c.a_coef * p.tau)
    relax = decay**2
    angle = p.omega_eff * p.tau + p.phi
    s, co = math.sin(p.theta), math.cos(p.theta)
    t = math.tanh(math.pi * p.a_inv)

    d_a = _a_coef_derivative(p)
    d_relax = -4 * p.tau * d_a * relax
    d_t = math.pi * (1 - t**2)

    return {
        "theta": np.array([co * decay * math.cos(angle), co * decay * math.sin(angle), -s * relax]),
        "phi": np.array([-s * decay * math.sin(angle), s * decay * math.cos(angle), 0.0]),
        "a_inv": np.array(
            [
                -2 * p.tau * d_a * b.w1,
                -2 * p.tau * d_a * b.w2,
                (co + t) * d_relax - d_t * (1 - relax),
            ]
        ),
    }


def stat_model(p: DetectorParams, params: Sequence[str]) -> StatModel:
    """Build the statistical model of the detector for the estimated parameters.

    Derivatives are analytic. The renormalised gap omega_eff is held constant, so d rho / d a_inv
    carries no frequency drift.

    :param p: detector point.
    :param params: ordered labels taken from theta, phi and a_inv.
    :return: the model at p.
    """

    params = tuple(params)
    if len(params) == 0:
        raise EmptyParameterSet("stat_model: no parameters to estimate")
    unknown = [label for label in params if label not in PARAM_LABELS]
    if unknown:
        raise InvalidInput(f"stat_model: unknown parameters {unknown}, expected a subset of {list(PARAM_LABELS)}")

    rho = density_matrix(bloch_evolve(p))
    gradients = _bloch_derivatives(p)
    derivs = [sum(w * sigma for w, sigma in zip(gradients[label], PAULIS)) / 2 for label in params]
    return StatModel.from_arrays(rho, derivs, params, params=p)


def lindblad_rhs(rho, c: KossakowskiCoeffs, omega_eff: float) -> np.ndarray:
    """Right-hand side of the detector master equation in dimensionless time.

    :param rho: density matrix.
    :param c: dissipator coefficients.
    :param omega_eff: renormalised energy gap.
    :return: d rho / d tau.
    """

    rho = as_hermitian(rho, name="rho")
    if rho.shape != (2, 2):
        raise InvalidInput(f"lindblad_rhs: expected a qubit state, got shape {rho.shape}")

    kossakowski_matrix = np.array(
        [[c.a_coef, -1j * c.b_coef, 0], [1j * c.b_coef, c.a_coef, 0], [0, 0, 0]], dtype=complex
    )
    hamiltonian = omega_eff / 2 * SIGMA_Z
    out = -1j * commutator(hamiltonian, rho)
    for i, sigma_i in enumerate(PAULIS):
        for j, sigma_j in enumerate(PAULIS):
            coef = kossakowski_matrix[i, j]
            if coef == 0:
                continue
            out = out + coef / 2 * (2 * sigma_j @ rho @ sigma_i - sigma_i @ sigma_j @ rho - rho @ sigma_i @ sigma_j)
    return out
