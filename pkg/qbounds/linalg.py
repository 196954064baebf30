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
from dataclasses import dataclass
from typing import Callable

import numpy as np

from qbounds.exceptions import InvalidInput, NotPositiveSemidefinite

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

JACOBI_TOL = 1e-15
JACOBI_MAX_SWEEPS = 50


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    """Convert a to a complex square matrix with finite entries.

    :param a: array like.
    :param name: name used in error messages.
    :return: a complex ndarray.
    """

    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidInput(f"as_square_matrix: {name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput(f"as_square_matrix: {name} has non-finite entries")
    return m


def as_hermitian(a, tol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Validate that a is Hermitian up to tol and return the symmetrised matrix (A + A†)/2.

    :param a: array like.
    :param tol: tolerance on max|A - A†| relative to max(1, max|A|).
    :param name: name used in error messages.
    :return: the Hermitian part of a.
    """

    m = as_square_matrix(a, name=name)
    scale = max(1.0, float(np.max(np.abs(m))))
    deviation = float(np.max(np.abs(m - m.conj().T)))
    if deviation > tol * scale:
        raise InvalidInput(f"as_hermitian: {name} is not Hermitian (max |A - A^H| = {deviation:.3e})")
    return (m + m.conj().T) / 2


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition A = V diag(values) V† of a Hermitian matrix.

    :param values: real eigenvalues in ascending order.
    :param vectors: unitary matrix whose columns are the eigenvectors.
    """

    values: np.ndarray
    vectors: np.ndarray

    def apply(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Return V diag(func(values)) V†."""

        return (self.vectors * func(self.values)) @ self.vectors.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda v: v)

    def inverse(self) -> np.ndarray:
        if np.any(self.values == 0):
            raise InvalidInput("EigenDecomposition.inverse: matrix is singular")
        return self.apply(lambda v: 1.0 / v)

    def sqrt(self) -> np.ndarray:
        return self.apply(lambda v: np.sqrt(np.clip(v, 0.0, None)))

    @property
    def condition_number(self) -> float:
        magnitudes = np.abs(self.values)
        smallest = float(np.min(magnitudes))
        if smallest == 0.0:
            return float("inf")
        return float(np.max(magnitudes)) / smallest


def _off_diagonal_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - np.diag(np.diag(m))))


def eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix with the cyclic complex Jacobi method.

    Each rotation removes one off-diagonal pair (p, q): the phase of a_pq is first absorbed into
    column q, after which a real Givens rotation annihilates the remaining real entry. Sweeps stop
    once the off-diagonal Frobenius norm falls below tol times the norm of the matrix.

    :param a: Hermitian matrix.
    :param tol: relative off-diagonal tolerance.
    :param max_sweeps: maximum number of full sweeps.
    :return: eigenvalues in ascending order and the matching orthonormal eigenvectors.
    """

    m = as_hermitian(a).copy()
    n = m.shape[0]
    vectors = np.eye(n, dtype=complex)
    norm = float(np.linalg.norm(m))

    converged = False
    for _ in range(max_sweeps):
        off = _off_diagonal_norm(m)
        if off <= tol * norm:
            converged = True
            break

        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(m[p, q])
                if r == 0.0:
                    continue
                phase = m[p, q] / r
                theta = 0.5 * np.arctan2(2 * r, (m[p, p] - m[q, q]).real)
                c, s = np.cos(theta), np.sin(theta)
                rotation = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])

                idx = [p, q]
                m[:, idx] = m[:, idx] @ rotation
                m[idx, :] = rotation.conj().T @ m[idx, :]
                vectors[:, idx] = vectors[:, idx] @ rotation
                m[p, q] = m[q, p] = 0.0
                m[p, p] = m[p, p].real
                m[q, q] = m[q, q].real

    if not converged:
        off = _off_diagonal_norm(m)
        if off > tol * norm:
            logging.warning(f"eigh: Jacobi sweeps stopped at {max_sweeps} with off-diagonal norm {off:.3e}")

    values = np.diag(m).real
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=vectors[:, order])


def trace_norm(a) -> float:
    """Sum of singular values of a square matrix, from the spectrum of A†A."""

    m = as_square_matrix(a)
    gram = m.conj().T @ m
    values = eigh((gram + gram.conj().T) / 2).values
    return float(np.sum(np.sqrt(np.clip(values, 0.0, None))))


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""

    return np.kron(np.atleast_2d(np.asarray(a, dtype=complex)), np.atleast_2d(np.asarray(b, dtype=complex)))


def psd_factor(g, rank_tol: float = 1e-10, psd_tol: float = 1e-10) -> np.ndarray:
    """Factor a positive semidefinite matrix as G = S† S.

    Eigenvalues below rank_tol times the largest are dropped, so S has one row per retained
    direction.

    :param g: Hermitian positive semidefinite matrix of size m.
    :param rank_tol: relative threshold below which eigenvalues count as zero.
    :param psd_tol: relative tolerance for negative eigenvalues.
    :return: S with shape (r, m).
    """

    dec = eigh(g)
    largest = max(float(np.max(np.abs(dec.values))), 0.0)
    if float(dec.values[0]) < -psd_tol * max(1.0, largest):
        raise NotPositiveSemidefinite(f"psd_factor: smallest eigenvalue {dec.values[0]:.3e} is negative")

    keep = dec.values > rank_tol * largest
    if not np.any(keep):
        return np.zeros((0, dec.values.shape[0]), dtype=complex)
    return np.sqrt(dec.values[keep])[:, None] * dec.vectors[:, keep].conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a
