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

from typing import Any, Optional


class QBoundsError(Exception):
    """Base class for every error raised by qbounds."""


class InvalidInput(QBoundsError, ValueError):
    """A matrix or parameter is malformed: wrong shape, non-finite or outside its domain."""


class NotPositiveSemidefinite(QBoundsError):
    pass


class Unphysical(QBoundsError):
    """A Bloch vector lies outside the unit ball."""


class EmptyParameterSet(QBoundsError, ValueError):
    pass


class RankDeficient(QBoundsError):
    """The state or a constraint system is not of full rank."""


class SingularInformation(QBoundsError):
    """An information matrix is too ill-conditioned to invert."""


class IncompletePovm(QBoundsError, ValueError):
    pass


class BoundedScenarioUnsupported(QBoundsError):
    pass


class InconsistentEqualities(QBoundsError):
    pass


class SolverFailure(QBoundsError):
    """The SDP solver did not reach an optimal point.

    :param message: description of the failure.
    :param solution: the SdpSolution returned by the solver, when there is one.
    """

    def __init__(self, message: str, solution: Optional[Any] = None):
        super().__init__(message)
        self.solution = solution


class SchemaError(QBoundsError, ValueError):
    """A configuration document does not match its JSON schema.

    :param message: the validation message.
    :param pointer: JSON pointer to the offending value, e.g. /sweep/points.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class RangeError(QBoundsError, ValueError):
    """A configuration value is syntactically valid but semantically out of range."""


class ColumnAbsent(QBoundsError, KeyError):
    pass


class OutputError(QBoundsError, OSError):
    """A CSV or SVG file could not be written."""
