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
from typing import Dict, List, Optional, Tuple

from qbounds.config import Bound
from qbounds.exceptions import ColumnAbsent
from qbounds.sweeps.sweeps import SweepRow, detect_crossover

CLAIM_TOLERANCE = 0.05
AGREEMENT_TOL = 1e-2


@dataclass(frozen=True)
class Claim:
    """A feature quoted for a figure panel.

    A crossover claim lists the points where two columns swap order. An agreement claim gives the
    sweep value beyond which (side "above") or below which (side "below") all listed columns agree
    with the Holevo column to AGREEMENT_TOL relative.
    """

    kind: str
    columns: Tuple[str, ...]
    quoted: Tuple[float, ...]
    side: str = ""
    description: str = ""


@dataclass
class ClaimCheck:
    figure_id: str
    claim: Claim
    measured: List[float]
    matched: bool
    message: str

    def to_dict(self) -> Dict:
        return dict(
            figure_id=self.figure_id,
            kind=self.claim.kind,
            columns=list(self.claim.columns),
            description=self.claim.description,
            quoted=list(self.claim.quoted),
            measured=self.measured,
            matched=self.matched,
            message=self.message,
        )


FIGURE_CLAIMS: Dict[str, List[Claim]] = {
    "1b": [
        Claim("crossover", (Bound.sld, Bound.rld), (1.147,), description="SLD and RLD bounds swap order"),
    ],
    "1c": [
        Claim("crossover", (Bound.sld, Bound.rld), (0.593, 1.443), description="SLD and RLD bounds swap order"),
        Claim(
            "agreement",
            (Bound.rld, Bound.nagaoka),
            (2.823,),
            side="above",
            description="RLD, Holevo and Nagaoka bounds agree",
        ),
    ],
    "3b": [
        Claim(
            "agreement",
            (Bound.rld, Bound.nagaoka),
            (0.172,),
            side="below",
            description="RLD, Holevo and Nagaoka bounds agree",
        ),
    ],
    "3c": [
        Claim(
            "agreement",
            (Bound.rld, Bound.nagaoka),
            (2.662,),
            side="above",
            description="RLD, Holevo and Nagaoka bounds agree",
        ),
    ],
}


def _agrees(row: SweepRow, columns: Tuple[str, ...]) -> bool:
    reference = row.values.get(Bound.hcrb)
    if reference is None:
        return False
    for column in columns:
        value = row.values.get(column)
        if value is None or abs(value - reference) > AGREEMENT_TOL * abs(reference):
            return False
    return True


def agreement_threshold(rows: List[SweepRow], columns: Tuple[str, ...], side: str) -> Optional[float]:
    """Edge of the run of rows at the end (above) or start (below) of the sweep where the columns agree."""

    ordered = rows if side == "below" else list(reversed(rows))
    edge = None
    for row in ordered:
        if not _agrees(row, columns):
            break
        edge = row.sweep_value
    return edge


def check_figure_claims(figure_id: str, rows: List[SweepRow], tolerance: float = CLAIM_TOLERANCE) -> List[ClaimCheck]:
    """Compare the features measured on a sweep with the values quoted for the figure panel.

    :param figure_id: panel id, e.g. 1b.
    :param rows: rows of the panel's sweep.
    :param tolerance: absolute tolerance on the sweep variable.
    :return: one check per claim; empty when nothing is quoted for the panel.
    """

    checks = []
    for claim in FIGURE_CLAIMS.get(figure_id, []):
        if claim.kind == "crossover":
            try:
                measured = detect_crossover(rows, *claim.columns)
            except ColumnAbsent:
                measured = []
        else:
            edge = agreement_threshold(rows, claim.columns, claim.side)
            measured = [] if edge is None else [edge]

        matched = all(any(abs(q - m) <= tolerance for m in measured) for q in claim.quoted)
        quoted = ", ".join(f"{q:g}" for q in claim.quoted)
        found = ", ".join(f"{m:.4g}" for m in measured) or "none"
        message = f"{figure_id}: {claim.description}: quoted {quoted}, measured {found}"
        if matched:
            logging.info(f"check_figure_claims: {message}")
        else:
            logging.warning(f"check_figure_claims: {message} (outside +/-{tolerance})")
        checks.append(ClaimCheck(figure_id=figure_id, claim=claim, measured=measured, matched=matched, message=message))
    return checks
