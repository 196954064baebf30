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

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import jsonschema
import numpy as np
import pandas as pd
import pendulum

from qbounds.config import ANALYTIC_COLUMNS, Bound, project_path
from qbounds.detector import DetectorParams, Scenario, stat_model
from qbounds.exceptions import ColumnAbsent, InvalidInput, OutputError, QBoundsError, RangeError, SchemaError
from qbounds.holevo import BoundReport, bound_report

FIGURE_IDS = ("1a", "1b", "1c", "2a", "2b", "2c", "3a", "3b", "3c", "4a", "4b", "4c")
BOUND_ORDER = (Bound.sld, Bound.rld, Bound.upper, Bound.hcrb, Bound.nagaoka)


def schema_path(name: str) -> str:
    return project_path("sweeps", "schema", f"{name}.json")


def validate_document(document, name: str):
    """Validate a JSON document against one of the bundled schemas.

    :param document: the decoded JSON document.
    :param name: schema file name without extension.
    :return: None.
    """

    with open(schema_path(name), mode="r") as f:
        schema = json.load(f)
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        error = errors[0]
        pointer = "".join(f"/{part}" for part in error.absolute_path)
        raise SchemaError(error.message, pointer=pointer)


def _decode(text) -> dict:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}") from e


def _closed_form_applies(scenario: Scenario, params: Tuple[str, ...]) -> bool:
    return scenario == Scenario.unbounded and sorted(params) == ["phi", "theta"]


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepConfig:
    """A validated sweep: fixed parameter values, one swept variable and the bounds to compute.

    :param scenario: unbounded or bounded vacuum.
    :param params_to_estimate: estimated parameter labels.
    :param fixed: values of the parameters that are not swept.
    :param sweep: the swept variable and its grid.
    :param bounds: bound names to compute.
    :param omega_eff: renormalised energy gap.
    :param csv_path: optional CSV output path.
    :param svg_path: optional SVG output path.
    :param id: optional label.
    """

    scenario: Scenario
    params_to_estimate: Tuple[str, ...]
    fixed: Dict[str, float]
    sweep: SweepSpec
    bounds: Tuple[str, ...]
    omega_eff: float = 0.0
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None
    id: Optional[str] = None

    @property
    def columns(self) -> List[str]:
        """Names of the bound columns, in output order."""

        columns = [name for name in BOUND_ORDER if name in self.bounds]
        if Bound.analytic in self.bounds:
            columns += ANALYTIC_COLUMNS
        return columns

    def grid(self) -> np.ndarray:
        return self.sweep.grid()

    def point(self, value: float) -> DetectorParams:
        values = {"phi": 0.0, **self.fixed, self.sweep.variable: float(value)}
        return DetectorParams(
            theta=values["theta"],
            phi=values["phi"],
            a_inv=values["a_inv"],
            tau=values["tau"],
            scenario=self.scenario,
            z=values.get("z") if self.scenario == Scenario.bounded else None,
            omega_eff=self.omega_eff,
        )

    @staticmethod
    def from_dict(dict_: Dict) -> SweepConfig:
        """Build a config from a schema-valid document, checking the semantic invariants."""

        scenario = Scenario(dict_["scenario"])
        params = tuple(dict_["params"])
        fixed = {key: float(value) for key, value in dict_["fixed"].items()}
        sweep = SweepSpec(
            variable=dict_["sweep"]["variable"],
            start=float(dict_["sweep"]["from"]),
            stop=float(dict_["sweep"]["to"]),
            points=int(dict_["sweep"]["points"]),
        )

        if sweep.variable in fixed:
            raise RangeError(f"sweep variable '{sweep.variable}' must not also be fixed")
        if not sweep.start < sweep.stop:
            raise RangeError(f"sweep range must satisfy from < to, got [{sweep.start}, {sweep.stop}]")
        if scenario == Scenario.bounded and "z" not in fixed:
            raise RangeError("the bounded scenario requires a fixed value for z")
        missing = [name for name in ("theta", "a_inv", "tau") if name not in fixed and name != sweep.variable]
        if missing:
            raise RangeError(f"no fixed value for {missing}")

        if "bounds" in dict_:
            bounds = tuple(dict_["bounds"])
            if Bound.analytic in bounds and not _closed_form_applies(scenario, params):
                raise RangeError("analytic bounds need the unbounded scenario and params theta and phi")
        else:
            bounds = tuple(BOUND_ORDER)
            if _closed_form_applies(scenario, params):
                bounds += (Bound.analytic,)

        output = dict_.get("output", {})
        config = SweepConfig(
            scenario=scenario,
            params_to_estimate=params,
            fixed=fixed,
            sweep=sweep,
            bounds=bounds,
            omega_eff=float(dict_.get("omega_eff", 0.0)),
            csv_path=output.get("csv_path"),
            svg_path=output.get("svg_path"),
            id=dict_.get("id"),
        )
        for value in (sweep.start, sweep.stop):
            try:
                config.point(value)
            except InvalidInput as e:
                raise RangeError(str(e)) from e
        return config

    def to_dict(self) -> Dict:
        dict_ = dict(
            scenario=self.scenario.value,
            params=list(self.params_to_estimate),
            fixed=dict(self.fixed),
            sweep={"variable": self.sweep.variable, "from": self.sweep.start, "to": self.sweep.stop, "points": self.sweep.points},
            bounds=list(self.bounds),
            omega_eff=self.omega_eff,
        )
        if self.id is not None:
            dict_["id"] = self.id
        if self.csv_path is not None:
            dict_["output"] = {"csv_path": self.csv_path}
            if self.svg_path is not None:
                dict_["output"]["svg_path"] = self.svg_path
        return dict_


@dataclass(frozen=True)
class PointConfig:
    params: DetectorParams
    labels: Tuple[str, ...]
    bounds: Optional[Tuple[str, ...]] = None


@dataclass
class SweepRow:
    """One grid point of a sweep; absent bounds are None."""

    variable: str
    sweep_value: float
    values: Dict[str, Optional[float]]
    hierarchy_ok: bool
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def parse_config(text) -> SweepConfig:
    """Parse and validate a UTF-8 JSON sweep configuration.

    :param text: the JSON document as str or bytes.
    :return: the config.
    """

    document = _decode(text)
    validate_document(document, "sweep_config")
    return SweepConfig.from_dict(document)


def load_config(path: str) -> SweepConfig:
    with open(path, mode="rb") as f:
        return parse_config(f.read())


def figure_config(figure_id: str) -> SweepConfig:
    """Built-in configuration reproducing one of the figure panels, e.g. 1b."""

    if figure_id not in FIGURE_IDS:
        raise RangeError(f"unknown figure id '{figure_id}', expected one of {list(FIGURE_IDS)}")
    return load_config(project_path("sweeps", "figures", f"fig{figure_id}.json"))


def parse_point_config(text) -> PointConfig:
    """Parse and validate a single point configuration for qbounds report."""

    document = _decode(text)
    validate_document(document, "point_config")
    point = document["point"]
    scenario = Scenario(document["scenario"])
    if scenario == Scenario.bounded and "z" not in point:
        raise RangeError("the bounded scenario requires a value for z")
    bounds = tuple(document["bounds"]) if "bounds" in document else None
    labels = tuple(document["params"])
    if bounds is not None and Bound.analytic in bounds and not _closed_form_applies(scenario, labels):
        raise RangeError("analytic bounds need the unbounded scenario and params theta and phi")
    try:
        params = DetectorParams(
            theta=float(point["theta"]),
            phi=float(point.get("phi", 0.0)),
            a_inv=float(point["a_inv"]),
            tau=float(point["tau"]),
            scenario=scenario,
            z=float(point["z"]) if scenario == Scenario.bounded else None,
            omega_eff=float(document.get("omega_eff", 0.0)),
        )
    except InvalidInput as e:
        raise RangeError(str(e)) from e
    return PointConfig(params=params, labels=labels, bounds=bounds)


def row_values(report: BoundReport, columns: List[str]) -> Dict[str, Optional[float]]:
    """Pick the requested bound columns out of a report."""

    analytic = report.analytic
    available = {
        Bound.sld: report.c_sld,
        Bound.rld: report.c_rld,
        Bound.upper: report.c_upper,
        Bound.hcrb: report.c_hcrb,
        Bound.nagaoka: report.c_nagaoka,
        "analytic_sld": analytic.c_sld if analytic else None,
        "analytic_rld": analytic.c_rld if analytic else None,
        "analytic_hcrb": analytic.c_hcrb if analytic else None,
        "analytic_nb": analytic.c_nb if analytic else None,
    }
    return {column: available[column] for column in columns}


def evaluate_point(config: SweepConfig, value: float) -> SweepRow:
    """Evaluate one grid point; domain errors are recorded on the row rather than raised."""

    columns = config.columns
    try:
        model = stat_model(config.point(value), config.params_to_estimate)
        report = bound_report(model, config.bounds)
        return SweepRow(
            variable=config.sweep.variable,
            sweep_value=float(value),
            values=row_values(report, columns),
            hierarchy_ok=report.hierarchy_ok,
        )
    except QBoundsError as e:
        logging.warning(f"evaluate_point: {config.sweep.variable}={value:.12g} failed: {type(e).__name__}: {e}")
        return SweepRow(
            variable=config.sweep.variable,
            sweep_value=float(value),
            values={column: None for column in columns},
            hierarchy_ok=False,
            error=f"{type(e).__name__}: {e}",
        )


def run_sweep(config: SweepConfig, jobs: int = 1) -> List[SweepRow]:
    """Evaluate every grid point of a sweep.

    :param config: the sweep.
    :param jobs: number of worker processes; 1 evaluates in the calling process.
    :return: one row per grid point in ascending sweep order.
    """

    grid = config.grid()
    total = len(grid)
    start = pendulum.now()
    logging.info(
        f"Running sweep {config.id or ''} over {config.sweep.variable} in [{config.sweep.start}, {config.sweep.stop}] "
        f"with {total} points and {jobs} jobs"
    )

    rows: List[Optional[SweepRow]] = [None] * total
    step = max(1, total // 10)
    if jobs <= 1:
        for i, value in enumerate(grid):
            rows[i] = evaluate_point(config, value)
            if (i + 1) % step == 0 or i + 1 == total:
                logging.info(f"Evaluated {i + 1}/{total} points: {(i + 1) / total * 100:.2f}%")
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {executor.submit(evaluate_point, config, value): i for i, value in enumerate(grid)}
            for done, future in enumerate(as_completed(futures), start=1):
                rows[futures[future]] = future.result()
                if done % step == 0 or done == total:
                    logging.info(f"Evaluated {done}/{total} points: {done / total * 100:.2f}%")

    failures = sum(row.failed for row in rows)
    elapsed = pendulum.now() - start
    logging.info(f"Sweep finished in {elapsed.in_words()}: {total - failures} points evaluated, {failures} failed")
    return rows


def failure_fraction(rows: List[SweepRow]) -> float:
    return sum(row.failed for row in rows) / len(rows) if rows else 0.0


def detect_crossover(rows: List[SweepRow], col_a: str, col_b: str) -> List[float]:
    """Abscissas where col_a - col_b changes sign, by linear interpolation between grid points.

    :param rows: sweep rows in ascending order.
    :param col_a: first column.
    :param col_b: second column.
    :return: crossing points in ascending order.
    """

    for column in (col_a, col_b):
        if not rows or column not in rows[0].values:
            raise ColumnAbsent(f"detect_crossover: column '{column}' is not in the sweep")

    present = [
        (row.sweep_value, row.values[col_a] - row.values[col_b])
        for row in rows
        if row.values.get(col_a) is not None and row.values.get(col_b) is not None
    ]
    if len(present) < 2:
        raise ColumnAbsent(f"detect_crossover: columns '{col_a}' and '{col_b}' are present on fewer than two rows")

    crossings = []
    for (x0, d0), (x1, d1) in zip(present, present[1:]):
        if d0 == 0.0:
            if not crossings or crossings[-1] != x0:
                crossings.append(x0)
        elif d0 * d1 < 0:
            crossings.append(x0 + (x1 - x0) * d0 / (d0 - d1))
    if present[-1][1] == 0.0 and (not crossings or crossings[-1] != present[-1][0]):
        crossings.append(present[-1][0])
    return crossings


def rows_to_dataframe(rows: List[SweepRow]) -> pd.DataFrame:
    if not rows:
        raise InvalidInput("rows_to_dataframe: no rows")
    variable = rows[0].variable
    columns = list(rows[0].values.keys())
    df = pd.DataFrame(
        [{variable: row.sweep_value, **row.values, "hierarchy_ok": row.hierarchy_ok} for row in rows],
        columns=[variable] + columns + ["hierarchy_ok"],
    )
    df[[variable] + columns] = df[[variable] + columns].astype(float)
    return df


def write_csv(rows: List[SweepRow], path: str):
    """Write sweep rows as CSV: 12 significant digits, empty fields for absent values, LF line endings.

    :param rows: non-empty list of rows.
    :param path: output file path.
    :return: None.
    """

    df = rows_to_dataframe(rows)
    try:
        parent = os.path.dirname(path)
        if parent:
            Path(parent).mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format="%.12g", na_rep="", lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"write_csv: could not write {path}: {e}") from e
