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
import sys
from typing import List, Optional

import click

from qbounds.detector import stat_model
from qbounds.exceptions import OutputError, QBoundsError, RangeError, SchemaError
from qbounds.holevo import bound_report
from qbounds.sweeps.chart import render_svg
from qbounds.sweeps.claims import check_figure_claims
from qbounds.sweeps.sweeps import (
    FIGURE_IDS,
    SweepConfig,
    SweepRow,
    failure_fraction,
    figure_config,
    load_config,
    parse_point_config,
    run_sweep,
    write_csv,
)

EXIT_SCHEMA = 2
EXIT_SOLVER = 3
EXIT_CLAIMS = 4
MAX_FAILURE_FRACTION = 0.1


def _fail(message: str, code: int):
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


def _write_outputs(config: SweepConfig, rows: List[SweepRow], csv_path: str, svg_path: Optional[str]):
    try:
        write_csv(rows, csv_path)
        logging.info(f"Wrote {len(rows)} rows to {csv_path}")
        if svg_path is not None:
            title = f"Figure {config.id}" if config.id else ""
            render_svg(rows, svg_path, {"title": title})
            logging.info(f"Wrote chart to {svg_path}")
    except OutputError as e:
        _fail(str(e), 1)


def _check_failures(rows: List[SweepRow]):
    fraction = failure_fraction(rows)
    if fraction > MAX_FAILURE_FRACTION:
        _fail(f"{fraction * 100:.1f}% of grid points failed", EXIT_SOLVER)


@click.group()
@click.option("--verbose", is_flag=True, default=False, help="Log at DEBUG level.")
def cli(verbose: bool):
    """qbounds: multiparameter precision bounds for an accelerated two-level detector."""

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
    )


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None, help="Write JSON here.")
def report(config_path: str, output_path: Optional[str]):
    """Compute every bound at a single point and print the report as JSON."""

    try:
        with open(config_path, mode="rb") as f:
            point = parse_point_config(f.read())
    except (SchemaError, RangeError) as e:
        _fail(str(e), EXIT_SCHEMA)

    try:
        result = bound_report(stat_model(point.params, point.labels), point.bounds)
    except QBoundsError as e:
        _fail(f"{type(e).__name__}: {e}", EXIT_SOLVER)

    text = json.dumps(result.to_dict(), indent=2)
    if output_path is None:
        click.echo(text)
    else:
        with open(output_path, mode="w", encoding="utf-8") as f:
            f.write(text + "\n")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Overrides output.csv_path.")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None, help="Overrides output.svg_path.")
def sweep(config_path: str, jobs: int, csv_path: Optional[str], svg_path: Optional[str]):
    """Run a parameter sweep and write its CSV table and SVG chart."""

    try:
        config = load_config(config_path)
    except (SchemaError, RangeError) as e:
        _fail(str(e), EXIT_SCHEMA)

    rows = run_sweep(config, jobs=jobs)
    _write_outputs(config, rows, csv_path or config.csv_path or "sweep.csv", svg_path or config.svg_path)
    _check_failures(rows)


@cli.command()
@click.option("--id", "figure_id", type=click.Choice(FIGURE_IDS), required=True, help="Figure panel.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes.")
@click.option("--output-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--strict-claims", is_flag=True, default=False, help="Exit with status 4 when a figure claim is not reproduced.")
def figure(figure_id: str, jobs: int, output_dir: str, strict_claims: bool):
    """Reproduce one figure panel with its built-in configuration."""

    config = figure_config(figure_id)
    rows = run_sweep(config, jobs=jobs)
    csv_path = os.path.join(output_dir, config.csv_path)
    _write_outputs(config, rows, csv_path, os.path.join(output_dir, config.svg_path))

    checks = check_figure_claims(figure_id, rows)
    if checks:
        claims_path = os.path.splitext(csv_path)[0] + ".claims.json"
        try:
            with open(claims_path, mode="w", encoding="utf-8") as f:
                json.dump([check.to_dict() for check in checks], f, indent=2)
        except OSError as e:
            _fail(f"could not write {claims_path}: {e}", 1)
        logging.info(f"Wrote {len(checks)} claim checks to {claims_path}")
    _check_failures(rows)

    unmatched = [check for check in checks if not check.matched]
    if strict_claims and unmatched:
        kinds = ", ".join(sorted({check.claim.kind for check in unmatched}))
        _fail(f"{len(unmatched)} of {len(checks)} claims for figure {figure_id} not reproduced ({kinds})", EXIT_CLAIMS)


if __name__ == "__main__":
    cli()
