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


import csv
import os
from pathlib import Path
from typing import List

from qbounds.sweeps.sweeps import FIGURE_IDS, SweepConfig, figure_config

FIELDS = ["id", "scenario", "params", "variable", "from", "to", "points", "fixed", "bounds"]


def describe_config(config: SweepConfig) -> dict:
    """
    Flatten a figure configuration into one table row.

    :param config: the figure configuration.
    :return The row, with lists joined by spaces.
    """
    fixed = " ".join(f"{name}={value:g}" for name, value in sorted(config.fixed.items()))
    return {
        "id": config.id,
        "scenario": config.scenario.value,
        "params": " ".join(config.params_to_estimate),
        "variable": config.sweep.variable,
        "from": f"{config.sweep.start:g}",
        "to": f"{config.sweep.stop:g}",
        "points": config.sweep.points,
        "fixed": fixed,
        "bounds": " ".join(config.columns),
    }


def figure_rows() -> List[dict]:
    return [describe_config(figure_config(figure_id)) for figure_id in FIGURE_IDS]


def generate_csv(*, dst_path: str = "figures.csv"):
    """Write the built-in figure configurations as CSV for inclusion in Sphinx.

    :param dst_path: Path to the CSV file.
    """
    parent = os.path.dirname(dst_path)
    if parent:
        Path(parent).mkdir(exist_ok=True, parents=True)

    with open(dst_path, "w", newline="") as f_out:
        writer = csv.DictWriter(f_out, fieldnames=FIELDS)
        writer.writeheader()
        writer.writerows(figure_rows())


if __name__ == "__main__":
    generate_csv()
