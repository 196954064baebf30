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

import dataclasses
import json
import os
import unittest
from unittest.mock import patch

import pandas as pd
from click.testing import CliRunner

from qbounds.cli import cli
from qbounds.config import Bound, project_path
from qbounds.sweeps.sweeps import SweepRow, SweepSpec, figure_config


def fixture_path(name: str) -> str:
    return project_path("tests", "fixtures", name)


class TestReport(unittest.TestCase):
    def test_report(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(cli, ["report", "--config", fixture_path("point_reference.json"), "--output", "report.json"])
            self.assertEqual(0, result.exit_code, msg=result.output)

            with open("report.json", mode="r") as f:
                report = json.load(f)
            self.assertEqual(["theta", "phi"], report["labels"])
            self.assertTrue(report["hierarchy_ok"])
            self.assertAlmostEqual(8.7128, report["c_rld"], delta=1e-3)
            self.assertAlmostEqual(report["c_rld"], report["c_hcrb"], delta=1e-5 * report["c_rld"])
            self.assertAlmostEqual(10.976, report["c_nagaoka"], delta=1e-2)
            self.assertIsNotNone(report["analytic"])
            for deviation in report["analytic_deviation"].values():
                self.assertLess(deviation, 1e-5)

    def test_report_stdout(self):
        runner = CliRunner()
        result = runner.invoke(cli, ["report", "--config", fixture_path("point_reference.json")])
        self.assertEqual(0, result.exit_code, msg=result.output)
        self.assertIn('"c_sld"', result.output)
        self.assertIn('"c_nagaoka"', result.output)

    def test_report_invalid(self):
        runner = CliRunner()
        result = runner.invoke(cli, ["report", "--config", fixture_path("point_unknown_key.json")])
        self.assertEqual(2, result.exit_code)
        self.assertIn("Error:", result.output)
        self.assertIn("tolerance", result.output)

        result = runner.invoke(cli, ["report", "--config", fixture_path("point_bounded_no_z.json")])
        self.assertEqual(2, result.exit_code)
        self.assertIn("z", result.output)

        result = runner.invoke(cli, ["report", "--config", fixture_path("does_not_exist.json")])
        self.assertEqual(2, result.exit_code)

    def test_report_singular_information(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(cli, ["report", "--config", fixture_path("point_singular.json"), "--output", "report.json"])
            self.assertEqual(0, result.exit_code, msg=result.output)
            with open("report.json", mode="r") as f:
                report = json.load(f)
        self.assertIsNone(report["c_sld"])
        self.assertIsNone(report["c_upper"])
        self.assertTrue(report["hierarchy_ok"])
        self.assertTrue(any("SingularInformation" in note for note in report["notes"]))


class TestSweep(unittest.TestCase):
    def test_sweep(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(cli, ["sweep", "--config", fixture_path("sweep_small.json")])
            self.assertEqual(0, result.exit_code, msg=result.output)
            self.assertTrue(os.path.isfile(os.path.join("out", "cli.svg")))

            df = pd.read_csv(os.path.join("out", "cli.csv"))
            self.assertEqual(
                ["tau", Bound.sld, Bound.rld, Bound.upper, "analytic_sld", "analytic_rld", "analytic_hcrb", "analytic_nb", "hierarchy_ok"],
                list(df.columns),
            )
            self.assertEqual(4, len(df))
            self.assertTrue(bool(df["hierarchy_ok"].all()))
            for column in (Bound.sld, Bound.rld):
                relative = (df[column] - df[f"analytic_{column}"]).abs() / df[column]
                self.assertLess(float(relative.max()), 1e-8)

    def test_sweep_overrides(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(
                cli,
                ["sweep", "--config", fixture_path("sweep_small.json"), "--csv", "a.csv", "--svg", "a.svg", "--jobs", "2"],
            )
            self.assertEqual(0, result.exit_code, msg=result.output)
            self.assertTrue(os.path.isfile("a.csv"))
            self.assertTrue(os.path.isfile("a.svg"))
            self.assertFalse(os.path.exists("out"))

    def test_sweep_invalid(self):
        runner = CliRunner()
        result = runner.invoke(cli, ["sweep", "--config", fixture_path("point_reference.json")])
        self.assertEqual(2, result.exit_code)

        result = runner.invoke(cli, ["sweep", "--config", fixture_path("sweep_small.json"), "--jobs", "0"])
        self.assertEqual(2, result.exit_code)

    def test_sweep_failures(self):
        rows = [
            SweepRow(variable="tau", sweep_value=0.2, values={Bound.sld: 1.0}, hierarchy_ok=True),
            SweepRow(variable="tau", sweep_value=0.4, values={Bound.sld: None}, hierarchy_ok=False, error="SolverFailure: x"),
        ]
        runner = CliRunner()
        with runner.isolated_filesystem():
            with patch("qbounds.cli.run_sweep", return_value=rows):
                result = runner.invoke(cli, ["sweep", "--config", fixture_path("sweep_small.json")])
            self.assertEqual(3, result.exit_code)
            self.assertIn("50.0% of grid points failed", result.output)
            self.assertTrue(os.path.isfile(os.path.join("out", "cli.csv")))


class TestFigure(unittest.TestCase):
    def short_1b(self):
        config = figure_config("1b")
        return dataclasses.replace(
            config,
            bounds=(Bound.sld, Bound.rld),
            sweep=SweepSpec(variable="tau", start=0.5, stop=1.5, points=5),
        )

    def test_figure_reruns_identically(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            with patch("qbounds.cli.figure_config", return_value=self.short_1b()):
                first = runner.invoke(cli, ["figure", "--id", "1b", "--output-dir", "first"])
                second = runner.invoke(cli, ["figure", "--id", "1b", "--output-dir", "second"])
            self.assertEqual(0, first.exit_code, msg=first.output)
            self.assertEqual(0, second.exit_code, msg=second.output)
            for name in ("fig1b.csv", "fig1b.svg", "fig1b.claims.json"):
                with open(os.path.join("first", name), mode="rb") as f:
                    expected = f.read()
                with open(os.path.join("second", name), mode="rb") as f:
                    self.assertEqual(expected, f.read(), msg=name)

    def test_figure_strict_claims(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            with patch("qbounds.cli.figure_config", return_value=self.short_1b()):
                result = runner.invoke(cli, ["figure", "--id", "1b", "--strict-claims"])
            self.assertEqual(4, result.exit_code)
            self.assertIn("1 of 1 claims for figure 1b not reproduced (crossover)", result.output)
            self.assertTrue(os.path.isfile("fig1b.claims.json"))

    def test_figure_claims_unwritable(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            os.makedirs(os.path.join("results", "fig1b.claims.json"))
            with patch("qbounds.cli.figure_config", return_value=self.short_1b()):
                result = runner.invoke(cli, ["figure", "--id", "1b", "--output-dir", "results"])
            self.assertEqual(1, result.exit_code)
            self.assertIn("could not write", result.output)
            self.assertIsInstance(result.exception, SystemExit)

    def test_figure(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            with patch("qbounds.cli.figure_config", return_value=self.short_1b()):
                result = runner.invoke(cli, ["figure", "--id", "1b", "--output-dir", "results"])
            self.assertEqual(0, result.exit_code, msg=result.output)

            self.assertTrue(os.path.isfile(os.path.join("results", "fig1b.csv")))
            self.assertTrue(os.path.isfile(os.path.join("results", "fig1b.svg")))
            with open(os.path.join("results", "fig1b.claims.json"), mode="r") as f:
                claims = json.load(f)
            self.assertEqual(1, len(claims))
            self.assertEqual("crossover", claims[0]["kind"])
            self.assertEqual([], claims[0]["measured"])
            self.assertFalse(claims[0]["matched"])

            with open(os.path.join("results", "fig1b.svg"), mode="r") as f:
                self.assertIn("Figure 1b", f.read())

    def test_figure_without_claims(self):
        config = figure_config("2a")
        config = dataclasses.replace(
            config,
            bounds=(Bound.sld, Bound.rld, Bound.upper),
            sweep=SweepSpec(variable="a_inv", start=0.3, stop=1.0, points=3),
        )
        runner = CliRunner()
        with runner.isolated_filesystem():
            with patch("qbounds.cli.figure_config", return_value=config):
                result = runner.invoke(cli, ["figure", "--id", "2a"])
            self.assertEqual(0, result.exit_code, msg=result.output)
            self.assertTrue(os.path.isfile("fig2a.csv"))
            self.assertFalse(os.path.exists("fig2a.claims.json"))

    def test_unknown_figure(self):
        result = CliRunner().invoke(cli, ["figure", "--id", "9z"])
        self.assertEqual(2, result.exit_code)


if __name__ == "__main__":
    unittest.main()
