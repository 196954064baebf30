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

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from jinja2 import Template

from qbounds.config import project_path
from qbounds.exceptions import InvalidInput, OutputError
from qbounds.sweeps.sweeps import SweepRow

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf")


@dataclass
class ChartStyle:
    """Look of a sweep chart. Colours are assigned to columns in order from the palette."""

    width: int = 760
    height: int = 460
    margin_left: int = 80
    margin_right: int = 150
    margin_top: int = 40
    margin_bottom: int = 56
    title: str = ""
    y_label: str = "bound"
    font_family: str = "sans-serif"
    font_size: int = 12
    stroke_width: float = 1.5
    background: str = "#ffffff"
    palette: Tuple[str, ...] = PALETTE
    ticks: int = 5

    @staticmethod
    def from_dict(dict_: Optional[Dict]) -> ChartStyle:
        return ChartStyle(**(dict_ or {}))


@dataclass
class Tick:
    position: float
    label: str


@dataclass
class Series:
    name: str
    color: str
    points: str


def render_template(template_path: str, **kwargs) -> str:
    """Render a Jinja2 template file.

    :param template_path: the path to the template.
    :param kwargs: the variables to substitute.
    :return: the rendered text.
    """

    with open(template_path, mode="r") as f:
        template = Template(f.read(), keep_trailing_newline=True)
    return template.render(**kwargs)


def _padded_range(values: List[float]) -> Tuple[float, float]:
    low, high = min(values), max(values)
    if high == low:
        pad = abs(high) * 0.05 or 1.0
    else:
        pad = (high - low) * 0.05
    return low - pad, high + pad


def render_svg(rows: List[SweepRow], path: str, styling: Optional[Dict] = None):
    """Render sweep rows as a self-contained SVG line chart, one polyline per bound column.

    :param rows: non-empty list of rows.
    :param path: output file path.
    :param styling: optional ChartStyle fields.
    :return: None.
    """

    if not rows:
        raise InvalidInput("render_svg: no rows")
    style = ChartStyle.from_dict(styling)
    columns = list(rows[0].values.keys())

    xs = [row.sweep_value for row in rows]
    ys = [row.values[c] for row in rows for c in columns if row.values[c] is not None]
    x_low, x_high = min(xs), max(xs)
    if x_high == x_low:
        x_low, x_high = x_low - 0.5, x_high + 0.5
    y_low, y_high = _padded_range(ys) if ys else (0.0, 1.0)

    plot_left, plot_right = style.margin_left, style.width - style.margin_right
    plot_top, plot_bottom = style.margin_top, style.height - style.margin_bottom

    def px(x: float) -> float:
        return plot_left + (x - x_low) / (x_high - x_low) * (plot_right - plot_left)

    def py(y: float) -> float:
        return plot_bottom - (y - y_low) / (y_high - y_low) * (plot_bottom - plot_top)

    series_list = []
    for i, column in enumerate(columns):
        points = " ".join(
            f"{px(row.sweep_value):.2f},{py(row.values[column]):.2f}" for row in rows if row.values[column] is not None
        )
        series_list.append(Series(name=column, color=style.palette[i % len(style.palette)], points=points))

    x_ticks = [Tick(position=round(px(x), 2), label=f"{x:.3g}") for x in np.linspace(x_low, x_high, style.ticks)]
    y_ticks = [Tick(position=round(py(y), 2), label=f"{y:.3g}") for y in np.linspace(y_low, y_high, style.ticks)]

    svg = render_template(
        project_path("sweeps", "templates", "chart.svg.jinja2"),
        width=style.width,
        height=style.height,
        margin_top=style.margin_top,
        font_family=style.font_family,
        font_size=style.font_size,
        stroke_width=style.stroke_width,
        background=style.background,
        title=style.title,
        x_label=rows[0].variable,
        y_label=style.y_label,
        plot_left=plot_left,
        plot_right=plot_right,
        plot_top=plot_top,
        plot_bottom=plot_bottom,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
        series_list=series_list,
    )

    try:
        parent = os.path.dirname(path)
        if parent:
            Path(parent).mkdir(parents=True, exist_ok=True)
        with open(path, mode="w", encoding="utf-8", newline="\n") as f:
            f.write(svg)
    except OSError as e:
        raise OutputError(f"render_svg: could not write {path}: {e}") from e
