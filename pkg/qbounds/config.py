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

import importlib
import os


class Bound:
    """Names of the bound columns produced by reports and sweeps."""

    sld = "sld"
    rld = "rld"
    upper = "upper"
    hcrb = "hcrb"
    nagaoka = "nagaoka"
    analytic = "analytic"

    @staticmethod
    def all() -> list:
        return [Bound.sld, Bound.rld, Bound.upper, Bound.hcrb, Bound.nagaoka, Bound.analytic]


ANALYTIC_COLUMNS = ["analytic_sld", "analytic_rld", "analytic_hcrb", "analytic_nb"]


def module_file_path(module_path: str, nav_back_steps: int = -1) -> str:
    """Get the file path of a module, given the Python import path to the module.

    :param module_path: the Python import path to the module, e.g. qbounds.sweeps
    :param nav_back_steps: the number of steps on the path to step back.
    :return: the file path to the module.
    """

    module = importlib.import_module(module_path)
    file_path = module.__file__
    return os.path.normpath(os.sep.join(file_path.split(os.sep)[:nav_back_steps]))


def project_path(*subpaths: str) -> str:
    """Make a path to a file or folder within the qbounds project.

    :param subpaths: any sub paths.
    :return: a path to a file or folder.
    """

    return os.path.join(construct_module_path("qbounds"), *subpaths)


def construct_module_path(*parts: str) -> str:
    """Constructs the full module path given parts of a path."""

    module_path = ".".join(list(parts))
    file_path = module_file_path(module_path)
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"construct_module_path: directory {file_path} does not exist!")

    return file_path
