# Configuration file for the Sphinx documentation builder.
#
# For the full list of options see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

from recommonmark.transform import AutoStructify

from generate_figure_csv import generate_csv

# -- Project information -----------------------------------------------------

project = "qbounds"
copyright = "2024 Curtin University"
author = "Curtin University"

# -- General configuration ---------------------------------------------------

extensions = [
    "pbr.sphinxext",
    "sphinx_rtd_theme",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
    "autoapi.extension",
    "recommonmark",
]

# Auto API settings: https://github.com/readthedocs/sphinx-autoapi
autoapi_type = "python"
autoapi_dirs = ["../qbounds"]
autoapi_ignore = ["*tests/*.py"]
autoapi_add_toctree_entry = True
autoapi_python_use_implicit_namespaces = True

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_options = {
    "display_version": False,
}


# recommonmark config, used to enable rst to be evaluated within markdown files
def setup(app):
    app.add_config_value("recommonmark_config", {"enable_eval_rst": True, "auto_toc_tree_section": "Contents"}, True)
    app.add_transform(AutoStructify)


generate_csv(dst_path="tables/figures.csv")
