"""Render figures from ldma scenario CSV outputs."""

from .render import FIGURE_KINDS, FigureSpec, FigureSpecError, load_spec, render, spec_from_dict

__version__ = "0.1.0"
