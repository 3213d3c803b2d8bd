# -*- coding: utf-8 -*-
"""# Utils

This submodule provides helpers shared by the other submodules.

- [**render:**][ferhelper.utils.render] Raster drawing of text and boxes
  with an embedded 5x7 bitmap font.
- [**tests:**][ferhelper.utils.tests] Finite difference gradient checks
  and property tests of probabilities and heatmaps.

"""
__all__ = [
    'render',
    'tests',
]

from . import render, tests
