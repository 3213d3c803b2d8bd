# -*- coding: utf-8 -*-
"""# Matplotlib-Based Plotting Routines

This submodule contains methods to visualize the evaluation and the
training progress.

"""
__all__ = [
    'plot_confusion_matrix',
    'plot_metric_log',
]

from ._confusion import plot_confusion_matrix
from ._metrics import plot_metric_log
