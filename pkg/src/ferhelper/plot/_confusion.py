# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Plot the confusion matrix."""
import numpy as np
import prettypyplot as pplt
from matplotlib import pyplot as plt

from ferhelper.data.labels import CLASS_NAMES


def plot_confusion_matrix(cm, ax=None, normalize=True, cmap='Blues'):
    """Plot a confusion matrix as annotated heatmap.

    This is a wrapper function to plot the return value of
    [ferhelper.evaluate.evaluate][].

    Parameters
    ----------
    cm : ConfusionMatrix
        Counts with true classes as rows.
    ax : matplotlib.Axes, optional
        Axes to plot figure in. With `None` the current axes is used.
    normalize : bool, optional
        Show each row in percent, so every row sums to 100.
    cmap : str, optional
        Matplotlib colormap.

    Returns
    -------
    ax : matplotlib.Axes
        Return axes holding the plot.

    """
    if ax is None:
        ax = plt.gca()

    counts = cm.counts.astype(np.float64)
    if normalize:
        row_sums = counts.sum(axis=1, keepdims=True)
        row_sums[row_sums == 0] = 1
        values = 100 * counts / row_sums
    else:
        values = counts

    image = ax.imshow(values, cmap=cmap, vmin=0, vmax=values.max() or 1)
    threshold = 0.5 * (values.max() or 1)
    for (row, col), value in np.ndenumerate(values):
        ax.text(
            col,
            row,
            f'{value:.1f}' if normalize else f'{value:.0f}',
            ha='center',
            va='center',
            color='w' if value > threshold else 'k',
            fontsize='small',
        )

    ticks = np.arange(len(CLASS_NAMES))
    ax.set_xticks(ticks)
    ax.set_yticks(ticks)
    ax.set_xticklabels(CLASS_NAMES, rotation=45, ha='right')
    ax.set_yticklabels(CLASS_NAMES)
    ax.set_xlabel('predicted class')
    ax.set_ylabel('true class')
    pplt.colorbar(image, label='share [%]' if normalize else 'count')
    return ax
