# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Plot training curves."""
import pandas as pd
import prettypyplot as pplt
from matplotlib import pyplot as plt


def plot_metric_log(metrics):
    """Plot loss and accuracies per epoch.

    This is a wrapper function to plot the metric log written by
    [ferhelper.train.train][].

    Parameters
    ----------
    metrics : pandas.DataFrame or list of dict
        Columns `epoch`, `train_loss`, `train_acc` and `valid_acc`.

    Returns
    -------
    fig : matplotlib.Figure
        Figure holding the loss (left) and accuracy (right) axes.

    """
    metrics = pd.DataFrame(metrics)
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, sharex=True)

    pplt.plot(
        metrics['epoch'], metrics['train_loss'], ax=ax_loss, label='train',
    )
    ax_loss.set_ylabel('cross-entropy loss')

    pplt.plot(
        metrics['epoch'],
        100 * metrics['train_acc'],
        ax=ax_acc,
        label='train',
    )
    pplt.plot(
        metrics['epoch'],
        100 * metrics['valid_acc'],
        ax=ax_acc,
        label='valid',
    )
    ax_acc.set_ylim([0, 100])
    ax_acc.set_ylabel('accuracy [%]')
    pplt.legend(ax=ax_acc, outside='top', frameon=False)

    for ax in (ax_loss, ax_acc):
        ax.grid(True, which='major', linestyle='--')
        ax.set_axisbelow(True)
    pplt.subplot_labels(xlabel='epoch')
    return fig
