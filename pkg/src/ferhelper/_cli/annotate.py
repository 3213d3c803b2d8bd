# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Annotate video frames with boxes and emotions."""
import collections

import click

import ferhelper as fh
from ferhelper._cli import FerCommand, get_workers
from ferhelper.detect.detector import (
    DEFAULT_MIN_NEIGHBORS,
    DEFAULT_SCALE_FACTOR,
)
from ferhelper.pipeline import AnnotateOptions


@click.command(cls=FerCommand)
@click.option(
    '--ckpt',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Checkpoint to classify with.',
)
@click.option(
    '--cascade',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Cascade in the JSON format.',
)
@click.option(
    '--frames',
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help='Directory of frame images, processed in file name order.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(file_okay=False),
    help='Output directory of the annotated frames and "frames.csv".',
)
@click.option(
    '--gradcam',
    is_flag=True,
    help='Blend the Grad-CAM of the predicted class into each box.',
)
@click.option(
    '--alpha',
    type=click.FloatRange(min=0, max=1),
    default=0.5,
    show_default=True,
    help='Weight of the Grad-CAM overlay.',
)
@click.option(
    '--scale-factor',
    type=click.FloatRange(min=1, min_open=True),
    default=DEFAULT_SCALE_FACTOR,
    show_default=True,
    help='Ratio of consecutive window sizes.',
)
@click.option(
    '--min-neighbors',
    type=click.IntRange(min=0),
    default=DEFAULT_MIN_NEIGHBORS,
    show_default=True,
    help='Minimal number of merged windows per face.',
)
@click.option(
    '--min-size',
    type=click.IntRange(min=1),
    help='Minimal window edge length in pixels.',
)
@click.option(
    '--margin',
    type=click.FloatRange(min=0),
    default=0.0,
    show_default=True,
    help='Fraction of the box size added on every side before cropping.',
)
@click.option(
    '--smooth-window',
    type=click.IntRange(min=1),
    default=5,
    show_default=True,
    help='Number of frames the displayed top emotion is held.',
)
@click.option(
    '--no-score-bars',
    is_flag=True,
    help='Do not draw the class scores next to each box.',
)
def annotate(
    ckpt,
    cascade,
    frames,
    output,
    gradcam,
    alpha,
    scale_factor,
    min_neighbors,
    min_size,
    margin,
    smooth_window,
    no_score_bars,
):
    """Detect, classify and annotate every frame of a directory."""
    checkpoint = fh.load_checkpoint(ckpt)
    options = AnnotateOptions(
        scale_factor=scale_factor,
        min_neighbors=min_neighbors,
        min_size=min_size,
        margin=margin,
        gradcam=gradcam,
        alpha=alpha,
        smooth_window=smooth_window,
        score_bars=not no_score_bars,
    )
    results = fh.annotate_frames(
        frames,
        checkpoint.model,
        output,
        cascade=fh.CascadeModel.from_json(cascade),
        options=options,
        preprocess_cfg=checkpoint.preprocess,
        workers=get_workers(),
    )
    statuses = collections.Counter(result.status for result in results)
    n_faces = sum(len(result.faces) for result in results)
    click.echo(f'{len(results)} frames, {n_faces} faces, {dict(statuses)}')


if __name__ == '__main__':
    annotate()  # pragma: no cover
