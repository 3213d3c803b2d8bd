# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Explain a prediction with Grad-CAM."""
import click
import numpy as np

import ferhelper as fh
from ferhelper import xai
from ferhelper._cli import FerCommand
from ferhelper.data.imageio import decode_image, encode_image
from ferhelper.data.loader import load_sample
from ferhelper.tensor import Tensor


def _parse_class(ctx, param, value):
    if value.lower() == 'auto':
        return 'auto'
    try:
        return fh.data.to_label(value)
    except fh.exceptions.LabelError as err:
        raise click.BadParameter(str(err)) from err


@click.command(cls=FerCommand)
@click.option(
    '--ckpt',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Checkpoint of a GiMeFive model.',
)
@click.option(
    '--image',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Image to explain.',
)
@click.option(
    '--class',
    'target',
    default='auto',
    show_default=True,
    callback=_parse_class,
    help=(
        'Class to explain given by id 0-5 or emotion name, "auto" takes the '
        'predicted class.'
    ),
)
@click.option(
    '--stage',
    help=(
        'Show the mean activation of this stage, e.g. "conv3", instead of '
        'Grad-CAM.'
    ),
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output image (".png", ".ppm").',
)
@click.option(
    '--alpha',
    type=click.FloatRange(min=0, max=1),
    default=0.5,
    show_default=True,
    help='Weight of the heatmap in the overlay.',
)
@click.option(
    '--size',
    type=click.IntRange(min=1),
    default=64,
    show_default=True,
    help='Edge length of the rendered image.',
)
@click.option(
    '--triptych',
    is_flag=True,
    help='Render original, heatmap and overlay side by side.',
)
def explain(ckpt, image, target, stage, output, alpha, size, triptych):
    """Overlay the class activation map of an image."""
    checkpoint = fh.load_checkpoint(ckpt)
    model = checkpoint.model
    x_image = load_sample(image, checkpoint.preprocess)
    if stage is None:
        cam = fh.grad_cam(model, x_image, target=target)
        click.echo(f'explained class {cam.target_class.label}')
    else:
        if stage not in model.stage_names:
            raise click.BadParameter(
                f'use one of {list(model.stage_names)}.',
                param_hint='--stage',
            )
        values = xai.layer_activation_map(model, x_image, stage)
        probs, _ = model.predict(Tensor(x_image[np.newaxis]))
        cam = xai.CamMap(values, int(probs[0].argmax()))
        click.echo(
            f'activation of {stage}, predicted class '
            f'{cam.target_class.label}',
        )

    cam = xai.upsample_bilinear(cam, size=size)
    view = xai.display_image(decode_image(image), size=size)
    if triptych:
        rendered = xai.render_triptych(view, cam, alpha=alpha)
    else:
        rendered = xai.colorize_overlay(view, cam, alpha=alpha)
    encode_image(rendered, output)


if __name__ == '__main__':
    explain()  # pragma: no cover
