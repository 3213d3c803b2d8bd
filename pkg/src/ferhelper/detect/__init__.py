# -*- coding: utf-8 -*-
"""# Face Detection

This submodule contains a cascade face detector working on summed area
tables.

- [**integral:**][ferhelper.detect.integral] Integral images of pixel
  values and squared pixel values.
- [**cascade:**][ferhelper.detect.cascade] The cascade model, its JSON
  layout and the import of OpenCV XML cascades.
- [**detector:**][ferhelper.detect.detector] Multi-scale scanning,
  grouping of overlapping windows and cropping.

"""
__all__ = [
    'IntegralImage',
    'integral',
    'integral_image',
    'CascadeModel',
    'HaarRect',
    'Stage',
    'WeakClassifier',
    'Detection',
    'crop_faces',
    'detect_multiscale',
    'eval_window',
    'group_detections',
]

from .integral import IntegralImage, integral, integral_image
from .cascade import CascadeModel, HaarRect, Stage, WeakClassifier
from .detector import (
    Detection,
    crop_faces,
    detect_multiscale,
    eval_window,
    group_detections,
)
