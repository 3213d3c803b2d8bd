# -*- coding: utf-8 -*-
"""# Model Zoo

This submodule contains the declarative
[ModelSpec][ferhelper.models.spec.ModelSpec] and the
[build][ferhelper.models.zoo.build] function instantiating it. The named
architectures are

| name         | description                                   | parameters |
|--------------|-----------------------------------------------|-----------:|
| `gimefive13` | 4 conv blocks, FC 512-1024-512-6 (baseline)   |  2,606,086 |
| `gimefive15` | 5 conv blocks with dropout                    | 10,478,086 |
| `gimefive16` | 5 conv blocks with squeeze-and-excitation     | 10,478,598 |
| `gimefive17` | 6 conv blocks, FC 2048-4096-2048-6            | 41,950,726 |
| `resnet18`   | residual network with a 6-class head          | 11,179,590 |
| `resnet34`   | residual network with a 6-class head          | 21,287,750 |
| `vgg16bn`    | VGG16 with batch norm adapted to 64x64 inputs | 33,630,278 |

"""
__all__ = [
    'ARCHITECTURES',
    'Model',
    'ModelSpec',
    'build',
    'count_parameters',
    'get_spec',
    'n_params',
]

from .spec import ARCHITECTURES, ModelSpec, get_spec
from .zoo import Model, build, count_parameters, n_params
