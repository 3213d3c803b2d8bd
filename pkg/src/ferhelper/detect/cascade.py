# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Boosted cascades of Haar-like features.

A cascade is stored as JSON, see `docs/cascade_format.md`:

```json
{
  "format": "ferhelper-cascade",
  "version": 1,
  "window_size": [24, 24],
  "stages": [
    {
      "threshold": -1.2,
      "weak_classifiers": [
        {
          "threshold": 0.004,
          "left": 0.8,
          "right": -0.6,
          "rects": [[6, 4, 12, 9, -1.0], [6, 7, 12, 3, 3.0]]
        }
      ]
    }
  ]
}
```

Every rectangle is `[x, y, width, height, weight]` in base window
coordinates. A weak classifier votes `left` if its feature value is below
`threshold` times the window standard deviation and `right` otherwise.

"""
import dataclasses
import functools
import json
import xml.etree.ElementTree as ET

import numpy as np

from ferhelper.exceptions import CascadeFormatError

FORMAT_NAME = 'ferhelper-cascade'
FORMAT_VERSION = 1


@dataclasses.dataclass(frozen=True)
class HaarRect:
    """Weighted rectangle of a Haar-like feature."""

    x: int
    y: int
    width: int
    height: int
    weight: float

    def to_list(self):
        """Return `[x, y, width, height, weight]`."""
        return [self.x, self.y, self.width, self.height, self.weight]


@dataclasses.dataclass(frozen=True)
class WeakClassifier:
    """Decision stump on a feature of two or three rectangles."""

    rects: tuple
    threshold: float
    left: float
    right: float

    def __post_init__(self):
        if not 2 <= len(self.rects) <= 3:
            raise CascadeFormatError(
                'A Haar feature needs 2 or 3 rectangles, got '
                f'{len(self.rects)}.',
            )


@dataclasses.dataclass(frozen=True)
class Stage:
    """Stage accepting a window if its summed votes reach `threshold`."""

    threshold: float
    weak_classifiers: tuple


@dataclasses.dataclass(frozen=True)
class CascadeModel:
    """Ordered stages evaluated on a square base window.

    Parameters
    ----------
    window_size : int
        Edge length of the base window, e.g. 24.
    stages : tuple of Stage
        Stages in evaluation order, may be empty.

    """

    window_size: int = 24
    stages: tuple = ()

    def __post_init__(self):
        if self.window_size < 1:
            raise CascadeFormatError(
                f'window_size needs to be >= 1, got {self.window_size}.',
            )
        object.__setattr__(self, 'stages', tuple(self.stages))
        for stage in self.stages:
            for weak in stage.weak_classifiers:
                for rect in weak.rects:
                    self._check_rect(rect)

    def _check_rect(self, rect):
        if (
            rect.x < 0 or
            rect.y < 0 or
            rect.width < 1 or
            rect.height < 1 or
            rect.x + rect.width > self.window_size or
            rect.y + rect.height > self.window_size
        ):
            raise CascadeFormatError(
                f'Rectangle {rect.to_list()} exceeds the '
                f'{self.window_size}x{self.window_size} window.',
            )

    @property
    def n_weak_classifiers(self):
        """Return the total number of weak classifiers."""
        return sum(len(stage.weak_classifiers) for stage in self.stages)

    @functools.cached_property
    def packed(self):
        """Return the cascade as flat arrays for the compiled scan.

        Returns
        -------
        stage_thresholds : ndarray
            Threshold per stage.
        stage_bounds : ndarray
            Weak classifiers of stage `i` are `stage_bounds[i]:[i+1]`.
        weak_params : ndarray
            `(threshold, left, right)` per weak classifier.
        rect_bounds : ndarray
            Rectangles of weak classifier `j` are `rect_bounds[j]:[j+1]`.
        rects : ndarray
            `(x, y, width, height, weight)` per rectangle.

        """
        weaks = [
            weak for stage in self.stages for weak in stage.weak_classifiers
        ]
        rects = [rect.to_list() for weak in weaks for rect in weak.rects]
        return (
            np.array(
                [stage.threshold for stage in self.stages], dtype=np.float64,
            ),
            np.cumsum(
                [0] + [len(stage.weak_classifiers) for stage in self.stages],
            ).astype(np.int64),
            np.array(
                [(weak.threshold, weak.left, weak.right) for weak in weaks],
                dtype=np.float64,
            ).reshape(-1, 3),
            np.cumsum(
                [0] + [len(weak.rects) for weak in weaks],
            ).astype(np.int64),
            np.array(rects, dtype=np.float64).reshape(-1, 5),
        )

    def to_dict(self):
        """Return the JSON layout as dictionary."""
        return {
            'format': FORMAT_NAME,
            'version': FORMAT_VERSION,
            'window_size': [self.window_size, self.window_size],
            'stages': [
                {
                    'threshold': stage.threshold,
                    'weak_classifiers': [
                        {
                            'threshold': weak.threshold,
                            'left': weak.left,
                            'right': weak.right,
                            'rects': [rect.to_list() for rect in weak.rects],
                        }
                        for weak in stage.weak_classifiers
                    ],
                }
                for stage in self.stages
            ],
        }

    @classmethod
    def from_dict(cls, cascade):
        """Create from the JSON layout."""
        if cascade.get('format', FORMAT_NAME) != FORMAT_NAME:
            raise CascadeFormatError(
                f'Unknown cascade format {cascade["format"]!r}.',
            )
        if cascade.get('version', FORMAT_VERSION) != FORMAT_VERSION:
            raise CascadeFormatError(
                f'Unsupported cascade version {cascade["version"]}.',
            )
        try:
            width, height = cascade['window_size']
            stages = tuple(
                Stage(
                    float(stage['threshold']),
                    tuple(
                        WeakClassifier(
                            rects=tuple(
                                HaarRect(
                                    int(x), int(y), int(w), int(h), float(wgt),
                                )
                                for x, y, w, h, wgt in weak['rects']
                            ),
                            threshold=float(weak['threshold']),
                            left=float(weak['left']),
                            right=float(weak['right']),
                        )
                        for weak in stage['weak_classifiers']
                    ),
                )
                for stage in cascade['stages']
            )
        except CascadeFormatError:
            raise
        except (KeyError, TypeError, ValueError) as err:
            raise CascadeFormatError(f'Invalid cascade: {err!r}') from err
        if width != height:
            raise CascadeFormatError(
                f'Only square windows are supported, got {width}x{height}.',
            )
        return cls(window_size=int(width), stages=stages)

    def to_json(self, file_name):
        """Write the cascade as JSON."""
        with open(file_name, 'w', encoding='utf-8') as json_file:
            json.dump(self.to_dict(), json_file, indent=1)
            json_file.write('\n')

    @classmethod
    def from_json(cls, file_name):
        """Read a cascade from JSON."""
        with open(file_name, encoding='utf-8') as json_file:
            try:
                cascade = json.load(json_file)
            except json.JSONDecodeError as err:
                raise CascadeFormatError(f'{file_name}: {err}') from err
        if not isinstance(cascade, dict):
            raise CascadeFormatError(f'{file_name} needs to hold an object.')
        return cls.from_dict(cascade)

    @classmethod
    def from_opencv_xml(cls, file_name):
        """Import a stump based HAAR cascade in the OpenCV XML layout.

        Only the `<cascade>` layout with `stageType` `BOOST`, untilted
        features and single-split weak classifiers is supported.

        Parameters
        ----------
        file_name : str
            XML file, e.g. `haarcascade_frontalface_default.xml`.

        Returns
        -------
        cascade : CascadeModel

        """
        try:
            root = ET.parse(file_name).getroot()
        except ET.ParseError as err:
            raise CascadeFormatError(f'{file_name}: {err}') from err
        node = root.find('cascade') if root.tag != 'cascade' else root
        if node is None:
            raise CascadeFormatError(
                f'{file_name} has no <cascade> node, the legacy layout is not '
                'supported.',
            )
        return _parse_opencv_cascade(node, file_name)


def _text(node, tag, file_name):
    child = node.find(tag)
    if child is None or child.text is None:
        raise CascadeFormatError(f'{file_name} lacks <{tag}>.')
    return child.text.strip()


def _items(node, tag, file_name):
    child = node.find(tag)
    if child is None:
        raise CascadeFormatError(f'{file_name} lacks <{tag}>.')
    return child.findall('_')


def _parse_opencv_cascade(node, file_name):
    for tag, expected in (('stageType', 'BOOST'), ('featureType', 'HAAR')):
        if _text(node, tag, file_name) != expected:
            raise CascadeFormatError(
                f'{file_name}: only {tag} {expected} is supported.',
            )
    width = int(_text(node, 'width', file_name))
    height = int(_text(node, 'height', file_name))
    if width != height:
        raise CascadeFormatError(
            f'Only square windows are supported, got {width}x{height}.',
        )

    features = []
    for feature in _items(node, 'features', file_name):
        tilted = feature.find('tilted')
        if tilted is not None and int(tilted.text) != 0:
            raise CascadeFormatError(f'{file_name}: tilted features found.')
        features.append(tuple(
            HaarRect(int(x), int(y), int(w), int(h), float(wgt))
            for x, y, w, h, wgt in (
                rect.text.split()
                for rect in _items(feature, 'rects', file_name)
            )
        ))

    stages = []
    for stage in _items(node, 'stages', file_name):
        weaks = []
        for weak in _items(stage, 'weakClassifiers', file_name):
            nodes = _text(weak, 'internalNodes', file_name).split()
            leaves = _text(weak, 'leafValues', file_name).split()
            if len(nodes) != 4 or len(leaves) != 2:
                raise CascadeFormatError(
                    f'{file_name}: only single-split weak classifiers are '
                    'supported.',
                )
            weaks.append(WeakClassifier(
                rects=features[int(nodes[2])],
                threshold=float(nodes[3]),
                left=float(leaves[0]),
                right=float(leaves[1]),
            ))
        stages.append(Stage(
            float(_text(stage, 'stageThreshold', file_name)), tuple(weaks),
        ))
    return CascadeModel(window_size=width, stages=tuple(stages))
