# -*- coding: utf-8 -*-
"""Shared fixtures of the test suite.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import os

import numpy as np
import pytest

from ferhelper.data.imageio import encode_image
from ferhelper.data.labels import CLASS_NAMES
from ferhelper.detect import CascadeModel


def write_dataset(root, per_class=3, size=16, seed=0):
    """Write `per_class` random gray PNG images into every class folder."""
    rng = np.random.default_rng(seed)
    for label, name in enumerate(CLASS_NAMES):
        for idx in range(per_class):
            encode_image(
                rng.integers(0, 256, size=(size, size)),
                os.path.join(root, f'{label}_{name}', f'img_{idx:02d}.png'),
            )
    return root


@pytest.fixture
def dataset(tmp_path):
    """Create a folder dataset of 18 images, 3 per class."""
    return write_dataset(str(tmp_path / 'dataset'))


@pytest.fixture
def empty_cascade(tmp_path):
    """Create a cascade without stages accepting every window."""
    file_name = str(tmp_path / 'cascade.json')
    CascadeModel(window_size=24, stages=()).to_json(file_name)
    return file_name


OPENCV_XML = """<?xml version="1.0"?>
<opencv_storage>
<cascade type_id="opencv-cascade-classifier">
  <stageType>{stage_type}</stageType>
  <featureType>HAAR</featureType>
  <height>24</height>
  <width>24</width>
  <stageNum>1</stageNum>
  <stages>
    <_>
      <maxWeakCount>2</maxWeakCount>
      <stageThreshold>-0.5</stageThreshold>
      <weakClassifiers>
        <_>
          <internalNodes>0 -1 1 4.0e-03</internalNodes>
          <leafValues>-0.8 0.6</leafValues></_>
        <_>
          <internalNodes>0 -1 0 -1.5e-02</internalNodes>
          <leafValues>0.3 -0.4</leafValues></_></weakClassifiers></_></stages>
  <features>
    <_>
      <rects>
        <_>6 4 12 9 -1.</_>
        <_>6 7 12 3 3.</_></rects>{tilted}</_>
    <_>
      <rects>
        <_>0 0 8 4 1.</_>
        <_>0 4 8 4 -1.</_></rects></_></features></cascade>
</opencv_storage>
"""


@pytest.fixture
def opencv_xml(tmp_path):
    """Return a function writing a two stump OpenCV cascade."""
    def write(tilted=False, stage_type='BOOST'):
        xml_file = tmp_path / 'cascade.xml'
        xml_file.write_text(OPENCV_XML.format(
            stage_type=stage_type,
            tilted='<tilted>1</tilted>' if tilted else '',
        ))
        return str(xml_file)
    return write
