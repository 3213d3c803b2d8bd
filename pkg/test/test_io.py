# -*- coding: utf-8 -*-
"""Tests for the io module.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import pandas as pd
import pytest

from ferhelper import io
from ferhelper.exceptions import CsvFormatError


def test_savecsv(tmp_path):
    """Test the byte layout of written files."""
    file_name = str(tmp_path / 'sub' / 'table.csv')
    io.savecsv(file_name, {'path': ['a.png', 'b.png'], 'score': [0.5, 1 / 3]})
    with open(file_name, 'rb') as csv:
        assert csv.read() == (
            b'path,score\na.png,0.5\nb.png,0.33333333\n'
        )

    frame = io.opencsv(file_name, columns=['score', 'path'])
    assert list(frame.columns) == ['score', 'path']
    assert frame['path'].tolist() == ['a.png', 'b.png']


def test_records_frame(tmp_path):
    """Test that missing integers are written as empty fields."""
    frame = io.records_frame(
        [{'frame': 0, 'pred': 3}, {'frame': 1, 'status': 'no_face'}],
        ('frame', 'pred', 'status'),
        int_columns=('pred',),
    )
    file_name = str(tmp_path / 'frames.csv')
    io.savecsv(file_name, frame)
    with open(file_name) as csv:
        assert csv.read().splitlines() == [
            'frame,pred,status', '0,3,', '1,,no_face',
        ]


def test_opencsv_errors(tmp_path):
    """Test empty files and missing columns."""
    file_name = tmp_path / 'table.csv'
    file_name.write_text('')
    with pytest.raises(CsvFormatError):
        io.opencsv(str(file_name))

    file_name.write_text('path,label\na.png,0\n')
    with pytest.raises(CsvFormatError):
        io.opencsv(str(file_name), columns=['path', 'split'])

    frame = io.opencsv(str(file_name), dtype={'label': str})
    pd.testing.assert_frame_equal(
        frame, pd.DataFrame({'path': ['a.png'], 'label': ['0']}),
    )
