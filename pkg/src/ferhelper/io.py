# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""# Input and Output of CSV Files

This submodule contains the methods to read and write all CSV artifacts of
ferhelper: dataset manifests, metric logs, score tables and frame results.
All files are UTF-8 encoded with a header row and LF line endings, so
identical data always produces identical bytes.

"""
import os

import pandas as pd

from ferhelper.exceptions import CsvFormatError


def opencsv(file_name, columns=None, dtype=None):
    """Open a CSV file with a header row.

    Parameters
    ----------
    file_name : str
        Name of file to be opened.
    columns : list of str, optional
        Required columns. The returned frame holds them in the given order.
    dtype : dict, optional
        Mapping of column names to data-types, see [pandas.read_csv][].

    Returns
    -------
    frame : pandas.DataFrame
        Data read from the file.

    """
    try:
        frame = pd.read_csv(
            file_name, dtype=dtype, keep_default_na=False, encoding='utf-8',
        )
    except pd.errors.EmptyDataError:
        raise CsvFormatError(f'{file_name} is empty.') from None
    except (pd.errors.ParserError, ValueError) as err:
        raise CsvFormatError(f'{file_name}: {err}') from err

    if columns is not None:
        missing = [col for col in columns if col not in frame.columns]
        if missing:
            raise CsvFormatError(
                f'{file_name} lacks the column(s) {missing}, found '
                f'{list(frame.columns)}.',
            )
        frame = frame[list(columns)]
    return frame


def savecsv(file_name, frame, float_format='%.8g'):  # noqa: WPS323
    """Save a data frame as CSV with a header row and without index.

    Parameters
    ----------
    file_name : str
        File name to store data, parent directories are created.
    frame : pandas.DataFrame or dict
        Data to be stored.
    float_format : str, optional
        Format string of floating point columns.

    """
    if not isinstance(frame, pd.DataFrame):
        frame = pd.DataFrame(frame)
    directory = os.path.dirname(os.path.abspath(file_name))
    os.makedirs(directory, exist_ok=True)
    frame.to_csv(
        file_name,
        index=False,
        encoding='utf-8',
        lineterminator='\n',
        float_format=float_format,
    )


def records_frame(records, columns, int_columns=()):
    """Build a frame of row dicts with a fixed column order.

    Parameters
    ----------
    records : list of dict
        Rows, missing values are `None`.
    columns : list of str
        Column order of the frame.
    int_columns : list of str, optional
        Columns stored as nullable integers, so that missing entries are
        written as empty fields instead of `nan`.

    Returns
    -------
    frame : pandas.DataFrame

    """
    frame = pd.DataFrame(list(records), columns=list(columns))
    for column in int_columns:
        frame[column] = frame[column].astype('Int64')
    return frame
