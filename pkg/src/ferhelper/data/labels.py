# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Emotion class labels."""
import enum

from ferhelper.exceptions import LabelError


class ClassLabel(enum.IntEnum):
    """Emotion classes with their fixed integer ids."""

    HAPPINESS = 0
    SURPRISE = 1
    SADNESS = 2
    ANGER = 3
    DISGUST = 4
    FEAR = 5

    @property
    def label(self):
        """Return the lower case emotion name."""
        return self.name.lower()


CLASS_NAMES = tuple(label.label for label in ClassLabel)
N_CLASSES = len(CLASS_NAMES)


def to_label(value):
    """Convert an id or emotion name to a ClassLabel.

    Parameters
    ----------
    value : int or str
        Class id 0-5, its string representation, or the emotion name.

    Returns
    -------
    label : ClassLabel

    """
    if isinstance(value, str):
        key = value.strip().lower()
        if key.isdigit():
            value = int(key)
        elif key in CLASS_NAMES:
            return ClassLabel(CLASS_NAMES.index(key))
        else:
            raise LabelError(
                f'Unknown emotion {value!r}, use one of {CLASS_NAMES}.',
            )
    try:
        return ClassLabel(int(value))
    except ValueError:
        raise LabelError(
            f'Class id needs to be in [0, {N_CLASSES - 1}], got {value}.',
        ) from None
