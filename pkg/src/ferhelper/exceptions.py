# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""# Exceptions

All errors raised by ferhelper derive from
[FerError][ferhelper.exceptions.FerError].
Each one additionally inherits from the matching builtin exception, so
`except ValueError` keeps working for callers who do not care about the
package hierarchy.

"""


class FerError(Exception):
    """Base class of all ferhelper errors."""


class ShapeError(FerError, ValueError):
    """An exception for tensors of incompatible or invalid shape."""


class ConfigError(FerError, ValueError):
    """An exception for invalid configuration values."""


class ContractError(FerError, RuntimeError):
    """An exception for calls violating an operation's precondition."""


class NumericInputError(FerError, ValueError):
    """An exception for NaN or infinite inputs."""


class LabelError(FerError, ValueError):
    """An exception for class labels outside of 0 to 5."""


class DegenerateBatchError(FerError, ValueError):
    """An exception for batch statistics over a single value."""


class ManifestError(FerError, ValueError):
    """An exception for empty or inconsistent dataset manifests."""


class DecodeError(FerError, OSError):
    """An exception for unreadable or unsupported image files."""


class DivergenceError(FerError, RuntimeError):
    """An exception for a training loss which became NaN."""


class UnsupportedModelError(FerError, TypeError):
    """An exception for models lacking a required capability."""


class CascadeFormatError(FerError, ValueError):
    """An exception for malformed cascade model files."""


class CheckpointError(FerError, OSError):
    """Base class of all checkpoint loading errors."""


class BadMagicError(CheckpointError):
    """The file does not start with the checkpoint magic bytes."""


class VersionMismatchError(CheckpointError):
    """The checkpoint was written with an unsupported format version."""


class TruncatedCheckpointError(CheckpointError):
    """The checkpoint file ends before all declared data was read."""


class TensorCountMismatchError(CheckpointError):
    """The stored tensors do not match the tensors of the declared model."""


class CsvFormatError(FerError, ValueError):
    """An exception for CSV files lacking required columns."""
