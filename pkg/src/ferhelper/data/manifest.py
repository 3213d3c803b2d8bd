# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Dataset manifests listing image paths with their emotion labels."""
import dataclasses
import logging
import os
import re

import numpy as np

from ferhelper import io
from ferhelper.data.labels import N_CLASSES, to_label
from ferhelper.exceptions import ConfigError, CsvFormatError, ManifestError

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = ('.jpg', '.jpeg', '.png', '.ppm', '.pgm')
SPLITS = ('train', 'test', 'valid')
MANIFEST_COLUMNS = ('path', 'label')

CLASS_FOLDER = re.compile(r'^([0-5])(?!\d)')


@dataclasses.dataclass(frozen=True)
class DatasetManifest:
    """Rows of relative image paths and class labels.

    Parameters
    ----------
    rows : tuple of (str, ClassLabel)
        Image paths relative to `root` with their labels.
    split : str, optional
        One of `train`, `test`, `valid`.
    root : str, optional
        Directory the paths are relative to.
    skipped : tuple of str, optional
        Folders ignored while scanning, e.g. lacking a leading class digit.

    """

    rows: tuple
    split: str = None
    root: str = '.'
    skipped: tuple = ()

    def __post_init__(self):
        rows = tuple(
            (str(path).replace(os.sep, '/'), to_label(label))
            for path, label in self.rows
        )
        paths = [path for path, _ in rows]
        if len(set(paths)) != len(paths):
            duplicates = sorted({p for p in paths if paths.count(p) > 1})
            raise ManifestError(f'Paths need to be unique: {duplicates}.')
        if self.split is not None and self.split not in SPLITS:
            raise ConfigError(
                f'Unknown split {self.split!r}, use one of {SPLITS}.',
            )
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'skipped', tuple(self.skipped))

    def __len__(self):
        """Return number of rows."""
        return len(self.rows)

    def __iter__(self):
        """Iterate over `(path, label)` rows."""
        return iter(self.rows)

    @property
    def paths(self):
        """Return the relative image paths."""
        return [path for path, _ in self.rows]

    @property
    def labels(self):
        """Return the labels as int array."""
        return np.array([int(label) for _, label in self.rows], dtype=np.int64)

    def resolve(self, path):
        """Return the path joined with the manifest root."""
        return os.path.join(self.root, path)

    def histogram(self):
        """Return the number of rows per class."""
        return np.bincount(self.labels, minlength=N_CLASSES)

    def to_csv(self, file_name):
        """Write the manifest with paths relative to the CSV's directory."""
        directory = os.path.dirname(os.path.abspath(file_name))
        paths = [
            os.path.relpath(
                os.path.abspath(self.resolve(path)), directory,
            ).replace(os.sep, '/')
            for path in self.paths
        ]
        io.savecsv(file_name, {
            'path': paths,
            'label': self.labels,
        })

    @classmethod
    def from_csv(cls, file_name, split=None):
        """Read a manifest CSV with the header `path,label`."""
        try:
            frame = io.opencsv(
                file_name, columns=MANIFEST_COLUMNS, dtype={'path': str},
            )
        except CsvFormatError as err:
            raise ManifestError(str(err)) from err
        return cls(
            rows=tuple(zip(frame['path'], frame['label'])),
            split=split,
            root=os.path.dirname(os.path.abspath(file_name)),
        )

    def subset(self, indices, split=None):
        """Return a manifest holding the rows at `indices` in sorted order."""
        rows = sorted(self.rows[idx] for idx in indices)
        return DatasetManifest(rows=tuple(rows), split=split, root=self.root)

    def split_by(self, fractions=(0.8, 0.1, 0.1), seed=0):
        """Stratified split into train, test and valid manifests.

        Parameters
        ----------
        fractions : tuple of float
            Fractions of the `train`, `test` and `valid` splits, summing to 1.
        seed : int
            Seed of the per-class permutations.

        Returns
        -------
        splits : dict
            Mapping of split name to DatasetManifest.

        """
        fractions = np.asarray(fractions, dtype=np.float64)
        if (
            fractions.shape != (len(SPLITS),) or
            np.any(fractions < 0) or
            not np.isclose(fractions.sum(), 1)
        ):
            raise ConfigError(
                f'Need three non-negative fractions summing to 1, got '
                f'{fractions.tolist()}.',
            )
        rng = np.random.default_rng(seed)
        labels = self.labels
        indices = {split: [] for split in SPLITS}
        for label in range(N_CLASSES):
            members = rng.permutation(np.flatnonzero(labels == label))
            n_train = int(round(fractions[0] * len(members)))
            n_test = int(round(fractions[1] * len(members)))
            n_test = min(n_test, len(members) - n_train)
            indices['train'].extend(members[:n_train])
            indices['test'].extend(members[n_train:n_train + n_test])
            indices['valid'].extend(members[n_train + n_test:])
        return {
            split: self.subset(idxs, split=split)
            for split, idxs in indices.items()
        }


def scan_folders(root):
    """Create a manifest from a folder per class.

    Every subfolder of `root` whose name begins with a class digit 0-5, e.g.
    `0_happiness`, contributes all images below it with that label. Other
    folders are skipped with a warning.

    Parameters
    ----------
    root : str
        Dataset directory.

    Returns
    -------
    manifest : DatasetManifest
        Rows sorted lexicographically by path.

    """
    if not os.path.isdir(root):
        raise ManifestError(f'{root} is not a directory.')

    rows, skipped = [], []
    for entry in sorted(os.scandir(root), key=lambda ent: ent.name):
        if not entry.is_dir():
            continue
        match = CLASS_FOLDER.match(entry.name)
        if match is None:
            logger.warning(
                'Skipping folder %s without leading class digit 0-5.',
                entry.name,
            )
            skipped.append(entry.name)
            continue

        label = int(match.group(1))
        for dirpath, dirnames, filenames in os.walk(entry.path):
            dirnames.sort()
            for filename in sorted(filenames):
                if os.path.splitext(filename)[1].lower() in IMAGE_EXTENSIONS:
                    path = os.path.relpath(
                        os.path.join(dirpath, filename), root,
                    )
                    rows.append((path.replace(os.sep, '/'), label))

    if not rows:
        raise ManifestError(f'No images found in class folders of {root}.')
    logger.info('Found %d images in %s.', len(rows), root)
    return DatasetManifest(
        rows=tuple(sorted(rows)),
        root=os.path.abspath(root),
        skipped=tuple(skipped),
    )
