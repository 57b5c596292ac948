# Module for desk-scale datasets
#  Includes the Dataset and AugmentDraw classes
from __future__ import absolute_import, division, print_function

import hashlib
import os

import numpy as np
from astropy.table import Table

from vistab import vimsgs
from vistab import vimodel

# Logging
msgs = vimsgs.get_logger()


class Dataset(object):
    """An ordered, immutable set of labelled examples

    Parameters:
    ----------
    X: ndarray
       (n, feature_dim) features
    y: ndarray
       (n,) integer labels
    class_count: int
    provenance: str, optional
       Generator name and seed, or file path and content hash
    """
    def __init__(self, X, y, class_count, provenance='unknown'):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.atleast_1d(np.asarray(y))
        if X.shape[0] < 1:
            msgs.error("A dataset needs at least one example")
        if y.shape != (X.shape[0],):
            msgs.error("Dataset has {0:d} feature rows but {1:d} labels".format(X.shape[0], y.size))
        if not np.all(np.isfinite(X)):
            msgs.error("Dataset features must be finite")
        if np.any(y < 0) or np.any(y >= class_count) or np.any(y != np.round(y)):
            msgs.error("Dataset labels must be integers in [0, {0:d})".format(class_count))
        self.X = X.copy()
        self.y = y.astype(int)
        self.X.flags.writeable = False
        self.y.flags.writeable = False
        self.class_count = int(class_count)
        self.provenance = provenance

    @property
    def n(self):
        return self.y.size

    @property
    def feature_dim(self):
        return self.X.shape[1]

    def example(self, index):
        return vimodel.Example(self.X[index], self.y[index])

    @property
    def examples(self):
        return [self.example(ii) for ii in range(self.n)]

    @property
    def content_hash(self):
        sha = hashlib.sha256()
        sha.update(np.ascontiguousarray(self.X).tobytes())
        sha.update(self.y.astype(np.int64).tobytes())
        return sha.hexdigest()

    @property
    def row_hashes(self):
        return [hashlib.sha256(np.ascontiguousarray(self.X[ii]).tobytes() +
                               np.int64(self.y[ii]).tobytes()).hexdigest()
                for ii in range(self.n)]

    def subset(self, idx, provenance=None):
        idx = np.asarray(idx, dtype=int)
        if provenance is None:
            provenance = self.provenance
        return Dataset(self.X[idx], self.y[idx], self.class_count, provenance=provenance)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.class_count == other.class_count and self.X.shape == other.X.shape and
                np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y))

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __repr__(self):
        return "<Dataset: n={0:d}, dim={1:d}, classes={2:d}, {3:s}>".format(
            self.n, self.feature_dim, self.class_count, self.provenance)


class AugmentDraw(object):
    """Randomness of one augmentation: additive jitter and coordinate reflections

    Parameters:
    ----------
    jitter: ndarray
       Additive feature noise (already scaled)
    flips: ndarray
       Boolean mask of the coordinates to reflect, x_k -> -x_k
    """
    def __init__(self, jitter, flips):
        self.jitter = np.asarray(jitter, dtype=float)
        self.flips = np.asarray(flips, dtype=bool)
        if self.jitter.shape != self.flips.shape:
            msgs.error("Jitter and flip masks must have the same shape")

    @classmethod
    def identity(cls, feature_dim):
        return cls(np.zeros(feature_dim), np.zeros(feature_dim, dtype=bool))


def gen_blobs(n, classes, feature_dim, spread, seed, radius=2.0):
    """ Balanced Gaussian clusters with centres on a sphere

    Parameters
    ----------
    n : int
      Number of examples (>= classes)
    classes : int
    feature_dim : int
    spread : float
      Standard deviation of each cluster
    seed : int
    radius : float, optional
      Distance of every centre from the origin

    Returns
    -------
    ds : Dataset
    """
    if classes < 2:
        msgs.error("Blobs need at least two classes")
    if feature_dim < 1:
        msgs.error("Blobs need feature_dim >= 1")
    if n < classes:
        msgs.error("Blobs need n >= classes ({0:d} < {1:d})".format(n, classes))
    if spread < 0.:
        msgs.error("Blob spread must be >= 0")
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(classes, feature_dim))
    centers *= radius / np.sqrt(np.sum(centers**2, axis=1))[:, None]
    y = rng.permutation(np.arange(n) % classes)
    X = centers[y] + spread * rng.normal(size=(n, feature_dim))
    return Dataset(X, y, classes, provenance='blobs(seed={0:d})'.format(seed))


def split(ds, n_first):
    """ Split into the first n_first examples and the rest
    """
    if n_first < 1 or n_first >= ds.n:
        msgs.error("Cannot split {0:d} examples at {1:d}".format(ds.n, n_first))
    first = ds.subset(np.arange(n_first), provenance=ds.provenance + '[:{0:d}]'.format(n_first))
    rest = ds.subset(np.arange(n_first, ds.n), provenance=ds.provenance + '[{0:d}:]'.format(n_first))
    return first, rest


def corrupt_labels(ds, fraction, seed, return_indices=False):
    """ Resample the labels of a fixed number of examples uniformly over all classes

    Exactly floor(fraction*n + 0.5) indices are chosen without replacement;
    a resampled label may coincide with the original.

    Parameters
    ----------
    ds : Dataset
    fraction : float
      In [0, 1]
    seed : int
    return_indices : bool, optional
      Also return the sorted indices whose labels were resampled

    Returns
    -------
    ds : Dataset
    idx : ndarray, optional
    """
    if fraction < 0. or fraction > 1.:
        msgs.error("Label-noise fraction must be in [0, 1] (received {0:g})".format(fraction))
    ncorrupt = int(np.floor(fraction*ds.n + 0.5))
    if ncorrupt == 0:
        return (ds, np.zeros(0, dtype=int)) if return_indices else ds
    rng = np.random.default_rng(seed)
    idx = rng.choice(ds.n, size=ncorrupt, replace=False)
    y = ds.y.copy()
    y[idx] = rng.integers(0, ds.class_count, size=ncorrupt)
    noisy = Dataset(ds.X, y, ds.class_count,
                    provenance=ds.provenance + '+noise({0:g},seed={1:d})'.format(fraction, seed))
    if return_indices:
        return noisy, np.sort(idx)
    return noisy


def draw_augmentation(rng, feature_dim, jitter_scale, flip_prob, size=None):
    """ Draw augmentation randomness from a generator

    Parameters
    ----------
    rng : numpy.random.Generator
    feature_dim : int
    jitter_scale : float
    flip_prob : float
    size : int, optional
      Number of examples; None draws a single AugmentDraw

    Returns
    -------
    draw : AugmentDraw
      jitter and flips of shape (feature_dim,) or (size, feature_dim)
    """
    shape = (feature_dim,) if size is None else (size, feature_dim)
    jitter = jitter_scale * rng.normal(size=shape)
    flips = rng.random(size=shape) < flip_prob
    return AugmentDraw(jitter, flips)


def augment_batch(X, draw):
    """ Reflect the flagged coordinates, then add jitter
    """
    X = np.asarray(X, dtype=float)
    return np.where(draw.flips, -X, X) + draw.jitter


def augment(z, draw):
    """ Augment a single example; the label is untouched
    """
    return vimodel.Example(augment_batch(z.x, draw), z.y)


def replace_one(ds, index, zbar):
    """ Copy of ds with the example at index replaced by zbar

    Parameters
    ----------
    ds : Dataset
    index : int
    zbar : Example

    Returns
    -------
    ds : Dataset
    """
    if index < 0 or index >= ds.n:
        msgs.error("Index {0:d} is out of range for a dataset of {1:d} examples".format(index, ds.n))
    if zbar.x.size != ds.feature_dim:
        msgs.error("Replacement has {0:d} features; the dataset has {1:d}".format(
            zbar.x.size, ds.feature_dim))
    X = ds.X.copy()
    y = ds.y.copy()
    X[index] = zbar.x
    y[index] = zbar.y
    return Dataset(X, y, ds.class_count, provenance=ds.provenance + '+replace({0:d})'.format(index))


def feature_names(feature_dim):
    return ['f{0:d}'.format(kk) for kk in range(feature_dim)]


def write_csv(ds, path):
    """ Write a dataset as comma-separated text, header f0,...,f{k-1},label
    """
    names = feature_names(ds.feature_dim)
    tbl = Table([ds.X[:, kk] for kk in range(ds.feature_dim)] + [ds.y], names=names + ['label'])
    for name in names:
        tbl[name].format = '%.17g'
    tbl.write(path, format='ascii.csv', overwrite=True)
    msgs.info("Wrote {0:d} examples to:".format(ds.n) + msgs.newline() + path)


def load_csv(path, class_count=None):
    """ Load a dataset from comma-separated text

    Parameters
    ----------
    path : str
    class_count : int, optional
      Declared number of classes; inferred as max(label)+1 when None

    Returns
    -------
    ds : Dataset
    """
    if not os.path.isfile(path):
        msgs.error("Data file does not exist:" + msgs.newline() + path)
    try:
        tbl = Table.read(path, format='ascii.csv')
    except ValueError as err:
        # Ragged rows and other malformed text
        msgs.error("Could not read the data file:" + msgs.newline() + path + msgs.newline() + str(err))
    names = list(tbl.colnames)
    if len(names) < 2 or names[-1] != 'label' or names[:-1] != feature_names(len(names)-1):
        msgs.error("Data file header must read f0,...,f{k-1},label:" + msgs.newline() + path)
    if len(tbl) == 0:
        msgs.error("Data file contains no examples:" + msgs.newline() + path)
    nfeat = len(names)-1
    X = np.zeros((len(tbl), nfeat))
    y = np.zeros(len(tbl), dtype=int)
    for ii, row in enumerate(tbl):
        # Line numbers count the header
        try:
            X[ii] = [float(row[name]) for name in names[:-1]]
            label = float(row['label'])
        except (ValueError, TypeError):
            msgs.error("Could not parse line {0:d} of:".format(ii+2) + msgs.newline() + path)
        if label != np.round(label) or label < 0:
            msgs.error("Line {0:d} has an invalid label {1}".format(ii+2, row['label']))
        y[ii] = int(label)
        if not np.all(np.isfinite(X[ii])):
            msgs.error("Line {0:d} has a non-finite feature".format(ii+2))
    if class_count is None:
        class_count = max(int(np.max(y))+1, 2)
    elif np.max(y) >= class_count:
        msgs.error("Line {0:d} has label {1:d} outside the declared {2:d} classes".format(
            int(np.argmax(y))+2, int(np.max(y)), class_count))
    ds = Dataset(X, y, class_count)
    ds.provenance = '{0:s}(sha256={1:s})'.format(path, ds.content_hash[:16])
    return ds
