# Module for divergences and distances between diagonal Gaussians
#  and small discrete distributions
from __future__ import absolute_import, division, print_function

import numpy as np
from scipy.special import xlogy

from vistab import vimsgs

# Logging
msgs = vimsgs.get_logger()


class DiagGaussian(object):
    """Diagonal Gaussian over weight space, N(mean, diag(std**2))

    Parameters:
    ----------
    mean: ndarray
       Mean vector (length d)
    std: ndarray
       Per-coordinate standard deviations (length d, strictly positive)
    """
    def __init__(self, mean, std):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.std = np.atleast_1d(np.asarray(std, dtype=float))
        if self.mean.ndim != 1 or self.mean.shape != self.std.shape:
            msgs.error("DiagGaussian mean and std must be vectors of equal length" + msgs.newline() +
                       "Received lengths {0:d} and {1:d}".format(self.mean.size, self.std.size))
        if not np.all(self.std > 0.):
            msgs.error("DiagGaussian std must be strictly positive (min={0:g})".format(np.min(self.std)))

    @property
    def n_dim(self):
        return self.mean.size

    def check_floor(self, sigma0):
        """ Error if any standard deviation lies below sigma0
        """
        if np.any(self.std < sigma0):
            kk = int(np.argmin(self.std))
            msgs.error("Standard deviation {0:g} at coordinate {1:d} is below sigma0={2:g}".format(
                self.std[kk], kk, sigma0))
        return True

    def __repr__(self):
        return "<DiagGaussian: d={0:d}>".format(self.n_dim)


class DiscreteDist(object):
    """Probability vector over a finite support

    Parameters:
    ----------
    probs: ndarray
       Nonnegative, sums to one within 1e-12
    """
    def __init__(self, probs):
        self.probs = np.atleast_1d(np.asarray(probs, dtype=float))
        if np.any(self.probs < 0.) or np.any(self.probs > 1.):
            msgs.error("DiscreteDist probabilities must lie in [0, 1]")
        if np.abs(np.sum(self.probs) - 1.) > 1e-12:
            msgs.error("DiscreteDist probabilities sum to {0:.15g}, not 1".format(np.sum(self.probs)))

    @property
    def size(self):
        return self.probs.size

    def __repr__(self):
        return "<DiscreteDist: {0:d} outcomes>".format(self.size)


def bernoulli(theta):
    """ Bernoulli distribution as a DiscreteDist over (0, 1)
    """
    return DiscreteDist([1.-theta, theta])


def _check_dims(q, p):
    if q.n_dim != p.n_dim:
        msgs.error("Dimension mismatch between Gaussians: {0:d} vs {1:d}".format(q.n_dim, p.n_dim))


def kl_diag_gauss(q, p, reverse=False):
    """ Closed-form KL divergence between two diagonal Gaussians

    KL(q||p) = sum log(sp/sq) + 0.5 * sum(sq**2/sp**2 - 1 + (mq-mp)**2/sp**2)

    Parameters
    ----------
    q : DiagGaussian
    p : DiagGaussian
    reverse : bool, optional
      Swap the roles of q and p, i.e. return KL(p||q). This is the order of the
      literal expression that the stability route bounds, with q the posterior
      trained on S and p the posterior trained on the perturbed set.

    Returns
    -------
    kl : float
    """
    _check_dims(q, p)
    if reverse:
        q, p = p, q
    ratio = (q.std / p.std)**2
    kl = np.sum(np.log(p.std) - np.log(q.std)) + \
        0.5 * np.sum(ratio - 1. + (q.mean - p.mean)**2 / p.std**2)
    # Round-off can push an exact zero slightly negative
    return float(max(kl, 0.))


def kl_upper_bound(q, p, sigma0):
    """ Upper bound of the Gaussian KL in terms of parameter differences

    2 |s-s'|_1/sigma0 + |s-s'|_2^2/(2 sigma0^2) + |m-m'|_2^2/(2 sigma0^2)

    The bound holds for either argument order as long as every std is >= sigma0.

    Parameters
    ----------
    q : DiagGaussian
    p : DiagGaussian
    sigma0 : float
      Floor on the standard deviations

    Returns
    -------
    bound : float
    """
    _check_dims(q, p)
    if sigma0 <= 0.:
        msgs.error("sigma0 must be positive")
    q.check_floor(sigma0)
    p.check_floor(sigma0)
    dstd = q.std - p.std
    dmean = q.mean - p.mean
    return float(2.*np.sum(np.abs(dstd))/sigma0 + np.sum(dstd**2)/(2.*sigma0**2) +
                 np.sum(dmean**2)/(2.*sigma0**2))


def tv_pinsker(kl):
    """ Pinsker's inequality: TV <= sqrt(KL/2)
    """
    if kl < 0.:
        msgs.error("Pinsker's inequality needs a nonnegative KL (received {0:g})".format(kl))
    return np.sqrt(kl / 2.)


def w2_diag_gauss(q, p):
    """ Wasserstein-2 distance between diagonal Gaussians

    Parameters
    ----------
    q : DiagGaussian
    p : DiagGaussian

    Returns
    -------
    w2 : float
      sqrt(|mq-mp|_2^2 + |sq-sp|_2^2)
    """
    _check_dims(q, p)
    return float(np.sqrt(np.sum((q.mean - p.mean)**2) + np.sum((q.std - p.std)**2)))


def tv_discrete(p, q):
    """ Total variation distance, 0.5 * sum |p_i - q_i|
    """
    if p.size != q.size:
        msgs.error("Support size mismatch: {0:d} vs {1:d}".format(p.size, q.size))
    return 0.5 * float(np.sum(np.abs(p.probs - q.probs)))


def kl_discrete(p, q):
    """ KL(p||q) for discrete distributions, with 0 log 0 = 0

    Parameters
    ----------
    p : DiscreteDist
    q : DiscreteDist

    Returns
    -------
    kl : float
    """
    if p.size != q.size:
        msgs.error("Support size mismatch: {0:d} vs {1:d}".format(p.size, q.size))
    bad = (p.probs > 0.) & (q.probs == 0.)
    if np.any(bad):
        msgs.error("KL is infinite: q vanishes on outcome(s) {0} where p does not".format(
            np.where(bad)[0].tolist()))
    # xlogy(0, 0) = 0, and q is positive wherever p is
    safe_q = np.where(p.probs > 0., q.probs, 1.)
    kl = np.sum(xlogy(p.probs, p.probs) - xlogy(p.probs, safe_q))
    return float(max(kl, 0.))
