# Module for the PAC-Bayes comparator bounds
from __future__ import absolute_import, division, print_function

import numpy as np

from vistab import vimsgs
from vistab import vigauss

# Logging
msgs = vimsgs.get_logger()

prior_choices = ['objective_prior', 'initialization_q0']

# Smallest prior variance scanned by the union bound
union_lambda_min = 1e-10


class PacBayesConfig(object):
    """Constants of the PAC-Bayes bounds

    Parameters:
    ----------
    delta: float
       Confidence, in (0, 1)
    C: float
       Bound on the loss
    prior_choice: str
       'objective_prior' or 'initialization_q0'
    union_b: int
    union_c: float
       The union bound scans prior variances c*exp(-j/b)
    """
    def __init__(self, delta=0.025, C=1., prior_choice='objective_prior', union_b=100, union_c=0.1):
        if delta <= 0. or delta >= 1.:
            msgs.error("delta must be in (0, 1) (received {0:g})".format(delta))
        if C <= 0.:
            msgs.error("C must be positive")
        if prior_choice not in prior_choices:
            msgs.error("Unknown prior choice '{0}'".format(prior_choice) + msgs.newline() +
                       "Choose one of: " + ", ".join(prior_choices))
        if union_b < 1 or union_c <= 0.:
            msgs.error("union_b must be >= 1 and union_c > 0")
        self.delta = float(delta)
        self.C = float(C)
        self.prior_choice = prior_choice
        self.union_b = int(union_b)
        self.union_c = float(union_c)


def _check_kl(kl):
    if kl < 0.:
        msgs.error("KL must be >= 0 (received {0:g})".format(kl))


def germain_lambda(kl, cfg, n):
    """ The lambda minimising the linear PAC-Bayes bound
    """
    return np.sqrt(2.*n*(kl + np.log(1./cfg.delta))) / cfg.C


def germain_bound(kl, cfg, n, lam=None):
    """ Linear PAC-Bayes bound, with a given or the optimal lambda

    Parameters
    ----------
    kl : float
      KL(Q || P)
    cfg : PacBayesConfig
    n : int
    lam : float, optional
      With lam: (kl + log(1/delta))/lam + lam C^2/(2n).
      Without: C sqrt(2 (kl + log(1/delta))/n), the value at the optimal lambda.

    Returns
    -------
    bound : float
    """
    _check_kl(kl)
    if lam is None:
        return cfg.C * np.sqrt(2.*(kl + np.log(1./cfg.delta)) / n)
    if lam <= 0.:
        msgs.error("lambda must be positive (received {0:g})".format(lam))
    return (kl + np.log(1./cfg.delta)) / lam + lam*cfg.C**2 / (2.*n)


def mcallester_bound(kl, cfg, n):
    """ C sqrt((kl + log(n/delta)) / (2(n-1)))
    """
    _check_kl(kl)
    if n < 2:
        msgs.error("The square-root bound needs n >= 2 (received {0:d})".format(n))
    return cfg.C * np.sqrt((kl + np.log(n/cfg.delta)) / (2.*(n-1.)))


def union_jmax(cfg):
    """ Largest grid index j with c*exp(-j/b) >= union_lambda_min
    """
    return int(np.floor(cfg.union_b * np.log(cfg.union_c / union_lambda_min)))


def kl_grid(q, m0, lams):
    """ KL(q || N(m0, lam I)) for every prior variance in lams

    Parameters
    ----------
    q : DiagGaussian
    m0 : ndarray
    lams : ndarray
      Prior variances

    Returns
    -------
    kl : ndarray
    """
    m0 = np.asarray(m0, dtype=float)
    if m0.shape != q.mean.shape:
        msgs.error("Reference mean has length {0:d}; the posterior has {1:d}".format(m0.size, q.n_dim))
    lams = np.asarray(lams, dtype=float)
    d = q.n_dim
    var = q.std**2
    kl = 0.5*(d*np.log(lams) - np.sum(np.log(var))) + \
        (np.sum(var) + np.sum((q.mean - m0)**2)) / (2.*lams) - 0.5*d
    return np.maximum(kl, 0.)


def union_terms(q, m0, cfg, n, jgrid):
    """ Union-bound objective at every grid index in jgrid
    """
    jgrid = np.asarray(jgrid, dtype=float)
    lams = cfg.union_c * np.exp(-jgrid / cfg.union_b)
    kl = kl_grid(q, m0, lams)
    # b log(c/lam) = j
    penalty = 2.*np.log(cfg.union_b * np.log(cfg.union_c / lams))
    return np.sqrt((kl + penalty + np.log(np.pi**2 * n / (6.*cfg.delta))) / (2.*(n-1.)))


def union_bound(q, m0, cfg, n):
    """ PAC-Bayes bound for the 0-1 loss with a union over prior variances

    Minimises over j >= 1, lam = c exp(-j/b), of
    sqrt((KL(q || N(m0, lam I)) + 2 log(b log(c/lam)) + log(pi^2 n/(6 delta))) / (2(n-1)))

    Parameters
    ----------
    q : DiagGaussian
    m0 : ndarray
      Reference mean
    cfg : PacBayesConfig
    n : int

    Returns
    -------
    bound : float
    chosen_j : int
    """
    if n < 2:
        msgs.error("The union bound needs n >= 2 (received {0:d})".format(n))
    jmax = union_jmax(cfg)
    if jmax < 1:
        msgs.error("union_c={0:g} leaves no prior variance above {1:g}".format(cfg.union_c, union_lambda_min))
    jgrid = np.arange(1, jmax+1)
    vals = union_terms(q, m0, cfg, n, jgrid)
    kk = int(np.argmin(vals))
    return float(vals[kk]), int(jgrid[kk])


def pac_bayes_bounds(q, reference, cfg, n):
    """ All three comparator bounds of a posterior against one reference

    Parameters
    ----------
    q : DiagGaussian
    reference : DiagGaussian
      Objective prior or the initial posterior Q0
    cfg : PacBayesConfig
    n : int

    Returns
    -------
    out : dict
      kl, germain, mcallester, union, union_j
    """
    kl = vigauss.kl_diag_gauss(q, reference)
    union, jj = union_bound(q, reference.mean, cfg, n)
    return dict(kl=kl, germain=float(germain_bound(kl, cfg, n)), mcallester=float(mcallester_bound(kl, cfg, n)),
                union=union, union_j=jj)
