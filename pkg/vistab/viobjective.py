# Module for the ELBO and DLM objectives and their reparameterised gradients
from __future__ import absolute_import, division, print_function

import numpy as np
from scipy.special import logsumexp, softmax

from vistab import vimsgs
from vistab import vigauss
from vistab import vimodel

# Logging
msgs = vimsgs.get_logger()

objective_kinds = ['elbo', 'dlm']


class ObjectiveConfig(object):
    """Settings of a per-example objective

    F(theta, z) = data term + (kl_coeff/n) KL(Q || prior)

    Parameters:
    ----------
    kind: str
       'elbo' (mean of -log p over draws) or 'dlm' (-log of the mean of p)
    kl_coeff: float
       beta, the coefficient of the KL term
    n: int
       Training-set size
    mc_samples: int
       Reparameterisation draws per evaluation
    prior: DiagGaussian
    arch: Architecture
    """
    def __init__(self, kind, kl_coeff, n, mc_samples, prior, arch):
        if kind not in objective_kinds:
            msgs.error("Unknown objective '{0}'".format(kind) + msgs.newline() +
                       "Choose one of: " + ", ".join(objective_kinds))
        if kl_coeff < 0.:
            msgs.error("The KL coefficient must be >= 0")
        if n < 1:
            msgs.error("The dataset size n must be >= 1")
        if mc_samples < 1:
            msgs.error("mc_samples must be >= 1")
        if prior.n_dim != arch.n_params:
            msgs.error("Prior has dimension {0:d}; the architecture has {1:d} parameters".format(
                prior.n_dim, arch.n_params))
        self.kind = kind
        self.kl_coeff = float(kl_coeff)
        self.n = int(n)
        self.mc_samples = int(mc_samples)
        self.prior = prior
        self.arch = arch

    def __repr__(self):
        return "<ObjectiveConfig: {0:s}, beta={1:g}, n={2:d}, S={3:d}>".format(
            self.kind, self.kl_coeff, self.n, self.mc_samples)


def isotropic_prior(arch, prior_std):
    """ N(0, prior_std^2 I) over all parameters of arch
    """
    return vigauss.DiagGaussian(np.zeros(arch.n_params), np.full(arch.n_params, prior_std))


def _check_noise(noise_block, params):
    noise_block = np.atleast_2d(np.asarray(noise_block, dtype=float))
    if noise_block.shape[0] == 0 or noise_block.size == 0:
        msgs.error("The noise block is empty")
    if noise_block.shape[1] != params.n_params:
        msgs.error("Noise block has {0:d} columns; the parameters have length {1:d}".format(
            noise_block.shape[1], params.n_params))
    return noise_block


def data_term(nlls, kind):
    """ Combine per-draw negative log-likelihoods into the data term

    Parameters
    ----------
    nlls : ndarray
      (S,) or (S, N) values of -log p, one row per draw
    kind : str

    Returns
    -------
    value : float or ndarray
    """
    nlls = np.asarray(nlls, dtype=float)
    if kind == 'elbo':
        return np.mean(nlls, axis=0)
    # -log mean exp(-nll), max-shifted
    return -(logsumexp(-nlls, axis=0) - np.log(nlls.shape[0]))


def draw_weights(nlls, kind):
    """ Weight of each draw in the pathwise gradient of the data term
    """
    nlls = np.asarray(nlls, dtype=float)
    if kind == 'elbo':
        return np.full(nlls.shape, 1./nlls.shape[0])
    return softmax(-nlls, axis=0)


def kl_to_prior_grad(params, cfg):
    """ KL(Q || prior) and its gradient in (m, s)

    Parameters
    ----------
    params : VarParams
    cfg : ObjectiveConfig

    Returns
    -------
    value : float
    grad : tuple
      (gradient in m, gradient in s)
    """
    prior = cfg.prior
    if prior.n_dim != params.n_params:
        msgs.error("Prior has dimension {0:d}; the parameters have length {1:d}".format(
            prior.n_dim, params.n_params))
    sigma = vimodel.sigma_of(params)
    value = vigauss.kl_diag_gauss(vigauss.DiagGaussian(params.m, sigma), prior)
    gm = (params.m - prior.mean) / prior.std**2
    gs = (-1./sigma + sigma/prior.std**2) * vimodel.dsigma_ds(params)
    return value, (gm, gs)


def per_example_grads(params, X, y, noise_block, cfg, return_values=False):
    """ Per-example gradients of F over a batch sharing one noise block

    Parameters
    ----------
    params : VarParams
    X : ndarray
      (N, n_features)
    y : ndarray
      (N,)
    noise_block : ndarray
      (S, d) standard normal draws, shared by every example
    cfg : ObjectiveConfig
    return_values : bool, optional
      Also return the per-example objective values

    Returns
    -------
    gm, gs : ndarray
      (N, d) each
    values : ndarray, optional
      (N,)
    """
    noise_block = _check_noise(noise_block, params)
    X = np.atleast_2d(X)
    y = np.atleast_1d(y)
    arch = cfg.arch
    nsamp = noise_block.shape[0]
    weights = vimodel.sample_weights(params, noise_block)
    nlls = np.zeros((nsamp, y.size))
    grads = np.zeros((nsamp, y.size, params.n_params))
    for ii in range(nsamp):
        nlls[ii] = vimodel.nll_batch(weights[ii], X, y, arch)
        grads[ii] = vimodel.grad_nll_batch(weights[ii], X, y, arch)
    rr = draw_weights(nlls, cfg.kind)
    gm = np.einsum('sn,snd->nd', rr, grads)
    gs = np.einsum('sn,snd,sd->nd', rr, grads, noise_block) * vimodel.dsigma_ds(params)
    kl_value, (kgm, kgs) = kl_to_prior_grad(params, cfg)
    scale = cfg.kl_coeff / cfg.n
    gm += scale * kgm
    gs += scale * kgs
    if return_values:
        return gm, gs, data_term(nlls, cfg.kind) + scale * kl_value
    return gm, gs


def batch_objective_value(params, X, y, noise_block, cfg):
    """ Mean of F over a batch evaluated with one noise block
    """
    noise_block = _check_noise(noise_block, params)
    weights = vimodel.sample_weights(params, noise_block)
    nlls = np.array([vimodel.nll_batch(ww, X, y, cfg.arch) for ww in weights])
    kl_value = kl_to_prior_grad(params, cfg)[0]
    return float(np.mean(data_term(nlls, cfg.kind)) + cfg.kl_coeff / cfg.n * kl_value)


def batch_objective_grad(params, X, y, noise_block, cfg):
    """ Gradient of the batch mean of F, returned as (gm, gs)
    """
    gm, gs = per_example_grads(params, X, y, noise_block, cfg)
    return np.mean(gm, axis=0), np.mean(gs, axis=0)


def objective_value(params, z, noise_block, cfg):
    """ F(theta, z) for a single example and a fixed noise block

    Parameters
    ----------
    params : VarParams
    z : Example
    noise_block : ndarray
      (mc_samples, d) reparameterisation draws
    cfg : ObjectiveConfig

    Returns
    -------
    value : float
    """
    return batch_objective_value(params, z.x[None, :], [z.y], noise_block, cfg)


def objective_grad(params, z, noise_block, cfg):
    """ Exact gradient of objective_value in (m, s) for the given noise block
    """
    gm, gs = per_example_grads(params, z.x[None, :], [z.y], noise_block, cfg)
    return gm[0], gs[0]
