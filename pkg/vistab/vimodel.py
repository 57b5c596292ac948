# Module for the mean-field Gaussian variational multilayer perceptron
#  Includes the Architecture and VarParams classes
from __future__ import absolute_import, division, print_function

import copy

import numpy as np
from scipy.special import expit, logsumexp, softmax

from vistab import vimsgs

# Logging
msgs = vimsgs.get_logger()


class Architecture(object):
    """Layer layout of the MLP

    Weights are flattened layer by layer: W (out x in, row-major) then b.

    Parameters:
    ----------
    layer_sizes: list
       Input dimension, hidden widths..., class count
    activation: str, optional
       Hidden-layer activation ('relu' or 'tanh')
    bias: bool, optional
       Include a bias vector in every layer
    """
    def __init__(self, layer_sizes, activation='relu', bias=True):
        self.layer_sizes = [int(ll) for ll in layer_sizes]
        if len(self.layer_sizes) < 2:
            msgs.error("An architecture needs at least an input and an output layer")
        if min(self.layer_sizes) < 1:
            msgs.error("Layer sizes must be positive integers")
        if self.layer_sizes[-1] < 2:
            msgs.error("The class count (last layer size) must be >= 2")
        if activation not in ['relu', 'tanh']:
            msgs.error("Unknown activation '{0:s}'".format(activation) + msgs.newline() +
                       "Choose one of: relu, tanh")
        self.activation = activation
        self.bias = bias

    @property
    def n_features(self):
        return self.layer_sizes[0]

    @property
    def n_classes(self):
        return self.layer_sizes[-1]

    @property
    def shapes(self):
        return [(nout, nin) for nin, nout in zip(self.layer_sizes[:-1], self.layer_sizes[1:])]

    @property
    def n_params(self):
        return int(sum([nout*nin + (nout if self.bias else 0) for nout, nin in self.shapes]))

    def unpack(self, w):
        """ Split a flat weight vector into per-layer (W, b); b is None without bias
        """
        w = np.asarray(w)
        if w.shape[-1] != self.n_params:
            msgs.error("Weight vector has length {0:d}; the architecture needs {1:d}".format(
                w.shape[-1], self.n_params))
        layers = []
        idx = 0
        for nout, nin in self.shapes:
            W = w[idx:idx+nout*nin].reshape(nout, nin)
            idx += nout*nin
            if self.bias:
                b = w[idx:idx+nout]
                idx += nout
            else:
                b = None
            layers.append((W, b))
        return layers

    def __repr__(self):
        return "<Architecture: {0} {1:s} ({2:d} params)>".format(
            self.layer_sizes, self.activation, self.n_params)


class VarParams(object):
    """Trainable state of the variational posterior

    sigma = sigma0 + softplus(s), so every std is at least sigma0.

    Parameters:
    ----------
    m: ndarray
       Means of all weights and biases (length d)
    s: ndarray
       Unconstrained std parameters (length d)
    sigma0: float
       Floor on the standard deviations
    """
    def __init__(self, m, s, sigma0):
        self.m = np.asarray(m, dtype=float)
        self.s = np.asarray(s, dtype=float)
        if self.m.shape != self.s.shape or self.m.ndim != 1:
            msgs.error("VarParams m and s must be vectors of equal length")
        if sigma0 <= 0.:
            msgs.error("sigma0 must be positive")
        self.sigma0 = float(sigma0)

    @property
    def n_params(self):
        return self.m.size

    @property
    def sigma(self):
        return sigma_of(self)

    def copy(self):
        return copy.deepcopy(self)

    def posterior(self):
        """ The diagonal Gaussian these parameters describe
        """
        from vistab import vigauss
        return vigauss.DiagGaussian(self.m, self.sigma)

    def __repr__(self):
        return "<VarParams: d={0:d}, sigma0={1:g}>".format(self.n_params, self.sigma0)


class Example(object):
    """ A single labelled example z = (x, y)
    """
    def __init__(self, x, y):
        self.x = np.atleast_1d(np.asarray(x, dtype=float))
        self.y = int(y)

    def __repr__(self):
        return "<Example: y={0:d}>".format(self.y)


def softplus(s):
    return np.logaddexp(0., s)


def sigma_of(params):
    """ sigma0 + softplus(s), elementwise
    """
    return params.sigma0 + softplus(params.s)


def dsigma_ds(params):
    """ Derivative of the sigma map; the logistic function, bounded by 1
    """
    return expit(params.s)


def s_from_sigma(sigma, sigma0):
    """ Inverse of the sigma map
    """
    excess = np.asarray(sigma, dtype=float) - sigma0
    if np.any(excess <= 0.):
        msgs.error("Every sigma must exceed sigma0={0:g}".format(sigma0))
    # log(expm1(x)) = x + log(-expm1(-x)) is stable for large x
    return excess + np.log(-np.expm1(-excess))


def init_params(arch, sigma0, init_sigma, seed):
    """ He-style initialisation of the variational parameters

    Parameters
    ----------
    arch : Architecture
    sigma0 : float
    init_sigma : float
      Initial standard deviation of every weight (> sigma0)
    seed : int or SeedSequence

    Returns
    -------
    params : VarParams
    """
    rng = np.random.default_rng(seed)
    m = []
    for nout, nin in arch.shapes:
        m.append(rng.normal(0., np.sqrt(2./nin), size=nout*nin))
        if arch.bias:
            m.append(np.zeros(nout))
    m = np.concatenate(m)
    s = np.full(m.size, s_from_sigma(init_sigma, sigma0))
    return VarParams(m, s, sigma0)


def sample_weights(params, noise):
    """ Reparameterised weight draw, w = m + sigma * noise

    Parameters
    ----------
    params : VarParams
    noise : ndarray
      Standard normal draws; (d,) or (S, d)

    Returns
    -------
    w : ndarray
    """
    noise = np.asarray(noise, dtype=float)
    if noise.shape[-1] != params.n_params:
        msgs.error("Noise has length {0:d}; the parameters have length {1:d}".format(
            noise.shape[-1], params.n_params))
    return params.m + sigma_of(params) * noise


def _activate(z, activation):
    if activation == 'relu':
        return np.maximum(z, 0.)
    return np.tanh(z)


def _dactivate(z, a, activation):
    if activation == 'relu':
        return np.where(z > 0., 1., 0.)
    return 1. - a**2


def forward(w, X, arch):
    """ Forward pass of the MLP

    Parameters
    ----------
    w : ndarray
      Flat weight vector
    X : ndarray
      (N, n_features) inputs
    arch : Architecture

    Returns
    -------
    logits : ndarray
      (N, n_classes)
    memory : list
      (input, pre-activation, activation) of every layer, for the backward pass
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != arch.n_features:
        msgs.error("Inputs have {0:d} features; the architecture expects {1:d}".format(
            X.shape[1], arch.n_features))
    layers = arch.unpack(w)
    memory = []
    a = X
    for ii, (W, b) in enumerate(layers):
        z = a.dot(W.T)
        if b is not None:
            z = z + b
        if ii < len(layers)-1:
            anew = _activate(z, arch.activation)
        else:
            anew = z
        memory.append((a, z, anew))
        a = anew
    return a, memory


def logits(w, X, arch):
    return forward(w, X, arch)[0]


def _check_labels(y, arch):
    y = np.atleast_1d(np.asarray(y))
    if np.any(y < 0) or np.any(y >= arch.n_classes):
        msgs.error("Label out of range [0, {0:d}): {1}".format(
            arch.n_classes, y[(y < 0) | (y >= arch.n_classes)][:5].tolist()))
    return y.astype(int)


def nll_batch(w, X, y, arch):
    """ Per-example softmax cross-entropy, -log p(y|x, w)
    """
    y = _check_labels(y, arch)
    zz = logits(w, X, arch)
    nll = logsumexp(zz, axis=1) - zz[np.arange(y.size), y]
    # logsumexp >= max logit, so only round-off can go negative
    return np.maximum(nll, 0.)


def nll(w, z, arch):
    """ Softmax cross-entropy of a single example
    """
    return float(nll_batch(w, z.x[None, :], [z.y], arch)[0])


def zero_one_batch(w, X, y, arch):
    """ Per-example 0-1 loss; argmax ties go to the smallest class index
    """
    y = _check_labels(y, arch)
    return (np.argmax(logits(w, X, arch), axis=1) != y).astype(float)


def zero_one(w, z, arch):
    return int(zero_one_batch(w, z.x[None, :], [z.y], arch)[0])


def grad_nll_batch(w, X, y, arch):
    """ Per-example gradients of the cross-entropy with respect to w

    Parameters
    ----------
    w : ndarray
    X : ndarray
      (N, n_features)
    y : ndarray
      (N,) labels
    arch : Architecture

    Returns
    -------
    grads : ndarray
      (N, d); row n is the gradient of nll on example n
    """
    y = _check_labels(y, arch)
    zz, memory = forward(w, X, arch)
    nobj = y.size
    delta = softmax(zz, axis=1)
    # p_y - 1 is written as minus the mass of the other classes
    rows = np.arange(nobj)
    delta[rows, y] = 0.
    delta[rows, y] = -np.sum(delta, axis=1)
    layers = arch.unpack(w)
    blocks = []
    for ii in range(len(layers)-1, -1, -1):
        W, b = layers[ii]
        a_in = memory[ii][0]
        dW = delta[:, :, None] * a_in[:, None, :]
        if b is not None:
            blocks.append(delta.copy())
        blocks.append(dW.reshape(nobj, -1))
        if ii > 0:
            zprev, aprev = memory[ii-1][1], memory[ii-1][2]
            delta = delta.dot(W) * _dactivate(zprev, aprev, arch.activation)
    # Blocks were collected from the output layer backwards
    return np.concatenate(blocks[::-1], axis=1)


def grad_nll(w, z, arch):
    """ Gradient of the cross-entropy of a single example
    """
    return grad_nll_batch(w, z.x[None, :], [z.y], arch)[0]
