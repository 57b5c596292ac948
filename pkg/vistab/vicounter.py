# Module for the two counterexamples
#  A Bernoulli chain where the KL chain rule fails for variational updates,
#  and a logistic task where the stability bound is zero while the PAC-Bayes KL diverges
from __future__ import absolute_import, division, print_function

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import expit

from vistab import vimsgs
from vistab import vigauss
from vistab import vidata
from vistab import vistable

# Logging
msgs = vimsgs.get_logger()


class BernoulliChainSetup(object):
    """Two Bernoulli processes W1 -> W2 with W2 ~ Bern(theta1 + update_delta)

    Parameters:
    ----------
    theta1: float
    theta1_bar: float
    update_delta: float
       Additive update of the Bernoulli parameter
    """
    def __init__(self, theta1=0.4, theta1_bar=0.6, update_delta=-0.2):
        self.theta1 = float(theta1)
        self.theta1_bar = float(theta1_bar)
        self.update_delta = float(update_delta)
        for name, val in [('theta1', self.theta1), ('theta1_bar', self.theta1_bar),
                          ('theta2', self.theta2), ('theta2_bar', self.theta2_bar)]:
            if val <= 0. or val >= 1.:
                msgs.error("Bernoulli parameter {0:s}={1:g} is outside (0, 1)".format(name, val))

    @property
    def theta2(self):
        return self.theta1 + self.update_delta

    @property
    def theta2_bar(self):
        return self.theta1_bar + self.update_delta


class LogisticExtremeSetup(object):
    """Scalar logistic regression with a Gaussian posterior of fixed std

    Parameters:
    ----------
    sigma: float
       Fixed posterior std
    learning_rate: float
    steps: int
    n_data: int
       Examples, alternating between (x=1, y=1) and (x=-1, y=0)
    mc_samples: int
       Draws per step, shared by every example
    seed: int
    """
    def __init__(self, sigma=0.05, learning_rate=0.1, steps=1000, n_data=2, mc_samples=1, seed=0):
        if sigma <= 0. or learning_rate <= 0.:
            msgs.error("sigma and learning_rate must be positive")
        if steps < 1 or n_data < 1 or mc_samples < 1:
            msgs.error("steps, n_data and mc_samples must be >= 1")
        self.sigma = float(sigma)
        self.learning_rate = float(learning_rate)
        self.steps = int(steps)
        self.n_data = int(n_data)
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)


def joint_bernoulli(theta1, theta2):
    """ Product distribution Bern(theta1) x Bern(theta2) over (w1, w2) in 00, 01, 10, 11 order
    """
    p1 = np.array([1.-theta1, theta1])
    p2 = np.array([1.-theta2, theta2])
    return vigauss.DiscreteDist(np.outer(p1, p2).ravel())


def bernoulli_chain_kls(setup=None):
    """ KL of the joint (W1, W2) against the marginal plus conditional decomposition

    W2 depends on W1's parameter only through the deterministic update, so
    the conditional term vanishes.

    Parameters
    ----------
    setup : BernoulliChainSetup, optional

    Returns
    -------
    joint_kl : float
    marginal_plus_conditional : float
    """
    if setup is None:
        setup = BernoulliChainSetup()
    joint = joint_bernoulli(setup.theta1, setup.theta2)
    joint_bar = joint_bernoulli(setup.theta1_bar, setup.theta2_bar)
    joint_kl = vigauss.kl_discrete(joint, joint_bar)
    marginal = vigauss.kl_discrete(vigauss.bernoulli(setup.theta1), vigauss.bernoulli(setup.theta1_bar))
    return joint_kl, marginal + 0.


def logistic_grad(w, x, y):
    """ d/dw of -log p(y|x, w) with p(y=1|x, w) = expit(w x)
    """
    return -y*x*expit(-w*x) + (1.-y)*x*expit(w*x)


def logistic_dataset(n_data):
    """ The two-valued logistic task as a Dataset; one feature, two classes
    """
    x = np.where(np.arange(n_data) % 2 == 0, 1., -1.)
    y = np.where(x > 0., 1, 0)
    return vidata.Dataset(x[:, None], y, 2, provenance='logistic_extreme(n={0:d})'.format(n_data))


def expected_grad_quadrature(m, sigma, x, y, order=60):
    """ E_{w~N(m, sigma^2)} of the logistic gradient by Gauss-Hermite quadrature
    """
    nodes, weights = hermegauss(order)
    return float(np.sum(weights * logistic_grad(m + sigma*nodes, x, y)) / np.sqrt(2.*np.pi))


def expected_grad_mc(m, sigma, x, y, eps):
    """ Shared-draw Monte-Carlo estimate of the expected logistic gradient
    """
    return float(np.mean(logistic_grad(m + sigma*np.asarray(eps), x, y)))


def logistic_extreme_run(setup=None, C=1.):
    """ Full-batch SGD on the expected logistic loss with shared draws

    Parameters
    ----------
    setup : LogisticExtremeSetup, optional
    C : float, optional
      Loss bound used by the stability route

    Returns
    -------
    stability_bound : float
      Exactly zero: both example types share every per-draw gradient
    pac_kl_trajectory : ndarray
      m_t^2 / (2 sigma^2) for t = 0..steps
    mean_trajectory : ndarray
      m_t for t = 0..steps
    """
    if setup is None:
        setup = LogisticExtremeSetup()
    ds = logistic_dataset(setup.n_data)
    xx, yy = ds.X[:, 0], ds.y.astype(float)
    rng = np.random.default_rng(setup.seed)
    eps = rng.standard_normal((setup.steps, setup.mc_samples))
    lr, sig = setup.learning_rate, setup.sigma

    def update(t, state):
        ww = state[0][0] + sig*eps[t-1]
        grad = np.mean([np.mean(logistic_grad(ww, x1, y1)) for x1, y1 in zip(xx, yy)])
        return [np.array([state[0][0] - lr*grad])]

    means = np.zeros(setup.steps+1)
    deltas = np.zeros((setup.steps, 3))
    state = [np.zeros(1)]
    for t in range(1, setup.steps+1):
        ww = state[0][0] + sig*eps[t-1]
        # z from one example type and zbar from the other
        deltas[t-1, 0] = np.abs(np.mean(logistic_grad(ww, -1., 0.)) - np.mean(logistic_grad(ww, 1., 1.)))
        state = update(t, state)
        means[t] = state[0][0]
    eta = vistable.measure_expansion(update, [np.zeros(1)], [np.full(1, 1e-3)], setup.steps)
    alphas = np.full(setup.steps, lr)
    inputs = vistable.StabilityBoundInputs(sig, setup.n_data, C=C)
    stab = vistable.stability_from_arrays(deltas, eta, alphas, inputs)
    pac_kl = means**2 / (2.*sig**2)
    return stab['kl_route'], pac_kl, means
