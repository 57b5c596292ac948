# Module for the stability bounds along an SGD trajectory
#  Gradient differences, expansion rates and the parameter-difference bounds
from __future__ import absolute_import, division, print_function

import numpy as np

from vistab import vimsgs
from vistab import vimodel
from vistab import viobjective
from vistab import vitrain
from vistab import vidata

# Logging
msgs = vimsgs.get_logger()

# Norm flavours carried through the pipeline, in column order
norm_flavors = ['m_l2', 's_l1', 's_l2']


class DeltaRecord(object):
    """Norms of a gradient difference at one step

    Parameters:
    ----------
    t: int
    delta_m_l2: float
       L2 norm of the m-block
    delta_s_l1: float
       L1 norm of the s-block
    delta_s_l2: float
       L2 norm of the s-block
    """
    def __init__(self, t, delta_m_l2, delta_s_l1, delta_s_l2):
        self.t = t
        self.delta_m_l2 = float(delta_m_l2)
        self.delta_s_l1 = float(delta_s_l1)
        self.delta_s_l2 = float(delta_s_l2)

    def as_array(self):
        return np.array([self.delta_m_l2, self.delta_s_l1, self.delta_s_l2])

    def __repr__(self):
        return "<DeltaRecord: t={0:d} m_l2={1:g} s_l1={2:g} s_l2={3:g}>".format(
            self.t, self.delta_m_l2, self.delta_s_l1, self.delta_s_l2)


class ExpansionProfile(object):
    """Per-step expansion rates aggregated over measurement runs

    Parameters:
    ----------
    eta: ndarray
       (T,) expansion rate of every step
    n_runs: int
       Number of measurement runs behind the profile
    aggregation: str, optional
    runs: ndarray, optional
       (n_runs, T) raw series
    """
    def __init__(self, eta, n_runs, aggregation='mean+4std', runs=None):
        self.eta = np.asarray(eta, dtype=float)
        self.n_runs = int(n_runs)
        self.aggregation = aggregation
        self.runs = None if runs is None else np.asarray(runs, dtype=float)

    @property
    def n_steps(self):
        return self.eta.size

    @property
    def cumulative(self):
        """ Running product of the expansion rates
        """
        return np.exp(np.cumsum(np.log(self.eta)))

    def __repr__(self):
        return "<ExpansionProfile: T={0:d}, runs={1:d}>".format(self.n_steps, self.n_runs)


class StabilityBoundInputs(object):
    """ Constants of the route bounds: C (loss bound), K (Lipschitz, optional), sigma0, n
    """
    def __init__(self, sigma0, n, C=1., K=None):
        if C <= 0.:
            msgs.error("The loss bound C must be positive")
        if sigma0 <= 0.:
            msgs.error("sigma0 must be positive")
        if K is not None and K <= 0.:
            msgs.error("The Lipschitz constant K must be positive or None")
        self.C = float(C)
        self.K = None if K is None else float(K)
        self.sigma0 = float(sigma0)
        self.n = int(n)


def block_norms(dm, ds):
    """ (|dm|_2, |ds|_1, |ds|_2) along the last axis
    """
    return np.stack([np.sqrt(np.sum(dm**2, axis=-1)), np.sum(np.abs(ds), axis=-1),
                     np.sqrt(np.sum(ds**2, axis=-1))], axis=-1)


def grad_delta(params_pre, z, zbar, noise_block, cfg, t=0):
    """ Norms of grad F(theta, zbar, eps) - grad F(theta, z, eps) with a shared noise block

    Parameters
    ----------
    params_pre : VarParams
      Pre-update state of step t
    z : Example
    zbar : Example
    noise_block : ndarray
    cfg : ObjectiveConfig
    t : int, optional
      Step index stored in the record

    Returns
    -------
    record : DeltaRecord
    """
    X = np.vstack([z.x, zbar.x])
    gm, gs = viobjective.per_example_grads(params_pre, X, [z.y, zbar.y], noise_block, cfg)
    norms = block_norms(gm[1]-gm[0], gs[1]-gs[0])
    return DeltaRecord(t, *norms)


class DeltaMonitor(object):
    """Pre-update hook measuring the gradient difference of every (z, zbar) pair

    Parameters:
    ----------
    pairs: list
       (z, zbar) Examples; z from the training set, zbar held out
    obj_cfg: ObjectiveConfig
    stream: EpsilonStream
       Supplies the pair augmentation draws (one per pair and step, shared by z and zbar)
    train_cfg: TrainConfig
    """
    def __init__(self, pairs, obj_cfg, stream, train_cfg):
        self.pairs = list(pairs)
        self.obj_cfg = obj_cfg
        self.stream = stream
        self.train_cfg = train_cfg
        self.t = []
        self._norms = []

    @property
    def n_pairs(self):
        return len(self.pairs)

    def __call__(self, t, params_pre, batch_idx, eps):
        npair = self.n_pairs
        self.t.append(t)
        if npair == 0:
            self._norms.append(np.zeros((0, 3)))
            return
        Z = np.array([zz.x for zz, zb in self.pairs])
        Zbar = np.array([zb.x for zz, zb in self.pairs])
        if self.train_cfg.augment:
            for pp in range(npair):
                draw = self.stream.pair_augmentation(t, pp, Z.shape[1], self.train_cfg.jitter_scale,
                                                     self.train_cfg.flip_prob)
                Z[pp] = vidata.augment_batch(Z[pp], draw)
                Zbar[pp] = vidata.augment_batch(Zbar[pp], draw)
        y = np.array([zz.y for zz, zb in self.pairs] + [zb.y for zz, zb in self.pairs])
        gm, gs = viobjective.per_example_grads(params_pre, np.vstack([Z, Zbar]), y, eps.noise, self.obj_cfg)
        self._norms.append(block_norms(gm[npair:]-gm[:npair], gs[npair:]-gs[:npair]))

    @property
    def norms(self):
        """ (T, n_pairs, 3) array of the three norm flavours
        """
        if len(self._norms) == 0:
            return np.zeros((0, self.n_pairs, 3))
        return np.array(self._norms)

    def records(self, pair):
        return [DeltaRecord(t, *self._norms[ii][pair]) for ii, t in enumerate(self.t)]

    def mean_records(self):
        return mean_delta_records(self.norms)


def mean_delta_records(norms):
    """ Average (T, pairs, 3) delta norms over pairs; no pairs gives zeros
    """
    norms = np.asarray(norms, dtype=float)
    if norms.ndim != 3 or norms.shape[2] != 3:
        msgs.error("Delta norms must have shape (T, pairs, 3)")
    if norms.shape[1] == 0:
        return np.zeros((norms.shape[0], 3))
    return np.mean(norms, axis=1)


def expansion_ratio(prev_a, prev_b, new_a, new_b):
    """ Largest per-block ratio |new_a - new_b| / |prev_a - prev_b| over the L1 and L2 norms

    Parameters
    ----------
    prev_a, prev_b, new_a, new_b : list
      Blocks (arrays) of the two states before and after an update

    Returns
    -------
    eta : float
      A block whose states coincide before the update counts as 1
    """
    eta = 0.
    for pa, pb, na, nb in zip(prev_a, prev_b, new_a, new_b):
        dprev = pa - pb
        dnew = na - nb
        for order in [1, 2]:
            den = np.linalg.norm(dprev, ord=order)
            if den == 0.:
                ratio = 1.
            else:
                ratio = np.linalg.norm(dnew, ord=order) / den
            eta = max(eta, ratio)
    return eta


def measure_expansion(update, state_a, state_b, steps):
    """ Expansion rate of a sequence of update maps applied to two states

    Parameters
    ----------
    update : callable
      update(t, state) -> new state; a state is a list of blocks
    state_a, state_b : list
      Initial states (must differ)
    steps : int

    Returns
    -------
    eta : ndarray
      (steps,) rate of each step
    """
    if all([np.array_equal(aa, bb) for aa, bb in zip(state_a, state_b)]):
        msgs.error("Expansion needs two distinct initial states")
    eta = np.zeros(steps)
    for t in range(1, steps+1):
        new_a = update(t, state_a)
        new_b = update(t, state_b)
        eta[t-1] = expansion_ratio(state_a, state_b, new_a, new_b)
        state_a, state_b = new_a, new_b
    return eta


def state_blocks(params, mstate=None):
    """ m and s blocks; with momentum each block is augmented with its velocity
    """
    if mstate is None:
        return [params.m, params.s]
    return [np.concatenate([params.m, mstate.vm]), np.concatenate([params.s, mstate.vs])]


def twin_run(dataset, arch, obj_cfg, train_cfg, stream, init_seeds, hooks=None):
    """ Train two initialisations in lockstep on the same stream

    Parameters
    ----------
    dataset : Dataset
    arch : Architecture
    obj_cfg : ObjectiveConfig
    train_cfg : TrainConfig
    stream : EpsilonStream
    init_seeds : tuple
      Two distinct initialisation seeds
    hooks : list, optional
      Attached to the first twin only

    Returns
    -------
    eta : ndarray
      (T,) expansion rate of each step
    params : VarParams
      Final parameters of the first twin
    trajectory : Trajectory
      Trajectory of the first twin, eta filled in
    """
    if len(init_seeds) != 2 or init_seeds[0] == init_seeds[1]:
        msgs.error("Expansion needs two distinct initialisation seeds")
    inits = [vimodel.init_params(arch, train_cfg.sigma0, train_cfg.init_sigma,
                                 stream.init_seed(int(ss)))
             for ss in init_seeds]
    if np.array_equal(inits[0].m, inits[1].m) and np.array_equal(inits[0].s, inits[1].s):
        msgs.error("The two initialisations are identical")
    run_a = vitrain.iterate_training(dataset, arch, obj_cfg, train_cfg, stream, params0=inits[0], hooks=hooks)
    run_b = vitrain.iterate_training(dataset, arch, obj_cfg, train_cfg, stream, params0=inits[1])
    traj = vitrain.Trajectory()
    nspe = vitrain.steps_per_epoch(dataset.n, train_cfg.batch_size)
    eta = []
    prev_a = prev_b = None
    params = inits[0]
    for item_a, item_b in zip(run_a, run_b):
        blocks_a = state_blocks(item_a[2], item_a[3])
        blocks_b = state_blocks(item_b[2], item_b[3])
        if item_a[0] > 0:
            eta.append(expansion_ratio(prev_a, prev_b, blocks_a, blocks_b))
        prev_a, prev_b = blocks_a, blocks_b
        params = item_a[2]
        traj.record(item_a, train_cfg.snapshot_stride, nspe)
    traj.eta = list(eta)
    return np.array(eta), params, traj


def estimate_expansion(dataset, arch, obj_cfg, train_cfg, stream, init_seeds):
    """ Per-step expansion rates of one twin run
    """
    return twin_run(dataset, arch, obj_cfg, train_cfg, stream, init_seeds)[0]


def aggregate_expansion(runs):
    """ Per-step mean plus four (population) standard deviations

    Parameters
    ----------
    runs : list
      Equal-length eta series, at least two

    Returns
    -------
    profile : ExpansionProfile
    """
    if len(runs) < 2:
        msgs.error("Aggregating expansion rates needs at least two runs")
    lengths = set([len(rr) for rr in runs])
    if len(lengths) != 1:
        msgs.error("Expansion series have different lengths: {0}".format(sorted(lengths)))
    arr = np.array([np.asarray(rr, dtype=float) for rr in runs])
    eta = np.mean(arr, axis=0) + 4.*np.std(arr, axis=0)
    return ExpansionProfile(eta, len(runs), runs=arr)


def suffix_products(eta):
    """ prod_{i>t} eta_i for t = 1..T, computed in log space
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.):
        msgs.error("Expansion rates must be positive")
    logs = np.log(eta)
    # Exclusive reverse cumulative sum
    suffix = np.concatenate([np.cumsum(logs[::-1])[::-1][1:], [0.]]) if eta.size > 0 else logs
    return np.exp(suffix)


def param_diff_bound(deltas, profile, alphas, n):
    """ Bound on the expected parameter differences at the end of training

    (1/n) sum_t (prod_{i>t} eta_i) alpha_t E[Delta_t], for each norm flavour.
    The sigma-space norms are bounded by the s-space ones since the sigma map is 1-Lipschitz.

    Parameters
    ----------
    deltas : ndarray or list
      (T, 3) mean delta norms, or a list of DeltaRecord
    profile : ExpansionProfile or ndarray
    alphas : ndarray
      (T,) learning rates
    n : int

    Returns
    -------
    diffs : dict
      Keys 'm_l2', 's_l1', 's_l2'
    """
    if len(deltas) > 0 and isinstance(deltas[0], DeltaRecord):
        deltas = np.array([dd.as_array() for dd in deltas])
    deltas = np.asarray(deltas, dtype=float).reshape(-1, 3)
    eta = profile.eta if isinstance(profile, ExpansionProfile) else np.asarray(profile, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if not (deltas.shape[0] == eta.size == alphas.size):
        msgs.error("Deltas, expansion rates and learning rates must share the length T" + msgs.newline() +
                   "Received {0:d}, {1:d}, {2:d}".format(deltas.shape[0], eta.size, alphas.size))
    weights = suffix_products(eta) * alphas / n
    bound = np.sum(weights[:, None] * deltas, axis=0)
    return dict(zip(norm_flavors, [float(bb) for bb in bound]))


def _check_diffs(diffs):
    for key in norm_flavors:
        if diffs[key] < 0.:
            msgs.error("Parameter difference '{0:s}' must be >= 0".format(key))


def kl_route_bound(diffs, inputs):
    """ Generalisation bound through the KL divergence and Pinsker's inequality

    (2C/sqrt(sigma0)) sqrt(E|dsigma|_1) + (C/sigma0) E|dsigma|_2 + (C/sigma0) E|dm|_2
    """
    _check_diffs(diffs)
    C, s0 = inputs.C, inputs.sigma0
    return float(2.*C/np.sqrt(s0)*np.sqrt(diffs['s_l1']) + C/s0*diffs['s_l2'] + C/s0*diffs['m_l2'])


def w2_route_bound(diffs, inputs):
    """ Generalisation bound through the Wasserstein-2 distance

    K (E|dm|_2 + E|dsigma|_2); without K the bracket alone is returned
    """
    _check_diffs(diffs)
    value = diffs['m_l2'] + diffs['s_l2']
    if inputs.K is not None:
        value *= inputs.K
    return float(value)


def logT_asymptotic_bound(c, L, beta, T, n):
    """ 2 c beta log(T+1) / (n log 2) for the alpha_t = c/((t+2) log(t+2)) schedule

    Parameters
    ----------
    c : float
    L : float
      Lipschitz constant of the gradient; c*L must be < 1
    beta : float
      Bound on the gradient norm
    T : int
    n : int

    Returns
    -------
    bound : float
    """
    for name, val in zip(['c', 'L', 'beta', 'T', 'n'], [c, L, beta, T, n]):
        if val <= 0:
            msgs.error("{0:s} must be positive (received {1})".format(name, val))
    if c*L >= 1.:
        msgs.error("The logT bound needs c*L < 1 (received c*L={0:g})".format(c*L))
    return 2.*c*beta*np.log(T+1.) / (n*np.log(2.))


def stability_from_arrays(deltas, eta, alphas, inputs):
    """ Every stability number of a report, from raw arrays

    Parameters
    ----------
    deltas : ndarray
      (T, 3) mean delta norms
    eta : ndarray
      (T,) aggregated expansion rates
    alphas : ndarray
      (T,)
    inputs : StabilityBoundInputs

    Returns
    -------
    out : dict
      param_diff (dict), kl_route, w2_route
    """
    diffs = param_diff_bound(deltas, eta, alphas, inputs.n)
    return dict(param_diff=diffs, kl_route=kl_route_bound(diffs, inputs),
                w2_route=w2_route_bound(diffs, inputs))


def paired_training_oracle(dataset, index, zbar, arch, obj_cfg, train_cfg, stream, params0=None):
    """ Train on S and on S with one example replaced, sharing the stream and initialisation

    At every step the difference splits as
      [G_Sbar(theta) - G_Sbar(thetabar)] + [G_S(theta) - G_Sbar(theta)],
    so with pair-local rates eta_t = |G_Sbar(theta) - G_Sbar(thetabar)| / |theta - thetabar|
    the recursion bound_t = eta_t bound_{t-1} + |G_S(theta) - G_Sbar(theta)| holds per block.

    Parameters
    ----------
    dataset : Dataset
    index : int
      Position of the replaced example
    zbar : Example
    arch : Architecture
    obj_cfg : ObjectiveConfig
    train_cfg : TrainConfig
      Must use plain SGD
    stream : EpsilonStream
    params0 : VarParams, optional

    Returns
    -------
    out : dict
      measured : final block norms of theta_T - thetabar_T (dict, plus 'joint_l2')
      bound : trial-exact recursion bound (dict)
      eta : (T, 3) pair-local rates
      deltas : (T, 3) norms of grad F(theta, zbar) - grad F(theta, z) on the S trajectory
      in_batch : (T,) whether the replaced index was in the batch
      alphas, batch_sizes : (T,)
    """
    if train_cfg.momentum > 0.:
        msgs.error("The paired-training oracle needs plain SGD (momentum = 0)")
    if train_cfg.augment:
        msgs.error("The paired-training oracle does not support augmentation")
    sbar = vidata.replace_one(dataset, index, zbar)
    z = dataset.example(index)
    if params0 is None:
        params0 = vimodel.init_params(arch, train_cfg.sigma0, train_cfg.init_sigma, stream.init_seed(0))
    theta, thetab = params0.copy(), params0.copy()
    nspe = vitrain.steps_per_epoch(dataset.n, train_cfg.batch_size)
    bound = np.zeros(3)
    etas, deltas, alphas, bsizes, inbatch = [], [], [], [], []
    for t, epoch, pos, idx in stream.batches(dataset.n, train_cfg.batch_size, train_cfg.epochs):
        alpha = vitrain.learning_rate_at(t, train_cfg, nspe)
        noise = stream.step_noise(t, obj_cfg.mc_samples, theta.n_params)
        clip = train_cfg.grad_clip
        g_s = vitrain.batch_gradient(theta, dataset.X[idx], dataset.y[idx], noise, obj_cfg, clip)[0]
        g_sb = vitrain.batch_gradient(theta, sbar.X[idx], sbar.y[idx], noise, obj_cfg, clip)[0]
        g_sbb = vitrain.batch_gradient(thetab, sbar.X[idx], sbar.y[idx], noise, obj_cfg, clip)[0]
        rec = grad_delta(theta, z, zbar, noise, obj_cfg, t=t)
        new = vitrain.sgd_step(theta, g_s, alpha)[0]
        newb = vitrain.sgd_step(thetab, g_sbb, alpha)[0]
        # G_Sbar(theta) - G_Sbar(thetabar) and G_S(theta) - G_Sbar(theta)
        expand = block_norms(-alpha*(g_sb[0]-g_sbb[0]) + (theta.m-thetab.m),
                             -alpha*(g_sb[1]-g_sbb[1]) + (theta.s-thetab.s))
        inject = block_norms(alpha*(g_s[0]-g_sb[0]), alpha*(g_s[1]-g_sb[1]))
        prev = block_norms(theta.m-thetab.m, theta.s-thetab.s)
        eta = np.ones(3)
        for kk in range(3):
            if prev[kk] > 0.:
                eta[kk] = expand[kk] / prev[kk]
                bound[kk] = eta[kk]*bound[kk] + inject[kk]
            else:
                bound[kk] = bound[kk] + expand[kk] + inject[kk]
        etas.append(eta)
        deltas.append(rec.as_array())
        alphas.append(alpha)
        bsizes.append(idx.size)
        inbatch.append(bool(np.any(idx == index)))
        theta, thetab = new, newb
    dm, ds = theta.m-thetab.m, theta.s-thetab.s
    measured = dict(zip(norm_flavors, [float(vv) for vv in block_norms(dm, ds)]))
    measured['joint_l2'] = float(np.sqrt(np.sum(dm**2) + np.sum(ds**2)))
    return dict(measured=measured, bound=dict(zip(norm_flavors, [float(bb) for bb in bound])),
                eta=np.array(etas).reshape(-1, 3), deltas=np.array(deltas).reshape(-1, 3),
                in_batch=np.array(inbatch), alphas=np.array(alphas), batch_sizes=np.array(bsizes))
