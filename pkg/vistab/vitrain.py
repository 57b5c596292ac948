# Module for SGD training of the variational parameters
#  All randomness comes from an EpsilonStream
from __future__ import absolute_import, division, print_function

import json

import numpy as np

from vistab import vimsgs
from vistab import vimodel
from vistab import viobjective
from vistab import vidata

# Logging
msgs = vimsgs.get_logger()

schedule_kinds = ['step_decay', 'logT']

# Sub-seed purposes of the EpsilonStream
PURPOSE_PERMUTATION = 0
PURPOSE_STEP_NOISE = 1
PURPOSE_BATCH_AUGMENT = 2
PURPOSE_PAIR_AUGMENT = 3
PURPOSE_INIT = 4
PURPOSE_EVAL = 5


class EpsilonStream(object):
    """Deterministic source of every random draw of a training run

    Each draw is taken from its own generator, seeded by
    SeedSequence([master_seed, purpose, key...]), so draws never depend on
    how many other draws were made before them.

    Parameters:
    ----------
    master_seed: int
       Non-negative seed of the run
    """
    def __init__(self, master_seed):
        if master_seed < 0:
            msgs.error("The master seed must be non-negative (received {0})".format(master_seed))
        self.master_seed = int(master_seed)

    def generator(self, purpose, *keys):
        seq = np.random.SeedSequence([self.master_seed, purpose] + [int(kk) for kk in keys])
        return np.random.default_rng(seq)

    def permutation(self, epoch, n):
        """ Random order of the n training examples in a given epoch (0-indexed)
        """
        return self.generator(PURPOSE_PERMUTATION, epoch).permutation(n)

    def batches(self, n, batch_size, epochs):
        """ Yield (t, epoch, position, indices); t counts steps from 1

        Every epoch is a fresh permutation cut into consecutive batches;
        the last batch keeps the n mod batch_size leftovers.
        """
        t = 0
        for epoch in range(epochs):
            perm = self.permutation(epoch, n)
            for pos, start in enumerate(range(0, n, batch_size)):
                t += 1
                yield t, epoch, pos, perm[start:start+batch_size]

    def step_noise(self, t, mc_samples, n_params):
        """ Reparameterisation draws of step t, shape (mc_samples, n_params)
        """
        return self.generator(PURPOSE_STEP_NOISE, t).standard_normal((mc_samples, n_params))

    def batch_augmentation(self, t, size, feature_dim, jitter_scale, flip_prob):
        return vidata.draw_augmentation(self.generator(PURPOSE_BATCH_AUGMENT, t), feature_dim,
                                        jitter_scale, flip_prob, size=size)

    def pair_augmentation(self, t, pair, feature_dim, jitter_scale, flip_prob):
        """ One augmentation draw shared by both members of a (z, zbar) pair
        """
        return vidata.draw_augmentation(self.generator(PURPOSE_PAIR_AUGMENT, t, pair), feature_dim,
                                        jitter_scale, flip_prob)

    def init_seed(self, index=0):
        return np.random.SeedSequence([self.master_seed, PURPOSE_INIT, index])

    def eval_seed(self, index=0):
        """ Seed of the posterior draws used to evaluate losses
        """
        return np.random.SeedSequence([self.master_seed, PURPOSE_EVAL, index])

    def __repr__(self):
        return "<EpsilonStream: seed={0:d}>".format(self.master_seed)


class StepRandomness(object):
    """ The draws used at one step: reparameterisation noise and batch augmentation
    """
    def __init__(self, t, noise, augmentation=None):
        self.t = t
        self.noise = noise
        self.augmentation = augmentation


class TrainConfig(object):
    """SGD settings

    Parameters:
    ----------
    learning_rate: float
       Initial learning rate (step_decay) ; ignored by the logT schedule
    momentum: float
       In [0, 1); 0 is plain SGD
    lr_decay_factor: float
       In (0, 1]
    lr_decay_every_epochs: int
    batch_size: int
    epochs: int
    schedule_kind: str
       'step_decay' or 'logT', the latter being alpha_t = c/((t+2) log(t+2))
    logt_c: float
       c of the logT schedule
    grad_clip: float or None
       Clip every per-example gradient to this norm before averaging
    snapshot_stride: int
       Store (m, s) every this many steps; 0 stores nothing
    augment: bool
    jitter_scale: float
    flip_prob: float
    sigma0: float
    init_sigma: float
    """
    def __init__(self, learning_rate=0.005, momentum=0.99, lr_decay_factor=0.9, lr_decay_every_epochs=5,
                 batch_size=100, epochs=20, schedule_kind='step_decay', logt_c=0.1, grad_clip=None,
                 snapshot_stride=0, augment=False, jitter_scale=0.1, flip_prob=0.0,
                 sigma0=0.01, init_sigma=0.05):
        if learning_rate <= 0.:
            msgs.error("The learning rate must be positive")
        if momentum < 0. or momentum >= 1.:
            msgs.error("Momentum must be in [0, 1)")
        if lr_decay_factor <= 0. or lr_decay_factor > 1.:
            msgs.error("The learning-rate decay factor must be in (0, 1]")
        if lr_decay_every_epochs < 1:
            msgs.error("lr_decay_every_epochs must be >= 1")
        if batch_size < 1:
            msgs.error("The batch size must be >= 1")
        if epochs < 0:
            msgs.error("The number of epochs must be >= 0")
        if schedule_kind not in schedule_kinds:
            msgs.error("Unknown schedule '{0}'".format(schedule_kind) + msgs.newline() +
                       "Choose one of: " + ", ".join(schedule_kinds))
        if logt_c <= 0.:
            msgs.error("logt_c must be positive")
        if grad_clip is not None and grad_clip <= 0.:
            msgs.error("grad_clip must be positive or None")
        if init_sigma <= sigma0:
            msgs.error("init_sigma must exceed sigma0")
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.lr_decay_factor = float(lr_decay_factor)
        self.lr_decay_every_epochs = int(lr_decay_every_epochs)
        self.batch_size = int(batch_size)
        self.epochs = int(epochs)
        self.schedule_kind = schedule_kind
        self.logt_c = float(logt_c)
        self.grad_clip = None if grad_clip is None else float(grad_clip)
        self.snapshot_stride = int(snapshot_stride)
        self.augment = bool(augment)
        self.jitter_scale = float(jitter_scale)
        self.flip_prob = float(flip_prob)
        self.sigma0 = float(sigma0)
        self.init_sigma = float(init_sigma)

    def copy(self, **kwargs):
        """ Copy with some settings changed
        """
        keys = ['learning_rate', 'momentum', 'lr_decay_factor', 'lr_decay_every_epochs', 'batch_size',
                'epochs', 'schedule_kind', 'logt_c', 'grad_clip', 'snapshot_stride', 'augment',
                'jitter_scale', 'flip_prob', 'sigma0', 'init_sigma']
        pars = dict([(key, getattr(self, key)) for key in keys])
        pars.update(kwargs)
        return TrainConfig(**pars)


class MomentumState(object):
    """ Heavy-ball velocities of both parameter blocks
    """
    def __init__(self, momentum, vm, vs):
        self.momentum = float(momentum)
        self.vm = np.asarray(vm, dtype=float)
        self.vs = np.asarray(vs, dtype=float)

    @classmethod
    def zeros(cls, momentum, n_params):
        return cls(momentum, np.zeros(n_params), np.zeros(n_params))


class Trajectory(object):
    """Per-step record of a training run

    Attributes:
    ----------
    t: list
       Step indices, from 1
    alpha: list
       Learning rate used at each step
    epoch, batch: list
       Epoch and position within the epoch of each step's batch
    batch_size: list
    objective: list
       Batch objective at the pre-update state
    eta: list
       Expansion rates, filled by the stability measurement
    snapshots: dict
       t -> (m, s), including t=0, when a stride is set
    epoch_ends: dict
       Completed epochs -> VarParams at the end of that epoch
    """
    def __init__(self):
        self.t = []
        self.alpha = []
        self.epoch = []
        self.batch = []
        self.batch_size = []
        self.objective = []
        self.eta = []
        self.snapshots = dict()
        self.epoch_ends = dict()

    @property
    def n_steps(self):
        return len(self.t)

    def record(self, item, stride=0, n_steps_epoch=None):
        """ Append one item yielded by iterate_training

        With n_steps_epoch the parameters closing every epoch are kept.
        """
        t, alpha, params, mstate, info = item
        if stride > 0 and t % stride == 0:
            self.snapshots[t] = (params.m.copy(), params.s.copy())
        if t == 0:
            return
        if n_steps_epoch is not None and t % n_steps_epoch == 0:
            self.epoch_ends[t // n_steps_epoch] = params.copy()
        epoch, pos, bsize, value = info
        self.t.append(t)
        self.alpha.append(alpha)
        self.epoch.append(epoch)
        self.batch.append(pos)
        self.batch_size.append(bsize)
        self.objective.append(value)

    def records(self):
        """ One dict per step
        """
        recs = []
        for ii in range(self.n_steps):
            rec = dict(t=self.t[ii], alpha=self.alpha[ii], epoch=self.epoch[ii], batch=self.batch[ii],
                       batch_size=self.batch_size[ii], objective=self.objective[ii])
            if ii < len(self.eta):
                rec['eta'] = self.eta[ii]
            recs.append(rec)
        return recs

    def to_json_lines(self, path):
        """ Write one JSON object per step
        """
        with open(path, 'w') as f:
            for rec in self.records():
                f.write(json.dumps(rec, sort_keys=True) + '\n')

    def __repr__(self):
        return "<Trajectory: {0:d} steps>".format(self.n_steps)


def steps_per_epoch(n, batch_size):
    return int(np.ceil(n / batch_size))


def learning_rate_at(t, cfg, n_steps_epoch):
    """ Learning rate of step t (t counts from 1)

    Parameters
    ----------
    t : int
    cfg : TrainConfig
    n_steps_epoch : int

    Returns
    -------
    alpha : float
    """
    if cfg.schedule_kind == 'logT':
        return cfg.logt_c / ((t+2.) * np.log(t+2.))
    epoch = (t-1) // n_steps_epoch
    return cfg.learning_rate * cfg.lr_decay_factor**(epoch // cfg.lr_decay_every_epochs)


def sgd_step(params, grad, alpha, momentum_state=None):
    """ One SGD update of (m, s)

    Plain: theta' = theta - alpha g.  Momentum: v' = mu v + g, theta' = theta - alpha v'.

    Parameters
    ----------
    params : VarParams
    grad : tuple
      (gm, gs)
    alpha : float
    momentum_state : MomentumState, optional

    Returns
    -------
    params : VarParams
    momentum_state : MomentumState or None
    """
    gm, gs = grad
    if np.shape(gm) != params.m.shape or np.shape(gs) != params.s.shape:
        msgs.error("Gradient dimension does not match the parameters ({0:d})".format(params.n_params))
    if momentum_state is None:
        return vimodel.VarParams(params.m - alpha*gm, params.s - alpha*gs, params.sigma0), None
    vm = momentum_state.momentum * momentum_state.vm + gm
    vs = momentum_state.momentum * momentum_state.vs + gs
    newpar = vimodel.VarParams(params.m - alpha*vm, params.s - alpha*vs, params.sigma0)
    return newpar, MomentumState(momentum_state.momentum, vm, vs)


def clip_rows(gm, gs, max_norm):
    """ Scale every per-example (gm, gs) row to a joint norm of at most max_norm
    """
    norms = np.sqrt(np.sum(gm**2, axis=1) + np.sum(gs**2, axis=1))
    scale = np.minimum(1., max_norm / np.maximum(norms, 1e-300))
    return gm * scale[:, None], gs * scale[:, None]


def batch_gradient(params, X, y, noise, obj_cfg, grad_clip=None):
    """ Batch-mean gradient, optionally after per-example clipping

    Returns
    -------
    grad : tuple
      (gm, gs)
    value : float
      Batch objective
    """
    gm, gs, values = viobjective.per_example_grads(params, X, y, noise, obj_cfg, return_values=True)
    if grad_clip is not None:
        gm, gs = clip_rows(gm, gs, grad_clip)
    return (np.mean(gm, axis=0), np.mean(gs, axis=0)), float(np.mean(values))


def iterate_training(dataset, arch, obj_cfg, train_cfg, stream, params0=None, hooks=None):
    """ Generator over the SGD steps of one run

    Yields (t, alpha, params, momentum_state, info) after each update, info being
    (epoch, position, batch size, batch objective). The first item is the
    initialisation, with t=0 and alpha and info set to None.
    """
    if dataset.n < 1:
        msgs.error("Cannot train on an empty dataset")
    if train_cfg.batch_size > dataset.n:
        msgs.error("The batch size ({0:d}) exceeds the dataset size ({1:d})".format(
            train_cfg.batch_size, dataset.n))
    if hooks is None:
        hooks = []
    if params0 is None:
        params = vimodel.init_params(arch, train_cfg.sigma0, train_cfg.init_sigma, stream.init_seed(0))
    else:
        params = params0.copy()
    if params.n_params != arch.n_params:
        msgs.error("Initial parameters have length {0:d}; the architecture needs {1:d}".format(
            params.n_params, arch.n_params))
    if train_cfg.momentum > 0.:
        mstate = MomentumState.zeros(train_cfg.momentum, params.n_params)
    else:
        mstate = None
    yield 0, None, params, mstate, None
    nspe = steps_per_epoch(dataset.n, train_cfg.batch_size)
    for t, epoch, pos, idx in stream.batches(dataset.n, train_cfg.batch_size, train_cfg.epochs):
        alpha = learning_rate_at(t, train_cfg, nspe)
        noise = stream.step_noise(t, obj_cfg.mc_samples, params.n_params)
        X = dataset.X[idx]
        draw = None
        if train_cfg.augment:
            draw = stream.batch_augmentation(t, idx.size, dataset.feature_dim,
                                             train_cfg.jitter_scale, train_cfg.flip_prob)
            X = vidata.augment_batch(X, draw)
        eps = StepRandomness(t, noise, draw)
        for hook in hooks:
            hook(t, params, idx, eps)
        grad, value = batch_gradient(params, X, dataset.y[idx], noise, obj_cfg,
                                     grad_clip=train_cfg.grad_clip)
        if not (np.isfinite(value) and np.all(np.isfinite(grad[0])) and np.all(np.isfinite(grad[1]))):
            msgs.error("Training diverged at step {0:d}: non-finite objective or gradient".format(t))
        params, mstate = sgd_step(params, grad, alpha, mstate)
        if not (np.all(np.isfinite(params.m)) and np.all(np.isfinite(params.s))):
            msgs.error("Training diverged at step {0:d}: non-finite parameters".format(t))
        yield t, alpha, params, mstate, (epoch, pos, idx.size, value)


def train(dataset, arch, obj_cfg, train_cfg, stream, hooks=None, params0=None):
    """ Run SGD on the objective

    Parameters
    ----------
    dataset : Dataset
    arch : Architecture
    obj_cfg : ObjectiveConfig
    train_cfg : TrainConfig
    stream : EpsilonStream
    hooks : list, optional
      Callables hook(t, params_pre, batch_indices, eps) invoked before each update
    params0 : VarParams, optional
      Initialisation; drawn from the stream when None

    Returns
    -------
    params : VarParams
    trajectory : Trajectory
    """
    traj = Trajectory()
    params = None
    nspe = steps_per_epoch(dataset.n, train_cfg.batch_size)
    for item in iterate_training(dataset, arch, obj_cfg, train_cfg, stream, params0=params0, hooks=hooks):
        params = item[2]
        traj.record(item, train_cfg.snapshot_stride, nspe)
    msgs.info("Trained {0:d} steps on {1:d} examples".format(traj.n_steps, dataset.n))
    return params, traj


def posterior_loss(params, dataset, loss, n_eval_samples, seed, arch):
    """ Monte-Carlo estimate of E_{w~Q} of the dataset-average loss

    Parameters
    ----------
    params : VarParams
    dataset : Dataset
    loss : str
      'zero_one' or 'nll'
    n_eval_samples : int
    seed : int or SeedSequence
    arch : Architecture

    Returns
    -------
    value : float
    """
    if dataset.n < 1:
        msgs.error("Cannot evaluate a loss on an empty dataset")
    if n_eval_samples < 1:
        msgs.error("n_eval_samples must be >= 1")
    if loss == 'zero_one':
        lfunc = vimodel.zero_one_batch
    elif loss == 'nll':
        lfunc = vimodel.nll_batch
    else:
        msgs.error("Unknown loss '{0}'; choose zero_one or nll".format(loss))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n_eval_samples, params.n_params))
    weights = vimodel.sample_weights(params, noise)
    return float(np.mean([np.mean(lfunc(ww, dataset.X, dataset.y, arch)) for ww in weights]))
