# Module orchestrating the experiments: expansion, bound, compare, pacbayes, counterexamples
#  Every command reads the published settings (viparse.argflag)
from __future__ import absolute_import, division, print_function

import os

import numpy as np

from vistab import vimsgs
from vistab import viparse
from vistab import vimodel
from vistab import viobjective
from vistab import vitrain
from vistab import vistable
from vistab import vipacbayes
from vistab import vicounter
from vistab import vidata
from vistab import visave

# Logging
msgs = vimsgs.get_logger()

commands = ['expansion', 'bound', 'compare', 'pacbayes', 'counterexamples']

# Sub-seed purpose of the pair sampling (the EpsilonStream uses 0-5)
PURPOSE_PAIRS = 6

# Headline values of the counterexamples and their tolerances
chain_joint_expected = 0.173
chain_marginal_expected = 0.081
chain_tolerance = 1e-3
extreme_kl_threshold = 1e3

# Columns of the loss summaries and of the PAC-Bayes summaries
losses_names = ['train_zero_one', 'test_zero_one', 'train_nll', 'test_nll']
pac_bayes_keys = ['kl', 'germain', 'mcallester', 'union']


class BoundReport(object):
    """Summary of one condition

    Parameters:
    ----------
    label: str
       Condition label, e.g. 'elbo_aug1_noise0.5'
    condition: dict
       objective, augment, label_noise
    losses: dict
       Train and test losses (zero_one, nll) averaged over runs
    stability: dict
       param_diff, kl_route, w2_route
    pac_bayes: dict
       One entry per prior choice
    expansion: dict
       Summary of the expansion profile
    inputs: dict
       Constants of the route bounds and the trace shapes
    flags: dict
    warnings: list
    epochs: dict
       Column name -> one value per completed epoch (see epoch_series)
    """
    def __init__(self, label, condition, losses, stability, pac_bayes, expansion, inputs,
                 flags=None, warnings=None, epochs=None):
        self.label = label
        self.condition = condition
        self.losses = losses
        self.stability = stability
        self.pac_bayes = pac_bayes
        self.expansion = expansion
        self.inputs = inputs
        self.flags = dict() if flags is None else flags
        self.warnings = [] if warnings is None else warnings
        self.epochs = dict() if epochs is None else epochs
        self.check()

    @property
    def gap_zero_one(self):
        return abs(self.losses['test_zero_one'] - self.losses['train_zero_one'])

    @property
    def gap_nll(self):
        return abs(self.losses['test_nll'] - self.losses['train_nll'])

    def check(self):
        for key in ['kl_route', 'w2_route']:
            if self.stability[key] < 0.:
                msgs.error("Stability bound {0:s} of {1:s} is negative".format(key, self.label))
            if not np.isfinite(self.stability[key]):
                msgs.warn("Stability bound {0:s} of {1:s} is not finite".format(key, self.label))
        for key, val in self.losses.items():
            if not np.isfinite(val):
                msgs.error("Loss {0:s} of {1:s} is not finite".format(key, self.label))
        if self.gap_zero_one > 1.:
            msgs.error("The 0-1 generalization gap of {0:s} exceeds 1".format(self.label))

    def as_dict(self):
        losses = dict(self.losses)
        losses['gap_zero_one'] = self.gap_zero_one
        losses['gap_nll'] = self.gap_nll
        return visave.jsonify(dict(label=self.label, condition=self.condition, losses=losses,
                                   stability=self.stability, pac_bayes=self.pac_bayes,
                                   expansion=self.expansion, inputs=self.inputs, flags=self.flags,
                                   warnings=self.warnings, epochs=self.epochs))

    def __repr__(self):
        return "<BoundReport: {0:s}>".format(self.label)


class ConditionResult(object):
    """ A report together with the raw traces it was computed from
    """
    def __init__(self, report, norms, profile, alphas, trajectory=None):
        self.report = report
        self.norms = norms
        self.profile = profile
        self.alphas = alphas
        self.trajectory = trajectory

    @property
    def label(self):
        return self.report.label


def _settings(argflag):
    if argflag is None:
        argflag = viparse.argflag
    if argflag is None:
        msgs.error("Settings have not been initialised")
    return argflag


def condition_label(objective, augment, label_noise, prefix=None):
    label = "{0:s}_aug{1:d}_noise{2:g}".format(objective, int(augment), label_noise)
    if prefix is not None:
        label = prefix + '_' + label
    return label


def conditions(argflag=None):
    """ (objective, augment, label_noise) of every condition, augmentation outermost
    """
    argflag = _settings(argflag)
    return [(argflag['objective'], aug, noise) for aug in argflag['augment'] for noise in argflag['label_noise']]


def load_data(argflag=None):
    """ Training and test sets, generated or read from disk

    Returns
    -------
    train : Dataset
    test : Dataset
    """
    argflag = _settings(argflag)
    if argflag['data_source'] == 'blobs':
        full = vidata.gen_blobs(argflag['n_train']+argflag['n_test'], argflag['classes'],
                                argflag['feature_dim'], argflag['spread'], argflag['data_seed'],
                                radius=argflag['blob_radius'])
        return vidata.split(full, argflag['n_train'])
    train = vidata.load_csv(argflag['data_train_file'], class_count=argflag['classes'])
    test = vidata.load_csv(argflag['data_test_file'], class_count=argflag['classes'])
    if train.feature_dim != test.feature_dim:
        msgs.error("Training and test files have {0:d} and {1:d} features".format(
            train.feature_dim, test.feature_dim))
    if argflag['batch_size'] > train.n:
        msgs.error("'batch_size' ({0:d}) exceeds the {1:d} training examples".format(
            argflag['batch_size'], train.n))
    return train, test


def build_arch(argflag, feature_dim, class_count):
    return vimodel.Architecture([feature_dim] + list(argflag['hidden']) + [class_count],
                                activation=argflag['activation'], bias=argflag['bias'])


def make_obj_cfg(argflag, kind, arch, n):
    """ The objective of a condition; DLM uses its own number of draws
    """
    mc = argflag['mc_samples_dlm'] if kind == 'dlm' else argflag['mc_samples']
    prior = viobjective.isotropic_prior(arch, argflag['prior_std'])
    return viobjective.ObjectiveConfig(kind, argflag['kl_coeff'], n, mc, prior, arch)


def make_train_cfg(argflag, augment):
    return vitrain.TrainConfig(learning_rate=argflag['lr'], momentum=argflag['momentum'],
                               lr_decay_factor=argflag['lr_decay'],
                               lr_decay_every_epochs=argflag['lr_decay_every'],
                               batch_size=argflag['batch_size'], epochs=argflag['epochs'],
                               schedule_kind=argflag['schedule'], logt_c=argflag['logt_c'],
                               grad_clip=argflag['grad_clip'], snapshot_stride=argflag['snapshot_stride'],
                               augment=augment, jitter_scale=argflag['jitter_scale'],
                               flip_prob=argflag['flip_prob'], sigma0=argflag['sigma0'],
                               init_sigma=argflag['init_sigma'])


def make_pac_cfg(argflag, prior_choice):
    return vipacbayes.PacBayesConfig(delta=argflag['delta'], C=argflag['loss_bound'], prior_choice=prior_choice,
                                     union_b=argflag['union_b'], union_c=argflag['union_c'])


def sample_pairs(train, test, count, seed):
    """ count (z, zbar) pairs, z from the training set and zbar from the test set

    Parameters
    ----------
    train : Dataset
    test : Dataset
    count : int
    seed : int

    Returns
    -------
    pairs : list
    """
    if count == 0:
        return []
    rng = np.random.default_rng(np.random.SeedSequence([seed, PURPOSE_PAIRS]))
    iz = rng.choice(train.n, size=count, replace=count > train.n)
    izb = rng.choice(test.n, size=count, replace=count > test.n)
    return [(train.example(ii), test.example(jj)) for ii, jj in zip(iz, izb)]


def mean_deltas(norms):
    """ Average (runs, T, pairs, 3) delta norms over pairs, then over runs
    """
    norms = np.asarray(norms, dtype=float)
    if norms.ndim != 4:
        msgs.error("Delta traces must have shape (runs, T, pairs, 3)")
    return np.mean([vistable.mean_delta_records(nn) for nn in norms], axis=0).reshape(-1, 3)


def load_expansion(path, n_steps):
    """ Read an expansion profile written by the expansion command
    """
    if not os.path.isfile(path):
        msgs.error("Expansion profile does not exist:" + msgs.newline() + path)
    alphas, eta, runs = visave.load_step_trace(path)
    if eta.size != n_steps:
        msgs.error("Expansion profile has {0:d} steps; training runs {1:d}".format(eta.size, n_steps))
    nrun = 0 if runs is None else runs.shape[0]
    return vistable.ExpansionProfile(eta, nrun, aggregation='file', runs=runs)


def reaggregate(path):
    """ Re-aggregate the per-run series stored in a step trace
    """
    runs = visave.load_step_trace(path)[2]
    if runs is None:
        msgs.error("Step trace holds no per-run series:" + msgs.newline() + path)
    return vistable.aggregate_expansion(list(runs))


def expansion_summary(profile, source):
    cum = profile.cumulative
    return dict(source=source, aggregation=profile.aggregation, n_runs=profile.n_runs,
                n_steps=profile.n_steps,
                mean_eta=float(np.mean(profile.eta)) if profile.n_steps > 0 else 1.,
                max_eta=float(np.max(profile.eta)) if profile.n_steps > 0 else 1.,
                cumulative_final=float(cum[-1]) if profile.n_steps > 0 else 1.)


def pac_bayes_summary(finals, inits, prior, argflag, n):
    """ Comparator bounds under both prior choices, averaged over runs
    """
    out = dict()
    for choice in vipacbayes.prior_choices:
        cfg = make_pac_cfg(argflag, choice)
        vals = []
        for final, init in zip(finals, inits):
            ref = prior if choice == 'objective_prior' else init.posterior()
            vals.append(vipacbayes.pac_bayes_bounds(final.posterior(), ref, cfg, n))
        summ = dict([(key, float(np.mean([vv[key] for vv in vals]))) for key in pac_bayes_keys])
        summ['union_j'] = [vv['union_j'] for vv in vals]
        out[choice] = summ
    return out


def epoch_series(argflag, ends, inits, prior, ds, test, deltas, eta, alphas, inputs):
    """ Bounds and losses at the end of every epoch, averaged over runs

    The stability bounds of epoch e use the first e epochs of deltas, rates and
    learning rates, so the last epoch reproduces the final report.

    Parameters
    ----------
    argflag : dict
    ends : list
      Per run, the epoch_ends dict of its trajectory
    inits : list
      Initial VarParams of every run
    prior : DiagGaussian
    ds : Dataset
      Training set (after label noise)
    test : Dataset
    deltas : ndarray
      (T, 3) mean delta norms
    eta : ndarray
    alphas : ndarray
    inputs : StabilityBoundInputs

    Returns
    -------
    columns : dict
      epoch, t, kl_route, w2_route, the four losses, their gaps and
      <kl|germain|mcallester|union>_<prior choice>
    """
    nspe = vitrain.steps_per_epoch(ds.n, argflag['batch_size'])
    arch = build_arch(argflag, ds.feature_dim, ds.class_count)
    seeds = [vitrain.EpsilonStream(seed).eval_seed() for seed in argflag['seeds']]
    names = ['epoch', 't', 'kl_route', 'w2_route'] + losses_names + ['gap_zero_one', 'gap_nll']
    names += ['{0:s}_{1:s}'.format(key, choice) for choice in vipacbayes.prior_choices
              for key in pac_bayes_keys]
    columns = dict([(name, []) for name in names])
    for epoch in sorted(ends[0].keys()):
        tend = epoch*nspe
        stab = vistable.stability_from_arrays(deltas[:tend], eta[:tend], alphas[:tend], inputs)
        params = [ee[epoch] for ee in ends]
        row = dict(epoch=epoch, t=tend, kl_route=stab['kl_route'], w2_route=stab['w2_route'])
        for loss in ['zero_one', 'nll']:
            for name, data in [('train_', ds), ('test_', test)]:
                row[name+loss] = float(np.mean([vitrain.posterior_loss(pp, data, loss, argflag['eval_samples'],
                                                                       ss, arch)
                                                for pp, ss in zip(params, seeds)]))
            row['gap_'+loss] = abs(row['test_'+loss] - row['train_'+loss])
        pac = pac_bayes_summary(params, inits, prior, argflag, ds.n)
        for choice in vipacbayes.prior_choices:
            for key in pac_bayes_keys:
                row['{0:s}_{1:s}'.format(key, choice)] = pac[choice][key]
        for name in names:
            columns[name].append(row[name])
    return columns


def run_condition(argflag, train, test, objective, augment, label_noise, prefix=None):
    """ Train every run of one condition and assemble its report

    Each run trains two initialisations on the same EpsilonStream; the first twin carries
    the delta monitor and provides the losses and final posterior.

    Parameters
    ----------
    argflag : dict
    train : Dataset
    test : Dataset
    objective : str
    augment : bool
    label_noise : float
    prefix : str, optional
      Prepended to the condition label

    Returns
    -------
    result : ConditionResult
    """
    label = condition_label(objective, augment, label_noise, prefix=prefix)
    msgs.info("Condition " + label)
    warnings = []
    ds = vidata.corrupt_labels(train, label_noise, argflag['data_seed'])
    arch = build_arch(argflag, ds.feature_dim, ds.class_count)
    obj_cfg = make_obj_cfg(argflag, objective, arch, ds.n)
    tcfg = make_train_cfg(argflag, augment)
    if argflag['pair_count'] == 0:
        warnings.append("No (z, zbar) pairs were sampled; the stability bounds are 0")
        msgs.warn(warnings[-1])
    etas, norms, finals, inits, ends = [], [], [], [], []
    losses = dict([(key, []) for key in losses_names])
    trajectory, alphas = None, None
    for rr, seed in enumerate(argflag['seeds']):
        msgs.info("Run {0:d}/{1:d} (seed {2:d})".format(rr+1, len(argflag['seeds']), seed))
        stream = vitrain.EpsilonStream(seed)
        monitor = vistable.DeltaMonitor(sample_pairs(ds, test, argflag['pair_count'], seed), obj_cfg, stream, tcfg)
        eta, params, traj = vistable.twin_run(ds, arch, obj_cfg, tcfg, stream, (0, 1), hooks=[monitor])
        if msgs._debug['expansion']:
            msgs.info("Largest expansion rate of the run: {0:g}".format(np.max(eta) if eta.size > 0 else 1.))
        etas.append(eta)
        norms.append(monitor.norms)
        finals.append(params)
        ends.append(traj.epoch_ends)
        inits.append(vimodel.init_params(arch, tcfg.sigma0, tcfg.init_sigma, stream.init_seed(0)))
        for loss in ['zero_one', 'nll']:
            losses['train_'+loss].append(vitrain.posterior_loss(params, ds, loss, argflag['eval_samples'],
                                                                stream.eval_seed(), arch))
            losses['test_'+loss].append(vitrain.posterior_loss(params, test, loss, argflag['eval_samples'],
                                                               stream.eval_seed(), arch))
        if rr == 0:
            trajectory = traj
            alphas = np.asarray(traj.alpha, dtype=float)
    norms = np.array(norms)
    nstep = alphas.size
    if argflag['expansion_file'] is None:
        profile = vistable.aggregate_expansion(etas)
        source = 'twin_runs'
    else:
        profile = load_expansion(argflag['expansion_file'], nstep)
        source = argflag['expansion_file']
    trajectory.eta = list(profile.eta)
    inputs = vistable.StabilityBoundInputs(argflag['sigma0'], ds.n, C=argflag['loss_bound'], K=argflag['lipschitz'])
    stab = vistable.stability_from_arrays(mean_deltas(norms), profile.eta, alphas, inputs)
    epochs = epoch_series(argflag, ends, inits, obj_cfg.prior, ds, test, mean_deltas(norms), profile.eta, alphas,
                          inputs)
    flags = dict(momentum_caveat=tcfg.momentum > 0., w2_with_K=inputs.K is not None,
                 sigma_bounded_by_s=True)
    if tcfg.momentum > 0.:
        warnings.append("Momentum is used: expansion rates are measured on the (parameter, velocity) state")
    report = BoundReport(label, dict(objective=objective, augment=bool(augment), label_noise=float(label_noise)),
                         dict([(key, float(np.mean(val))) for key, val in losses.items()]),
                         stab, pac_bayes_summary(finals, inits, obj_cfg.prior, argflag, ds.n),
                         expansion_summary(profile, source),
                         dict(sigma0=inputs.sigma0, n=inputs.n, C=inputs.C, K=inputs.K,
                              n_runs=norms.shape[0], n_steps=nstep, n_pairs=argflag['pair_count']),
                         flags=flags, warnings=warnings, epochs=epochs)
    return ConditionResult(report, norms, profile, alphas, trajectory=trajectory)


def trace_paths(outdir, label):
    """ Paths of the delta, step and epoch traces, trajectory and snapshots of a condition
    """
    return dict(deltas=os.path.join(outdir, 'deltas_{0:s}.csv'.format(label)),
                epochs=os.path.join(outdir, 'epochs_{0:s}.csv'.format(label)),
                steps=os.path.join(outdir, 'steps_{0:s}.csv'.format(label)),
                trajectory=os.path.join(outdir, 'trajectory_{0:s}.jsonl'.format(label)),
                snapshots=os.path.join(outdir, 'snapshots_{0:s}.h5'.format(label)))


def save_condition(result, argflag):
    paths = trace_paths(argflag['outdir'], result.label)
    visave.save_delta_trace(paths['deltas'], result.norms)
    visave.save_step_trace(paths['steps'], result.alphas, result.profile)
    visave.save_epoch_trace(paths['epochs'], result.report.epochs)
    result.trajectory.to_json_lines(paths['trajectory'])
    if argflag['save_snapshots']:
        if len(result.trajectory.snapshots) == 0:
            msgs.warn("save_snapshots is set but snapshot_stride is 0; no snapshots written")
        else:
            visave.save_snapshots_hdf5(paths['snapshots'], result.trajectory.snapshots)


def cmd_expansion(argflag=None):
    """ Estimate the expansion profile of every condition

    Returns
    -------
    profiles : dict
      label -> ExpansionProfile
    """
    argflag = _settings(argflag)
    visave.make_outdir(argflag['outdir'])
    train, test = load_data(argflag)
    profiles = dict()
    for objective, augment, noise in conditions(argflag):
        label = condition_label(objective, augment, noise)
        ds = vidata.corrupt_labels(train, noise, argflag['data_seed'])
        arch = build_arch(argflag, ds.feature_dim, ds.class_count)
        obj_cfg = make_obj_cfg(argflag, objective, arch, ds.n)
        tcfg = make_train_cfg(argflag, augment)
        runs, alphas = [], None
        for seed in argflag['seeds']:
            eta, params, traj = vistable.twin_run(ds, arch, obj_cfg, tcfg, vitrain.EpsilonStream(seed), (0, 1))
            runs.append(eta)
            alphas = traj.alpha
        profile = vistable.aggregate_expansion(runs)
        visave.save_step_trace(os.path.join(argflag['outdir'], 'expansion_{0:s}.csv'.format(label)),
                               alphas, profile)
        profiles[label] = profile
    return profiles


def cmd_bound(argflag=None):
    """ Bound reports of every condition, with their raw traces

    Returns
    -------
    reports : list
      One dict per condition
    """
    argflag = _settings(argflag)
    visave.make_outdir(argflag['outdir'])
    train, test = load_data(argflag)
    docs = []
    for objective, augment, noise in conditions(argflag):
        result = run_condition(argflag, train, test, objective, augment, noise)
        save_condition(result, argflag)
        docs.append(result.report.as_dict())
    visave.save_yaml(os.path.join(argflag['outdir'], 'bound.yaml'), docs)
    return docs


# Quantities compared side by side, smaller being better
compare_keys = [('losses', 'train_nll'), ('losses', 'test_nll'), ('losses', 'gap_nll'),
                ('losses', 'train_zero_one'), ('losses', 'test_zero_one'), ('losses', 'gap_zero_one'),
                ('stability', 'kl_route'), ('stability', 'w2_route'),
                ('pac_bayes', 'objective_prior', 'germain'), ('pac_bayes', 'objective_prior', 'mcallester'),
                ('pac_bayes', 'objective_prior', 'union'), ('pac_bayes', 'initialization_q0', 'germain'),
                ('pac_bayes', 'initialization_q0', 'mcallester'), ('pac_bayes', 'initialization_q0', 'union')]


def _lookup(doc, path):
    for key in path:
        doc = doc[key]
    return doc


def ordering(doc_a, doc_b):
    """ Side-by-side values of two reports

    Returns
    -------
    rows : list
      (quantity, first, second, smaller) with smaller in {'first', 'second', 'tie'}
    """
    rows = []
    for path in compare_keys:
        va, vb = float(_lookup(doc_a, path)), float(_lookup(doc_b, path))
        smaller = 'tie' if va == vb else ('first' if va < vb else 'second')
        rows.append(('.'.join(path), va, vb, smaller))
    return rows


def cmd_compare(argflag=None):
    """ Compare two objectives on one condition

    Returns
    -------
    docs : list
      The two reports and an ordering summary
    """
    argflag = _settings(argflag)
    visave.make_outdir(argflag['outdir'])
    train, test = load_data(argflag)
    docs = []
    for ii, objective in enumerate(argflag['compare_objectives']):
        result = run_condition(argflag, train, test, objective, argflag['compare_augment'],
                               argflag['compare_label_noise'], prefix='cmp{0:d}'.format(ii))
        save_condition(result, argflag)
        docs.append(result.report.as_dict())
    rows = ordering(docs[0], docs[1])
    visave.write_table(os.path.join(argflag['outdir'], 'compare.csv'),
                       [np.array([rr[kk] for rr in rows]) for kk in range(4)],
                       ['quantity', 'first', 'second', 'smaller'])
    summary = dict(label='ordering', first=docs[0]['label'], second=docs[1]['label'],
                   smaller=dict([(rr[0], rr[3]) for rr in rows]))
    docs.append(summary)
    visave.save_yaml(os.path.join(argflag['outdir'], 'compare.yaml'), docs)
    return docs


def cmd_pacbayes(argflag=None):
    """ PAC-Bayes comparator bounds from the first run of every condition
    """
    argflag = _settings(argflag)
    visave.make_outdir(argflag['outdir'])
    train, test = load_data(argflag)
    seed = argflag['seeds'][0]
    docs = []
    for objective, augment, noise in conditions(argflag):
        label = condition_label(objective, augment, noise)
        msgs.info("Condition " + label)
        ds = vidata.corrupt_labels(train, noise, argflag['data_seed'])
        arch = build_arch(argflag, ds.feature_dim, ds.class_count)
        obj_cfg = make_obj_cfg(argflag, objective, arch, ds.n)
        tcfg = make_train_cfg(argflag, augment)
        stream = vitrain.EpsilonStream(seed)
        init = vimodel.init_params(arch, tcfg.sigma0, tcfg.init_sigma, stream.init_seed(0))
        params, traj = vitrain.train(ds, arch, obj_cfg, tcfg, stream, params0=init)
        docs.append(visave.jsonify(dict(label=label, seed=seed, n=ds.n,
                                        pac_bayes=pac_bayes_summary([params], [init], obj_cfg.prior,
                                                                    argflag, ds.n))))
    visave.save_yaml(os.path.join(argflag['outdir'], 'pacbayes.yaml'), docs)
    return docs


def _check(name, value, expected, passed, tolerance=None):
    return dict(name=name, value=float(value), expected=expected, tolerance=tolerance, passed=bool(passed))


def cmd_counterexamples(setup_chain=None, setup_extreme=None):
    """ Headline values of both counterexamples with pass/fail flags

    Returns
    -------
    checks : list
      One dict per headline value
    """
    joint, marginal = vicounter.bernoulli_chain_kls(setup_chain)
    stab, pac_kl, means = vicounter.logistic_extreme_run(setup_extreme)
    checks = [_check('chain_joint_kl', joint, chain_joint_expected,
                     abs(joint-chain_joint_expected) <= chain_tolerance, chain_tolerance),
              _check('chain_marginal_plus_conditional', marginal, chain_marginal_expected,
                     abs(marginal-chain_marginal_expected) <= chain_tolerance and joint > marginal,
                     chain_tolerance),
              _check('extreme_stability_bound', stab, 0., stab == 0.),
              _check('extreme_pac_bayes_kl', pac_kl[-1], extreme_kl_threshold,
                     np.all(np.diff(pac_kl) > 0.) and pac_kl[-1] > extreme_kl_threshold)]
    for check in checks:
        if not check['passed']:
            msgs.warn("Counterexample check failed: " + check['name'])
    return checks


def recompute_from_traces(outdir, label, summary='bound.yaml'):
    """ Recompute the stability numbers of a condition from its emitted traces

    Parameters
    ----------
    outdir : str
    label : str
    summary : str, optional
      Summary file holding the condition's report

    Returns
    -------
    stability : dict
      param_diff, kl_route, w2_route
    """
    docs = [doc for doc in visave.load_yaml(os.path.join(outdir, summary)) if doc.get('label') == label]
    if len(docs) != 1:
        msgs.error("No report labelled {0:s} in {1:s}".format(label, summary))
    inp = docs[0]['inputs']
    paths = trace_paths(outdir, label)
    norms = visave.load_delta_trace(paths['deltas'], nrun=inp['n_runs'], nstep=inp['n_steps'])
    alphas, eta, runs = visave.load_step_trace(paths['steps'])
    inputs = vistable.StabilityBoundInputs(inp['sigma0'], inp['n'], C=inp['C'], K=inp['K'])
    return visave.jsonify(vistable.stability_from_arrays(mean_deltas(norms), eta, alphas, inputs))


def flatten(doc, prefix=''):
    """ (dotted key, value) pairs of a nested dict, keys sorted
    """
    items = []
    for key in sorted(doc.keys()):
        name = prefix + str(key)
        if isinstance(doc[key], dict):
            items += flatten(doc[key], prefix=name + '.')
        else:
            items.append((name, doc[key]))
    return items


def format_text(docs):
    """ Plain-text rendering of a list of report dicts
    """
    lines = []
    for doc in docs:
        lines.append("---")
        for key, val in flatten(doc):
            if isinstance(val, float):
                val = "{0:.6g}".format(val)
            lines.append("{0:<45s} {1}".format(key, val))
    return "\n".join(lines) + "\n"
