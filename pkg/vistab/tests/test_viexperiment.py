# Module to run tests on viexperiment; tiny settings keep each run under a second

import os

import numpy as np
import pytest

from vistab import viutils
msgs = viutils.get_dummy_logger()
from vistab import viexperiment
from vistab import visave
from vistab.vimsgs import VistabError


def tiny_settings(outdir, extra=None):
    lines = ['n_train = 20', 'n_test = 10', 'classes = 3', 'feature_dim = 2', 'hidden = [4]',
             'batch_size = 10', 'epochs = 2', 'run_count = 2', 'pair_count = 3', 'eval_samples = 2',
             'mc_samples_dlm = 2', 'momentum = 0.0', 'label_noise = [0.0]', 'augment = [False]',
             'outdir = {0:s}'.format(outdir)]
    if extra is not None:
        lines += extra
    return viutils.dummy_settings(lines)


def test_condition_label():
    assert viexperiment.condition_label('elbo', True, 0.5) == 'elbo_aug1_noise0.5'
    assert viexperiment.condition_label('dlm', False, 0., prefix='cmp1') == 'cmp1_dlm_aug0_noise0'


def test_conditions(tmpdir):
    argflag = tiny_settings(str(tmpdir), ['augment = [False, True]', 'label_noise = [0.0, 0.5]'])
    assert viexperiment.conditions(argflag) == [('elbo', False, 0.), ('elbo', False, 0.5),
                                                ('elbo', True, 0.), ('elbo', True, 0.5)]


def test_sample_pairs(tmpdir):
    argflag = tiny_settings(str(tmpdir))
    train, test = viexperiment.load_data(argflag)
    assert (train.n, test.n) == (20, 10)
    pairs = viexperiment.sample_pairs(train, test, 4, 3)
    again = viexperiment.sample_pairs(train, test, 4, 3)
    assert len(pairs) == 4
    for (z1, zb1), (z2, zb2) in zip(pairs, again):
        np.testing.assert_array_equal(z1.x, z2.x)
        np.testing.assert_array_equal(zb1.x, zb2.x)
    assert viexperiment.sample_pairs(train, test, 0, 3) == []


def test_mean_deltas():
    norms = np.zeros((2, 3, 4, 3))
    norms[0] += 1.
    norms[1] += 3.
    np.testing.assert_allclose(viexperiment.mean_deltas(norms), 2.*np.ones((3, 3)))
    np.testing.assert_array_equal(viexperiment.mean_deltas(np.zeros((2, 3, 0, 3))), np.zeros((3, 3)))
    with pytest.raises(VistabError):
        viexperiment.mean_deltas(np.zeros((3, 4, 3)))


def test_bound(tmpdir):
    outdir = str(tmpdir)
    argflag = tiny_settings(outdir)
    docs = viexperiment.cmd_bound(argflag)
    assert len(docs) == 1
    doc = docs[0]
    assert doc['label'] == 'elbo_aug0_noise0'
    for key in ['kl_route', 'w2_route']:
        assert doc['stability'][key] >= 0.
        assert np.isfinite(doc['stability'][key])
    assert 0. <= doc['losses']['gap_zero_one'] <= 1.
    assert doc['inputs']['n_steps'] == 4
    assert doc['inputs']['n_runs'] == 2
    assert doc['flags']['momentum_caveat'] is False
    assert set(doc['pac_bayes'].keys()) == set(['objective_prior', 'initialization_q0'])
    paths = viexperiment.trace_paths(outdir, doc['label'])
    for key in ['deltas', 'steps', 'epochs', 'trajectory']:
        assert os.path.isfile(paths[key])
    assert os.path.isfile(os.path.join(outdir, 'bound.yaml'))
    # The emitted traces reproduce the reported numbers exactly
    stab = viexperiment.recompute_from_traces(outdir, doc['label'])
    assert stab['kl_route'] == doc['stability']['kl_route']
    assert stab['w2_route'] == doc['stability']['w2_route']
    assert stab['param_diff'] == doc['stability']['param_diff']
    with pytest.raises(VistabError):
        viexperiment.recompute_from_traces(outdir, 'dlm_aug0_noise0')
    # The last epoch of the per-epoch series is the final report
    epochs = visave.load_epoch_trace(paths['epochs'])
    np.testing.assert_array_equal(epochs['epoch'], [1, 2])
    np.testing.assert_array_equal(epochs['t'], [2, 4])
    assert epochs['kl_route'][-1] == doc['stability']['kl_route']
    assert epochs['w2_route'][-1] == doc['stability']['w2_route']
    for key in ['train_nll', 'test_zero_one', 'gap_nll']:
        assert epochs[key][-1] == doc['losses'][key]
    assert epochs['germain_objective_prior'][-1] == doc['pac_bayes']['objective_prior']['germain']
    assert epochs['union_initialization_q0'][-1] == doc['pac_bayes']['initialization_q0']['union']
    assert doc['epochs']['mcallester_objective_prior'][-1] == doc['pac_bayes']['objective_prior']['mcallester']


def test_bound_repeatable(tmpdir):
    out1 = os.path.join(str(tmpdir), 'one')
    out2 = os.path.join(str(tmpdir), 'two')
    docs1 = viexperiment.cmd_bound(tiny_settings(out1))
    docs2 = viexperiment.cmd_bound(tiny_settings(out2))
    assert docs1 == docs2
    for name in ['bound.yaml', 'deltas_elbo_aug0_noise0.csv', 'steps_elbo_aug0_noise0.csv']:
        with open(os.path.join(out1, name), 'rb') as f1, open(os.path.join(out2, name), 'rb') as f2:
            assert f1.read() == f2.read()


def test_bound_no_pairs(tmpdir):
    outdir = str(tmpdir)
    doc = viexperiment.cmd_bound(tiny_settings(outdir, ['pair_count = 0']))[0]
    assert doc['stability']['kl_route'] == 0.
    assert doc['stability']['w2_route'] == 0.
    assert len(doc['warnings']) == 1
    assert doc['inputs']['n_pairs'] == 0
    stab = viexperiment.recompute_from_traces(outdir, doc['label'])
    assert stab['kl_route'] == 0.


def test_bound_momentum(tmpdir):
    doc = viexperiment.cmd_bound(tiny_settings(str(tmpdir), ['momentum = 0.9']))[0]
    assert doc['flags']['momentum_caveat'] is True
    assert any(['Momentum' in ww for ww in doc['warnings']])


def test_bound_snapshots(tmpdir):
    outdir = str(tmpdir)
    doc = viexperiment.cmd_bound(tiny_settings(outdir, ['save_snapshots = True', 'snapshot_stride = 2']))[0]
    snaps = visave.load_snapshots_hdf5(viexperiment.trace_paths(outdir, doc['label'])['snapshots'])
    assert len(snaps) > 0


def test_compare_same_objective(tmpdir):
    outdir = str(tmpdir)
    argflag = tiny_settings(outdir, ['compare_objectives = [elbo, elbo]', 'compare_augment = False'])
    docs = viexperiment.cmd_compare(argflag)
    assert len(docs) == 3
    assert docs[0]['label'] == 'cmp0_elbo_aug0_noise0'
    assert docs[1]['label'] == 'cmp1_elbo_aug0_noise0'
    assert docs[0]['stability'] == docs[1]['stability']
    assert docs[0]['losses'] == docs[1]['losses']
    assert set(docs[2]['smaller'].values()) == set(['tie'])
    tbl = visave.read_table(os.path.join(outdir, 'compare.csv'))
    assert len(tbl) == len(viexperiment.compare_keys)
    assert list(tbl['quantity'])[6] == 'stability.kl_route'
    np.testing.assert_array_equal(np.asarray(tbl['first'], dtype=float), np.asarray(tbl['second'], dtype=float))


def test_compare_objectives(tmpdir):
    argflag = tiny_settings(str(tmpdir), ['compare_objectives = [elbo, dlm]', 'compare_augment = True'])
    docs = viexperiment.cmd_compare(argflag)
    assert docs[1]['label'] == 'cmp1_dlm_aug1_noise0'
    rows = viexperiment.ordering(docs[0], docs[1])
    assert len(rows) == len(viexperiment.compare_keys)
    for quantity, first, second, smaller in rows:
        if first < second:
            assert smaller == 'first'
        elif first > second:
            assert smaller == 'second'
        else:
            assert smaller == 'tie'


def test_expansion(tmpdir):
    outdir = str(tmpdir)
    profiles = viexperiment.cmd_expansion(tiny_settings(outdir))
    assert list(profiles.keys()) == ['elbo_aug0_noise0']
    profile = profiles['elbo_aug0_noise0']
    assert profile.n_steps == 4
    assert np.all(profile.eta > 0.)
    path = os.path.join(outdir, 'expansion_elbo_aug0_noise0.csv')
    again = viexperiment.reaggregate(path)
    np.testing.assert_array_equal(again.eta, profile.eta)
    # Feed the stored profile into the bound
    doc = viexperiment.cmd_bound(tiny_settings(outdir, ['expansion_file = ' + path]))[0]
    assert doc['expansion']['source'] == path
    assert doc['expansion']['mean_eta'] == float(np.mean(profile.eta))
    summ = viexperiment.expansion_summary(profile, 'twin_runs')
    assert summ['n_runs'] == 2
    np.testing.assert_allclose(summ['cumulative_final'], np.prod(profile.eta), rtol=1e-12)


def test_expansion_file_errors(tmpdir):
    outdir = str(tmpdir)
    argflag = tiny_settings(outdir, ['expansion_file = ' + os.path.join(outdir, 'nothere.csv')])
    with pytest.raises(VistabError):
        viexperiment.cmd_bound(argflag)
    # A profile of the wrong length
    viexperiment.cmd_expansion(tiny_settings(outdir, ['epochs = 1']))
    path = os.path.join(outdir, 'expansion_elbo_aug0_noise0.csv')
    with pytest.raises(VistabError):
        viexperiment.cmd_bound(tiny_settings(outdir, ['expansion_file = ' + path]))


def test_pacbayes(tmpdir):
    outdir = str(tmpdir)
    docs = viexperiment.cmd_pacbayes(tiny_settings(outdir))
    assert len(docs) == 1
    for choice in ['objective_prior', 'initialization_q0']:
        summ = docs[0]['pac_bayes'][choice]
        assert summ['kl'] >= 0.
        for key in ['germain', 'mcallester', 'union']:
            assert summ[key] > 0.
        assert len(summ['union_j']) == 1
    assert os.path.isfile(os.path.join(outdir, 'pacbayes.yaml'))


def test_counterexamples():
    checks = viexperiment.cmd_counterexamples()
    assert [cc['name'] for cc in checks] == ['chain_joint_kl', 'chain_marginal_plus_conditional',
                                             'extreme_stability_bound', 'extreme_pac_bayes_kl']
    assert all([cc['passed'] for cc in checks])


def test_format_text():
    text = viexperiment.format_text([dict(label='a', stability=dict(kl_route=1./3.)), dict(label='b')])
    lines = text.splitlines()
    assert lines[0] == '---'
    assert lines.count('---') == 2
    assert any([ll.startswith('stability.kl_route') and ll.endswith('0.333333') for ll in lines])


def test_csv_data(tmpdir):
    outdir = str(tmpdir)
    argflag = tiny_settings(outdir)
    train, test = viexperiment.load_data(argflag)
    ftrain = os.path.join(outdir, 'train.csv')
    ftest = os.path.join(outdir, 'test.csv')
    from vistab import vidata
    vidata.write_csv(train, ftrain)
    vidata.write_csv(test, ftest)
    argflag = tiny_settings(outdir, ['data_source = csv', 'data_train_file = ' + ftrain,
                                     'data_test_file = ' + ftest])
    train2, test2 = viexperiment.load_data(argflag)
    np.testing.assert_array_equal(train2.X, train.X)
    np.testing.assert_array_equal(test2.y, test.y)
    # batch_size above the number of training examples
    argflag = tiny_settings(outdir, ['data_source = csv', 'data_train_file = ' + ftrain,
                                     'data_test_file = ' + ftest, 'batch_size = 50'])
    with pytest.raises(VistabError):
        viexperiment.load_data(argflag)


def test_bound_logistic_task(tmpdir):
    from vistab import vicounter, vidata
    outdir = str(tmpdir)
    ftrain = os.path.join(outdir, 'train.csv')
    ftest = os.path.join(outdir, 'test.csv')
    vidata.write_csv(vicounter.logistic_dataset(20), ftrain)
    vidata.write_csv(vicounter.logistic_dataset(10), ftest)
    argflag = tiny_settings(outdir, ['data_source = csv', 'data_train_file = ' + ftrain,
                                     'data_test_file = ' + ftest, 'classes = 2', 'hidden = []',
                                     'bias = False', 'epochs = 5', 'kl_coeff = 0.0', 'lr = 0.5'])
    train, test = viexperiment.load_data(argflag)
    result = viexperiment.run_condition(argflag, train, test, 'elbo', False, 0.)
    assert result.report.inputs['n_pairs'] == 3
    assert np.all(result.norms == 0.)
    stab = result.report.stability
    assert stab['kl_route'] == 0.
    assert stab['w2_route'] == 0.
    for choice in ['objective_prior', 'initialization_q0']:
        assert result.report.pac_bayes[choice]['germain'] > 0.
    # Every epoch keeps a zero stability bound while the distance to the initial posterior grows
    epochs = result.report.epochs
    assert epochs['epoch'] == [1, 2, 3, 4, 5]
    assert np.all(np.array(epochs['kl_route']) == 0.)
    assert np.all(np.array(epochs['w2_route']) == 0.)
    for key in ['kl', 'germain', 'mcallester']:
        series = np.array(epochs[key + '_initialization_q0'])
        assert np.all(series > 0.)
        assert np.all(np.diff(series) >= 0.)
