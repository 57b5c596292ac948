# Module to run tests on vistable

import numpy as np
import pytest

from vistab import viutils
msgs = viutils.get_dummy_logger()
from vistab import vicounter
from vistab import vidata
from vistab import vimodel
from vistab import viobjective
from vistab import vistable
from vistab import vitrain
from vistab.vimsgs import VistabError


def tiny_problem(seed, n=10, feature_dim=2, classes=3, hidden=4, kl_coeff=0.1, mc_samples=1):
    ds = vidata.gen_blobs(n + 5, classes, feature_dim, 0.7, seed)
    train, test = vidata.split(ds, n)
    arch = vimodel.Architecture([feature_dim, hidden, classes], activation='tanh')
    obj_cfg = viobjective.ObjectiveConfig('elbo', kl_coeff, train.n, mc_samples,
                                          viobjective.isotropic_prior(arch, 1.), arch)
    return train, test, arch, obj_cfg


def test_expansion_ratio():
    prev_a, prev_b = [np.array([1., 0.]), np.array([0.])], [np.array([0., 0.]), np.array([0.])]
    new_a, new_b = [np.array([2., 0.]), np.array([0.])], [np.array([0., 0.]), np.array([0.])]
    # The coinciding s-block counts as 1
    assert vistable.expansion_ratio(prev_a, prev_b, new_a, new_b) == 2.
    new_a = [np.array([0.5, 0.]), np.array([0.])]
    assert vistable.expansion_ratio(prev_a, prev_b, new_a, new_b) == 1.


def test_quadratic_expansion():
    """ A step on L/2 |theta|^2 contracts differences by |1 - alpha L|
    """
    for alpha, curv in [(0.1, 3.), (0.5, 3.), (0.01, 150.)]:
        def update(t, state):
            return [state[0] - alpha*curv*state[0], state[1] - alpha*curv*state[1]]
        rng = np.random.default_rng(0)
        state_a = [rng.normal(size=5), rng.normal(size=5)]
        state_b = [rng.normal(size=5), rng.normal(size=5)]
        eta = vistable.measure_expansion(update, state_a, state_b, 20)
        np.testing.assert_allclose(eta, abs(1.-alpha*curv), rtol=0., atol=1e-9)


def test_zero_gradient_expansion():
    state_a, state_b = [np.ones(3)], [np.zeros(3)]
    eta = vistable.measure_expansion(lambda t, state: [state[0] + 0.], state_a, state_b, 10)
    assert np.all(eta == 1.)
    profile = vistable.aggregate_expansion([eta, eta])
    assert np.all(profile.cumulative == 1.)
    with pytest.raises(VistabError):
        vistable.measure_expansion(lambda t, state: state, state_a, state_a, 10)


def test_aggregate_expansion():
    profile = vistable.aggregate_expansion([np.array([1., 2.]), np.array([3., 2.])])
    np.testing.assert_allclose(profile.eta, [6., 2.])
    np.testing.assert_allclose(profile.cumulative, [6., 12.])
    assert profile.n_runs == 2
    with pytest.raises(VistabError):
        vistable.aggregate_expansion([np.ones(3)])
    with pytest.raises(VistabError):
        vistable.aggregate_expansion([np.ones(3), np.ones(4)])


def test_suffix_products():
    np.testing.assert_allclose(vistable.suffix_products([2., 3., 4.]), [12., 4., 1.])
    # Long products stay finite in log space
    sp = vistable.suffix_products(np.full(2000, 1.1))
    assert np.isfinite(sp[0]) and sp[-1] == 1.
    with pytest.raises(VistabError):
        vistable.suffix_products([1., 0.])


def test_param_diff_bound():
    diffs = vistable.param_diff_bound(np.ones((5, 3)), np.ones(5), np.full(5, 0.1), 10)
    for key in vistable.norm_flavors:
        np.testing.assert_allclose(diffs[key], 0.05)
    records = [vistable.DeltaRecord(t, 1., 2., 3.) for t in range(1, 4)]
    diffs = vistable.param_diff_bound(records, np.array([1., 2., 1.]), np.ones(3), 1)
    np.testing.assert_allclose([diffs[key] for key in vistable.norm_flavors], [4., 8., 12.])
    with pytest.raises(VistabError):
        vistable.param_diff_bound(np.ones((5, 3)), np.ones(4), np.ones(5), 10)


def test_route_bounds():
    diffs = dict(m_l2=0.01, s_l1=0.04, s_l2=0.02)
    inputs = vistable.StabilityBoundInputs(0.01, 100, C=1.)
    expected = 2./np.sqrt(0.01)*np.sqrt(0.04) + 0.02/0.01 + 0.01/0.01
    np.testing.assert_allclose(vistable.kl_route_bound(diffs, inputs), expected)
    np.testing.assert_allclose(vistable.w2_route_bound(diffs, inputs), 0.03)
    inputs = vistable.StabilityBoundInputs(0.01, 100, C=1., K=2.)
    np.testing.assert_allclose(vistable.w2_route_bound(diffs, inputs), 0.06)
    zero = dict(m_l2=0., s_l1=0., s_l2=0.)
    assert vistable.kl_route_bound(zero, inputs) == 0.
    with pytest.raises(VistabError):
        vistable.kl_route_bound(dict(m_l2=-1., s_l1=0., s_l2=0.), inputs)
    with pytest.raises(VistabError):
        vistable.StabilityBoundInputs(0., 100)


def test_logT_bound():
    np.testing.assert_allclose(vistable.logT_asymptotic_bound(0.1, 1., 2., 7, 10),
                               2.*0.1*2.*np.log(8.)/(10.*np.log(2.)))
    with pytest.raises(VistabError):
        vistable.logT_asymptotic_bound(0.1, 10., 2., 7, 10)


def test_mean_delta_records():
    norms = np.arange(24, dtype=float).reshape(4, 2, 3)
    np.testing.assert_allclose(vistable.mean_delta_records(norms), np.mean(norms, axis=1))
    np.testing.assert_array_equal(vistable.mean_delta_records(np.zeros((4, 0, 3))), np.zeros((4, 3)))


def test_delta_monitor():
    train, test, arch, obj_cfg = tiny_problem(1)
    train_cfg = vitrain.TrainConfig(learning_rate=0.1, momentum=0., batch_size=5, epochs=2)
    pairs = [(train.example(0), test.example(0)), (train.example(3), train.example(3))]
    stream = vitrain.EpsilonStream(4)
    monitor = vistable.DeltaMonitor(pairs, obj_cfg, stream, train_cfg)
    vitrain.train(train, arch, obj_cfg, train_cfg, stream, hooks=[monitor])
    norms = monitor.norms
    assert norms.shape == (4, 2, 3)
    # A pair of identical examples has no gradient difference
    assert np.all(norms[:, 1] < 1e-12)
    assert np.all(norms[:, 0] > 0.)
    # Same numbers as a direct evaluation at the initial state
    params0 = vimodel.init_params(arch, train_cfg.sigma0, train_cfg.init_sigma, stream.init_seed(0))
    rec = vistable.grad_delta(params0, pairs[0][0], pairs[0][1], stream.step_noise(1, 1, arch.n_params), obj_cfg)
    np.testing.assert_allclose(norms[0, 0], rec.as_array(), rtol=1e-10)
    assert monitor.records(0)[0].t == 1
    # With augmentation both members of a pair share the draw
    cfg = train_cfg.copy(augment=True, flip_prob=0.3)
    monitor = vistable.DeltaMonitor(pairs, obj_cfg, stream, cfg)
    vitrain.train(train, arch, obj_cfg, cfg, stream, hooks=[monitor])
    assert np.all(monitor.norms[:, 1] < 1e-12)


def test_delta_monitor_no_pairs():
    train, test, arch, obj_cfg = tiny_problem(2)
    train_cfg = vitrain.TrainConfig(momentum=0., batch_size=5, epochs=1)
    monitor = vistable.DeltaMonitor([], obj_cfg, vitrain.EpsilonStream(0), train_cfg)
    vitrain.train(train, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(0), hooks=[monitor])
    assert monitor.norms.shape == (2, 0, 3)
    np.testing.assert_array_equal(monitor.mean_records(), np.zeros((2, 3)))


def test_logistic_task_deltas():
    """ The two example types of the logistic task have equal gradients up to round-off
    """
    ds = vicounter.logistic_dataset(2)
    arch = vimodel.Architecture([1, 2], bias=False)
    obj_cfg = viobjective.ObjectiveConfig('elbo', 0., ds.n, 1, viobjective.isotropic_prior(arch, 1.), arch)
    train_cfg = vitrain.TrainConfig(learning_rate=0.1, momentum=0., batch_size=2, epochs=50,
                                    sigma0=0.01, init_sigma=0.05)
    monitor = vistable.DeltaMonitor([(ds.example(0), ds.example(1))], obj_cfg, vitrain.EpsilonStream(0), train_cfg)
    vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(0), hooks=[monitor])
    assert np.max(monitor.norms) < 1e-12


def test_twin_run():
    train, test, arch, obj_cfg = tiny_problem(3)
    train_cfg = vitrain.TrainConfig(learning_rate=0.1, momentum=0.9, batch_size=5, epochs=3)
    stream = vitrain.EpsilonStream(7)
    eta, params, traj = vistable.twin_run(train, arch, obj_cfg, train_cfg, stream, (0, 1))
    assert eta.size == 6
    assert np.all(eta > 0.)
    assert traj.eta == list(eta)
    # The first twin is the ordinary training run
    ref, rtraj = vitrain.train(train, arch, obj_cfg, train_cfg, stream)
    np.testing.assert_array_equal(params.m, ref.m)
    assert traj.objective == rtraj.objective
    np.testing.assert_array_equal(eta, vistable.estimate_expansion(train, arch, obj_cfg, train_cfg, stream, (0, 1)))
    with pytest.raises(VistabError):
        vistable.twin_run(train, arch, obj_cfg, train_cfg, stream, (2, 2))


def test_paired_training_bound():
    """ Aggregated twin-run rates and monitored deltas bound the gap between trainings on S and Sbar
    """
    for trial in range(50):
        train, test, arch, obj_cfg = tiny_problem(400+trial, n=12)
        train_cfg = vitrain.TrainConfig(learning_rate=0.02, momentum=0., batch_size=12, epochs=8)
        # Twin runs share the stream of the pair and start from other initialisations
        runs = [vistable.estimate_expansion(train, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(trial),
                                            (2*kk+1, 2*kk+2)) for kk in range(4)]
        profile = vistable.aggregate_expansion(runs)
        index = trial % train.n
        zbar = test.example(trial % test.n)
        stream = vitrain.EpsilonStream(trial)
        monitor = vistable.DeltaMonitor([(train.example(index), zbar)], obj_cfg, stream, train_cfg)
        for item in vitrain.iterate_training(train, arch, obj_cfg, train_cfg, stream, hooks=[monitor]):
            pass
        out = vistable.paired_training_oracle(train, index, zbar, arch, obj_cfg, train_cfg, stream)
        np.testing.assert_allclose(monitor.norms[:, 0, :], out['deltas'], rtol=1e-8, atol=1e-14)
        bound = vistable.param_diff_bound(monitor.mean_records(), profile, out['alphas'], train.n)
        for key in vistable.norm_flavors:
            assert out['measured'][key] <= bound[key]


def test_paired_training_recursion():
    """ The oracle's pair-local recursion dominates its own final difference
    """
    rng = np.random.default_rng(31)
    for trial in range(50):
        train, test, arch, obj_cfg = tiny_problem(100+trial, n=12)
        batch = int(rng.choice([3, 4, 6, 12]))
        train_cfg = vitrain.TrainConfig(learning_rate=float(rng.uniform(0.05, 0.5)), momentum=0.,
                                        batch_size=batch, epochs=3)
        index = int(rng.integers(0, train.n))
        out = vistable.paired_training_oracle(train, index, test.example(0), arch, obj_cfg, train_cfg,
                                              vitrain.EpsilonStream(trial))
        for key in vistable.norm_flavors:
            assert out['measured'][key] <= out['bound'][key] * (1. + 1e-9) + 1e-15


def test_paired_training_full_batch():
    """ With full batches the recursion bound is the parameter-difference bound
    """
    for trial in range(5):
        train, test, arch, obj_cfg = tiny_problem(200+trial, n=8)
        train_cfg = vitrain.TrainConfig(learning_rate=0.2, momentum=0., batch_size=8, epochs=10)
        out = vistable.paired_training_oracle(train, 2, test.example(1), arch, obj_cfg, train_cfg,
                                              vitrain.EpsilonStream(trial))
        assert np.all(out['in_batch'])
        for kk, key in enumerate(vistable.norm_flavors):
            diffs = vistable.param_diff_bound(out['deltas'], out['eta'][:, kk], out['alphas'], train.n)
            np.testing.assert_allclose(out['bound'][key], diffs[key], rtol=1e-7)
            assert out['measured'][key] <= diffs[key] * (1. + 1e-7)


def test_logT_soundness():
    """ Clipped gradients and the logT schedule keep the paired difference below the closed form
    """
    for trial in range(20):
        train, test, arch, obj_cfg = tiny_problem(300+trial, n=10)
        c, beta, epochs = 0.05, 1., 5
        train_cfg = vitrain.TrainConfig(momentum=0., batch_size=10, epochs=epochs, schedule_kind='logT',
                                        logt_c=c, grad_clip=beta)
        out = vistable.paired_training_oracle(train, trial % 10, test.example(trial % 5), arch, obj_cfg,
                                              train_cfg, vitrain.EpsilonStream(trial))
        bound = vistable.logT_asymptotic_bound(c, 1., beta, epochs, train.n)
        assert out['measured']['joint_l2'] <= bound


def test_oracle_requirements():
    train, test, arch, obj_cfg = tiny_problem(4)
    with pytest.raises(VistabError):
        vistable.paired_training_oracle(train, 0, test.example(0), arch, obj_cfg,
                                        vitrain.TrainConfig(momentum=0.9, batch_size=5), vitrain.EpsilonStream(0))


def test_stability_from_arrays():
    deltas = np.array([[1., 2., 3.], [1., 2., 3.]])
    inputs = vistable.StabilityBoundInputs(0.01, 10, C=1.)
    out = vistable.stability_from_arrays(deltas, np.ones(2), np.full(2, 0.5), inputs)
    np.testing.assert_allclose(out['param_diff']['s_l1'], 0.2)
    assert out['kl_route'] == vistable.kl_route_bound(out['param_diff'], inputs)
    zero = vistable.stability_from_arrays(np.zeros((2, 3)), np.ones(2), np.ones(2), inputs)
    assert zero['kl_route'] == 0. and zero['w2_route'] == 0.
