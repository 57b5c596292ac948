# Module to run tests on vitrain

import json

import numpy as np
import pytest

from vistab import viutils
msgs = viutils.get_dummy_logger()
from vistab import vidata
from vistab import vimodel
from vistab import viobjective
from vistab import vitrain
from vistab.vimsgs import VistabError


@pytest.fixture
def setup():
    ds = vidata.gen_blobs(40, 3, 2, 0.5, 1)
    arch = vimodel.Architecture([2, 6, 3], activation='tanh')
    obj_cfg = viobjective.ObjectiveConfig('elbo', 0.1, ds.n, 2, viobjective.isotropic_prior(arch, 1.), arch)
    train_cfg = vitrain.TrainConfig(learning_rate=0.05, momentum=0., batch_size=8, epochs=3,
                                    sigma0=0.01, init_sigma=0.05)
    return ds, arch, obj_cfg, train_cfg


def test_stream_deterministic():
    s1, s2, s3 = vitrain.EpsilonStream(5), vitrain.EpsilonStream(5), vitrain.EpsilonStream(6)
    np.testing.assert_array_equal(s1.step_noise(3, 2, 7), s2.step_noise(3, 2, 7))
    assert not np.array_equal(s1.step_noise(3, 2, 7), s3.step_noise(3, 2, 7))
    # Draws of a step do not depend on earlier draws
    s1.step_noise(1, 2, 7)
    np.testing.assert_array_equal(s1.step_noise(3, 2, 7), s2.step_noise(3, 2, 7))
    assert not np.array_equal(s1.step_noise(3, 2, 7), s1.step_noise(4, 2, 7))
    with pytest.raises(VistabError):
        vitrain.EpsilonStream(-1)


def test_batches():
    stream = vitrain.EpsilonStream(0)
    batches = list(stream.batches(10, 4, 2))
    assert [bb[0] for bb in batches] == [1, 2, 3, 4, 5, 6]
    assert [bb[3].size for bb in batches] == [4, 4, 2, 4, 4, 2]
    assert [bb[1] for bb in batches] == [0, 0, 0, 1, 1, 1]
    # Every epoch visits every example once
    for epoch in range(2):
        idx = np.concatenate([bb[3] for bb in batches if bb[1] == epoch])
        np.testing.assert_array_equal(np.sort(idx), np.arange(10))


def test_learning_rate():
    cfg = vitrain.TrainConfig(learning_rate=0.1, lr_decay_factor=0.5, lr_decay_every_epochs=2)
    rates = [vitrain.learning_rate_at(t, cfg, 3) for t in range(1, 14)]
    np.testing.assert_allclose(rates, [0.1]*6 + [0.05]*6 + [0.025])
    cfg = vitrain.TrainConfig(schedule_kind='logT', logt_c=0.2)
    np.testing.assert_allclose(vitrain.learning_rate_at(1, cfg, 3), 0.2/(3.*np.log(3.)))
    assert vitrain.steps_per_epoch(10, 4) == 3


def test_train_config_errors():
    for kwargs in [dict(learning_rate=0.), dict(momentum=1.), dict(batch_size=0), dict(schedule_kind='cosine'),
                   dict(grad_clip=-1.), dict(sigma0=0.1, init_sigma=0.05)]:
        with pytest.raises(VistabError):
            vitrain.TrainConfig(**kwargs)
    cfg = vitrain.TrainConfig(momentum=0.9)
    assert cfg.copy(momentum=0.).momentum == 0.
    assert cfg.momentum == 0.9


def test_sgd_step():
    params = vimodel.VarParams(np.array([1., 2.]), np.array([0., 0.]), 0.01)
    grad = (np.array([1., -1.]), np.array([0.5, 0.5]))
    new, mstate = vitrain.sgd_step(params, grad, 0.1)
    np.testing.assert_allclose(new.m, [0.9, 2.1])
    np.testing.assert_allclose(new.s, [-0.05, -0.05])
    assert mstate is None
    mstate = vitrain.MomentumState(0.5, np.array([1., 1.]), np.array([0., 0.]))
    new, mstate = vitrain.sgd_step(params, grad, 0.1, mstate)
    np.testing.assert_allclose(mstate.vm, [1.5, -0.5])
    np.testing.assert_allclose(new.m, [0.85, 2.05])
    with pytest.raises(VistabError):
        vitrain.sgd_step(params, (np.zeros(3), np.zeros(3)), 0.1)


def test_clip_rows():
    rng = np.random.default_rng(0)
    gm, gs = rng.normal(size=(5, 4)), rng.normal(size=(5, 4))
    gm[0], gs[0] = 0.01, 0.01
    cm, cs = vitrain.clip_rows(gm, gs, 1.)
    norms = np.sqrt(np.sum(cm**2, axis=1) + np.sum(cs**2, axis=1))
    assert np.all(norms <= 1. + 1e-12)
    # Short rows are untouched
    np.testing.assert_array_equal(cm[0], gm[0])


def test_train_deterministic(setup):
    ds, arch, obj_cfg, train_cfg = setup
    p1, t1 = vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(3))
    p2, t2 = vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(3))
    p3, t3 = vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(4))
    np.testing.assert_array_equal(p1.m, p2.m)
    np.testing.assert_array_equal(p1.s, p2.s)
    assert t1.records() == t2.records()
    assert not np.array_equal(p1.m, p3.m)
    assert t1.n_steps == 3 * 5
    assert t1.batch_size == [8]*15


def test_train_momentum_augment(setup):
    ds, arch, obj_cfg, train_cfg = setup
    cfg = train_cfg.copy(momentum=0.9, augment=True, flip_prob=0.2)
    p1 = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(3))[0]
    p2 = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(3))[0]
    np.testing.assert_array_equal(p1.m, p2.m)
    p3 = vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(3))[0]
    assert not np.array_equal(p1.m, p3.m)


def test_train_reduces_objective(setup):
    ds, arch, obj_cfg, train_cfg = setup
    cfg = train_cfg.copy(epochs=20, learning_rate=0.1)
    traj = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(0))[1]
    assert np.mean(traj.objective[-5:]) < np.mean(traj.objective[:5])


def test_hooks(setup):
    ds, arch, obj_cfg, train_cfg = setup
    seen = []

    def hook(t, params, idx, eps):
        seen.append((t, params.m.copy(), idx.size, eps.noise.shape))

    stream = vitrain.EpsilonStream(2)
    items = list(vitrain.iterate_training(ds, arch, obj_cfg, train_cfg, stream, hooks=[hook]))
    assert items[0][0] == 0
    assert items[0][1] is None
    assert [ss[0] for ss in seen] == list(range(1, 16))
    # Hooks see the pre-update state
    np.testing.assert_array_equal(seen[0][1], items[0][2].m)
    np.testing.assert_array_equal(seen[1][1], items[1][2].m)
    assert seen[0][3] == (2, arch.n_params)


def test_trajectory_export(setup, tmpdir):
    ds, arch, obj_cfg, train_cfg = setup
    cfg = train_cfg.copy(snapshot_stride=5, epochs=1)
    params, traj = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(1))
    assert sorted(traj.snapshots.keys()) == [0, 5]
    np.testing.assert_array_equal(traj.snapshots[5][0], params.m)
    path = str(tmpdir.join('traj.jsonl'))
    traj.to_json_lines(path)
    with open(path, 'r') as f:
        recs = [json.loads(line) for line in f]
    assert len(recs) == 5
    assert recs[0]['t'] == 1
    assert set(recs[0].keys()) == set(['t', 'alpha', 'epoch', 'batch', 'batch_size', 'objective'])


def test_divergence():
    X = np.array([[1e200, -1e200], [-1e200, 1e200], [1e200, 1e200], [-1e200, -1e200]])
    ds = vidata.Dataset(X, [0, 1, 0, 1], 2)
    arch = vimodel.Architecture([2, 2])
    obj_cfg = viobjective.ObjectiveConfig('elbo', 0.1, ds.n, 1, viobjective.isotropic_prior(arch, 1.), arch)
    cfg = vitrain.TrainConfig(learning_rate=0.01, momentum=0., batch_size=4, epochs=5)
    with pytest.raises(VistabError) as excinfo:
        vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(0))
    assert 'diverged at step' in str(excinfo.value)


def test_bad_training(setup):
    ds, arch, obj_cfg, train_cfg = setup
    with pytest.raises(VistabError):
        vitrain.train(ds, arch, obj_cfg, train_cfg.copy(batch_size=41), vitrain.EpsilonStream(0))
    other = vimodel.Architecture([2, 3])
    params0 = vimodel.init_params(other, 0.01, 0.05, 0)
    with pytest.raises(VistabError):
        vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(0), params0=params0)


def test_posterior_loss(setup):
    ds, arch, obj_cfg, train_cfg = setup
    params = vitrain.train(ds, arch, obj_cfg, train_cfg.copy(epochs=10), vitrain.EpsilonStream(0))[0]
    err = vitrain.posterior_loss(params, ds, 'zero_one', 5, 3, arch)
    assert 0. <= err <= 1.
    assert err == vitrain.posterior_loss(params, ds, 'zero_one', 5, 3, arch)
    assert vitrain.posterior_loss(params, ds, 'nll', 5, 3, arch) >= 0.
    with pytest.raises(VistabError):
        vitrain.posterior_loss(params, ds, 'hinge', 5, 3, arch)
    with pytest.raises(VistabError):
        vitrain.posterior_loss(params, ds, 'nll', 0, 3, arch)


def test_quadratic_steps():
    """ SGD on L/2 |theta|^2 scales both blocks by (1 - alpha L) every step
    """
    m0, s0 = np.array([1., -2., 0.5]), np.array([0.3, 0.1, -0.7])
    for alpha, curv in [(0.1, 2.), (0.05, 30.), (0.5, 3.)]:
        params = vimodel.VarParams(m0, s0, 0.01)
        for t in range(1, 21):
            params = vitrain.sgd_step(params, (curv*params.m, curv*params.s), alpha)[0]
            np.testing.assert_allclose(params.m, (1.-alpha*curv)**t * m0, rtol=1e-10, atol=1e-300)
            np.testing.assert_allclose(params.s, (1.-alpha*curv)**t * s0, rtol=1e-10, atol=1e-300)


def test_schedule_in_trajectory(setup):
    ds, arch, obj_cfg, train_cfg = setup
    cfg = train_cfg.copy(learning_rate=0.2, lr_decay_factor=0.5, lr_decay_every_epochs=1)
    traj = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(0))[1]
    np.testing.assert_allclose(traj.alpha, [0.2]*5 + [0.1]*5 + [0.05]*5)
    assert traj.epoch == [0]*5 + [1]*5 + [2]*5
    cfg = train_cfg.copy(schedule_kind='logT', logt_c=0.3)
    traj = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(0))[1]
    tt = np.arange(1, 16)
    np.testing.assert_allclose(traj.alpha, 0.3/((tt+2.)*np.log(tt+2.)))


def test_row_permutation(setup):
    """ Full-batch training does not depend on the order of the rows
    """
    ds, arch, obj_cfg, train_cfg = setup
    perm = np.random.default_rng(3).permutation(ds.n)
    shuffled = ds.subset(perm)
    cfg = train_cfg.copy(batch_size=ds.n, epochs=5)
    stream = vitrain.EpsilonStream(6)
    noise = stream.step_noise(1, obj_cfg.mc_samples, arch.n_params)
    params0 = vimodel.init_params(arch, cfg.sigma0, cfg.init_sigma, 0)
    g1 = vitrain.batch_gradient(params0, ds.X, ds.y, noise, obj_cfg)[0]
    g2 = vitrain.batch_gradient(params0, shuffled.X, shuffled.y, noise, obj_cfg)[0]
    np.testing.assert_allclose(g1[0], g2[0], rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(g1[1], g2[1], rtol=1e-10, atol=1e-14)
    p1 = vitrain.train(ds, arch, obj_cfg, cfg, stream, params0=params0)[0]
    p2 = vitrain.train(shuffled, arch, obj_cfg, cfg, stream, params0=params0)[0]
    np.testing.assert_allclose(p1.m, p2.m, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(p1.s, p2.s, rtol=1e-9, atol=1e-12)


def test_separable_blobs():
    ds = vidata.gen_blobs(150, 3, 10, 0.2, 2, radius=3.)
    arch = vimodel.Architecture([10, 3])
    obj_cfg = viobjective.ObjectiveConfig('elbo', 0.1, ds.n, 1, viobjective.isotropic_prior(arch, 1.), arch)
    cfg = vitrain.TrainConfig(learning_rate=0.1, momentum=0.5, batch_size=15, epochs=20)
    params = vitrain.train(ds, arch, obj_cfg, cfg, vitrain.EpsilonStream(0))[0]
    assert vitrain.posterior_loss(params, ds, 'zero_one', 10, 0, arch) < 0.05


def test_posterior_loss_variance(setup):
    """ The spread of the Monte-Carlo estimate shrinks as 1/samples
    """
    ds, arch, obj_cfg, train_cfg = setup
    params = vimodel.init_params(arch, 0.01, 0.5, 1)
    few = [vitrain.posterior_loss(params, ds, 'nll', 1, seed, arch) for seed in range(200)]
    many = [vitrain.posterior_loss(params, ds, 'nll', 16, seed, arch) for seed in range(200)]
    ratio = np.var(few) / np.var(many)
    assert 8. < ratio < 32.


def test_epoch_ends(setup):
    ds, arch, obj_cfg, train_cfg = setup
    params, traj = vitrain.train(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(2))
    assert sorted(traj.epoch_ends.keys()) == [1, 2, 3]
    np.testing.assert_array_equal(traj.epoch_ends[3].m, params.m)
    items = list(vitrain.iterate_training(ds, arch, obj_cfg, train_cfg, vitrain.EpsilonStream(2)))
    np.testing.assert_array_equal(traj.epoch_ends[1].s, items[5][2].s)
