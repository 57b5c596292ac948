""" Output for VISTAB
"""
from __future__ import (print_function, absolute_import, division,
                        unicode_literals)
import os

import numpy as np
from astropy.table import Table
import h5py
import yaml

from vistab import vimsgs

# Logging
msgs = vimsgs.get_logger()

# Floats are written with enough digits to be read back bit-exactly
float_format = '%.17g'


def jsonify(obj):
    """ Convert numpy types inside nested containers to builtin Python types
    """
    if isinstance(obj, dict):
        return dict([(str(key), jsonify(value)) for key, value in obj.items()])
    if isinstance(obj, (list, tuple)):
        return [jsonify(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return jsonify(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def make_outdir(outdir):
    if not os.path.isdir(outdir):
        os.makedirs(outdir)
        msgs.info("Created output directory:" + msgs.newline() + outdir)
    return outdir


def save_yaml(path, docs):
    """ Write a list of dicts as a multi-document YAML file, keys sorted
    """
    with open(path, 'w') as f:
        yaml.safe_dump_all([jsonify(doc) for doc in docs], f, sort_keys=True,
                           default_flow_style=False)
    msgs.info("Wrote summary:" + msgs.newline() + path)


def dump_yaml(docs):
    """ The multi-document YAML text of save_yaml, as a string
    """
    return yaml.safe_dump_all([jsonify(doc) for doc in docs], sort_keys=True, default_flow_style=False)


def load_yaml(path):
    """ Read every document of a YAML file
    """
    if not os.path.isfile(path):
        msgs.error("Summary file does not exist:" + msgs.newline() + path)
    with open(path, 'r') as f:
        return [doc for doc in yaml.safe_load_all(f)]


def write_table(path, columns, names):
    """ Write columns as comma-separated text

    Parameters
    ----------
    path : str
    columns : list
      One array per column
    names : list
    """
    tbl = Table([np.asarray(col) for col in columns], names=names)
    for name in names:
        if tbl[name].dtype.kind == 'f':
            tbl[name].format = float_format
    tbl.write(path, format='ascii.csv', overwrite=True)
    msgs.info("Wrote table:" + msgs.newline() + path)
    return tbl


def read_table(path):
    if not os.path.isfile(path):
        msgs.error("Table does not exist:" + msgs.newline() + path)
    return Table.read(path, format='ascii.csv')


def save_delta_trace(path, norms):
    """ Write the delta norms of every run, step and pair

    Parameters
    ----------
    path : str
    norms : ndarray
      (runs, T, pairs, 3)
    """
    nrun, nstep, npair = norms.shape[:3]
    run, tt, pair = [arr.ravel() for arr in np.meshgrid(np.arange(nrun), np.arange(1, nstep+1),
                                                         np.arange(npair), indexing='ij')]
    flat = norms.reshape(-1, 3)
    return write_table(path, [run, tt, pair, flat[:, 0], flat[:, 1], flat[:, 2]],
                       ['run', 't', 'pair', 'm_l2', 's_l1', 's_l2'])


def load_delta_trace(path, nrun=None, nstep=None):
    """ Inverse of save_delta_trace, returning (runs, T, pairs, 3)

    A trace without pairs has no rows; nrun and nstep then give the shape.
    """
    tbl = read_table(path)
    if len(tbl) == 0:
        if nrun is None or nstep is None:
            msgs.error("Delta trace is empty:" + msgs.newline() + path)
        return np.zeros((nrun, nstep, 0, 3))
    nrun = int(np.max(tbl['run']))+1
    nstep = int(np.max(tbl['t']))
    npair = int(np.max(tbl['pair']))+1
    order = np.lexsort((np.asarray(tbl['pair']), np.asarray(tbl['t']), np.asarray(tbl['run'])))
    flat = np.array([np.asarray(tbl[key], dtype=float)[order] for key in ['m_l2', 's_l1', 's_l2']]).T
    return flat.reshape(nrun, nstep, npair, 3)


def save_step_trace(path, alphas, profile):
    """ Write per-step learning rates, aggregated and per-run expansion rates

    Parameters
    ----------
    path : str
    alphas : ndarray
    profile : ExpansionProfile
    """
    nstep = profile.n_steps
    columns = [np.arange(1, nstep+1), np.asarray(alphas, dtype=float), profile.eta, profile.cumulative]
    names = ['t', 'alpha', 'eta', 'cumulative']
    if profile.runs is not None:
        for rr in range(profile.runs.shape[0]):
            columns.append(profile.runs[rr])
            names.append('eta_r{0:d}'.format(rr))
    return write_table(path, columns, names)


def load_step_trace(path):
    """ Returns alphas, aggregated eta and the per-run eta series (or None)
    """
    tbl = read_table(path)
    alphas = np.asarray(tbl['alpha'], dtype=float)
    eta = np.asarray(tbl['eta'], dtype=float)
    runcols = sorted([name for name in tbl.colnames if name.startswith('eta_r')], key=lambda x: int(x[5:]))
    runs = None
    if len(runcols) > 0:
        runs = np.array([np.asarray(tbl[name], dtype=float) for name in runcols])
    return alphas, eta, runs


def save_epoch_trace(path, columns):
    """ Write the per-epoch series of a condition, one row per completed epoch

    Parameters
    ----------
    path : str
    columns : dict
      Column name -> list of values, in output order
    """
    names = list(columns.keys())
    return write_table(path, [np.asarray(columns[name]) for name in names], names)


def load_epoch_trace(path):
    """ Column name -> ndarray
    """
    tbl = read_table(path)
    return dict([(name, np.asarray(tbl[name])) for name in tbl.colnames])


def save_snapshots_hdf5(path, snapshots):
    """ One group per recorded step holding m and s
    """
    with h5py.File(path, 'w') as hdf:
        for t in sorted(snapshots.keys()):
            grp = hdf.create_group('step_{0:06d}'.format(t))
            grp.attrs['t'] = t
            grp.create_dataset('m', data=snapshots[t][0], track_times=False)
            grp.create_dataset('s', data=snapshots[t][1], track_times=False)
    msgs.info("Wrote parameter snapshots:" + msgs.newline() + path)


def load_snapshots_hdf5(path):
    snapshots = dict()
    with h5py.File(path, 'r') as hdf:
        for key in hdf.keys():
            grp = hdf[key]
            snapshots[int(grp.attrs['t'])] = (grp['m'][:], grp['s'][:])
    return snapshots
