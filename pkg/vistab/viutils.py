""" Some VISTAB utilities for the package
"""
from __future__ import (print_function, absolute_import, division,
                        unicode_literals)

import re
from os.path import realpath, join

this_file = realpath(__file__)
this_path = this_file[:this_file.rfind('/')]


def get_version():
    """Get the value of ``__version__`` without having to import the module.

    Returns
    -------
    ver : str
      The value of ``__version__``.
    upd : str
      The value of ``__lastupdate__``.
    """
    ver, upd = 'unknown', 'unknown'
    version_file = join(this_path, '_version.py')
    with open(version_file, "r") as f:
        for line in f.readlines():
            mo = re.match("__version__ = '(.*)'", line)
            lu = re.match("__lastupdate__ = '(.*)'", line)
            if mo:
                ver = mo.group(1)
            if lu:
                upd = lu.group(1)
    return ver, upd


def get_dummy_logger(develop=False):
    """ Useful for testing

    Returns
    -------
    msgs : Messages
      A silent logger, shared with every module
    """
    from vistab import videbug
    from vistab import vimsgs
    debug = videbug.init()
    debug['develop'] = develop
    return vimsgs.get_logger((None, debug, 0))


def make_config_file(cfg_file, parlines=None):
    """ Generate a VISTAB settings file

    Parameters
    ----------
    cfg_file : str
      Name of the settings file to be generated
    parlines : list, optional
      'key = value' lines that change the defaults

    Returns
    -------
    Creates a settings file
    """
    if parlines is None:
        parlines = []
    with open(cfg_file, 'w') as f:
        f.write("# This is a comment line\n")
        f.write("\n")
        f.write("# Change the default settings\n")
        for parline in parlines:
            f.write(parline.rstrip('\n') + '\n')


def dummy_settings(parlines=None):
    """ Load the default settings, apply a few changes and publish them

    Parameters
    ----------
    parlines : list, optional
      'key = value' lines that change the defaults

    Returns
    -------
    argflag : dict
    """
    from vistab import viparse
    argf = viparse.get_argflag_class((None, parlines))
    return viparse.init(argf)
