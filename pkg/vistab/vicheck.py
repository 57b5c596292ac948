"""
Version checking.
"""

from __future__ import absolute_import, division, print_function

from packaging.version import Version

# check these
import numpy
import scipy
import astropy
import h5py
import yaml


class VersionError(Exception):
    pass

minimum_versions = {'numpy': '1.17.0', 'scipy': '1.4.0', 'astropy': '4.0', 'h5py': '2.10', 'yaml': '5.1'}


def version_check():
    """
    Raises an error if there is a mismatched dependency.
    """
    # loop through dependencies and versions
    for dep, ver in minimum_versions.items():
        if Version(globals()[dep].__version__) < Version(ver):
            raise VersionError('Update ' + dep + ' to at least version ' + ver + '!')
