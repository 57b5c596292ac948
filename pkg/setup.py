#!/usr/bin/env python
# Licensed under a 3-clause BSD style license - see LICENSE.rst
from __future__ import absolute_import, division, print_function
#
# Standard imports
#
import sys
import glob, os
from setuptools import setup

# Check dependencies
if len(sys.argv) > 1 and sys.argv[1] != 'egg_info':
    from vistab import vicheck
    vicheck.version_check()

#
# Begin setup
#
setup_keywords = dict()
#
# THESE SETTINGS NEED TO BE CHANGED FOR EVERY PRODUCT.
#
setup_keywords['name'] = 'vistab'
setup_keywords['description'] = 'Stability-based generalization bounds for variational inference'
setup_keywords['author'] = 'VISTAB Collaboration'
setup_keywords['license'] = 'BSD'
#
# END OF SETTINGS THAT NEED TO BE CHANGED.
#
setup_keywords['version'] = '0.3.dev0'
#
# Use README.md as long_description.
#
setup_keywords['long_description'] = ''
if os.path.exists('README.md'):
    with open('README.md') as readme:
        setup_keywords['long_description'] = readme.read()
#
# Set other keywords for the setup function.  These are automated, & should
# be left alone unless you are an expert.
#
setup_keywords['provides'] = [setup_keywords['name']]
setup_keywords['python_requires'] = '>=3.7'
setup_keywords['install_requires'] = ['numpy>=1.17', 'scipy>=1.4', 'astropy>=4.0', 'pyyaml>=5.1', 'h5py>=2.10', 'packaging>=20.0']
setup_keywords['zip_safe'] = False
setup_keywords['packages'] = ['vistab', 'vistab.scripts', 'vistab.tests']
setup_keywords['setup_requires'] = ['pytest-runner']
setup_keywords['tests_require'] = ['pytest']

# Command-line scripts
setup_keywords['entry_points'] = {'console_scripts': ['run_vistab = vistab.scripts.run_vistab:entry']}

#
# Add internal data directories.
#
settings = glob.glob('vistab/settings/settings.*')
settings = ['/'.join(path.split('/')[1:]) for path in settings]
setup_keywords['package_data'] = {'vistab': settings,
                                  '': ['*.rst', '*.txt']}
setup_keywords['include_package_data'] = True

#
# Run setup command.
#
setup(**setup_keywords)
