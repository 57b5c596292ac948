# -*- coding: utf-8 -*-
#
# VISTAB documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os

# The package sits one directory up
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

# Napoleon settings
napoleon_numpy_docstring = True
napoleon_include_private_with_doc = False
napoleon_include_special_with_doc = True
napoleon_use_param = True
napoleon_use_rtype = True

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = u'VISTAB'
copyright = u'2024, the VISTAB Collaboration'
author = u'the VISTAB Collaboration'

from vistab._version import __version__
version = '.'.join(__version__.split('.')[:2])
release = __version__

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinxdoc'
html_static_path = ['_static']
html_sidebars = {
  '**': ['localtoc.html', 'globaltoc.html', 'relations.html', 'sourcelink.html']
}
htmlhelp_basename = 'VISTABdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
  (master_doc, 'VISTAB.tex', u'VISTAB Documentation',
   u'the VISTAB Collaboration', 'manual'),
]

man_pages = [
    (master_doc, 'vistab', u'VISTAB Documentation',
     [author], 1)
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable/', None)}
