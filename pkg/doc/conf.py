# -*- coding: utf-8 -*-
#
# smoothstep documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os

# The package lives one level up from the documentation root.
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
source_encoding = 'utf-8-sig'
master_doc = 'index'

project = u'smoothstep'
copyright = u'2026, The smoothstep authors'
author = u'The smoothstep authors'

# |version| and |release| are passed in by ``setup.py build_sphinx``.

language = None
exclude_patterns = ['build']
pygments_style = 'sphinx'
todo_include_todos = False

autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'smoothstepdoc'

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'smoothstep', u'smoothstep Documentation',
     [author], 1)
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}
