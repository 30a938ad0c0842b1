# -*- coding: utf-8 -*-
#
# rgtr documentation build configuration file.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

from rgtr._version import __version__, __revision__  # noqa: E402


extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinxarg.ext',
]

source_suffix = '.rst'
master_doc = 'index'

project = u'rgtr'
copyright = u'2026, rgtr developers'
author = u'rgtr developers'

# The short X.Y version and the full version including git revision.
version = __version__
release = __revision__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'alabaster'
htmlhelp_basename = 'rgtrdoc'

latex_documents = [
    (master_doc, 'rgtr.tex', u'rgtr Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'rgtr', u'rgtr Documentation', [author], 1),
]

texinfo_documents = [
    (master_doc, 'rgtr', u'rgtr Documentation', author, 'rgtr',
     'Region-guided transformer for temporal sentence grounding.',
     'Miscellaneous'),
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'torch': ('https://pytorch.org/docs/stable/', None),
}
