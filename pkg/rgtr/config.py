# coding: utf-8
"""
This module provides a module level :py:class:`~rgtr._config.RunConfig`
instance ``config`` for interactive use. It is populated from the default
configuration file ``~/.config/rgtr/default`` if that file exists and holds
the built-in defaults otherwise.

Internal rgtr modules should not use this module and import directly from
`_config` instead. The command line copies ``config`` as the starting
point of a run when no configuration file is given.
"""

from os import path

from rgtr._config import CONFIGFILE, RunConfig, read_config
# pylint: disable=unused-import
# pylint: disable=protected-access
# noinspection PyProtectedMember
from rgtr._version import __version__, __revision__


__author__ = "rgtr developers"
__copyright__ = """Copyright 2026, rgtr developers

This file is part of rgtr, a region-guided transformer for temporal sentence
grounding.

rgtr is free software: you can redistribute it and/or modify
it under the terms of the GNU Lesser General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

rgtr is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU Lesser General Public License for more details.

You should have received a copy of the GNU Lesser General Public License
along with rgtr. If not, see <http://www.gnu.org/licenses/>.

"""

config = RunConfig(read_config(CONFIGFILE) if path.isfile(CONFIGFILE)
                   else None)
