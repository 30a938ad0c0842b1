# coding: utf-8

import io
import os
import random
import tempfile
from contextlib import contextmanager

import numpy as np
import torch
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


def execute(path_or_file, globals=None, locals=None, cls=io.FileIO):
    """Execute a python configuration file and return its namespace."""
    ns = locals or {}
    if isinstance(path_or_file, io.IOBase):
        fileobj = path_or_file
    else:
        fileobj = cls(path_or_file)
    try:
        exec(compile(fileobj.read(), fileobj.name, "exec"), globals, ns)
    finally:
        fileobj.close()
    return ns


def seed_everything(seed):
    """Seed python, numpy and torch generators and request deterministic
    kernels."""
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


@contextmanager
def atomic_open(path, mode='w', **kwargs):
    """Open a temporary file next to ``path`` and rename it onto ``path``
    once the block finished without raising.

    Readers never observe a partially written file::

        with atomic_open("run/last.ckpt", 'wb') as fd:
            torch.save(state, fd)

    """
    dirname = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(dirname):
        os.makedirs(dirname)
    fd, tmppath = tempfile.mkstemp(prefix=".tmp-", dir=dirname)
    os.close(fd)
    try:
        with open(tmppath, mode, **kwargs) as fileobj:
            yield fileobj
        os.replace(tmppath, path)
    except BaseException:
        if os.path.exists(tmppath):
            os.remove(tmppath)
        raise
