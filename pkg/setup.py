#!/usr/bin/env python
# -*- coding: utf-8 -*-

import sys
import os
import os.path
from distutils import log
from setuptools import Command
from setuptools import find_packages, setup

import vcversioner

__author__ = "rgtr developers"
__version__ = vcversioner.find_version(
    version_module_paths=[os.path.join("rgtr", "_version.py")]).version
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


def read_requirements(name):
    with open(name, 'r') as fd:
        return [line.strip() for line in fd
                if line.strip() and not line.startswith(('#', '-r'))]


requirements = read_requirements("requirements.txt")
requirements_tests = read_requirements("requirements-tests.txt")
requirements_doc = read_requirements("requirements-doc.txt")
requirements_all = sorted(set(requirements_tests + requirements_doc))


with open("README.rst", 'r') as fd:
    long_description = fd.read()


class test(Command):
    description = "run pytest test suite"

    # List of option tuples: long name, short name (None if no short
    # name), and help string.
    user_options = [
        ("slow", None, "include the toy training acceptance runs"),
    ]

    def initialize_options(self):
        self.slow = None

    def finalize_options(self):
        pass

    def run(self):
        import pytest
        import rgtr
        log.info("rgtr version: %s", rgtr.__version__)
        if self.slow:
            os.environ["RGTR_SLOW_TESTS"] = "1"
        sys.exit(pytest.main([os.path.join("test", "rgtr"), "-v"]))


def find_scripts(where="bin"):
    return [os.path.join(where, name) for name in os.listdir(where) if
            os.path.isfile(os.path.join(where, name))]


setup(cmdclass={
        "test": test,
      },
      name="rgtr",
      version=__version__,
      description="rgtr, region-guided transformer for temporal sentence "
                  "grounding",
      long_description=long_description,
      author="rgtr developers",
      license="LGPL-3.0+",
      scripts=find_scripts(),
      packages=find_packages(exclude=["test", "test.*"]),
      include_package_data=True,
      python_requires=">=3.8",
      setup_requires=["vcversioner"],
      install_requires=requirements,
      extras_require=dict(
          all=requirements_all,
          doc=requirements_doc,
          tests=requirements_tests,
      ),
      classifiers=[
          "Development Status :: 3 - Alpha",
          "Intended Audience :: Science/Research",
          "License :: OSI Approved :: GNU Lesser General Public License v3 or later (LGPLv3+)",
          "Natural Language :: English",
          "Operating System :: OS Independent",
          "Programming Language :: Python",
          "Programming Language :: Python :: 3",
          "Topic :: Scientific/Engineering :: Artificial Intelligence",
      ],
     )
