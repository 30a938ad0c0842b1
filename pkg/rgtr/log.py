# coding: utf-8
"""
JSON Lines logging.

Records passing through :py:class:`JsonLinesFormatter` become one JSON
object per line. Structured fields are attached through ``extra`` under the
key ``record``::

    logger.info("step", extra=dict(record=dict(event="step", loss=1.2)))
"""

import json
import logging
import sys

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


class JsonLinesFormatter(logging.Formatter):

    def format(self, record):
        obj = dict(time=round(record.created, 3), level=record.levelname,
                   logger=record.name)
        structured = getattr(record, "record", None)
        if structured:
            obj.update(structured)
        else:
            obj["message"] = record.getMessage()
        if record.exc_info:
            obj["exc"] = self.formatException(record.exc_info)
        return json.dumps(obj, sort_keys=False, default=str)


class _EventFilter(logging.Filter):
    """Pass only records carrying structured fields."""

    def filter(self, record):
        return bool(getattr(record, "record", None))


def configure_logging(path=None, level=None):
    """Log human readable messages to stderr and, if ``path`` is given,
    structured records as JSON Lines to ``path``. Without ``level`` an
    already configured level is kept (INFO otherwise).

    Returns the file handler (or ``None``) so callers can detach it.

    """
    root = logging.getLogger("rgtr")
    if level is not None:
        root.setLevel(level)
    elif root.level == logging.NOTSET:
        root.setLevel(logging.INFO)
    if not any(getattr(h, "_rgtr_console", False) for h in root.handlers):
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(logging.Formatter(
            "%(asctime)s %(levelname)s %(name)s: %(message)s"))
        console._rgtr_console = True
        root.addHandler(console)
    handler = None
    if path is not None:
        handler = logging.FileHandler(path, mode='a')
        handler.setFormatter(JsonLinesFormatter())
        handler.addFilter(_EventFilter())
        root.addHandler(handler)
    return handler


def event(logger, message, **fields):
    """Emit ``message`` with ``fields`` as a structured record."""
    logger.info(message, extra=dict(record=fields))
