#!/usr/bin/env python
# coding: utf-8

from __future__ import print_function

import argparse
import ast
import json
import logging
import os
import sys
import textwrap

from rgtr._config import ConfigurationError, FallbackFileType, \
    load_run_config
from rgtr.data import DataError
from rgtr.decoder import INIT_STRATEGIES
from rgtr.evaluation import SCORING_MODES
from rgtr.harness import SWEEP_AXES, cmd_eval, cmd_init_anchors, \
    cmd_sweep, cmd_synth_data, cmd_train
from rgtr.log import configure_logging
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


EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2


class ArgparseFallbackFileType(argparse.FileType, FallbackFileType):

    def __init__(self, *args, **kwargs):
        FallbackFileType.__init__(self, *args, **kwargs)
        argparse.FileType.__init__(self, *args, **kwargs)

    def __call__(self, path_or_filename):
        try:
            return argparse.FileType.__call__(self, path_or_filename)
        except argparse.ArgumentTypeError as err:
            try:
                return FallbackFileType.__call__(self, path_or_filename)
            except IOError:
                raise err


def _literal(value):
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        return value


def _create_parsers():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("-c", "--config", type=ArgparseFallbackFileType('r'),
                        help="configuration file (name or full qualified "
                             "path)")
    parent.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override a configuration entry given by its "
                             "dotted path, e.g. model.K=10")
    parent.add_argument("-v", "--verbose", action="store_true",
                        help="log debug messages")
    parser = argparse.ArgumentParser(
        prog="rgtr",
        description="region-guided transformer for temporal sentence "
                    "grounding",
        epilog=textwrap.dedent('''\
        Configuration file:

        The configuration file is python source assigning the sections
        data, model, loss, optim and eval as dicts plus the scalars
        output_dir and preset, e.g.

            preset = "charades"
            model = dict(D=128)
            optim = dict(epochs=50, seed=1)

        Entries given with --set are applied afterwards, the environment
        variable RGTR_SEED last.
        '''),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version",
                        version="%(prog)s {} ({})".format(__version__,
                                                          __revision__))
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("synth-data", parents=[parent],
                       help="write the synthetic dataset as manifest")
    p.add_argument("out", help="manifest path (.jsonl)")

    p = sub.add_parser("init-anchors", parents=[parent],
                       help="initialize anchors from ground-truth spans")
    p.add_argument("manifest", help="training manifest")
    p.add_argument("out", help="anchor file (.json)")
    p.add_argument("-K", type=int, default=None,
                   help="number of anchor pairs (default: model.K)")
    p.add_argument("--strategy", choices=INIT_STRATEGIES, default=None,
                   help="initialization strategy (default: "
                        "model.init_strategy)")
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (default: optim.seed)")

    p = sub.add_parser("train", parents=[parent], help="train a model")
    p.add_argument("--resume", metavar="CHECKPOINT",
                   help="continue training from a checkpoint")

    p = sub.add_parser("eval", parents=[parent],
                       help="evaluate a checkpoint")
    p.add_argument("checkpoint", help="checkpoint file")
    p.add_argument("--manifest",
                   help="samples to evaluate (default: validation split)")
    p.add_argument("--scoring", choices=SCORING_MODES,
                   help="ranking score (default: eval.scoring of the "
                        "checkpoint)")
    p.add_argument("--nms-threshold", type=float, dest="nms_threshold",
                   help="non maximum suppression IoU threshold")
    p.add_argument("-o", "--out-dir", dest="out_dir", default=None,
                   help="directory receiving report.json, scatter.csv and "
                        "correlation.csv")

    p = sub.add_parser("sweep", parents=[parent],
                       help="train and evaluate one run per axis value")
    p.add_argument("axis", choices=sorted(SWEEP_AXES))
    p.add_argument("values", nargs='+', type=_literal)
    p.add_argument("-o", "--out", default=None,
                   help="summary table (default: <output_dir>/sweep-<axis>"
                        ".csv)")
    return parent, parser


def create_parser():
    return _create_parsers()[1]


def parse_args(argv):
    """Parse ``argv`` (including the program name) into ``(ns, cfg)``."""
    ns = create_parser().parse_args(argv[1:])
    base = None
    if ns.config is None:
        # user defaults from ~/.config/rgtr/default
        from rgtr.config import config as base
    cfg = load_run_config(ns.config, ns.overrides, base=base)
    return ns, cfg


def run(ns, cfg):
    if ns.command == "synth-data":
        cmd_synth_data(cfg, ns.out)
    elif ns.command == "init-anchors":
        cmd_init_anchors(ns.manifest,
                         ns.K if ns.K is not None else cfg.model["K"],
                         ns.strategy or cfg.model["init_strategy"],
                         ns.seed if ns.seed is not None
                         else cfg.optim["seed"], ns.out)
    elif ns.command == "train":
        cmd_train(cfg, resume=ns.resume)
    elif ns.command == "eval":
        result = cmd_eval(ns.checkpoint, ns.manifest, ns.scoring,
                          ns.nms_threshold, ns.out_dir,
                          cfg.optim["device"])
        print(json.dumps(result.report.to_dict(), indent=2, sort_keys=True))
    elif ns.command == "sweep":
        out = ns.out or os.path.join(cfg.output_dir, "sweep-%s.csv" % ns.axis)
        cmd_sweep(cfg, ns.axis, ns.values, out)


def main(argv):
    """Entry point; returns 0 on success, 1 on invalid configuration or
    data and 2 on any other failure."""
    try:
        ns, cfg = parse_args(argv)
        configure_logging(level=logging.DEBUG if ns.verbose
                          else logging.INFO)
        run(ns, cfg)
    except (ConfigurationError, DataError) as err:
        print("rgtr: error: %s" % err, file=sys.stderr)
        return EXIT_INVALID
    except Exception as err:  # pylint: disable=broad-except
        logging.getLogger(__name__).debug("failure", exc_info=True)
        print("rgtr: error: %s: %s" % (type(err).__name__, err),
              file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main(sys.argv))
