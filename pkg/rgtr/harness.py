# coding: utf-8
"""
Experiment commands behind the ``rgtr`` command line.

Each ``cmd_*`` function takes plain arguments and a
:py:class:`~rgtr._config.RunConfig`, so it can be driven from python as
well as from :py:mod:`rgtr.main`.
"""

import csv
import json
import logging
import math
import os

from rgtr._config import ConfigurationError
from rgtr.data import generate_synthetic_dataset, load_manifest, \
    split_dataset, write_manifest
from rgtr.decoder import init_anchors
from rgtr.engine import evaluate, fit, load_checkpoint
from rgtr.log import configure_logging, event
from rgtr.spans import load_anchors, save_anchors
from rgtr.utils import atomic_open
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


logger = logging.getLogger(__name__)

SWEEP_AXES = {
    "K": "model.K",
    "init_strategy": "model.init_strategy",
    "scoring": "eval.scoring",
    "iou_loss_type": "loss.iou_loss_type",
    "region_guided_attention": "model.region_guided_attention",
    "explicit_anchors": "model.explicit_anchors",
    "iou_head": "model.iou_head",
}
SWEEP_HEADER = ("value", "R1@0.5", "R1@0.7", "mAP_avg")
ANCHOR_FILE = "anchors.json"
TRAIN_LOG = "train.jsonl"


def load_samples(cfg):
    """Return ``(train, val)`` samples for ``cfg``."""
    data = cfg.data
    if data["manifest"]:
        samples = load_manifest(data["manifest"])
        if data["val_manifest"]:
            return samples, load_manifest(data["val_manifest"])
    else:
        samples = generate_synthetic_dataset(cfg.synth_config())
    return split_dataset(samples, data["val_size"])


def train_spans(samples):
    return [m for s in samples for m in s.moments]


def resolve_anchors(cfg, train, output_dir):
    """Load the configured anchor file or initialize anchors from the
    training spans and persist them in ``output_dir``.

    Without explicit anchors the learnable queries start from random spans.

    """
    K = cfg.model["K"]
    anchor_file = cfg.data["anchor_file"]
    if anchor_file:
        anchors = load_anchors(anchor_file)
        if len(anchors) != K:
            raise ConfigurationError("Anchor file '%s' holds %d anchors but "
                                     "model.K is %d." % (anchor_file,
                                                         len(anchors), K))
        return anchors
    strategy = cfg.model["init_strategy"] if cfg.model["explicit_anchors"] \
        else "random"
    anchors = init_anchors(train_spans(train), K, strategy, cfg.optim["seed"])
    save_anchors(os.path.join(output_dir, ANCHOR_FILE), anchors)
    return anchors


def cmd_synth_data(cfg, out):
    """Write the configured synthetic dataset to manifest ``out``."""
    samples = generate_synthetic_dataset(cfg.synth_config())
    write_manifest(samples, out)
    return out


def cmd_init_anchors(manifest, K, strategy, seed, out):
    """Initialize ``K`` anchors from every ground-truth span in
    ``manifest`` and write them to ``out``."""
    samples = load_manifest(manifest)
    anchors = init_anchors(train_spans(samples), K, strategy, seed)
    save_anchors(out, anchors)
    logger.info("wrote %d %s anchors to %s", len(anchors), strategy, out)
    return anchors


def cmd_train(cfg, resume=None, samples=None):
    """Train one model; ``samples`` optionally supplies ``(train, val)``."""
    output_dir = cfg.output_dir
    if not os.path.isdir(output_dir):
        os.makedirs(output_dir)
    handler = configure_logging(os.path.join(output_dir, TRAIN_LOG))
    try:
        train, val = samples if samples is not None else load_samples(cfg)
        anchors = resolve_anchors(cfg, train, output_dir)
        event(logger, "start", event="start", config=cfg.to_dict(),
              num_train=len(train), num_val=len(val))
        return fit(cfg, train, val, anchors, output_dir, resume=resume)
    finally:
        if handler is not None:
            logging.getLogger("rgtr").removeHandler(handler)
            handler.close()


def write_eval_outputs(result, out_dir):
    """Write ``report.json``, ``scatter.csv`` and ``correlation.csv``."""
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    with atomic_open(os.path.join(out_dir, "report.json"), 'w') as fd:
        json.dump(result.report.to_dict(), fd, indent=2, sort_keys=True)
        fd.write('\n')
    with atomic_open(os.path.join(out_dir, "scatter.csv"), 'w',
                     newline='') as fd:
        writer = csv.writer(fd)
        writer.writerow(("query_index", "center", "width", "score",
                         "sample_id"))
        writer.writerows(result.scatter)
    with atomic_open(os.path.join(out_dir, "correlation.csv"), 'w',
                     newline='') as fd:
        writer = csv.writer(fd)
        writer.writerow(("score", "gt_iou"))
        writer.writerows((score, iou) for score, _, iou in result.correlation)


def cmd_eval(checkpoint, manifest=None, scoring=None, nms_threshold=None,
             out_dir=None, device="cpu"):
    """Evaluate ``checkpoint`` on ``manifest`` (default: the validation
    split of the checkpoint's configuration)."""
    model, cfg, _ = load_checkpoint(checkpoint, device)
    if manifest:
        samples = load_manifest(manifest)
    else:
        samples = load_samples(cfg)[1]
    scoring = scoring or cfg.eval["scoring"]
    nms_threshold = nms_threshold if nms_threshold is not None \
        else cfg.eval["nms_threshold"]
    result = evaluate(model, samples, cfg.eval["batch_size"], scoring,
                      nms_threshold, device)
    if out_dir:
        write_eval_outputs(result, out_dir)
    event(logger, "eval", event="eval", checkpoint=checkpoint,
          **result.report.to_dict())
    return result


def _metric_row(value, report):
    if report is None:
        return (value, "", "", "")
    return (value, report.r1[0.5], report.r1[0.7], report.map_avg)


def cmd_sweep(cfg, axis, values, out):
    """Train and evaluate one run per axis value and write the summary
    table ``out``. Runs share the dataset and seed; a failing run is
    logged and leaves an empty row."""
    if axis not in SWEEP_AXES:
        raise ConfigurationError("Unknown sweep axis '%s' (choose from %s)."
                                 % (axis, ", ".join(sorted(SWEEP_AXES))))
    samples = load_samples(cfg)
    rows = []
    for value in values:
        try:
            run_cfg = cfg.copy()
            run_cfg.set(SWEEP_AXES[axis], value)
            run_cfg.output_dir = os.path.join(cfg.output_dir,
                                              "%s-%s" % (axis, value))
            result = cmd_train(run_cfg, samples=samples)
            report = result.last_report
            if report is None or not math.isfinite(report.map_avg):
                raise RuntimeError("run produced no validation report")
        except Exception as err:  # pylint: disable=broad-except
            logger.error("sweep run %s=%r failed: %s", axis, value, err)
            report = None
        rows.append(_metric_row(value, report))
    with atomic_open(out, 'w', newline='') as fd:
        writer = csv.writer(fd)
        writer.writerow(SWEEP_HEADER)
        writer.writerows(rows)
    return rows
