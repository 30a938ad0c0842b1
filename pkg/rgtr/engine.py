# coding: utf-8
"""
Training loop, batched evaluation and checkpoints.
"""

import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import List, Optional

import torch
from torch.utils.data import DataLoader

from rgtr._config import RunConfig
from rgtr.data import DataError, collate
from rgtr.encoder import EncoderError
from rgtr.evaluation import QueryPrediction, build_report, joint_scores, \
    score_and_rank
from rgtr.log import event
from rgtr.model import RegionGuidedTransformer
from rgtr.objectives import GroundingCriterion
from rgtr.spans import MomentSpan, iou_1d
from rgtr.utils import atomic_open, seed_everything
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

CHECKPOINT_FORMAT = 1
BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"


@dataclass
class EvalResult:
    report: object
    predictions: list
    scatter: list
    correlation: list


@dataclass
class FitResult:
    model: RegionGuidedTransformer
    epoch_losses: List[float] = field(default_factory=list)
    epoch_components: List[dict] = field(default_factory=list)
    best_map: float = -1.0
    last_report: Optional[object] = None


def feature_dims(samples):
    if not samples:
        raise DataError("no samples given")
    first = samples[0]
    return first.video_features.shape[1], first.text_features.shape[1]


def build_model(cfg, anchors, d_v, d_t):
    return RegionGuidedTransformer(cfg.encoder_config(d_v, d_t),
                                   cfg.decoder_config(), anchors)


def build_criterion(cfg):
    return GroundingCriterion(
        cfg.loss_weights(), iou_loss_type=cfg.loss["iou_loss_type"],
        iou_include_background=cfg.loss["iou_include_background"],
        saliency_margin=cfg.loss["saliency_margin"],
        saliency_pairs=cfg.loss["saliency_pairs"],
        iou_head=cfg.model["iou_head"])


def build_optimizer(cfg, model):
    return torch.optim.AdamW(
        [p for p in model.parameters() if p.requires_grad],
        lr=cfg.optim["lr"], weight_decay=cfg.optim["weight_decay"])


def make_loader(samples, batch_size, shuffle=False, seed=0):
    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(samples, batch_size=batch_size, shuffle=shuffle,
                      collate_fn=collate, generator=generator)


def check_dims(model, samples):
    d_v, d_t = feature_dims(samples)
    enc = model.encoder.cfg
    if (d_v, d_t) != (enc.d_v, enc.d_t):
        raise EncoderError("feature dims (d_v=%d, d_t=%d) do not match the "
                           "model (d_v=%d, d_t=%d)"
                           % (d_v, d_t, enc.d_v, enc.d_t))


def train_one_epoch(model, criterion, optimizer, loader, epoch, step=0,
                    clip_norm=None, device="cpu"):
    """Run one epoch; returns ``(mean of every logged loss component, next
    step)``."""
    model.train()
    sums, count = defaultdict(float), 0
    for batch in loader:
        batch = batch.to(device)
        output = model.run(batch)
        loss, components = criterion(output, batch, step=step)
        optimizer.zero_grad()
        loss.backward()
        if clip_norm:
            torch.nn.utils.clip_grad_norm_(model.parameters(), clip_norm)
        optimizer.step()
        event(logger, "step", event="step", epoch=epoch, step=step,
              **components)
        for key, value in components.items():
            sums[key] += value
        count += 1
        step += 1
    return {k: v / max(count, 1) for k, v in sums.items()}, step


@torch.no_grad()
def evaluate(model, samples, batch_size=64, scoring="product",
             nms_threshold=0.8, device="cpu"):
    """Rank the final-layer predictions of every sample and compute the
    :py:class:`~rgtr.evaluation.EvalReport` plus the scatter rows
    ``(query_index, center, width, score, sample_id)`` and correlation rows
    ``(score, conf, gt_iou)`` of all ``K`` queries before NMS."""
    check_dims(model, samples)
    was_training = model.training
    model.eval()
    predictions, gts = [], []
    per_query = defaultdict(list)
    correlation = []
    try:
        for batch in make_loader(samples, batch_size):
            final = model.run(batch.to(device)).final
            spans = final.spans.double().cpu().numpy()
            conf = final.conf.double().cpu().numpy()
            iou_pred = final.iou_pred.double().cpu().numpy()
            for i, sample_id in enumerate(batch.ids):
                sample_gts = batch.moments[i]
                predictions.append(score_and_rank(
                    spans[i], conf[i], iou_pred[i], scoring, nms_threshold,
                    sample_id))
                gts.append(sample_gts)
                scores = joint_scores(conf[i], iou_pred[i], scoring)
                for q, (c, w) in enumerate(spans[i]):
                    span = MomentSpan.clamped(c, w)
                    per_query[q].append(QueryPrediction(sample_id, span,
                                                        float(scores[q])))
                    best = max(iou_1d(span, g) for g in sample_gts)
                    correlation.append((float(scores[q]), float(conf[i][q]),
                                        best))
    finally:
        model.train(was_training)
    report = build_report(predictions, gts, scoring, per_query, correlation)
    scatter = report.diversity.scatter if report.diversity else []
    return EvalResult(report, predictions, scatter, correlation)


def save_checkpoint(path, model, optimizer, cfg, epoch, best_map=-1.0):
    enc = model.encoder.cfg
    state = dict(
        format_version=CHECKPOINT_FORMAT,
        config=cfg.to_dict(),
        model=model.state_dict(),
        optimizer=optimizer.state_dict() if optimizer is not None else None,
        epoch=epoch,
        best_map=best_map,
        anchors=model.anchor_set.static_anchors.tolist(),
        dims=[enc.d_v, enc.d_t],
        rng_state=torch.get_rng_state(),
    )
    with atomic_open(path, 'wb') as fd:
        torch.save(state, fd)
    logger.debug("saved checkpoint %s (epoch %d)", path, epoch)


def load_checkpoint(path, device="cpu"):
    """Return ``(model, cfg, state)``; the model is in eval mode."""
    state = torch.load(path, map_location=device, weights_only=False)
    version = state.get("format_version")
    if version != CHECKPOINT_FORMAT:
        raise ValueError("checkpoint '%s' has format version %r, expected %d"
                         % (path, version, CHECKPOINT_FORMAT))
    cfg = RunConfig(state["config"])
    d_v, d_t = state["dims"]
    model = build_model(cfg, state["anchors"], d_v, d_t)
    model.load_state_dict(state["model"])
    model.to(device)
    model.eval()
    return model, cfg, state


def fit(cfg, train_samples, val_samples, anchors, output_dir, resume=None):
    """Train per ``cfg`` and keep ``best.ckpt`` (by validation mAP) and
    ``last.ckpt`` in ``output_dir``."""
    seed = cfg.optim["seed"]
    device = cfg.optim["device"]
    seed_everything(seed)
    d_v, d_t = feature_dims(train_samples)
    model = build_model(cfg, anchors, d_v, d_t).to(device)
    optimizer = build_optimizer(cfg, model)
    criterion = build_criterion(cfg)
    result = FitResult(model)
    start_epoch = 0
    if resume is not None:
        state = torch.load(resume, map_location=device, weights_only=False)
        model.load_state_dict(state["model"])
        optimizer.load_state_dict(state["optimizer"])
        torch.set_rng_state(state["rng_state"].cpu())
        start_epoch = state["epoch"]
        result.best_map = state.get("best_map", -1.0)
        logger.info("resuming from %s at epoch %d", resume, start_epoch)
    if not val_samples:
        logger.warning("no validation samples; model selection is skipped")
    epochs = cfg.optim["epochs"]
    eval_every = cfg.optim["eval_every"]
    step = start_epoch * len(make_loader(train_samples,
                                         cfg.optim["batch_size"]))
    for epoch in range(start_epoch, epochs):
        loader = make_loader(train_samples, cfg.optim["batch_size"],
                             shuffle=True, seed=seed * 100003 + epoch)
        means, step = train_one_epoch(
            model, criterion, optimizer, loader, epoch, step,
            cfg.optim["clip_norm"], device)
        result.epoch_losses.append(means.get("total", 0.0))
        result.epoch_components.append(means)
        event(logger, "epoch", event="epoch", epoch=epoch,
              loss=means.get("total", 0.0), components=means)
        completed = epoch + 1
        if val_samples and (completed % eval_every == 0
                            or completed == epochs):
            evaluated = evaluate(model, val_samples,
                                 cfg.eval["batch_size"], cfg.eval["scoring"],
                                 cfg.eval["nms_threshold"], device)
            report = evaluated.report
            result.last_report = report
            event(logger, "eval", event="eval", epoch=epoch,
                  **_summary(report))
            if report.map_avg > result.best_map:
                result.best_map = report.map_avg
                save_checkpoint(os.path.join(output_dir, BEST_CHECKPOINT),
                                model, optimizer, cfg, completed,
                                result.best_map)
        save_checkpoint(os.path.join(output_dir, LAST_CHECKPOINT), model,
                        optimizer, cfg, completed, result.best_map)
    return result


def _summary(report):
    out = {"R1@%g" % k: v for k, v in report.r1.items()}
    out.update(("mAP@%g" % k, v) for k, v in report.map_at.items())
    out.update(mAP_avg=report.map_avg, mIoU=report.miou)
    return out
