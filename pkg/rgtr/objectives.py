# coding: utf-8
"""
Prediction heads, set matching and the training objective.

The objective is::

    L = L_mom + lambda_sal * L_sal + lambda_align * L_align
        + lambda_iou * L_iou

where the moment loss ``L_mom`` (span L1, generalized IoU and focal
classification) and the IoU regression loss ``L_iou`` are summed over all
decoder layers, each layer matched to the ground truth independently, and
the encoder losses are added once.
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import torch
from torch import nn
import torch.nn.functional as F
from scipy.optimize import linear_sum_assignment

from rgtr.attention import MLP
from rgtr.encoder import alignment_loss, saliency_loss, SALIENCY_MARGIN
from rgtr.spans import generalized_temporal_iou, paired_giou, paired_iou, \
    span_cxw_to_xx
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


IOU_LOSS_TYPES = ("L2", "L1", "Huber")
HUBER_DELTA = 0.1


class TrainingError(RuntimeError):
    """A loss component is not finite."""

    def __init__(self, component, step=None, value=None):
        self.component = component
        self.step = step
        self.value = value
        where = "" if step is None else " at step %d" % step
        super(TrainingError, self).__init__(
            "loss component '%s' is not finite (%r)%s"
            % (component, value, where))


@dataclass
class LossWeights:
    l1: float = 10.0
    giou: float = 1.0
    focal: float = 1.0
    focal_alpha: float = 0.25
    focal_gamma: float = 2.0
    saliency: float = 1.0
    alignment: float = 0.3
    iou: float = 1.0

    def validate(self):
        for name, value in vars(self).items():
            if value < 0:
                raise ValueError("loss weight '%s' must be >= 0, got %r"
                                 % (name, value))


@dataclass
class HeadOutput:
    spans: torch.Tensor
    logits: torch.Tensor
    conf: torch.Tensor
    iou_pred: torch.Tensor


@dataclass
class MatchResult:
    """Per sample ``(query_indices, gt_indices)`` int64 tensors; queries not
    listed are background."""
    indices: List[Tuple[torch.Tensor, torch.Tensor]]

    @property
    def num_matched(self):
        return sum(len(q) for q, _ in self.indices)

    def src_permutation(self):
        batch_idx = torch.cat([torch.full_like(q, i)
                               for i, (q, _) in enumerate(self.indices)])
        query_idx = torch.cat([q for q, _ in self.indices])
        return batch_idx, query_idx

    def foreground(self, num_queries, device=None):
        mask = torch.zeros(len(self.indices), num_queries, dtype=torch.bool,
                           device=device)
        batch_idx, query_idx = self.src_permutation()
        mask[batch_idx, query_idx] = True
        return mask

    def matched_targets(self, targets):
        return torch.cat([t[g] for t, (_, g) in zip(targets, self.indices)])


class PredictionHead(nn.Module):
    """Offset, confidence and IoU heads shared by every decoder layer.

    The last offset layer starts at zero so the first forward pass leaves
    the anchors where they are; the confidence and IoU biases start at zero
    so zero content maps to probability 0.5. Without ``with_iou`` the head
    has no IoU branch and predicts an IoU of one everywhere.

    """

    def __init__(self, D, with_iou=True):
        super(PredictionHead, self).__init__()
        self.offset_net = MLP(D, D, 2, 3)
        self.class_head = nn.Linear(D, 1)
        self.iou_head = nn.Linear(D, 1) if with_iou else None
        nn.init.zeros_(self.offset_net.layers[-1].weight)
        nn.init.zeros_(self.offset_net.layers[-1].bias)
        nn.init.zeros_(self.class_head.bias)
        if with_iou:
            nn.init.zeros_(self.iou_head.bias)

    def offsets(self, content):
        return self.offset_net(content)

    def forward(self, content, anchors_out):
        """``B x K x D`` content and refined anchors to a
        :py:class:`HeadOutput`; the refined anchors are the spans."""
        logits = self.class_head(content).squeeze(-1)
        if self.iou_head is None:
            iou_pred = torch.ones_like(logits)
        else:
            iou_pred = self.iou_head(content).squeeze(-1).sigmoid()
        return HeadOutput(spans=anchors_out, logits=logits,
                          conf=logits.sigmoid(), iou_pred=iou_pred)


def sigmoid_focal_loss(logits, targets, alpha=0.25, gamma=2.0):
    """Element-wise focal loss on logits; no reduction."""
    prob = logits.sigmoid()
    ce = F.binary_cross_entropy_with_logits(logits, targets,
                                            reduction="none")
    p_t = prob * targets + (1 - prob) * (1 - targets)
    loss = ce * (1 - p_t) ** gamma
    if alpha >= 0:
        loss = (alpha * targets + (1 - alpha) * (1 - targets)) * loss
    return loss


def match_cost(spans, conf, gts, weights):
    """``K x G`` matching cost of one sample."""
    l1 = torch.cdist(spans, gts, p=1)
    giou = generalized_temporal_iou(span_cxw_to_xx(spans),
                                    span_cxw_to_xx(gts))
    return weights.l1 * l1 + weights.giou * (1 - giou) + \
        weights.focal * (1 - conf)[:, None]


def linear_assignment(cost):
    """Minimum-cost assignment of a 2-d cost array, rows ascending."""
    rows, cols = linear_sum_assignment(np.asarray(cost, dtype=np.float64))
    order = np.argsort(rows, kind="stable")
    return rows[order], cols[order]


@torch.no_grad()
def hungarian_match(spans, conf, targets, weights):
    """Match ``B x K`` predictions against per-sample ``G_b x 2`` targets."""
    indices = []
    for sample_spans, sample_conf, gts in zip(spans, conf, targets):
        if len(gts) == 0:
            raise ValueError("matching needs at least one ground-truth span")
        cost = match_cost(sample_spans.double(), sample_conf.double(),
                          gts.to(sample_spans.device).double(), weights)
        rows, cols = linear_assignment(cost.cpu().numpy())
        indices.append((torch.as_tensor(rows, dtype=torch.int64),
                        torch.as_tensor(cols, dtype=torch.int64)))
    return MatchResult(indices)


def moment_loss(spans, logits, targets, match, weights):
    """Return ``(total, parts)`` where ``parts`` holds the unweighted span
    L1, gIoU and focal terms."""
    batch_idx, query_idx = match.src_permutation()
    src = spans[batch_idx, query_idx]
    tgt = match.matched_targets(targets).to(src)
    num_matched = max(match.num_matched, 1)
    l1 = (src - tgt).abs().sum(-1).mean()
    giou = (1 - paired_giou(src, tgt)).mean()
    labels = match.foreground(spans.shape[1], spans.device).to(logits.dtype)
    focal = sigmoid_focal_loss(logits, labels, weights.focal_alpha,
                               weights.focal_gamma).sum() / num_matched
    total = weights.l1 * l1 + weights.giou * giou + weights.focal * focal
    return total, dict(span_l1=l1, span_giou=giou, focal=focal)


@torch.no_grad()
def iou_targets(spans, targets, match):
    """``B x K`` IoU of every matched prediction with its ground truth, 0 for
    background queries."""
    out = spans.new_zeros(spans.shape[:2])
    batch_idx, query_idx = match.src_permutation()
    src = spans[batch_idx, query_idx].detach()
    out[batch_idx, query_idx] = paired_iou(
        src, match.matched_targets(targets).to(src))
    return out


def iou_loss(iou_pred, targets, match, loss_type="L2",
             include_background=False):
    if loss_type not in IOU_LOSS_TYPES:
        raise ValueError("unknown IoU loss type '%s'" % loss_type)
    if include_background:
        mask = torch.ones_like(iou_pred, dtype=torch.bool)
    else:
        mask = match.foreground(iou_pred.shape[1], iou_pred.device)
    if not bool(mask.any()):
        return iou_pred.sum() * 0.0
    pred, tgt = iou_pred[mask], targets[mask]
    if loss_type == "L2":
        return ((pred - tgt) ** 2).mean()
    if loss_type == "L1":
        return (pred - tgt).abs().mean()
    return F.huber_loss(pred, tgt, delta=HUBER_DELTA)


def check_finite(components, step=None):
    for name, value in components.items():
        value = float(value)
        if not math.isfinite(value):
            raise TrainingError(name, step, value)


def overall_loss(components, weights, step=None):
    """Weighted sum of ``moment``, ``saliency``, ``alignment`` and ``iou``
    components."""
    check_finite(components, step)
    return components["moment"] + \
        weights.saliency * components["saliency"] + \
        weights.alignment * components["alignment"] + \
        weights.iou * components["iou"]


class GroundingCriterion(object):
    """Computes the overall loss of a model output against a batch.

    Every decoder layer is matched and supervised; the returned components
    dict carries the summed moment/IoU terms, the encoder terms, the final
    layer's unweighted moment parts and the weighted total as floats.

    """

    def __init__(self, weights=None, iou_loss_type="L2",
                 iou_include_background=False,
                 saliency_margin=SALIENCY_MARGIN, saliency_pairs=64,
                 iou_head=True):
        self.weights = weights or LossWeights()
        self.weights.validate()
        if iou_loss_type not in IOU_LOSS_TYPES:
            raise ValueError("unknown IoU loss type '%s'" % iou_loss_type)
        self.iou_loss_type = iou_loss_type
        self.iou_include_background = iou_include_background
        self.saliency_margin = saliency_margin
        self.saliency_pairs = saliency_pairs
        self.iou_head = iou_head

    def __call__(self, output, batch, step=None):
        targets = [t.to(output.encoder.fused) for t in batch.targets]
        moment = 0.0
        iou = 0.0
        parts = {}
        for head_out in output.predictions:
            match = hungarian_match(head_out.spans, head_out.conf, targets,
                                    self.weights)
            layer_moment, parts = moment_loss(head_out.spans, head_out.logits,
                                              targets, match, self.weights)
            moment = moment + layer_moment
            if not self.iou_head:
                continue
            iou = iou + iou_loss(head_out.iou_pred,
                                 iou_targets(head_out.spans, targets, match),
                                 match, self.iou_loss_type,
                                 self.iou_include_background)
        enc = output.encoder
        components = dict(
            moment=moment,
            saliency=saliency_loss(enc.saliency_scores,
                                   batch.saliency_labels.to(
                                       enc.saliency_scores),
                                   enc.video_mask, self.saliency_margin,
                                   self.saliency_pairs),
            alignment=alignment_loss(enc.global_video, enc.global_text),
            iou=iou,
        )
        total = overall_loss(components, self.weights, step)
        logged = {k: float(v) for k, v in components.items()}
        logged.update((k, float(v)) for k, v in parts.items())
        logged["total"] = float(total)
        return total, logged
