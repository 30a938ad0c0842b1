# coding: utf-8
"""
Ranking, metrics and diagnostics.

Predictions are ranked by a joint score of confidence and predicted IoU,
pruned by non maximum suppression and evaluated with Recall@1 at several
IoU thresholds, detection-style mean average precision and the mean IoU of
the top-1 prediction. Two diagnostics support model analysis: how diverse
the spans proposed by the individual moment queries are, and how well the
ranking score tracks the ground-truth IoU.
"""

import logging
from collections import defaultdict, namedtuple
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np

from rgtr.spans import MomentSpan, ScoredSpan, iou_1d, nms
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

SCORING_MODES = ("product", "sum", "conf_only")
R1_THRESHOLDS = (0.3, 0.5, 0.7)
MAP_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
NMS_THRESHOLD = 0.8


class EvaluationError(ValueError):
    """Metric input is degenerate."""


QueryPrediction = namedtuple("QueryPrediction", "sample_id span score")


@dataclass
class SamplePrediction:
    sample_id: str
    ranked: List[ScoredSpan]

    @property
    def top1(self):
        return self.ranked[0] if self.ranked else None


@dataclass
class QueryStats:
    query_index: int
    count: int
    center_mean: float
    center_std: float
    width_mean: float
    width_std: float


@dataclass
class DiversityReport:
    queries: List[QueryStats]
    redundancy: float
    scatter: List[Tuple[int, float, float, float, str]] = field(
        default_factory=list, repr=False)

    @property
    def mean_center_std(self):
        return float(np.mean([q.center_std for q in self.queries])) \
            if self.queries else 0.0

    @property
    def mean_width_std(self):
        return float(np.mean([q.width_std for q in self.queries])) \
            if self.queries else 0.0

    def to_dict(self):
        return dict(redundancy=self.redundancy,
                    mean_center_std=self.mean_center_std,
                    mean_width_std=self.mean_width_std,
                    queries=[asdict(q) for q in self.queries])


@dataclass
class EvalReport:
    r1: Dict[float, float]
    map_at: Dict[float, float]
    map_avg: float
    miou: float
    num_samples: int
    diversity: Optional[DiversityReport] = None
    correlation: Optional[Tuple[float, float]] = None
    confidence_correlation: Optional[Tuple[float, float]] = None
    scoring: str = "product"

    def to_dict(self):
        def fmt(mapping):
            return {"%g" % k: v for k, v in mapping.items()}

        def line(fit):
            return None if fit is None else dict(slope=fit[0],
                                                 intercept=fit[1])
        return dict(
            num_samples=self.num_samples,
            scoring=self.scoring,
            r1=fmt(self.r1),
            map=fmt(self.map_at),
            map_avg=self.map_avg,
            miou=self.miou,
            diversity=None if self.diversity is None else
            self.diversity.to_dict(),
            correlation=line(self.correlation),
            confidence_correlation=line(self.confidence_correlation),
        )


def joint_scores(conf, iou_pred, scoring="product"):
    conf = np.asarray(conf, dtype=np.float64)
    iou_pred = np.asarray(iou_pred, dtype=np.float64)
    if scoring == "product":
        return conf * iou_pred
    if scoring == "sum":
        return conf + iou_pred
    if scoring == "conf_only":
        return conf
    raise ValueError("unknown scoring mode '%s'" % scoring)


def score_and_rank(spans, conf, iou_pred, scoring="product",
                   nms_threshold=NMS_THRESHOLD, sample_id=None):
    """Rank the ``K`` final-layer predictions of one sample.

    ``spans`` is a sequence of ``(center, width)`` pairs, ``conf`` and
    ``iou_pred`` sequences of probabilities. Ties in the joint score keep
    the lower query index first.

    """
    scores = joint_scores(conf, iou_pred, scoring)
    candidates = [ScoredSpan(MomentSpan.clamped(s[0], s[1]), score, q,
                             conf=float(c), iou_pred=float(i))
                  for q, (s, score, c, i) in enumerate(
                      zip(spans, scores, conf, iou_pred))]
    return SamplePrediction(sample_id, nms(candidates, nms_threshold))


def _best_iou(span, gts):
    return max(iou_1d(span, g) for g in gts)


def _top1_ious(predictions, gts):
    if len(predictions) != len(gts):
        raise EvaluationError("%d predictions for %d ground-truth sets"
                              % (len(predictions), len(gts)))
    ious = []
    for pred, sample_gts in zip(predictions, gts):
        if pred.top1 is None:
            logger.warning("sample '%s' has no prediction, counted as miss",
                           pred.sample_id)
            ious.append(0.0)
        else:
            ious.append(_best_iou(pred.top1.span, sample_gts))
    return ious


def recall_at_1(predictions, gts, mu):
    """Share of samples whose top-1 span reaches IoU ``mu`` with some
    ground truth."""
    ious = _top1_ious(predictions, gts)
    if not ious:
        return 0.0
    return sum(iou >= mu for iou in ious) / float(len(ious))


def mean_iou(predictions, gts):
    ious = _top1_ious(predictions, gts)
    return float(np.mean(ious)) if ious else 0.0


def interpolated_prec_rec(prec, rec):
    """All-points interpolated area under the precision/recall curve."""
    mprec = np.hstack([[0], prec, [0]])
    mrec = np.hstack([[0], rec, [1]])
    for i in range(len(mprec) - 1)[::-1]:
        mprec[i] = max(mprec[i], mprec[i + 1])
    idx = np.where(mrec[1::] != mrec[0:-1])[0] + 1
    return float(np.sum((mrec[idx] - mrec[idx - 1]) * mprec[idx]))


def average_precision(ranked_spans, gts, mu):
    """AP of one ranked span list: each prediction takes the unmatched
    ground truth of highest IoU if that IoU reaches ``mu``."""
    matched = [False] * len(gts)
    tp = np.zeros(len(ranked_spans))
    for rank, span in enumerate(ranked_spans):
        best, best_iou = None, -1.0
        for g, gt in enumerate(gts):
            if matched[g]:
                continue
            iou = iou_1d(span, gt)
            if iou >= mu and iou > best_iou:
                best, best_iou = g, iou
        if best is not None:
            matched[best] = True
            tp[rank] = 1.0
    cum_tp = np.cumsum(tp)
    prec = cum_tp / np.arange(1, len(ranked_spans) + 1)
    rec = cum_tp / float(len(gts))
    return interpolated_prec_rec(prec, rec)


def mean_average_precision(predictions, gts, thresholds=MAP_THRESHOLDS):
    """Return ``(per_threshold, average)``; ``per_threshold`` maps every
    threshold to the AP averaged over samples."""
    if len(predictions) != len(gts):
        raise EvaluationError("%d predictions for %d ground-truth sets"
                              % (len(predictions), len(gts)))
    per_threshold = {}
    for mu in thresholds:
        aps = [average_precision([c.span for c in pred.ranked], sample_gts,
                                 mu)
               for pred, sample_gts in zip(predictions, gts)]
        per_threshold[mu] = float(np.mean(aps)) if aps else 0.0
    average = float(np.mean(list(per_threshold.values()))) \
        if per_threshold else 0.0
    return per_threshold, average


def diversity_report(per_query):
    """Per-query spread and cross-query redundancy.

    ``per_query`` maps a query index to the
    :py:class:`QueryPrediction` objects that query produced over the
    evaluation set. Redundancy is the mean over samples of the average IoU
    between the spans of distinct queries; it is 0 when no sample has two
    queries.

    """
    stats = []
    scatter = []
    by_sample = defaultdict(list)
    for query_index in sorted(per_query):
        preds = per_query[query_index]
        centers = np.asarray([p.span[0] for p in preds], dtype=np.float64)
        widths = np.asarray([p.span[1] for p in preds], dtype=np.float64)
        if len(preds):
            stats.append(QueryStats(query_index, len(preds),
                                    float(centers.mean()),
                                    float(centers.std()),
                                    float(widths.mean()),
                                    float(widths.std())))
        for p in preds:
            scatter.append((query_index, float(p.span[0]), float(p.span[1]),
                            float(p.score), p.sample_id))
            by_sample[p.sample_id].append(p.span)
    per_sample = []
    for spans in by_sample.values():
        pairs = list(combinations(spans, 2))
        if pairs:
            per_sample.append(np.mean([iou_1d(a, b) for a, b in pairs]))
    redundancy = float(np.mean(per_sample)) if per_sample else 0.0
    return DiversityReport(stats, redundancy, scatter)


def score_iou_correlation(scores, gt_ious):
    """Least-squares line ``gt_iou = slope * score + intercept``."""
    x = np.asarray(scores, dtype=np.float64)
    y = np.asarray(gt_ious, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise EvaluationError("scores and IoUs must be equally long vectors")
    if len(x) < 2:
        raise EvaluationError("correlation needs at least two points")
    dx = x - x.mean()
    sxx = float((dx ** 2).sum())
    if sxx == 0.0:
        raise EvaluationError("scores are constant, slope is undefined")
    slope = float((dx * (y - y.mean())).sum()) / sxx
    return slope, float(y.mean() - slope * x.mean())


def build_report(predictions, gts, scoring="product", per_query=None,
                 correlation_points=None):
    """Assemble an :py:class:`EvalReport`.

    ``correlation_points`` is a sequence of ``(joint_score, conf, gt_iou)``
    triples; fits that are degenerate are logged and left empty.

    """
    r1 = {mu: recall_at_1(predictions, gts, mu) for mu in R1_THRESHOLDS}
    per_threshold, average = mean_average_precision(predictions, gts)
    map_at = {mu: per_threshold[mu] for mu in (0.5, 0.75)}
    report = EvalReport(r1=r1, map_at=map_at, map_avg=average,
                        miou=mean_iou(predictions, gts),
                        num_samples=len(predictions), scoring=scoring)
    if per_query is not None:
        report.diversity = diversity_report(per_query)
    if correlation_points:
        joint, conf, ious = zip(*correlation_points)
        for attr, xs in (("correlation", joint),
                         ("confidence_correlation", conf)):
            try:
                setattr(report, attr, score_iou_correlation(xs, ious))
            except EvaluationError as err:
                logger.warning("%s not fitted: %s", attr, err)
    return report
