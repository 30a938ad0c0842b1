# coding: utf-8
"""
Interval mathematics on normalized moment spans.

A moment span is stored as ``(center, width)`` in normalized video time.
Whenever a span takes part in a geometric computation it is converted to
the interval ``[center - width / 2, center + width / 2]`` clamped to
``[0, 1]``. The scalar functions work on :py:class:`MomentSpan` objects,
the ``temporal_*`` functions on batched :py:class:`torch.Tensor` objects in
``(..., 2)`` center/width layout and return pairwise matrices.
"""

import json
from collections import namedtuple

import numpy as np
import torch

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


W_MIN = 1e-3
"""Width floor applied to every span on construction."""


class SpanError(ValueError):
    """Span violates the normalized center/width invariants."""


class InsufficientDataError(SpanError):
    """Fewer spans than requested clusters."""


class MomentSpan(namedtuple("MomentSpan", "center width")):
    """Normalized ``(center, width)`` pair.

    ``center`` must lie in ``[0, 1]`` and ``width`` in ``[0, 1]``; widths
    below :py:data:`W_MIN` are raised to the floor. ::

        >>> MomentSpan(0.5, 0.0)
        MomentSpan(center=0.5, width=0.001)

    """
    __slots__ = ()

    def __new__(cls, center, width):
        center = float(center)
        width = float(width)
        if not 0.0 <= center <= 1.0:
            raise SpanError("span center %r outside [0, 1]" % center)
        if not 0.0 <= width <= 1.0:
            raise SpanError("span width %r outside (0, 1]" % width)
        return super(MomentSpan, cls).__new__(cls, center, max(width, W_MIN))

    @classmethod
    def clamped(cls, center, width):
        """Build a span clamping out-of-range coordinates instead of
        raising."""
        return cls(min(max(float(center), 0.0), 1.0),
                   min(max(float(width), W_MIN), 1.0))


_ScoredSpan = namedtuple("ScoredSpan",
                         "span score query_index conf iou_pred")


class ScoredSpan(_ScoredSpan):
    """Ranked span; ``score`` is the ranking key, ``conf`` and ``iou_pred``
    keep the head outputs the score was derived from."""
    __slots__ = ()

    def __new__(cls, span, score, query_index, conf=None, iou_pred=None):
        return super(ScoredSpan, cls).__new__(cls, span, float(score),
                                              int(query_index), conf, iou_pred)


def to_interval(span):
    """Return the clamped ``(start, end)`` interval of ``span``."""
    center, width = span
    return max(0.0, center - width / 2.0), min(1.0, center + width / 2.0)


def _overlap(a, b):
    a_start, a_end = to_interval(a)
    b_start, b_end = to_interval(b)
    inter = max(0.0, min(a_end, b_end) - max(a_start, b_start))
    union = (a_end - a_start) + (b_end - b_start) - inter
    hull = max(a_end, b_end) - min(a_start, b_start)
    return inter, union, hull


def iou_1d(a, b):
    """Intersection over union of two spans, 0 for a zero-length union."""
    inter, union, _ = _overlap(a, b)
    if union <= 0.0:
        return 0.0
    return inter / union


def giou_1d(a, b):
    """Generalized IoU: IoU minus the share of the hull not covered by the
    union."""
    inter, union, hull = _overlap(a, b)
    iou = inter / union if union > 0.0 else 0.0
    if hull <= 0.0:
        return iou
    return iou - (hull - union) / hull


def nms(candidates, threshold):
    """Greedy non maximum suppression.

    Candidates are visited in descending score order (lower
    ``query_index`` first on ties); a candidate is dropped iff its IoU with
    an already kept candidate exceeds ``threshold``.

    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("nms threshold %r outside (0, 1]" % threshold)
    ordered = sorted(candidates, key=lambda c: (-c.score, c.query_index))
    kept = []
    for cand in ordered:
        if all(iou_1d(cand.span, k.span) <= threshold for k in kept):
            kept.append(cand)
    return kept


def _as_points(spans):
    return np.asarray([[s[0], s[1]] for s in spans], dtype=np.float64)


def _sq_dists(points, centroids):
    diff = points[:, None, :] - centroids[None, :, :]
    return (diff ** 2).sum(-1)


def _sse(points, centroids, labels):
    return float(((points - centroids[labels]) ** 2).sum())


def _kmeanspp(points, k, rng):
    n = len(points)
    centroids = [points[rng.integers(n)]]
    for _ in range(1, k):
        d2 = _sq_dists(points, np.asarray(centroids)).min(1)
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centroids.append(points[idx])
    return np.asarray(centroids)


def _update_centroids(points, labels, centroids):
    k = len(centroids)
    new = centroids.copy()
    empty = []
    for j in range(k):
        members = points[labels == j]
        if len(members):
            new[j] = members.mean(0)
        else:
            empty.append(j)
    if empty:
        # re-seed empty clusters with the points farthest from their centroid
        dist = ((points - new[labels]) ** 2).sum(-1)
        for j in empty:
            idx = int(np.argmax(dist))
            new[j] = points[idx]
            dist[idx] = -1.0
    return new


def _lloyd(points, centroids, max_iters):
    """Run Lloyd iterations from ``centroids``.

    Returns ``(centroids, labels, history)`` where ``history`` holds the
    within-cluster SSE after the initial assignment and after every
    update/assignment round.

    """
    labels = _sq_dists(points, centroids).argmin(1)
    history = [_sse(points, centroids, labels)]
    for _ in range(max_iters):
        centroids = _update_centroids(points, labels, centroids)
        new_labels = _sq_dists(points, centroids).argmin(1)
        history.append(_sse(points, centroids, new_labels))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centroids, labels, history


def kmeans_spans(spans, K, seed=0, max_iters=300, n_init=10):
    """Cluster spans as points ``(center, width)`` in the unit square.

    Lloyd's algorithm with k-means++ seeding; ``n_init`` restarts are
    drawn from ``seed`` and the run with the lowest within-cluster SSE
    wins. The centroids are returned as :py:class:`MomentSpan` objects
    sorted by ``(center, width)``.

    """
    points = _as_points(spans)
    if K < 1 or len(points) < K:
        raise InsufficientDataError("k-means needs at least K=%d spans, got %d"
                                    % (K, len(points)))
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_init)):
        init = _kmeanspp(points, K, rng)
        centroids, labels, history = _lloyd(points, init, max_iters)
        if best is None or history[-1] < best[1]:
            best = (centroids, history[-1])
    centroids = sorted(map(tuple, best[0]))
    return [MomentSpan.clamped(c, w) for c, w in centroids]


def uniform_grid_anchors(n_center, n_width):
    """Cartesian grid of cell midpoints on the center/width square in
    row-major (center-major) order."""
    if n_center < 1 or n_width < 1:
        raise ValueError("grid sizes must be positive")
    centers = [(i + 0.5) / n_center for i in range(n_center)]
    widths = [min((j + 0.5) / n_width, 1.0) for j in range(n_width)]
    return [MomentSpan(c, w) for c in centers for w in widths]


def random_anchors(K, seed=0):
    """``K`` spans with ``center ~ U[0, 1]`` and ``width ~ U[W_MIN, 1]``."""
    if K < 1:
        raise ValueError("K must be positive, got %r" % K)
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, 1.0, K)
    widths = rng.uniform(W_MIN, 1.0, K)
    return [MomentSpan(c, w) for c, w in zip(centers, widths)]


def save_anchors(path, spans):
    """Write spans as a JSON array of ``[center, width]`` pairs."""
    with atomic_open(path, 'w') as fd:
        json.dump([[float(s[0]), float(s[1])] for s in spans], fd)
        fd.write('\n')


def load_anchors(path):
    with open(path, 'r') as fd:
        rows = json.load(fd)
    try:
        return [MomentSpan(c, w) for c, w in rows]
    except (TypeError, ValueError) as err:
        raise SpanError("invalid anchor file '%s': %s" % (path, err))


# -- batched tensor geometry ------------------------------------------------

def span_cxw_to_xx(cxw_spans):
    """Convert ``(..., 2)`` center/width spans to clamped start/end."""
    start = (cxw_spans[..., 0] - 0.5 * cxw_spans[..., 1]).clamp(min=0.0)
    end = (cxw_spans[..., 0] + 0.5 * cxw_spans[..., 1]).clamp(max=1.0)
    return torch.stack([start, end], dim=-1)


def temporal_iou(spans1, spans2):
    """Pairwise IoU and union of ``(N, 2)`` and ``(M, 2)`` start/end spans.

    Returns two ``(N, M)`` tensors.

    """
    areas1 = spans1[:, 1] - spans1[:, 0]
    areas2 = spans2[:, 1] - spans2[:, 0]
    left = torch.max(spans1[:, None, 0], spans2[:, 0])
    right = torch.min(spans1[:, None, 1], spans2[:, 1])
    inter = (right - left).clamp(min=0)
    union = areas1[:, None] + areas2 - inter
    iou = torch.where(union > 0, inter / union.clamp(min=1e-12),
                      torch.zeros_like(union))
    return iou, union


def generalized_temporal_iou(spans1, spans2):
    """Pairwise generalized IoU of ``(N, 2)`` and ``(M, 2)`` start/end
    spans."""
    iou, union = temporal_iou(spans1, spans2)
    left = torch.min(spans1[:, None, 0], spans2[:, 0])
    right = torch.max(spans1[:, None, 1], spans2[:, 1])
    hull = (right - left).clamp(min=1e-12)
    return iou - (hull - union) / hull


def paired_iou(spans1, spans2):
    """Element-wise IoU of two ``(N, 2)`` center/width tensors."""
    a = span_cxw_to_xx(spans1)
    b = span_cxw_to_xx(spans2)
    inter = (torch.min(a[:, 1], b[:, 1]) - torch.max(a[:, 0], b[:, 0])).clamp(
        min=0)
    union = (a[:, 1] - a[:, 0]) + (b[:, 1] - b[:, 0]) - inter
    return torch.where(union > 0, inter / union.clamp(min=1e-12),
                       torch.zeros_like(union))


def paired_giou(spans1, spans2):
    """Element-wise generalized IoU of two ``(N, 2)`` center/width
    tensors."""
    a = span_cxw_to_xx(spans1)
    b = span_cxw_to_xx(spans2)
    inter = (torch.min(a[:, 1], b[:, 1]) - torch.max(a[:, 0], b[:, 0])).clamp(
        min=0)
    union = (a[:, 1] - a[:, 0]) + (b[:, 1] - b[:, 0]) - inter
    iou = inter / union.clamp(min=1e-12)
    hull = (torch.max(a[:, 1], b[:, 1]) - torch.min(a[:, 0], b[:, 0])).clamp(
        min=1e-12)
    return iou - (hull - union) / hull
