# coding: utf-8
"""
Grounding samples, the synthetic event-signature dataset, JSON Lines
manifests and batching.

A manifest line looks like::

    {"id": "v1", "video_features": [[...], ...], "text_features": [[...]],
     "moments": [[0.5, 0.2]], "saliency": [0, 1, ...]}

``video_features``/``text_features`` may instead point to a little-endian
float32 row-major sidecar file: ``{"path": "v1.video.f32", "rows": 32,
"cols": 256}``. Relative sidecar paths are resolved against the manifest's
directory.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import torch

from rgtr.spans import MomentSpan, SpanError, to_interval
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

REQUIRED_KEYS = ("id", "video_features", "text_features", "moments")

# synthetic event widths before snapping to the clip grid
EVENT_WIDTH_RANGE = (0.05, 0.6)
TOKEN_RANGE = (3, 8)
PLACEMENT_RETRIES = 50


class DataError(ValueError):
    """Sample or dataset violates its invariants."""


class ManifestError(DataError):
    """Malformed manifest line."""

    def __init__(self, message, lineno=None, sample_id=None):
        prefix = []
        if lineno is not None:
            prefix.append("line %d" % lineno)
        if sample_id is not None:
            prefix.append("sample '%s'" % sample_id)
        if prefix:
            message = "%s: %s" % (", ".join(prefix), message)
        DataError.__init__(self, message)
        self.lineno = lineno
        self.sample_id = sample_id


@dataclass
class GroundingSample:
    """One video/sentence pair with its ground-truth moments."""
    id: str
    video_features: np.ndarray
    text_features: np.ndarray
    moments: List[MomentSpan]
    saliency: Optional[np.ndarray] = None

    def __post_init__(self):
        self.video_features = np.asarray(self.video_features,
                                         dtype=np.float32)
        self.text_features = np.asarray(self.text_features, dtype=np.float32)
        if self.video_features.ndim != 2 or len(self.video_features) < 1:
            raise DataError("sample '%s': video_features must be a non-empty "
                            "L x d_v matrix" % self.id)
        if self.text_features.ndim != 2 or len(self.text_features) < 1:
            raise DataError("sample '%s': text_features must be a non-empty "
                            "N x d_t matrix" % self.id)
        if not self.moments:
            raise DataError("sample '%s': at least one moment is required"
                            % self.id)
        self.moments = [m if isinstance(m, MomentSpan) else MomentSpan(*m)
                        for m in self.moments]
        if self.saliency is not None:
            self.saliency = np.asarray(self.saliency, dtype=np.float32)
            if self.saliency.shape != (self.num_clips, ):
                raise DataError("sample '%s': saliency length %d does not "
                                "match L=%d" % (self.id, len(self.saliency),
                                                self.num_clips))

    @property
    def num_clips(self):
        return self.video_features.shape[0]

    @property
    def num_tokens(self):
        return self.text_features.shape[0]

    def span_membership(self):
        """Binary clip labels: 1 where the clip midpoint lies inside a
        ground-truth span."""
        return membership_labels(self.moments, self.num_clips)


def membership_labels(moments, num_clips):
    mids = (np.arange(num_clips) + 0.5) / num_clips
    labels = np.zeros(num_clips, dtype=np.float32)
    for moment in moments:
        start, end = to_interval(moment)
        labels[(mids >= start) & (mids <= end)] = 1.0
    return labels


@dataclass
class SynthConfig:
    """Parameters of the synthetic event-signature dataset."""
    num_samples: int = 600
    L: int = 32
    d_v: int = 32
    d_t: int = 32
    vocab_size: int = 8
    max_events_per_video: int = 3
    noise_std: float = 0.1
    seed: int = 0

    def validate(self):
        for name in ("num_samples", "L", "d_v", "d_t", "vocab_size",
                     "max_events_per_video"):
            if int(getattr(self, name)) < 1:
                raise DataError("SynthConfig.%s must be positive" % name)
        if self.noise_std < 0:
            raise DataError("SynthConfig.noise_std must be >= 0")


def _unit_rows(rng, rows, cols):
    mat = rng.standard_normal((rows, cols))
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def _place_events(rng, num_events, num_clips):
    """Disjoint clip ranges ``(first_clip, n_clips)``; ``None`` when the
    placement failed within the retry budget."""
    occupied = np.zeros(num_clips, dtype=bool)
    placed = []
    for _ in range(num_events):
        for _ in range(PLACEMENT_RETRIES):
            width = rng.uniform(*EVENT_WIDTH_RANGE)
            length = int(min(num_clips, max(1, round(width * num_clips))))
            first = int(rng.integers(0, num_clips - length + 1))
            if not occupied[first:first + length].any():
                occupied[first:first + length] = True
                placed.append((first, length))
                break
        else:
            return None
    return placed


def _synth_sample(cfg, index, video_sigs, text_sigs):
    rng = np.random.default_rng([cfg.seed, index])
    num_events = int(rng.integers(1, cfg.max_events_per_video + 1))
    placed = _place_events(rng, num_events, cfg.L)
    while placed is None:
        num_events -= 1
        placed = _place_events(rng, num_events, cfg.L)
    query = int(rng.integers(cfg.vocab_size))
    # the first instance always carries the queried event type
    types = [query]
    for _ in placed[1:]:
        if cfg.vocab_size > 1 and rng.random() < 0.5:
            other = int(rng.integers(cfg.vocab_size - 1))
            types.append(other if other < query else other + 1)
        else:
            types.append(query)

    video = rng.normal(0.0, cfg.noise_std, (cfg.L, cfg.d_v))
    moments = []
    for (first, length), event in zip(placed, types):
        video[first:first + length] += video_sigs[event]
        if event == query:
            moments.append(MomentSpan((first + length / 2.0) / cfg.L,
                                      float(length) / cfg.L))
    num_tokens = int(rng.integers(TOKEN_RANGE[0], TOKEN_RANGE[1] + 1))
    text = text_sigs[query] + rng.normal(0.0, cfg.noise_std,
                                         (num_tokens, cfg.d_t))
    moments.sort()
    return GroundingSample(
        id="synth-%d-%06d" % (cfg.seed, index),
        video_features=video,
        text_features=text,
        moments=moments,
        saliency=membership_labels(moments, cfg.L),
    )


def generate_synthetic_dataset(cfg):
    """Generate ``cfg.num_samples`` samples.

    Every event type owns a unit-norm clip signature and a unit-norm query
    signature. Clips covered by an event instance carry its signature plus
    Gaussian noise, all other clips carry noise only. The sentence is 3 to 8
    noisy copies of the queried type's query signature and the ground
    truth consists of every instance of the queried type. Event spans are
    snapped to the clip grid. Sample ``i`` draws from its own generator
    seeded with ``(seed, i)``.

    """
    cfg.validate()
    master = np.random.default_rng(cfg.seed)
    video_sigs = _unit_rows(master, cfg.vocab_size, cfg.d_v)
    text_sigs = _unit_rows(master, cfg.vocab_size, cfg.d_t)
    return [_synth_sample(cfg, i, video_sigs, text_sigs)
            for i in range(cfg.num_samples)]


def split_dataset(samples, val_size):
    """Deterministic split: the last ``val_size`` samples validate."""
    if not 0 <= val_size < len(samples):
        raise DataError("val_size %d leaves no training samples out of %d"
                        % (val_size, len(samples)))
    cut = len(samples) - val_size
    return samples[:cut], samples[cut:]


def _read_matrix(value, key, basedir, sample_id, lineno):
    if isinstance(value, dict):
        try:
            path, rows, cols = value["path"], int(value["rows"]), \
                int(value["cols"])
        except (KeyError, TypeError, ValueError):
            raise ManifestError("'%s' sidecar needs path, rows and cols" % key,
                                lineno, sample_id)
        if rows < 0 or cols < 0:
            raise ManifestError("'%s' sidecar has negative shape %d x %d"
                                % (key, rows, cols), lineno, sample_id)
        if not os.path.isabs(path):
            path = os.path.join(basedir, path)
        try:
            flat = np.fromfile(path, dtype="<f4")
        except OSError as err:
            raise ManifestError("cannot read '%s' sidecar: %s" % (key, err),
                                lineno, sample_id)
        if flat.size != rows * cols:
            raise ManifestError("'%s' sidecar holds %d values, expected "
                                "%d x %d" % (key, flat.size, rows, cols),
                                lineno, sample_id)
        return flat.reshape(rows, cols).astype(np.float32)
    try:
        mat = np.asarray(value, dtype=np.float32)
    except (TypeError, ValueError):
        raise ManifestError("'%s' is not a numeric matrix" % key, lineno,
                            sample_id)
    if mat.ndim != 2:
        raise ManifestError("'%s' must be a 2-D array" % key, lineno,
                            sample_id)
    return mat


def _parse_line(obj, basedir, lineno):
    if not isinstance(obj, dict):
        raise ManifestError("expected a JSON object", lineno)
    sample_id = obj.get("id")
    for key in REQUIRED_KEYS:
        if key not in obj:
            raise ManifestError("missing required key '%s'" % key, lineno,
                                sample_id)
    video = _read_matrix(obj["video_features"], "video_features", basedir,
                         sample_id, lineno)
    text = _read_matrix(obj["text_features"], "text_features", basedir,
                        sample_id, lineno)
    for key, mat in (("L", video), ("N", text)):
        if key not in obj:
            continue
        try:
            declared = int(obj[key])
        except (TypeError, ValueError):
            raise ManifestError("declared %s=%r is not an integer"
                                % (key, obj[key]), lineno, sample_id)
        if declared != mat.shape[0]:
            raise ManifestError("declared %s=%s but array has %d rows"
                                % (key, obj[key], mat.shape[0]), lineno,
                                sample_id)
    try:
        moments = [MomentSpan(c, w) for c, w in obj["moments"]]
    except (TypeError, ValueError) as err:
        raise ManifestError("invalid moment: %s" % err, lineno, sample_id)
    try:
        return GroundingSample(id=str(sample_id), video_features=video,
                               text_features=text, moments=moments,
                               saliency=obj.get("saliency"))
    except DataError as err:
        raise ManifestError(str(err), lineno, sample_id)


def load_manifest(path):
    """Load and validate every line of a JSON Lines manifest."""
    basedir = os.path.dirname(os.path.abspath(path))
    samples = []
    with open(path, 'r') as fd:
        for lineno, line in enumerate(fd, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError as err:
                raise ManifestError("invalid JSON (%s)" % err, lineno)
            samples.append(_parse_line(obj, basedir, lineno))
    logger.info("loaded %d samples from %s", len(samples), path)
    return samples


def _write_sidecar(mat, basedir, name):
    np.ascontiguousarray(mat, dtype="<f4").tofile(os.path.join(basedir, name))
    return dict(path=name, rows=int(mat.shape[0]), cols=int(mat.shape[1]))


def write_manifest(samples, path, sidecar=False):
    """Write samples as a JSON Lines manifest, optionally moving feature
    matrices to float32 sidecar files next to the manifest."""
    basedir = os.path.dirname(os.path.abspath(path))
    with atomic_open(path, 'w') as fd:
        for sample in samples:
            if sidecar:
                video = _write_sidecar(sample.video_features, basedir,
                                       "%s.video.f32" % sample.id)
                text = _write_sidecar(sample.text_features, basedir,
                                      "%s.text.f32" % sample.id)
            else:
                video = sample.video_features.tolist()
                text = sample.text_features.tolist()
            obj = dict(id=sample.id, video_features=video,
                       text_features=text,
                       moments=[[m.center, m.width] for m in sample.moments])
            if sample.saliency is not None:
                obj["saliency"] = sample.saliency.tolist()
            fd.write(json.dumps(obj) + '\n')
    logger.info("wrote %d samples to %s", len(samples), path)


@dataclass
class Batch:
    """Padded batch; masks are ``True`` at real positions."""
    ids: List[str]
    video: torch.Tensor
    video_mask: torch.Tensor
    text: torch.Tensor
    text_mask: torch.Tensor
    targets: List[torch.Tensor]
    saliency_labels: torch.Tensor
    moments: List[List[MomentSpan]] = field(default_factory=list)

    def __len__(self):
        return len(self.ids)

    def to(self, device=None, dtype=None):
        """Move feature tensors, targets and labels; masks keep their
        boolean type."""
        def conv(t):
            return t.to(device=device, dtype=dtype)
        return Batch(ids=self.ids, video=conv(self.video),
                     video_mask=self.video_mask.to(device=device),
                     text=conv(self.text),
                     text_mask=self.text_mask.to(device=device),
                     targets=[conv(t) for t in self.targets],
                     saliency_labels=conv(self.saliency_labels),
                     moments=self.moments)


def collate(samples):
    """Pad samples to the longest video/sentence and build masks."""
    if not samples:
        raise DataError("cannot collate an empty list of samples")
    bsz = len(samples)
    l_max = max(s.num_clips for s in samples)
    n_max = max(s.num_tokens for s in samples)
    d_v = samples[0].video_features.shape[1]
    d_t = samples[0].text_features.shape[1]
    video = torch.zeros(bsz, l_max, d_v)
    text = torch.zeros(bsz, n_max, d_t)
    video_mask = torch.zeros(bsz, l_max, dtype=torch.bool)
    text_mask = torch.zeros(bsz, n_max, dtype=torch.bool)
    saliency = torch.zeros(bsz, l_max)
    for i, sample in enumerate(samples):
        if sample.video_features.shape[1] != d_v or \
                sample.text_features.shape[1] != d_t:
            raise DataError("sample '%s': feature dims differ within batch"
                            % sample.id)
        num_clips, num_tokens = sample.num_clips, sample.num_tokens
        video[i, :num_clips] = torch.from_numpy(sample.video_features)
        text[i, :num_tokens] = torch.from_numpy(sample.text_features)
        video_mask[i, :num_clips] = True
        text_mask[i, :num_tokens] = True
        labels = sample.saliency if sample.saliency is not None else \
            sample.span_membership()
        saliency[i, :num_clips] = torch.from_numpy(
            np.asarray(labels, dtype=np.float32))
    targets = [torch.tensor([[m.center, m.width] for m in s.moments],
                            dtype=torch.float32) for s in samples]
    return Batch(ids=[s.id for s in samples], video=video,
                 video_mask=video_mask, text=text, text_mask=text_mask,
                 targets=targets, saliency_labels=saliency,
                 moments=[list(s.moments) for s in samples])
