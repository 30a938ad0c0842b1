# coding: utf-8
"""
Region-guided decoder.

Every moment query owns an anchor pair initialized from the same span: a
static anchor that never changes and conditions decoder self-attention, and
a dynamic anchor that conditions cross-attention and is refined by the
shared prediction head after every layer. The refined dynamic anchors of
the last layer are the predicted moment spans.
"""

import logging
import math
from dataclasses import dataclass

import torch
from torch import nn

from rgtr.attention import FeedForward, MLP, MultiHeadAttention
from rgtr.positional import clip_sine_embedding, span_sine_embedding
from rgtr.spans import W_MIN, kmeans_spans, random_anchors, \
    uniform_grid_anchors
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

INIT_STRATEGIES = ("kmeans", "uniform_grid", "random")


@dataclass
class DecoderConfig:
    K: int = 20
    num_layers: int = 3
    D: int = 256
    heads: int = 8
    ffn_dim: int = 1024
    dropout: float = 0.1
    region_guided_attention: bool = True
    logit_space_update: bool = False
    explicit_anchors: bool = True
    iou_head: bool = True

    def validate(self):
        if self.K < 1:
            raise ValueError("K must be >= 1, got %r" % self.K)
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1, got %r"
                             % self.num_layers)
        if self.D % 4:
            raise ValueError("D must be divisible by 4, got %r" % self.D)


@dataclass
class DecoderLayerOutput:
    content: torch.Tensor
    anchors_in: torch.Tensor
    anchors_out: torch.Tensor
    offsets: torch.Tensor


def init_anchors(train_spans, K, strategy="kmeans", seed=0):
    """Return ``K`` initial anchor spans.

    ``kmeans`` clusters the training spans, ``uniform_grid`` lays out the
    smallest square-ish grid holding ``K`` cells (center-major, truncated to
    ``K``), ``random`` draws uniformly.

    """
    if strategy == "kmeans":
        return kmeans_spans(train_spans, K, seed=seed)
    if strategy == "uniform_grid":
        n_center = int(math.ceil(math.sqrt(K)))
        n_width = int(math.ceil(K / float(n_center)))
        return uniform_grid_anchors(n_center, n_width)[:K]
    if strategy == "random":
        return random_anchors(K, seed=seed)
    raise ValueError("unknown anchor initialization strategy '%s'" % strategy)


def _inverse_sigmoid(x, eps=1e-5):
    x = x.clamp(min=eps, max=1 - eps)
    return torch.log(x / (1 - x))


def update_dynamic_anchors(anchors, delta, logit_space=False):
    """Add offsets to anchors and clamp center to ``[0, 1]`` and width to
    ``[W_MIN, 1]``.

    With ``logit_space`` the offsets are added to the inverse sigmoid of
    the anchors instead.

    """
    if logit_space:
        moved = (_inverse_sigmoid(anchors) + delta).sigmoid()
    else:
        moved = anchors + delta
    return torch.stack([moved[..., 0].clamp(0.0, 1.0),
                        moved[..., 1].clamp(W_MIN, 1.0)], dim=-1)


class AnchorSet(nn.Module):
    """Static and initial dynamic anchors plus the anchor embedding MLP.

    ``static_anchors`` and ``static_pos`` are buffers: they are written once
    on construction and never receive gradients. ``static_pos`` is the
    embedding of the static anchors under the initial weights of
    :py:attr:`anchor_mlp`, which keeps training for the dynamic anchors.

    With ``learnable`` the anchors are plain learnable queries instead: the
    starting values are stored as logits in :py:attr:`anchor_logits` and
    both the anchors and their static embedding follow training.

    """

    def __init__(self, anchors, D, learnable=False):
        super(AnchorSet, self).__init__()
        anchors = torch.as_tensor([[float(a[0]), float(a[1])]
                                   for a in anchors])
        self.D = D
        self.learnable = learnable
        self.anchor_mlp = MLP(D, D, D, 2)
        self.register_buffer("static_anchors", anchors)
        with torch.no_grad():
            static_pos = self.positional_embedding(anchors)
        self.register_buffer("static_pos", static_pos.detach().clone())
        if learnable:
            self.anchor_logits = nn.Parameter(_inverse_sigmoid(anchors))

    @property
    def K(self):
        return self.static_anchors.shape[0]

    def positional_embedding(self, anchors):
        """``MLP(PE(anchors))``: ``(..., 2)`` spans to ``(..., D)``."""
        return self.anchor_mlp(span_sine_embedding(anchors, self.D))

    def anchors(self):
        """Current ``K x 2`` static anchors."""
        if not self.learnable:
            return self.static_anchors
        moved = self.anchor_logits.sigmoid()
        return torch.stack([moved[:, 0], moved[:, 1].clamp(min=W_MIN)], -1)

    def guidance(self):
        """Current ``K x D`` embedding guiding self-attention."""
        if not self.learnable:
            return self.static_pos
        return self.positional_embedding(self.anchors())

    def initial_dynamic(self, batch_size):
        return self.anchors().unsqueeze(0).expand(batch_size, -1, -1)


class RegionGuidedSelfAttention(nn.Module):
    """Queries and keys are content plus static anchor embedding, values
    content only."""

    def __init__(self, D, heads, dropout=0.0):
        super(RegionGuidedSelfAttention, self).__init__()
        self.attn = MultiHeadAttention(D, D, heads, dropout)
        self.dropout = nn.Dropout(dropout)
        self.norm = nn.LayerNorm(D)

    def forward(self, content, static_pos):
        qk = content + static_pos
        out, _ = self.attn(qk, qk, content)
        return self.norm(content + self.dropout(out))


class RegionGuidedCrossAttention(nn.Module):
    """Queries ``[C_s, P_d]`` and keys ``[F, PE(F)]`` are concatenated along
    channels (width ``2D``), values are the fused clip features ``F``."""

    def __init__(self, D, heads, ffn_dim, dropout=0.0):
        super(RegionGuidedCrossAttention, self).__init__()
        self.attn = MultiHeadAttention(2 * D, D, heads, dropout)
        self.dropout = nn.Dropout(dropout)
        self.norm = nn.LayerNorm(D)
        self.ffn = FeedForward(D, ffn_dim, dropout)

    def forward(self, content, dynamic_pos, memory, memory_pos, memory_mask):
        query = torch.cat([content, dynamic_pos], dim=-1)
        key = torch.cat([memory, memory_pos], dim=-1)
        out, _ = self.attn(query, key, memory, memory_mask)
        return self.ffn(self.norm(content + self.dropout(out)))


class RegionGuidedDecoderLayer(nn.Module):

    def __init__(self, cfg):
        super(RegionGuidedDecoderLayer, self).__init__()
        self.self_attn = RegionGuidedSelfAttention(cfg.D, cfg.heads,
                                                   cfg.dropout)
        self.cross_attn = RegionGuidedCrossAttention(cfg.D, cfg.heads,
                                                     cfg.ffn_dim, cfg.dropout)

    def forward(self, content, query_pos, dynamic_pos, memory, memory_pos,
                memory_mask):
        content = self.self_attn(content, query_pos)
        return self.cross_attn(content, dynamic_pos, memory, memory_pos,
                               memory_mask)


class RegionGuidedDecoder(nn.Module):

    def __init__(self, cfg, anchors):
        super(RegionGuidedDecoder, self).__init__()
        cfg.validate()
        if len(anchors) != cfg.K:
            raise ValueError("decoder expects K=%d anchors, got %d"
                             % (cfg.K, len(anchors)))
        self.cfg = cfg
        self.anchor_set = AnchorSet(anchors, cfg.D,
                                    learnable=not cfg.explicit_anchors)
        self.layers = nn.ModuleList(RegionGuidedDecoderLayer(cfg)
                                    for _ in range(cfg.num_layers))

    def forward(self, memory, memory_mask, head):
        """Run all layers over fused clip features ``memory`` (``B x L x
        D``) and return one :py:class:`DecoderLayerOutput` per layer.

        ``head`` supplies the anchor offsets and is shared by all layers.
        Anchors carried to the next layer are detached; the offsets of each
        layer keep their gradient.

        """
        bsz = memory.shape[0]
        anchor_set = self.anchor_set
        memory_pos = clip_sine_embedding(memory_mask, self.cfg.D, memory.dtype)
        static_pos = anchor_set.guidance().to(memory.dtype).unsqueeze(0) \
            .expand(bsz, -1, -1)
        content = memory.new_zeros(bsz, anchor_set.K, self.cfg.D)
        anchors = anchor_set.initial_dynamic(bsz).to(memory.dtype)
        outputs = []
        for layer in self.layers:
            dynamic_pos = anchor_set.positional_embedding(anchors)
            query_pos = static_pos if self.cfg.region_guided_attention \
                else dynamic_pos
            content = layer(content, query_pos, dynamic_pos, memory,
                            memory_pos, memory_mask)
            offsets = head.offsets(content)
            refined = update_dynamic_anchors(anchors, offsets,
                                             self.cfg.logit_space_update)
            outputs.append(DecoderLayerOutput(content=content,
                                              anchors_in=anchors,
                                              anchors_out=refined,
                                              offsets=offsets))
            anchors = refined.detach()
        return outputs
