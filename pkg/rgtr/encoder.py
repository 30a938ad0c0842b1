# coding: utf-8
"""
Cross-modal alignment encoder.

Both modalities are projected to a shared ``D``-dimensional space, pooled
into global features for the contrastive alignment objective, fused by
text-to-video cross-attention and refined by self-attention over clips.
A linear head reads one saliency score per clip off the fused embedding.
"""

from dataclasses import dataclass

import torch
from torch import nn
import torch.nn.functional as F

from rgtr.attention import FeedForward, LinearLayer, MultiHeadAttention
from rgtr.positional import clip_sine_embedding
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


SALIENCY_MARGIN = 0.2


class EncoderError(ValueError):
    """Encoder input violates its shape or mask contract."""


@dataclass
class EncoderConfig:
    d_v: int
    d_t: int
    D: int = 256
    heads: int = 8
    num_cross_layers: int = 3
    num_self_layers: int = 3
    ffn_dim: int = 1024
    dropout: float = 0.1

    def validate(self):
        if self.D % self.heads:
            raise EncoderError("D=%d is not divisible by heads=%d"
                               % (self.D, self.heads))
        if self.num_cross_layers < 1 or self.num_self_layers < 1:
            raise EncoderError("encoder layer counts must be >= 1")


@dataclass
class EncoderOutput:
    fused: torch.Tensor
    saliency_scores: torch.Tensor
    global_video: torch.Tensor
    global_text: torch.Tensor
    video_mask: torch.Tensor


def _check_rows(mask, what):
    if not bool(mask.any(1).all()):
        raise EncoderError("%s mask has a row without valid positions" % what)


def global_pool(features, mask):
    """Masked mean over valid positions, L2-normalized: ``B x T x D`` to
    ``B x D``."""
    _check_rows(mask, "pooling")
    weights = mask.to(features.dtype).unsqueeze(-1)
    mean = (features * weights).sum(1) / weights.sum(1)
    return F.normalize(mean, dim=-1)


def alignment_loss(global_video, global_text):
    """Contrastive alignment of global video and sentence features.

    ``-(1/B) sum_i log(exp(v_i . t_i) / sum_i sum_j exp(v_i . t_j))``
    without temperature; the denominator is a log-sum-exp over all ``B^2``
    pair scores.

    """
    scores = global_video @ global_text.t()
    return torch.logsumexp(scores.flatten(), 0) - scores.diagonal().mean()


def saliency_loss(scores, labels, mask, margin=SALIENCY_MARGIN,
                  max_pairs=64):
    """Margin ranking plus rank-contrastive loss on clip saliency.

    Clips with label >= 0.5 are positives, the others negatives. For each
    sample holding both classes the loss is the mean hinge
    ``max(0, margin + s_neg - s_pos)`` over positive/negative pairs (at most
    ``max_pairs``, subsampled with the global torch generator) plus the
    cross-entropy of the softmax over valid clips against the normalized
    label distribution. Samples lacking either class contribute nothing;
    the result is the mean over contributing samples.

    """
    terms = []
    for row_scores, row_labels, row_mask in zip(scores, labels, mask):
        s = row_scores[row_mask]
        y = row_labels[row_mask]
        positive = y >= 0.5
        if not bool(positive.any()) or bool(positive.all()):
            continue
        s_pos = s[positive]
        s_neg = s[~positive]
        pair_pos = s_pos[:, None].expand(-1, len(s_neg)).reshape(-1)
        pair_neg = s_neg[None, :].expand(len(s_pos), -1).reshape(-1)
        if len(pair_pos) > max_pairs:
            keep = torch.randperm(len(pair_pos), device=s.device)[:max_pairs]
            pair_pos, pair_neg = pair_pos[keep], pair_neg[keep]
        ranking = F.relu(margin + pair_neg - pair_pos).mean()
        target = y / y.sum()
        contrastive = -(target * s.log_softmax(0)).sum()
        terms.append(ranking + contrastive)
    if not terms:
        return scores.sum() * 0.0
    return torch.stack(terms).mean()


class CrossAttentionLayer(nn.Module):
    """Video queries attend to text keys/values."""

    def __init__(self, cfg):
        super(CrossAttentionLayer, self).__init__()
        self.attn = MultiHeadAttention(cfg.D, cfg.D, cfg.heads, cfg.dropout)
        self.dropout = nn.Dropout(cfg.dropout)
        self.norm = nn.LayerNorm(cfg.D)
        self.ffn = FeedForward(cfg.D, cfg.ffn_dim, cfg.dropout)

    def forward(self, video, text, text_mask):
        out, _ = self.attn(video, text, text, text_mask)
        return self.ffn(self.norm(video + self.dropout(out)))


class SelfAttentionLayer(nn.Module):
    """Masked self-attention over clips; positions are added to queries
    and keys only."""

    def __init__(self, cfg):
        super(SelfAttentionLayer, self).__init__()
        self.attn = MultiHeadAttention(cfg.D, cfg.D, cfg.heads, cfg.dropout)
        self.dropout = nn.Dropout(cfg.dropout)
        self.norm = nn.LayerNorm(cfg.D)
        self.ffn = FeedForward(cfg.D, cfg.ffn_dim, cfg.dropout)

    def forward(self, x, pos, mask):
        qk = x + pos
        out, _ = self.attn(qk, qk, x, mask)
        return self.ffn(self.norm(x + self.dropout(out)))


class CrossModalAlignmentEncoder(nn.Module):

    def __init__(self, cfg):
        super(CrossModalAlignmentEncoder, self).__init__()
        cfg.validate()
        self.cfg = cfg
        self.video_proj = nn.Sequential(
            LinearLayer(cfg.d_v, cfg.D, cfg.dropout, relu=True),
            LinearLayer(cfg.D, cfg.D, cfg.dropout, relu=False),
        )
        self.text_proj = nn.Sequential(
            LinearLayer(cfg.d_t, cfg.D, cfg.dropout, relu=True),
            LinearLayer(cfg.D, cfg.D, cfg.dropout, relu=False),
        )
        # a visual refinement module would replace this identity; it runs
        # between projection and cross-attention
        self.visual_refinement = nn.Identity()
        self.cross_layers = nn.ModuleList(
            CrossAttentionLayer(cfg) for _ in range(cfg.num_cross_layers))
        self.self_layers = nn.ModuleList(
            SelfAttentionLayer(cfg) for _ in range(cfg.num_self_layers))
        self.saliency_head = nn.Linear(cfg.D, 1)

    def project_features(self, video, text):
        if video.shape[-1] != self.cfg.d_v or text.shape[-1] != self.cfg.d_t:
            raise EncoderError(
                "feature dims (d_v=%d, d_t=%d) do not match configuration "
                "(d_v=%d, d_t=%d)" % (video.shape[-1], text.shape[-1],
                                      self.cfg.d_v, self.cfg.d_t))
        return self.video_proj(video), self.text_proj(text)

    def t2v_cross_attention(self, video, text, text_mask):
        _check_rows(text_mask, "text")
        for layer in self.cross_layers:
            video = layer(video, text, text_mask)
        return video

    def forward(self, video, video_mask, text, text_mask):
        _check_rows(video_mask, "video")
        video, text = self.project_features(video, text)
        global_video = global_pool(video, video_mask)
        global_text = global_pool(text, text_mask)
        video = self.visual_refinement(video)
        fused = self.t2v_cross_attention(video, text, text_mask)
        pos = clip_sine_embedding(video_mask, self.cfg.D, fused.dtype)
        for layer in self.self_layers:
            fused = layer(fused, pos, video_mask)
        saliency = self.saliency_head(fused).squeeze(-1)
        return EncoderOutput(fused=fused, saliency_scores=saliency,
                             global_video=global_video,
                             global_text=global_text, video_mask=video_mask)

    def encode(self, batch):
        return self(batch.video, batch.video_mask, batch.text,
                    batch.text_mask)
