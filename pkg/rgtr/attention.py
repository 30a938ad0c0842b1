# coding: utf-8
"""
Attention and feed-forward building blocks shared by the encoder and the
decoder.

:py:class:`MultiHeadAttention` allows query/key projections wider than the
value projection, which the decoder's cross-attention needs (queries and
keys are concatenations of content and positional embeddings while values
are content only). Key padding masks are ``True`` at valid positions.
"""

import math

import torch
from torch import nn
import torch.nn.functional as F
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


class MultiHeadAttention(nn.Module):
    """Scaled dot-product attention over ``heads`` heads.

    ``qk_dim`` is the width queries and keys are projected to, ``v_dim``
    the width of projected values and of the output. Scores are scaled by
    the square root of the per-head query/key width.

    """

    def __init__(self, qk_dim, v_dim, heads, dropout=0.0, q_in=None,
                 k_in=None, v_in=None):
        super(MultiHeadAttention, self).__init__()
        if qk_dim % heads or v_dim % heads:
            raise ValueError("attention widths %d/%d not divisible by %d heads"
                             % (qk_dim, v_dim, heads))
        self.heads = heads
        self.q_proj = nn.Linear(q_in or qk_dim, qk_dim)
        self.k_proj = nn.Linear(k_in or qk_dim, qk_dim)
        self.v_proj = nn.Linear(v_in or v_dim, v_dim)
        self.out_proj = nn.Linear(v_dim, v_dim)
        self.dropout = nn.Dropout(dropout)

    def _split(self, x):
        bsz, length, width = x.shape
        return x.view(bsz, length, self.heads, width // self.heads) \
            .transpose(1, 2)

    def forward(self, query, key, value, key_mask=None):
        """Return ``(output, weights)``; ``weights`` is
        ``B x heads x Tq x Tk``."""
        q = self._split(self.q_proj(query))
        k = self._split(self.k_proj(key))
        v = self._split(self.v_proj(value))
        scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
        if key_mask is not None:
            scores = scores.masked_fill(~key_mask[:, None, None, :],
                                        float("-inf"))
        weights = scores.softmax(-1)
        out = self.dropout(weights) @ v
        bsz, _, length, _ = out.shape
        out = out.transpose(1, 2).reshape(bsz, length, -1)
        return self.out_proj(out), weights


class FeedForward(nn.Module):
    """Position-wise feed-forward sublayer with residual and layer norm."""

    def __init__(self, dim, ffn_dim, dropout=0.0):
        super(FeedForward, self).__init__()
        self.linear1 = nn.Linear(dim, ffn_dim)
        self.linear2 = nn.Linear(ffn_dim, dim)
        self.dropout = nn.Dropout(dropout)
        self.norm = nn.LayerNorm(dim)

    def forward(self, x):
        y = self.linear2(self.dropout(F.relu(self.linear1(x))))
        return self.norm(x + self.dropout(y))


class LinearLayer(nn.Module):
    """Layer norm, dropout, linear and optional ReLU."""

    def __init__(self, in_dim, out_dim, dropout=0.1, relu=True):
        super(LinearLayer, self).__init__()
        self.norm = nn.LayerNorm(in_dim)
        self.dropout = nn.Dropout(dropout)
        self.linear = nn.Linear(in_dim, out_dim)
        self.relu = relu

    def forward(self, x):
        x = self.linear(self.dropout(self.norm(x)))
        return F.relu(x) if self.relu else x


class MLP(nn.Module):
    """Plain multi-layer perceptron with ReLU between layers."""

    def __init__(self, in_dim, hidden_dim, out_dim, num_layers):
        super(MLP, self).__init__()
        dims = [in_dim] + [hidden_dim] * (num_layers - 1) + [out_dim]
        self.layers = nn.ModuleList(nn.Linear(a, b)
                                    for a, b in zip(dims[:-1], dims[1:]))

    def forward(self, x):
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = F.relu(x)
        return x
