# coding: utf-8

import math

import torch
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


TEMPERATURE = 10000.0


def sine_embedding(positions, dim, temperature=TEMPERATURE):
    """Sinusoidal encoding of normalized positions.

    ``positions`` of shape ``(...)`` map to ``(..., dim)``: the first
    ``dim / 2`` channels are sines, the last ``dim / 2`` cosines of
    ``2 * pi * position / temperature ** (i / (dim / 2))``.

    """
    if dim % 2:
        raise ValueError("sine embedding dimension must be even, got %d" % dim)
    half = dim // 2
    freqs = temperature ** (torch.arange(half, dtype=positions.dtype,
                                         device=positions.device) / half)
    angles = positions[..., None] * (2 * math.pi) / freqs
    return torch.cat([angles.sin(), angles.cos()], dim=-1)


def span_sine_embedding(spans, dim):
    """``(..., 2)`` center/width spans to ``(..., dim)``: ``dim / 2``
    channels for the center followed by ``dim / 2`` for the width."""
    if dim % 4:
        raise ValueError("span embedding dimension must be divisible by 4, "
                         "got %d" % dim)
    return torch.cat([sine_embedding(spans[..., 0], dim // 2),
                      sine_embedding(spans[..., 1], dim // 2)], dim=-1)


def clip_positions(mask):
    """Normalized clip midpoints ``(t + 0.5) / L`` per row of a ``B x T``
    validity mask, ``L`` being the row's number of valid clips."""
    lengths = mask.sum(1, keepdim=True).clamp(min=1)
    steps = torch.arange(mask.shape[1], device=mask.device)[None, :]
    return (steps + 0.5) / lengths


def clip_sine_embedding(mask, dim, dtype=torch.float32):
    """``B x T x dim`` sinusoidal encoding of clip positions."""
    return sine_embedding(clip_positions(mask).to(dtype), dim)
