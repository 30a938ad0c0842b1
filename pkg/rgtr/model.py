# coding: utf-8

from dataclasses import dataclass
from typing import List

from torch import nn

from rgtr.decoder import DecoderLayerOutput, RegionGuidedDecoder
from rgtr.encoder import CrossModalAlignmentEncoder, EncoderOutput
from rgtr.objectives import HeadOutput, PredictionHead
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


@dataclass
class ModelOutput:
    encoder: EncoderOutput
    layers: List[DecoderLayerOutput]
    predictions: List[HeadOutput]

    @property
    def final(self):
        return self.predictions[-1]


class RegionGuidedTransformer(nn.Module):
    """Encoder, region-guided decoder and the shared prediction head."""

    def __init__(self, encoder_cfg, decoder_cfg, anchors):
        super(RegionGuidedTransformer, self).__init__()
        if encoder_cfg.D != decoder_cfg.D:
            raise ValueError("encoder D=%d and decoder D=%d differ"
                             % (encoder_cfg.D, decoder_cfg.D))
        self.encoder = CrossModalAlignmentEncoder(encoder_cfg)
        self.decoder = RegionGuidedDecoder(decoder_cfg, anchors)
        self.head = PredictionHead(decoder_cfg.D, decoder_cfg.iou_head)

    @property
    def anchor_set(self):
        return self.decoder.anchor_set

    def forward(self, video, video_mask, text, text_mask):
        enc = self.encoder(video, video_mask, text, text_mask)
        layers = self.decoder(enc.fused, video_mask, self.head)
        predictions = [self.head(out.content, out.anchors_out)
                       for out in layers]
        return ModelOutput(encoder=enc, layers=layers,
                           predictions=predictions)

    def run(self, batch):
        return self(batch.video, batch.video_mask, batch.text,
                    batch.text_mask)
