# coding: utf-8
# pylint: disable=unused-import

from rgtr.spans import MomentSpan, ScoredSpan, SpanError, giou_1d, iou_1d, \
    kmeans_spans, nms
from rgtr.data import GroundingSample, SynthConfig, collate, \
    generate_synthetic_dataset, load_manifest, write_manifest
from rgtr.decoder import DecoderConfig, init_anchors
from rgtr.encoder import EncoderConfig
from rgtr.model import RegionGuidedTransformer
from rgtr.objectives import GroundingCriterion, LossWeights
from rgtr._config import ConfigurationError, RunConfig
# pylint: disable=protected-access
# pylint: disable=unused-import
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
