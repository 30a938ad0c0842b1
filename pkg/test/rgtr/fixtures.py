# coding: utf-8
"""Small shared builders for the rgtr test suite."""

import os

import numpy as np
import torch

from rgtr._config import RunConfig
from rgtr.data import GroundingSample, SynthConfig, collate, \
    generate_synthetic_dataset
from rgtr.decoder import DecoderConfig
from rgtr.encoder import EncoderConfig
from rgtr.model import RegionGuidedTransformer
from rgtr.spans import MomentSpan


SLOW = os.environ.get("RGTR_SLOW_TESTS") == "1"

MICRO_ANCHORS = [MomentSpan(0.2, 0.2), MomentSpan(0.5, 0.4),
                 MomentSpan(0.8, 0.3)]


def micro_model(K=3, D=8, heads=2, num_layers=3, dtype=torch.float64,
                **decoder_kwargs):
    """Micro model with dropout disabled: D=8, K=3, d_v=d_t=4."""
    torch.manual_seed(0)
    enc = EncoderConfig(d_v=4, d_t=4, D=D, heads=heads, num_cross_layers=1,
                        num_self_layers=1, ffn_dim=16, dropout=0.0)
    dec = DecoderConfig(K=K, num_layers=num_layers, D=D, heads=heads,
                        ffn_dim=16, dropout=0.0, **decoder_kwargs)
    anchors = MICRO_ANCHORS[:K] if K <= 3 else \
        [MomentSpan((i + 0.5) / K, 0.2) for i in range(K)]
    return RegionGuidedTransformer(enc, dec, anchors).to(dtype)


def micro_samples(B=2, L=6, N=3, seed=0):
    rng = np.random.default_rng(seed)
    moments = [[MomentSpan(0.25, 0.5)],
               [MomentSpan(0.5, 1.0 / 3), MomentSpan(0.9, 0.2)]]
    return [GroundingSample(id="s%d" % i,
                            video_features=rng.normal(size=(L - i, 4)),
                            text_features=rng.normal(size=(N + i, 4)),
                            moments=moments[i % 2])
            for i in range(B)]


def micro_batch(dtype=torch.float64, **kwargs):
    return collate(micro_samples(**kwargs)).to(dtype=dtype)


def tiny_run_config(output_dir, **sections):
    """Fast configuration on a 24-sample synthetic dataset."""
    cfg = dict(
        data=dict(val_size=8, synth=dict(num_samples=24, L=12, d_v=8, d_t=8,
                                         vocab_size=4)),
        model=dict(D=16, heads=2, num_cross_layers=1, num_self_layers=1,
                   num_decoder_layers=2, ffn_dim=32, dropout=0.0, K=4),
        optim=dict(epochs=1, batch_size=8),
        eval=dict(batch_size=8),
        output_dir=str(output_dir),
    )
    for name, values in sections.items():
        if isinstance(values, dict):
            cfg[name].update(values)
        else:
            cfg[name] = values
    return RunConfig(cfg)


def toy_dataset(num_samples, **kwargs):
    return generate_synthetic_dataset(SynthConfig(num_samples=num_samples,
                                                  **kwargs))
