# coding: utf-8

import ast
import copy
from os import environ as os_environ, getenv, path

from rgtr.data import SynthConfig
from rgtr.decoder import DecoderConfig, INIT_STRATEGIES
from rgtr.encoder import EncoderConfig
from rgtr.evaluation import SCORING_MODES
from rgtr.objectives import IOU_LOSS_TYPES, LossWeights
from rgtr.utils import execute
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


CONFIGDIR = path.join(getenv("APPDATA",
                              path.expanduser(path.join("~", ".config"))),
                       "rgtr")
CONFIGFILE = path.join(CONFIGDIR, "default")
SEED_ENV = "RGTR_SEED"
NULLABLE = frozenset(["optim.clip_norm"])

PRESETS = {
    "qvhighlights": dict(model=dict(K=20), loss=dict(saliency=1.0)),
    "charades": dict(model=dict(K=10), loss=dict(saliency=4.0)),
    "tacos": dict(model=dict(K=10), loss=dict(saliency=4.0)),
}


class ConfigurationError(Exception):
    """Configuration parameter is not allowed or out of range."""


class FallbackFileType(object):
    """Factory for creating file object types with fallback directory

    Returns a file object using the builtin :py:func:`open`() function.

    If the path passed to an instance of this class does not exist and
    the path contains just a filename (no directories) this class tries
    to open the file in the fallback directory.

    """

    def __init__(self, mode='r', fallback=CONFIGDIR, **kwargs):
        self._mode = mode
        self._kwargs = kwargs
        self._fallback = fallback

    def __call__(self, path_or_filename):
        try:
            return open(path_or_filename, self._mode, **self._kwargs)
        except IOError:
            # argument is just a filename (no directory components)
            if path.basename(path_or_filename) == path_or_filename:
                return open(path.join(self._fallback, path_or_filename),
                            self._mode, **self._kwargs)
            raise


def _check(key, ok, value, expected):
    if not ok:
        raise ConfigurationError("Configuration parameter '%s' = %r is out "
                                 "of range (expected %s)."
                                 % (key, value, expected))


def _check_type(key, default, value):
    if default is None or (value is None and key in NULLABLE):
        return
    if isinstance(default, bool):
        ok, expected = isinstance(value, bool), "bool"
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
        expected = "integer"
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        expected = "number"
    else:
        ok, expected = isinstance(value, type(default)), type(default).__name__
    if not ok:
        raise ConfigurationError("Configuration parameter '%s' = %r has the "
                                 "wrong type (expected %s)."
                                 % (key, value, expected))


class RunConfig(object):
    """Holds all parameters of one run

    Every section is a dictionary declared as class attribute; instances
    start from deep copies of these defaults. A configuration file is
    python source whose top-level names are sections, e.g.::

        preset = "charades"
        model = dict(D=128, num_decoder_layers=3)
        optim = dict(epochs=50, batch_size=32)

    Only keys declared here are accepted; anything else raises a
    :py:class:`ConfigurationError` naming the dotted key.

    """

    # -- sections --------------------------------------------------------
    data = dict(
        manifest=None,
        val_manifest=None,
        val_size=100,
        anchor_file=None,
        synth=dict(
            num_samples=600,
            L=32,
            d_v=32,
            d_t=32,
            vocab_size=8,
            max_events_per_video=3,
            noise_std=0.1,
            seed=0,
        ),
    )
    """Data sources: a JSON Lines ``manifest`` (the last ``val_size``
    samples are held out unless ``val_manifest`` is given) or, without a
    manifest, a synthetic dataset generated from ``synth``."""

    model = dict(
        D=256,
        heads=8,
        num_cross_layers=3,
        num_self_layers=3,
        num_decoder_layers=3,
        ffn_dim=1024,
        dropout=0.1,
        K=20,
        init_strategy="kmeans",
        region_guided_attention=True,
        logit_space_update=False,
        explicit_anchors=True,
        iou_head=True,
    )
    """Encoder and decoder shapes, number of anchor pairs ``K`` and anchor
    initialization strategy (``kmeans``, ``uniform_grid`` or ``random``).
    ``explicit_anchors=False`` replaces the anchors by plain learnable
    queries started from random spans, ``iou_head=False`` drops the IoU
    branch so ranking falls back to confidence."""

    loss = dict(
        l1=10.0,
        giou=1.0,
        focal=1.0,
        focal_alpha=0.25,
        focal_gamma=2.0,
        saliency=1.0,
        alignment=0.3,
        iou=1.0,
        iou_loss_type="L2",
        iou_include_background=False,
        saliency_margin=0.2,
        saliency_pairs=64,
    )
    """Loss weights and IoU loss type (``L2``, ``L1`` or ``Huber``)."""

    optim = dict(
        lr=1e-4,
        weight_decay=1e-4,
        batch_size=32,
        epochs=200,
        clip_norm=0.1,
        seed=0,
        eval_every=1,
        device="cpu",
    )
    """AdamW parameters, schedule and seed (overridden by ``RGTR_SEED``)."""

    eval = dict(
        nms_threshold=0.8,
        scoring="product",
        batch_size=64,
    )
    """Ranking mode (``product``, ``sum`` or ``conf_only``) and NMS."""

    output_dir = "runs/default"
    """Directory receiving anchors, checkpoints, logs and reports."""

    preset = None
    """Dataset preset applied before explicit keys: ``qvhighlights``,
    ``charades`` or ``tacos``."""

    _sections = ("data", "model", "loss", "optim", "eval")
    _scalars = ("output_dir", "preset")

    def __init__(self, cfg=None):
        for name in self._sections + self._scalars:
            setattr(self, name, copy.deepcopy(getattr(type(self), name)))
        if cfg:
            self.apply(cfg)

    # -- population ------------------------------------------------------
    def apply(self, cfg):
        """Merge mapping ``cfg`` into this configuration and validate."""
        cfg = dict(cfg)
        for attr in cfg:
            if attr not in self._sections + self._scalars:
                raise ConfigurationError("Configuration parameter '%s' is not "
                                         "allowed in the configuration file."
                                         % attr)
        preset = cfg.pop("preset", None)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigurationError("Unknown preset '%s' (choose from "
                                         "%s)." % (preset,
                                                   ", ".join(sorted(PRESETS))))
            self.preset = preset
            for section, values in PRESETS[preset].items():
                self._merge(section, getattr(self, section), values,
                            getattr(type(self), section))
        for attr, value in cfg.items():
            if attr in self._sections:
                if not isinstance(value, dict):
                    raise ConfigurationError("Configuration parameter '%s' "
                                             "must be a dict." % attr)
                self._merge(attr, getattr(self, attr), value,
                            getattr(type(self), attr))
            else:
                setattr(self, attr, value)
        self.validate()
        return self

    def _merge(self, prefix, target, values, defaults):
        for key, value in values.items():
            dotted = "%s.%s" % (prefix, key)
            if key not in target:
                raise ConfigurationError("Configuration parameter '%s' is not "
                                         "allowed." % dotted)
            if isinstance(target[key], dict):
                if not isinstance(value, dict):
                    raise ConfigurationError("Configuration parameter '%s' "
                                             "must be a dict." % dotted)
                self._merge(dotted, target[key], value, defaults[key])
            else:
                _check_type(dotted, defaults[key], value)
                target[key] = value

    def set(self, dotted, value):
        """Apply one ``section.key=value`` override."""
        parts = dotted.split('.')
        cfg = value
        for part in reversed(parts):
            cfg = {part: cfg}
        return self.apply(cfg)

    def apply_overrides(self, overrides):
        """Apply ``key=value`` strings; values are python literals or
        plain strings."""
        for item in overrides or ():
            if '=' not in item:
                raise ConfigurationError("Override '%s' is not of the form "
                                         "key=value." % item)
            key, raw = item.split('=', 1)
            try:
                value = ast.literal_eval(raw)
            except (ValueError, SyntaxError):
                value = raw
            self.set(key.strip(), value)
        return self

    def apply_env(self, environ=None):
        seed = (os_environ if environ is None else environ).get(SEED_ENV)
        if seed is not None:
            try:
                self.optim["seed"] = int(seed)
            except ValueError:
                raise ConfigurationError("%s=%r is not an integer."
                                         % (SEED_ENV, seed))
        return self

    # -- validation ------------------------------------------------------
    def validate(self):
        m, lo, o, e = self.model, self.loss, self.optim, self.eval

        for key in ("D", "heads", "num_cross_layers", "num_self_layers",
                    "num_decoder_layers", "ffn_dim", "K"):
            _check("model." + key, isinstance(m[key], int) and m[key] >= 1,
                   m[key], "integer >= 1")
        _check("model.D", m["D"] % m["heads"] == 0 and m["D"] % 4 == 0,
               m["D"], "multiple of 4 and of model.heads")
        _check("model.dropout", 0.0 <= m["dropout"] < 1.0, m["dropout"],
               "[0, 1)")
        _check("model.init_strategy", m["init_strategy"] in INIT_STRATEGIES,
               m["init_strategy"], "one of %s" % ", ".join(INIT_STRATEGIES))
        for key in ("l1", "giou", "focal", "focal_alpha", "focal_gamma",
                    "saliency", "alignment", "iou", "saliency_margin"):
            _check("loss." + key, lo[key] >= 0, lo[key], ">= 0")
        _check("loss.iou_loss_type", lo["iou_loss_type"] in IOU_LOSS_TYPES,
               lo["iou_loss_type"], "one of %s" % ", ".join(IOU_LOSS_TYPES))
        _check("loss.saliency_pairs", lo["saliency_pairs"] >= 1,
               lo["saliency_pairs"], ">= 1")
        _check("optim.lr", o["lr"] > 0, o["lr"], "> 0")
        _check("optim.weight_decay", o["weight_decay"] >= 0,
               o["weight_decay"], ">= 0")
        _check("optim.batch_size", o["batch_size"] >= 1, o["batch_size"],
               ">= 1")
        _check("optim.epochs", o["epochs"] >= 0, o["epochs"], ">= 0")
        _check("optim.eval_every", o["eval_every"] >= 1, o["eval_every"],
               ">= 1")
        _check("optim.clip_norm", o["clip_norm"] is None or
               o["clip_norm"] > 0, o["clip_norm"], "> 0 or None")
        _check("eval.nms_threshold", 0.0 < e["nms_threshold"] <= 1.0,
               e["nms_threshold"], "(0, 1]")
        _check("eval.scoring", e["scoring"] in SCORING_MODES, e["scoring"],
               "one of %s" % ", ".join(SCORING_MODES))
        _check("eval.batch_size", e["batch_size"] >= 1, e["batch_size"],
               ">= 1")
        _check("data.val_size", self.data["val_size"] >= 0,
               self.data["val_size"], ">= 0")
        try:
            self.synth_config().validate()
        except ValueError as err:
            raise ConfigurationError("Configuration section 'data.synth': %s"
                                     % err)

    # -- views -----------------------------------------------------------
    def to_dict(self):
        return {name: copy.deepcopy(getattr(self, name))
                for name in self._sections + self._scalars}

    def copy(self):
        return RunConfig(self.to_dict())

    def synth_config(self):
        return SynthConfig(**self.data["synth"])

    def encoder_config(self, d_v, d_t):
        m = self.model
        return EncoderConfig(d_v=d_v, d_t=d_t, D=m["D"], heads=m["heads"],
                             num_cross_layers=m["num_cross_layers"],
                             num_self_layers=m["num_self_layers"],
                             ffn_dim=m["ffn_dim"], dropout=m["dropout"])

    def decoder_config(self):
        m = self.model
        return DecoderConfig(K=m["K"], num_layers=m["num_decoder_layers"],
                             D=m["D"], heads=m["heads"], ffn_dim=m["ffn_dim"],
                             dropout=m["dropout"],
                             region_guided_attention=m[
                                 "region_guided_attention"],
                             logit_space_update=m["logit_space_update"],
                             explicit_anchors=m["explicit_anchors"],
                             iou_head=m["iou_head"])

    def loss_weights(self):
        lo = self.loss
        return LossWeights(l1=lo["l1"], giou=lo["giou"], focal=lo["focal"],
                           focal_alpha=lo["focal_alpha"],
                           focal_gamma=lo["focal_gamma"],
                           saliency=lo["saliency"],
                           alignment=lo["alignment"], iou=lo["iou"])


def read_config(path=CONFIGFILE, cls=FallbackFileType('r')):
    """Execute a configuration file and return its public names."""
    ns = execute(path, cls=cls, globals=dict(PRESETS=PRESETS))
    return {k: v for k, v in ns.items() if not k.startswith('_')}


def load_run_config(configfile=None, overrides=None, environ=None,
                    base=None):
    """Build a :py:class:`RunConfig` from an optional file, ``key=value``
    overrides and the environment, in this order.

    Without a file the run starts from a copy of ``base`` if given.

    """
    cfg = base.copy() if base is not None and configfile is None \
        else RunConfig()
    if configfile is not None:
        cfg.apply(read_config(configfile))
    cfg.apply_overrides(overrides)
    cfg.apply_env(environ)
    return cfg
