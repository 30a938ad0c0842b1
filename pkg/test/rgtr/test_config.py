# coding: utf-8

import os
import shutil
import tempfile
import textwrap
import unittest

from rgtr._config import ConfigurationError, FallbackFileType, RunConfig, \
    load_run_config, read_config


class TestRunConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = RunConfig()
        self.assertEqual(cfg.optim["lr"], 1e-4)
        self.assertEqual(cfg.optim["weight_decay"], 1e-4)
        self.assertEqual(cfg.optim["batch_size"], 32)
        self.assertEqual(cfg.optim["epochs"], 200)
        self.assertEqual(cfg.optim["clip_norm"], 0.1)
        self.assertEqual(cfg.eval["nms_threshold"], 0.8)
        self.assertEqual(cfg.model["K"], 20)
        self.assertEqual(cfg.loss["alignment"], 0.3)
        self.assertEqual(cfg.loss["iou_loss_type"], "L2")

    def test_instances_do_not_share_sections(self):
        a = RunConfig()
        a.model["K"] = 3
        self.assertEqual(RunConfig().model["K"], 20)
        self.assertEqual(RunConfig.model["K"], 20)

    def test_unknown_keys(self):
        with self.assertRaises(ConfigurationError) as ctx:
            RunConfig(dict(model=dict(Kay=3)))
        self.assertIn("model.Kay", str(ctx.exception))
        with self.assertRaises(ConfigurationError):
            RunConfig(dict(trainer=dict()))
        with self.assertRaises(ConfigurationError) as ctx:
            RunConfig(dict(data=dict(synth=dict(frames=3))))
        self.assertIn("data.synth.frames", str(ctx.exception))

    def test_section_type(self):
        with self.assertRaises(ConfigurationError):
            RunConfig(dict(model=5))

    def test_presets(self):
        cfg = RunConfig(dict(preset="charades"))
        self.assertEqual(cfg.model["K"], 10)
        self.assertEqual(cfg.loss["saliency"], 4.0)
        cfg = RunConfig(dict(preset="charades", model=dict(K=7)))
        self.assertEqual(cfg.model["K"], 7)
        self.assertEqual(RunConfig(dict(preset="qvhighlights")).model["K"],
                         20)
        with self.assertRaises(ConfigurationError):
            RunConfig(dict(preset="kinetics"))

    def test_ranges(self):
        for section, values in (("model", dict(K=0)),
                                ("model", dict(D=30, heads=3)),
                                ("model", dict(dropout=1.0)),
                                ("model", dict(init_strategy="spiral")),
                                ("loss", dict(giou=-1.0)),
                                ("loss", dict(iou_loss_type="L3")),
                                ("optim", dict(lr=0.0)),
                                ("optim", dict(batch_size=0)),
                                ("eval", dict(nms_threshold=0.0)),
                                ("eval", dict(scoring="max")),
                                ("data", dict(val_size=-1))):
            with self.assertRaises(ConfigurationError):
                RunConfig({section: values})

    def test_wrong_types(self):
        for section, values in (("optim", dict(lr="fast")),
                                ("optim", dict(epochs=2.5)),
                                ("model", dict(K=True)),
                                ("model", dict(region_guided_attention=1)),
                                ("eval", dict(scoring=3))):
            with self.assertRaises(ConfigurationError) as ctx:
                RunConfig({section: values})
            self.assertIn("%s.%s" % (section, list(values)[0]),
                          str(ctx.exception))
        with self.assertRaises(ConfigurationError):
            RunConfig().apply_overrides(["optim.lr=fast"])
        self.assertIsNone(RunConfig(dict(optim=dict(clip_norm=None)))
                          .optim["clip_norm"])
        self.assertEqual(RunConfig(dict(optim=dict(lr=1))).optim["lr"], 1)

    def test_synth_errors_are_configuration_errors(self):
        with self.assertRaises(ConfigurationError):
            RunConfig(dict(data=dict(synth=dict(num_samples=0))))

    def test_set(self):
        cfg = RunConfig()
        cfg.set("model.K", 5)
        cfg.set("output_dir", "elsewhere")
        self.assertEqual(cfg.model["K"], 5)
        self.assertEqual(cfg.output_dir, "elsewhere")
        with self.assertRaises(ConfigurationError):
            cfg.set("model.K", -1)

    def test_overrides(self):
        cfg = RunConfig().apply_overrides(["model.K=10",
                                           "eval.scoring=conf_only",
                                           "loss.iou_include_background=True",
                                           "data.synth.noise_std=0.0"])
        self.assertEqual(cfg.model["K"], 10)
        self.assertEqual(cfg.eval["scoring"], "conf_only")
        self.assertIs(cfg.loss["iou_include_background"], True)
        self.assertEqual(cfg.data["synth"]["noise_std"], 0.0)
        with self.assertRaises(ConfigurationError):
            RunConfig().apply_overrides(["model.K"])

    def test_seed_env(self):
        cfg = RunConfig().apply_env(dict(RGTR_SEED="17"))
        self.assertEqual(cfg.optim["seed"], 17)
        self.assertEqual(RunConfig().apply_env({}).optim["seed"], 0)
        with self.assertRaises(ConfigurationError):
            RunConfig().apply_env(dict(RGTR_SEED="seventeen"))

    def test_views(self):
        cfg = RunConfig(dict(model=dict(D=16, heads=2, K=4,
                                        num_decoder_layers=2),
                             loss=dict(saliency=4.0)))
        enc = cfg.encoder_config(12, 10)
        self.assertEqual((enc.d_v, enc.d_t, enc.D, enc.heads),
                         (12, 10, 16, 2))
        dec = cfg.decoder_config()
        self.assertEqual((dec.K, dec.num_layers, dec.D), (4, 2, 16))
        self.assertTrue(dec.explicit_anchors and dec.iou_head)
        dec = RunConfig(dict(model=dict(explicit_anchors=False,
                                        iou_head=False))).decoder_config()
        self.assertEqual((dec.explicit_anchors, dec.iou_head), (False, False))
        self.assertEqual(cfg.loss_weights().saliency, 4.0)
        self.assertEqual(cfg.synth_config().L, 32)

    def test_copy_is_independent(self):
        cfg = RunConfig(dict(model=dict(K=4)))
        other = cfg.copy()
        other.set("model.K", 8)
        self.assertEqual(cfg.model["K"], 4)
        self.assertEqual(other.to_dict()["model"]["K"], 8)


class TestConfigFile(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()
        self.path = os.path.join(self.tmpdir, "run.py")
        with open(self.path, 'w') as fd:
            fd.write(textwrap.dedent('''\
                preset = "tacos"
                model = dict(D=128)
                optim = dict(epochs=50, seed=1)
                _scratch = 3
                '''))

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_read_config(self):
        ns = read_config(self.path)
        self.assertEqual(sorted(ns), ["model", "optim", "preset"])

    def test_load_order(self):
        cfg = load_run_config(self.path, ["optim.seed=2"], dict(RGTR_SEED="3"))
        self.assertEqual(cfg.model["D"], 128)
        self.assertEqual(cfg.model["K"], 10)
        self.assertEqual(cfg.optim["epochs"], 50)
        self.assertEqual(cfg.optim["seed"], 3)
        cfg = load_run_config(self.path, ["optim.seed=2"], {})
        self.assertEqual(cfg.optim["seed"], 2)

    def test_load_from_base(self):
        base = RunConfig(dict(optim=dict(lr=1e-3)))
        cfg = load_run_config(None, ["model.K=3"], {}, base=base)
        self.assertEqual((cfg.optim["lr"], cfg.model["K"]), (1e-3, 3))
        self.assertEqual(base.model["K"], 20)
        cfg = load_run_config(self.path, environ={}, base=base)
        self.assertEqual(cfg.optim["lr"], 1e-4)
        self.assertEqual(cfg.optim["epochs"], 50)

    def test_fallback_directory(self):
        fd = FallbackFileType('r', fallback=self.tmpdir)("run.py")
        try:
            self.assertEqual(fd.name, self.path)
        finally:
            fd.close()
        with self.assertRaises(IOError):
            FallbackFileType('r', fallback=self.tmpdir)(
                os.path.join("nowhere", "run.py"))

    def test_module_level_config(self):
        from rgtr.config import config
        self.assertIsInstance(config, RunConfig)
        self.assertIsNot(config.model, RunConfig.model)

    def test_unknown_name_in_file(self):
        with open(self.path, 'a') as fd:
            fd.write("trainer = dict()\n")
        with self.assertRaises(ConfigurationError):
            load_run_config(self.path, environ={})


if __name__ == "__main__":
    unittest.main()
