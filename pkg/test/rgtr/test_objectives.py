# coding: utf-8

import itertools
import math
import unittest

import numpy as np
import torch
import torch.nn.functional as F

from rgtr.objectives import GroundingCriterion, LossWeights, MatchResult, \
    PredictionHead, TrainingError, hungarian_match, iou_loss, iou_targets, \
    linear_assignment, moment_loss, overall_loss, sigmoid_focal_loss
from test.rgtr.fixtures import micro_batch, micro_model


def single_match(pairs):
    return MatchResult([(torch.tensor([q for q, _ in sample],
                                      dtype=torch.int64),
                         torch.tensor([g for _, g in sample],
                                      dtype=torch.int64))
                        for sample in pairs])


def f64(data):
    return torch.tensor(data, dtype=torch.float64)


class TestPredictionHead(unittest.TestCase):

    def test_zero_content(self):
        head = PredictionHead(8)
        anchors = torch.rand(2, 3, 2)
        out = head(torch.zeros(2, 3, 8), anchors)
        self.assertTrue(torch.equal(out.spans, anchors))
        torch.testing.assert_close(out.conf, torch.full((2, 3), 0.5))
        torch.testing.assert_close(out.iou_pred, torch.full((2, 3), 0.5))
        self.assertEqual(head.offsets(torch.randn(2, 3, 8)).abs().max()
                         .item(), 0.0)

    def test_without_iou_branch(self):
        head = PredictionHead(8, with_iou=False)
        self.assertIsNone(head.iou_head)
        self.assertFalse(any(name.startswith("iou_head")
                             for name, _ in head.named_parameters()))
        out = head(torch.randn(2, 3, 8), torch.rand(2, 3, 2))
        self.assertTrue(torch.equal(out.iou_pred, torch.ones(2, 3)))


class TestAssignment(unittest.TestCase):

    def test_two_by_two(self):
        cost = np.array([[1.0, 2.0], [2.0, 1.0]])
        rows, cols = linear_assignment(cost)
        self.assertEqual(rows.tolist(), [0, 1])
        self.assertEqual(cols.tolist(), [0, 1])
        self.assertEqual(cost[rows, cols].sum(), 2.0)

    def test_constant_shift(self):
        rng = np.random.default_rng(0)
        cost = rng.random((5, 3))
        self.assertEqual(linear_assignment(cost)[1].tolist(),
                         linear_assignment(cost + 7.5)[1].tolist())

    def test_brute_force(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            k = int(rng.integers(1, 8))
            g = int(rng.integers(1, k + 1))
            cost = rng.random((k, g))
            rows, cols = linear_assignment(cost)
            self.assertEqual(len(rows), g)
            self.assertEqual(len(set(rows.tolist())), g)
            best = min(sum(cost[q, j] for j, q in enumerate(perm))
                       for perm in itertools.permutations(range(k), g))
            self.assertAlmostEqual(cost[rows, cols].sum(), best, places=12)


class TestHungarianMatch(unittest.TestCase):

    def test_exact_spans(self):
        spans = f64([[[0.2, 0.2], [0.5, 0.4], [0.8, 0.3]]])
        conf = f64([[0.5, 0.5, 0.5]])
        targets = [f64([[0.8, 0.3], [0.2, 0.2]])]
        match = hungarian_match(spans, conf, targets, LossWeights())
        queries, gts = match.indices[0]
        self.assertEqual(queries.tolist(), [0, 2])
        self.assertEqual(gts.tolist(), [1, 0])
        self.assertEqual(match.num_matched, 2)
        self.assertEqual(match.foreground(3).tolist(),
                         [[True, False, True]])

    def test_cardinality(self):
        torch.manual_seed(0)
        spans = torch.rand(2, 5, 2) * 0.8 + 0.1
        targets = [f64([[0.3, 0.2], [0.7, 0.1]]), f64([[0.5, 0.5]])]
        match = hungarian_match(spans, torch.rand(2, 5), targets,
                                LossWeights())
        self.assertEqual([len(q) for q, _ in match.indices], [2, 1])
        for q, g in match.indices:
            self.assertEqual(len(set(q.tolist())), len(q))
            self.assertEqual(len(set(g.tolist())), len(g))

    def test_requires_ground_truth(self):
        with self.assertRaises(ValueError):
            hungarian_match(torch.rand(1, 2, 2), torch.rand(1, 2),
                            [torch.zeros(0, 2)], LossWeights())


class TestFocalLoss(unittest.TestCase):

    def test_bce_identity(self):
        logits = f64([-2.0, -0.1, 0.0, 0.7, 3.0])
        targets = f64([0.0, 1.0, 1.0, 0.0, 1.0])
        focal = sigmoid_focal_loss(logits, targets, alpha=0.5, gamma=0.0)
        bce = F.binary_cross_entropy_with_logits(logits, targets,
                                                 reduction="none")
        torch.testing.assert_close(focal, 0.5 * bce, atol=1e-9, rtol=0)

    def test_value_at_zero_logit(self):
        loss = sigmoid_focal_loss(f64([0.0]), f64([1.0]))
        self.assertAlmostEqual(float(loss), 0.25 * 0.25 * math.log(2),
                               places=12)


class TestMomentLoss(unittest.TestCase):

    def test_l1_part(self):
        spans = f64([[[0.5, 0.2]]])
        targets = [f64([[0.6, 0.3]])]
        _, parts = moment_loss(spans, f64([[0.0]]), targets,
                               single_match([[(0, 0)]]), LossWeights())
        self.assertAlmostEqual(float(parts["span_l1"]), 0.2, places=12)

    def test_hand_built(self):
        spans = f64([[[0.5, 0.2], [0.1, 0.1]]])
        logits = f64([[0.0, 0.0]])
        targets = [f64([[0.6, 0.2]])]
        match = single_match([[(0, 0)]])
        total, parts = moment_loss(spans, logits, targets, match,
                                   LossWeights())
        l1 = 0.1
        giou = 1 - 1 / 3.0
        fg = 0.25 * 0.25 * math.log(2)
        bg = 0.75 * 0.25 * math.log(2)
        self.assertAlmostEqual(float(parts["span_l1"]), l1, places=9)
        self.assertAlmostEqual(float(parts["span_giou"]), giou, places=9)
        self.assertAlmostEqual(float(parts["focal"]), fg + bg, places=9)
        self.assertAlmostEqual(float(total), 10 * l1 + giou + fg + bg,
                               places=6)

    def test_perfect_prediction(self):
        spans = f64([[[0.3, 0.2], [0.7, 0.4]]])
        logits = f64([[20.0, -20.0]])
        _, parts = moment_loss(spans, logits, [f64([[0.3, 0.2]])],
                               single_match([[(0, 0)]]), LossWeights())
        self.assertEqual(float(parts["span_l1"]), 0.0)
        self.assertAlmostEqual(float(parts["span_giou"]), 0.0, places=12)
        self.assertLess(float(parts["focal"]), 1e-9)

    def test_gradcheck(self):
        targets = [f64([[0.45, 0.3]]), f64([[0.3, 0.2], [0.75, 0.1]])]
        match = single_match([[(1, 0)], [(0, 1), (2, 0)]])
        spans = f64([[[0.2, 0.1], [0.5, 0.25], [0.8, 0.3]],
                     [[0.7, 0.15], [0.4, 0.4], [0.35, 0.22]]]) \
            .requires_grad_(True)
        logits = torch.randn(2, 3, dtype=torch.float64, requires_grad=True)

        def loss(s, lg):
            return moment_loss(s, lg, targets, match, LossWeights())[0]

        self.assertTrue(torch.autograd.gradcheck(loss, (spans, logits)))


class TestIoULoss(unittest.TestCase):

    def test_targets(self):
        spans = f64([[[0.4, 0.2], [0.1, 0.1]]])
        match = single_match([[(0, 0)]])
        targets = iou_targets(spans, [f64([[0.5, 0.2]])], match)
        self.assertAlmostEqual(float(targets[0, 0]), 1 / 3.0, places=12)
        self.assertEqual(float(targets[0, 1]), 0.0)
        perfect = iou_targets(spans, [f64([[0.4, 0.2]])], match)
        self.assertAlmostEqual(float(perfect[0, 0]), 1.0, places=12)

    def test_targets_carry_no_gradient(self):
        spans = f64([[[0.4, 0.2]]]).requires_grad_(True)
        targets = iou_targets(spans, [f64([[0.5, 0.2]])],
                              single_match([[(0, 0)]]))
        self.assertFalse(targets.requires_grad)

    def test_examples(self):
        match = single_match([[(0, 0)]])
        self.assertEqual(float(iou_loss(f64([[0.5, 0.9]]), f64([[0.5, 0.0]]),
                                        match)), 0.0)
        self.assertAlmostEqual(float(iou_loss(f64([[0.5, 0.9]]),
                                              f64([[1.0, 0.0]]), match)),
                               0.25)
        two = single_match([[(0, 0), (1, 1)]])
        self.assertAlmostEqual(float(iou_loss(f64([[0.5, 0.5]]),
                                              f64([[0.6, 0.8]]), two)), 0.05)

    def test_loss_types(self):
        match = single_match([[(0, 0)]])
        pred, tgt = f64([[0.5, 0.2]]), f64([[1 / 3.0, 0.0]])
        self.assertAlmostEqual(float(iou_loss(pred, tgt, match, "L1")),
                               1 / 6.0)
        self.assertAlmostEqual(float(iou_loss(pred, tgt, match, "Huber")),
                               0.1 * (1 / 6.0 - 0.05))
        self.assertAlmostEqual(
            float(iou_loss(pred, tgt, match, "L2", include_background=True)),
            ((1 / 6.0) ** 2 + 0.04) / 2)
        with self.assertRaises(ValueError):
            iou_loss(pred, tgt, match, "L3")

    def test_gradcheck(self):
        match = single_match([[(0, 0), (2, 1)]])
        pred = f64([[0.3, 0.6, 0.9]]).requires_grad_(True)
        tgt = f64([[0.5, 0.0, 0.2]])
        for loss_type in ("L2", "L1", "Huber"):
            self.assertTrue(torch.autograd.gradcheck(
                lambda p: iou_loss(p, tgt, match, loss_type), (pred, )))


class TestOverallLoss(unittest.TestCase):

    def test_weighted_sum(self):
        components = dict(moment=1.0, saliency=1.0, alignment=1.0, iou=1.0)
        self.assertAlmostEqual(overall_loss(components, LossWeights()), 3.3)
        zero = LossWeights(saliency=0, alignment=0, iou=0)
        self.assertEqual(overall_loss(dict(components, moment=2.5), zero),
                         2.5)
        self.assertEqual(overall_loss(dict(moment=0.0, saliency=0.0,
                                           alignment=0.0, iou=0.0),
                                      LossWeights()), 0.0)

    def test_not_finite(self):
        components = dict(moment=1.0, saliency=float("nan"), alignment=1.0,
                          iou=1.0)
        with self.assertRaises(TrainingError) as ctx:
            overall_loss(components, LossWeights(), step=7)
        self.assertEqual(ctx.exception.component, "saliency")
        self.assertEqual(ctx.exception.step, 7)
        self.assertIn("saliency", str(ctx.exception))

    def test_negative_weight(self):
        with self.assertRaises(ValueError):
            LossWeights(iou=-1).validate()


class TestGroundingCriterion(unittest.TestCase):

    def test_components(self):
        model = micro_model()
        batch = micro_batch()
        total, logged = GroundingCriterion()(model.run(batch), batch, step=0)
        for key in ("moment", "saliency", "alignment", "iou", "span_l1",
                    "span_giou", "focal", "total"):
            self.assertIn(key, logged)
            self.assertTrue(math.isfinite(logged[key]))
        self.assertAlmostEqual(float(total), logged["total"])
        total.backward()
        grads = [p.grad for p in model.head.parameters()]
        self.assertTrue(all(g is not None for g in grads))

    def test_without_iou_head(self):
        model = micro_model(iou_head=False)
        batch = micro_batch()
        weights = LossWeights()
        total, logged = GroundingCriterion(weights, iou_head=False)(
            model.run(batch), batch, step=0)
        self.assertEqual(logged["iou"], 0.0)
        self.assertAlmostEqual(logged["total"],
                               logged["moment"] +
                               weights.saliency * logged["saliency"] +
                               weights.alignment * logged["alignment"])
        total.backward()

    def test_gradcheck(self):
        # one layer: carried anchors are detached between layers
        model = micro_model(num_layers=1)
        batch = micro_batch()
        criterion = GroundingCriterion()
        torch.manual_seed(1)
        with torch.no_grad():
            for p in model.head.offset_net.layers[-1].parameters():
                p.normal_(0.0, 0.01)
        video = batch.video.clone().requires_grad_(True)

        def total(v):
            output = model(v, batch.video_mask, batch.text, batch.text_mask)
            return criterion(output, batch)[0]

        self.assertTrue(torch.autograd.gradcheck(total, (video, ), eps=1e-6,
                                                 atol=1e-4))


if __name__ == "__main__":
    unittest.main()
