# coding: utf-8

import random
import unittest

import numpy as np

from rgtr.evaluation import EvaluationError, MAP_THRESHOLDS, \
    QueryPrediction, SamplePrediction, average_precision, build_report, \
    diversity_report, interpolated_prec_rec, joint_scores, \
    mean_average_precision, mean_iou, recall_at_1, score_and_rank, \
    score_iou_correlation
from rgtr.spans import MomentSpan, ScoredSpan, W_MIN, iou_1d


def ranked(*spans):
    return [ScoredSpan(MomentSpan(*s), 1.0 - 0.1 * i, i)
            for i, s in enumerate(spans)]


def prediction(sample_id, *spans):
    return SamplePrediction(sample_id, ranked(*spans))


def reference_ap(spans, gts, mu):
    used = set()
    hits = []
    for span in spans:
        options = [(iou_1d(span, gts[g]), -g) for g in range(len(gts))
                   if g not in used and iou_1d(span, gts[g]) >= mu]
        if options:
            used.add(-max(options)[1])
        hits.append(bool(options))
    precisions = [sum(hits[:k + 1]) / float(k + 1) for k in range(len(hits))]
    return sum(max(precisions[k:]) / len(gts)
               for k in range(len(hits)) if hits[k])


class TestScoring(unittest.TestCase):

    def test_joint_scores(self):
        self.assertEqual(joint_scores([1.0], [1.0]).tolist(), [1.0])
        np.testing.assert_allclose(joint_scores([0.9, 0.6], [0.3, 0.6]),
                                   [0.27, 0.36])
        np.testing.assert_allclose(joint_scores([0.9], [0.3], "sum"), [1.2])
        with self.assertRaises(ValueError):
            joint_scores([0.9], [0.3], "max")

    def test_product_ranking(self):
        spans = [(0.2, 0.1), (0.7, 0.1)]
        pred = score_and_rank(spans, [0.9, 0.6], [0.3, 0.6], "product", 0.8,
                              "s")
        self.assertEqual([c.query_index for c in pred.ranked], [1, 0])
        self.assertAlmostEqual(pred.top1.score, 0.36)
        self.assertEqual(pred.sample_id, "s")

    def test_conf_only_ranking(self):
        spans = [(0.2, 0.1), (0.7, 0.1)]
        pred = score_and_rank(spans, [0.9, 0.6], [0.3, 0.6], "conf_only")
        self.assertEqual([c.query_index for c in pred.ranked], [0, 1])

    def test_argsort_equivalence(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = 10
            conf, iou = rng.random(k), rng.random(k)
            # disjoint spans so nms keeps all of them
            spans = [((i + 0.5) / k, 0.5 / k) for i in range(k)]
            for mode, key in (("product", conf * iou), ("conf_only", conf)):
                pred = score_and_rank(spans, conf, iou, mode, 0.8)
                expected = sorted(range(k), key=lambda q: (-key[q], q))
                self.assertEqual([c.query_index for c in pred.ranked],
                                 expected)

    def test_clamped_spans(self):
        pred = score_and_rank([(1.2, -0.1)], [0.5], [0.5])
        self.assertEqual(pred.top1.span, (1.0, W_MIN))


class TestRecall(unittest.TestCase):

    def setUp(self):
        gt = MomentSpan(0.5, 0.2)
        self.gts = [[gt], [gt], [gt]]
        # top-1 IoUs 0.8, 0.6 and 0.4 against the ground truth [0.4, 0.6]
        self.preds = [prediction("a", (0.5, 0.16)),
                      prediction("b", (0.5, 0.12)),
                      prediction("c", (0.5, 0.08))]

    def test_count(self):
        self.assertAlmostEqual(recall_at_1(self.preds, self.gts, 0.5),
                               2 / 3.0)

    def test_monotone(self):
        values = [recall_at_1(self.preds, self.gts, mu)
                  for mu in (0.3, 0.5, 0.7, 0.9)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_multiple_ground_truths(self):
        gts = [[MomentSpan(0.1, 0.1), MomentSpan(0.8, 0.2)]]
        preds = [prediction("a", (0.8, 0.2))]
        self.assertEqual(recall_at_1(preds, gts, 0.7), 1.0)

    def test_empty_prediction_is_miss(self):
        preds = [SamplePrediction("a", []), prediction("b", (0.5, 0.2))]
        gts = [[MomentSpan(0.5, 0.2)]] * 2
        with self.assertLogs("rgtr.evaluation", "WARNING"):
            self.assertEqual(recall_at_1(preds, gts, 0.5), 0.5)

    def test_length_mismatch(self):
        with self.assertRaises(EvaluationError):
            recall_at_1(self.preds, self.gts[:2], 0.5)

    def test_mean_iou(self):
        preds = [prediction("a", (0.5, 0.2)), prediction("b", (0.5, 0.1))]
        gts = [[MomentSpan(0.5, 0.2)]] * 2
        self.assertAlmostEqual(mean_iou(preds, gts), 0.75)


class TestAveragePrecision(unittest.TestCase):

    def test_interpolation(self):
        self.assertAlmostEqual(interpolated_prec_rec(np.array([1.0, 0.5]),
                                                     np.array([0.5, 0.5])),
                               0.5)

    def test_exact_hit(self):
        gt = [MomentSpan(0.3, 0.2)]
        for mu in MAP_THRESHOLDS:
            self.assertEqual(average_precision([MomentSpan(0.3, 0.2)], gt,
                                               mu), 1.0)

    def test_no_hit(self):
        self.assertEqual(average_precision([MomentSpan(0.9, 0.1)],
                                           [MomentSpan(0.1, 0.1)], 0.5), 0.0)

    def test_hand_example(self):
        gts = [MomentSpan(0.2, 0.2), MomentSpan(0.7, 0.2)]
        spans = [MomentSpan(0.2, 0.2), MomentSpan(0.9, 0.05),
                 MomentSpan(0.7, 0.2)]
        # precision 1, 1/2, 2/3 at recall 1/2, 1/2, 1
        self.assertAlmostEqual(average_precision(spans, gts, 0.5),
                               0.5 * 1.0 + 0.5 * 2 / 3.0)

    def test_reference(self):
        rng = random.Random(0)
        for _ in range(200):
            gts = [MomentSpan(rng.random(), rng.uniform(0.05, 0.6))
                   for _ in range(rng.randint(1, 3))]
            spans = [MomentSpan(rng.random(), rng.uniform(0.05, 0.6))
                     for _ in range(rng.randint(1, 6))]
            mu = rng.choice(MAP_THRESHOLDS + (0.1, 0.3))
            self.assertAlmostEqual(average_precision(spans, gts, mu),
                                   reference_ap(spans, gts, mu), delta=1e-9)

    def test_mean_over_thresholds(self):
        preds = [prediction("a", (0.5, 0.2)), prediction("b", (0.52, 0.2))]
        gts = [[MomentSpan(0.5, 0.2)]] * 2
        per_threshold, average = mean_average_precision(preds, gts)
        self.assertEqual(sorted(per_threshold), list(MAP_THRESHOLDS))
        self.assertAlmostEqual(average, np.mean(list(per_threshold.values())))
        self.assertGreaterEqual(average, min(per_threshold.values()))
        self.assertLessEqual(average, max(per_threshold.values()))
        self.assertEqual(per_threshold[0.5], 1.0)
        self.assertEqual(per_threshold[0.95], 0.5)


class TestDiversity(unittest.TestCase):

    def per_query(self, spans_by_query):
        return {q: [QueryPrediction("s%d" % i, MomentSpan(*span), 0.5)
                    for i, span in enumerate(spans)]
                for q, spans in spans_by_query.items()}

    def test_single_query(self):
        report = diversity_report(self.per_query({0: [(0.5, 0.2),
                                                      (0.3, 0.4)]}))
        self.assertEqual(report.redundancy, 0.0)
        stats = report.queries[0]
        self.assertEqual(stats.count, 2)
        self.assertAlmostEqual(stats.center_mean, 0.4)
        self.assertAlmostEqual(stats.center_std, 0.1)
        self.assertAlmostEqual(stats.width_std, 0.1)

    def test_identical_queries(self):
        spans = [(0.5, 0.2), (0.3, 0.4)]
        report = diversity_report(self.per_query({0: spans, 1: spans}))
        self.assertAlmostEqual(report.redundancy, 1.0)

    def test_disjoint_queries(self):
        report = diversity_report(self.per_query({0: [(0.1, 0.1)] * 3,
                                                  1: [(0.8, 0.1)] * 3}))
        self.assertEqual(report.redundancy, 0.0)
        self.assertAlmostEqual(report.mean_center_std, 0.0)
        self.assertEqual(len(report.scatter), 6)
        self.assertEqual(report.scatter[0], (0, 0.1, 0.1, 0.5, "s0"))

    def test_relabeling_invariance(self):
        a = self.per_query({0: [(0.3, 0.2), (0.6, 0.3)],
                            1: [(0.35, 0.2), (0.1, 0.1)],
                            2: [(0.4, 0.5), (0.6, 0.2)]})
        b = {5: a[2], 3: a[0], 4: a[1]}
        self.assertAlmostEqual(diversity_report(a).redundancy,
                               diversity_report(b).redundancy)


class TestCorrelation(unittest.TestCase):

    def test_identity_line(self):
        slope, intercept = score_iou_correlation([0.1, 0.5, 0.9],
                                                 [0.1, 0.5, 0.9])
        self.assertAlmostEqual(slope, 1.0)
        self.assertAlmostEqual(intercept, 0.0)

    def test_constant_iou(self):
        self.assertAlmostEqual(score_iou_correlation([0.1, 0.4], [0.3, 0.3])
                               [0], 0.0)

    def test_closed_form(self):
        x = [0.0, 1.0, 2.0, 3.0]
        y = [1.0, 3.0, 2.0, 5.0]
        slope, intercept = score_iou_correlation(x, y)
        # sxy = 5.5, sxx = 5
        self.assertAlmostEqual(slope, 1.1, delta=1e-9)
        self.assertAlmostEqual(intercept, 2.75 - 1.1 * 1.5, delta=1e-9)

    def test_degenerate(self):
        with self.assertRaises(EvaluationError):
            score_iou_correlation([0.5, 0.5], [0.1, 0.9])
        with self.assertRaises(EvaluationError):
            score_iou_correlation([0.5], [0.1])


class TestBuildReport(unittest.TestCase):

    def test_report(self):
        preds = [prediction("a", (0.5, 0.2)), prediction("b", (0.5, 0.12))]
        gts = [[MomentSpan(0.5, 0.2)]] * 2
        points = [(0.9, 0.9, 1.0), (0.2, 0.3, 0.5), (0.5, 0.5, 0.6)]
        report = build_report(preds, gts, "product", correlation_points=points)
        self.assertEqual(report.r1[0.5], 1.0)
        self.assertEqual(report.r1[0.7], 0.5)
        self.assertAlmostEqual(report.miou, 0.8)
        self.assertEqual(sorted(report.map_at), [0.5, 0.75])
        self.assertIsNotNone(report.correlation)
        data = report.to_dict()
        self.assertEqual(data["r1"]["0.5"], 1.0)
        self.assertEqual(data["num_samples"], 2)
        self.assertIsNone(data["diversity"])

    def test_degenerate_correlation_is_logged(self):
        preds = [prediction("a", (0.5, 0.2))]
        gts = [[MomentSpan(0.5, 0.2)]]
        with self.assertLogs("rgtr.evaluation", "WARNING"):
            report = build_report(preds, gts,
                                  correlation_points=[(0.5, 0.5, 1.0)])
        self.assertIsNone(report.correlation)


if __name__ == "__main__":
    unittest.main()
