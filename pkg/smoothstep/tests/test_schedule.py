import math
import unittest

import numpy as np

import smoothstep
from smoothstep.domain import BallDomain
from smoothstep.errors import DomainError, NumericError
from smoothstep.losses import SmoothLoss, get_loss
from smoothstep.schedule import (BoundConstants, EpochRecord, RunResult, ScheduleConfig, bound_constants,
                                 epochs_for_budget, excess_bound_shape, fixed_step_bound, next_step_size,
                                 run_adaptive, step_size_cap, surrogate, surrogate_coverage)
from smoothstep.tasks import best_in_ball, noisy, separable
from smoothstep.tests import single_atom_task


def _logistic_epoch(w0, steps, eta, radius):
    """Scalar trace on the single atom ``(1, +1)``: returns the mean loss and
    the mean iterate."""
    w, losses, iterates = w0, [], []
    for _ in range(steps):
        iterates.append(w)
        losses.append(math.log1p(math.exp(-w)))
        w = max(-radius, min(radius, w + eta / (1.0 + math.exp(w))))
    return sum(losses) / steps, sum(iterates) / steps


class BoundConstantsTest(unittest.TestCase):

    def test_logistic(self):
        consts = bound_constants(get_loss('logistic'), BallDomain(1.0, 3), 0.05, 4)
        C = 1.0 / (1.0 + math.exp(-1.0)) + math.log(2.0)
        self.assertAlmostEqual(consts.C, C, places=12)
        self.assertAlmostEqual(consts.C, 1.424206, places=6)
        self.assertAlmostEqual(consts.t_log, math.log(20.0) + math.log(4.0) + 1.0 + 0.25 / C, places=12)

    def test_sq_hinge(self):
        consts = bound_constants(get_loss('sq_hinge'), BallDomain(1.0, 1), 1.0 / math.e, 1)
        self.assertAlmostEqual(consts.C, 5.0, places=12)
        self.assertAlmostEqual(consts.t_log, 2.4, places=12)

    def test_c_dominates_value_at_zero(self):
        for name in ('logistic', 'sq_hinge', 'huber_hinge'):
            loss = get_loss(name)
            self.assertGreaterEqual(bound_constants(loss, BallDomain(0.5, 1), 0.1, 2).C, loss.value_at_zero)

    def test_invalid(self):
        loss = get_loss('logistic')
        self.assertRaises(DomainError, bound_constants, loss, BallDomain(1.0, 1), 1.0, 2)
        self.assertRaises(DomainError, bound_constants, loss, BallDomain(1.0, 1), 0.1, 0)


class SurrogateTest(unittest.TestCase):

    def test_zero_empirical_loss(self):
        consts = BoundConstants(2.0, 3.0)
        self.assertAlmostEqual(surrogate(0.0, consts, 100), 6.0 * 0.06, places=14)

    def test_equal_terms(self):
        consts = BoundConstants(1.0, 1.0)
        self.assertAlmostEqual(surrogate(0.25, consts, 4), 13 * 0.25, places=14)

    def test_example(self):
        consts = BoundConstants(1.424206, 8.0)
        ratio = 1.424206 * 8.0 / 1024
        value = surrogate(0.25, consts, 1024)
        self.assertAlmostEqual(value, 0.25 + 6.0 * (math.sqrt(ratio * 0.25) + ratio), places=14)
        self.assertAlmostEqual(value, 0.6332, places=4)

    def test_never_below_empirical_loss(self):
        consts = BoundConstants(1.5, 4.0)
        for d_hat in (0.0, 1e-9, 0.3, 7.0):
            self.assertGreaterEqual(surrogate(d_hat, consts, 64), d_hat)

    def test_invalid(self):
        self.assertRaises(DomainError, surrogate, -0.1, BoundConstants(1.0, 1.0), 4)
        self.assertRaises(DomainError, surrogate, 0.1, BoundConstants(1.0, 1.0), 0)


class StepSizeTest(unittest.TestCase):

    def test_examples(self):
        self.assertAlmostEqual(next_step_size(BallDomain(1.0, 1), 1.0, 100, 0.25), 0.1, places=15)
        self.assertAlmostEqual(next_step_size(BallDomain(1.0, 1), 1.0, 1, 1e-6), 1.0 / 6.0, places=15)
        self.assertAlmostEqual(next_step_size(BallDomain(2.0, 1), 2.0, 512, 0.5), 1.0 / math.sqrt(512), places=15)

    def test_zero_surrogate_gives_cap(self):
        self.assertEqual(next_step_size(BallDomain(1.0, 1), 0.25, 10, 0.0), step_size_cap(0.25))
        self.assertAlmostEqual(step_size_cap(0.25), 2.0 / 3.0, places=15)
        self.assertAlmostEqual(step_size_cap(0.25, 4.0), 1.0, places=15)

    def test_invalid(self):
        self.assertRaises(DomainError, next_step_size, BallDomain(1.0, 1), 1.0, 0, 0.1)
        self.assertRaises(DomainError, next_step_size, BallDomain(1.0, 1), 1.0, 10, -0.1)


class ScheduleConfigTest(unittest.TestCase):

    def test_lengths(self):
        schedule = ScheduleConfig(64, 4, 0.05)
        self.assertEqual([schedule.epoch_length(k) for k in range(1, 5)], [64, 128, 256, 512])
        self.assertEqual(schedule.total_steps, 64 * 15)
        self.assertEqual(schedule.K, 1.0)
        self.assertEqual(schedule.eta_cap_factor, 6.0)
        self.assertFalse(schedule.warm_start)

    def test_epochs_for_budget(self):
        self.assertEqual(epochs_for_budget(1, 1), 1)
        self.assertEqual(epochs_for_budget(1023, 1), 10)
        self.assertEqual(epochs_for_budget(1024, 1), 10)
        self.assertEqual(epochs_for_budget(2 ** 16, 64), 10)
        self.assertEqual(epochs_for_budget(3, 1), 2)
        self.assertRaises(DomainError, epochs_for_budget, 10, 16)

    def test_from_budget(self):
        schedule = ScheduleConfig.from_budget(1000, 8, 0.1, warm_start=True)
        self.assertEqual(schedule.m, 6)
        self.assertLessEqual(schedule.total_steps, 1000)
        self.assertTrue(schedule.warm_start)

    def test_invalid(self):
        self.assertRaises(DomainError, ScheduleConfig, 0, 1, 0.1)
        self.assertRaises(DomainError, ScheduleConfig, 1, 0, 0.1)
        self.assertRaises(DomainError, ScheduleConfig, 1, 1, 0.0)
        self.assertRaises(DomainError, ScheduleConfig, 1, 1, 0.1, K=0.0)
        self.assertRaises(DomainError, ScheduleConfig, 1, 1, 0.1, eta_cap_factor=1.0)


class BoundShapeTest(unittest.TestCase):

    def test_shapes(self):
        consts = BoundConstants(1.0, 1.0)
        self.assertAlmostEqual(excess_bound_shape(consts, 4, 1.0), 0.75, places=15)
        self.assertAlmostEqual(excess_bound_shape(consts, 4, 0.0), 0.25, places=15)
        self.assertAlmostEqual(fixed_step_bound(consts, 4, 1.0), 2.0 + (2.0 * math.sqrt(5.0) + 1.0) * 0.25, places=14)


class RunAdaptiveTest(unittest.TestCase):

    def test_single_epoch(self):
        loss = get_loss('logistic')
        ball = BallDomain(1.0, 1)
        result = run_adaptive(single_atom_task(), loss, ball, ScheduleConfig(4, 1, 0.1), seed=0)
        self.assertEqual(len(result.epochs), 1)
        consts = bound_constants(loss, ball, 0.1, 1)
        self.assertEqual(result.epochs[0].eta_k, next_step_size(ball, loss.gamma, 4, consts.C))
        self.assertIsNone(result.excess)
        self.assertEqual(result.strategy, 'adaptive')

    def test_matches_scalar_trace(self):
        loss = get_loss('logistic')
        ball = BallDomain(1.0, 1)
        for warm_start in (False, True):
            schedule = ScheduleConfig(2, 3, 0.1, warm_start=warm_start)
            result = run_adaptive(single_atom_task(), loss, ball, schedule, seed=5)
            C = 1.0 / (1.0 + math.exp(-1.0)) + math.log(2.0)
            t = math.log(10.0) + math.log(3.0) + 1.0 + 0.25 / C
            ell_hat, w_start = C, 0.0
            for k, record in enumerate(result.epochs, 1):
                T_k = 2 ** k
                eta = min(1.0 / (2.0 * math.sqrt(0.25 * T_k * ell_hat)), 1.0 / 1.5)
                d_hat, w_avg = _logistic_epoch(w_start, T_k, eta, 1.0)
                ell_hat = d_hat + 6.0 * (math.sqrt(C * t / T_k * d_hat) + C * t / T_k)
                self.assertEqual(record.k, k)
                self.assertEqual(record.T_k, T_k)
                self.assertAlmostEqual(record.eta_k, eta, delta=1e-12)
                self.assertAlmostEqual(record.d_hat_k, d_hat, delta=1e-12)
                self.assertAlmostEqual(record.ell_hat_k, ell_hat, delta=1e-12)
                self.assertAlmostEqual(record.w_avg_k[0], w_avg, delta=1e-12)
                if warm_start:
                    w_start = w_avg
            np.testing.assert_array_equal(result.w_final, result.epochs[-1].w_avg_k)

    def test_invariants(self):
        loss = get_loss('sq_hinge')
        task = noisy(4, 0.2, 6, seed=1)
        ball = BallDomain(1.0, 4)
        reference = best_in_ball(task, loss, ball)
        result = run_adaptive(task, loss, ball, ScheduleConfig(8, 6, 0.05), seed=3, reference=reference)
        cap = step_size_cap(loss.gamma)
        for record in result.epochs:
            self.assertGreaterEqual(record.ell_hat_k, record.d_hat_k)
            self.assertLessEqual(record.eta_k, cap)
            self.assertGreaterEqual(record.excess_k, -1e-8)
            self.assertTrue(ball.contains(record.w_avg_k))
        self.assertEqual(result.excess, result.epochs[-1].excess_k)

    def test_deterministic(self):
        loss = get_loss('logistic')
        task = noisy(3, 0.1, 5, seed=2)
        ball = BallDomain(1.0, 3)
        a = run_adaptive(task, loss, ball, ScheduleConfig(4, 5, 0.05), seed=17)
        b = run_adaptive(task, loss, ball, ScheduleConfig(4, 5, 0.05), seed=17)
        np.testing.assert_array_equal(a.w_final, b.w_final)
        self.assertEqual([r.d_hat_k for r in a.epochs], [r.d_hat_k for r in b.epochs])

    def test_numeric_error_names_epoch(self):
        real = get_loss('logistic')
        broken = SmoothLoss('broken', 0.25, real.eval,
                            lambda z: np.where((z > 0.0) & (z < 0.9), np.nan, real.deriv(z)))
        with self.assertRaises(NumericError) as cm:
            run_adaptive(single_atom_task(), broken, BallDomain(1.0, 1), ScheduleConfig(1, 2, 0.1), seed=0)
        self.assertEqual(cm.exception.epoch, 2)
        self.assertEqual(cm.exception.step, 2)
        self.assertTrue(str(cm.exception).startswith('epoch 2: '))

    def test_excess_decreases_on_separable_task(self):
        loss = get_loss('logistic')
        task = separable(5, 0.3, 20, seed=6)
        ball = BallDomain(2.0, 5)
        reference = best_in_ball(task, loss, ball)
        schedule = ScheduleConfig(64, 6, 0.05)
        results = [run_adaptive(task, loss, ball, schedule, seed=s, reference=reference) for s in range(11)]
        final = np.median([r.excess for r in results])
        third = np.median([r.epochs[2].excess_k for r in results])
        self.assertLessEqual(final, third)

    def test_empirical_excess_within_bound_shape(self):
        loss = get_loss('logistic')
        task = noisy(3, 0.1, 6, seed=5)
        ball = BallDomain(1.0, 3)
        reference = best_in_ball(task, loss, ball)
        schedule = ScheduleConfig(16, 5, 0.05)
        consts = bound_constants(loss, ball, schedule.delta, schedule.m)
        results = [run_adaptive(task, loss, ball, schedule, seed=s) for s in range(25)]
        for k in range(schedule.m):
            T_k = results[0].epochs[k].T_k
            median = np.median([r.epochs[k].d_hat_k - reference.loss_star for r in results])
            self.assertLessEqual(median, 20.0 * excess_bound_shape(consts, T_k, reference.loss_star), k + 1)

    def test_surrogate_coverage(self):
        loss = get_loss('logistic')
        task = noisy(3, 0.2, 6, seed=8)
        ball = BallDomain(1.0, 3)
        reference = best_in_ball(task, loss, ball)
        schedule = ScheduleConfig(16, 5, 0.05)
        results = [run_adaptive(task, loss, ball, schedule, seed=s) for s in range(60)]
        self.assertLessEqual(surrogate_coverage(results, reference.loss_star),
                             0.05 + 3.0 * math.sqrt(0.05 * 0.95 / 60))


class FitTest(unittest.TestCase):

    def test_matches_run_adaptive(self):
        task = noisy(3, 0.2, 6, seed=8)
        result = smoothstep.fit(task, 'logistic', 1.0, 28, T1=4, seed=3)
        self.assertEqual([rec.T_k for rec in result.epochs], [4, 8, 16])
        self.assertIsNone(result.excess)
        expected = run_adaptive(task, get_loss('logistic'), BallDomain(1.0, 3), ScheduleConfig(4, 3, 0.05), seed=3)
        np.testing.assert_array_equal(result.w_final, expected.w_final)

    def test_budget_below_first_epoch(self):
        self.assertRaises(DomainError, smoothstep.fit, single_atom_task(), 'logistic', 1.0, 3, T1=4)


class SurrogateCoverageTest(unittest.TestCase):

    def test_fraction(self):
        def result(ell_hat):
            record = EpochRecord(1, 1, 0.1, 0.0, ell_hat, np.zeros(1), None, None)
            return RunResult('adaptive', [record], np.zeros(1), None, None)
        self.assertEqual(surrogate_coverage([result(0.1), result(0.5), result(0.6), result(0.2)], 0.3), 0.5)
        self.assertRaises(DomainError, surrogate_coverage, [], 0.3)


if __name__ == '__main__':
    unittest.main()
