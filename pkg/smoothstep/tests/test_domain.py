import unittest

import numpy as np

from smoothstep.domain import BallDomain
from smoothstep.errors import DomainError


def _random_vectors(rng, count, dim, scale):
    return rng.standard_normal((count, dim)) * rng.uniform(0.0, scale, size=(count, 1))


class ProjectTest(unittest.TestCase):

    def test_interior_point_unchanged(self):
        v = np.array([0.3, 0.4])
        np.testing.assert_array_equal(BallDomain(1.0, 2).project(v), v)

    def test_radial_scaling(self):
        np.testing.assert_allclose(BallDomain(1.0, 2).project([3.0, 4.0]), [0.6, 0.8], rtol=0, atol=1e-15)

    def test_zero_fixed_point(self):
        np.testing.assert_array_equal(BallDomain(2.0, 5).project(np.zeros(5)), np.zeros(5))

    def test_invalid_input(self):
        ball = BallDomain(1.0, 2)
        self.assertRaises(DomainError, ball.project, [1.0, float('nan')])
        self.assertRaises(DomainError, ball.project, [float('inf'), 0.0])
        self.assertRaises(DomainError, ball.project, [1.0, 2.0, 3.0])

    def test_huge_entries(self):
        ball = BallDomain(1.0, 2)
        np.testing.assert_allclose(ball.project([1e200, 0.0]), [1.0, 0.0], rtol=0, atol=1e-15)
        np.testing.assert_allclose(ball.project([-3e200, 4e200]), [-0.6, 0.8], rtol=0, atol=1e-15)
        big = BallDomain(2.0, 5).project(np.full(5, 1e308))
        np.testing.assert_allclose(big, np.full(5, 2.0 / np.sqrt(5.0)), rtol=1e-15)
        self.assertFalse(ball.contains([1e200, 0.0]))
        self.assertFalse(ball.contains([1e308, 1e308]))

    def test_random_properties(self):
        rng = np.random.default_rng(7)
        for dim in (2, 50):
            ball = BallDomain(1.5, dim)
            us = _random_vectors(rng, 5000, dim, 3.0)
            vs = _random_vectors(rng, 5000, dim, 3.0)
            for u, v in zip(us, vs):
                pu, pv = ball.project(u), ball.project(v)
                self.assertTrue(ball.contains(pu))
                self.assertLessEqual(np.linalg.norm(pu - pv), np.linalg.norm(u - v) * (1.0 + 1e-12))
                ppu = ball.project(pu)
                if np.linalg.norm(u) <= ball.radius:
                    np.testing.assert_array_equal(ppu, pu)
                else:
                    np.testing.assert_allclose(ppu, pu, rtol=1e-15, atol=1e-15)

    def test_nearest_point(self):
        rng = np.random.default_rng(11)
        ball = BallDomain(1.0, 3)
        for v, w in zip(_random_vectors(rng, 1000, 3, 4.0), _random_vectors(rng, 1000, 3, 1.0)):
            w = ball.project(w)
            self.assertLessEqual(np.linalg.norm(ball.project(v) - v), np.linalg.norm(w - v) + 1e-12)


class ContainsTest(unittest.TestCase):

    def test_boundary(self):
        ball = BallDomain(1.0, 2)
        self.assertTrue(ball.contains([1.0, 0.0]))
        self.assertTrue(ball.contains([1.0 + 1e-13, 0.0]))
        self.assertFalse(ball.contains([1.1, 0.0]))

    def test_wrong_length(self):
        self.assertRaises(DomainError, BallDomain(1.0, 2).contains, [1.0])


class BallDomainTest(unittest.TestCase):

    def test_invalid(self):
        self.assertRaises(DomainError, BallDomain, 0.0, 2)
        self.assertRaises(DomainError, BallDomain, float('inf'), 2)
        self.assertRaises(DomainError, BallDomain, 1.0, 0)

    def test_equality(self):
        self.assertEqual(BallDomain(1, 2), BallDomain(1.0, 2))
        self.assertNotEqual(BallDomain(1.0, 2), BallDomain(1.0, 3))
        self.assertEqual(hash(BallDomain(1, 2)), hash(BallDomain(1.0, 2)))


if __name__ == '__main__':
    unittest.main()
