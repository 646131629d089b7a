# Copyright 2026 The smoothstep authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Synthetic classification tasks with finite support.

A :class:`Task` is a discrete distribution over labelled atoms ``(x, y)``,
so the expected loss of any ``w`` is an exact finite sum.
"""

import collections
import json
import logging
import math

import numpy as np

from smoothstep.errors import ConvergenceError, DomainError

__all__ = [
    'Task', 'ReferenceOptimum', 'separable', 'noisy', 'make_task', 'TASK_FACTORIES',
    'sample', 'exact_expected_loss', 'mc_expected_loss', 'best_in_ball', 'trial_seed',
]

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-12
FEATURE_NORM_TOL = 1e-12
BEST_IN_BALL_MAX_ITER = 100000

ReferenceOptimum = collections.namedtuple('ReferenceOptimum', 'w_star loss_star iterations')
"""Best in-ball solution found by :func:`best_in_ball`, its exact expected
loss and the number of descent iterations used."""


class Task(object):
    """Finite-support distribution over labelled examples.

    :param X: ``(k, d)`` array of atoms, each with ``|x| <= 1``.
    :param y: ``k`` labels in ``{-1, +1}``.
    :param p: ``k`` probabilities summing to one.
    """

    def __init__(self, X, y, p, name=None):
        X = np.array(X, dtype=float, ndmin=2)
        y = np.array(y, dtype=float).ravel()
        p = np.array(p, dtype=float).ravel()
        if X.shape[0] != y.size or y.size != p.size or y.size == 0:
            raise DomainError('atoms, labels and probabilities must have the same non-zero length')
        if not np.all(np.isfinite(X)):
            raise DomainError('atoms must be finite')
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DomainError('labels must be -1 or +1')
        if np.any(p < 0) or abs(p.sum() - 1.0) > PROBABILITY_TOL:
            raise DomainError('probabilities must be nonnegative and sum to 1, got sum {!r}'.format(p.sum()))
        norms = np.sqrt(np.einsum('ij,ij->i', X, X))
        if np.any(norms > 1.0 + FEATURE_NORM_TOL):
            raise DomainError('atoms must have norm at most 1, got {!r}'.format(norms.max()))
        for a in (X, y, p):
            a.setflags(write=False)
        self._X = X
        self._y = y
        self._p = p
        self._yx = y[:, None] * X
        self._yx.setflags(write=False)
        self._max_norm = float(norms.max())
        self.name = name

    def __repr__(self):
        return 'Task(name={!r}, atoms={}, dim={})'.format(self.name, self.size, self.dim)

    @property
    def X(self):
        return self._X

    @property
    def y(self):
        return self._y

    @property
    def p(self):
        return self._p

    @property
    def dim(self):
        return self._X.shape[1]

    @property
    def size(self):
        """Number of atoms."""
        return self._X.shape[0]

    @property
    def max_feature_norm(self):
        return self._max_norm

    def margins(self, w):
        """Returns ``y_i w.x_i`` for every atom."""
        return self._yx.dot(self._check_w(w))

    def _check_w(self, w):
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,) or not np.all(np.isfinite(w)):
            raise DomainError('expected a finite vector of length {}'.format(self.dim))
        return w

    def sample(self, count, seed=None):
        """Draws ``count`` i.i.d. examples.

        :param seed:
            Anything accepted by :func:`numpy.random.default_rng`, including
            an existing generator, which is then advanced in place.

        :returns: list of ``(x, y)`` pairs.
        """
        if count < 0:
            raise DomainError('sample count must be nonnegative, got {}'.format(count))
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.size, size=int(count), p=self._p)
        return list(zip(self._X[idx], self._y[idx]))

    def exact_expected_loss(self, loss, w):
        """``sum_i p_i phi(y_i w.x_i)``, enumerated exactly."""
        return float(np.dot(self._p, loss.eval(self.margins(w))))

    def expected_gradient(self, loss, w):
        """Gradient of :meth:`exact_expected_loss` at ``w``."""
        return np.dot(self._p * loss.deriv(self.margins(w)), self._yx)

    def loss_variance(self, loss, w):
        """Exact variance of ``phi(y w.x)`` under the task distribution."""
        values = loss.eval(self.margins(w))
        mean = np.dot(self._p, values)
        return float(max(np.dot(self._p, np.square(values - mean)), 0.0))

    def _row_values(self, loss, W):
        W = np.asarray(W, dtype=float)
        if W.ndim != 2 or W.shape[1] != self.dim or not np.all(np.isfinite(W)):
            raise DomainError('expected a finite array of shape (n, {})'.format(self.dim))
        return loss.eval(W.dot(self._yx.T))

    def expected_losses(self, loss, W):
        """:meth:`exact_expected_loss` at every row of the ``(n, dim)`` array ``W``."""
        return self._row_values(loss, W).dot(self._p)

    def loss_variances(self, loss, W):
        """:meth:`loss_variance` at every row of ``W``."""
        values = self._row_values(loss, W)
        means = values.dot(self._p)
        return np.maximum(np.square(values - means[:, None]).dot(self._p), 0.0)

    def mc_expected_loss(self, loss, w, n, seed=None):
        """Monte-Carlo estimate of the expected loss from ``n`` fresh draws."""
        if n < 1:
            raise DomainError('need at least one draw, got {}'.format(n))
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.size, size=int(n), p=self._p)
        return float(np.mean(loss.eval(self._yx[idx].dot(self._check_w(w)))))

    def to_dict(self):
        atoms = [{'x': [float(v) for v in x], 'y': int(y), 'p': float(p)}
                 for x, y, p in zip(self._X, self._y, self._p)]
        doc = {'dim': self.dim, 'atoms': atoms}
        if self.name is not None:
            doc['name'] = self.name
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            atoms = doc['atoms']
            X = [a['x'] for a in atoms]
            y = [a['y'] for a in atoms]
            p = [a['p'] for a in atoms]
            dim = int(doc['dim'])
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError('malformed task document', cause=e)
        task = cls(X, y, p, name=doc.get('name'))
        if task.dim != dim:
            raise DomainError('task document declares dim {} but atoms have {}'.format(dim, task.dim))
        return task

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))


def sample(task, count, seed=None):
    return task.sample(count, seed)


def exact_expected_loss(task, loss, w):
    return task.exact_expected_loss(loss, w)


def mc_expected_loss(task, loss, w, n, seed=None):
    return task.mc_expected_loss(loss, w, n, seed)


def _random_unit(rng, dim):
    while True:
        u = rng.standard_normal(dim)
        norm = np.linalg.norm(u)
        if norm > 0:
            return u / norm


def _atoms_with_margin(rng, direction, margin, k):
    """Atoms ``x`` with ``|x| <= 1`` and ``y u.x`` in ``[margin, 1]``."""
    dim = direction.size
    X = np.empty((k, dim))
    y = np.where(rng.random(k) < 0.5, -1.0, 1.0)
    for i in range(k):
        along = rng.uniform(margin, 1.0)
        ortho = rng.standard_normal(dim)
        ortho -= ortho.dot(direction) * direction
        norm = np.linalg.norm(ortho)
        if norm > 0:
            ortho *= rng.uniform(0.0, math.sqrt(max(1.0 - along * along, 0.0))) / norm
        X[i] = y[i] * (along * direction + ortho)
    # guard the unit-norm invariant against rounding
    norms = np.linalg.norm(X, axis=1)
    X[norms > 1.0] /= norms[norms > 1.0, None]
    return X, y


def separable(d, margin, k_atoms, seed=None):
    """Linearly separable task.

    Every atom has margin at least ``margin`` along a hidden unit direction
    ``u``, so ``w = u / margin`` classifies every atom with margin one. For
    losses that vanish at margin one (``sq_hinge``, ``huber_hinge``) the
    in-ball optimum has zero loss whenever ``R >= 1 / margin``.
    """
    if not 0 < margin <= 1:
        raise DomainError('margin must lie in (0, 1], got {}'.format(margin))
    if k_atoms < 1:
        raise DomainError('need at least one atom, got {}'.format(k_atoms))
    rng = np.random.default_rng(seed)
    direction = _random_unit(rng, d)
    X, y = _atoms_with_margin(rng, direction, margin, k_atoms)
    p = np.full(k_atoms, 1.0 / k_atoms)
    return Task(X, y, p / p.sum(), name='separable')


def noisy(d, flip_prob, k_atoms, seed=None, margin=0.5):
    """Task with label noise.

    ``k_atoms`` feature locations are drawn as in :func:`separable`; each one
    carries its clean label with probability ``1 - flip_prob`` and the flipped
    label with probability ``flip_prob``, so the task has ``2 * k_atoms``
    atoms and a strictly positive optimal loss when ``flip_prob > 0``.
    """
    if not 0 <= flip_prob < 1:
        raise DomainError('flip probability must lie in [0, 1), got {}'.format(flip_prob))
    if not 0 < margin <= 1:
        raise DomainError('margin must lie in (0, 1], got {}'.format(margin))
    if k_atoms < 1:
        raise DomainError('need at least one atom, got {}'.format(k_atoms))
    rng = np.random.default_rng(seed)
    direction = _random_unit(rng, d)
    X, y = _atoms_with_margin(rng, direction, margin, k_atoms)
    base = np.full(k_atoms, 1.0 / k_atoms)
    p = np.concatenate([base * (1.0 - flip_prob), base * flip_prob])
    return Task(np.vstack([X, X]), np.concatenate([y, -y]), p / p.sum(), name='noisy')


TASK_FACTORIES = {
    'separable': separable,
    'noisy': noisy,
}


def make_task(factory, params, seed=None):
    """Builds a task from a factory name and its keyword parameters."""
    try:
        func = TASK_FACTORIES[factory]
    except KeyError:
        raise KeyError('unknown task factory {!r}, expected one of {}'.format(
            factory, ', '.join(sorted(TASK_FACTORIES))))
    return func(seed=seed, **params)


def best_in_ball(task, loss, domain, tol=None, max_iter=None):
    """Minimises the exact expected loss over the ball.

    Runs deterministic projected gradient descent from the origin with step
    ``1 / (gamma * max |x|**2)`` until the gradient mapping
    ``|w - P(w - g/L)| * L`` drops to ``tol``.

    :raises ConvergenceError: if ``max_iter`` iterations are not enough.
    """
    tol = tol if tol is not None else 1e-8
    max_iter = max_iter if max_iter is not None else BEST_IN_BALL_MAX_ITER
    if not tol > 0:
        raise DomainError('tolerance must be positive, got {}'.format(tol))
    if domain.dim != task.dim:
        raise DomainError('domain dimension {} does not match task dimension {}'.format(domain.dim, task.dim))
    w = domain.zeros()
    smoothness = loss.gamma * task.max_feature_norm ** 2
    if smoothness == 0:
        return ReferenceOptimum(w, task.exact_expected_loss(loss, w), 0)
    step = 1.0 / smoothness
    for it in range(1, max_iter + 1):
        w_next = domain.project(w - step * task.expected_gradient(loss, w))
        mapping = np.linalg.norm(w_next - w) / step
        w = w_next
        if mapping <= tol:
            loss_star = task.exact_expected_loss(loss, w)
            logger.debug("best_in_ball converged after %d iterations, loss %.12g", it, loss_star)
            return ReferenceOptimum(w, loss_star, it)
    raise ConvergenceError('projected gradient descent did not reach tolerance {} in {} iterations'.format(
        tol, max_iter), last_iterate=w, iterations=max_iter)


def trial_seed(base_seed, *key):
    """Seed for one trial, derived from the base seed and the trial's key.

    Seeds depend only on the key, never on execution order, so trials can
    run in any order or process and still draw the same streams.
    """
    return np.random.SeedSequence([int(base_seed)] + [int(k) for k in key])
