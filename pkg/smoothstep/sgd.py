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

"""Projected stochastic gradient descent over a ball with iterate averaging."""

import collections
import logging
import math

import numpy as np

from smoothstep.errors import DomainError, NumericError

__all__ = [
    'SgdState', 'EpochOutput', 'TrajectoryStep', 'InequalityReport',
    'initial_state', 'step', 'run_epoch', 'check_per_step_inequality', 'INEQUALITY_RTOL',
]

logger = logging.getLogger(__name__)

INEQUALITY_RTOL = 1e-9

SgdState = collections.namedtuple('SgdState', 'w step sum_w sum_inst_loss')
"""Iterate ``w_{t+1}`` after ``step`` updates, the running sum of the
iterates ``w_1..w_t`` the updates started from and the running sum of the
instantaneous losses ``l_s(w_s)`` they saw."""

EpochOutput = collections.namedtuple('EpochOutput', 'w_avg d_hat w_final T trajectory')
"""Result of :func:`run_epoch`. ``trajectory`` is ``None`` unless recording
was requested."""

TrajectoryStep = collections.namedtuple('TrajectoryStep', 'w w_next x y inst_loss')
"""One recorded update ``w -> w_next`` on example ``(x, y)`` with the
instantaneous loss ``phi(y w.x)`` seen before the update."""

InequalityReport = collections.namedtuple('InequalityReport', 'max_violation step passed steps')
"""Largest relative violation of the per-step regret inequality, the step
where it occurred and whether every step stayed within tolerance."""


def initial_state(w0):
    w0 = np.array(w0, dtype=float)
    return SgdState(w0, 0, np.zeros_like(w0), 0.0)


def _gradient(loss, w, x, y):
    value, slope = loss.value_and_deriv(y * float(np.dot(w, x)))
    return value, (slope * y) * x


def step(state, example, loss, eta, domain):
    """Performs one projected SGD update.

    ``w' = P(w - eta * phi'(y w.x) * y * x)``. The running sums absorb the
    iterate and instantaneous loss from *before* the update.

    :raises NumericError: if the gradient or the new iterate is not finite.
    """
    if not eta > 0:
        raise DomainError('step size must be positive, got {}'.format(eta))
    x, y = example
    w = state.w
    t = state.step + 1
    try:
        inst_loss, grad = _gradient(loss, w, x, y)
    except DomainError as e:
        raise NumericError('non-finite margin at step {}'.format(t), cause=e, step=t, w=w, example=example)
    if not np.all(np.isfinite(grad)):
        raise NumericError('non-finite gradient at step {}'.format(t), step=t, w=w, example=example)
    try:
        w_next = domain.project(w - eta * grad)
    except DomainError as e:
        raise NumericError('non-finite iterate at step {}'.format(t), cause=e, step=t, w=w, example=example)
    return SgdState(w_next, t, state.sum_w + w, state.sum_inst_loss + inst_loss)


def run_epoch(w0, examples, loss, eta, domain, record=False):
    """Runs projected SGD over a stream of examples starting from ``w0``.

    Each update works on a float margin and defers to :func:`step` only
    when a margin, slope or iterate is not finite, so the error raised is
    the one :func:`step` documents.

    :param examples: sequence of ``(x, y)`` pairs, one per step.
    :param eta: a constant step size, or a callable ``t -> eta_t`` with ``t``
        counted from 1.
    :param record: keep a :class:`TrajectoryStep` per update.

    :returns: :class:`EpochOutput` whose ``w_avg`` and ``d_hat`` average over
        the iterates ``w_1..w_T`` each update started from.
    """
    if not domain.contains(w0):
        raise DomainError('initial iterate lies outside the ball')
    examples = list(examples)
    if not examples:
        raise DomainError('an epoch needs at least one example')
    rows = [np.asarray(x, dtype=float) for x, _ in examples]
    if any(x.shape != (domain.dim,) for x in rows):
        raise DomainError('examples must have {} features'.format(domain.dim))
    labels = [float(y) for _, y in examples]

    w = np.array(w0, dtype=float)
    sum_w = np.zeros_like(w)
    sum_loss = 0.0
    trajectory = [] if record else None
    value_and_deriv = loss.value_and_deriv
    for t, (x, y) in enumerate(zip(rows, labels), 1):
        eta_t = eta(t) if callable(eta) else eta
        if not eta_t > 0:
            raise DomainError('step size must be positive, got {}'.format(eta_t))
        z = y * float(w.dot(x))
        value = slope = w_next = None
        if math.isfinite(z):
            value, slope = value_and_deriv(z)
            if math.isfinite(slope):
                try:
                    w_next = domain.clip(w - eta_t * ((slope * y) * x))
                except DomainError:
                    pass
        if w_next is None:
            w_next = step(SgdState(w, t - 1, sum_w, sum_loss), examples[t - 1], loss, eta_t, domain).w
        if record:
            trajectory.append(TrajectoryStep(w, w_next, examples[t - 1][0], examples[t - 1][1], value))
        sum_w += w
        sum_loss += value
        w = w_next
    T = len(rows)
    return EpochOutput(sum_w / T, sum_loss / T, w, T, trajectory)


def check_per_step_inequality(trajectory, w_ref, eta, gamma, loss):
    """Evaluates the one-step regret inequality along a recorded trajectory.

    Both forms are checked at every step::

        l_t(w_t) - l_t(w_ref) <= (|w_t - w_ref|^2 - |w_{t+1} - w_ref|^2) / (2 eta) + eta/2 |g_t|^2
        l_t(w_t) - l_t(w_ref) <= (|w_t - w_ref|^2 - |w_{t+1} - w_ref|^2) / (2 eta) + 2 eta gamma l_t(w_t)

    :param eta: the constant step size of the trajectory, or a callable ``t -> eta_t``.
    """
    w_ref = np.asarray(w_ref, dtype=float)
    step_size = eta if callable(eta) else (lambda t: eta)
    worst, worst_step = -np.inf, None
    for t, rec in enumerate(trajectory, 1):
        eta_t = step_size(t)
        inst_loss, grad = _gradient(loss, rec.w, rec.x, rec.y)
        lhs = inst_loss - loss.eval(rec.y * float(np.dot(w_ref, rec.x)))
        distance = (np.sum(np.square(rec.w - w_ref)) - np.sum(np.square(rec.w_next - w_ref))) / (2.0 * eta_t)
        rhs_grad = distance + 0.5 * eta_t * float(np.dot(grad, grad))
        rhs_loss = distance + 2.0 * eta_t * gamma * inst_loss
        for rhs in (rhs_grad, rhs_loss):
            violation = (lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
            if violation > worst:
                worst, worst_step = violation, t
    if worst_step is None:
        return InequalityReport(0.0, None, True, 0)
    return InequalityReport(float(worst), worst_step, worst <= INEQUALITY_RTOL, len(trajectory))
