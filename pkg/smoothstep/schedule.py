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

"""Parameter-free step sizes through epoch doubling.

Learning runs in epochs of length ``T_k = T_1 * 2**(k-1)``. After each epoch
the empirical loss ``D_k`` of the iterates is inflated by a concentration
slack into a surrogate ``l_k`` that over-estimates the optimal loss with high
probability, and the next epoch uses the step size that would be optimal if
``l_k`` were the optimal loss::

    l_k      = D_k + 6 (sqrt(C t / T_k * D_k) + C t / T_k)
    eta_k+1  = min(R / (2 sqrt(gamma T_k+1 l_k)), 1 / (6 gamma))

with ``C = L R + phi(0)`` and ``t = ln(1/delta) + ln m + 1 + R**2 gamma / C``.
"""

import collections
import logging
import math

import numpy as np

from smoothstep.errors import DomainError, NumericError
from smoothstep.losses import ReachableInterval
from smoothstep.sgd import run_epoch

__all__ = [
    'ScheduleConfig', 'BoundConstants', 'EpochRecord', 'RunResult',
    'bound_constants', 'surrogate', 'next_step_size', 'step_size_cap', 'run_adaptive',
    'excess_bound_shape', 'fixed_step_bound', 'surrogate_coverage', 'epochs_for_budget',
]

logger = logging.getLogger(__name__)

DEFAULT_ETA_CAP_FACTOR = 6.0

BoundConstants = collections.namedtuple('BoundConstants', 'C t_log')
"""Uniform loss bound ``C = L R + phi(0)`` over the ball and the log factor
``t = ln(1/delta) + ln m + 1 + R**2 gamma / C``."""

EpochRecord = collections.namedtuple('EpochRecord', 'k T_k eta_k d_hat_k ell_hat_k w_avg_k risk_k excess_k')
"""Per-epoch trace. ``risk_k`` and ``excess_k`` are the exact expected loss of
``w_avg_k`` and its gap to the reference optimum, ``None`` when no reference
was supplied."""

RunResult = collections.namedtuple('RunResult', 'strategy epochs w_final risk excess')
"""A complete run: its epoch records, the deployed averaged iterate and, when
a reference optimum is known, its exact risk and excess risk."""


def epochs_for_budget(budget, T1):
    """Largest ``m`` with ``T1 * (2**m - 1) <= budget``."""
    if budget < T1:
        raise DomainError('budget {} is smaller than the first epoch {}'.format(budget, T1))
    m = int(math.floor(math.log2(budget // T1 + 1)))
    # log2 may round up across an exact power of two
    while T1 * (2 ** m - 1) > budget:
        m -= 1
    return max(m, 1)


class ScheduleConfig(collections.namedtuple('ScheduleConfig', 'T1 m delta K eta_cap_factor warm_start')):
    """Epoch doubling schedule.

    :param T1: length of the first epoch.
    :param m: number of epochs.
    :param delta: failure probability entering the log factor.
    :param K: constant used when reporting bound shapes.
    :param eta_cap_factor: step sizes are capped at ``1 / (eta_cap_factor * gamma)``.
    :param warm_start: start each epoch from the previous averaged iterate
        instead of the origin. This can double the distance term of the
        analysis in the worst case.
    """

    __slots__ = ()

    def __new__(cls, T1, m, delta, K=None, eta_cap_factor=None, warm_start=False):
        K = float(K) if K is not None else 1.0
        eta_cap_factor = float(eta_cap_factor) if eta_cap_factor is not None else DEFAULT_ETA_CAP_FACTOR
        if int(T1) != T1 or T1 < 1:
            raise DomainError('T1 must be a positive integer, got {}'.format(T1))
        if int(m) != m or m < 1:
            raise DomainError('m must be a positive integer, got {}'.format(m))
        if not 0 < delta < 1:
            raise DomainError('delta must lie in (0, 1), got {}'.format(delta))
        if not K > 0:
            raise DomainError('K must be positive, got {}'.format(K))
        if not eta_cap_factor >= 2:
            raise DomainError('eta_cap_factor must be at least 2, got {}'.format(eta_cap_factor))
        return super(ScheduleConfig, cls).__new__(cls, int(T1), int(m), float(delta), K, eta_cap_factor,
                                                  bool(warm_start))

    @classmethod
    def from_budget(cls, budget, T1, delta, **kwargs):
        """Schedule with as many epochs as a sample budget allows."""
        return cls(T1, epochs_for_budget(budget, T1), delta, **kwargs)

    def epoch_length(self, k):
        return self.T1 * 2 ** (k - 1)

    @property
    def total_steps(self):
        return self.T1 * (2 ** self.m - 1)


def bound_constants(loss, domain, delta, m, max_feature_norm=None):
    """Computes ``C`` and the log factor ``t`` (natural logarithms)."""
    if not 0 < delta < 1:
        raise DomainError('delta must lie in (0, 1), got {}'.format(delta))
    if m < 1:
        raise DomainError('m must be at least 1, got {}'.format(m))
    R = domain.radius
    L = loss.lipschitz_on(ReachableInterval.for_ball(R, max_feature_norm))
    C = L * R + loss.value_at_zero
    t_log = math.log(1.0 / delta) + math.log(m) + 1.0 + R * R * loss.gamma / C
    return BoundConstants(C, t_log)


def surrogate(d_hat, consts, T_k):
    """Over-estimate of the optimal loss built from an epoch's empirical loss."""
    if d_hat < 0 or T_k < 1:
        raise DomainError('surrogate needs d_hat >= 0 and T_k >= 1, got {} and {}'.format(d_hat, T_k))
    ratio = consts.C * consts.t_log / T_k
    return d_hat + 6.0 * (math.sqrt(ratio * d_hat) + ratio)


def step_size_cap(gamma, cap_factor=None):
    return 1.0 / ((cap_factor if cap_factor is not None else DEFAULT_ETA_CAP_FACTOR) * gamma)


def next_step_size(domain, gamma, T_next, ell_hat, cap_factor=None):
    """``min(R / (2 sqrt(gamma T_next ell_hat)), 1 / (6 gamma))``.

    A zero surrogate yields the cap.
    """
    if T_next < 1:
        raise DomainError('T_next must be at least 1, got {}'.format(T_next))
    if ell_hat < 0:
        raise DomainError('surrogate loss must be nonnegative, got {}'.format(ell_hat))
    cap = step_size_cap(gamma, cap_factor)
    if ell_hat == 0:
        return cap
    return min(domain.radius / (2.0 * math.sqrt(gamma * T_next * ell_hat)), cap)


def excess_bound_shape(consts, T, loss_star):
    """``C t / T + sqrt(C t / T * l(w*))``, the excess-risk rate up to a constant."""
    ratio = consts.C * consts.t_log / T
    return ratio + math.sqrt(ratio * max(loss_star, 0.0))


def fixed_step_bound(consts, T, loss_star):
    """High-probability excess-risk bound of a single epoch run with the
    oracle step size: ``4 sqrt(C t / T * l(w*)) + (2 sqrt(5) + 1) C t / T``."""
    ratio = consts.C * consts.t_log / T
    return 4.0 * math.sqrt(ratio * max(loss_star, 0.0)) + (2.0 * math.sqrt(5.0) + 1.0) * ratio


def _risk(task, loss, w, reference):
    if reference is None:
        return None, None
    risk = task.exact_expected_loss(loss, w)
    return risk, risk - reference.loss_star


def run_adaptive(task, loss, domain, schedule, seed=None, reference=None):
    """Runs the epoch doubling scheme.

    The first step size treats ``C`` as the surrogate, which is valid because
    ``C`` bounds the loss everywhere on the ball. Each epoch draws fresh
    examples from one generator seeded by ``seed``.

    :param reference: optional :class:`~smoothstep.tasks.ReferenceOptimum`;
        when given, exact risks and excess risks are recorded.
    :raises NumericError: annotated with the failing epoch.
    """
    consts = bound_constants(loss, domain, schedule.delta, schedule.m)
    rng = np.random.default_rng(seed)
    eta = next_step_size(domain, loss.gamma, schedule.T1, consts.C, schedule.eta_cap_factor)
    w_start = domain.zeros()
    records = []
    for k in range(1, schedule.m + 1):
        T_k = schedule.epoch_length(k)
        examples = task.sample(T_k, rng)
        try:
            out = run_epoch(w_start, examples, loss, eta, domain)
        except NumericError as e:
            raise e.with_epoch(k) from e
        ell_hat = surrogate(out.d_hat, consts, T_k)
        risk, excess = _risk(task, loss, out.w_avg, reference)
        records.append(EpochRecord(k, T_k, eta, out.d_hat, ell_hat, out.w_avg, risk, excess))
        logger.debug("epoch %d: T_k=%d eta=%.6g d_hat=%.6g ell_hat=%.6g", k, T_k, eta, out.d_hat, ell_hat)
        if schedule.warm_start:
            w_start = out.w_avg
        eta = next_step_size(domain, loss.gamma, schedule.epoch_length(k + 1), ell_hat, schedule.eta_cap_factor)
    last = records[-1]
    return RunResult('adaptive', records, last.w_avg_k, last.risk_k, last.excess_k)


def surrogate_coverage(results, loss_star):
    """Fraction of runs whose final surrogate falls below the optimal loss."""
    if not results:
        raise DomainError('need at least one run')
    misses = sum(1 for r in results if r.epochs[-1].ell_hat_k < loss_star)
    return misses / float(len(results))
