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

"""Monte-Carlo checks of martingale tail bounds.

Bernstein's inequality for a martingale with increments bounded by ``K`` and
conditional variance ``Sigma_n**2``::

    P[max_i S_i > sqrt(2 nu t) + sqrt(2)/3 K t  and  Sigma_n**2 <= nu] <= exp(-t)

The checks below count how often simulated martingales break such a bound
and compare the frequency with ``exp(-t)``. They are one-sided: a bound that
is loose passes.
"""

import collections
import logging
import math

import numpy as np

from smoothstep.errors import DomainError
from smoothstep.sgd import run_epoch

__all__ = [
    'MartingaleSpec', 'TailReport', 'Trace',
    'bernstein_threshold', 'bernstein_tail', 'binomial_slack', 'simulate_tail',
    'trace_run', 'check_AT', 'check_BT', 'peeling_shells',
]

logger = logging.getLogger(__name__)

COIN_CHUNK = 1000

SQRT2_3 = math.sqrt(2.0) / 3.0

Trace = collections.namedtuple('Trace', 'risk inst ref_inst')
"""Per-step arrays of one SGD run: exact risk ``l(w_t)``, instantaneous loss
``l_t(w_t)`` and instantaneous loss of the reference ``l_t(w*)``."""


def bernstein_threshold(nu, K_mds, t):
    """``sqrt(2 nu t) + sqrt(2)/3 K t``."""
    if nu < 0 or K_mds < 0 or not t > 0:
        raise DomainError('need nu >= 0, K >= 0 and t > 0')
    return math.sqrt(2.0 * nu * t) + SQRT2_3 * K_mds * t


def bernstein_tail(nu, K_mds, x):
    """``exp(-x**2 / (2 (nu + K x / 3)))``, the tail bound at a raw deviation ``x``."""
    if x <= 0:
        return 1.0
    return math.exp(-x * x / (2.0 * (nu + K_mds * x / 3.0)))


def binomial_slack(p, trials, sigmas=3.0):
    """``sigmas`` standard deviations of a binomial frequency with rate ``p``."""
    return sigmas * math.sqrt(p * (1.0 - p) / trials)


def peeling_shells(T):
    """Number of dyadic shells ``m = ceil(log2 T)`` used to bound ``A_T``."""
    return max(1, int(math.ceil(math.log2(T))))


class TailReport(collections.namedtuple('TailReport',
                                        't_values thresholds empirical_exceed theoretical trials variance_cap')):
    """Empirical exceedance frequency per tail parameter against ``exp(-t)``."""

    __slots__ = ()

    def slack(self, sigmas=3.0):
        return [binomial_slack(p, self.trials, sigmas) for p in self.theoretical]

    def within_bound(self, sigmas=3.0):
        """Whether every frequency stays below its bound plus binomial slack."""
        return all(e <= p + s for e, p, s in zip(self.empirical_exceed, self.theoretical, self.slack(sigmas)))

    def rows(self):
        """``(t, threshold, empirical, theoretical, trials)`` per tail parameter."""
        return [(t, thr, e, p, self.trials) for t, thr, e, p in
                zip(self.t_values, self.thresholds, self.empirical_exceed, self.theoretical)]


class MartingaleSpec(collections.namedtuple('MartingaleSpec', 'kind bound length source')):
    """Source of bounded martingale difference sequences.

    ``coin`` draws fair ``+-bound`` increments, whose conditional variance is
    exactly ``bound**2`` per step. ``trajectory`` runs projected SGD and uses
    ``X_t = l(w_t) - l_t(w_t)``, bounded by ``C``, with the exact conditional
    variance of ``l_t(w_t)`` enumerated over the task's atoms. Its ``source``
    is a ``(task, loss, domain, eta)`` tuple.
    """

    __slots__ = ()

    @classmethod
    def coin(cls, length, bound=1.0):
        if length < 1 or bound < 0:
            raise DomainError('coin martingale needs length >= 1 and bound >= 0')
        return cls('coin', float(bound), int(length), None)

    @classmethod
    def trajectory(cls, task, loss, domain, eta, length, bound):
        if length < 1 or not bound > 0:
            raise DomainError('trajectory martingale needs length >= 1 and a positive bound')
        return cls('trajectory', float(bound), int(length), (task, loss, domain, eta))

    def increments(self, rng, trials):
        """Yields ``(X, sigma2)`` chunks: a ``(trials_in_chunk, length)``
        array of increments and each trial's conditional variance sum."""
        if self.kind == 'coin':
            done = 0
            while done < trials:
                size = min(COIN_CHUNK, trials - done)
                signs = 2.0 * rng.integers(0, 2, size=(size, self.length)) - 1.0
                yield self.bound * signs, np.full(size, self.length * self.bound ** 2)
                done += size
        elif self.kind == 'trajectory':
            task, loss, domain, eta = self.source
            for _ in range(trials):
                W, X, y = _sgd_path(task, loss, domain, eta, self.length, rng)
                increments = task.expected_losses(loss, W) - _inst_losses(loss, W, X, y)
                yield increments[None, :], np.array([float(np.sum(task.loss_variances(loss, W)))])
        else:
            raise DomainError('unknown martingale kind {!r}'.format(self.kind))


def _as_list(t_values):
    if np.ndim(t_values) == 0:
        return [float(t_values)]
    return [float(t) for t in t_values]


def simulate_tail(spec, t_values, trials, seed=None, nu=None):
    """Estimates ``P[max_i S_i > threshold(t) and Sigma_n**2 <= nu]``.

    Every tail parameter is evaluated on the same simulated martingales, so
    the frequencies are non-increasing in ``t``.

    :param nu: variance cap; defaults to ``length * bound**2``.
    """
    if trials < 1:
        raise DomainError('need at least one trial, got {}'.format(trials))
    t_values = _as_list(t_values)
    nu = nu if nu is not None else spec.length * spec.bound ** 2
    thresholds = [bernstein_threshold(nu, spec.bound, t) for t in t_values]
    counts = np.zeros(len(t_values), dtype=np.int64)
    rng = np.random.default_rng(seed)
    for X, sigma2 in spec.increments(rng, trials):
        running_max = np.max(np.cumsum(X, axis=1), axis=1)
        capped = sigma2 <= nu
        for j, threshold in enumerate(thresholds):
            counts[j] += int(np.count_nonzero((running_max > threshold) & capped))
    empirical = [c / float(trials) for c in counts]
    theoretical = [math.exp(-t) for t in t_values]
    logger.debug("simulate_tail %s n=%d trials=%d: %s", spec.kind, spec.length, trials, empirical)
    return TailReport(t_values, thresholds, empirical, theoretical, trials, nu)


def _sgd_path(task, loss, domain, eta, T, rng):
    """Runs one epoch and returns its iterates ``(T, dim)`` and examples."""
    examples = task.sample(T, rng)
    out = run_epoch(domain.zeros(), examples, loss, eta, domain, record=True)
    W = np.array([rec.w for rec in out.trajectory])
    X = np.array([x for x, _ in examples], dtype=float)
    y = np.array([y for _, y in examples], dtype=float)
    return W, X, y


def _inst_losses(loss, w_rows, X, y):
    return loss.eval(y * np.einsum('ij,ij->i', w_rows, X))


def trace_run(task, loss, domain, eta, T, seed=None, reference=None):
    """Runs one SGD epoch of length ``T`` from the origin and returns its
    :class:`Trace`. ``ref_inst`` is empty without a reference optimum."""
    W, X, y = _sgd_path(task, loss, domain, eta, T, np.random.default_rng(seed))
    risk = task.expected_losses(loss, W)
    inst = _inst_losses(loss, W, X, y)
    if reference is None:
        ref_inst = np.empty(0)
    else:
        ref_inst = loss.eval(y * X.dot(reference.w_star))
    return Trace(risk, inst, ref_inst)


def check_BT(traces, loss_star, consts, t_values):
    """Frequency of ``B_T > sqrt(2)/3 t C + sqrt(2 t C l(w*) T)`` with
    ``B_T = sum_t (l(w*) - l_t(w*))``."""
    if not traces:
        raise DomainError('need at least one trace')
    t_values = _as_list(t_values)
    T = len(traces[0].ref_inst)
    if T == 0:
        raise DomainError('traces carry no reference losses')
    B = np.array([np.sum(loss_star - tr.ref_inst) for tr in traces])
    thresholds = [SQRT2_3 * t * consts.C + math.sqrt(2.0 * t * consts.C * max(loss_star, 0.0) * T)
                  for t in t_values]
    empirical = [np.count_nonzero(B > thr) / float(len(traces)) for thr in thresholds]
    return TailReport(t_values, thresholds, empirical, [math.exp(-t) for t in t_values], len(traces), None)


def check_AT(traces, consts, t_values):
    """Frequency of ``A_T > 2 sqrt(C D_T t') + sqrt(2)/3 C t'`` together with
    ``D_T > C``, where ``A_T = sum_t (l(w_t) - l_t(w_t))``,
    ``D_T = sum_t l(w_t)`` and ``t' = t + ln m`` pays for the dyadic shells.

    The threshold reported per ``t`` is evaluated at the average ``D_T``.
    """
    if not traces:
        raise DomainError('need at least one trace')
    t_values = _as_list(t_values)
    T = len(traces[0].risk)
    surcharge = math.log(peeling_shells(T))
    A = np.array([np.sum(tr.risk - tr.inst) for tr in traces])
    D = np.array([np.sum(tr.risk) for tr in traces])
    C = consts.C
    empirical, thresholds = [], []
    for t in t_values:
        t_eff = t + surcharge
        bound = 2.0 * np.sqrt(C * D * t_eff) + SQRT2_3 * C * t_eff
        empirical.append(np.count_nonzero((A > bound) & (D > C)) / float(len(traces)))
        thresholds.append(float(2.0 * math.sqrt(C * D.mean() * t_eff) + SQRT2_3 * C * t_eff))
    return TailReport(t_values, thresholds, empirical, [math.exp(-t) for t in t_values], len(traces), None)
