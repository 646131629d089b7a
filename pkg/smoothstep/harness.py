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

"""Multi-trial benchmarks of the adaptive scheme against fixed-step baselines.

Trials are independent and may run in a process pool. Every trial derives its
seed from the base seed and its key, and results are ordered by key before
anything is written, so output files do not depend on the worker count.
"""

import collections
import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from smoothstep.concentration import MartingaleSpec, check_AT, check_BT, simulate_tail, trace_run
from smoothstep.config import build_task, config_to_dict
from smoothstep.errors import ConfigError, Error
from smoothstep.losses import get_loss
from smoothstep.schedule import (EpochRecord, RunResult, ScheduleConfig, bound_constants, excess_bound_shape,
                                 fixed_step_bound, next_step_size, run_adaptive, step_size_cap, surrogate)
from smoothstep.sgd import run_epoch
from smoothstep.tasks import best_in_ball, trial_seed

__all__ = [
    'BenchSummary', 'SummaryRow', 'TrialOutcome', 'CONCENTRATION_KINDS', 'CSV_COLUMNS', 'TAIL_CSV_COLUMNS',
    'SUMMARY_KEYS', 'run_bench', 'run_single', 'run_concentration', 'oracle_fixed_strategy',
    'constant_cap_strategy', 'sqrt_decay_strategy', 'run_strategy', 'map_trials', 'worker_count',
    'run_result_to_dict', 'write_tail_report',
]

logger = logging.getLogger(__name__)

THREADS_ENV = 'SMOOTHSTEP_THREADS'

CONCENTRATION_KINDS = ('coin', 'trajectory', 'at', 'bt')

CSV_COLUMNS = ['strategy', 'budget', 'trial_id', 'k', 'T_k', 'eta_k', 'd_hat_k', 'ell_hat_k', 'excess_k']
"""Columns of ``trials.csv``, one row per trial per epoch."""

TAIL_CSV_COLUMNS = ['t', 'threshold', 'empirical', 'theoretical', 'trials']
"""Columns of ``tail_report.csv``, one row per tail parameter."""

SUMMARY_KEYS = ['config', 'errors', 'failures', 'loss_star', 'rows', 'slopes', 'w_star']
"""Top-level keys of ``summary.json``."""

SummaryRow = collections.namedtuple(
    'SummaryRow', 'strategy budget T trials failures median q90 q_conf conf_level C t_log bound_shape '
                  'fixed_step_bound fitted_constant')
"""Excess-risk quantiles of one strategy at one sample budget. ``q_conf`` is
the ``1 - delta`` quantile and ``fitted_constant`` the median divided by
``bound_shape``."""

BenchSummary = collections.namedtuple('BenchSummary', 'rows slopes failures errors loss_star w_star')
"""Aggregated benchmark: summary rows, the fitted log-log slope of median
excess risk against ``T`` per strategy, and the trial failures."""

TrialOutcome = collections.namedtuple('TrialOutcome', 'strategy budget_index trial result error')
"""Result of one trial; exactly one of ``result`` and ``error`` is set."""

TrialJob = collections.namedtuple('TrialJob', 'strategy budget_index trial task loss domain schedule reference seed')


def worker_count():
    """Number of worker processes: ``SMOOTHSTEP_THREADS`` or every core."""
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            workers = int(value)
        except ValueError:
            workers = 0
        if workers < 1:
            raise ConfigError('expected a positive integer, got {!r}'.format(value), path=THREADS_ENV)
        return workers
    return os.cpu_count() or 1


def map_trials(func, jobs, workers=None):
    """Applies ``func`` to every job, in a process pool when more than one
    worker is allowed. Results come back in job order."""
    jobs = list(jobs)
    workers = workers if workers is not None else worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    chunksize = max(1, len(jobs) // (4 * workers))
    logger.debug("running %d jobs on %d workers", len(jobs), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs, chunksize=chunksize))


def _single_epoch(strategy, task, loss, domain, schedule, T, eta, seed, reference):
    consts = bound_constants(loss, domain, schedule.delta, schedule.m)
    out = run_epoch(domain.zeros(), task.sample(T, seed), loss, eta, domain)
    eta_1 = eta(1) if callable(eta) else eta
    risk = excess = None
    if reference is not None:
        risk = task.exact_expected_loss(loss, out.w_avg)
        excess = risk - reference.loss_star
    record = EpochRecord(1, T, eta_1, out.d_hat, surrogate(out.d_hat, consts, T), out.w_avg, risk, excess)
    return RunResult(strategy, [record], out.w_avg, risk, excess)


def oracle_fixed_strategy(task, loss, domain, T, seed, reference, schedule=None):
    """One epoch of length ``T`` with ``eta = min(R / (2 sqrt(gamma T l(w*))), 1 / (6 gamma))``.

    This is the step size that needs the optimal loss in advance; a zero
    optimal loss gives the cap.
    """
    schedule = schedule if schedule is not None else ScheduleConfig.from_budget(T, T, 0.05)
    eta = next_step_size(domain, loss.gamma, T, reference.loss_star, schedule.eta_cap_factor)
    return _single_epoch('oracle_fixed', task, loss, domain, schedule, T, eta, seed, reference)


def constant_cap_strategy(task, loss, domain, T, seed, reference=None, schedule=None):
    """One epoch of length ``T`` at the step size cap ``1 / (6 gamma)``."""
    schedule = schedule if schedule is not None else ScheduleConfig.from_budget(T, T, 0.05)
    eta = step_size_cap(loss.gamma, schedule.eta_cap_factor)
    return _single_epoch('constant_cap', task, loss, domain, schedule, T, eta, seed, reference)


def _sqrt_decay(radius):
    return lambda t: radius / math.sqrt(t)


def sqrt_decay_strategy(task, loss, domain, T, seed, reference=None, schedule=None):
    """One epoch of length ``T`` with ``eta_t = R / sqrt(t)``."""
    schedule = schedule if schedule is not None else ScheduleConfig.from_budget(T, T, 0.05)
    return _single_epoch('sqrt_decay', task, loss, domain, schedule, T, _sqrt_decay(domain.radius), seed, reference)


def run_strategy(strategy, task, loss, domain, schedule, seed, reference):
    """Runs one strategy on the budget ``schedule.total_steps``."""
    if strategy == 'adaptive':
        return run_adaptive(task, loss, domain, schedule, seed, reference)
    T = schedule.total_steps
    if strategy == 'oracle_fixed':
        return oracle_fixed_strategy(task, loss, domain, T, seed, reference, schedule)
    if strategy == 'constant_cap':
        return constant_cap_strategy(task, loss, domain, T, seed, reference, schedule)
    if strategy == 'sqrt_decay':
        return sqrt_decay_strategy(task, loss, domain, T, seed, reference, schedule)
    raise ConfigError('unknown strategy {!r}'.format(strategy), path='strategies')


def _run_trial(job):
    try:
        result = run_strategy(job.strategy, job.task, job.loss, job.domain, job.schedule, job.seed, job.reference)
    except Error as e:
        return TrialOutcome(job.strategy, job.budget_index, job.trial, None, str(e))
    return TrialOutcome(job.strategy, job.budget_index, job.trial, result, None)


def _schedule_for(config, budget):
    s = config.schedule
    return ScheduleConfig.from_budget(budget, s.T1, s.delta, K=s.K, eta_cap_factor=s.eta_cap_factor,
                                      warm_start=s.warm_start)


def _fit_slope(Ts, medians):
    points = [(math.log(T), math.log(m)) for T, m in zip(Ts, medians) if m > 0]
    if len(points) < 2:
        return None
    if len(points) < len(Ts):
        logger.warning("ignoring %d non-positive medians in the slope fit", len(Ts) - len(points))
    x, y = zip(*points)
    return float(np.polyfit(x, y, 1)[0])


def _summarise(config, loss, domain, reference, schedules, outcomes):
    rows, errors = [], []
    for outcome in outcomes:
        if outcome.error is not None:
            errors.append({'strategy': outcome.strategy, 'budget': config.budgets[outcome.budget_index],
                           'trial': outcome.trial, 'error': outcome.error})
    slopes = collections.OrderedDict()
    for strategy in config.strategies:
        Ts, medians = [], []
        for b, budget in enumerate(config.budgets):
            schedule = schedules[b]
            excess = np.array([o.result.excess for o in outcomes
                               if o.strategy == strategy and o.budget_index == b and o.result is not None])
            failures = sum(1 for o in outcomes if o.strategy == strategy and o.budget_index == b and o.error)
            T = schedule.total_steps
            consts = bound_constants(loss, domain, schedule.delta, schedule.m)
            shape = excess_bound_shape(consts, T, reference.loss_star)
            if excess.size:
                median, q90, q_conf = (float(q) for q in np.quantile(excess, [0.5, 0.9, 1.0 - schedule.delta]))
            else:
                median = q90 = q_conf = None
            rows.append(SummaryRow(strategy, budget, T, int(excess.size), failures, median, q90, q_conf,
                                   1.0 - schedule.delta, consts.C, consts.t_log, shape,
                                   fixed_step_bound(consts, T, reference.loss_star),
                                   median / shape if median is not None else None))
            if median is not None:
                Ts.append(T)
                medians.append(median)
        slopes[strategy] = _fit_slope(Ts, medians)
    return BenchSummary(rows, slopes, len(errors), errors, reference.loss_star, reference.w_star)


def _float_cell(value):
    return '' if value is None else repr(float(value))


def _write_trials_csv(path, config, outcomes):
    with open(path, 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for o in outcomes:
            if o.result is None:
                continue
            for rec in o.result.epochs:
                writer.writerow([o.strategy, config.budgets[o.budget_index], o.trial, rec.k, rec.T_k,
                                 _float_cell(rec.eta_k), _float_cell(rec.d_hat_k), _float_cell(rec.ell_hat_k),
                                 _float_cell(rec.excess_k)])


def _summary_to_dict(config, summary):
    return {
        'config': config_to_dict(config),
        'failures': summary.failures,
        'errors': summary.errors,
        'loss_star': summary.loss_star,
        'w_star': [float(v) for v in summary.w_star],
        'rows': [row._asdict() for row in summary.rows],
        'slopes': dict(summary.slopes),
    }


def _write_json(path, doc):
    with open(path, 'w') as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write('\n')


def run_bench(config, workers=None):
    """Runs every configured strategy ``trials`` times per sample budget.

    Excess risk is exact: ``l(w_hat) - l(w*)`` with ``w*`` from
    :func:`~smoothstep.tasks.best_in_ball`. When ``config.out`` is set,
    ``trials.csv`` and ``summary.json`` are written there.

    Trials that raise a numeric error are excluded from the quantiles and
    counted in :attr:`BenchSummary.failures`.
    """
    task = build_task(config)
    loss = get_loss(config.loss)
    domain = config.domain
    reference = best_in_ball(task, loss, domain, tol=config.tol)
    logger.info("reference optimum: loss %.10g after %d iterations", reference.loss_star, reference.iterations)
    schedules = [_schedule_for(config, budget) for budget in config.budgets]
    jobs = []
    for b, schedule in enumerate(schedules):
        for trial in range(config.trials):
            seed = trial_seed(config.seed, b, trial)
            for strategy in config.strategies:
                jobs.append(TrialJob(strategy, b, trial, task, loss, domain, schedule, reference, seed))
    logger.info("running %d trials over %d budgets", len(jobs), len(schedules))
    order = {s: i for i, s in enumerate(config.strategies)}
    outcomes = sorted(map_trials(_run_trial, jobs, workers),
                      key=lambda o: (order[o.strategy], o.budget_index, o.trial))
    for o in outcomes:
        if o.error is not None:
            logger.warning("trial %s/%d/%d failed: %s", o.strategy, config.budgets[o.budget_index], o.trial, o.error)
    summary = _summarise(config, loss, domain, reference, schedules, outcomes)
    if config.out:
        if not os.path.isdir(config.out):
            os.makedirs(config.out)
        _write_trials_csv(os.path.join(config.out, 'trials.csv'), config, outcomes)
        _write_json(os.path.join(config.out, 'summary.json'), _summary_to_dict(config, summary))
        logger.info("wrote results to %s", config.out)
    return summary


def run_result_to_dict(result):
    def vector(w):
        return [float(v) for v in w]
    return {
        'strategy': result.strategy,
        'epochs': [dict(rec._asdict(), w_avg_k=vector(rec.w_avg_k)) for rec in result.epochs],
        'w_final': vector(result.w_final),
        'risk': result.risk,
        'excess': result.excess,
    }


def run_single(config):
    """One adaptive run on the largest configured budget, with trial seed 0."""
    task = build_task(config)
    loss = get_loss(config.loss)
    reference = best_in_ball(task, loss, config.domain, tol=config.tol)
    schedule = _schedule_for(config, config.budgets[-1])
    result = run_adaptive(task, loss, config.domain, schedule, trial_seed(config.seed, len(config.budgets) - 1, 0),
                          reference)
    doc = run_result_to_dict(result)
    doc['config'] = config_to_dict(config)
    doc['loss_star'] = reference.loss_star
    if config.out:
        if not os.path.isdir(config.out):
            os.makedirs(config.out)
        _write_json(os.path.join(config.out, 'run.json'), doc)
    return result, doc


def _trace_job(job):
    task, loss, domain, eta, T, seed, reference = job
    return trace_run(task, loss, domain, eta, T, seed, reference)


def run_concentration(kind, t_values, trials, seed, length, config=None, eta=None, workers=None):
    """Runs one tail experiment.

    ``coin`` simulates a fair-coin martingale of ``length`` steps;
    ``trajectory``, ``at`` and ``bt`` use SGD runs of ``length`` steps on the
    configured task at step size ``eta`` (default: the cap ``1 / (6 gamma)``).
    """
    if kind not in CONCENTRATION_KINDS:
        raise ConfigError('unknown concentration experiment {!r}'.format(kind), path='kind')
    if kind == 'coin':
        return simulate_tail(MartingaleSpec.coin(length), t_values, trials, seed)
    if config is None:
        raise ConfigError('a configuration is required for {!r} experiments'.format(kind), path='config')
    task = build_task(config)
    loss = get_loss(config.loss)
    domain = config.domain
    eta = eta if eta is not None else step_size_cap(loss.gamma, config.schedule.eta_cap_factor)
    consts = bound_constants(loss, domain, config.schedule.delta, config.schedule.m)
    if kind == 'trajectory':
        spec = MartingaleSpec.trajectory(task, loss, domain, eta, length, consts.C)
        return simulate_tail(spec, t_values, trials, seed, nu=length * consts.C ** 2)
    reference = best_in_ball(task, loss, domain, tol=config.tol) if kind == 'bt' else None
    jobs = [(task, loss, domain, eta, length, trial_seed(seed, trial), reference) for trial in range(trials)]
    traces = map_trials(_trace_job, jobs, workers)
    if kind == 'at':
        return check_AT(traces, consts, t_values)
    return check_BT(traces, reference.loss_star, consts, t_values)


def write_tail_report(report, out_dir, kind):
    """Writes ``tail_report.json`` and ``tail_report.csv`` into ``out_dir``."""
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    doc = dict(report._asdict(), kind=kind, within_bound=report.within_bound())
    _write_json(os.path.join(out_dir, 'tail_report.json'), doc)
    with open(os.path.join(out_dir, 'tail_report.csv'), 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TAIL_CSV_COLUMNS)
        for t, threshold, empirical, theoretical, trials in report.rows():
            writer.writerow([repr(t), repr(threshold), repr(empirical), repr(theoretical), trials])
