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

"""Experiment configuration documents.

A configuration is a JSON object; see ``doc/formats.rst`` for the schema.
:func:`parse_config` validates it and reports the first offending field by
its dotted path.
"""

import collections
import copy
import json
import logging
import numbers
import os

from smoothstep.domain import BallDomain
from smoothstep.errors import ConfigError, DomainError
from smoothstep.losses import LOSSES
from smoothstep.schedule import ScheduleConfig, epochs_for_budget
from smoothstep.tasks import TASK_FACTORIES, Task, make_task

__all__ = ['ExperimentConfig', 'TaskSpec', 'STRATEGIES', 'load_config', 'parse_config', 'build_task', 'config_to_dict']

logger = logging.getLogger(__name__)

STRATEGIES = ('adaptive', 'oracle_fixed', 'constant_cap', 'sqrt_decay')

DEFAULT_TOL = 1e-8

TaskSpec = collections.namedtuple('TaskSpec', 'factory params seed path')
"""Either a factory name with keyword parameters and a seed, or the path of a
saved task document."""

ExperimentConfig = collections.namedtuple(
    'ExperimentConfig', 'loss task domain schedule budgets strategies trials seed tol out')
"""Validated experiment configuration."""

_TOP_LEVEL_KEYS = {'loss', 'task', 'domain', 'schedule', 'budgets', 'strategies', 'trials', 'seed', 'tol', 'out'}
_SCHEDULE_KEYS = {'T1', 'm', 'delta', 'K', 'eta_cap_factor', 'warm_start'}


def _get(doc, key, path, required=True, default=None):
    if not isinstance(doc, dict):
        raise ConfigError('expected an object', path=path)
    if key not in doc:
        if required:
            raise ConfigError('missing required field', path=_join(path, key))
        return default
    return doc[key]


def _join(path, key):
    return '{}.{}'.format(path, key) if path else key


def _check_keys(doc, allowed, path):
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError('unknown field', path=_join(path, unknown[0]))


def _integer(value, path, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError('expected an integer, got {!r}'.format(value), path=path)
    if value < minimum:
        raise ConfigError('must be at least {}, got {}'.format(minimum, value), path=path)
    return int(value)


def _number(value, path, lower=None, upper=None, inclusive=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError('expected a number, got {!r}'.format(value), path=path)
    value = float(value)
    if lower is not None and (value < lower or (not inclusive and value == lower)):
        raise ConfigError('must be {} {}, got {}'.format('>=' if inclusive else '>', lower, value), path=path)
    if upper is not None and value >= upper:
        raise ConfigError('must be < {}, got {}'.format(upper, value), path=path)
    return value


def _parse_task(doc, base_dir):
    if not isinstance(doc, dict):
        raise ConfigError('expected an object', path='task')
    if 'path' in doc:
        _check_keys(doc, {'path'}, 'task')
        path = doc['path']
        if not isinstance(path, str):
            raise ConfigError('expected a file name', path='task.path')
        return TaskSpec(None, None, None, os.path.join(base_dir, path) if base_dir else path)
    _check_keys(doc, {'factory', 'params', 'seed'}, 'task')
    factory = _get(doc, 'factory', 'task')
    if not isinstance(factory, str) or factory not in TASK_FACTORIES:
        raise ConfigError('unknown task factory {!r}, expected one of {}'.format(
            factory, ', '.join(sorted(TASK_FACTORIES))), path='task.factory')
    params = _get(doc, 'params', 'task', required=False, default={})
    if not isinstance(params, dict):
        raise ConfigError('expected an object', path='task.params')
    seed = _integer(_get(doc, 'seed', 'task', required=False, default=0), 'task.seed', 0)
    return TaskSpec(factory, dict(params), seed, None)


def _parse_schedule(doc, budgets):
    _check_keys(doc, _SCHEDULE_KEYS, 'schedule')
    T1 = _integer(_get(doc, 'T1', 'schedule', required=False, default=1), 'schedule.T1', 1)
    for i, budget in enumerate(budgets or ()):
        if budget < T1:
            raise ConfigError('budget {} is smaller than T1 = {}'.format(budget, T1), path='budgets[{}]'.format(i))
    if 'm' in doc:
        m = _integer(doc['m'], 'schedule.m', 1)
        if budgets and m != epochs_for_budget(max(budgets), T1):
            logger.warning("schedule.m = %d is only used by concentration; bench and run take the number of "
                           "epochs from each budget", m)
    elif budgets:
        m = epochs_for_budget(max(budgets), T1)
    else:
        raise ConfigError('missing required field (or give budgets)', path='schedule.m')
    delta = _number(_get(doc, 'delta', 'schedule', required=False, default=0.05), 'schedule.delta', 0.0, 1.0)
    K = _number(_get(doc, 'K', 'schedule', required=False, default=1.0), 'schedule.K', 0.0)
    cap = _number(_get(doc, 'eta_cap_factor', 'schedule', required=False, default=6.0),
                  'schedule.eta_cap_factor', 2.0, inclusive=True)
    warm_start = _get(doc, 'warm_start', 'schedule', required=False, default=False)
    if not isinstance(warm_start, bool):
        raise ConfigError('expected true or false', path='schedule.warm_start')
    return ScheduleConfig(T1, m, delta, K=K, eta_cap_factor=cap, warm_start=warm_start)


def parse_config(doc, overrides=None, base_dir=None):
    """Validates a configuration document.

    :param overrides: mapping of top-level keys (``trials``, ``seed``,
        ``out``) replacing the document's values; ``None`` values are ignored.
    :param base_dir: directory that relative task paths are resolved against.
    :raises ConfigError: naming the first invalid field.
    """
    if not isinstance(doc, dict):
        raise ConfigError('configuration must be a JSON object')
    doc = copy.deepcopy(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value
    _check_keys(doc, _TOP_LEVEL_KEYS, '')

    loss = _get(doc, 'loss', '')
    if not isinstance(loss, str) or loss not in LOSSES:
        raise ConfigError('unknown loss {!r}, expected one of {}'.format(loss, ', '.join(LOSSES)), path='loss')

    task = _parse_task(_get(doc, 'task', ''), base_dir)

    domain_doc = _get(doc, 'domain', '')
    if not isinstance(domain_doc, dict):
        raise ConfigError('expected an object', path='domain')
    _check_keys(domain_doc, {'radius', 'dim'}, 'domain')
    radius = _number(_get(domain_doc, 'radius', 'domain'), 'domain.radius', 0.0)
    dim = _integer(_get(domain_doc, 'dim', 'domain'), 'domain.dim', 1)
    try:
        domain = BallDomain(radius, dim)
    except DomainError as e:
        raise ConfigError(e.message, path='domain', cause=e)

    budgets = _get(doc, 'budgets', '', required=False, default=None)
    if budgets is not None:
        if not isinstance(budgets, list) or not budgets:
            raise ConfigError('expected a non-empty list of sample budgets', path='budgets')
        budgets = [_integer(b, 'budgets[{}]'.format(i), 1) for i, b in enumerate(budgets)]
        if len(set(budgets)) != len(budgets):
            raise ConfigError('budgets must be distinct', path='budgets')

    schedule_doc = _get(doc, 'schedule', '', required=False, default={})
    if not isinstance(schedule_doc, dict):
        raise ConfigError('expected an object', path='schedule')
    schedule = _parse_schedule(schedule_doc, budgets)
    budgets = tuple(sorted(budgets)) if budgets is not None else (schedule.total_steps,)

    strategies = _get(doc, 'strategies', '', required=False, default=['adaptive'])
    if not isinstance(strategies, list) or not strategies:
        raise ConfigError('expected a non-empty list', path='strategies')
    for i, name in enumerate(strategies):
        if not isinstance(name, str) or name not in STRATEGIES:
            raise ConfigError('unknown strategy {!r}, expected one of {}'.format(name, ', '.join(STRATEGIES)),
                              path='strategies[{}]'.format(i))
    if len(set(strategies)) != len(strategies):
        raise ConfigError('strategies must be distinct', path='strategies')

    trials = _integer(_get(doc, 'trials', '', required=False, default=1), 'trials', 1)
    seed = _integer(_get(doc, 'seed', '', required=False, default=0), 'seed', 0)
    tol = _number(_get(doc, 'tol', '', required=False, default=DEFAULT_TOL), 'tol', 0.0)
    out = _get(doc, 'out', '', required=False, default=None)
    if out is not None and not isinstance(out, str):
        raise ConfigError('expected a directory name', path='out')

    return ExperimentConfig(loss, task, domain, schedule, budgets, tuple(strategies), trials, seed, tol, out)


def load_config(path, overrides=None):
    """Reads and validates a JSON configuration file."""
    try:
        with open(path) as f:
            doc = json.load(f)
    except (IOError, OSError) as e:
        raise ConfigError('cannot read configuration file {}'.format(path), cause=e)
    except ValueError as e:
        raise ConfigError('invalid JSON in {}: {}'.format(path, e), cause=e)
    return parse_config(doc, overrides, base_dir=os.path.dirname(os.path.abspath(path)))


def build_task(config):
    """Materialises the configured task and checks it against the domain."""
    spec = config.task
    try:
        if spec.path is not None:
            task = Task.load(spec.path)
        else:
            task = make_task(spec.factory, spec.params, seed=spec.seed)
    except (IOError, OSError) as e:
        raise ConfigError('cannot read task file {}'.format(spec.path), path='task.path', cause=e)
    except (TypeError, ValueError, DomainError) as e:
        raise ConfigError('cannot build task: {}'.format(e), path='task', cause=e)
    if task.dim != config.domain.dim:
        raise ConfigError('task has dimension {} but the domain has {}'.format(task.dim, config.domain.dim),
                          path='domain.dim')
    return task


def config_to_dict(config):
    """JSON-ready echo of a configuration."""
    task = config.task
    if task.path is not None:
        task_doc = {'path': task.path}
    else:
        task_doc = {'factory': task.factory, 'params': task.params, 'seed': task.seed}
    return {
        'loss': config.loss,
        'task': task_doc,
        'domain': {'radius': config.domain.radius, 'dim': config.domain.dim},
        'schedule': config.schedule._asdict(),
        'budgets': list(config.budgets),
        'strategies': list(config.strategies),
        'trials': config.trials,
        'seed': config.seed,
        'tol': config.tol,
    }
