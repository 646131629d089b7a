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

from smoothstep import errors
from smoothstep.domain import BallDomain
from smoothstep.errors import *
from smoothstep.losses import LOSSES, SmoothLoss, get_loss
from smoothstep.schedule import ScheduleConfig, run_adaptive
from smoothstep.sgd import run_epoch
from smoothstep.tasks import Task, best_in_ball, make_task

__all__ = [
    'BallDomain', 'LOSSES', 'SmoothLoss', 'get_loss', 'ScheduleConfig', 'run_adaptive', 'run_epoch',
    'Task', 'best_in_ball', 'make_task', 'fit',
] + errors.__all__

__version__ = '0.1.0'


def fit(task, loss, radius, budget, T1=None, delta=None, seed=None, warm_start=False):
    """Learns a linear predictor from ``budget`` samples of ``task`` without
    tuning a step size.

    :param loss:
        A :class:`~smoothstep.losses.SmoothLoss` or the name of a shipped loss.

    :param radius:
        Radius ``R`` of the ball the predictor is constrained to.

    :param budget:
        Total number of examples. The epoch doubling schedule uses as many
        epochs as fit into it.

    :param T1:
        Length of the first epoch, 1 by default.

    :param delta:
        Failure probability of the loss surrogate, 0.05 by default.

    :returns:
        :class:`~smoothstep.schedule.RunResult`; ``w_final`` is the predictor.
    """
    if isinstance(loss, str):
        loss = get_loss(loss)
    domain = BallDomain(radius, task.dim)
    schedule = ScheduleConfig.from_budget(budget, T1 if T1 is not None else 1,
                                          delta if delta is not None else 0.05, warm_start=warm_start)
    return run_adaptive(task, loss, domain, schedule, seed)
