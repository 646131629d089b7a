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

"""Smooth convex margin losses ``phi(z)`` with ``z = y * w.x``.

Every shipped loss is nonnegative, convex and ``gamma``-smooth, which gives
the self-bounding property ``phi'(z)**2 <= 4 * gamma * phi(z)``.
"""

import collections
import logging
import math

import numpy as np
from scipy.special import expit

from smoothstep.errors import DomainError

__all__ = [
    'SmoothLoss', 'ReachableInterval', 'CheckReport', 'LOSSES', 'get_loss',
    'check_self_bounding', 'check_smoothness', 'SELF_BOUNDING_TOL', 'SMOOTHNESS_RTOL',
]

logger = logging.getLogger(__name__)

SELF_BOUNDING_TOL = 1e-12
SMOOTHNESS_RTOL = 1e-9

CheckReport = collections.namedtuple('CheckReport', 'value at passed')
"""Result of a property check over a grid: the worst value found, the margin
(or margin pair) where it was found, and whether the check passed."""


class ReachableInterval(collections.namedtuple('ReachableInterval', 'lo hi')):
    """Interval of margin values ``[lo, hi]`` reachable inside the ball."""

    __slots__ = ()

    def __new__(cls, lo, hi):
        lo, hi = float(lo), float(hi)
        if not (np.isfinite(lo) and np.isfinite(hi)) or not lo <= 0.0 <= hi:
            raise DomainError('reachable interval must satisfy lo <= 0 <= hi, got [{}, {}]'.format(lo, hi))
        return super(ReachableInterval, cls).__new__(cls, lo, hi)

    @classmethod
    def for_ball(cls, radius, max_feature_norm=None):
        """Returns ``[-R X, R X]``, the margins reachable by ``|w| <= R``
        on features with ``|x| <= X`` (``X`` defaults to 1)."""
        if max_feature_norm is None:
            max_feature_norm = 1.0
        bound = float(radius) * float(max_feature_norm)
        return cls(-bound, bound)


def _as_margin(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError('margin must be finite, got {!r}'.format(z))
    return z


def _scalar_or_array(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


def _logistic(z):
    # log(1 + exp(-z)) without overflow for large |z|
    return np.logaddexp(0.0, -z)


def _logistic_deriv(z):
    return -expit(-z)


def _sq_hinge(z):
    return np.square(np.maximum(0.0, 1.0 - z))


def _sq_hinge_deriv(z):
    return -2.0 * np.maximum(0.0, 1.0 - z)


def _huber_hinge(z):
    return np.where(z <= 0.0, 0.5 - z, 0.5 * np.square(np.maximum(0.0, 1.0 - z)))


def _huber_hinge_deriv(z):
    return np.where(z <= 0.0, -1.0, -np.maximum(0.0, 1.0 - z))


# Scalar twins of the above, used once per SGD step on a plain float margin.
def _logistic_scalar(z):
    if z > 0.0:
        e = math.exp(-z)
        return math.log1p(e), -e / (1.0 + e)
    e = math.exp(z)
    return -z + math.log1p(e), -1.0 / (1.0 + e)


def _sq_hinge_scalar(z):
    gap = max(0.0, 1.0 - z)
    return gap * gap, -2.0 * gap


def _huber_hinge_scalar(z):
    if z <= 0.0:
        return 0.5 - z, -1.0
    gap = max(0.0, 1.0 - z)
    return 0.5 * (gap * gap), -gap


class SmoothLoss(object):
    """A nonnegative, convex, ``gamma``-smooth margin loss.

    Instances are immutable and pickle by name, so they can be shipped to
    worker processes. Use :func:`get_loss` instead of constructing them.
    """

    def __init__(self, name, gamma, func, deriv, scalar=None):
        if not gamma > 0:
            raise DomainError('smoothness constant must be positive, got {}'.format(gamma))
        self._name = name
        self._gamma = float(gamma)
        self._func = func
        self._deriv = deriv
        self._scalar = scalar
        self._value_at_zero = float(func(0.0))

    def __reduce__(self):
        return get_loss, (self._name,)

    def __repr__(self):
        return 'SmoothLoss({!r}, gamma={})'.format(self._name, self._gamma)

    @property
    def name(self):
        return self._name

    @property
    def gamma(self):
        """Smoothness constant: ``|phi'(z) - phi'(z')| <= gamma |z - z'|``."""
        return self._gamma

    @property
    def value_at_zero(self):
        return self._value_at_zero

    def eval(self, z):
        """Returns ``phi(z)`` for a scalar or an array of margins.

        :raises DomainError: if any margin is not finite.
        """
        return _scalar_or_array(self._func(_as_margin(z)))

    def deriv(self, z):
        """Returns ``phi'(z)`` for a scalar or an array of margins.

        :raises DomainError: if any margin is not finite.
        """
        return _scalar_or_array(self._deriv(_as_margin(z)))

    def value_and_deriv(self, z):
        """Returns ``(phi(z), phi'(z))`` for a single float margin.

        :raises DomainError: if the margin is not finite.
        """
        z = float(z)
        if not math.isfinite(z):
            raise DomainError('margin must be finite, got {!r}'.format(z))
        if self._scalar is not None:
            return self._scalar(z)
        return float(self._func(z)), float(self._deriv(z))

    def lipschitz_on(self, interval):
        """Lipschitz constant of ``phi`` on a :class:`ReachableInterval`.

        ``phi'`` is monotone for a convex loss, so the largest ``|phi'|``
        is attained at one of the endpoints.
        """
        return max(abs(self.deriv(interval.lo)), abs(self.deriv(interval.hi)))


LOSSES = collections.OrderedDict([
    ('logistic', SmoothLoss('logistic', 0.25, _logistic, _logistic_deriv, _logistic_scalar)),
    ('sq_hinge', SmoothLoss('sq_hinge', 2.0, _sq_hinge, _sq_hinge_deriv, _sq_hinge_scalar)),
    ('huber_hinge', SmoothLoss('huber_hinge', 1.0, _huber_hinge, _huber_hinge_deriv, _huber_hinge_scalar)),
])
"""Shipped losses keyed by their configuration identifier."""


def get_loss(name):
    """Looks up a shipped loss by identifier.

    :raises KeyError: if ``name`` is not one of :data:`LOSSES`.
    """
    try:
        return LOSSES[name]
    except KeyError:
        raise KeyError('unknown loss {!r}, expected one of {}'.format(name, ', '.join(LOSSES)))


def check_self_bounding(loss, grid):
    """Checks ``phi'(z)**2 <= 4 gamma phi(z)`` on every grid margin.

    :returns: :class:`CheckReport` with the largest ``phi'(z)**2 - 4 gamma phi(z)``.
    """
    z = _as_margin(grid).ravel()
    if z.size == 0:
        raise DomainError('grid must not be empty')
    violation = np.square(loss.deriv(z)) - 4.0 * loss.gamma * loss.eval(z)
    i = int(np.argmax(violation))
    worst = float(violation[i])
    logger.debug("%s self-bounding: worst violation %g at z=%g", loss.name, worst, z[i])
    return CheckReport(worst, float(z[i]), worst <= SELF_BOUNDING_TOL)


def check_smoothness(loss, grid):
    """Checks that ``phi'`` is ``gamma``-Lipschitz over all grid pairs.

    For scalar margins the largest difference quotient over all pairs is
    attained by neighbours of the sorted grid, so only those are compared.
    Repeated margins contribute nothing.

    :returns: :class:`CheckReport` with the largest ratio and the pair where it occurs.
    """
    z = np.unique(_as_margin(grid).ravel())
    if z.size < 2:
        raise DomainError('grid must contain at least two distinct margins')
    slopes = np.abs(np.diff(loss.deriv(z))) / np.diff(z)
    i = int(np.argmax(slopes))
    worst = float(slopes[i])
    return CheckReport(worst, (float(z[i]), float(z[i + 1])), worst <= loss.gamma * (1.0 + SMOOTHNESS_RTOL))
