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

import math

import numpy as np

from smoothstep.errors import DomainError

__all__ = ['BallDomain', 'CONTAINS_RTOL']

CONTAINS_RTOL = 1e-12


def _norm(v):
    sq = float(np.dot(v, v))
    if math.isfinite(sq):
        return math.sqrt(sq)
    # overflowed, or not finite: rescale by the largest entry
    scale = float(np.max(np.abs(v)))
    if not math.isfinite(scale):
        return scale
    u = v / scale
    return scale * math.sqrt(float(np.dot(u, u)))


class BallDomain(object):
    """Euclidean ball ``{w in R^d : |w| <= R}``."""

    def __init__(self, radius, dim):
        radius = float(radius)
        if not (math.isfinite(radius) and radius > 0):
            raise DomainError('radius must be finite and positive, got {}'.format(radius))
        if int(dim) != dim or dim < 1:
            raise DomainError('dimension must be a positive integer, got {}'.format(dim))
        self._radius = radius
        self._dim = int(dim)

    def __repr__(self):
        return 'BallDomain(radius={}, dim={})'.format(self._radius, self._dim)

    def __eq__(self, other):
        return isinstance(other, BallDomain) and (self._radius, self._dim) == (other._radius, other._dim)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self._radius, self._dim))

    @property
    def radius(self):
        return self._radius

    @property
    def dim(self):
        return self._dim

    def zeros(self):
        """Returns the origin, the usual starting iterate."""
        return np.zeros(self._dim)

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self._dim,):
            raise DomainError('expected a vector of length {}, got shape {}'.format(self._dim, v.shape))
        return v

    def project(self, v):
        """Euclidean projection onto the ball.

        Interior points are returned unchanged, outside points are scaled
        radially onto the sphere.

        :raises DomainError: if ``v`` has the wrong length or non-finite entries.
        """
        return self.clip(self._check(v))

    def clip(self, v):
        """Same as :meth:`project` for a float array already known to have
        length ``dim``."""
        norm = _norm(v)
        if norm <= self._radius:
            return v
        if not math.isfinite(norm):
            scale = float(np.max(np.abs(v)))
            if not math.isfinite(scale):
                raise DomainError('cannot project a non-finite vector')
            # finite entries whose norm overflows
            v = v / scale
            norm = math.sqrt(float(np.dot(v, v)))
        return v * (self._radius / norm)

    def contains(self, v):
        """Whether ``|v| <= R`` up to a relative tolerance of ``1e-12``."""
        v = self._check(v)
        return bool(_norm(v) <= self._radius * (1.0 + CONTAINS_RTOL))
