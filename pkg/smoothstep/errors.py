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

__all__ = [
    'Error', 'DomainError', 'NumericError', 'ConvergenceError', 'ConfigError',
]


class Error(Exception):
    """Exception that is the base class of all other error exceptions.
    You can use this to catch all errors with one single except statement."""

    def __init__(self, message, cause=None):
        super(Error, self).__init__(message, cause)

    @property
    def message(self):
        return self.args[0]

    @property
    def cause(self):
        return self.args[1]

    def __str__(self):
        return str(self.message)


class DomainError(Error):
    """Raised when an input lies outside the domain of an operation, e.g.
    a non-finite margin, a vector of the wrong length or an invalid
    probability table."""


class NumericError(Error):
    """Raised when an SGD step produces a non-finite gradient or iterate.

    The offending step index, iterate and example are kept so the failure
    can be replayed. The epoch index is filled in by the scheduler."""

    def __init__(self, message, cause=None, step=None, w=None, example=None, epoch=None):
        Exception.__init__(self, message, cause, step, w, example, epoch)

    @property
    def step(self):
        return self.args[2]

    @property
    def w(self):
        return self.args[3]

    @property
    def example(self):
        return self.args[4]

    @property
    def epoch(self):
        return self.args[5]

    def with_epoch(self, epoch):
        """Returns a copy of this error annotated with an epoch index."""
        return NumericError('epoch {}: {}'.format(epoch, self.message), step=self.step, w=self.w,
                            example=self.example, epoch=epoch, cause=self.cause)


class ConvergenceError(Error):
    """Raised when an iterative solver stops before reaching its tolerance."""

    def __init__(self, message, cause=None, last_iterate=None, iterations=None):
        Exception.__init__(self, message, cause, last_iterate, iterations)

    @property
    def last_iterate(self):
        return self.args[2]

    @property
    def iterations(self):
        return self.args[3]


class ConfigError(Error):
    """Raised when an experiment configuration fails validation.

    :attr:`path` names the offending field with dots, e.g. ``schedule.T1``."""

    def __init__(self, message, cause=None, path=None):
        Exception.__init__(self, message, cause, path)

    @property
    def path(self):
        return self.args[2]

    def __str__(self):
        if self.path:
            return '{}: {}'.format(self.path, self.message)
        return str(self.message)
