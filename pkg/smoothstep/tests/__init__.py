import json
import os
import shutil
import tempfile
import unittest

from smoothstep.domain import BallDomain
from smoothstep.tasks import Task

SLOW_TESTS = os.environ.get('SMOOTHSTEP_SLOW_TESTS')


def single_atom_task(x=(1.0,), y=1.0):
    return Task([x], [y], [1.0], name='single')


def symmetric_task():
    """``{(e1, +1, 0.5), (e1, -1, 0.5)}``: the label carries no signal."""
    return Task([[1.0], [1.0]], [1.0, -1.0], [0.5, 0.5], name='symmetric')


def two_atom_noisy_task():
    """One location, labelled ``+1`` with probability 0.8."""
    return Task([[1.0], [1.0]], [1.0, -1.0], [0.8, 0.2], name='two-atom')


def unit_ball(dim=1, radius=1.0):
    return BallDomain(radius, dim)


class TempDirTestCase(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix='smoothstep-test-')
        self.addCleanup(shutil.rmtree, self.tmpdir, True)

    def writeConfig(self, doc, name='config.json'):
        path = os.path.join(self.tmpdir, name)
        with open(path, 'w') as f:
            json.dump(doc, f)
        return path

    def readBytes(self, *parts):
        with open(os.path.join(self.tmpdir, *parts), 'rb') as f:
            return f.read()


@unittest.skipIf(SLOW_TESTS is None, "these tests require the SMOOTHSTEP_SLOW_TESTS environment variable to be set")
class AcceptanceTestCase(unittest.TestCase):
    """Full-scale Monte-Carlo checks, several minutes each."""
