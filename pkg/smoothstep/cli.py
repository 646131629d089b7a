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

"""Command line interface.

Exit codes: ``0`` on success, ``1`` on usage and validation errors, ``2`` on
numeric failures, including any failed bench trial.
"""

import argparse
import json
import logging
import sys

from smoothstep.config import load_config
from smoothstep.domain import BallDomain
from smoothstep.errors import ConfigError, DomainError, Error
from smoothstep.harness import CONCENTRATION_KINDS, run_bench, run_concentration, run_single, write_tail_report
from smoothstep.losses import LOSSES, ReachableInterval

__all__ = ['main', 'cli_main', 'build_parser', 'EXIT_OK', 'EXIT_USAGE', 'EXIT_NUMERIC']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class _ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, '{}: error: {}\n'.format(self.prog, message))


def _add_overrides(parser, trials=True):
    if trials:
        parser.add_argument('--trials', type=int, help="override the number of trials")
    parser.add_argument('--seed', type=int, help="override the base seed")
    parser.add_argument('--out', help="output directory")


def build_parser():
    parser = _ArgumentParser(prog='smoothstep', description="Projected SGD with parameter-free step sizes.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help="log debug messages")
    verbosity.add_argument('-q', '--quiet', action='store_true', help="log warnings and errors only")
    commands = parser.add_subparsers(dest='command', parser_class=_ArgumentParser)
    commands.required = True

    bench = commands.add_parser('bench', help="run every strategy on every sample budget")
    bench.add_argument('--config', required=True, help="experiment configuration (JSON)")
    _add_overrides(bench)

    run = commands.add_parser('run', help="run the adaptive scheme once and print the result as JSON")
    run.add_argument('--config', required=True, help="experiment configuration (JSON)")
    _add_overrides(run, trials=False)

    conc = commands.add_parser('concentration', help="Monte-Carlo check of a martingale tail bound")
    conc.add_argument('--kind', choices=CONCENTRATION_KINDS, default='coin')
    conc.add_argument('--config', help="experiment configuration, required unless --kind coin")
    conc.add_argument('--t', dest='t_values', type=float, nargs='+', default=[1.0, 2.0, 3.0],
                      help="tail parameters")
    conc.add_argument('--trials', type=int, default=10000)
    conc.add_argument('--length', type=int, default=1000, help="martingale length or SGD steps per trial")
    conc.add_argument('--eta', type=float, help="constant SGD step size (default: 1 / (6 gamma))")
    conc.add_argument('--seed', type=int, default=0)
    conc.add_argument('--out', help="directory for tail_report.json and tail_report.csv")

    losses = commands.add_parser('losses', help="print the constants of every shipped loss")
    losses.add_argument('--radius', type=float, default=1.0, help="ball radius R")

    validate = commands.add_parser('validate-config', help="check a configuration file and exit")
    validate.add_argument('config')
    return parser


def _configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def _format(value):
    return '-' if value is None else '{:.6g}'.format(value)


def _bench(args, out):
    config = load_config(args.config, {'trials': args.trials, 'seed': args.seed, 'out': args.out})
    summary = run_bench(config)
    out.write('strategy\tbudget\tmedian\tq90\tq_conf\tfitted_constant\tfailures\n')
    for row in summary.rows:
        out.write('{}\t{}\t{}\t{}\t{}\t{}\t{}\n'.format(row.strategy, row.budget, _format(row.median),
                                                        _format(row.q90), _format(row.q_conf),
                                                        _format(row.fitted_constant), row.failures))
    for strategy, slope in summary.slopes.items():
        out.write('slope {}\t{}\n'.format(strategy, _format(slope)))
    if summary.failures:
        logger.error("%d trials failed", summary.failures)
        return EXIT_NUMERIC
    return EXIT_OK


def _run(args, out):
    config = load_config(args.config, {'seed': args.seed, 'out': args.out})
    _, doc = run_single(config)
    json.dump(doc, out, indent=2, sort_keys=True)
    out.write('\n')
    return EXIT_OK


def _concentration(args, out):
    config = None
    if args.kind != 'coin':
        if not args.config:
            raise ConfigError('--config is required for --kind {}'.format(args.kind), path='config')
        config = load_config(args.config, {'seed': args.seed})
    if args.trials < 1 or args.length < 1:
        raise ConfigError('--trials and --length must be positive')
    report = run_concentration(args.kind, args.t_values, args.trials, args.seed, args.length,
                               config=config, eta=args.eta)
    out.write('t\tthreshold\tempirical\ttheoretical\ttrials\n')
    for t, threshold, empirical, theoretical, trials in report.rows():
        out.write('{}\t{}\t{}\t{}\t{}\n'.format(_format(t), _format(threshold), _format(empirical),
                                                _format(theoretical), trials))
    out.write('within bound: {}\n'.format('yes' if report.within_bound() else 'no'))
    if args.out:
        write_tail_report(report, args.out, args.kind)
    return EXIT_OK


def _losses(args, out):
    domain = BallDomain(args.radius, 1)
    interval = ReachableInterval.for_ball(domain.radius)
    out.write('name\tgamma\tL\tphi(0)\tC\n')
    for name, loss in LOSSES.items():
        L = loss.lipschitz_on(interval)
        out.write('{}\t{}\t{}\t{}\t{}\n'.format(name, _format(loss.gamma), _format(L), _format(loss.value_at_zero),
                                                _format(L * domain.radius + loss.value_at_zero)))
    return EXIT_OK


def _validate(args, out):
    load_config(args.config)
    out.write('{}: ok\n'.format(args.config))
    return EXIT_OK


COMMANDS = {
    'bench': _bench,
    'run': _run,
    'concentration': _concentration,
    'losses': _losses,
    'validate-config': _validate,
}


def cli_main(argv=None, out=None):
    """Runs one subcommand and returns its exit code."""
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    _configure_logging(args)
    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, DomainError) as e:
        sys.stderr.write('error: {}\n'.format(e))
        return EXIT_USAGE
    except Error as e:
        logger.error("%s", e)
        return EXIT_NUMERIC


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == '__main__':
    main()
