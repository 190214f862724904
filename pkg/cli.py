# Main regretbench script
# subcommands: cycles, lp, pde, value, simulate, sweep
import argparse
import json
import logging
import sys

from regretbench.api import RegretBenchAPI
from regretbench.config import load_run_config, logger
from regretbench.errors import RegretBenchError

# argparse dest -> run-config key
OVERRIDES = {
    'd': 'd', 'experts': 'experts', 'epsilon': 'epsilon',
    'epsilons': 'epsilons', 'final': 'final', 'C': 'C', 'T': 'T', 't0': 't0',
    'side': 'side', 'closed_form': 'closed_form', 'general': 'general',
    'investor': 'investor', 'market': 'market', 'markets': 'markets',
    'mode': 'mode', 'seed': 'seed', 'threads': 'threads',
}


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(
        description='Regret workbench for two history-dependent experts')
    parser.add_argument(
        '-v',
        '--verbose',
        action='store_true',
        help='Print debug messages')
    parser.add_argument(
        '--config',
        help='Path of a JSON run configuration')
    parser.add_argument(
        '--out',
        help='Directory receiving CSV/JSON outputs and manifest.json; '
             'without it results are printed as JSON')
    parser.add_argument('--seed', type=int, help='Base random seed')
    parser.add_argument('--threads', type=int, help='Worker threads')

    subparsers = parser.add_subparsers(dest='subcommand', help='Subcommands')
    subparsers.required = True

    parser_cycles = subparsers.add_parser(
        'cycles',
        help='List the simple cycles of the de Bruijn graph of depth d')
    parser_cycles.add_argument('--d', type=int, required=True,
                               help='History depth')

    parser_lp = subparsers.add_parser(
        'lp',
        help="Solve the investor's and/or the market's cycle LP")
    parser_lp.add_argument('--experts', help='Expert pair JSON file')
    parser_lp.add_argument('--side', choices=['investor', 'market', 'both'])
    parser_lp.add_argument(
        '--closed-form',
        dest='closed_form',
        action='store_true',
        default=None,
        help='Use the closed-form indifference solution (d <= 4)')

    parser_pde = subparsers.add_parser(
        'pde',
        help='Solve the limiting PDE and probe u and its derivatives')
    final_pde = parser_pde.add_mutually_exclusive_group()
    final_pde.add_argument('--classic', dest='final', action='store_const',
                           const='classic',
                           help='Classic data max(x1, x2)')
    final_pde.add_argument('--final',
                           help='Final data family name or JSON file')
    parser_pde.add_argument('--C', type=float, help='Diffusion constant')
    parser_pde.add_argument('--T', help='Final time')
    parser_pde.add_argument('--t', type=float, help='Probe time')
    parser_pde.add_argument('--probe', nargs=2, type=float,
                            metavar=('XI', 'ETA'), default=(0.0, 0.0),
                            help='Probe point')

    parser_value = subparsers.add_parser(
        'value',
        help='Exact value of the scaled game by backward induction')
    parser_value.add_argument('--experts', help='Expert pair JSON file')
    parser_value.add_argument('--eps', dest='epsilon',
                              help='Step size as a fraction, e.g. 1/16')
    steps = parser_value.add_mutually_exclusive_group()
    steps.add_argument('--N', type=int, help='Number of steps to play')
    steps.add_argument('--t0', help='Start time')
    parser_value.add_argument('--final',
                              help='Final data family name or JSON file')
    parser_value.add_argument(
        '--general',
        action='store_true',
        default=None,
        help='Use the (xi, eta) grid sweep even for separable data')

    parser_simulate = subparsers.add_parser(
        'simulate',
        help='Play investor and market policies against each other')
    parser_simulate.add_argument('--experts', help='Expert pair JSON file')
    parser_simulate.add_argument('--eps', dest='epsilon',
                                 help='Step size as a fraction')
    parser_simulate.add_argument('--investor',
                                 choices=['pde', 'fixed', 'perturbed'])
    parser_simulate.add_argument('--market',
                                 choices=['forcing', 'random', 'exhaustive'])
    parser_simulate.add_argument('--markets', type=int,
                                 help='Number of games (one seed each)')
    parser_simulate.add_argument('--final',
                                 help='Final data family name or JSON file')

    parser_sweep = subparsers.add_parser(
        'sweep',
        help='Error against the PDE value for a list of eps')
    source = parser_sweep.add_mutually_exclusive_group()
    source.add_argument('--experts', help='Expert pair JSON file')
    source.add_argument('--d', type=int,
                        help='Draw a random expert pair of this depth')
    final_sweep = parser_sweep.add_mutually_exclusive_group()
    final_sweep.add_argument('--classic', dest='final', action='store_const',
                             const='classic')
    final_sweep.add_argument('--final',
                             help='Final data family name or JSON file')
    parser_sweep.add_argument('--eps', dest='epsilons',
                              help='Comma separated fractions, e.g. '
                                   '1/16,1/32,1/64')
    parser_sweep.add_argument('--mode', choices=['value', 'simulate'])
    parser_sweep.add_argument('--investor',
                              choices=['pde', 'fixed', 'perturbed'])
    parser_sweep.add_argument('--market', choices=['forcing', 'random'])

    return parser.parse_args(argv)


def overrides_from(args):
    values = vars(args)
    return {key: values.get(dest) for dest, key in OVERRIDES.items()
            if dest in values}


def run(args):
    cfg = load_run_config(args.config, overrides_from(args))
    api = RegretBenchAPI(cfg, args.out, args.subcommand)
    if args.subcommand == 'cycles':
        result = api.cycles(cfg['d'])
    elif args.subcommand == 'lp':
        result = api.lp(cfg['side'], cfg['closed_form'])
    elif args.subcommand == 'pde':
        result = api.pde(cfg['C'], cfg['T'], args.probe, args.t)
    elif args.subcommand == 'value':
        result = api.value(args.N, cfg['general'])
    elif args.subcommand == 'simulate':
        result = api.simulate()
    elif args.subcommand == 'sweep':
        result = api.sweep()
    api.write_manifest()
    if not args.out:
        print(json.dumps(result, indent=2, sort_keys=True))
    return result


def main(argv=None):
    args = parse_arguments(argv)
    if args.verbose:
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.INFO)
    logger.info(f"Starting regretbench {args.subcommand}")
    try:
        return run(args)
    except RegretBenchError as err:
        logger.error(f"{args.subcommand} failed (config: {args.config}): "
                     f"{err}")
        sys.exit(err.exit_code)


if __name__ == '__main__':
    main()
