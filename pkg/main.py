#!/usr/bin/env python3
"""
toric-radii - Main Application
Symplectic inner and outer radii of lp-sums, ECH capacities and ball packings
"""

import argparse
import json
import sys
import os
from colorama import init, Fore, Style

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from src.utils.config import load_config, setup_logging, validate_config
from src.models.domain_models import Outcome, parse_p
from src.services.report_service import ReportService, parse_scalar
from src.services.verification_service import SUITES, VerificationService

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

OUTCOME_COLOURS = {
    Outcome.EMBEDDABLE: Fore.GREEN,
    Outcome.NOT_EMBEDDABLE: Fore.RED,
    Outcome.INCONCLUSIVE: Fore.YELLOW,
}


def _ball_list(text: str):
    try:
        return [parse_scalar(token) for token in text.split(',')]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid ball list: {text!r}")


def _scalar(text: str):
    try:
        return parse_scalar(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid number: {text!r}")


def _samples(text: str) -> int:
    value = int(text)
    if value < 3:
        raise argparse.ArgumentTypeError("--samples must be at least 3")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='toric-radii')
    parser.add_argument('--config', type=str, default=None,
                        help='Path to a dotenv-style configuration file')
    parser.add_argument('--log-level', type=str, default=None,
                        help='Logging level (overrides LOG_LEVEL)')
    commands = parser.add_subparsers(dest='command', required=True)

    radii = commands.add_parser('radii', help='Inner/outer radii table')
    radii.add_argument('p', type=parse_p, nargs='+', help='Exponents (decimals, 9/2 or inf)')
    radii.add_argument('--domain', choices=['lagrangian', 'symplectic'], default='lagrangian')
    radii.add_argument('--format', choices=['table', 'json', 'csv'], default='table')
    radii.add_argument('--output', type=str, default=None, help='Write to a file')

    curve = commands.add_parser('curve', help='Boundary samples of the moment region')
    curve.add_argument('p', type=parse_p)
    curve.add_argument('--samples', type=_samples, default=None)
    curve.add_argument('--domain', choices=['lagrangian', 'symplectic'], default='lagrangian')
    curve.add_argument('--format', choices=['json', 'csv'], default='json')
    curve.add_argument('--output', type=str, default=None, help='Write to a file')

    pack = commands.add_parser('pack', help='Ball-packing decision by Cremona moves')
    target = pack.add_mutually_exclusive_group(required=True)
    target.add_argument('--c', type=_scalar, help='Size of the target ball')
    target.add_argument('--preset', nargs=3, metavar=('NAME', 'A', 'B'),
                        help='b1-ellipsoid A B: B_1 into E(A, B)')
    pack.add_argument('--balls', type=_ball_list, help='Comma-separated ball sizes')
    pack.add_argument('--trace', action='store_true', help='Print each Cremona step')
    pack.add_argument('--max-moves', type=int, default=None)

    verify = commands.add_parser('verify', help='Run the acceptance suites')
    verify.add_argument('--suite', choices=list(SUITES) + ['all'], default='all')
    verify.add_argument('--output', type=str, default=None, help='Write the JSON report')

    return parser


def _emit(text: str, output) -> int:
    try:
        ReportService.export(text, output)
    except OSError as e:
        print(f"{Fore.RED}Cannot write {output}: {e}{Style.RESET_ALL}", file=sys.stderr)
        return EXIT_USAGE
    if output:
        print(f"{Fore.GREEN}Wrote {output}{Style.RESET_ALL}")
    return EXIT_OK


def cmd_radii(report: ReportService, args) -> int:
    result = report.radii(args.p, args.domain)
    if not result['success']:
        print(f"{Fore.RED}Radii failed: {result['error']}{Style.RESET_ALL}", file=sys.stderr)
        return EXIT_USAGE
    rows = result['rows']
    if args.format != 'table':
        return _emit(report.render(rows, args.format), args.output)

    print(f"\n{Fore.GREEN}{args.domain.capitalize()} lp-sum radii:{Style.RESET_ALL}")
    print(f"{'p':>8} {'r_inner':>16} {'r_outer':>16} {'c1':>16} {'c2':>16}  regime (inner/outer)")
    for row in rows:
        print(f"{str(row['p']):>8} {row['r_inner']:>16.12g} {row['r_outer']:>16.12g} "
              f"{row['c1']:>16.12g} {row['c2']:>16.12g}  "
              f"{Fore.BLUE}{row['inner_regime']}/{row['regime']}{Style.RESET_ALL}")
    return EXIT_OK


def cmd_curve(report: ReportService, args) -> int:
    samples = args.samples or report.config['CURVE_SAMPLES']
    result = report.curve(args.p, samples, args.domain)
    if not result['success']:
        print(f"{Fore.RED}Curve failed: {result['error']}{Style.RESET_ALL}", file=sys.stderr)
        return EXIT_USAGE
    return _emit(report.render(result['curve'], args.format), args.output)


def cmd_pack(report: ReportService, args) -> int:
    if args.preset:
        name, a, b = args.preset
        if name != 'b1-ellipsoid':
            print(f"{Fore.RED}Unknown preset {name!r}{Style.RESET_ALL}", file=sys.stderr)
            return EXIT_USAGE
        try:
            a, b = parse_scalar(a), parse_scalar(b)
        except (ValueError, ZeroDivisionError):
            print(f"{Fore.RED}Malformed ellipsoid axes{Style.RESET_ALL}", file=sys.stderr)
            return EXIT_USAGE
        result = report.pack_preset(a, b)
    else:
        if not args.balls:
            print(f"{Fore.RED}--c needs --balls{Style.RESET_ALL}", file=sys.stderr)
            return EXIT_USAGE
        result = report.pack(args.c, args.balls, args.max_moves)

    if not result['success']:
        print(f"{Fore.RED}Packing failed: {result['error']}{Style.RESET_ALL}", file=sys.stderr)
        return EXIT_USAGE

    verdict = result['verdict']
    if args.trace:
        for step, vector in enumerate(verdict.trace):
            print(f"  {step:>4}: {vector}")
    colour = OUTCOME_COLOURS[verdict.outcome]
    print(f"{colour}{verdict.outcome.value}{Style.RESET_ALL}: {verdict.reason}")
    return verdict.outcome.exit_code


def cmd_verify(report: ReportService, args) -> int:
    result = VerificationService(report).run(args.suite)
    if not result['success']:
        print(f"{Fore.RED}Verification failed: {result['error']}{Style.RESET_ALL}", file=sys.stderr)
        return EXIT_USAGE

    for check in result['checks']:
        mark = f"{Fore.GREEN}PASS" if check['passed'] else f"{Fore.RED}FAIL"
        print(f"{mark}{Style.RESET_ALL} [{check['suite']}] {check['check']} "
              f"(deviation {check['deviation']:.3g}, tolerance {check['tolerance']:.3g})")
    if args.output:
        status = _emit(json.dumps(result['checks'], indent=2), args.output)
        if status != EXIT_OK:
            return status
    return EXIT_OK if result['passed'] else EXIT_FAILED


COMMANDS = {
    'radii': cmd_radii,
    'curve': cmd_curve,
    'pack': cmd_pack,
    'verify': cmd_verify,
}


def main(argv=None):
    """Main application entry point"""
    init(autoreset=True)  # Initialize colorama

    parser = build_parser()
    args = parser.parse_args(argv)

    # Load configuration
    if args.config and not os.path.isfile(args.config):
        print(f"{Fore.RED}Config file not found: {args.config}{Style.RESET_ALL}", file=sys.stderr)
        sys.exit(EXIT_USAGE)
    config = load_config(args.config)
    if args.log_level:
        config['LOG_LEVEL'] = args.log_level

    # Validate configuration
    if not validate_config(config):
        sys.exit(EXIT_USAGE)

    # Setup logging
    setup_logging(config['LOG_LEVEL'], config['LOG_FILE'])

    report = ReportService(config)

    try:
        sys.exit(COMMANDS[args.command](report, args))
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Operation cancelled by user{Style.RESET_ALL}")
        sys.exit(EXIT_FAILED)
    except Exception as e:
        print(f"{Fore.RED}Unexpected error: {e}{Style.RESET_ALL}", file=sys.stderr)
        sys.exit(EXIT_FAILED)


if __name__ == '__main__':
    main()
