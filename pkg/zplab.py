#!/usr/bin/env python3
"""
zplab command line
Evaluates F(s), prints its degrees and Dirichlet data, counts and locates its
zeros, and verifies the zero theorems. Reports go to standard output (or
--output) as JSON or CSV; progress goes to standard error.

Exit codes: 0 success or pass, 1 a verdict failed, 2 input error, 3 numerical failure.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from settings import get_setting, get_settings, merge_settings, read_json_file, use_settings, load_settings
from zplab_errors import ConfigError, ExpressionSyntaxError, InputError, ZplabError

logger = logging.getLogger('zplab')

GRAMMAR = """expression grammar:
  expression := term (('+'|'-') term)*
  term       := coeff? ('*'? factor)*
  factor     := 'z' INT ('^' INT)?        zl stands for the l-th derivative of zeta, l <= 20
  coeff      := decimal | '(' re ',' im ')'
  example: "z1^2 + z0^3", "(1,-2)*z0*z1 - 0.5*z2"
"""

CSV_SCHEMAS = {
    'coeffs': "CSV columns: n, eta_re, eta_im",
    'logderiv': "CSV columns: d (as p/q), alpha_re, alpha_im",
    'zeros': "CSV columns: beta, gamma, multiplicity, residual",
}

# Keys a --config file may carry besides settings sections
RUN_KEYS = ('expression', 's', 'derivative', 'T', 'U', 'x', 'delta', 'epsilon', 'n', 'N', 'X',
            'alpha', 'm_max', 'theorem', 'output', 'format', 'threads', 'c_tol', 'rect', 'timing')


@dataclass
class RunConfig:
    command: str
    expression: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    output_path: Optional[str] = None
    format: str = 'json'
    threads: Optional[int] = None
    dry_run: bool = False
    timing: bool = False

    def get(self, key, default=None):
        value = self.params.get(key)
        return default if value is None else value


# =============================================================================
# ARGUMENT PARSING
# =============================================================================

def parse_complex(text):
    """a+bj, a+bi or a pair re,im"""
    text = text.replace(' ', '').replace('i', 'j')
    try:
        if ',' in text:
            re_part, im_part = text.split(',')
            return complex(float(re_part), float(im_part))
        return complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def parse_fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def parse_rect(text):
    try:
        values = [float(v) for v in text.split(',')]
    except ValueError:
        values = []
    if len(values) != 4:
        raise argparse.ArgumentTypeError("rectangle must be 'sigma_lo,sigma_hi,t_lo,t_hi'")
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--expr', dest='expression', help="F as a polynomial in z0..z20")
    common.add_argument('--config', help="JSON file mirroring the flags (flags win) plus settings sections")
    common.add_argument('--output', help="Write the report here instead of standard output")
    common.add_argument('--format', choices=['json', 'csv'], help="Report format (default json)")
    common.add_argument('--threads', type=int, help="Worker threads for zero finding (env ZPLAB_THREADS)")
    common.add_argument('--dry-run', action='store_true', help="Validate and print the plan without evaluating zeta")
    common.add_argument('--timing', action='store_true', help="Include runtime_ms in theorem reports")
    common.add_argument('-v', '--verbose', action='store_true', help="Debug logging on standard error")

    parser = argparse.ArgumentParser(
        prog='zplab',
        description="Zeros of polynomials in the Riemann zeta function and its derivatives.",
        epilog=GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text,
                              epilog=GRAMMAR + ('\n' + CSV_SCHEMAS[name] if name in CSV_SCHEMAS else ''),
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add('eval', "Evaluate F(s) or F'(s)")
    p.add_argument('--s', type=parse_complex,
                   help="Point s as 0.5+14.1j or re,im; write --s=-4+0.5j when Re s is negative")
    p.add_argument('--derivative', action='store_true', default=None, help="Evaluate F' instead of F")

    p = add('coeffs', "Dirichlet coefficients eta_n and n_F")
    p.add_argument('--N', type=int, help="Number of coefficients (default dirichlet.defaultTerms)")

    p = add('logderiv', "Lattice coefficients alpha(d) of F'/F")
    p.add_argument('--X', type=float, help="Frequency bound X <= 1000 (default 100)")
    p.add_argument('--x', type=parse_fraction, help="Also report alpha(x), x exact such as 3/2")

    add('degrees', "deg1, deg2, J and the condition sum_J c_j != 0")

    p = add('zeros', "Locate zeros in [E1F, E2F] x [1, T] or in --rect")
    p.add_argument('--T', type=float, help="Height T")
    p.add_argument('--rect', type=parse_rect, help="sigma_lo,sigma_hi,t_lo,t_hi")

    p = add('count', "Count zeros up to height T against the predicted count")
    p.add_argument('--T', type=float)
    p.add_argument('--c-tol', type=float, dest='c_tol')

    p = add('cluster', "Zeros of F in the disk |s + 2n| < epsilon")
    p.add_argument('--n', type=int)
    p.add_argument('--epsilon', type=float)

    p = add('zerofree', "Zero-free abscissae E2F (certified) and E1F (empirical scan)")
    p.add_argument('--epsilon', type=float)

    p = add('verify', "Verify a theorem: T1..T6, C7 or all")
    p.add_argument('--theorem', help="T1, T2, T3, T4, T5, T6, C7 or all")
    p.add_argument('--T', type=float)
    p.add_argument('--U', type=float)
    p.add_argument('--x', type=parse_fraction)
    p.add_argument('--delta', type=float)
    p.add_argument('--epsilon', type=float)
    p.add_argument('--n', type=int, nargs='+', help="Cluster indices n for T2")
    p.add_argument('--alpha', type=float)
    p.add_argument('--m-max', type=int, dest='m_max')
    p.add_argument('--c-tol', type=float, dest='c_tol')

    p = add('powersum', "Power sum of x^rho against alpha(x) T / 2 pi")
    p.add_argument('--x', type=parse_fraction)
    p.add_argument('--T', type=float)
    p.add_argument('--c-tol', type=float, dest='c_tol')

    p = add('equidist', "Weyl sums and star discrepancy of alpha * gamma mod 1")
    p.add_argument('--T', type=float)
    p.add_argument('--alpha', type=float)
    p.add_argument('--m-max', type=int, dest='m_max')
    return parser


def _file_run_values(data):
    values = {}
    for key in RUN_KEYS:
        if key in data and not isinstance(data[key], dict):
            values[key] = data[key]
    try:
        if values.get('x') is not None:
            values['x'] = parse_fraction(str(values['x']))
        if isinstance(values.get('s'), str):
            values['s'] = parse_complex(values['s'])
        elif isinstance(values.get('s'), list):
            values['s'] = complex(*values['s'])
    except (argparse.ArgumentTypeError, TypeError) as e:
        raise ConfigError(f"invalid value in config file: {e}")
    return values


def build_run_config(args):
    """Flags override the --config file; settings sections of the file are merged into the settings"""
    use_settings(load_settings())
    values = {}
    if args.config:
        data = read_json_file(args.config)
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config} must hold a JSON object")
        sections = {k: v for k, v in data.items() if k in get_settings() and isinstance(v, dict)}
        if sections:
            merge_settings(sections)
        values.update(_file_run_values(data))

    for key, value in vars(args).items():
        if key in ('command', 'config', 'verbose', 'dry_run') or value is None:
            continue
        if key == 'timing' and not value:
            continue
        values[key] = value

    threads = values.pop('threads', None)
    if threads is not None:
        if int(threads) < 1:
            raise ConfigError(f"threads must be at least 1, got {threads}")
        merge_settings({'threads': int(threads)})

    return RunConfig(
        command=args.command,
        expression=values.pop('expression', None),
        output_path=values.pop('output', None),
        format=values.pop('format', None) or get_setting('output.format'),
        threads=get_setting('threads'),
        dry_run=bool(args.dry_run),
        timing=bool(values.pop('timing', False)),
        params=values,
    )


# =============================================================================
# OUTPUT
# =============================================================================

def _round_floats(obj, digits):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def _complex_json(value):
    """[re, im]; parts beyond the double range are kept as decimal strings"""
    parts = []
    for part in (np.real(value), np.imag(value)):
        as_float = float(part)
        if math.isfinite(as_float) or not np.isfinite(part):
            parts.append(as_float)
        else:
            parts.append(np.format_float_scientific(part, precision=14))
    return parts


def emit(cfg, payload, frame=None):
    """Write a JSON payload, or a CSV frame when --format csv"""
    if cfg.format == 'csv':
        if frame is None:
            frame = pd.json_normalize(payload if isinstance(payload, list) else [payload])
        text = frame.to_csv(index=False, float_format='%.15g')
    else:
        digits = get_setting('output.significantDigits')
        text = json.dumps(_round_floats(payload, digits), indent=2) + '\n'
    if cfg.output_path:
        with open(cfg.output_path, 'w') as f:
            f.write(text)
        logger.info("✓ report written to %s", cfg.output_path)
    else:
        sys.stdout.write(text)


def _report_payload(cfg, reports):
    dicts = []
    for report in reports:
        d = report.to_dict()
        if not cfg.timing:
            d['runtime_ms'] = None
        dicts.append(d)
    return dicts


def _verdict_exit(reports):
    return 1 if any(r.verdict == 'fail' for r in reports) else 0


# =============================================================================
# VALIDATION AND PLAN
# =============================================================================

def _require(cfg, key, message=None):
    value = cfg.params.get(key)
    if value is None:
        raise InputError(message or f"--{key.replace('_', '-')} is required for '{cfg.command}'")
    return value


def validate(cfg):
    """Check every parameter before any zeta evaluation; returns the parsed expression"""
    from poly_expr import parse_expression

    if not cfg.expression:
        raise InputError("--expr is required (or 'expression' in --config)")
    expr = parse_expression(cfg.expression)

    T = cfg.params.get('T')
    if T is not None and not 10 <= float(T) <= get_setting('engine.maxHeight'):
        raise InputError(f"T must lie in [10, {get_setting('engine.maxHeight')}], got {T}")
    U = cfg.params.get('U')
    if U is not None and U <= 0:
        raise InputError(f"U must be positive, got {U}")
    epsilon = cfg.params.get('epsilon')
    if epsilon is not None and not 0 < epsilon < 1:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    delta = cfg.params.get('delta')
    if delta is not None and delta <= 0:
        raise InputError(f"delta must be positive, got {delta}")
    x = cfg.params.get('x')
    if x is not None and Fraction(x) <= 1:
        raise InputError(f"x must exceed 1, got {x}")
    alpha = cfg.params.get('alpha')
    if alpha is not None and alpha == 0:
        raise InputError("alpha must be non-zero")

    if cfg.command == 'eval':
        _require(cfg, 's')
    elif cfg.command in ('count', 'powersum', 'equidist'):
        _require(cfg, 'T')
        if cfg.command == 'powersum':
            _require(cfg, 'x')
    elif cfg.command == 'zeros' and cfg.params.get('rect') is None:
        _require(cfg, 'T', "--T or --rect is required for 'zeros'")
    elif cfg.command == 'cluster':
        if int(_require(cfg, 'n')) < 1:
            raise InputError("n must be at least 1")
    elif cfg.command == 'verify':
        theorem = str(_require(cfg, 'theorem')).upper()
        from theorems import THEOREM_IDS, require_condition
        if theorem not in THEOREM_IDS + ('ALL',):
            raise InputError(f"unknown theorem {theorem!r}; expected one of {', '.join(THEOREM_IDS)} or all")
        if theorem != 'T2':
            _require(cfg, 'T')
        require_condition(expr)
    return expr


def plan(cfg, expr):
    from poly_expr import format_expression
    return {
        'success': True,
        'dry_run': True,
        'command': cfg.command,
        'expression': format_expression(expr),
        'parameters': {k: (str(v) if isinstance(v, (Fraction, complex)) else v) for k, v in cfg.params.items()},
        'format': cfg.format,
        'threads': cfg.threads,
        'output': cfg.output_path,
    }


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_eval(cfg, expr):
    from zeta_engine import evaluate_F_derivative, evaluate_F_with_error

    s = complex(cfg.params['s'])
    if cfg.get('derivative', False):
        value, error = evaluate_F_derivative(expr, s), None
    else:
        value, error = evaluate_F_with_error(expr, s)
    emit(cfg, {'s': [s.real, s.imag], 'derivative': bool(cfg.get('derivative', False)),
               'value': _complex_json(value), 'error_bound': None if error is None else float(error)})
    return 0


def cmd_coeffs(cfg, expr):
    from dirichlet import coefficients, coefficients_frame, find_coefficients

    N = cfg.get('N')
    coeffs = coefficients(expr, int(N)) if N else find_coefficients(expr)
    payload = {'N': coeffs.N, 'n_F': coeffs.n_F, 'eta_nF': [coeffs.leading.real, coeffs.leading.imag],
               'eta': [[v.real, v.imag] for v in coeffs.eta.tolist()]}
    emit(cfg, payload, coefficients_frame(coeffs))
    return 0


def cmd_logderiv(cfg, expr):
    from dirichlet import alpha_at, lattice_frame, log_derivative_coefficients

    X = float(cfg.get('X', 100.0))
    x = cfg.get('x')
    if x is not None and Fraction(x) > Fraction(X):
        X = float(math.ceil(Fraction(x)))
    series = log_derivative_coefficients(expr, X)
    payload = {'X': series.X, 'n_F': series.n_F, 'depth': series.depth,
               'discarded_mass': series.discarded_mass,
               'alpha': {f"{d.numerator}/{d.denominator}": [a.real, a.imag] for d, a in series.sorted_items()}}
    if x is not None:
        a = alpha_at(series, x)
        payload['x'] = str(Fraction(x))
        payload['alpha_x'] = [a.real, a.imag]
    emit(cfg, payload, lattice_frame(series))
    return 0


def cmd_degrees(cfg, expr):
    from poly_expr import degrees, format_expression

    payload = degrees(expr).to_dict()
    payload['expression'] = format_expression(expr)
    emit(cfg, payload)
    return 0


def cmd_zeros(cfg, expr):
    from theorems import theorem_region
    from zero_finder import Rectangle, locate_and_count, zero_summary, zeros_frame

    rect = Rectangle(*cfg.params['rect']) if cfg.get('rect') else theorem_region(expr, 1.0, float(cfg.params['T']))
    zeros, count = locate_and_count(expr, rect, threads=cfg.threads)
    summary = zero_summary(zeros, count.rectangle, count.count)
    emit(cfg, {'summary': summary, 'zeros': [z.to_dict() for z in zeros]}, zeros_frame(zeros))
    if not summary['count_agrees']:
        logger.warning("✗ located %d zeros but the winding count is %d", summary['zero_count'], count.count)
    return 0


def cmd_count(cfg, expr):
    from theorems import verify_count

    report = verify_count(expr, float(cfg.params['T']), cfg.get('c_tol'), cfg.threads)
    emit(cfg, _report_payload(cfg, [report])[0])
    return _verdict_exit([report])


def cmd_cluster(cfg, expr):
    from poly_expr import degrees
    from zero_finder import trivial_cluster_count

    n = int(cfg.params['n'])
    epsilon = float(cfg.get('epsilon', get_setting('theorems.clusterEpsilon')))
    count = trivial_cluster_count(expr, n, epsilon)
    emit(cfg, {'n': n, 'epsilon': epsilon, 'count': count, 'deg1': degrees(expr).deg1})
    return 0


def cmd_zerofree(cfg, expr):
    from dirichlet import zero_free_bounds

    epsilon = float(cfg.get('epsilon', get_setting('theorems.clusterEpsilon')))
    emit(cfg, zero_free_bounds(expr, epsilon).to_dict())
    return 0


def cmd_verify(cfg, expr):
    from theorems import run_theorem

    params = dict(cfg.params)
    params['threads'] = cfg.threads
    if params.get('n') is not None:
        params['n_values'] = params.pop('n')
    reports = run_theorem(expr, str(cfg.params['theorem']), params)
    payload = _report_payload(cfg, reports)
    emit(cfg, payload[0] if len(payload) == 1 else {'reports': payload})
    return _verdict_exit(reports)


def cmd_powersum(cfg, expr):
    from theorems import verify_power_sum

    report = verify_power_sum(expr, cfg.params['x'], float(cfg.params['T']), cfg.get('c_tol'), cfg.threads)
    emit(cfg, _report_payload(cfg, [report])[0])
    return _verdict_exit([report])


def cmd_equidist(cfg, expr):
    from theorems import verify_equidistribution

    report = verify_equidistribution(expr, float(cfg.params['T']), cfg.get('alpha'), cfg.get('m_max'), cfg.threads)
    emit(cfg, _report_payload(cfg, [report])[0])
    return _verdict_exit([report])


HANDLERS = {
    'eval': cmd_eval,
    'coeffs': cmd_coeffs,
    'logderiv': cmd_logderiv,
    'degrees': cmd_degrees,
    'zeros': cmd_zeros,
    'count': cmd_count,
    'cluster': cmd_cluster,
    'zerofree': cmd_zerofree,
    'verify': cmd_verify,
    'powersum': cmd_powersum,
    'equidist': cmd_equidist,
}


def _setup_logging(verbose):
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(message)s',
        force=True,
    )


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        cfg = build_run_config(args)
        expr = validate(cfg)
        if cfg.dry_run:
            emit(cfg, plan(cfg, expr))
            return 0
        return HANDLERS[cfg.command](cfg, expr)
    except ZplabError as e:
        logger.error("✗ %s", e)
        payload = e.to_dict()
        if isinstance(e, ExpressionSyntaxError):
            payload['grammar'] = GRAMMAR
        sys.stdout.write(json.dumps(payload) + '\n')
        return e.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    try:
        return run(argv)
    except SystemExit as e:
        # argparse usage errors exit with 2
        return e.code if isinstance(e.code, int) else 2


if __name__ == '__main__':
    sys.exit(main())
