"""
Command-line surface for the GSS streaming-code toolkit.

Sub-commands: rates, construct, verify, oracle, simulate, encode, decode.
Tables go out as CSV or JSON; JSON reports are validated against
schemas/run_report.schema.json before they are written.

Exit codes: 0 success/PASS, 1 FAIL or MISMATCH, 2 usage error, 3 budget exceeded.
"""

import argparse
import json
import logging
import os
import platform
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from typing import Dict, List, Any, Optional, Tuple

import jsonschema
import numpy as np
import pandas as pd

from channel_params import (
    TABLE_ONE, ChannelParams, Regime, classify_regime, iter_params, max_gsde_rate,
    rate_gain, rate_summary, rate_to_str, render_rate, table_one,
)
from dispersion_engine import (
    DispersionVector, best_dispersion, brute_force_max_rate, construction1,
    effective_resilience, embedding_kind, field_size_bound, is_dispersion_vector,
    closed_form_prediction,
)
from erasure_channel import ErasurePattern, GeConfig, ge_sample
from galois_mds import FieldSpec, table_field_size
from gss_config import active_config
from gss_errors import BudgetExceededError, GSSError
from run_metrics import EventType, RunMetrics, create_run_metrics
from stream_framing import FramedStream, pack_stream, unpack_stream
from streaming_codec import (
    DecodeStatus, StreamingCode, create_streaming_code, encode_stream, random_messages,
    receive_stream, verify_exhaustive,
)

logger = logging.getLogger(__name__)

TOOLKIT_VERSION = '1.0.0'
SCHEMA_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'schemas', 'run_report.schema.json')

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass
class RunReport:
    """Self-describing result of one command invocation."""
    command: str
    params: Optional[Dict[str, int]]
    inputs: Dict[str, Any]
    results: Dict[str, Any]
    exit_code: int = EXIT_OK
    metadata: Dict[str, Any] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)
    wall_time_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'params': self.params,
            'inputs': self.inputs,
            'results': self.results,
            'exit_code': self.exit_code,
            'metadata': self.metadata,
            'metrics': self.metrics,
            'wall_time_s': round(self.wall_time_s, 6),
        }


def toolchain_metadata() -> Dict[str, Any]:
    versions = {}
    for package in ('numpy', 'pandas', 'galois', 'jsonschema'):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = 'unknown'
    return {
        'toolkit_version': TOOLKIT_VERSION,
        'python': platform.python_version(),
        'packages': versions,
        'config': active_config.get_run_metadata(),
    }


def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, 'r', encoding='utf-8') as handle:
        return json.load(handle)


def validate_report(report: Dict[str, Any]):
    """Raise jsonschema.ValidationError if the report breaks the published schema."""
    jsonschema.validate(instance=report, schema=load_schema())


# Row builders (pure; shared by the commands and the tests)

def rate_row(params: ChannelParams, field_order: int, published: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    summary = rate_summary(params)
    vec, report = best_dispersion(params)
    row = {key: summary[key] for key in ('a', 'b', 'tau', 'm', 'delta', 'regime')}
    for name in ('r_opt', 'r_ss', 'r_gss'):
        row[name] = rate_to_str(summary[name])
        row[f'{name}_dec'] = render_rate(summary[name])
    row.update({
        'gain': rate_to_str(rate_gain(params)),
        'n': report.n,
        'r': report.r,
        'dispersion': vec.to_text(),
        'q_table': table_field_size(report.n),
        'q_bound': field_size_bound(params),
        'q_used': field_order,
    })
    if published is not None:
        row.update({f'published_{key}': value for key, value in published.items() if key != 'params'})
    return row


def construct_result(params: ChannelParams, vector: Optional[DispersionVector] = None) -> Dict[str, Any]:
    if vector is None:
        vec, report = best_dispersion(params)
        source = 'construction2' if classify_regime(params) is Regime.GSDE_GAIN else 'construction1'
        predicted = closed_form_prediction(params)
    else:
        vec, report = vector, effective_resilience(vector, params)
        source = 'user'
        predicted = None

    check = is_dispersion_vector(vec, params, report.r)
    return {
        'vector': vec.to_text(),
        'entries': list(vec.entries),
        'source': source,
        'regime': classify_regime(params).value,
        'embedding': embedding_kind(vec),
        'report': report.to_dict(),
        'rate_dec': render_rate(report.rate),
        'valid': check.valid,
        'diagnostic': check.diagnostic,
        'predicted_n': predicted[0] if predicted else None,
        'predicted_r': predicted[1] if predicted else None,
        'prediction_matches': (predicted == (report.n, report.r)) if predicted else None,
        'max_gsde_rate': rate_to_str(max_gsde_rate(params)),
        'q_table': table_field_size(report.n),
        'q_bound': field_size_bound(params),
    }


def oracle_row(params: ChannelParams, entry_bound: int, budget: int) -> Dict[str, Any]:
    result = brute_force_max_rate(params, entry_bound=entry_bound, budget=budget, workers=1)
    formula = max_gsde_rate(params)
    if result.rate == formula:
        direction = '='
    else:
        direction = '>' if result.rate > formula else '<'
    return {
        'a': params.a,
        'b': params.b,
        'tau': params.tau,
        'entry_bound': entry_bound,
        'oracle_rate': rate_to_str(result.rate),
        'formula_rate': rate_to_str(formula),
        'direction': direction,
        'status': 'MATCH' if direction == '=' else 'MISMATCH',
        'witness': result.witness.to_text(),
    }


def _trial_seeds(seed: int, trials: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def simulate_trial(
    codes: Dict[str, StreamingCode],
    ge: GeConfig,
    length: int,
    trial: int,
    trial_seed: int,
) -> List[Dict[str, Any]]:
    """One GE channel realisation shared by every scheme; messages t < length are scored."""
    tau = next(iter(codes.values())).tau
    horizon = length + tau
    pattern = ge_sample(ge.with_seed(trial_seed), horizon)
    rows = []
    for scheme, code in codes.items():
        messages = random_messages(code, horizon, trial_seed)
        events = receive_stream(code, encode_stream(code, messages), pattern)
        scored = [event for event in events if event.t < length]
        counts = {status: 0 for status in DecodeStatus}
        for event in scored:
            ok = event.status is DecodeStatus.FAILED or event.message == messages[event.t]
            counts[event.status if ok else DecodeStatus.FAILED] += 1
        rows.append({
            'trial': trial,
            'scheme': scheme,
            'seed': trial_seed,
            'packets_sent': horizon,
            'packets_erased': len(pattern.erased),
            'messages': length,
            'on_time': counts[DecodeStatus.ON_TIME],
            'late': counts[DecodeStatus.LATE],
            'failed': counts[DecodeStatus.FAILED] + (length - len(scored)),
            'rate': rate_to_str(code.rate),
        })
    return rows


def aggregate_simulation(frame: pd.DataFrame) -> pd.DataFrame:
    totals = (
        frame.groupby('scheme', sort=True)[['packets_sent', 'packets_erased', 'messages', 'on_time', 'late', 'failed']]
        .sum()
        .reset_index()
    )
    totals.insert(0, 'trial', 'ALL')
    totals['seed'] = ''
    totals['rate'] = totals['scheme'].map(dict(zip(frame['scheme'], frame['rate'])))
    totals['on_time_pct'] = (100.0 * totals['on_time'] / totals['messages']).round(4)
    return totals


# Argument helpers

class GSSUsageError(Exception):
    """Bad command-line usage that argparse cannot detect."""


def parse_sweep(text: str) -> List[ChannelParams]:
    """'a=1..3 b=3 tau=6' -> every valid triple in the ranges."""
    ranges = {}
    for token in text.replace(',', ' ').split():
        match = re.fullmatch(r'(a|b|tau)=(\d+)(?:\.\.(\d+))?', token)
        if not match:
            raise argparse.ArgumentTypeError(f"bad sweep token {token!r}")
        low = int(match.group(2))
        high = int(match.group(3) or low)
        ranges[match.group(1)] = range(low, high + 1)
    missing = {'a', 'b', 'tau'} - ranges.keys()
    if missing:
        raise argparse.ArgumentTypeError(f"sweep is missing {', '.join(sorted(missing))}")

    triples = []
    for a in ranges['a']:
        for b in ranges['b']:
            for tau in ranges['tau']:
                if 0 < a <= b <= tau:
                    triples.append(ChannelParams(a, b, tau))
                else:
                    logger.debug(f"Sweep skips invalid triple ({a},{b},{tau})")
    return triples


def params_from_args(args) -> ChannelParams:
    if args.a is None or args.b is None or args.tau is None:
        raise GSSUsageError("--a, --b and --tau are required")
    return ChannelParams(args.a, args.b, args.tau)


def _table_output(rows: List[Dict[str, Any]], sort_keys: List[str]) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    if not frame.empty:
        frame = frame.sort_values(sort_keys, kind='mergesort').reset_index(drop=True)
    return frame


# Commands

def cmd_rates(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    published = {}
    if args.table1:
        triples = table_one()
        published = {ChannelParams(*row['params']): row for row in TABLE_ONE}
    elif args.sweep:
        triples = parse_sweep(args.sweep)
    else:
        triples = [params_from_args(args)]
    if not triples:
        raise GSSUsageError("no valid (a, b, tau) triple selected")

    field_order = FieldSpec.default().order
    rows = []
    for params in triples:
        rows.append(rate_row(params, field_order, published.get(params)))
        metrics.increment_counter('rate_rows')
    frame = _table_output(rows, ['a', 'b', 'tau'])

    report = RunReport(
        command='rates',
        params=triples[0].to_dict() if len(triples) == 1 else None,
        inputs={'triples': [p.to_dict() for p in triples], 'sweep': args.sweep, 'table1': args.table1},
        results={'rows': frame.to_dict(orient='records')},
    )
    return report, frame


def cmd_construct(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    params = params_from_args(args)
    vector = DispersionVector.from_text(args.vector) if args.vector else None
    result = construct_result(params, vector)
    metrics.increment_counter('constructions')

    flat = {k: v for k, v in result.items() if k not in ('report', 'entries')}
    flat.update({f'report_{k}': v for k, v in result['report'].items()})
    report = RunReport(
        command='construct',
        params=params.to_dict(),
        inputs={'vector': args.vector},
        results=result,
    )
    return report, pd.DataFrame([flat])


def cmd_verify(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    params = params_from_args(args)
    if args.horizon is None or args.horizon < params.w:
        raise GSSUsageError(f"--horizon must be at least tau+1 = {params.w}")

    if args.vector:
        delta_vec = DispersionVector.from_text(args.vector)
    elif args.ss:
        delta_vec, _ = construction1(params)
    else:
        delta_vec, _ = best_dispersion(params)
    code = create_streaming_code(params, delta_vec, k=args.k)

    with metrics.timed('verify'):
        verdict = verify_exhaustive(
            params, code=code, horizon=args.horizon, maximal_only=args.maximal_only,
            seed=args.seed, workers=args.workers,
        )
    metrics.increment_counter('patterns_checked', verdict.patterns_checked)

    results = verdict.to_dict()
    results['code'] = code.describe()
    if args.maximal_only:
        results['note'] = (
            'maximal admissible patterns only; each one covers all of its admissible '
            'sub-patterns'
        )
    if not verdict.passed:
        print(
            f"FAIL: pattern {verdict.counterexample.sorted_erased()} (H={verdict.horizon}), "
            f"message {verdict.failing_message}, anchor {verdict.failing_anchor}",
            file=sys.stderr,
        )
    report = RunReport(
        command='verify',
        params=params.to_dict(),
        inputs={'horizon': args.horizon, 'maximal_only': args.maximal_only, 'k': args.k,
                'vector': delta_vec.to_text(), 'seed': args.seed},
        results=results,
        exit_code=EXIT_OK if verdict.passed else EXIT_FAIL,
    )
    flat = {k: v for k, v in results.items() if k not in ('code', 'counterexample')}
    flat['counterexample'] = ' '.join(str(t) for t in verdict.counterexample.sorted_erased()) if verdict.counterexample else ''
    return report, pd.DataFrame([flat])


def cmd_oracle(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    triples = list(iter_params(args.tau_max, tau_min=args.tau_min))
    budget = active_config.BUDGET

    def run_cell(params):
        with metrics.timed('oracle_cell'):
            row = oracle_row(params, args.entry_bound, budget)
        metrics.record_event(EventType.SWEEP_CELL, f"{params}: {row['status']}")
        return row

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(run_cell, triples))
    else:
        rows = [run_cell(params) for params in triples]

    frame = _table_output(rows, ['tau', 'b', 'a'])
    all_match = bool((frame['status'] == 'MATCH').all()) if not frame.empty else True
    report = RunReport(
        command='oracle',
        params=None,
        inputs={'tau_min': args.tau_min, 'tau_max': args.tau_max, 'entry_bound': args.entry_bound},
        results={'rows': frame.to_dict(orient='records'), 'all_match': all_match,
                 'entry_bound': args.entry_bound},
        exit_code=EXIT_OK if all_match else EXIT_FAIL,
    )
    return report, frame


def cmd_simulate(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    params = params_from_args(args)
    if args.trials < 1 or args.length < 1:
        raise GSSUsageError("--trials and --length must be at least 1")

    ge = GeConfig.from_file(args.ge_config) if args.ge_config else GeConfig.defaults(args.seed)
    if args.seed_given:
        ge = ge.with_seed(args.seed)

    codes = {
        'GSS': create_streaming_code(params, best_dispersion(params)[0]),
        'SS': create_streaming_code(params, construction1(params)[0]),
    }
    seeds = _trial_seeds(ge.seed, args.trials)

    def run_trial(item):
        trial, trial_seed = item
        rows = simulate_trial(codes, ge, args.length, trial, trial_seed)
        metrics.increment_counter('trials')
        metrics.record_event(EventType.TRIAL_FINISHED, f"trial {trial}", {'seed': trial_seed})
        return rows

    items = list(enumerate(seeds))
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            batches = list(pool.map(run_trial, items))
    else:
        batches = [run_trial(item) for item in items]

    per_trial = _table_output([row for batch in batches for row in batch], ['trial', 'scheme'])
    per_trial['on_time_pct'] = (100.0 * per_trial['on_time'] / per_trial['messages']).round(4)
    frame = pd.concat([per_trial.astype({'trial': str, 'seed': str}), aggregate_simulation(per_trial)],
                      ignore_index=True)

    report = RunReport(
        command='simulate',
        params=params.to_dict(),
        inputs={'ge_config': ge.to_dict(), 'ge_defaults_are_toolkit_values': not args.ge_config,
                'length': args.length, 'trials': args.trials},
        results={'rows': frame.to_dict(orient='records')},
    )
    return report, frame


def cmd_encode(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    params = params_from_args(args)
    if not args.out:
        raise GSSUsageError("encode needs --out FILE for the binary stream")
    delta_vec = DispersionVector.from_text(args.vector) if args.vector else best_dispersion(params)[0]
    code = create_streaming_code(params, delta_vec, k=args.k)

    messages = random_messages(code, args.length, args.seed)
    packets = encode_stream(code, messages)
    pattern = None
    if args.pattern:
        with open(args.pattern, 'r', encoding='utf-8') as handle:
            pattern = ErasurePattern.from_json(handle.read())
        packets = [packet.erase() if pattern.is_erased(packet.t) else packet for packet in packets]

    data = pack_stream(FramedStream(params, delta_vec, code.mds.field.order, packets))
    with open(args.out, 'wb') as handle:
        handle.write(data)
    metrics.increment_counter('packets_written', len(packets))

    results = {
        'bytes': len(data),
        'packets': len(packets),
        'erased': pattern.sorted_erased() if pattern else [],
        'code': code.describe(),
        'messages': messages,
    }
    report = RunReport(
        command='encode',
        params=params.to_dict(),
        inputs={'length': args.length, 'seed': args.seed, 'vector': delta_vec.to_text(),
                'pattern': args.pattern, 'k': args.k},
        results=results,
    )
    return report, pd.DataFrame([{k: v for k, v in results.items() if k not in ('code', 'messages', 'erased')}])


def cmd_decode(args, metrics: RunMetrics) -> Tuple[RunReport, pd.DataFrame]:
    if not args.input:
        raise GSSUsageError("decode needs --input FILE")
    with open(args.input, 'rb') as handle:
        stream = unpack_stream(handle.read())

    field_spec = FieldSpec.for_bits(stream.field_order.bit_length() - 1)
    code = create_streaming_code(stream.params, stream.delta_vec, k=args.k, field=field_spec)
    events = receive_stream(code, stream.packets)
    metrics.increment_counter('events', len(events))

    rows = [
        {'t': e.t, 'decode_time': e.decode_time, 'status': e.status.value,
         'message': ' '.join(str(x) for x in e.message) if e.message else '',
         'failed_positions': ' '.join(str(p) for p in e.failed_positions)}
        for e in events
    ]
    frame = _table_output(rows, ['t'])
    report = RunReport(
        command='decode',
        params=stream.params.to_dict(),
        inputs={'input': args.input, 'k': args.k},
        results={'rows': frame.to_dict(orient='records'), 'code': code.describe()},
    )
    return report, frame


COMMANDS = {
    'rates': cmd_rates,
    'construct': cmd_construct,
    'verify': cmd_verify,
    'oracle': cmd_oracle,
    'simulate': cmd_simulate,
    'encode': cmd_encode,
    'decode': cmd_decode,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--a', type=int)
    common.add_argument('--b', type=int)
    common.add_argument('--tau', type=int)
    common.add_argument('--seed', type=int, default=None)
    common.add_argument('--format', choices=('csv', 'json'), default='csv')
    common.add_argument('--out', default=None, help='write output to FILE instead of stdout')
    common.add_argument('--workers', type=int, default=active_config.WORKERS)
    common.add_argument('--log-level', default=active_config.LOG_LEVEL)

    parser = argparse.ArgumentParser(prog='gss', description='Generalized simple streaming code toolkit')
    sub = parser.add_subparsers(dest='command', required=True)

    rates = sub.add_parser('rates', parents=[common], help='rate table per (a,b,tau)')
    rates.add_argument('--sweep', default=None, help="e.g. 'a=1..3 b=3 tau=6'")
    rates.add_argument('--table1', action='store_true', help='the five published triples')

    construct = sub.add_parser('construct', parents=[common], help='maximum-rate dispersion vector')
    construct.add_argument('--vector', default=None, help="evaluate a given vector, e.g. '3,1,1,1,1,3'")

    verify = sub.add_parser('verify', parents=[common], help='exhaustive decode check over admissible patterns')
    verify.add_argument('--horizon', type=int, default=None)
    verify.add_argument('--maximal-only', action='store_true')
    verify.add_argument('--k', type=int, default=None, help='override code dimension (weakened codes)')
    verify.add_argument('--vector', default=None)
    verify.add_argument('--ss', action='store_true', help='use the 0/1 construction')

    oracle = sub.add_parser('oracle', parents=[common], help='brute-force maximum rate vs formula')
    oracle.add_argument('--tau-max', type=int, required=True)
    oracle.add_argument('--tau-min', type=int, default=1)
    oracle.add_argument('--entry-bound', type=int, default=active_config.ENTRY_BOUND)

    simulate = sub.add_parser('simulate', parents=[common], help='Gilbert-Elliott loss simulation')
    simulate.add_argument('--ge-config', default=None, help='JSON file with all five GE fields')
    simulate.add_argument('--length', type=int, default=1000)
    simulate.add_argument('--trials', type=int, default=10)

    encode = sub.add_parser('encode', parents=[common], help='write a framed coded stream')
    encode.add_argument('--length', type=int, default=32)
    encode.add_argument('--vector', default=None)
    encode.add_argument('--k', type=int, default=None)
    encode.add_argument('--pattern', default=None, help='JSON erasure pattern applied before writing')

    decode = sub.add_parser('decode', parents=[common], help='decode a framed coded stream')
    decode.add_argument('--input', default=None)
    decode.add_argument('--k', type=int, default=None)

    return parser


def emit(report: RunReport, frame: pd.DataFrame, fmt: str, out: Optional[str], command: str):
    if fmt == 'json':
        payload = json.loads(json.dumps(report.to_dict(), default=str))
        validate_report(payload)
        text = json.dumps(payload, indent=2, sort_keys=True, default=str) + '\n'
    else:
        text = frame.to_csv(index=False, lineterminator='\n')

    if out and command != 'encode':
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        logger.info(f"Wrote {command} output to {out}")
    else:
        sys.stdout.write(text)


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    if not active_config.validate_config():
        logger.error("Configuration validation failed. Please check your environment variables.")
        return EXIT_USAGE

    if str(args.log_level).upper() == 'DEBUG':
        active_config.print_config(file=sys.stderr)

    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = active_config.SEED

    metrics = create_run_metrics()
    metrics.record_event(EventType.COMMAND_STARTED, args.command)
    try:
        report, frame = COMMANDS[args.command](args, metrics)
    except BudgetExceededError as e:
        metrics.record_event(EventType.BUDGET_EXCEEDED, str(e), {'size': e.size, 'budget': e.budget})
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (GSSError, GSSUsageError, argparse.ArgumentTypeError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    metrics.record_event(EventType.COMMAND_FINISHED, args.command)
    report.metadata = toolchain_metadata()
    report.metrics = metrics.get_metrics_summary()
    report.wall_time_s = metrics.wall_time_s()
    emit(report, frame, args.format, args.out, args.command)
    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())
