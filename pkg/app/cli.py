import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import BaseModel, TypeAdapter

from app.constants import MAX_SIZE, VALID_NOTIONS, VALID_VARIANTS, VARIANT
from app.epsilon import formula_metrics
from app.exceptions import KernelError
from app.parser import Problem, load_problem
from app.schemas import CorpusResult, ElimResponse, VerdictReport
from app.utils.corpus_runner import run_corpus
from app.utils.logger import set_quiet
from app.utils.reports import (
    check_model,
    choice_dumps,
    edge_dumps,
    eliminate,
    prove,
)

ORDERS = {'in': 'inside_out', 'out': 'outside_in'}


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise KernelError(f'cannot read {path}: {exc.strerror}') from exc


def _load(path: str) -> Problem:
    if not Path(path).is_file():
        raise KernelError(f'problem file not found: {path}')
    return load_problem(Path(path))


def _dump(path: Optional[str], data: bytes) -> None:
    if path is not None:
        Path(path).write_bytes(data)


def _model_json(model: BaseModel) -> bytes:
    return model.model_dump_json(indent=2).encode()


def cmd_elim(args: argparse.Namespace) -> int:
    responses: List[ElimResponse] = []
    if args.metrics:
        print('file quantifiers depth terms orders_agree vc_growth')
    for path in args.files:
        problem = _load(path)
        if args.metrics:
            for seq in problem.goals:
                for f in seq:
                    row = formula_metrics(f)
                    print(
                        f'{Path(path).name} {row.quantifiers} {row.depth} '
                        f'{row.terms} {"yes" if row.orders_agree else "no"} '
                        f'{row.reduction_depth_growth}'
                    )
            continue
        report = eliminate(
            problem,
            args.mode,
            ORDERS[args.order],  # type: ignore[arg-type]
            args.share == 'on',
            args.parallel,
        )
        print(f'== {Path(path).name}')
        for index, text in enumerate(report.texts, start=1):
            print(f'goal {index}: {text}')
        choices = choice_dumps(report.pair.cc)
        edges = edge_dumps(report.pair.vc.edges)
        for entry in choices:
            print(f'choice {entry.variable} := {entry.abstraction}')
        for edge in edges:
            print(f'edge {edge.source} -> {edge.target}')
        responses.append(
            ElimResponse(
                success=True,
                formulas=report.texts,
                choices=choices,
                edges=edges,
                depths=report.depths,
                nesting=report.nesting,
            )
        )
    _dump(
        args.dump,
        TypeAdapter(List[ElimResponse]).dump_json(responses, indent=2),
    )
    return 0


def cmd_prove(args: argparse.Namespace) -> int:
    problem = _load(args.problem)
    run = prove(problem, _read(args.script))
    for step in run.trace.steps:
        print(f'line {step.line}: {step.text}')
    for goal in run.trace.open_goals:
        print(f'open: {goal}')
    print(f'{run.trace.closed} closed, {len(run.trace.open_goals)} open')
    _dump(args.dump, _model_json(run.trace))
    if run.error is not None:
        print(run.error, file=sys.stderr)
        return 1
    return 0 if run.succeeded else 1


def cmd_check_model(args: argparse.Namespace) -> int:
    problem = _load(args.problem)
    structure = _read(args.structure) if args.structure else None
    reports = check_model(
        problem,
        structure,
        args.all_structures,
        args.max_size,
        args.variant,
        args.notion,
        args.edge,
        args.joint,
    )
    for report in reports:
        verdict = 'valid' if report.valid else 'invalid'
        print(
            f'{verdict}: {report.goal} ({report.structure}, '
            f'{report.checked} checked, {report.variant} pi, '
            f'notion {report.notion})'
        )
        for failure in report.failures:
            print(f'  fails on: {failure}')
    _dump(
        args.dump,
        TypeAdapter(List[VerdictReport]).dump_json(reports, indent=2),
    )
    return 0 if all(report.valid for report in reports) else 1


def cmd_corpus(args: argparse.Namespace) -> int:
    results = run_corpus(args.only)
    for result in results:
        mark = 'PASS' if result.passed else 'FAIL'
        print(f'{mark} {result.name} [{result.expect}] {result.detail}')
    failed = sum(1 for result in results if not result.passed)
    print(f'{len(results) - failed} passed, {failed} failed')
    _dump(
        args.dump,
        TypeAdapter(List[CorpusResult]).dump_json(results, indent=2),
    )
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--dump', default=None, help='Write a JSON dump to this file'
    )
    common.add_argument(
        '--variant', choices=VALID_VARIANTS, default=VARIANT,
        help='Quantification of the choice valuation',
    )
    common.add_argument(
        '--max-size', type=int, default=MAX_SIZE,
        help='Universe size bound of structure sweeps',
    )
    common.add_argument(
        '--quiet', action='store_true', help='Only log warnings and errors'
    )

    parser = argparse.ArgumentParser(
        prog='epsk',
        description='Free-variable choice kernel: elimination, proof '
        'replay and finite model checking',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    elim = commands.add_parser(
        'elim', parents=[common], help='Eliminate quantifiers or choice terms'
    )
    elim.add_argument('files', nargs='+', help='Problem files (.p)')
    elim.add_argument(
        '--mode', choices=['classical', 'choice', 'vc'], default='classical'
    )
    elim.add_argument('--order', choices=sorted(ORDERS), default='in')
    elim.add_argument('--share', choices=['on', 'off'], default='on')
    elim.add_argument(
        '--parallel', action='store_true',
        help='Choose blocks of like quantifiers in parallel',
    )
    elim.add_argument(
        '--metrics', action='store_true',
        help='Print elimination metrics instead of formulas',
    )
    elim.set_defaults(handler=cmd_elim)

    prove_cmd = commands.add_parser(
        'prove', parents=[common], help='Replay a proof script'
    )
    prove_cmd.add_argument('problem', help='Problem file (.p)')
    prove_cmd.add_argument('script', help='Proof script (.ps)')
    prove_cmd.set_defaults(handler=cmd_prove)

    check = commands.add_parser(
        'check-model', parents=[common], help='Check goals on structures'
    )
    check.add_argument('problem', help='Problem file (.p)')
    check.add_argument(
        'structure', nargs='?', default=None, help='Structure file (.st)'
    )
    check.add_argument('--all-structures', action='store_true')
    check.add_argument('--notion', choices=VALID_NOTIONS, default='cr')
    check.add_argument(
        '--joint', action='store_true', help='Check all goals as one set'
    )
    check.add_argument(
        '--edge', action='append', default=[],
        help='Extra variable-condition edge "a -> b"',
    )
    check.set_defaults(handler=cmd_check_model)

    corpus = commands.add_parser(
        'corpus', parents=[common], help='Run the bundled corpus'
    )
    corpus.add_argument(
        '--only', default=None, help='Run items whose name contains this'
    )
    corpus.set_defaults(handler=cmd_corpus)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    try:
        return int(args.handler(args))
    except KernelError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
