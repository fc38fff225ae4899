from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple

from pydantic import TypeAdapter, ValidationError

from app.calculus import ProofState
from app.choicecond import CcPair, build_QC
from app.constants import CORPUS_DIR, VALID_VARIANTS
from app.exceptions import KernelError
from app.oracle import FiniteStructure
from app.parser import Problem, parse_problem
from app.schemas import CorpusItem, CorpusResult
from app.syntax import Sequent, Var, sort_vars
from app.utils.logger import logger
from app.utils.reports import (
    check_goals,
    eliminate_goal_terms,
    load_structures,
    parse_edges,
    prove,
    with_edges,
)

MANIFEST = 'manifest.json'


def _read(directory: Path, name: str) -> str:
    path = directory / name
    if not path.is_file():
        logger.error(f'Corpus file {path} is missing')
        raise KernelError(f'corpus file missing: {name}')
    return path.read_text()


def load_manifest(directory: Path = CORPUS_DIR) -> List[CorpusItem]:
    text = _read(directory, MANIFEST)
    try:
        return TypeAdapter(List[CorpusItem]).validate_json(text)
    except ValidationError as exc:
        raise KernelError(f'{MANIFEST} is invalid: {exc}') from exc


def _obligations(st: ProofState) -> List[Sequent]:
    """Open goals that were added as instantiation obligations."""
    ids = {
        goal_id
        for step in st.trace if step.rule == 'instantiate'
        for goal_id in step.new_goals
    }
    return [goal.sequent for goal in st.goals if goal.id in ids]


def _load_problem(directory: Path, item: CorpusItem) -> Problem:
    text = _read(directory, item.problem)
    try:
        return parse_problem(text, item.name)
    except KernelError as exc:
        raise KernelError(f'{item.problem}: {exc}') from exc


class CorpusRunner:
    """Checks each item against its expected outcome. Missing or broken
    corpus files raise; a wrong outcome is a failed result."""

    def __init__(self, directory: Path = CORPUS_DIR) -> None:
        self.directory = directory

    def run(self, only: Optional[str] = None) -> List[CorpusResult]:
        items = load_manifest(self.directory)
        if only is not None:
            items = [item for item in items if only in item.name]
        results = [self.run_item(item) for item in items]
        passed = sum(1 for result in results if result.passed)
        logger.info(f'Corpus: {passed} of {len(results)} items passed')
        return results

    def run_item(self, item: CorpusItem) -> CorpusResult:
        problem = _load_problem(self.directory, item)
        script = (
            _read(self.directory, item.script)
            if item.script is not None else None
        )
        structure = (
            _read(self.directory, item.structure)
            if item.structure is not None else None
        )
        passed, detail = self._outcome(item, problem, script, structure)
        logger.info(
            f'Corpus item {item.name}: {"pass" if passed else "FAIL"}'
        )
        return CorpusResult(
            name=item.name, expect=item.expect, passed=passed, detail=detail
        )

    def _outcome(  # noqa: PLR0911
        self,
        item: CorpusItem,
        problem: Problem,
        script: Optional[str],
        structure: Optional[str],
    ) -> Tuple[bool, str]:
        goals: List[Sequent] = list(problem.goals)
        pair = problem.pair
        variables: Mapping[str, Var] = problem.variables
        obligations: List[Sequent] = []
        if script is not None:
            run = prove(problem, script)
            if item.expect == 'rejected':
                if run.error is None:
                    return False, 'script was accepted'
                assert item.message is not None
                return item.message in run.error, run.error
            if run.error is not None:
                return False, run.error
            if item.expect == 'closed':
                return run.state.is_proved, (
                    f'{run.trace.closed} closed, '
                    f'{len(run.trace.open_goals)} open'
                )
            if item.expect == 'open':
                found = run.trace.open_goals
                return found == item.open_goals, ' | '.join(found)
            goals = run.state.sequents
            obligations = _obligations(run.state)
            pair = run.state.pair
            variables = run.state.variables
        elif item.expect in ('closed', 'open', 'rejected'):
            return False, f'{item.expect} needs a script'
        pair = with_edges(pair, parse_edges(problem, item.edges))
        goals, pair = eliminate_goal_terms(
            goals, pair, {v.name for v in variables.values()}
        )
        label, structures = load_structures(
            problem,
            structure,
            item.all_structures or structure is None,
            item.max_size,
        )
        if item.expect == 'q_valid':
            return self._q_valid(pair, obligations, label, structures)
        sets = [goals] if item.joint else [[g] for g in goals]
        reports = check_goals(
            sets, pair, label, structures, item.variant, item.notion
        )
        want = item.expect == 'valid'
        verdicts = ['valid' if r.valid else 'invalid' for r in reports]
        return (
            all(r.valid == want for r in reports),
            f'{", ".join(verdicts)} on {label}',
        )

    def _q_valid(
        self,
        pair: CcPair,
        obligations: Sequence[Sequent],
        label: str,
        structures: Sequence[FiniteStructure],
    ) -> Tuple[bool, str]:
        sets = [[build_QC(pair.cc, y)] for y in sort_vars(pair.cc)]
        sets.extend([seq] for seq in obligations)
        if not sets:
            return False, 'no choice-conditions to check'
        reports = [
            report
            for variant in VALID_VARIANTS
            for report in check_goals(
                sets, pair, label, structures, variant, 'cr'
            )
        ]
        bad = [r.goal for r in reports if not r.valid]
        if bad:
            return False, f'invalid: {"; ".join(bad)}'
        return True, f'{len(sets)} obligations valid on {label}'


def run_corpus(
    only: Optional[str] = None, directory: Path = CORPUS_DIR
) -> List[CorpusResult]:
    return CorpusRunner(directory).run(only)
