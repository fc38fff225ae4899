"""Kernel results turned into the dump and report models shared by the
CLI, the HTTP routes and the corpus runner."""

from dataclasses import dataclass
from typing import (
    Iterable,
    List,
    Literal,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from app.calculus import ProofState, RuleStep, format_step, replay_script
from app.choicecond import Abstraction, CcPair, extend
from app.constants import Notion, Variant
from app.epsilon import (
    classical_qelim,
    eliminate_choice_terms,
    nesting_depth,
    vc_reduction,
)
from app.exceptions import KernelError, OracleError, ScriptError
from app.oracle import (
    FiniteStructure,
    all_structures,
    structures_from_decl,
    sweep,
)
from app.parser import Problem, parse_script, parse_structure
from app.schemas import (
    ChoiceEntryDump,
    EdgeDump,
    ElimMode,
    StepDump,
    TraceDump,
    VerdictReport,
)
from app.syntax import (
    Formula,
    Sequent,
    Var,
    depth,
    format_sequent,
    sort_vars,
)
from app.utils.logger import logger
from app.varcond import Edge, edge_key

Order = Literal['inside_out', 'outside_in']


def edge_dumps(edges: Iterable[Edge]) -> List[EdgeDump]:
    return [
        EdgeDump(source=a.surface, target=b.surface)
        for a, b in sorted(edges, key=edge_key)
    ]


def choice_dumps(cc: Mapping[Var, Abstraction]) -> List[ChoiceEntryDump]:
    return [
        ChoiceEntryDump(variable=y.surface, abstraction=cc[y].format())
        for y in sort_vars(cc)
    ]


def goal_texts(sequents: Iterable[Sequent]) -> List[str]:
    return [format_sequent(seq) for seq in sequents]


# --- elimination -------------------------------------------------------------


@dataclass
class ElimReport:
    formulas: List[Formula]
    pair: CcPair
    depths: List[int]
    nesting: List[int]

    @property
    def texts(self) -> List[str]:
        return goal_texts((f,) for f in self.formulas)


def _goal_formulas(problem: Problem) -> List[Formula]:
    return [f for seq in problem.goals for f in seq]


def eliminate(
    problem: Problem,
    mode: ElimMode = 'classical',
    order: Order = 'inside_out',
    share: bool = True,
    parallel: bool = False,
) -> ElimReport:
    """Apply one elimination mode to every goal formula of ``problem``.

    ``classical`` replaces quantifiers by choice terms, ``choice`` replaces
    choice terms by delta-plus variables and ``vc`` replaces quantifiers by
    free variables. The last two thread one pair through all formulas.
    """
    pair = problem.pair
    taken = {v.name for v in problem.variables.values()}
    results: List[Formula] = []
    for f in _goal_formulas(problem):
        if mode == 'classical':
            signature = problem.signature if parallel else None
            results.append(classical_qelim(f, order, signature))
            continue
        if mode == 'choice':
            elim = eliminate_choice_terms(f, pair, taken, share=share)
            new_vars = elim.new_vars
            results.append(elim.formula)
            pair = elim.pair
        else:
            reduction = vc_reduction(f, pair, taken)
            new_vars = reduction.new_vars
            results.append(reduction.formula)
            pair = reduction.pair
        taken |= {v.name for v in new_vars}
    logger.info(
        f'Eliminated {len(results)} formulas of {problem.name} in {mode} '
        f'mode'
    )
    return ElimReport(
        results,
        pair,
        [depth(f) for f in results],
        [nesting_depth(f) for f in results],
    )


# --- proof replay ------------------------------------------------------------


def _step_dump(index: int, step: RuleStep, goals: List[str]) -> StepDump:
    return StepDump(
        index=index,
        line=step.line,
        rule=step.rule,
        goal=step.goal,
        pos=step.pos,
        payload=step.payload,
        text=format_step(step),
        new_goals=list(step.new_goals),
        edges=edge_dumps(step.edges),
        choices=list(step.choices),
        obligations=list(step.obligations),
        closing=list(step.closing) if step.closing is not None else None,
        goals=goals,
    )


def trace_dump(
    name: str,
    st: ProofState,
    snapshots: Sequence[List[str]],
    error: Optional[str] = None,
) -> TraceDump:
    return TraceDump(
        problem=name,
        steps=[
            _step_dump(index, step, list(goals))
            for index, (step, goals) in enumerate(
                zip(st.trace, snapshots), start=1
            )
        ],
        open_goals=goal_texts(st.sequents),
        edges=edge_dumps(st.pair.vc.edges),
        choices=choice_dumps(st.pair.cc),
        closed=st.closed,
        proved=st.is_proved and error is None,
        error=error,
    )


@dataclass
class ProofRun:
    state: ProofState
    trace: TraceDump
    error: Optional[str]

    @property
    def succeeded(self) -> bool:
        return self.error is None and self.state.is_proved


def prove(problem: Problem, script: str) -> ProofRun:
    """Replay ``script`` on ``problem``. A failing command ends the run;
    the trace then holds the steps before it and the error message."""
    commands = parse_script(script)
    snapshots: List[List[str]] = []

    def on_step(st: ProofState) -> None:
        snapshots.append(goal_texts(st.sequents))

    error: Optional[str] = None
    try:
        st = replay_script(problem, commands, on_step)
    except ScriptError as exc:
        assert isinstance(exc.state, ProofState)
        st = exc.state
        error = str(exc)
    return ProofRun(st, trace_dump(problem.name, st, snapshots, error), error)


# --- model checking ----------------------------------------------------------


def parse_edges(problem: Problem, texts: Iterable[str]) -> List[Edge]:
    edges: List[Edge] = []
    for text in texts:
        parts = [p.strip() for p in text.split('->')]
        if len(parts) != 2:  # noqa: PLR2004
            raise KernelError(f'invalid edge {text!r}; expected "a -> b"')
        edges.append(
            (problem.free_variable(parts[0]), problem.free_variable(parts[1]))
        )
    return edges


def with_edges(pair: CcPair, edges: Sequence[Edge]) -> CcPair:
    if not edges:
        return pair
    return extend(pair, {}, edges)


def load_structures(
    problem: Problem,
    structure: Optional[str],
    everything: bool,
    max_size: int,
) -> Tuple[str, List[FiniteStructure]]:
    """The structures to check together with a short label for them."""
    if structure is not None:
        decl = parse_structure(structure)
        return 'given structure', structures_from_decl(
            problem.signature, decl
        )
    if everything:
        return f'all structures up to size {max_size}', all_structures(
            problem.signature, max_size
        )
    raise OracleError('give a structure or ask for all structures')


def eliminate_goal_terms(
    goals: Sequence[Sequent], pair: CcPair, taken: Iterable[str] = ()
) -> Tuple[List[Sequent], CcPair]:
    """Goals with every epsilon- and iota-term replaced by a delta-plus
    variable; one pair is threaded through all goals."""
    names = set(taken)
    result: List[Sequent] = []
    for seq in goals:
        formulas: List[Formula] = []
        for f in seq:
            elim = eliminate_choice_terms(f, pair, names)
            names |= {v.name for v in elim.new_vars}
            formulas.append(elim.formula)
            pair = elim.pair
        result.append(tuple(formulas))
    return result, pair


def check_goals(
    goals: Sequence[Sequence[Sequent]],
    pair: CcPair,
    label: str,
    structures: Sequence[FiniteStructure],
    variant: Variant,
    notion: Notion,
) -> List[VerdictReport]:
    reports: List[VerdictReport] = []
    for goal_set in goals:
        result = sweep(goal_set, pair, structures, variant, notion)
        reports.append(
            VerdictReport(
                goal=' | '.join(goal_texts(goal_set)),
                structure=label,
                variant=variant,
                notion=notion,
                valid=result.valid,
                checked=result.checked,
                failures=[st.describe() for st in result.failures[:3]],
            )
        )
        logger.info(
            f'{reports[-1].goal}: {"valid" if result.valid else "invalid"} '
            f'on {result.checked} structures'
        )
    return reports


def check_model(
    problem: Problem,
    structure: Optional[str] = None,
    everything: bool = False,
    max_size: int = 2,
    variant: Variant = 'some',
    notion: Notion = 'cr',
    edges: Sequence[str] = (),
    joint: bool = False,
) -> List[VerdictReport]:
    """Oracle verdicts for the goals of ``problem``, one report per goal
    or a single report for the whole goal set with ``joint``."""
    pair = with_edges(problem.pair, parse_edges(problem, edges))
    label, structures = load_structures(
        problem, structure, everything, max_size
    )
    plain, pair = eliminate_goal_terms(
        problem.goals, pair, {v.name for v in problem.variables.values()}
    )
    goals: List[List[Sequent]] = [plain] if joint else [[g] for g in plain]
    return check_goals(goals, pair, label, structures, variant, notion)
