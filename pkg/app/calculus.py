"""The reductive sequent engine.

A goal is a disjunctive sequent; goals and sequent positions are addressed
1-based. Decomposition puts new formulas in front of the sequent. Every
rule returns a new :class:`ProofState`; nothing is mutated in place.
"""

from dataclasses import dataclass, field, replace
from typing import (
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

from app.choicecond import (
    Abstraction,
    CcPair,
    build_QC,
    extend,
    extended_sigma_update,
    format_cc,
    obligation_vars,
    obligations_for,
    required_edges,
)
from app.exceptions import KernelError, RuleError, ScriptError
from app.parser import (
    Elaborator,
    Problem,
    ScriptCommand,
    declare_variable,
    split_free,
)
from app.syntax import (
    And,
    Eq,
    Exists,
    ExistsUnique,
    Falsity,
    Forall,
    Formula,
    Iff,
    Imp,
    Kind,
    Not,
    Or,
    RIGID_KINDS,
    Sequent,
    Signature,
    Term,
    Truth,
    Type,
    Var,
    alpha_key,
    apply_substitution_seq,
    conjugate,
    expand_unique_existence,
    format_expr,
    format_sequent,
    format_substitution,
    free_vars,
    fresh_numbered,
    instantiate_bound,
)
from app.utils.logger import logger
from app.varcond import Edge, edge_key, format_edges

RULES = (
    'alpha', 'beta', 'gamma', 'delta_minus', 'delta_plus', 'instantiate',
    'close', 'add_lemma', 'cut', 'extend', 'edge', 'var',
)


@dataclass(frozen=True)
class Goal:
    id: int
    sequent: Sequent


@dataclass(frozen=True)
class RuleStep:
    rule: str
    goal: Optional[int] = None
    pos: Optional[int] = None
    payload: str = ''
    new_goals: Tuple[int, ...] = ()
    edges: Tuple[Edge, ...] = ()
    choices: Tuple[str, ...] = ()
    obligations: Tuple[str, ...] = ()
    closing: Optional[Tuple[str, str]] = None
    line: Optional[int] = None


@dataclass(frozen=True)
class ProofState:
    signature: Signature
    goals: Tuple[Goal, ...]
    pair: CcPair
    variables: Mapping[str, Var]
    root: Tuple[Sequent, ...]
    lemmas: Mapping[str, Formula] = field(default_factory=dict)
    trace: Tuple[RuleStep, ...] = ()
    next_id: int = 1

    @property
    def sequents(self) -> List[Sequent]:
        return [goal.sequent for goal in self.goals]

    @property
    def closed(self) -> int:
        return sum(1 for step in self.trace if step.rule == 'close')

    @property
    def is_proved(self) -> bool:
        return not self.goals


def initial_state(problem: Problem) -> ProofState:
    goals = tuple(
        Goal(index, seq) for index, seq in enumerate(problem.goals, start=1)
    )
    return ProofState(
        signature=problem.signature,
        goals=goals,
        pair=problem.pair,
        variables=dict(problem.variables),
        root=tuple(problem.goals),
        lemmas=dict(problem.lemmas),
        next_id=len(goals) + 1,
    )


# --- addressing ------------------------------------------------------------


def _goal(st: ProofState, g: int) -> Goal:
    if not 1 <= g <= len(st.goals):
        raise RuleError(f'no goal {g}; there are {len(st.goals)} open goals')
    return st.goals[g - 1]


def _principal(goal: Goal, p: int) -> Formula:
    if not 1 <= p <= len(goal.sequent):
        raise RuleError(
            f'no position {p} in goal {goal.id}, which has '
            f'{len(goal.sequent)} formulas'
        )
    return goal.sequent[p - 1]


def _without(seq: Sequent, p: int) -> Sequent:
    return seq[:p - 1] + seq[p:]


def _replace_goal(
    st: ProofState, g: int, sequents: Sequence[Sequent]
) -> Tuple[Tuple[Goal, ...], Tuple[int, ...], int]:
    """The goal list with goal ``g`` replaced by fresh goals for
    ``sequents``."""
    next_id = st.next_id
    fresh: List[Goal] = []
    for seq in sequents:
        fresh.append(Goal(next_id, seq))
        next_id += 1
    goals = st.goals[:g - 1] + tuple(fresh) + st.goals[g:]
    return goals, tuple(goal.id for goal in fresh), next_id


def _record(st: ProofState, step: RuleStep, **changes: object) -> ProofState:
    result = replace(st, trace=st.trace + (step,), **changes)
    logger.info(f'Applied {format_step(step)}')
    return result


def _shape_error(rule: str, f: Formula) -> RuleError:
    return RuleError(f'{rule} does not apply to {format_expr(f)}')


def _taken_names(st: ProofState) -> Set[str]:
    return {var.name for var in st.variables.values()}


# --- alpha and beta --------------------------------------------------------


def alpha_parts(f: Formula) -> Optional[List[Formula]]:
    """Components of a disjunctive formula, or None."""
    if isinstance(f, Or):
        return [f.left, f.right]
    if isinstance(f, Imp):
        return [conjugate(f.left), f.right]
    if isinstance(f, ExistsUnique):
        return [expand_unique_existence(f)]  # type: ignore[list-item]
    if isinstance(f, Falsity):
        return []
    if isinstance(f, Not):
        body = f.body
        if isinstance(body, And):
            return [conjugate(body.left), conjugate(body.right)]
        if isinstance(body, Not):
            return [body.body]
        if isinstance(body, Iff):
            return [
                And(body.left, conjugate(body.right)),
                And(conjugate(body.left), body.right),
            ]
        if isinstance(body, Truth):
            return []
        if isinstance(body, ExistsUnique):
            return [Not(expand_unique_existence(body))]  # type: ignore
    return None


def beta_parts(f: Formula) -> Optional[Tuple[Formula, Formula]]:
    """The two alternatives of a conjunctive formula, or None."""
    if isinstance(f, And):
        return f.left, f.right
    if isinstance(f, Iff):
        return Imp(f.left, f.right), Imp(f.right, f.left)
    if isinstance(f, Not):
        body = f.body
        if isinstance(body, Or):
            return conjugate(body.left), conjugate(body.right)
        if isinstance(body, Imp):
            return body.left, conjugate(body.right)
    return None


def apply_alpha(st: ProofState, g: int, p: int) -> ProofState:
    goal = _goal(st, g)
    f = _principal(goal, p)
    parts = alpha_parts(f)
    if parts is None:
        raise _shape_error('alpha', f)
    seq = tuple(parts) + _without(goal.sequent, p)
    goals, ids, next_id = _replace_goal(st, g, [seq])
    step = RuleStep('alpha', goal.id, p, format_expr(f), ids)
    return _record(st, step, goals=goals, next_id=next_id)


def apply_beta(st: ProofState, g: int, p: int) -> ProofState:
    goal = _goal(st, g)
    f = _principal(goal, p)
    parts = beta_parts(f)
    if parts is None:
        raise _shape_error('beta', f)
    rest = _without(goal.sequent, p)
    goals, ids, next_id = _replace_goal(
        st, g, [(parts[0],) + rest, (parts[1],) + rest]
    )
    step = RuleStep('beta', goal.id, p, format_expr(f), ids)
    return _record(st, step, goals=goals, next_id=next_id)


def apply_cut(st: ProofState, g: int, f: Formula) -> ProofState:
    """Case analysis on ``f``: the goal splits into ``f, goal`` and
    ``~f, goal``."""
    goal = _goal(st, g)
    goals, ids, next_id = _replace_goal(
        st, g, [(f,) + goal.sequent, (conjugate(f),) + goal.sequent]
    )
    step = RuleStep('cut', goal.id, None, format_expr(f), ids)
    return _record(st, step, goals=goals, next_id=next_id)


# --- quantifier rules ------------------------------------------------------


def apply_gamma(st: ProofState, g: int, p: int, t: Term) -> ProofState:
    """``ex x. A`` or ``~all x. A`` at ``p`` gets the instance for ``t``
    prepended; the principal formula stays."""
    goal = _goal(st, g)
    f = _principal(goal, p)
    if isinstance(f, Exists):
        quantifier, negated = f, False
    elif isinstance(f, Not) and isinstance(f.body, Forall):
        quantifier, negated = f.body, True
    else:
        raise _shape_error('gamma', f)
    instance: Formula = instantiate_bound(  # type: ignore[assignment]
        quantifier.body, quantifier.var, t
    )
    if negated:
        instance = conjugate(instance)
    goals, ids, next_id = _replace_goal(
        st, g, [(instance,) + goal.sequent]
    )
    step = RuleStep('gamma', goal.id, p, format_expr(t), ids)
    return _record(st, step, goals=goals, next_id=next_id)


def _delta_principal(rule: str, f: Formula) -> Tuple[Forall, bool]:
    """The universal quantifier of ``all x. A`` or ``~ex x. A`` and
    whether it came negated."""
    if isinstance(f, Forall):
        return f, False
    if isinstance(f, Not) and isinstance(f.body, Exists):
        return Forall(f.body.var, f.body.body), True
    raise _shape_error(rule, f)


def _fresh_variable(
    st: ProofState, name: Optional[str], base: str, kind: Kind, type_: Type
) -> Tuple[Var, Dict[str, Var]]:
    taken = _taken_names(st)
    if name is None:
        name = fresh_numbered(base, taken)
    elif name in taken:
        raise RuleError(f'variable name {name} is already in use')
    var = Var(name, kind, type_)
    variables = dict(st.variables)
    variables[var.surface] = var
    return var, variables


def apply_delta_minus(
    st: ProofState, g: int, p: int, name: Optional[str] = None
) -> ProofState:
    goal = _goal(st, g)
    f = _principal(goal, p)
    quantifier, negated = _delta_principal('delta-', f)
    var, variables = _fresh_variable(
        st, name, quantifier.var.name, Kind.DELTA_MINUS, quantifier.var.type
    )
    instance: Formula = instantiate_bound(  # type: ignore[assignment]
        quantifier.body, quantifier.var, var
    )
    if negated:
        instance = conjugate(instance)
    edges = tuple(
        (z, var) for z in free_vars(goal.sequent, 'gamma_delta_plus')
    )
    pair = extend(st.pair, {}, edges)
    goals, ids, next_id = _replace_goal(
        st, g, [(instance,) + _without(goal.sequent, p)]
    )
    step = RuleStep('delta_minus', goal.id, p, var.surface, ids, edges)
    return _record(
        st, step, goals=goals, next_id=next_id, pair=pair,
        variables=variables,
    )


def apply_delta_plus(
    st: ProofState, g: int, p: int, name: Optional[str] = None
) -> ProofState:
    """Liberalized delta: the fresh delta-plus variable is constrained to
    a counterexample of the principal formula."""
    goal = _goal(st, g)
    f = _principal(goal, p)
    quantifier, negated = _delta_principal('delta+', f)
    var, variables = _fresh_variable(
        st, name, quantifier.var.name, Kind.DELTA_PLUS, quantifier.var.type
    )
    matrix: Formula = instantiate_bound(  # type: ignore[assignment]
        quantifier.body, quantifier.var, var
    )
    instance = conjugate(matrix) if negated else matrix
    condition = matrix if negated else conjugate(matrix)
    abstraction = Abstraction((), condition)
    edges = tuple((z, var) for z in free_vars(f))
    pair = extend(st.pair, {var: abstraction}, edges)
    goals, ids, next_id = _replace_goal(
        st, g, [(instance,) + _without(goal.sequent, p)]
    )
    step = RuleStep(
        'delta_plus', goal.id, p, var.surface, ids, edges,
        tuple(format_cc({var: abstraction})),
    )
    return _record(
        st, step, goals=goals, next_id=next_id, pair=pair,
        variables=variables,
    )


# --- instantiation ---------------------------------------------------------


def instantiate(st: ProofState, s: Mapping[Var, Term]) -> ProofState:
    """Apply an R-substitution on rigid variables to the whole state and
    add the instantiation obligations as new goals."""
    bad = sorted(v.surface for v in s if v.kind not in RIGID_KINDS)
    if bad:
        raise RuleError(
            'only gamma- and delta-plus variables may be instantiated: '
            + ', '.join(bad)
        )
    context = list(st.root) + st.sequents
    try:
        obligations = obligations_for(st.pair, s, context)
        pair = extended_sigma_update(st.pair, s)
    except KernelError as exc:
        logger.error(f'Rejected {format_substitution(s)}: {exc}')
        raise
    new_vars = obligation_vars(st.pair, s, context)
    goals = tuple(
        Goal(goal.id, apply_substitution_seq(goal.sequent, s))
        for goal in st.goals
    )
    root = tuple(apply_substitution_seq(seq, s) for seq in st.root)
    next_id = st.next_id
    added: List[Goal] = []
    for seq in obligations:
        added.append(Goal(next_id, seq))
        next_id += 1
    step = RuleStep(
        'instantiate',
        payload=format_substitution(s),
        new_goals=tuple(goal.id for goal in added),
        edges=tuple(sorted(
            pair.vc.edges - st.pair.vc.edges,
            key=edge_key,
        )),
        choices=tuple(v.surface for v in new_vars),
        obligations=tuple(format_sequent(seq) for seq in obligations),
    )
    return _record(
        st, step, goals=goals + tuple(added), root=root, pair=pair,
        next_id=next_id,
    )


# --- closing and lemmas ----------------------------------------------------


def _literal_key(f: Formula) -> Tuple[bool, object]:
    """Polarity and alpha key; equations are keyed up to symmetry."""
    positive = True
    while isinstance(f, Not):
        positive = not positive
        f = f.body
    if isinstance(f, Eq):
        keys = sorted([alpha_key(f.left), alpha_key(f.right)], key=repr)
        return positive, ('Eq', keys[0], keys[1])
    return positive, alpha_key(f)


def closing_reason(seq: Sequent) -> Optional[Tuple[str, str]]:
    """Why the sequent is an axiom, as a pair of printed formulas."""
    for f in seq:
        if isinstance(f, Truth) or (
            isinstance(f, Not) and isinstance(f.body, Falsity)
        ):
            return format_expr(f), format_expr(f)
        if isinstance(f, Eq) and alpha_key(f.left) == alpha_key(f.right):
            return format_expr(f), format_expr(f)
    seen: Dict[object, Formula] = {}
    for f in seq:
        positive, key = _literal_key(f)
        other = seen.get((not positive, key))
        if other is not None:
            return format_expr(other), format_expr(f)
        seen.setdefault((positive, key), f)
    return None


def close(st: ProofState, g: int) -> ProofState:
    goal = _goal(st, g)
    reason = closing_reason(goal.sequent)
    if reason is None:
        raise RuleError(
            f'goal {g} is not closed: {format_sequent(goal.sequent)}'
        )
    step = RuleStep('close', goal.id, closing=reason)
    return _record(st, step, goals=st.goals[:g - 1] + st.goals[g:])


def add_lemma(
    st: ProofState,
    name: str,
    g: Optional[int] = None,
    var: Optional[Var] = None,
) -> ProofState:
    """Use a valid formula as a tool: its conjugate is put in front of goal
    ``g`` (all goals without ``g``). With ``var`` the formula is the
    current Q_C obligation of that delta-plus variable."""
    if var is not None:
        (formula,) = build_QC(st.pair.cc, var)
        label = f'Q({var.surface})'
    elif name in st.lemmas:
        formula = st.lemmas[name]
        label = name
    else:
        raise RuleError(f'unknown lemma {name}')
    targets = range(1, len(st.goals) + 1) if g is None else [g]
    goals = list(st.goals)
    for index in targets:
        goal = _goal(st, index)
        goals[index - 1] = Goal(
            goal.id, (conjugate(formula),) + goal.sequent
        )
    step = RuleStep(
        'add_lemma', _goal(st, g).id if g is not None else None,
        payload=f'{label}: {format_expr(formula)}',
    )
    return _record(st, step, goals=tuple(goals))


# --- condition extensions --------------------------------------------------


def extend_choice(
    st: ProofState, y: Var, abstraction: Abstraction
) -> ProofState:
    """Add a choice-condition entry for a fresh delta-plus variable with the
    edges its condition requires."""
    if y.kind is not Kind.DELTA_PLUS:
        raise RuleError(f'{y.surface} is not a delta-plus variable')
    occurring = {v for seq in st.sequents for v in free_vars(seq)}
    if y in st.pair.cc or y in occurring:
        raise RuleError(f'{y.surface} is not fresh')
    edges = tuple(required_edges(y, abstraction))
    pair = extend(st.pair, {y: abstraction}, edges)
    step = RuleStep(
        'extend', payload=y.surface, edges=edges,
        choices=tuple(format_cc({y: abstraction})),
    )
    return _record(st, step, pair=pair)


def add_edge(st: ProofState, a: Var, b: Var) -> ProofState:
    try:
        pair = extend(st.pair, {}, [(a, b)])
    except KernelError as exc:
        logger.error(f'Rejected edge {a.surface} -> {b.surface}: {exc}')
        raise
    step = RuleStep('edge', payload=f'{a.surface} -> {b.surface}',
                    edges=((a, b),))
    return _record(st, step, pair=pair)


def declare_var(st: ProofState, surface: str, type_: Type) -> ProofState:
    variables = dict(st.variables)
    var = declare_variable(variables, surface, type_)
    step = RuleStep('var', payload=var.surface)
    return _record(st, step, variables=variables)


# --- scripts ---------------------------------------------------------------


def _elaborator(
    st: ProofState, variables: Dict[str, Var]
) -> Elaborator:
    def register(surface: str, type_: Type) -> Var:
        return declare_variable(variables, surface, type_)

    return Elaborator(st.signature, variables, register)


def _lookup(variables: Mapping[str, Var], surface: str) -> Var:
    split_free(surface)
    if surface not in variables:
        raise RuleError(f'undeclared free variable {surface}')
    return variables[surface]


def _run(  # noqa: PLR0911
    st: ProofState, command: ScriptCommand
) -> ProofState:
    variables = dict(st.variables)
    elaborator = _elaborator(st, variables)
    op = command.op
    g = command.goal or 0
    p = command.pos or 0
    if op == 'alpha':
        return apply_alpha(st, g, p)
    if op == 'beta':
        return apply_beta(st, g, p)
    if op == 'gamma':
        goal = _goal(st, g)
        f = _principal(goal, p)
        quantifier = f.body if isinstance(f, Not) else f
        if not isinstance(quantifier, (Exists, Forall)):
            raise _shape_error('gamma', f)
        assert command.term is not None
        t = elaborator.term(command.term, quantifier.var.type)
        return apply_gamma(replace(st, variables=variables), g, p, t)
    if op == 'delta-':
        return apply_delta_minus(st, g, p, command.name)
    if op == 'delta+':
        return apply_delta_plus(st, g, p, command.name)
    if op == 'inst':
        s: Dict[Var, Term] = {}
        for surface, raw in command.bindings:
            var = _lookup(st.variables, surface)
            s[var] = elaborator.term(raw, var.type)
        return instantiate(replace(st, variables=variables), s)
    if op == 'close':
        return close(st, g)
    if op == 'lemma':
        assert command.name is not None
        var = None
        if command.var is not None:
            var = _lookup(st.variables, command.var)
        return add_lemma(st, command.name, command.goal, var)
    if op == 'cut':
        assert command.term is not None
        f = elaborator.formula(command.term)
        return apply_cut(replace(st, variables=variables), g, f)
    if op == 'extend':
        assert command.var is not None and command.type is not None
        assert command.term is not None
        type_ = elaborator.type(command.type)
        y = declare_variable(variables, command.var, type_)
        abstraction = elaborator.abstraction(command.term)
        return extend_choice(replace(st, variables=variables), y, abstraction)
    if op == 'edge':
        assert command.edge is not None
        a = _lookup(st.variables, command.edge[0])
        b = _lookup(st.variables, command.edge[1])
        return add_edge(st, a, b)
    assert command.var is not None and command.type is not None
    return declare_var(st, command.var, elaborator.type(command.type))


def replay_script(
    problem: Problem,
    commands: Sequence[ScriptCommand],
    on_step: Optional[Callable[[ProofState], None]] = None,
) -> ProofState:
    """Apply the commands in order. The first failing command raises
    :class:`ScriptError` carrying its line and the state reached."""
    st = initial_state(problem)
    for command in commands:
        try:
            st = _run(st, command)
        except KernelError as exc:
            logger.error(f'Script line {command.line} failed: {exc}')
            raise ScriptError(str(exc), command.line, st) from exc
        st = replace(
            st, trace=st.trace[:-1] + (replace(st.trace[-1],
                                               line=command.line),)
        )
        if on_step is not None:
            on_step(st)
    logger.info(
        f'Replayed {len(commands)} commands: {st.closed} goals closed, '
        f'{len(st.goals)} open'
    )
    return st


# --- printing --------------------------------------------------------------


def format_step(step: RuleStep) -> str:
    parts = [step.rule]
    if step.goal is not None:
        parts.append(f'goal {step.goal}')
    if step.pos is not None:
        parts.append(f'pos {step.pos}')
    if step.payload:
        parts.append(step.payload)
    text = ' '.join(parts)
    if step.closing is not None:
        text += f' by {step.closing[0]} | {step.closing[1]}'
    return text


def format_state(st: ProofState) -> List[str]:
    lines = [
        f'goal {index}: {format_sequent(goal.sequent)}'
        for index, goal in enumerate(st.goals, start=1)
    ]
    if not lines:
        lines.append('no open goals')
    lines.extend(f'edge {edge}' for edge in format_edges(st.pair.vc))
    lines.extend(f'choice {entry}' for entry in format_cc(st.pair.cc))
    return lines

