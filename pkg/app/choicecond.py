"""Choice-conditions, their pairing with variable-conditions, and the
obligations an instantiation of a choice-conditioned variable incurs."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.exceptions import BindingError, ConditionError
from app.syntax import (
    App,
    Exists,
    Expr,
    Forall,
    Formula,
    Imp,
    Kind,
    Sequent,
    Term,
    Type,
    Var,
    apply,
    apply_substitution,
    binder_names,
    children,
    format_expr,
    format_type,
    format_unary,
    free_bound_vars,
    free_var_set,
    free_vars,
    fun_type,
    instantiate_bound,
    replace_term,
    sort_vars,
    split_type,
    unapply,
)
from app.varcond import (
    Edge,
    VariableCondition,
    check_r_substitution,
    find_cycle,
    reachable,
)


@dataclass(frozen=True)
class Abstraction:
    """``lambda v0 ... v(l-1). body`` with a formula body."""

    params: Tuple[Var, ...]
    body: Formula

    def __post_init__(self) -> None:
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise BindingError(
                f'duplicate parameter in abstraction: {", ".join(names)}'
            )
        loose = free_bound_vars(self.body) - set(self.params)
        if loose:
            raise BindingError(
                'unbound variables in abstraction body: '
                + ', '.join(sorted(v.name for v in loose))
            )

    @property
    def arity(self) -> int:
        return len(self.params)

    def instance(self, args: Sequence[Term]) -> Formula:
        """The body with the parameters replaced by ``args``."""
        body: Expr = self.body
        for param, arg in zip(self.params, args):
            body = instantiate_bound(body, param, arg)
        return body  # type: ignore[return-value]

    def substitute(self, s: Mapping[Var, Term]) -> 'Abstraction':
        if not s:
            return self
        body = apply_substitution(self.body, s)
        return Abstraction(self.params, body)  # type: ignore[arg-type]

    def format(self) -> str:
        if not self.params:
            return format_expr(self.body)
        head = ' '.join(
            f'lambda {p.name}:{format_type(p.type)}.' for p in self.params
        )
        return f'{head} {format_unary(self.body)}'


ChoiceCondition = Dict[Var, Abstraction]


@dataclass(frozen=True)
class CcPair:
    cc: Mapping[Var, Abstraction] = field(default_factory=dict)
    vc: VariableCondition = field(default_factory=VariableCondition)

    def variables(self) -> List[Var]:
        found = set(self.vc.variables()) | set(self.cc)
        for abstraction in self.cc.values():
            found |= free_var_set(abstraction.body)
        return sort_vars(found)


def application(y: Var, params: Sequence[Var]) -> Term:
    return apply(y, *params)


def _occurrence_violations(
    y: Var, abstraction: Abstraction
) -> List[str]:
    """Occurrences of ``y`` in the body that are not ``y(v0)...(vl-1)``."""
    params = list(abstraction.params)
    bad: List[str] = []

    def walk(node: Expr) -> None:
        if isinstance(node, App):
            head, args = unapply(node)
            if head == y:
                if args != params:
                    bad.append(format_expr(node))
                for arg in args:
                    walk(arg)
                return
        if node == y and params:
            bad.append(y.surface)
            return
        for kid in children(node):
            walk(kid)

    walk(abstraction.body)
    return [
        f'C({y.surface}): {text} is not the application of {y.surface} '
        f'to its parameters'
        for text in bad
    ]


def _shape_violations(y: Var, abstraction: Abstraction) -> List[str]:
    if y.kind is not Kind.DELTA_PLUS:
        return [f'{y.surface} is not a delta-plus variable']
    arg_types, _ = split_type(y.type)
    param_types = [p.type for p in abstraction.params]
    if len(param_types) > len(arg_types):
        return [
            f'C({y.surface}) has {len(param_types)} parameters but '
            f'{y.surface} takes {len(arg_types)} arguments'
        ]
    result = y.type
    for _ in param_types:
        result = result.res  # type: ignore[union-attr]
    if y.type != fun_type(param_types, result):
        expected = ', '.join(format_type(t) for t in arg_types)
        return [
            f'C({y.surface}) parameter types do not match {expected}'
        ]
    return _occurrence_violations(y, abstraction)


def validate_cc(
    c: Mapping[Var, Abstraction], r: VariableCondition
) -> List[str]:
    """Every violation of the choice-condition requirements, in a stable
    order; an empty list means ``c`` is an ``r``-choice-condition."""
    violations: List[str] = []
    cycle = find_cycle(r)
    if cycle is not None:
        violations.append(
            'variable-condition is cyclic: '
            + ' -> '.join(v.surface for v in cycle)
        )
    for y in sort_vars(c):
        abstraction = c[y]
        violations.extend(_shape_violations(y, abstraction))
        sources = reachable(r, [y])
        for z in sort_vars(free_var_set(abstraction.body)):
            if z not in sources:
                violations.append(
                    f'{z.surface} occurs in C({y.surface}) but has no path '
                    f'to {y.surface}'
                )
    return violations


def check_pair(pair: CcPair) -> CcPair:
    violations = validate_cc(pair.cc, pair.vc)
    if violations:
        cycle = find_cycle(pair.vc)
        raise ConditionError(
            violations,
            [v.surface for v in cycle] if cycle is not None else None,
        )
    return pair


def build_QC(c: Mapping[Var, Abstraction], y: Var) -> Sequent:
    """``all v. (ex y'. B{y(v) |-> y'} -> B)`` for ``C(y) = lambda v. B``."""
    if y not in c:
        raise ConditionError([f'{y.surface} has no choice-condition'])
    abstraction = c[y]
    body = abstraction.body
    result_type: Type = y.type
    for _ in abstraction.params:
        result_type = result_type.res  # type: ignore[union-attr]
    taken = binder_names(body) | {p.name for p in abstraction.params}
    name = y.name + "'"
    while name in taken:
        name += "'"
    witness = Var(name, Kind.BOUND, result_type)
    target = application(y, abstraction.params)
    renamed = replace_term(body, target, witness)
    formula: Formula = Imp(Exists(witness, renamed), body)  # type: ignore
    for param in reversed(abstraction.params):
        formula = Forall(param, formula)
    return (formula,)


def extend(
    pair: CcPair,
    entries: Optional[Mapping[Var, Abstraction]] = None,
    edges: Iterable[Edge] = (),
) -> CcPair:
    entries = entries or {}
    clashes = [
        y.surface for y, a in entries.items()
        if y in pair.cc and pair.cc[y] != a
    ]
    if clashes:
        raise ConditionError(
            [f'{name} already has a different choice-condition'
             for name in sorted(clashes)]
        )
    cc = dict(pair.cc)
    cc.update(entries)
    vc = pair.vc.add(edges)
    if vc is pair.vc and len(cc) == len(pair.cc):
        return pair
    return check_pair(CcPair(cc, vc))


def required_edges(y: Var, abstraction: Abstraction) -> List[Edge]:
    """(Vfree(C(y)) minus y) x {y}: the edges that make a new entry valid."""
    return [
        (z, y) for z in sort_vars(free_var_set(abstraction.body)) if z != y
    ]


def extended_sigma_update(pair: CcPair, s: Mapping[Var, Term]) -> CcPair:
    if not s:
        return pair
    vc = check_r_substitution(pair.vc, s)
    cc = {
        x: abstraction.substitute(s)
        for x, abstraction in pair.cc.items()
        if x not in s
    }
    return check_pair(CcPair(cc, vc))


def obligation_vars(
    pair: CcPair, s: Mapping[Var, Term], goals: Iterable[Sequent]
) -> List[Var]:
    flat = [f for seq in goals for f in seq]
    anchors = free_vars(flat, 'delta_plus')
    reach = reachable(pair.vc, anchors)
    return sort_vars(y for y in pair.cc if y in s and y in reach)


def obligations_for(
    pair: CcPair, s: Mapping[Var, Term], goals: Iterable[Sequent]
) -> List[Sequent]:
    """``(Q_C(y))s`` for every ``y`` in
    ``dom C & dom s & reachable(R, delta-plus variables of goals)``."""
    check_r_substitution(pair.vc, s)
    result: List[Sequent] = []
    for y in obligation_vars(pair, s, goals):
        (formula,) = build_QC(pair.cc, y)
        result.append((apply_substitution(formula, s),))  # type: ignore
    return result


def format_cc(c: Mapping[Var, Abstraction]) -> List[str]:
    return [f'{y.surface} := {c[y].format()}' for y in sort_vars(c)]
