"""Elimination of quantifiers and of epsilon/iota terms."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Literal, Optional, Set, Tuple

from app.choicecond import Abstraction, CcPair, extend, required_edges
from app.constants import PROJECTION_NAMES
from app.exceptions import TypeCheckError
from app.syntax import (
    BOOL,
    App,
    BaseType,
    Const,
    Eps,
    Exists,
    ExistsUnique,
    Expr,
    Forall,
    Formula,
    FunType,
    Iff,
    Imp,
    Iota,
    Kind,
    Lam,
    Not,
    Pred,
    Signature,
    Term,
    Var,
    _Binary,
    _Binder,
    alpha_key,
    apply,
    binder_names,
    children,
    depth,
    free_bound_vars,
    free_var_set,
    free_vars,
    fresh_numbered,
    fun_type,
    normalize_binders,
    rebuild,
    substitute,
)
from app.utils.logger import logger
from app.varcond import Edge

Order = Literal['inside_out', 'outside_in']


# --- classical elimination -------------------------------------------------


def _choice_for(q: _Binder) -> Eps:
    """``eps x. A`` for ``ex x. A`` and ``eps x. ~A`` for ``all x. A``."""
    if isinstance(q, Exists):
        return Eps(q.var, q.body)
    return Eps(q.var, Not(q.body))  # type: ignore[arg-type]


def _block(f: Expr) -> List[Var]:
    """Variables of the maximal run of same-kind quantifiers over one sort
    starting at ``f``."""
    assert isinstance(f, (Forall, Exists))
    cls = type(f)
    sort = f.var.type
    block: List[Var] = []
    node: Expr = f
    while (
        type(node) is cls
        and node.var.type == sort  # type: ignore[union-attr]
        and len(block) < len(PROJECTION_NAMES)
    ):
        block.append(node.var)  # type: ignore[union-attr]
        node = node.body  # type: ignore[union-attr]
    return block


class _Parallel:
    """Tuple sorts and projections for choosing a quantifier block at once.
    At most one tuple sort exists per signature."""

    def __init__(self, signature: Signature) -> None:
        self.signature = signature

    def tuple_sort(self, size: int, component: BaseType) -> BaseType:
        name = f'tuple{size}_{component.name}'
        products = self.signature.products
        if name in products:
            return self.signature.sorts[name]
        if products:
            raise TypeCheckError(
                f'parallel choice needs sort {name} but '
                f'{next(iter(products))} is already declared; only one '
                f'tuple sort is available'
            )
        return self.signature.declare_product(name, [component.name] * size)

    def projection(self, index: int, sort: BaseType, component: BaseType)\
            -> Const:
        return Const(PROJECTION_NAMES[index], FunType(sort, component))


def _eliminate_block(
    f: _Binder, body: Expr, block: List[Var], parallel: _Parallel
) -> Expr:
    """Replace the block's variables in ``body`` by projections of one
    choice over the tuple sort."""
    component = block[0].type
    assert isinstance(component, BaseType)
    sort = parallel.tuple_sort(len(block), component)
    taken = {v.name for v in free_bound_vars(body)} | binder_names(body)
    tuple_var = Var(fresh_numbered('v', taken), Kind.BOUND, sort)
    projected = {
        var: App(parallel.projection(i, sort, component), tuple_var)
        for i, var in enumerate(block)
    }
    matrix = substitute(body, projected)
    if isinstance(f, Exists):
        choice = Eps(tuple_var, matrix)
    else:
        choice = Eps(tuple_var, Not(matrix))  # type: ignore[arg-type]
    return substitute(matrix, {tuple_var: choice})


def classical_qelim(
    f: Formula,
    order: Order = 'inside_out',
    signature: Optional[Signature] = None,
) -> Formula:
    """Remove every quantifier with explicit epsilon-terms.

    With a ``signature``, blocks of at least two same-kind quantifiers over
    one base sort are chosen in parallel; the signature then gains the
    tuple sort and its projections.
    """
    parallel = _Parallel(signature) if signature is not None else None
    if order == 'inside_out':
        result = _inside_out(f, parallel)
    else:
        result = _outside_in(f, parallel, {})
    return normalize_binders(result)  # type: ignore[return-value]


def _quantifier_run(f: Expr, parallel: Optional[_Parallel]) -> List[Var]:
    if parallel is None:
        return [f.var]  # type: ignore[union-attr]
    block = _block(f)
    if len(block) < 2 or not isinstance(block[0].type, BaseType):
        return block[:1]
    return block


def _strip(f: Expr, count: int) -> Expr:
    for _ in range(count):
        f = f.body  # type: ignore[union-attr]
    return f


def _inside_out(f: Expr, parallel: Optional[_Parallel]) -> Expr:
    if isinstance(f, (Forall, Exists)):
        block = _quantifier_run(f, parallel)
        body = _inside_out(_strip(f, len(block)), parallel)
        if len(block) > 1 and parallel is not None:
            return _eliminate_block(f, body, block, parallel)
        choice = _choice_for(type(f)(f.var, body))
        return substitute(body, {f.var: choice})
    return rebuild(f, [_inside_out(k, parallel) for k in children(f)])


def _outside_in(
    f: Expr, parallel: Optional[_Parallel], memo: Dict[int, Tuple[Expr, Expr]]
) -> Expr:
    hit = memo.get(id(f))
    if hit is not None and hit[0] is f:
        return hit[1]
    result: Expr
    if isinstance(f, (Forall, Exists)):
        block = _quantifier_run(f, parallel)
        body = _strip(f, len(block))
        if len(block) > 1 and parallel is not None:
            step = _eliminate_block(f, body, block, parallel)
        else:
            step = substitute(body, {f.var: _choice_for(f)})
        result = _outside_in(step, parallel, memo)
    else:
        result = rebuild(
            f, [_outside_in(k, parallel, memo) for k in children(f)]
        )
    memo[id(f)] = (f, result)
    return result


def nesting_depth(e: Expr) -> int:
    """Deepest nesting of epsilon/iota binders, reading the term as a
    tree."""
    memo: Dict[int, Tuple[Expr, int]] = {}

    def walk(node: Expr) -> int:
        hit = memo.get(id(node))
        if hit is not None and hit[0] is node:
            return hit[1]
        inner = max((walk(k) for k in children(node)), default=0)
        value = inner + 1 if isinstance(node, (Eps, Iota)) else inner
        memo[id(node)] = (node, value)
        return value

    return walk(e)


def term_count(e: Expr) -> int:
    """Number of epsilon/iota binder occurrences in the tree reading."""
    memo: Dict[int, Tuple[Expr, int]] = {}

    def walk(node: Expr) -> int:
        hit = memo.get(id(node))
        if hit is not None and hit[0] is node:
            return hit[1]
        value = sum(walk(k) for k in children(node))
        if isinstance(node, (Eps, Iota)):
            value += 1
        memo[id(node)] = (node, value)
        return value

    return walk(e)


def subordinate_pairs(f: Expr) -> List[Tuple[Eps, Eps]]:
    """Pairs (outer, inner) of epsilon-terms where the inner one lies in
    the outer's body and contains the outer's bound variable freely."""
    pairs: List[Tuple[Eps, Eps]] = []
    seen: Set[Tuple[object, object]] = set()

    def inner_terms(node: Expr) -> List[Eps]:
        found: List[Eps] = []
        stack: List[Expr] = list(children(node))
        while stack:
            current = stack.pop()
            if isinstance(current, Eps):
                found.append(current)
            stack.extend(children(current))
        return found

    def walk(node: Expr) -> None:
        if isinstance(node, Eps):
            for inner in inner_terms(node):
                if node.var in free_bound_vars(inner):
                    key = (alpha_key(node), alpha_key(inner))
                    if key not in seen:
                        seen.add(key)
                        pairs.append((node, inner))
        for kid in children(node):
            walk(kid)

    walk(f)
    return pairs


# --- replacing choice terms by delta-plus variables -------------------------


@dataclass
class EliminationResult:
    formula: Formula
    pair: CcPair
    mapping: List[Tuple[Term, Term]] = field(default_factory=list)
    new_vars: List[Var] = field(default_factory=list)


def eliminate_choice_terms(
    f: Formula,
    pair: CcPair,
    taken: Iterable[str] = (),
    share: bool = True,
) -> EliminationResult:
    """Replace every epsilon- and iota-term, innermost first, by a fresh
    delta-plus variable applied to the enclosing bound variables it
    mentions, and record its choice-condition.

    With ``share`` alpha-equivalent terms over the same parameters get the
    same variable.
    """
    names = set(taken) | {v.name for v in free_var_set(f)}
    names |= {v.name for v in pair.variables()}
    table: Dict[object, Term] = {}
    entries: Dict[Var, Abstraction] = {}
    edges: List[Edge] = []
    result = EliminationResult(f, pair)

    def introduce(node: _Binder, body: Formula, outer: Tuple[Var, ...])\
            -> Term:
        loose = free_bound_vars(body) - {node.var}
        params = [v for v in outer if v in loose]
        key: object = None
        if share:
            wrapped: Expr = type(node)(node.var, body)
            for param in reversed(params):
                wrapped = Lam(param, wrapped)  # type: ignore[arg-type]
            key = (type(node).__name__, alpha_key(wrapped))
            if key in table:
                return table[key]
        name = fresh_numbered(node.var.name, names)
        names.add(name)
        y = Var(
            name, Kind.DELTA_PLUS,
            fun_type([p.type for p in params], node.var.type),
        )
        target = apply(y, *params)
        condition: Formula = substitute(  # type: ignore[assignment]
            body, {node.var: target}
        )
        if isinstance(node, Iota):
            condition = Imp(ExistsUnique(node.var, body), condition)
        abstraction = Abstraction(
            tuple(params),
            normalize_binders(  # type: ignore[arg-type]
                condition, [p.name for p in params]
            ),
        )
        entries[y] = abstraction
        edges.extend(required_edges(y, abstraction))
        result.new_vars.append(y)
        result.mapping.append((type(node)(node.var, body), target))
        if key is not None:
            table[key] = target
        return target

    def walk(node: Expr, outer: Tuple[Var, ...]) -> Expr:
        if isinstance(node, (Eps, Iota)):
            body = walk(node.body, outer + (node.var,))
            return introduce(node, body, outer)  # type: ignore[arg-type]
        if isinstance(node, _Binder):
            return type(node)(node.var, walk(node.body, outer + (node.var,)))
        return rebuild(node, [walk(k, outer) for k in children(node)])

    result.formula = walk(f, ())  # type: ignore[assignment]
    result.pair = extend(pair, entries, edges)
    logger.info(
        f'Replaced {len(result.mapping)} choice terms by '
        f'{len(result.new_vars)} delta-plus variables'
    )
    return result


# --- variable-condition reduction -------------------------------------------


@dataclass
class ReductionResult:
    formula: Formula
    pair: CcPair
    new_vars: List[Var] = field(default_factory=list)


def _first_quantifier(
    f: Expr, positive: bool
) -> Optional[Tuple[_Binder, bool]]:
    """Leftmost-outermost quantifier reachable through connectives, with
    its polarity."""
    if isinstance(f, (Forall, Exists)):
        return f, positive
    if isinstance(f, Not):
        return _first_quantifier(f.body, not positive)
    if isinstance(f, Imp):
        return _first_quantifier(f.left, not positive) or \
            _first_quantifier(f.right, positive)
    if isinstance(f, _Binary) and not isinstance(f, Iff):
        return _first_quantifier(f.left, positive) or \
            _first_quantifier(f.right, positive)
    return None


def _replace_node(f: Expr, target: Expr, replacement: Expr) -> Expr:
    if f is target:
        return replacement
    if isinstance(f, (Not, _Binary)):
        return rebuild(
            f, [_replace_node(k, target, replacement) for k in children(f)]
        )
    return f


def vc_reduction(
    f: Formula, pair: CcPair, taken: Iterable[str] = ()
) -> ReductionResult:
    """Replace quantifiers reachable through connectives by free variables:
    gamma-quantifiers by gamma-variables, delta-quantifiers by delta-minus
    variables that depend on every rigid variable present."""
    names = set(taken) | {v.name for v in free_var_set(f)}
    names |= {v.name for v in pair.variables()}
    edges: List[Edge] = []
    result = ReductionResult(f, pair)
    current: Expr = f
    while True:
        found = _first_quantifier(current, True)
        if found is None:
            break
        q, positive = found
        is_delta = isinstance(q, Forall) == positive
        name = fresh_numbered(q.var.name, names)
        names.add(name)
        kind = Kind.DELTA_MINUS if is_delta else Kind.GAMMA
        new = Var(name, kind, q.var.type)
        if is_delta:
            edges.extend(
                (z, new) for z in free_vars(current, 'gamma_delta_plus')
            )
        body = substitute(q.body, {q.var: new})
        current = _replace_node(current, q, body)
        result.new_vars.append(new)
    result.formula = current  # type: ignore[assignment]
    result.pair = extend(pair, {}, edges)
    return result


# --- prenex families for metrics ---------------------------------------------


def prenex_problem(n: int) -> Tuple[Signature, Formula]:
    """``all x1. ex x2. all x3. ... P(x1, ..., xn)`` over sort ``i``."""
    signature = Signature()
    sort = signature.declare_sort('i')
    signature.declare_const('P', fun_type([sort] * n, BOOL))
    variables = [Var(f'x{k}', Kind.BOUND, sort) for k in range(1, n + 1)]
    formula: Formula = Pred('P', tuple(variables))
    for index in reversed(range(n)):
        cls = Forall if index % 2 == 0 else Exists
        formula = cls(variables[index], formula)
    return signature, formula


@dataclass(frozen=True)
class MetricsRow:
    quantifiers: int
    depth: int
    terms: int
    orders_agree: bool
    reduction_depth_growth: int


def quantifier_count(e: Expr) -> int:
    count = 0
    stack: List[Expr] = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, (Forall, Exists, ExistsUnique)):
            count += 1
        stack.extend(children(node))
    return count


def formula_metrics(f: Formula) -> MetricsRow:
    """Tree metrics of classical elimination of ``f`` in both orders and
    the depth change of variable-condition reduction."""
    inside = classical_qelim(f, 'inside_out')
    outside = classical_qelim(f, 'outside_in')
    reduced = vc_reduction(f, CcPair())
    return MetricsRow(
        quantifier_count(f),
        nesting_depth(inside),
        term_count(inside),
        inside == outside,
        depth(reduced.formula) - depth(f),
    )


def metrics(max_n: int = 4) -> List[MetricsRow]:
    """One row per alternating prenex size."""
    return [formula_metrics(prenex_problem(n)[1]) for n in range(1, max_n + 1)]
