"""Brute-force semantics over small finite structures.

Free gamma-variables get their values from a raising table ``e`` reading
delta-variables; free delta-plus-variables get theirs from a table ``pi``
reading delta-minus-variables. Both tables are searched lazily, cell by
cell, under the reading relations that keep the variable-condition
acyclic.
"""

import itertools
from dataclasses import dataclass, field
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from app.choicecond import Abstraction, CcPair
from app.constants import (
    BOOL_SORT,
    MAX_DELTA_MINUS,
    MAX_DELTA_PLUS,
    MAX_GAMMA,
    MAX_TABLES,
    MAX_UNIVERSE,
    PROJECTION_NAMES,
    VARIANT,
    Notion,
    Variant,
)
from app.exceptions import CapExceededError, OracleError
from app.parser import Element, StructureDecl
from app.syntax import (
    And,
    App,
    Const,
    Eq,
    Exists,
    ExistsUnique,
    Expr,
    Falsity,
    Forall,
    Formula,
    FunType,
    Iff,
    Imp,
    Kind,
    Lam,
    Not,
    Or,
    Pred,
    Sequent,
    Signature,
    Term,
    Truth,
    Type,
    Var,
    format_expr,
    free_var_set,
    is_term,
    sort_vars,
    split_type,
    type_of,
    unapply,
)
from app.utils.logger import logger
from app.utils.relations import (
    Relation,
    Valuation,
    Value,
    all_relations,
    candidate_edges,
    is_acyclic_with,
    maximal_relations,
    sources_of,
    valuations,
)
from app.utils.search import (
    Budget,
    Cell,
    Cells,
    MissingCell,
    Task,
    holds_everywhere,
    solve,
)
from app.varcond import VariableCondition

Table = Dict[Tuple[Value, ...], Value]


# --- structures ------------------------------------------------------------


@dataclass
class FiniteStructure:
    signature: Signature
    universes: Dict[str, Tuple[Element, ...]]
    tables: Dict[str, Table]
    _domains: Dict[Type, Tuple[Value, ...]] = field(
        default_factory=dict, repr=False
    )
    _indexes: Dict[Type, Dict[Value, int]] = field(
        default_factory=dict, repr=False
    )
    _curried: Dict[str, Value] = field(default_factory=dict, repr=False)

    def domain(self, t: Type) -> Tuple[Value, ...]:
        if t not in self._domains:
            self._domains[t] = self._build_domain(t)
        return self._domains[t]

    def _build_domain(self, t: Type) -> Tuple[Value, ...]:
        if isinstance(t, FunType):
            args = self.domain(t.arg)
            results = self.domain(t.res)
            size = len(results) ** len(args)
            if size > MAX_TABLES:
                raise CapExceededError('EPSK_MAX_TABLES', MAX_TABLES, size)
            return tuple(itertools.product(results, repeat=len(args)))
        if t.name == BOOL_SORT:
            return (False, True)
        components = self.signature.products.get(t.name)
        if components is not None:
            return tuple(
                itertools.product(*(self.universes[c] for c in components))
            )
        return self.universes[t.name]

    def index(self, t: Type, value: Value) -> int:
        if t not in self._indexes:
            self._indexes[t] = {v: i for i, v in enumerate(self.domain(t))}
        return self._indexes[t][value]

    def call(self, arg_type: Type, fun: Value, arg: Value) -> Value:
        return fun[self.index(arg_type, arg)]  # type: ignore[index]

    def _projection(self, name: str) -> Optional[int]:
        for components in self.signature.products.values():
            if name in PROJECTION_NAMES[:len(components)]:
                return PROJECTION_NAMES.index(name)
        return None

    def lookup(self, name: str, args: Tuple[Value, ...]) -> Value:
        """The value of constant ``name`` applied to all its arguments."""
        position = self._projection(name)
        if position is not None:
            return args[0][position]  # type: ignore[index]
        return self.tables[name][args]

    def constant(self, name: str) -> Value:
        """The curried value of constant ``name``."""
        if name not in self._curried:
            arg_types, _ = split_type(self.signature.constants[name])
            self._curried[name] = self._curry(name, arg_types, ())
        return self._curried[name]

    def _curry(
        self, name: str, arg_types: Sequence[Type], given: Tuple[Value, ...]
    ) -> Value:
        if not arg_types:
            return self.lookup(name, given)
        return tuple(
            self._curry(name, arg_types[1:], (*given, value))
            for value in self.domain(arg_types[0])
        )

    def describe(self) -> str:
        parts = [
            f'universe {sort} = {{{", ".join(map(format_value, elems))}}}'
            for sort, elems in self.universes.items()
        ]
        for name in sorted(self.tables):
            table = self.tables[name]
            if self.signature.is_predicate(name):
                rows = [
                    '(' + ', '.join(map(format_value, args)) + ')'
                    for args, holds in table.items() if holds
                ]
                parts.append(f'pred {name} = {{{", ".join(rows)}}}')
            elif () in table:
                parts.append(f'const {name} = {format_value(table[()])}')
            else:
                rows = [
                    '(' + ', '.join(map(format_value, args)) + ') -> '
                    + format_value(value)
                    for args, value in table.items()
                ]
                parts.append(f'fun {name} = {{{", ".join(rows)}}}')
        return '; '.join(parts)


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return 'T' if value else 'F'
    if isinstance(value, tuple):
        return '<' + ', '.join(map(format_value, value)) + '>'
    return str(value)


def _symbols(signature: Signature) -> List[str]:
    projections = {
        PROJECTION_NAMES[index]
        for components in signature.products.values()
        for index in range(len(components))
    }
    return [name for name in signature.constants if name not in projections]


def _base_sorts(signature: Signature) -> List[str]:
    return [s for s in signature.sorts if s not in signature.products]


def _check_universes(
    signature: Signature, universes: Mapping[str, Sequence[Element]]
) -> Dict[str, Tuple[Element, ...]]:
    for sort in universes:
        if sort not in signature.sorts:
            raise OracleError(f'universe for undeclared sort {sort}')
        if sort in signature.products:
            raise OracleError(
                f'universe of product sort {sort} is derived from its '
                f'components'
            )
    result: Dict[str, Tuple[Element, ...]] = {}
    for sort in _base_sorts(signature):
        if sort not in universes:
            raise OracleError(f'no universe given for sort {sort}')
        elems = tuple(universes[sort])
        if not elems:
            raise OracleError(f'universe of {sort} is empty')
        if len(elems) > MAX_UNIVERSE:
            raise CapExceededError('EPSK_MAX_UNIVERSE', MAX_UNIVERSE,
                                   len(elems))
        if len(set(elems)) != len(elems):
            raise OracleError(f'universe of {sort} repeats an element')
        if not all(isinstance(e, str) for e in elems):
            raise OracleError(f'universe of {sort} must list plain names')
        result[sort] = elems
    return result


def _arg_space(
    st: FiniteStructure, name: str
) -> Tuple[List[Tuple[Value, ...]], Tuple[Value, ...]]:
    arg_types, res = split_type(st.signature.constants[name])
    arg_rows = list(itertools.product(*(st.domain(t) for t in arg_types)))
    return arg_rows, st.domain(res)


def _explicit_table(
    st: FiniteStructure, name: str, decl: StructureDecl
) -> Table:
    arg_types, _ = split_type(st.signature.constants[name])
    if any(isinstance(t, FunType) for t in arg_types):
        raise OracleError(
            f'{name} has a higher-order type; leave it open with ?'
        )
    rows, results = _arg_space(st, name)
    allowed = set(rows)
    if st.signature.is_predicate(name):
        entries = decl.predicates[name] or []
        for entry in entries:
            if tuple(entry) not in allowed:
                raise OracleError(
                    f'pred {name}: {format_value(tuple(entry))} is not a '
                    f'tuple of {len(arg_types)} universe elements'
                )
        chosen = {tuple(entry) for entry in entries}
        return {row: row in chosen for row in rows}
    table: Table = {}
    for args, value in decl.functions[name] or []:
        if tuple(args) not in allowed:
            raise OracleError(
                f'fun {name}: bad argument {format_value(tuple(args))}'
            )
        if value not in results:
            raise OracleError(
                f'fun {name}: {format_value(value)} is not in the universe'
            )
        if table.get(tuple(args), value) != value:
            raise OracleError(
                f'fun {name} maps {format_value(tuple(args))} twice'
            )
        table[tuple(args)] = value
    missing = [row for row in rows if row not in table]
    if missing:
        raise OracleError(
            f'fun {name} is not total: no value at '
            f'{format_value(missing[0])}'
        )
    return table


def _open_tables(st: FiniteStructure, name: str) -> List[Table]:
    rows, results = _arg_space(st, name)
    count = len(results) ** len(rows)
    if count > MAX_TABLES:
        raise CapExceededError('EPSK_MAX_TABLES', MAX_TABLES, count)
    return [
        dict(zip(rows, values))
        for values in itertools.product(results, repeat=len(rows))
    ]


def structures_from_decl(
    signature: Signature, decl: StructureDecl
) -> List[FiniteStructure]:
    """Every completion of ``decl``; open symbols range over all tables."""
    universes = _check_universes(signature, decl.universes)
    symbols = _symbols(signature)
    for name in [*decl.predicates, *decl.functions]:
        if name not in symbols:
            raise OracleError(f'interpretation of undeclared symbol {name}')
    skeleton = FiniteStructure(signature, universes, {})
    options: List[List[Table]] = []
    for name in symbols:
        as_pred = name in decl.predicates
        if not as_pred and name not in decl.functions:
            raise OracleError(f'no interpretation given for {name}')
        if as_pred != signature.is_predicate(name):
            kind = 'pred' if signature.is_predicate(name) else 'fun or const'
            raise OracleError(f'{name} must be given as {kind}')
        entries = (
            decl.predicates[name] if as_pred else decl.functions[name]
        )
        if entries is None:
            options.append(_open_tables(skeleton, name))
        else:
            options.append([_explicit_table(skeleton, name, decl)])
    count = 1
    for choices in options:
        count *= len(choices)
    if count > MAX_TABLES:
        raise CapExceededError('EPSK_MAX_TABLES', MAX_TABLES, count)
    return [
        FiniteStructure(signature, universes, dict(zip(symbols, tables)))
        for tables in itertools.product(*options)
    ]


def all_structures(
    signature: Signature, max_size: int
) -> List[FiniteStructure]:
    """All structures whose base sorts have between 1 and ``max_size``
    elements, named ``<sort><k>``."""
    if max_size > MAX_UNIVERSE:
        raise CapExceededError('EPSK_MAX_UNIVERSE', MAX_UNIVERSE, max_size)
    sorts = _base_sorts(signature)
    symbols = _symbols(signature)
    result: List[FiniteStructure] = []
    for sizes in itertools.product(range(1, max_size + 1), repeat=len(sorts)):
        decl = StructureDecl(
            universes={
                sort: [f'{sort}{k}' for k in range(size)]
                for sort, size in zip(sorts, sizes)
            },
            predicates={
                n: None for n in symbols if signature.is_predicate(n)
            },
            functions={
                n: None for n in symbols if not signature.is_predicate(n)
            },
        )
        result.extend(structures_from_decl(signature, decl))
        if len(result) > MAX_TABLES:
            raise CapExceededError('EPSK_MAX_TABLES', MAX_TABLES, len(result))
    return result


# --- evaluation ------------------------------------------------------------


class _Evaluator:
    def __init__(
        self,
        st: FiniteStructure,
        lookup: Callable[[Var], Value],
        bound: Optional[Mapping[Var, Value]] = None,
    ) -> None:
        self.st = st
        self.lookup = lookup
        self.bound: Dict[Var, Value] = dict(bound or {})

    def value(self, e: Expr) -> Value:
        if is_term(e):
            return self.term(e)  # type: ignore[arg-type]
        return self.formula(e)  # type: ignore[arg-type]

    def var(self, v: Var) -> Value:
        if v.kind is Kind.BOUND:
            if v in self.bound:
                return self.bound[v]
            raise OracleError(f'unbound variable {v.name}')
        return self.lookup(v)

    def _scan(self, v: Var, body: Expr) -> List[Value]:
        """Values of ``body`` for every value of ``v``, in domain order."""
        previous = self.bound.get(v, _UNSET)
        try:
            result = []
            for value in self.st.domain(v.type):
                self.bound[v] = value
                result.append(self.value(body))
            return result
        finally:
            self._restore(v, previous)

    def _search(self, v: Var, body: Formula, stop: bool) -> bool:
        """``stop`` as soon as ``body`` has value ``stop``, else its
        negation."""
        previous = self.bound.get(v, _UNSET)
        try:
            for value in self.st.domain(v.type):
                self.bound[v] = value
                if self.formula(body) is stop:
                    return stop
            return not stop
        finally:
            self._restore(v, previous)

    def _restore(self, v: Var, previous: object) -> None:
        if previous is _UNSET:
            self.bound.pop(v, None)
        else:
            self.bound[v] = previous

    def term(self, t: Term) -> Value:
        if isinstance(t, Var):
            return self.var(t)
        if isinstance(t, Const):
            return self.st.constant(t.name)
        if isinstance(t, App):
            head, args = unapply(t)
            if isinstance(head, Const) and len(args) == len(
                split_type(head.type)[0]
            ):
                return self.st.lookup(
                    head.name, tuple(self.term(a) for a in args)
                )
            return self.st.call(
                type_of(t.arg), self.term(t.fun), self.term(t.arg)
            )
        if isinstance(t, Lam):
            return tuple(self._scan(t.var, t.body))
        raise OracleError(
            f'{format_expr(t)} must be eliminated before evaluation'
        )

    def formula(self, f: Formula) -> bool:  # noqa: PLR0911, PLR0912
        if isinstance(f, Pred):
            return bool(
                self.st.lookup(f.name, tuple(self.term(a) for a in f.args))
            )
        if isinstance(f, Eq):
            return self.term(f.left) == self.term(f.right)
        if isinstance(f, Not):
            return not self.formula(f.body)
        if isinstance(f, And):
            return self.formula(f.left) and self.formula(f.right)
        if isinstance(f, Or):
            return self.formula(f.left) or self.formula(f.right)
        if isinstance(f, Imp):
            return not self.formula(f.left) or self.formula(f.right)
        if isinstance(f, Iff):
            return self.formula(f.left) == self.formula(f.right)
        if isinstance(f, Truth):
            return True
        if isinstance(f, Falsity):
            return False
        if isinstance(f, Forall):
            return self._search(f.var, f.body, False)
        if isinstance(f, Exists):
            return self._search(f.var, f.body, True)
        if isinstance(f, ExistsUnique):
            return self._scan(f.var, f.body).count(True) == 1
        raise OracleError(f'cannot evaluate {format_expr(f)}')

    def sequents(self, goals: Iterable[Sequent]) -> bool:
        return all(any(self.formula(f) for f in seq) for seq in goals)


_UNSET = object()


def evaluate(st: FiniteStructure, v: Mapping[Var, Value], e: Expr) -> Value:
    """Classical value of ``e``; every free variable must be in ``v``."""

    def lookup(var: Var) -> Value:
        if var not in v:
            raise OracleError(f'unbound variable {var.surface}')
        return v[var]

    return _Evaluator(st, lookup).value(e)


# --- raising tables --------------------------------------------------------


@dataclass(frozen=True)
class RaisingTable:
    """A semantical relation plus, per target, a table from the values of
    the target's sources (in ``sources`` order) to the target's value."""

    relation: Relation
    tables: Mapping[Var, Table]

    def sources(self, x: Var) -> Tuple[Var, ...]:
        return sources_of(self.relation, [x])[x]

    @property
    def targets(self) -> List[Var]:
        return sort_vars(self.tables)

    def cells(self) -> Dict[Cell, Value]:
        return {
            (x, key): value
            for x, table in self.tables.items()
            for key, value in table.items()
        }

    def format(self) -> List[str]:
        lines = []
        for x in self.targets:
            names = ', '.join(s.surface for s in self.sources(x))
            rows = ', '.join(
                '(' + ', '.join(map(format_value, key)) + ') -> '
                + format_value(value)
                for key, value in self.tables[x].items()
            )
            lines.append(f'{x.surface}[{names}] = {{{rows}}}')
        return lines


EMPTY_TABLE = RaisingTable(frozenset(), {})


def epsilon_apply(t: RaisingTable, v: Mapping[Var, Value], x: Var) -> Value:
    if x not in t.tables:
        raise OracleError(f'{x.surface} is not a target of the table')
    sources = t.sources(x)
    missing = [s.surface for s in sources if s not in v]
    if missing:
        raise OracleError(
            f'missing values for {", ".join(missing)} to read '
            f'{x.surface}'
        )
    return t.tables[x][tuple(v[s] for s in sources)]


def _table_keys(
    st: FiniteStructure,
    targets: Sequence[Var],
    sources: Mapping[Var, Tuple[Var, ...]],
) -> List[Tuple[Var, Tuple[Value, ...]]]:
    return [
        (x, key)
        for x in targets
        for key in itertools.product(*(st.domain(s.type) for s in sources[x]))
    ]


def _count_tables(
    st: FiniteStructure,
    targets: Sequence[Var],
    sources: Mapping[Var, Tuple[Var, ...]],
) -> int:
    count = 1
    for x, _ in _table_keys(st, targets, sources):
        count *= len(st.domain(x.type))
    return count


def _tables(
    st: FiniteStructure,
    relation: Relation,
    targets: Sequence[Var],
) -> Iterator[RaisingTable]:
    sources = sources_of(relation, targets)
    keys = _table_keys(st, targets, sources)
    spaces = [st.domain(x.type) for x, _ in keys]
    for values in itertools.product(*spaces):
        tables: Dict[Var, Table] = {x: {} for x in targets}
        for (x, key), value in zip(keys, values):
            tables[x][key] = value
        yield RaisingTable(relation, tables)


def enumerate_e(
    st: FiniteStructure,
    r: VariableCondition,
    gamma_vars: Sequence[Var],
    delta_vars: Sequence[Var],
) -> Iterator[RaisingTable]:
    """Every raising table for ``gamma_vars`` reading ``delta_vars`` whose
    relation keeps ``r`` acyclic, once per relation and table.

    Relations are generated lazily; the table cap is checked against the
    running count before each relation's tables are produced."""
    gammas = sort_vars(gamma_vars)
    candidates = candidate_edges(gammas, sort_vars(delta_vars))
    total = 0
    for relation in all_relations(r, candidates):
        total += _count_tables(st, gammas, sources_of(relation, gammas))
        if total > MAX_TABLES:
            raise CapExceededError('EPSK_MAX_TABLES', MAX_TABLES, total)
        yield from _tables(st, relation, gammas)


# --- semantic setting ------------------------------------------------------


@dataclass
class _Setting:
    """Which variables a search valuates directly (``taus``) and which it
    reads through table cells (``sources``)."""

    st: FiniteStructure
    cc: Mapping[Var, Abstraction]
    taus: List[Var]
    plus: List[Var]
    sources: Dict[Var, Tuple[Var, ...]]

    def tau_space(self) -> List[Valuation]:
        return list(valuations(self.taus, self.st.domain))

    def resolver(
        self,
        cells: Cells,
        tau: Mapping[Var, Value],
        override: Mapping[Var, Value],
    ) -> Callable[[Var], Value]:
        cache: Dict[Var, Value] = {}

        def value(v: Var) -> Value:
            if v in override:
                return override[v]
            if v in tau:
                return tau[v]
            if v in cache:
                return cache[v]
            if v not in self.sources:
                raise OracleError(f'no value for {v.surface}')
            key = tuple(value(s) for s in self.sources[v])
            cache[v] = cells.get((v, key), self.st.domain(v.type))
            return cache[v]

        return value

    def goal_task(
        self, goals: Sequence[Sequent], tau: Valuation, expect: bool = True
    ) -> Task:
        def task(cells: Cells) -> bool:
            ev = _Evaluator(self.st, self.resolver(cells, tau, {}))
            return ev.sequents(goals) is expect

        return task

    def compat_tasks(self, tau: Valuation) -> List[Task]:
        tasks: List[Task] = []
        for y in self.plus:
            if y not in self.cc:
                continue
            abstraction = self.cc[y]
            for eta in self.st.domain(y.type):
                for chi in valuations(abstraction.params, self.st.domain):
                    tasks.append(
                        self._compat_task(y, abstraction.body, tau, eta, chi)
                    )
        return tasks

    def _compat_task(
        self,
        y: Var,
        body: Formula,
        tau: Valuation,
        eta: Value,
        chi: Valuation,
    ) -> Task:
        def task(cells: Cells) -> bool:
            varied = _Evaluator(
                self.st, self.resolver(cells, tau, {y: eta}), chi
            )
            if not varied.formula(body):
                return True
            plain = _Evaluator(self.st, self.resolver(cells, tau, {}), chi)
            return plain.formula(body)

        return task


def _relevant(goals: Iterable[Sequent], pair: CcPair) -> List[Var]:
    """Free variables of ``goals`` closed under the choice-conditions of
    the delta-plus-variables among them."""
    found = free_var_set([f for seq in goals for f in seq])
    pending = [v for v in found if v in pair.cc]
    while pending:
        y = pending.pop()
        for z in free_var_set(pair.cc[y].body):
            if z not in found:
                found.add(z)
                if z in pair.cc:
                    pending.append(z)
    return sort_vars(found)


def _by_kind(variables: Iterable[Var], kind: Kind) -> List[Var]:
    return sort_vars(v for v in variables if v.kind is kind)


def _check_caps(variables: Sequence[Var]) -> None:
    caps = [
        ('EPSK_MAX_GAMMA', MAX_GAMMA, Kind.GAMMA),
        ('EPSK_MAX_DELTA_PLUS', MAX_DELTA_PLUS, Kind.DELTA_PLUS),
        ('EPSK_MAX_DELTA_MINUS', MAX_DELTA_MINUS, Kind.DELTA_MINUS),
    ]
    for cap, bound, kind in caps:
        count = len(_by_kind(variables, kind))
        if count > bound:
            logger.error(f'Oracle cap {cap} exceeded by {count} variables')
            raise CapExceededError(cap, bound, count)


@dataclass
class _Vars:
    minus: List[Var]
    plus: List[Var]
    gammas: List[Var]

    @classmethod
    def of(cls, variables: Sequence[Var]) -> '_Vars':
        _check_caps(variables)
        return cls(
            _by_kind(variables, Kind.DELTA_MINUS),
            _by_kind(variables, Kind.DELTA_PLUS),
            _by_kind(variables, Kind.GAMMA),
        )

    def e_candidates(self) -> List[Tuple[Var, Var]]:
        return candidate_edges(self.gammas, self.minus + self.plus)

    def pi_candidates(self) -> List[Tuple[Var, Var]]:
        return candidate_edges(self.plus, self.minus)

    def setting(
        self, st: FiniteStructure, cc: Mapping[Var, Abstraction],
        relation: Relation,
    ) -> _Setting:
        targets = self.gammas + self.plus
        return _Setting(
            st, cc, self.minus, self.plus, sources_of(relation, targets)
        )


def _split(
    st: FiniteStructure,
    setting: _Setting,
    relation: Relation,
    cells: Mapping[Cell, Value],
) -> Tuple[RaisingTable, RaisingTable]:
    """Total e and pi tables from solved cells; unread cells are filled
    with the first element of their domain."""
    plus = set(setting.plus)
    e_tables: Dict[Var, Table] = {}
    pi_tables: Dict[Var, Table] = {}
    targets = sort_vars(setting.sources)
    for x, key in _table_keys(st, targets, setting.sources):
        value = cells.get((x, key), st.domain(x.type)[0])
        (pi_tables if x in plus else e_tables).setdefault(x, {})[key] = value
    e_rel = frozenset(edge for edge in relation if edge[1] not in plus)
    pi_rel = frozenset(edge for edge in relation if edge[1] in plus)
    return RaisingTable(e_rel, e_tables), RaisingTable(pi_rel, pi_tables)


# --- validity --------------------------------------------------------------


def find_witness(
    goals: Sequence[Sequent],
    pair: CcPair,
    st: FiniteStructure,
    budget: Optional[Budget] = None,
) -> Optional[Tuple[RaisingTable, RaisingTable]]:
    """Some ``e`` and compatible ``pi`` making ``goals`` valid for every
    delta-minus valuation, or None."""
    budget = budget or Budget()
    kinds = _Vars.of(_relevant(goals, pair))
    candidates = kinds.e_candidates() + kinds.pi_candidates()
    for relation in maximal_relations(pair.vc, candidates):
        setting = kinds.setting(st, pair.cc, relation)
        tasks: List[Task] = []
        for tau in setting.tau_space():
            tasks.extend(setting.compat_tasks(tau))
            tasks.append(setting.goal_task(goals, tau))
        cells = solve(tasks, budget=budget)
        if cells is not None:
            return _split(st, setting, relation, cells)
    return None


def _pi_counterexample(
    setting: _Setting,
    goals: Sequence[Sequent],
    e_cells: Dict[Cell, Value],
    budget: Budget,
) -> bool:
    """Whether some compatible pi falsifies ``goals`` at some valuation."""
    taus = setting.tau_space()
    for bad in taus:
        tasks = setting.compat_tasks(bad)
        tasks.append(setting.goal_task(goals, bad, expect=False))
        for tau in taus:
            if tau != bad:
                tasks.extend(setting.compat_tasks(tau))
        if solve(tasks, e_cells, budget) is not None:
            return True
    return False


def _any_pi_valid(
    goals: Sequence[Sequent],
    pair: CcPair,
    st: FiniteStructure,
    budget: Budget,
) -> bool:
    kinds = _Vars.of(_relevant(goals, pair))
    for e_relation in maximal_relations(pair.vc, kinds.e_candidates()):
        pi_relations = maximal_relations(
            pair.vc.add(e_relation), kinds.pi_candidates()
        )
        sources = sources_of(e_relation, kinds.gammas)
        count = _count_tables(st, kinds.gammas, sources)
        if count > MAX_TABLES:
            raise CapExceededError('EPSK_MAX_TABLES', MAX_TABLES, count)
        for e in _tables(st, e_relation, kinds.gammas):
            e_cells = e.cells()
            if not any(
                _pi_counterexample(
                    kinds.setting(st, pair.cc, e_relation | pi_relation),
                    goals, e_cells, budget,
                )
                for pi_relation in pi_relations
            ):
                return True
    return False


def is_cr_valid(
    g: Sequence[Sequent],
    pair: CcPair,
    st: FiniteStructure,
    variant: Variant = VARIANT,
) -> bool:
    """(C,R)-validity: some ``e`` and some (``variant='some'``) or every
    (``variant='any'``) compatible ``pi`` make ``g`` valid."""
    budget = Budget()
    if variant == 'some':
        return find_witness(g, pair, st, budget) is not None
    return _any_pi_valid(g, pair, st, budget)


def is_r_valid(
    g: Sequence[Sequent], r: VariableCondition, st: FiniteStructure
) -> bool:
    """R-validity: some ``e`` makes ``g`` valid under every valuation of
    the delta-variables; delta-plus-variables count as delta-variables."""
    budget = Budget()
    kinds = _Vars.of(_relevant(g, CcPair()))
    deltas = kinds.minus + kinds.plus
    for relation in maximal_relations(
        r, candidate_edges(kinds.gammas, deltas)
    ):
        setting = _Setting(
            st, {}, deltas, [], sources_of(relation, kinds.gammas)
        )
        tasks = [setting.goal_task(g, tau) for tau in setting.tau_space()]
        if solve(tasks, budget=budget) is not None:
            return True
    return False


def is_valid(
    g: Sequence[Sequent],
    pair: CcPair,
    st: FiniteStructure,
    variant: Variant = VARIANT,
    notion: Notion = 'cr',
) -> bool:
    if notion == 'r':
        return is_r_valid(g, pair.vc, st)
    return is_cr_valid(g, pair, st, variant)


def reduces_check(
    g0: Sequence[Sequent],
    g1: Sequence[Sequent],
    pair: CcPair,
    st: FiniteStructure,
) -> bool:
    """Whether ``g0`` reduces to ``g1``: every ``e`` and compatible ``pi``
    that make ``g1`` valid make ``g0`` valid."""
    budget = Budget()
    kinds = _Vars.of(_relevant([*g0, *g1], pair))
    candidates = kinds.e_candidates() + kinds.pi_candidates()
    for relation in maximal_relations(pair.vc, candidates):
        setting = kinds.setting(st, pair.cc, relation)
        taus = setting.tau_space()
        for bad in taus:
            tasks = setting.compat_tasks(bad)
            tasks.append(setting.goal_task(g0, bad, expect=False))
            tasks.append(setting.goal_task(g1, bad))
            for tau in taus:
                if tau != bad:
                    tasks.extend(setting.compat_tasks(tau))
                    tasks.append(setting.goal_task(g1, tau))
            if solve(tasks, budget=budget) is not None:
                return False
    return True


# --- compatibility ---------------------------------------------------------


def _table_setting(
    st: FiniteStructure,
    pair: CcPair,
    e: RaisingTable,
    pi: RaisingTable,
) -> _Setting:
    variables = set(pair.variables())
    for table in (e, pi):
        variables |= set(table.tables)
        variables |= {v for edge in table.relation for v in edge}
    kinds = _Vars.of(sort_vars(variables))
    sources = {x: e.sources(x) for x in e.tables}
    sources.update({y: pi.sources(y) for y in pi.tables})
    return _Setting(st, pair.cc, kinds.minus, sort_vars(pi.tables), sources)


def is_compatible(
    pi: RaisingTable,
    pair: CcPair,
    e: RaisingTable,
    st: FiniteStructure,
) -> bool:
    if not is_acyclic_with(pair.vc, e.relation | pi.relation):
        return False
    missing = [y.surface for y in pair.cc if y not in pi.tables]
    if missing:
        raise OracleError(
            f"pi gives no value for {', '.join(sorted(missing))}"
        )
    setting = _table_setting(st, pair, e, pi)
    tasks = [
        task for tau in setting.tau_space()
        for task in setting.compat_tasks(tau)
    ]
    try:
        return holds_everywhere(tasks, {**e.cells(), **pi.cells()})
    except MissingCell as missing_cell:
        raise OracleError(
            f'raising table is not total at {missing_cell.cell!r}'
        ) from missing_cell


def find_compatible_pi(
    pair: CcPair, e: RaisingTable, st: FiniteStructure
) -> RaisingTable:
    """A pi compatible with ``pair`` for the fixed ``e``."""
    if not is_acyclic_with(pair.vc, e.relation):
        raise OracleError('e reads against the variable-condition')
    variables = set(pair.variables()) | set(e.tables)
    variables |= {v for edge in e.relation for v in edge}
    kinds = _Vars.of(sort_vars(variables))
    budget = Budget()
    e_sources = {x: e.sources(x) for x in e.tables}
    for relation in maximal_relations(
        pair.vc.add(e.relation), kinds.pi_candidates()
    ):
        sources = dict(e_sources)
        sources.update(sources_of(relation, kinds.plus))
        setting = _Setting(st, pair.cc, kinds.minus, kinds.plus, sources)
        tasks = [
            task for tau in setting.tau_space()
            for task in setting.compat_tasks(tau)
        ]
        cells = solve(tasks, e.cells(), budget)
        if cells is not None:
            _, pi = _split(st, setting, relation, cells)
            return pi
    raise OracleError('no compatible pi exists for this e')


# --- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    checked: int
    failures: Tuple[FiniteStructure, ...]

    @property
    def valid(self) -> bool:
        return not self.failures


def sweep(
    g: Sequence[Sequent],
    pair: CcPair,
    structures: Iterable[FiniteStructure],
    variant: Variant = VARIANT,
    notion: Notion = 'cr',
) -> SweepResult:
    checked = 0
    failures: List[FiniteStructure] = []
    for st in structures:
        checked += 1
        if not is_valid(g, pair, st, variant, notion):
            failures.append(st)
    return SweepResult(checked, tuple(failures))

