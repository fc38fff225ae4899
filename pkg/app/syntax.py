"""Terms, formulas and sequents of the simply-typed object logic.

Binders only ever bind variables of kind ``bound``; free variables carry one
of the three free kinds (gamma, delta-minus, delta-plus) as part of their
identity. All nodes are frozen dataclasses, so every value may be shared.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Literal,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from app.constants import BOOL_SORT, PROJECTION_NAMES
from app.exceptions import BindingError, SubstitutionError, TypeCheckError


class Kind(str, Enum):
    BOUND = 'bound'
    GAMMA = 'gamma'
    DELTA_MINUS = 'delta_minus'
    DELTA_PLUS = 'delta_plus'


KIND_SUFFIX: Dict[Kind, str] = {
    Kind.GAMMA: '^g',
    Kind.DELTA_MINUS: '^d-',
    Kind.DELTA_PLUS: '^d+',
}
SUFFIX_KIND: Dict[str, Kind] = {v: k for k, v in KIND_SUFFIX.items()}

FREE_KINDS: FrozenSet[Kind] = frozenset(KIND_SUFFIX)
RIGID_KINDS: FrozenSet[Kind] = frozenset({Kind.GAMMA, Kind.DELTA_PLUS})

Selector = Literal[
    'all', 'gamma_delta_plus', 'delta_plus', 'delta_minus', 'gamma'
]

_SELECTED: Dict[str, FrozenSet[Kind]] = {
    'all': FREE_KINDS,
    'gamma_delta_plus': RIGID_KINDS,
    'delta_plus': frozenset({Kind.DELTA_PLUS}),
    'delta_minus': frozenset({Kind.DELTA_MINUS}),
    'gamma': frozenset({Kind.GAMMA}),
}


# --- types -----------------------------------------------------------------


@dataclass(frozen=True)
class BaseType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FunType:
    arg: 'Type'
    res: 'Type'

    def __str__(self) -> str:
        return format_type(self)


Type = Union[BaseType, FunType]

BOOL = BaseType(BOOL_SORT)


def fun_type(args: Sequence[Type], res: Type) -> Type:
    result = res
    for arg in reversed(args):
        result = FunType(arg, result)
    return result


def split_type(t: Type) -> Tuple[List[Type], BaseType]:
    """Argument types and final base type of a curried type."""
    args: List[Type] = []
    while isinstance(t, FunType):
        args.append(t.arg)
        t = t.res
    return args, t


def format_type(t: Type) -> str:
    if isinstance(t, BaseType):
        return t.name
    arg = format_type(t.arg)
    if isinstance(t.arg, FunType):
        arg = f'({arg})'
    return f'{arg} > {format_type(t.res)}'


# --- terms and formulas ----------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    kind: Kind
    type: Type

    @property
    def is_free(self) -> bool:
        return self.kind is not Kind.BOUND

    @property
    def surface(self) -> str:
        return self.name + KIND_SUFFIX.get(self.kind, '')

    def __str__(self) -> str:
        return self.surface


@dataclass(frozen=True)
class Const:
    name: str
    type: Type


@dataclass(frozen=True)
class App:
    fun: 'Term'
    arg: 'Term'


@dataclass(frozen=True)
class _Binder:
    var: Var
    body: 'Expr'


class Lam(_Binder):
    pass


class Eps(_Binder):
    pass


class Iota(_Binder):
    pass


class Forall(_Binder):
    pass


class Exists(_Binder):
    pass


class ExistsUnique(_Binder):
    pass


@dataclass(frozen=True)
class Pred:
    name: str
    args: Tuple['Term', ...] = ()


@dataclass(frozen=True)
class Eq:
    left: 'Term'
    right: 'Term'


@dataclass(frozen=True)
class Not:
    body: 'Formula'


@dataclass(frozen=True)
class _Binary:
    left: 'Formula'
    right: 'Formula'


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Imp(_Binary):
    pass


class Iff(_Binary):
    pass


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Falsity:
    pass


Term = Union[Var, Const, App, Lam, Eps, Iota]
Formula = Union[
    Pred, Eq, Not, And, Or, Imp, Iff, Truth, Falsity,
    Forall, Exists, ExistsUnique,
]
Expr = Union[Term, Formula]
Sequent = Tuple[Formula, ...]
SubstitutionMap = Dict[Var, Term]

TERM_BINDERS = (Lam, Eps, Iota)
FORMULA_BINDERS = (Forall, Exists, ExistsUnique)
TERM_CLASSES = (Var, Const, App, Lam, Eps, Iota)


def is_term(e: object) -> bool:
    return isinstance(e, TERM_CLASSES)


def apply(head: Term, *args: Term) -> Term:
    result = head
    for arg in args:
        result = App(result, arg)
    return result


def unapply(t: Term) -> Tuple[Term, List[Term]]:
    """Split a curried application into head and arguments."""
    args: List[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def conj(*parts: Formula) -> Formula:
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = And(part, result)
    return result


def conjugate(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.body
    return Not(f)


# --- signature -------------------------------------------------------------


@dataclass
class Signature:
    sorts: Dict[str, BaseType] = field(default_factory=dict)
    products: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    constants: Dict[str, Type] = field(default_factory=dict)

    def declare_sort(self, name: str) -> BaseType:
        if name == BOOL_SORT:
            raise TypeCheckError(f'sort {name} is built in')
        if name in self.sorts:
            raise TypeCheckError(f'sort {name} declared twice')
        self.sorts[name] = BaseType(name)
        return self.sorts[name]

    def declare_product(
        self, name: str, components: Sequence[str]
    ) -> BaseType:
        if self.products:
            raise TypeCheckError(
                'only one product sort may be declared per problem'
            )
        if len(components) > len(PROJECTION_NAMES):
            raise TypeCheckError(
                f'product sort {name} has too many components'
            )
        for component in components:
            if component not in self.sorts:
                raise TypeCheckError(f'unknown sort {component}')
        sort = self.declare_sort(name)
        self.products[name] = tuple(components)
        for index, component in enumerate(components):
            self.declare_const(
                PROJECTION_NAMES[index],
                FunType(sort, self.sorts[component]),
            )
        return sort

    def declare_const(self, name: str, type_: Type) -> None:
        if name in self.constants:
            raise TypeCheckError(f'constant {name} declared twice')
        for base in _base_types(type_):
            if base.name != BOOL_SORT and base.name not in self.sorts:
                raise TypeCheckError(
                    f'unknown sort {base.name} in type of {name}'
                )
        self.constants[name] = type_

    def sort(self, name: str) -> BaseType:
        if name == BOOL_SORT:
            return BOOL
        if name not in self.sorts:
            raise TypeCheckError(f'unknown sort {name}')
        return self.sorts[name]

    def is_predicate(self, name: str) -> bool:
        return split_type(self.constants[name])[1] == BOOL

    def copy(self) -> 'Signature':
        return Signature(
            dict(self.sorts), dict(self.products), dict(self.constants)
        )


def _base_types(t: Type) -> Iterable[BaseType]:
    if isinstance(t, BaseType):
        yield t
    else:
        yield from _base_types(t.arg)
        yield from _base_types(t.res)


# --- generic traversal -----------------------------------------------------


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, (Var, Const, Truth, Falsity)):
        return ()
    if isinstance(e, App):
        return (e.fun, e.arg)
    if isinstance(e, _Binder):
        return (e.body,)
    if isinstance(e, Pred):
        return tuple(e.args)
    if isinstance(e, Eq):
        return (e.left, e.right)
    if isinstance(e, Not):
        return (e.body,)
    return (e.left, e.right)


def rebuild(e: Expr, kids: Sequence[Expr]) -> Expr:
    old = children(e)
    if len(old) == len(kids) and all(a is b for a, b in zip(old, kids)):
        return e
    if isinstance(e, App):
        return App(kids[0], kids[1])  # type: ignore[arg-type]
    if isinstance(e, _Binder):
        return type(e)(e.var, kids[0])
    if isinstance(e, Pred):
        return Pred(e.name, tuple(kids))  # type: ignore[arg-type]
    if isinstance(e, Eq):
        return Eq(kids[0], kids[1])  # type: ignore[arg-type]
    if isinstance(e, Not):
        return Not(kids[0])  # type: ignore[arg-type]
    if isinstance(e, _Binary):
        return type(e)(kids[0], kids[1])  # type: ignore[arg-type]
    return e


def type_of(t: Term) -> Type:
    if isinstance(t, (Var, Const)):
        return t.type
    if isinstance(t, App):
        fun = type_of(t.fun)
        if not isinstance(fun, FunType):
            raise TypeCheckError(f'{format_expr(t.fun)} is not a function')
        return fun.res
    if isinstance(t, Lam):
        return FunType(t.var.type, type_of(t.body))  # type: ignore[arg-type]
    return t.var.type


def depth(e: Expr) -> int:
    """AST depth; a leaf has depth 1."""
    memo: Dict[int, int] = {}

    def walk(node: Expr) -> int:
        key = id(node)
        if key not in memo:
            memo[key] = 1 + max((walk(k) for k in children(node)), default=0)
        return memo[key]

    return walk(e)


# --- free variables --------------------------------------------------------


def _as_exprs(e: Union[Expr, Sequence[Expr]]) -> Sequence[Expr]:
    if isinstance(e, (list, tuple)):
        return e
    return (e,)  # type: ignore[return-value]


def free_var_set(e: Union[Expr, Sequence[Expr]]) -> Set[Var]:
    """All free-kind variables of ``e``; binders never bind those."""
    found: Set[Var] = set()
    seen: Set[int] = set()
    stack: List[Expr] = list(_as_exprs(e))
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            if node.is_free:
                found.add(node)
        else:
            stack.extend(children(node))
    return found


def sort_vars(variables: Iterable[Var]) -> List[Var]:
    return sorted(
        variables, key=lambda v: (v.name, v.kind.value, format_type(v.type))
    )


def free_vars(
    e: Union[Expr, Sequence[Expr]], selector: Selector = 'all'
) -> List[Var]:
    kinds = _SELECTED[selector]
    return sort_vars(v for v in free_var_set(e) if v.kind in kinds)


def free_bound_vars(e: Expr) -> Set[Var]:
    """Bound-kind variables occurring outside the scope of their binder."""
    if isinstance(e, Var):
        return {e} if e.kind is Kind.BOUND else set()
    if isinstance(e, _Binder):
        return free_bound_vars(e.body) - {e.var}
    result: Set[Var] = set()
    for kid in children(e):
        result |= free_bound_vars(kid)
    return result


def binder_names(e: Expr) -> Set[str]:
    names: Set[str] = set()
    stack: List[Expr] = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, _Binder):
            names.add(node.var.name)
        stack.extend(children(node))
    return names


def const_names(e: Expr) -> Set[str]:
    names: Set[str] = set()
    stack: List[Expr] = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Const):
            names.add(node.name)
        elif isinstance(node, Pred):
            names.add(node.name)
        stack.extend(children(node))
    return names


def occurs(var: Var, e: Expr) -> bool:
    if var.kind is Kind.BOUND:
        return var in free_bound_vars(e)
    return var in free_var_set(e)


# --- substitution ----------------------------------------------------------


def _prime_base(name: str) -> str:
    return name.rstrip("'")


def fresh_prime(name: str, taken: Set[str]) -> str:
    candidate = _prime_base(name)
    while candidate in taken:
        candidate += "'"
    return candidate


def fresh_numbered(name: str, taken: Set[str]) -> str:
    if name not in taken:
        return name
    index = 1
    while f'{name}{index}' in taken:
        index += 1
    return f'{name}{index}'


def _loose_vars(
    node: Expr, memo: Dict[int, Tuple[Expr, FrozenSet[Var]]]
) -> FrozenSet[Var]:
    """Variables of any kind occurring outside the scope of a binder."""
    hit = memo.get(id(node))
    if hit is not None and hit[0] is node:
        return hit[1]
    result: FrozenSet[Var]
    if isinstance(node, Var):
        result = frozenset((node,))
    elif isinstance(node, _Binder):
        result = _loose_vars(node.body, memo) - {node.var}
    else:
        result = frozenset().union(
            *(_loose_vars(k, memo) for k in children(node))
        )
    memo[id(node)] = (node, result)
    return result


def substitute(e: Expr, mapping: Mapping[Var, Term]) -> Expr:
    """Capture-avoiding replacement of variables of any kind."""
    memo: Dict[int, Tuple[Expr, FrozenSet[Var]]] = {}

    def walk(node: Expr, m: Mapping[Var, Term]) -> Expr:
        if not m:
            return node
        if isinstance(node, Var):
            return m.get(node, node)
        if isinstance(node, (Const, Truth, Falsity)):
            return node
        if not any(k in _loose_vars(node, memo) for k in m):
            return node
        if isinstance(node, _Binder):
            loose = _loose_vars(node.body, memo)
            inner = {
                k: t for k, t in m.items() if k != node.var and k in loose
            }
            if not inner:
                return node
            danger = {
                v.name
                for t in inner.values()
                for v in _loose_vars(t, memo)
                if v.kind is Kind.BOUND
            }
            var = node.var
            if var.name in danger:
                taken = danger | {
                    v.name for v in loose if v.kind is Kind.BOUND
                }
                renamed = Var(
                    fresh_prime(var.name + "'", taken), Kind.BOUND, var.type
                )
                inner[var] = renamed
                var = renamed
            return type(node)(var, walk(node.body, inner))
        return rebuild(node, [walk(k, m) for k in children(node)])

    return walk(e, mapping)


def beta_normalize(e: Expr) -> Expr:
    if isinstance(e, App):
        fun = beta_normalize(e.fun)
        arg = beta_normalize(e.arg)
        if isinstance(fun, Lam):
            return beta_normalize(substitute(fun.body, {fun.var: arg}))
        if fun is e.fun and arg is e.arg:
            return e
        return App(fun, arg)  # type: ignore[arg-type]
    return rebuild(e, [beta_normalize(k) for k in children(e)])


def normalize_binders(e: Expr, reserved: Iterable[str] = ()) -> Expr:
    """Rename binders canonically so that no binder on a name occurs inside
    another binder on the same name.

    Every binder gets the base of its name (trailing primes dropped) plus
    the fewest primes that avoid the names of its enclosing binders, of
    the free bound-kind variables of ``e`` and of its constants. The result
    depends only on the alpha-equivalence class and the base names.
    """
    outer = set(reserved) | {v.name for v in free_bound_vars(e)}
    outer |= const_names(e)

    def walk(node: Expr, env: Dict[Var, Var], names: FrozenSet[str]) -> Expr:
        if isinstance(node, Var):
            return env.get(node, node)
        if isinstance(node, _Binder):
            name = fresh_prime(node.var.name, set(names))
            var = node.var
            if name != var.name:
                var = Var(name, Kind.BOUND, var.type)
            inner_env = dict(env)
            if var is not node.var:
                inner_env[node.var] = var
            else:
                inner_env.pop(node.var, None)
            body = walk(node.body, inner_env, names | {name})
            if var is node.var and body is node.body:
                return node
            return type(node)(var, body)
        return rebuild(node, [walk(k, env, names) for k in children(node)])

    return walk(e, {}, frozenset(outer))


def check_binding_restriction(e: Expr) -> None:
    def walk(node: Expr, names: FrozenSet[str]) -> None:
        if isinstance(node, _Binder):
            if node.var.name in names:
                raise BindingError(
                    f'binder on {node.var.name} occurs inside another '
                    f'binder on {node.var.name}'
                )
            walk(node.body, names | {node.var.name})
            return
        for kid in children(node):
            walk(kid, names)

    walk(e, frozenset())


def check_substitution(s: Mapping[Var, Term]) -> None:
    for var, term in s.items():
        if not var.is_free:
            raise SubstitutionError(
                f'{var.name} is not a free variable and cannot be '
                f'substituted'
            )
        if type_of(term) != var.type:
            raise SubstitutionError(
                f'type mismatch for {var}: expected {format_type(var.type)},'
                f' got {format_type(type_of(term))}'
            )
        loose = free_bound_vars(term)
        if loose:
            names = ', '.join(sorted(v.name for v in loose))
            raise SubstitutionError(
                f'term for {var} has unbound variables {names}'
            )


def apply_substitution(e: Expr, s: Mapping[Var, Term]) -> Expr:
    if not s:
        return e
    check_substitution(s)
    return normalize_binders(beta_normalize(substitute(e, s)))


def apply_substitution_seq(seq: Sequent, s: Mapping[Var, Term]) -> Sequent:
    return tuple(
        apply_substitution(f, s) for f in seq  # type: ignore[misc]
    )


def instantiate_bound(body: Expr, var: Var, t: Term) -> Expr:
    """``body{var |-> t}`` for a bound variable, beta-normal and with the
    binding restriction restored."""
    result = beta_normalize(substitute(body, {var: t}))
    return normalize_binders(result)


def replace_term(e: Expr, target: Term, replacement: Term) -> Expr:
    if e == target:
        return replacement
    if isinstance(e, _Binder) and e.var in free_bound_vars(target):
        return e
    return rebuild(e, [replace_term(k, target, replacement)
                       for k in children(e)])


# --- alpha equivalence -----------------------------------------------------


def alpha_key(e: Expr) -> object:
    """Hashable key equal for exactly the alpha-equivalent expressions."""

    def walk(node: Expr, scope: Tuple[Var, ...]) -> object:
        if isinstance(node, Var):
            if node.kind is Kind.BOUND and node in scope:
                return ('#', len(scope) - 1 - scope[::-1].index(node))
            return ('v', node.name, node.kind.value, format_type(node.type))
        if isinstance(node, Const):
            return ('c', node.name)
        if isinstance(node, _Binder):
            return (
                type(node).__name__, format_type(node.var.type),
                walk(node.body, scope + (node.var,)),
            )
        if isinstance(node, Pred):
            return ('p', node.name) + tuple(walk(a, scope) for a in node.args)
        return (type(node).__name__,) + tuple(
            walk(k, scope) for k in children(node)
        )

    return walk(e, ())


def alpha_equal(a: Expr, b: Expr) -> bool:
    return alpha_key(a) == alpha_key(b)


# --- unique existence ------------------------------------------------------


def expand_unique_existence(f: Expr) -> Expr:
    """Rewrite every ``ex! x. A`` to ``ex y. all x. (x = y <-> A)``."""
    if isinstance(f, ExistsUnique):
        body = expand_unique_existence(f.body)
        taken = binder_names(body) | {v.name for v in free_bound_vars(body)}
        taken.add(f.var.name)
        witness = Var(fresh_prime('y', taken), Kind.BOUND, f.var.type)
        return Exists(
            witness,
            Forall(f.var, Iff(Eq(f.var, witness), body)),  # type: ignore
        )
    return rebuild(f, [expand_unique_existence(k) for k in children(f)])


# --- printing --------------------------------------------------------------

_PREC_IFF = 1
_PREC_IMP = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_EQ = 5
_PREC_UNARY = 6

_BINDER_KEYWORD: Dict[type, str] = {
    Forall: 'all',
    Exists: 'ex',
    ExistsUnique: 'ex!',
    Eps: 'eps',
    Iota: 'iota',
    Lam: 'lambda',
}


def _prec(e: Expr) -> int:
    if isinstance(e, Iff):
        return _PREC_IFF
    if isinstance(e, Imp):
        return _PREC_IMP
    if isinstance(e, Or):
        return _PREC_OR
    if isinstance(e, And):
        return _PREC_AND
    if isinstance(e, Eq) or (isinstance(e, Not) and isinstance(e.body, Eq)):
        return _PREC_EQ
    return _PREC_UNARY


def _fmt(e: Expr, need: int) -> str:
    text = _fmt_bare(e)
    if _prec(e) < need:
        return f'({text})'
    return text


def _fmt_bare(e: Expr) -> str:  # noqa: PLR0911
    if isinstance(e, Var):
        return e.surface
    if isinstance(e, Const):
        return e.name
    if isinstance(e, App):
        head, args = unapply(e)
        head_text = _fmt_bare(head)
        if not isinstance(head, (Var, Const)):
            head_text = f'({head_text})'
        return f'{head_text}({", ".join(_fmt(a, 0) for a in args)})'
    if isinstance(e, _Binder):
        keyword = _BINDER_KEYWORD[type(e)]
        var = e.var
        return (
            f'{keyword} {var.name}:{format_type(var.type)}. '
            f'{_fmt(e.body, _PREC_UNARY)}'
        )
    if isinstance(e, Pred):
        if not e.args:
            return e.name
        return f'{e.name}({", ".join(_fmt(a, 0) for a in e.args)})'
    if isinstance(e, Eq):
        return f'{_fmt(e.left, _PREC_UNARY)} = {_fmt(e.right, _PREC_UNARY)}'
    if isinstance(e, Not):
        if isinstance(e.body, Eq):
            left = _fmt(e.body.left, _PREC_UNARY)
            right = _fmt(e.body.right, _PREC_UNARY)
            return f'{left} != {right}'
        return f'~{_fmt(e.body, _PREC_UNARY)}'
    if isinstance(e, Truth):
        return 'T'
    if isinstance(e, Falsity):
        return 'F'
    if isinstance(e, Iff):
        return f'{_fmt(e.left, _PREC_IMP)} <-> {_fmt(e.right, _PREC_IMP)}'
    if isinstance(e, Imp):
        return f'{_fmt(e.left, _PREC_OR)} -> {_fmt(e.right, _PREC_IMP)}'
    if isinstance(e, Or):
        return f'{_fmt(e.left, _PREC_OR)} \\/ {_fmt(e.right, _PREC_AND)}'
    assert isinstance(e, And)
    return f'{_fmt(e.left, _PREC_AND)} /\\ {_fmt(e.right, _PREC_EQ)}'


def format_expr(e: Expr) -> str:
    return _fmt(e, 0)


def format_sequent(seq: Sequence[Formula]) -> str:
    return ', '.join(format_expr(f) for f in seq)


def format_substitution(s: Mapping[Var, Term]) -> str:
    items = sorted(s.items(), key=lambda kv: kv[0].surface)
    return '{' + ', '.join(
        f'{var.surface} := {format_expr(t)}' for var, t in items
    ) + '}'


def walk_exprs(e: Expr, visit: Callable[[Expr], None]) -> None:
    stack: List[Expr] = [e]
    while stack:
        node = stack.pop()
        visit(node)
        stack.extend(children(node))


def first_binder(e: Expr) -> Optional[_Binder]:
    found: List[_Binder] = []

    def visit(node: Expr) -> None:
        if isinstance(node, _Binder) and not found:
            found.append(node)

    walk_exprs(e, visit)
    return found[0] if found else None


def format_unary(e: Expr) -> str:
    """``e`` printed so that it can stand as the body of a binder."""
    return _fmt(e, _PREC_UNARY)
