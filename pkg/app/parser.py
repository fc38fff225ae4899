"""Concrete syntax: formulas and types, problem files (``.p``), proof
scripts (``.ps``) and structure files (``.st``).

Every file format is line oriented. Each line is parsed on its own by one
LALR grammar with several start symbols; expressions come out as a raw
tree that :class:`Elaborator` resolves against a signature and the
registered free variables.
"""

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from app.choicecond import Abstraction, CcPair, check_pair, format_cc
from app.constants import PROJECTION_NAMES
from app.exceptions import BindingError, ParseError, TypeCheckError
from app.syntax import (
    BOOL,
    Const,
    Eps,
    Eq,
    Exists,
    ExistsUnique,
    Falsity,
    Forall,
    Formula,
    FunType,
    Iff,
    Imp,
    Iota,
    Kind,
    Lam,
    Not,
    Or,
    And,
    Pred,
    Sequent,
    Signature,
    SUFFIX_KIND,
    Term,
    Truth,
    Type,
    Var,
    App,
    format_expr,
    format_type,
    free_var_set,
    split_type,
    type_of,
)
from app.utils.logger import logger
from app.varcond import Edge, VariableCondition, format_edges

GRAMMAR = r"""
?expr: imp
     | imp "<->" imp -> iff
?imp: disj
    | disj "->" imp -> imp
?disj: conj
     | disj "\\/" conj -> disj
?conj: eql
     | conj "/\\" eql -> conj
?eql: unary
    | unary "=" unary -> eq
    | unary "!=" unary -> neq
?unary: "~" unary -> neg
      | BINDER NAME ":" type "." unary -> binder
      | app
?app: atom
    | app "(" expr ("," expr)* ")" -> apply
?atom: NAME -> name
     | FREEVAR -> freevar
     | TRUE -> truth
     | FALSE -> falsity
     | "(" expr ")"

?type: tatom
     | tatom ">" type -> arrow
?tatom: NAME -> tname
      | "(" type ")"

?problem_line: "sort" NAME -> sort_decl
    | "sort" NAME "=" NAME ("*" NAME)+ -> product_decl
    | "const" NAME ":" type -> const_decl
    | "var" FREEVAR ":" type -> var_decl
    | "choice" FREEVAR ":=" expr -> choice_decl
    | "edge" FREEVAR "->" FREEVAR -> edge_decl
    | "lemma" NAME ":" expr -> lemma_decl
    | "goal" expr ("," expr)* -> goal_decl

?script_line: "alpha" INT INT -> alpha_cmd
    | "beta" INT INT -> beta_cmd
    | "gamma" INT INT expr -> gamma_cmd
    | "delta-" INT INT [NAME] -> delta_minus_cmd
    | "delta+" INT INT [NAME] -> delta_plus_cmd
    | "inst" "{" [binding ("," binding)*] "}" -> inst_cmd
    | "close" INT -> close_cmd
    | "lemma" [INT] NAME ["(" FREEVAR ")"] -> lemma_cmd
    | "extend" FREEVAR ":" type ":=" expr -> extend_cmd
    | "edge" FREEVAR "->" FREEVAR -> edge_cmd
    | "var" FREEVAR ":" type -> var_cmd
    | "cut" INT expr -> cut_cmd
binding: FREEVAR ":=" expr

?structure_line: "universe" NAME "=" "{" elem ("," elem)* "}" -> universe_decl
    | "pred" NAME "=" "{" [tup ("," tup)*] "}" -> pred_decl
    | "pred" NAME "=" "?" -> pred_open
    | "fun" NAME "=" "{" [mapping ("," mapping)*] "}" -> fun_decl
    | "fun" NAME "=" "?" -> fun_open
    | "const" NAME "=" elem -> const_value
    | "const" NAME "=" "?" -> const_open
tup: "(" [elem ("," elem)*] ")"
   | elem
mapping: tup "->" elem
?elem: NAME -> elem_name
     | "<" elem ("," elem)* ">" -> elem_tuple

BINDER.3: /(all|ex!|ex|eps|iota|lambda)(?![A-Za-z0-9_'])/
TRUE.3: /T(?![A-Za-z0-9_'])/
FALSE.3: /F(?![A-Za-z0-9_'])/
FREEVAR.2: /[A-Za-z0-9_][A-Za-z0-9_']*\^(g|d-|d\+)/
INT.2: /[0-9]+(?![A-Za-z0-9_'])/
NAME: /[A-Za-z0-9_][A-Za-z0-9_']*/

%import common.WS_INLINE
%ignore WS_INLINE
"""

_STARTS = ['expr', 'type', 'problem_line', 'script_line', 'structure_line']

_lark = Lark(GRAMMAR, parser='lalr', start=_STARTS)

_FREE_RE = re.compile(r"^([A-Za-z0-9_][A-Za-z0-9_']*)(\^(?:g|d-|d\+))$")


# --- raw trees -------------------------------------------------------------


@dataclass(frozen=True)
class RawName:
    name: str
    line: int
    column: int


@dataclass(frozen=True)
class RawFree:
    surface: str
    line: int
    column: int


@dataclass(frozen=True)
class RawTruth:
    value: bool


@dataclass(frozen=True)
class RawApply:
    head: 'Raw'
    args: Tuple['Raw', ...]


@dataclass(frozen=True)
class RawBinder:
    keyword: str
    name: str
    type: 'RawType'
    body: 'Raw'
    line: int
    column: int


@dataclass(frozen=True)
class RawNot:
    body: 'Raw'


@dataclass(frozen=True)
class RawBinary:
    op: str
    left: 'Raw'
    right: 'Raw'


@dataclass(frozen=True)
class RawEq:
    left: 'Raw'
    right: 'Raw'
    negated: bool


@dataclass(frozen=True)
class RawTypeName:
    name: str
    line: int
    column: int


@dataclass(frozen=True)
class RawArrow:
    arg: 'RawType'
    res: 'RawType'


Raw = Union[
    RawName, RawFree, RawTruth, RawApply, RawBinder, RawNot, RawBinary, RawEq
]
RawType = Union[RawTypeName, RawArrow]

Element = Union[str, Tuple[Any, ...]]


@dataclass(frozen=True)
class ScriptCommand:
    line: int
    op: str
    goal: Optional[int] = None
    pos: Optional[int] = None
    term: Optional[Raw] = None
    name: Optional[str] = None
    var: Optional[str] = None
    type: Optional[RawType] = None
    bindings: Tuple[Tuple[str, Raw], ...] = ()
    edge: Optional[Tuple[str, str]] = None


def _present(items: Sequence[Any]) -> List[Any]:
    return [item for item in items if item is not None]


class _Builder(Transformer):  # type: ignore[type-arg]
    def name(self, items: List[Token]) -> RawName:
        (token,) = items
        return RawName(str(token), token.line or 0, token.column or 0)

    def freevar(self, items: List[Token]) -> RawFree:
        (token,) = items
        return RawFree(str(token), token.line or 0, token.column or 0)

    def truth(self, items: List[Token]) -> RawTruth:
        return RawTruth(True)

    def falsity(self, items: List[Token]) -> RawTruth:
        return RawTruth(False)

    def apply(self, items: List[Raw]) -> RawApply:
        head, *args = items
        return RawApply(head, tuple(args))

    def binder(self, items: List[Any]) -> RawBinder:
        keyword, name, type_, body = items
        return RawBinder(
            str(keyword), str(name), type_, body,
            keyword.line or 0, keyword.column or 0,
        )

    def neg(self, items: List[Raw]) -> RawNot:
        return RawNot(items[0])

    def iff(self, items: List[Raw]) -> RawBinary:
        return RawBinary('<->', items[0], items[1])

    def imp(self, items: List[Raw]) -> RawBinary:
        return RawBinary('->', items[0], items[1])

    def disj(self, items: List[Raw]) -> RawBinary:
        return RawBinary('\\/', items[0], items[1])

    def conj(self, items: List[Raw]) -> RawBinary:
        return RawBinary('/\\', items[0], items[1])

    def eq(self, items: List[Raw]) -> RawEq:
        return RawEq(items[0], items[1], False)

    def neq(self, items: List[Raw]) -> RawEq:
        return RawEq(items[0], items[1], True)

    def tname(self, items: List[Token]) -> RawTypeName:
        (token,) = items
        return RawTypeName(str(token), token.line or 0, token.column or 0)

    def arrow(self, items: List[RawType]) -> RawArrow:
        return RawArrow(items[0], items[1])

    # problem lines

    def sort_decl(self, items: List[Token]) -> Tuple[Any, ...]:
        return ('sort', str(items[0]))

    def product_decl(self, items: List[Token]) -> Tuple[Any, ...]:
        return ('product', str(items[0]), [str(t) for t in items[1:]])

    def const_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('const', str(items[0]), items[1])

    def var_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('var', str(items[0]), items[1])

    def choice_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('choice', str(items[0]), items[1])

    def edge_decl(self, items: List[Token]) -> Tuple[Any, ...]:
        return ('edge', str(items[0]), str(items[1]))

    def lemma_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('lemma', str(items[0]), items[1])

    def goal_decl(self, items: List[Raw]) -> Tuple[Any, ...]:
        return ('goal', list(items))

    # script lines

    def _step(self, op: str, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(0, op, goal=int(items[0]), pos=int(items[1]))

    def alpha_cmd(self, items: List[Any]) -> ScriptCommand:
        return self._step('alpha', items)

    def beta_cmd(self, items: List[Any]) -> ScriptCommand:
        return self._step('beta', items)

    def gamma_cmd(self, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(
            0, 'gamma', goal=int(items[0]), pos=int(items[1]), term=items[2]
        )

    def _delta(self, op: str, items: List[Any]) -> ScriptCommand:
        name = str(items[2]) if len(items) > 2 and items[2] is not None \
            else None
        return ScriptCommand(
            0, op, goal=int(items[0]), pos=int(items[1]), name=name
        )

    def delta_minus_cmd(self, items: List[Any]) -> ScriptCommand:
        return self._delta('delta-', items)

    def delta_plus_cmd(self, items: List[Any]) -> ScriptCommand:
        return self._delta('delta+', items)

    def binding(self, items: List[Any]) -> Tuple[str, Raw]:
        return (str(items[0]), items[1])

    def inst_cmd(self, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(0, 'inst', bindings=tuple(_present(items)))

    def close_cmd(self, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(0, 'close', goal=int(items[0]))

    def lemma_cmd(self, items: List[Any]) -> ScriptCommand:
        goal, name, var = items
        return ScriptCommand(
            0, 'lemma',
            goal=int(goal) if goal is not None else None,
            name=str(name),
            var=str(var) if var is not None else None,
        )

    def extend_cmd(self, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(
            0, 'extend', var=str(items[0]), type=items[1], term=items[2]
        )

    def edge_cmd(self, items: List[Token]) -> ScriptCommand:
        return ScriptCommand(0, 'edge', edge=(str(items[0]), str(items[1])))

    def var_cmd(self, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(0, 'var', var=str(items[0]), type=items[1])

    def cut_cmd(self, items: List[Any]) -> ScriptCommand:
        return ScriptCommand(0, 'cut', goal=int(items[0]), term=items[1])

    # structure lines

    def elem_name(self, items: List[Token]) -> Element:
        return str(items[0])

    def elem_tuple(self, items: List[Element]) -> Element:
        return tuple(items)

    def tup(self, items: List[Any]) -> Tuple[Element, ...]:
        return tuple(_present(items))

    def mapping(self, items: List[Any]) -> Tuple[Any, ...]:
        return (items[0], items[1])

    def universe_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('universe', str(items[0]), list(items[1:]))

    def pred_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('pred', str(items[0]), _present(items[1:]))

    def pred_open(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('pred', str(items[0]), None)

    def fun_decl(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('fun', str(items[0]), _present(items[1:]))

    def fun_open(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('fun', str(items[0]), None)

    def const_value(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('fun', str(items[0]), [((), items[1])])

    def const_open(self, items: List[Any]) -> Tuple[Any, ...]:
        return ('fun', str(items[0]), None)


_builder = _Builder()


def _parse(text: str, start: str, line: Optional[int] = None) -> Any:
    try:
        tree = _lark.parse(text, start=start)
        return _builder.transform(tree)
    except UnexpectedInput as exc:
        column = getattr(exc, 'column', None)
        token = getattr(exc, 'token', None)
        if token is not None and str(token):
            message = f'unexpected {str(token)!r}'
        elif getattr(exc, 'char', None):
            message = f'unexpected character {exc.char!r}'  # type: ignore
        else:
            message = 'unexpected end of input'
        where = line if line is not None else getattr(exc, 'line', None)
        if isinstance(column, int) and column < 0:
            column = None
        raise ParseError(message, where, column) from exc
    except VisitError as exc:
        raise ParseError(str(exc.orig_exc), line) from exc


def split_free(surface: str) -> Tuple[str, Kind]:
    match = _FREE_RE.match(surface)
    if match is None:
        raise ParseError(f'{surface!r} is not a free variable')
    return match.group(1), SUFFIX_KIND[match.group(2)]


# --- elaboration -----------------------------------------------------------


def _at(line: int, column: int) -> str:
    return f' (line {line}, column {column})' if line else ''


Register = Callable[[str, Type], Var]


class Elaborator:
    """Resolves raw trees against a signature and registered variables.

    ``register`` is called for an undeclared free variable whose type is
    determined by its position; without it such a variable is an error.
    """

    def __init__(
        self,
        signature: Signature,
        variables: Mapping[str, Var],
        register: Optional[Register] = None,
    ) -> None:
        self.signature = signature
        self.variables = variables
        self.register = register

    def type(self, raw: RawType) -> Type:
        if isinstance(raw, RawArrow):
            return FunType(self.type(raw.arg), self.type(raw.res))
        try:
            return self.signature.sort(raw.name)
        except TypeCheckError as exc:
            raise TypeCheckError(
                f'{exc}{_at(raw.line, raw.column)}'
            ) from exc

    def formula(self, raw: Raw) -> Formula:
        return self._formula(raw, {})

    def term(self, raw: Raw, expected: Optional[Type] = None) -> Term:
        return self._term(raw, {}, expected)

    def abstraction(self, raw: Raw) -> Abstraction:
        params: List[Var] = []
        scope: Dict[str, Var] = {}
        while isinstance(raw, RawBinder) and raw.keyword == 'lambda':
            var = self._bind(raw, scope)
            params.append(var)
            scope = {**scope, var.name: var}
            raw = raw.body
        return Abstraction(tuple(params), self._formula(raw, scope))

    def _bind(self, raw: RawBinder, scope: Mapping[str, Var]) -> Var:
        if raw.name in scope:
            raise BindingError(
                f'binder on {raw.name} occurs inside another binder on '
                f'{raw.name}{_at(raw.line, raw.column)}'
            )
        return Var(raw.name, Kind.BOUND, self.type(raw.type))

    def _free(self, raw: RawFree, expected: Optional[Type]) -> Var:
        if raw.surface in self.variables:
            return self.variables[raw.surface]
        if self.register is not None and expected is not None:
            return self.register(raw.surface, expected)
        raise TypeCheckError(
            f'undeclared free variable {raw.surface}'
            f'{_at(raw.line, raw.column)}'
        )

    def _formula(self, raw: Raw, scope: Mapping[str, Var]) -> Formula:
        if isinstance(raw, RawTruth):
            return Truth() if raw.value else Falsity()
        if isinstance(raw, RawNot):
            return Not(self._formula(raw.body, scope))
        if isinstance(raw, RawBinary):
            left = self._formula(raw.left, scope)
            right = self._formula(raw.right, scope)
            return _CONNECTIVES[raw.op](left, right)  # type: ignore
        if isinstance(raw, RawEq):
            return self._equation(raw, scope)
        if isinstance(raw, RawBinder):
            cls = _FORMULA_BINDERS.get(raw.keyword)
            if cls is None:
                raise TypeCheckError(
                    f'{raw.keyword}-term used as a formula'
                    f'{_at(raw.line, raw.column)}'
                )
            var = self._bind(raw, scope)
            body = self._formula(raw.body, {**scope, var.name: var})
            return cls(var, body)  # type: ignore[return-value]
        head, args = _flatten(raw)
        if isinstance(head, RawName) and head.name not in scope:
            return self._atom(head, args, scope)
        raise TypeCheckError(f'{_describe(raw)} is not a formula')

    def _atom(
        self, head: RawName, args: Sequence[Raw], scope: Mapping[str, Var]
    ) -> Formula:
        where = _at(head.line, head.column)
        if head.name not in self.signature.constants:
            raise TypeCheckError(f'unknown predicate {head.name}{where}')
        if not self.signature.is_predicate(head.name):
            raise TypeCheckError(
                f'{head.name} is not a predicate and cannot be a formula'
                f'{where}'
            )
        arg_types, _ = split_type(self.signature.constants[head.name])
        if len(args) != len(arg_types):
            raise TypeCheckError(
                f'{head.name} expects {len(arg_types)} arguments, got '
                f'{len(args)}{where}'
            )
        terms = tuple(
            self._term(arg, scope, t) for arg, t in zip(args, arg_types)
        )
        return Pred(head.name, terms)

    def _equation(self, raw: RawEq, scope: Mapping[str, Var]) -> Formula:
        if isinstance(raw.left, RawFree) and raw.left.surface not in \
                self.variables and not isinstance(raw.right, RawFree):
            right = self._term(raw.right, scope, None)
            left = self._term(raw.left, scope, type_of(right))
        else:
            left = self._term(raw.left, scope, None)
            right = self._term(raw.right, scope, type_of(left))
        sort = type_of(left)
        if isinstance(sort, FunType) or sort == BOOL:
            raise TypeCheckError(
                f'equality at type {format_type(sort)} in '
                f'{format_expr(left)} = {format_expr(right)}; only base '
                f'sorts have equality'
            )
        eq = Eq(left, right)
        return Not(eq) if raw.negated else eq

    def _term(
        self, raw: Raw, scope: Mapping[str, Var], expected: Optional[Type]
    ) -> Term:
        term = self._term_bare(raw, scope, expected)
        actual = type_of(term)
        if expected is not None and actual != expected:
            raise TypeCheckError(
                f'{format_expr(term)} has type {format_type(actual)}, '
                f'expected {format_type(expected)}'
            )
        return term

    def _term_bare(  # noqa: PLR0911
        self, raw: Raw, scope: Mapping[str, Var], expected: Optional[Type]
    ) -> Term:
        if isinstance(raw, RawName):
            if raw.name in scope:
                return scope[raw.name]
            if raw.name in self.signature.constants:
                if self.signature.is_predicate(raw.name):
                    raise TypeCheckError(
                        f'predicate {raw.name} used as a term'
                        f'{_at(raw.line, raw.column)}'
                    )
                return Const(raw.name, self.signature.constants[raw.name])
            raise TypeCheckError(
                f'unknown name {raw.name}{_at(raw.line, raw.column)}'
            )
        if isinstance(raw, RawFree):
            return self._free(raw, expected)
        if isinstance(raw, RawApply):
            return self._application(raw, scope)
        if isinstance(raw, RawBinder):
            var = self._bind(raw, scope)
            inner = {**scope, var.name: var}
            if raw.keyword == 'lambda':
                res = expected.res if isinstance(expected, FunType) else None
                return Lam(var, self._term(raw.body, inner, res))
            if raw.keyword == 'eps':
                return Eps(var, self._formula(raw.body, inner))
            if raw.keyword == 'iota':
                return Iota(var, self._formula(raw.body, inner))
            raise TypeCheckError(
                f'{raw.keyword}-formula used as a term'
                f'{_at(raw.line, raw.column)}'
            )
        raise TypeCheckError(f'{_describe(raw)} is not a term')

    def _application(self, raw: RawApply, scope: Mapping[str, Var]) -> Term:
        head_raw, args = _flatten(raw)
        result = self._term(head_raw, scope, None)
        for arg in args:
            fun = type_of(result)
            if not isinstance(fun, FunType):
                raise TypeCheckError(
                    f'{format_expr(result)} is applied to too many arguments'
                )
            result = App(result, self._term(arg, scope, fun.arg))
        return result


_CONNECTIVES = {'<->': Iff, '->': Imp, '\\/': Or, '/\\': And}
_FORMULA_BINDERS = {'all': Forall, 'ex': Exists, 'ex!': ExistsUnique}


def _flatten(raw: Raw) -> Tuple[Raw, List[Raw]]:
    args: List[Raw] = []
    while isinstance(raw, RawApply):
        args = list(raw.args) + args
        raw = raw.head
    return raw, args


def _describe(raw: Raw) -> str:
    if isinstance(raw, RawName):
        return f'{raw.name}{_at(raw.line, raw.column)}'
    if isinstance(raw, RawFree):
        return f'{raw.surface}{_at(raw.line, raw.column)}'
    return 'expression'


# --- public entry points ---------------------------------------------------


def parse_raw(text: str) -> Raw:
    result: Raw = _parse(text, 'expr')
    return result


def parse_raw_type(text: str) -> RawType:
    result: RawType = _parse(text, 'type')
    return result


def parse_type(text: str, signature: Signature) -> Type:
    return Elaborator(signature, {}).type(parse_raw_type(text))


def parse_formula(
    text: str,
    signature: Signature,
    variables: Optional[Mapping[str, Var]] = None,
) -> Formula:
    return Elaborator(signature, variables or {}).formula(parse_raw(text))


def parse_term(
    text: str,
    signature: Signature,
    variables: Optional[Mapping[str, Var]] = None,
    expected: Optional[Type] = None,
) -> Term:
    elaborator = Elaborator(signature, variables or {})
    return elaborator.term(parse_raw(text), expected)


def iter_lines(text: str) -> Iterator[Tuple[int, str]]:
    """Numbered non-blank lines with ``#`` comments removed."""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split('#', 1)[0].strip()
        if stripped:
            yield number, stripped


@dataclass
class Problem:
    name: str
    signature: Signature
    variables: Dict[str, Var] = field(default_factory=dict)
    goals: List[Sequent] = field(default_factory=list)
    pair: CcPair = field(default_factory=CcPair)
    lemmas: Dict[str, Formula] = field(default_factory=dict)

    def free_variable(self, surface: str) -> Var:
        if surface not in self.variables:
            raise TypeCheckError(f'undeclared free variable {surface}')
        return self.variables[surface]


def declare_variable(
    variables: Dict[str, Var], surface: str, type_: Type
) -> Var:
    name, kind = split_free(surface)
    clash = [v for v in variables.values() if v.name == name]
    if clash:
        raise TypeCheckError(
            f'free variable name {name} is already used by '
            f'{clash[0].surface}'
        )
    var = Var(name, kind, type_)
    variables[surface] = var
    return var


def parse_problem(text: str, name: str = 'problem') -> Problem:
    problem = Problem(name, Signature())
    cc: Dict[Var, Abstraction] = {}
    edges: List[Edge] = []
    for number, line in iter_lines(text):
        decl = _parse(line, 'problem_line', number)
        try:
            _declare(problem, decl, cc, edges)
        except (TypeCheckError, BindingError, ParseError) as exc:
            raise type(exc)(f'{exc} at line {number}') from exc
    problem.pair = check_pair(CcPair(cc, VariableCondition(frozenset(edges))))
    logger.info(
        f'Problem {name}: {len(problem.goals)} goals, {len(cc)} choice '
        f'entries, {len(edges)} edges'
    )
    return problem


def _declare(  # noqa: PLR0912
    problem: Problem,
    decl: Tuple[Any, ...],
    cc: Dict[Var, Abstraction],
    edges: List[Edge],
) -> None:
    kind = decl[0]
    signature = problem.signature
    elaborator = Elaborator(signature, problem.variables)
    if kind == 'sort':
        signature.declare_sort(decl[1])
    elif kind == 'product':
        signature.declare_product(decl[1], decl[2])
    elif kind == 'const':
        signature.declare_const(decl[1], elaborator.type(decl[2]))
    elif kind == 'var':
        declare_variable(
            problem.variables, decl[1], elaborator.type(decl[2])
        )
    elif kind == 'choice':
        var = problem.free_variable(decl[1])
        if var in cc:
            raise TypeCheckError(f'{var.surface} has two choice-conditions')
        cc[var] = elaborator.abstraction(decl[2])
    elif kind == 'edge':
        edges.append(
            (problem.free_variable(decl[1]), problem.free_variable(decl[2]))
        )
    elif kind == 'lemma':
        formula = elaborator.formula(decl[2])
        if free_var_set(formula):
            raise TypeCheckError(f'lemma {decl[1]} has free variables')
        problem.lemmas[decl[1]] = formula
    else:
        problem.goals.append(
            tuple(elaborator.formula(raw) for raw in decl[1])
        )


def load_problem(path: Path) -> Problem:
    return parse_problem(path.read_text(), path.stem)


def parse_script(text: str) -> List[ScriptCommand]:
    commands: List[ScriptCommand] = []
    for number, line in iter_lines(text):
        command: ScriptCommand = _parse(line, 'script_line', number)
        commands.append(replace(command, line=number))
    return commands


@dataclass
class StructureDecl:
    """A structure file before it is checked against a signature; ``None``
    marks a symbol left open."""

    universes: Dict[str, List[Element]] = field(default_factory=dict)
    predicates: Dict[str, Optional[List[Tuple[Element, ...]]]] = field(
        default_factory=dict
    )
    functions: Dict[
        str, Optional[List[Tuple[Tuple[Element, ...], Element]]]
    ] = field(default_factory=dict)


def parse_structure(text: str) -> StructureDecl:
    decl = StructureDecl()
    for number, line in iter_lines(text):
        kind, symbol, payload = _parse(line, 'structure_line', number)
        seen = (
            symbol in decl.universes
            if kind == 'universe'
            else symbol in decl.predicates or symbol in decl.functions
        )
        if seen:
            raise ParseError(f'{symbol} is defined twice', number)
        if kind == 'universe':
            decl.universes[symbol] = payload
        elif kind == 'pred':
            decl.predicates[symbol] = payload
        else:
            decl.functions[symbol] = payload
    return decl


def format_problem(problem: Problem) -> str:
    """Problem text that parses back to the same problem."""
    signature = problem.signature
    lines = [f'sort {name}' for name in signature.sorts
             if name not in signature.products]
    for name, components in signature.products.items():
        lines.append(f'sort {name} = {" * ".join(components)}')
    projections = {
        PROJECTION_NAMES[index]
        for components in signature.products.values()
        for index in range(len(components))
    }
    for name, type_ in signature.constants.items():
        if name not in projections:
            lines.append(f'const {name} : {format_type(type_)}')
    for surface, var in problem.variables.items():
        lines.append(f'var {surface} : {format_type(var.type)}')
    lines.extend(f'choice {entry}' for entry in format_cc(problem.pair.cc))
    lines.extend(f'edge {edge}' for edge in format_edges(problem.pair.vc))
    for name, formula in problem.lemmas.items():
        lines.append(f'lemma {name} : {format_expr(formula)}')
    for goal in problem.goals:
        lines.append('goal ' + ', '.join(format_expr(f) for f in goal))
    return '\n'.join(lines) + '\n'

