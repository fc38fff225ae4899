from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple, get_args

from app.choicecond import CcPair
from app.constants import VARIANT, Variant
from app.epsilon import eliminate_choice_terms
from app.exceptions import OracleError
from app.oracle import FiniteStructure, is_cr_valid
from app.syntax import (
    BOOL,
    And,
    BaseType,
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
    Pred,
    Sequent,
    Signature,
    Term,
    Truth,
    Var,
    split_type,
)
from app.utils.logger import logger

AxiomName = Literal['E2', 'eps5', 'vext', 'eps0', 'iota0', 'mu0']

AXIOM_NAMES = list(get_args(AxiomName))

ORDER_PREDICATE = 'leq'


@dataclass(frozen=True)
class AxiomInstance:
    name: AxiomName
    schema: Formula
    goals: List[Sequent]
    pair: CcPair


def unary_predicates(signature: Signature) -> List[str]:
    result = []
    for name, type_ in signature.constants.items():
        args, res = split_type(type_)
        if res == BOOL and len(args) == 1 and isinstance(args[0], BaseType):
            result.append(name)
    return result


def _predicates(
    signature: Signature, chosen: Sequence[str], count: int
) -> List[str]:
    names = list(chosen)
    available = unary_predicates(signature)
    for name in names:
        if name not in available:
            raise OracleError(f'{name} is not a unary predicate')
    if not names:
        if not available:
            raise OracleError('the signature has no unary predicate')
        names = [available[0]]
    while len(names) < count:
        names.append(names[-1])
    return names[:count]


def _sort_of(signature: Signature, predicate: str) -> BaseType:
    (arg,), _ = split_type(signature.constants[predicate])
    return arg  # type: ignore[return-value]


def _atom(predicate: str, t: Term) -> Formula:
    return Pred(predicate, (t,))


def _bound(name: str, sort: BaseType) -> Var:
    return Var(name, Kind.BOUND, sort)


def _extensionality(
    signature: Signature, chosen: Sequence[str]
) -> Tuple[Formula, Formula]:
    """(E2) and (vext) for two unary predicates over one sort."""
    p0, p1 = _predicates(signature, chosen, 2)
    sort = _sort_of(signature, p0)
    if _sort_of(signature, p1) != sort:
        raise OracleError(f'{p0} and {p1} range over different sorts')
    x, y = _bound('x', sort), _bound('y', sort)
    a0, a1 = _atom(p0, x), _atom(p1, x)
    conclusion = Eq(Eps(x, a0), Eps(x, a1))
    plain = Forall(x, Iff(a0, a1))
    very = Forall(
        x,
        Iff(
            Imp(Exists(y, _atom(p0, y)), a0),
            Imp(Exists(y, _atom(p1, y)), a1),
        ),
    )
    return Imp(plain, conclusion), Imp(very, conclusion)


def _least(signature: Signature, chosen: Sequence[str]) -> Formula:
    (p,) = _predicates(signature, chosen, 1)
    sort = _sort_of(signature, p)
    expected = FunType(sort, FunType(sort, BOOL))
    if signature.constants.get(ORDER_PREDICATE) != expected:
        raise OracleError(
            f'(mu0) needs a predicate {ORDER_PREDICATE} : '
            f'{sort} > {sort} > o'
        )
    x, y, z = (_bound(n, sort) for n in ('x', 'y', 'z'))
    definiens = Eps(
        x,
        And(
            _atom(p, x),
            Forall(z, Imp(_atom(p, z), Pred(ORDER_PREDICATE, (x, z)))),
        ),
    )
    return Imp(
        Exists(x, _atom(p, x)),
        And(
            _atom(p, definiens),
            Forall(
                y, Imp(_atom(p, y), Pred(ORDER_PREDICATE, (definiens, y)))
            ),
        ),
    )


def schema(
    name: AxiomName, signature: Signature, predicates: Sequence[str] = ()
) -> Formula:
    """The axiom with explicit choice terms over ``signature``."""
    if name in ('E2', 'vext'):
        e2, vext = _extensionality(signature, predicates)
        return e2 if name == 'E2' else vext
    if name == 'mu0':
        return _least(signature, predicates)
    if name == 'eps5':
        sorts = [s for s in signature.sorts if s not in signature.products]
        if predicates:
            (p,) = _predicates(signature, predicates, 1)
            sort = _sort_of(signature, p)
        elif sorts:
            sort = signature.sorts[sorts[0]]
        else:
            raise OracleError('the signature declares no sort')
        x = _bound('x', sort)
        return Eq(Eps(x, Falsity()), Eps(x, Truth()))
    (p,) = _predicates(signature, predicates, 1)
    x = _bound('x', _sort_of(signature, p))
    if name == 'eps0':
        return Imp(Exists(x, _atom(p, x)), _atom(p, Eps(x, _atom(p, x))))
    if name == 'iota0':
        return Imp(
            ExistsUnique(x, _atom(p, x)), _atom(p, Iota(x, _atom(p, x)))
        )
    raise OracleError(f'unknown axiom {name}')


def axiom_instance(
    name: AxiomName, signature: Signature, predicates: Sequence[str] = ()
) -> AxiomInstance:
    """The axiom with its choice terms replaced by delta-plus variables.

    Distinct choice terms stay distinct variables even when the chosen
    predicates make them alike; repeated occurrences of one term in (mu0)
    share a variable.
    """
    formula = schema(name, signature, predicates)
    result = eliminate_choice_terms(formula, CcPair(), share=name == 'mu0')
    return AxiomInstance(name, formula, [(result.formula,)], result.pair)


def check_axiom(
    name: AxiomName,
    st: FiniteStructure,
    variant: Variant = VARIANT,
    predicates: Sequence[str] = (),
) -> bool:
    instance = axiom_instance(name, st.signature, predicates)
    valid = is_cr_valid(instance.goals, instance.pair, st, variant)
    logger.info(
        f'Axiom {name} is {"valid" if valid else "invalid"} under '
        f'{variant} pi'
    )
    return valid
