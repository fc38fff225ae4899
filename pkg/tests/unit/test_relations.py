from typing import Tuple

from app.syntax import BaseType, Kind, Var
from app.utils.relations import (
    all_relations,
    candidate_edges,
    is_acyclic_with,
    maximal_relations,
    sources_of,
    valuations,
)
from app.varcond import VariableCondition

IND = BaseType('i')
A = Var('a', Kind.GAMMA, IND)
B = Var('b', Kind.DELTA_MINUS, IND)
D = Var('d', Kind.DELTA_MINUS, IND)
Y = Var('y', Kind.DELTA_PLUS, IND)


def test_candidate_edges_point_into_targets() -> None:
    assert candidate_edges([A], [D, B]) == [(B, A), (D, A)]
    assert candidate_edges([A], [A]) == []


def test_maximal_relations_break_every_cycle() -> None:
    r = VariableCondition(frozenset({(A, B)}))
    relations = maximal_relations(r, [(B, A), (D, A)])
    assert relations == [frozenset({(D, A)})]


def test_maximal_relations_of_a_two_cycle() -> None:
    relations = maximal_relations(VariableCondition(), [(A, Y), (Y, A)])
    assert relations == [frozenset({(A, Y)}), frozenset({(Y, A)})]


def test_all_relations_lists_every_acyclic_subset() -> None:
    relations = list(all_relations(VariableCondition(), [(A, Y), (Y, A)]))
    assert relations == [
        frozenset(), frozenset({(Y, A)}), frozenset({(A, Y)})
    ]


def test_sources_of_sorts_by_name() -> None:
    relation = frozenset({(D, A), (B, A), (B, Y)})
    assert sources_of(relation, [A, Y]) == {A: (B, D), Y: (B,)}
    assert sources_of(relation, [D]) == {D: ()}


def test_is_acyclic_with() -> None:
    r = VariableCondition(frozenset({(A, B)}))
    assert is_acyclic_with(r, [(D, A)])
    assert not is_acyclic_with(r, [(B, A)])


def test_valuations_enumerate_in_order() -> None:
    def domain(_: object) -> Tuple[str, str]:
        return ('u', 'v')

    result = list(valuations([A, B], domain))
    assert len(result) == 4  # noqa: PLR2004
    assert result[0] == {A: 'u', B: 'u'}
    assert result[-1] == {A: 'v', B: 'v'}
