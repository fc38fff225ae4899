import itertools
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Sequence,
    Set,
    Tuple,
)

import networkx as nx

from app.syntax import Type, Var, sort_vars
from app.varcond import Edge, VariableCondition, edge_key

Value = object
Valuation = Dict[Var, Value]
Relation = FrozenSet[Edge]


def valuations(
    variables: Sequence[Var], domain: Callable[[Type], Sequence[Value]]
) -> Iterator[Valuation]:
    """Every total valuation of ``variables``, in a fixed order."""
    spaces = [domain(v.type) for v in variables]
    for values in itertools.product(*spaces):
        yield dict(zip(variables, values))


def candidate_edges(
    targets: Iterable[Var], sources: Iterable[Var]
) -> List[Edge]:
    source_list = list(sources)
    return sorted(
        ((s, t) for t in targets for s in source_list if s != t),
        key=edge_key,
    )


def _cycle(graph: 'nx.DiGraph[Var]') -> List[Edge]:
    try:
        return [(a, b) for a, b, *_ in nx.find_cycle(graph)]
    except nx.NetworkXNoCycle:
        return []


def maximal_relations(
    r: VariableCondition, candidates: Sequence[Edge]
) -> List[Relation]:
    """The maximal subsets ``S`` of ``candidates`` with ``r | S`` acyclic.

    Starts from all candidates and removes one candidate edge of some
    remaining cycle at a time; every maximal subset is reached that way.
    ``r`` itself must be acyclic.
    """
    base: 'nx.DiGraph[Var]' = nx.DiGraph()
    base.add_edges_from(r.sorted_edges())
    allowed = set(candidates)
    found: Set[Relation] = set()
    seen: Set[Relation] = set()
    stack: List[Relation] = [frozenset(candidates)]
    while stack:
        chosen = stack.pop()
        if chosen in seen:
            continue
        seen.add(chosen)
        graph = base.copy()
        graph.add_edges_from(chosen)
        cycle = _cycle(graph)
        if not cycle:
            found.add(chosen)
            continue
        for edge in cycle:
            if edge in allowed and edge in chosen:
                stack.append(chosen - {edge})
    maximal = [
        s for s in found if not any(s < other for other in found)
    ]
    return sorted(maximal, key=lambda s: sorted(map(edge_key, s)))


def all_relations(
    r: VariableCondition, candidates: Sequence[Edge]
) -> Iterator[Relation]:
    """Every subset ``S`` of ``candidates`` with ``r | S`` acyclic."""
    edges = list(candidates)
    for mask in itertools.product((False, True), repeat=len(edges)):
        chosen = frozenset(e for e, keep in zip(edges, mask) if keep)
        graph: 'nx.DiGraph[Var]' = nx.DiGraph()
        graph.add_edges_from(r.sorted_edges())
        graph.add_edges_from(chosen)
        if nx.is_directed_acyclic_graph(graph):
            yield chosen


def sources_of(
    relation: Iterable[Edge], targets: Iterable[Var]
) -> Dict[Var, Tuple[Var, ...]]:
    """For each target the sorted variables it reads."""
    result: Dict[Var, List[Var]] = {t: [] for t in targets}
    for source, target in relation:
        if target in result:
            result[target].append(source)
    return {
        t: tuple(sort_vars(s))
        for t, s in result.items()
    }


def is_acyclic_with(r: VariableCondition, relation: Iterable[Edge]) -> bool:
    graph = r.graph()
    graph.add_edges_from(relation)
    return bool(nx.is_directed_acyclic_graph(graph))
