from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set
from typing import Tuple

import networkx as nx

from app.exceptions import ConditionError
from app.syntax import Term, Var, format_substitution, free_var_set
from app.syntax import sort_vars

Edge = Tuple[Var, Var]


def edge_key(edge: Edge) -> Tuple[str, str, str, str]:
    a, b = edge
    return a.name, a.surface, b.name, b.surface


@dataclass(frozen=True)
class VariableCondition:
    edges: FrozenSet[Edge] = frozenset()

    def __post_init__(self) -> None:
        bad = sorted(
            {v.surface for edge in self.edges for v in edge if not v.is_free}
        )
        if bad:
            raise ConditionError(
                [f'{name} is not a free variable' for name in bad]
            )

    def add(self, edges: Iterable[Edge]) -> 'VariableCondition':
        new = self.edges | frozenset(edges)
        if new == self.edges:
            return self
        return VariableCondition(new)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges, key=edge_key)

    def variables(self) -> Set[Var]:
        return {v for edge in self.edges for v in edge}

    def graph(self) -> 'nx.DiGraph[Var]':
        graph: 'nx.DiGraph[Var]' = nx.DiGraph()
        graph.add_nodes_from(sort_vars(self.variables()))
        graph.add_edges_from(self.sorted_edges())
        return graph


EMPTY = VariableCondition()


def sigma_update(
    r: VariableCondition, s: Mapping[Var, Term]
) -> VariableCondition:
    """``r`` plus an edge from each free variable of ``s(x)`` to ``x``."""
    return r.add(
        (z, x) for x, t in s.items() for z in free_var_set(t)
    )


def is_acyclic(r: VariableCondition) -> bool:
    return bool(nx.is_directed_acyclic_graph(r.graph()))


def find_cycle(r: VariableCondition) -> Optional[List[Var]]:
    """A closed walk ``[a, b, ..., a]`` through some cycle, if any."""
    graph = r.graph()
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return None
    nodes = [edge[0] for edge in cycle]
    return nodes + [nodes[0]]


def is_r_substitution(r: VariableCondition, s: Mapping[Var, Term]) -> bool:
    return is_acyclic(sigma_update(r, s))


def check_r_substitution(
    r: VariableCondition, s: Mapping[Var, Term]
) -> VariableCondition:
    updated = sigma_update(r, s)
    cycle = find_cycle(updated)
    if cycle is not None:
        raise ConditionError(
            [f'{format_substitution(s)} is not an R-substitution'],
            [v.surface for v in cycle],
        )
    return updated


def reachable(r: VariableCondition, targets: Iterable[Var]) -> Set[Var]:
    """Every variable with a path of length >= 0 into ``targets``."""
    graph = r.graph()
    result: Set[Var] = set()
    for target in targets:
        result.add(target)
        if target in graph:
            result |= nx.ancestors(graph, target)
    return result


def closure_on(
    r: VariableCondition, variables: Iterable[Var]
) -> Dict[Var, Set[Var]]:
    """Transitive closure of ``r`` restricted to ``variables``: each
    variable is mapped to the variables it reaches by a non-empty path,
    possibly through variables outside the set."""
    graph = r.graph()
    keep = set(variables)
    result: Dict[Var, Set[Var]] = {v: set() for v in keep}
    for v in keep:
        if v in graph:
            result[v] = nx.descendants(graph, v) & keep
    return result


def format_edges(r: VariableCondition) -> List[str]:
    return [f'{a.surface} -> {b.surface}' for a, b in r.sorted_edges()]
