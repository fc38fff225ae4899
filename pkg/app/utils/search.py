"""Backtracking over lazily assigned table cells: a task reading an
unassigned cell raises ``MissingCell`` and the solver branches on it."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Optional, Sequence

from app.constants import MAX_SEARCH_NODES
from app.exceptions import CapExceededError

Cell = Hashable
Task = Callable[['Cells'], bool]


class MissingCell(Exception):  # noqa: N818
    def __init__(self, cell: Cell, domain: Sequence[object]) -> None:
        self.cell = cell
        self.domain = domain
        super().__init__(repr(cell))


@dataclass
class Cells:
    values: Dict[Cell, object] = field(default_factory=dict)

    def get(self, cell: Cell, domain: Sequence[object]) -> object:
        if cell in self.values:
            return self.values[cell]
        raise MissingCell(cell, domain)


@dataclass
class Budget:
    limit: int = MAX_SEARCH_NODES
    used: int = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise CapExceededError(
                'EPSK_MAX_SEARCH_NODES', self.limit, self.used
            )


def solve(
    tasks: Sequence[Task],
    fixed: Optional[Dict[Cell, object]] = None,
    budget: Optional[Budget] = None,
) -> Optional[Dict[Cell, object]]:
    """Cell values on top of ``fixed`` making every task hold, or None."""
    budget = budget or Budget()
    cells = Cells(dict(fixed or {}))

    def run(start: int) -> bool:
        index = start
        while index < len(tasks):
            try:
                holds = tasks[index](cells)
            except MissingCell as missing:
                for value in missing.domain:
                    budget.tick()
                    cells.values[missing.cell] = value
                    if run(index):
                        return True
                del cells.values[missing.cell]
                return False
            if not holds:
                return False
            index += 1
        return True

    if run(0):
        return cells.values
    return None


def holds_everywhere(
    tasks: Sequence[Task], fixed: Dict[Cell, object]
) -> bool:
    cells = Cells(fixed)
    return all(task(cells) for task in tasks)
