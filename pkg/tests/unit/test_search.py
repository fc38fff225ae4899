import pytest

from app.exceptions import CapExceededError
from app.utils.search import (
    Budget,
    Cells,
    MissingCell,
    holds_everywhere,
    solve,
)

DOMAIN = (0, 1, 2)


def test_cells_raise_for_unassigned_cell() -> None:
    cells = Cells({'x': 1})
    assert cells.get('x', DOMAIN) == 1
    with pytest.raises(MissingCell) as exc:
        cells.get('y', DOMAIN)
    assert exc.value.cell == 'y'
    assert exc.value.domain == DOMAIN


def test_solve_assigns_only_read_cells() -> None:
    def task(cells: Cells) -> bool:
        return cells.get('x', DOMAIN) == 2  # noqa: PLR2004

    assert solve([task]) == {'x': 2}


def test_solve_backtracks_across_tasks() -> None:
    def distinct(cells: Cells) -> bool:
        return cells.get('x', DOMAIN) != cells.get('y', DOMAIN)

    def ordered(cells: Cells) -> bool:
        return cells.get('y', DOMAIN) < cells.get('x', DOMAIN)

    assert solve([distinct, ordered]) == {'x': 1, 'y': 0}


def test_solve_respects_fixed_cells() -> None:
    def task(cells: Cells) -> bool:
        return cells.get('x', DOMAIN) == cells.get('y', DOMAIN)

    assert solve([task], {'x': 1}) == {'x': 1, 'y': 1}
    assert solve([task], {'x': 1, 'y': 0}) is None


def test_solve_reports_no_solution() -> None:
    def never(cells: Cells) -> bool:
        return cells.get('x', DOMAIN) > 2  # noqa: PLR2004

    assert solve([never]) is None


def test_budget_caps_the_search() -> None:
    def never(cells: Cells) -> bool:
        return cells.get('x', DOMAIN) > 2  # noqa: PLR2004

    with pytest.raises(CapExceededError, match='EPSK_MAX_SEARCH_NODES'):
        solve([never], budget=Budget(limit=2))


def test_holds_everywhere_needs_total_cells() -> None:
    def task(cells: Cells) -> bool:
        return cells.get('x', DOMAIN) == 0

    assert holds_everywhere([task], {'x': 0})
    with pytest.raises(MissingCell):
        holds_everywhere([task], {})
