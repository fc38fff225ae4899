import pytest

from app.exceptions import ConditionError, KernelError, OracleError
from app.parser import Problem, parse_problem
from app.utils.reports import (
    check_model,
    choice_dumps,
    edge_dumps,
    eliminate,
    eliminate_goal_terms,
    goal_texts,
    load_structures,
    parse_edges,
    prove,
    with_edges,
)

CHOICES = """
sort i
const P : i > o
var a^g : i
var y^d+ : i
choice y^d+ := P(y^d+)
goal P(a^g)
goal ~P(a^g)
"""


@pytest.fixture
def choices() -> Problem:
    return parse_problem(CHOICES, 'choices')


def test_parse_edges(choices: Problem) -> None:
    ((a, y),) = parse_edges(choices, ['a^g -> y^d+'])
    assert (a.surface, y.surface) == ('a^g', 'y^d+')
    with pytest.raises(KernelError, match='invalid edge'):
        parse_edges(choices, ['a^g y^d+'])


def test_with_edges_checks_the_pair(choices: Problem) -> None:
    assert with_edges(choices.pair, []) is choices.pair
    edges = parse_edges(choices, ['a^g -> y^d+', 'y^d+ -> a^g'])
    with pytest.raises(ConditionError, match='cyclic'):
        with_edges(choices.pair, edges)


def test_load_structures(choices: Problem) -> None:
    label, structures = load_structures(choices, None, True, 1)
    assert label == 'all structures up to size 1'
    assert len(structures) == 2  # noqa: PLR2004
    with pytest.raises(OracleError, match='give a structure'):
        load_structures(choices, None, False, 1)


def test_eliminate_goal_terms_keeps_names_apart() -> None:
    problem = parse_problem(
        'sort i\nconst P : i > o\ngoal P(eps x:i. P(x))\n'
        'goal ~P(eps x:i. P(x))\n'
    )
    goals, pair = eliminate_goal_terms(problem.goals, problem.pair)
    assert len(pair.cc) == 2  # noqa: PLR2004
    assert goal_texts(goals) == ['P(x^d+)', '~P(x1^d+)']


def test_eliminate_report_depths(choices: Problem) -> None:
    report = eliminate(choices, 'vc')
    assert report.texts == ['P(a^g)', '~P(a^g)']
    assert report.nesting == [0, 0]


def test_prove_keeps_the_trace_of_a_failing_script(
    choices: Problem,
) -> None:
    run = prove(choices, 'close 1\n')
    assert not run.succeeded
    assert run.error is not None
    assert run.error.startswith('script line 1')
    assert run.trace.steps == []
    assert run.trace.open_goals == ['P(a^g)', '~P(a^g)']


def test_check_model_joint_and_separate(choices: Problem) -> None:
    structure = 'universe i = {a, b}\npred P = {(a)}\n'
    separate = check_model(choices, structure)
    assert [r.valid for r in separate] == [True, True]
    (joint,) = check_model(choices, structure, joint=True)
    assert not joint.valid
    assert joint.goal == 'P(a^g) | ~P(a^g)'


def test_dumps_order_variables_by_name() -> None:
    problem = parse_problem(
        'sort i\nvar a^g : i\nvar x^d+ : i\nvar x1^d+ : i\n'
        'choice x1^d+ := T\nchoice x^d+ := T\n'
        'edge a^g -> x1^d+\nedge a^g -> x^d+\ngoal T\n'
    )
    choices = choice_dumps(problem.pair.cc)
    assert [c.variable for c in choices] == ['x^d+', 'x1^d+']
    edges = edge_dumps(problem.pair.vc.edges)
    assert [e.target for e in edges] == ['x^d+', 'x1^d+']
