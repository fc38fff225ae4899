from typing import List

import pytest

from app.calculus import (
    ProofState,
    apply_alpha,
    apply_beta,
    apply_cut,
    apply_delta_minus,
    apply_delta_plus,
    apply_gamma,
    close,
    closing_reason,
    format_state,
    initial_state,
    replay_script,
)
from app.exceptions import ConditionError, RuleError, ScriptError
from app.parser import parse_formula, parse_problem, parse_script
from app.syntax import Const, format_sequent

HEADER = """
sort i
const P : i > o
const Q : i > o
const R : i > i > o
const c : i
"""


def _state(body: str) -> ProofState:
    return initial_state(parse_problem(HEADER + body))


def _texts(st: ProofState) -> List[str]:
    return [format_sequent(seq) for seq in st.sequents]


def test_alpha_prepends_components() -> None:
    st = _state('var a^g : i\ngoal (ex x:i. P(x)) -> P(a^g)\n')
    st = apply_alpha(st, 1, 1)
    assert _texts(st) == ['~ex x:i. P(x), P(a^g)']


def test_alpha_rejects_conjunction() -> None:
    st = _state('goal P(c) /\\ Q(c)\n')
    with pytest.raises(RuleError, match='alpha does not apply'):
        apply_alpha(st, 1, 1)


def test_beta_splits_the_goal() -> None:
    st = _state('goal P(c) /\\ Q(c), R(c, c)\n')
    st = apply_beta(st, 1, 1)
    assert _texts(st) == ['P(c), R(c, c)', 'Q(c), R(c, c)']
    assert [goal.id for goal in st.goals] == [2, 3]


def test_beta_on_negated_implication() -> None:
    st = _state('goal ~(P(c) -> Q(c))\n')
    st = apply_beta(st, 1, 1)
    assert _texts(st) == ['P(c)', '~Q(c)']


def test_gamma_keeps_the_principal_formula() -> None:
    st = _state('goal ex x:i. P(x)\n')
    st = apply_gamma(st, 1, 1, Const('c', st.signature.sort('i')))
    assert _texts(st) == ['P(c), ex x:i. P(x)']


def test_gamma_on_negated_universal() -> None:
    st = _state('goal ~(all x:i. P(x))\n')
    st = apply_gamma(st, 1, 1, Const('c', st.signature.sort('i')))
    assert _texts(st) == ['~P(c), ~all x:i. P(x)']


def test_delta_minus_depends_on_rigid_variables() -> None:
    st = _state('var a^g : i\ngoal (ex x:i. P(x)) -> P(a^g)\n')
    st = apply_delta_minus(apply_alpha(st, 1, 1), 1, 1)
    assert _texts(st) == ['~P(x^d-), P(a^g)']
    assert format_state(st)[-1] == 'edge a^g -> x^d-'


def test_delta_plus_records_a_choice_condition() -> None:
    st = _state('var a^g : i\ngoal (ex x:i. P(x)) -> P(a^g)\n')
    st = apply_delta_plus(apply_alpha(st, 1, 1), 1, 1, 'w')
    assert _texts(st) == ['~P(w^d+), P(a^g)']
    assert 'choice w^d+ := P(w^d+)' in format_state(st)
    assert st.pair.vc.edges == frozenset()


def test_delta_rejects_a_used_name() -> None:
    st = _state('var a^g : i\ngoal all x:i. P(x)\n')
    with pytest.raises(RuleError, match='already in use'):
        apply_delta_minus(st, 1, 1, 'a')


def test_cut_splits_on_a_formula() -> None:
    st = _state('goal Q(c)\n')
    f = parse_formula('P(c)', st.signature)
    st = apply_cut(st, 1, f)
    assert _texts(st) == ['P(c), Q(c)', '~P(c), Q(c)']


def test_closing_reasons() -> None:
    st = _state('goal P(c), Q(c), ~P(c)\n')
    assert closing_reason(st.sequents[0]) == ('P(c)', '~P(c)')
    eq = _state('goal c = c\n')
    assert closing_reason(eq.sequents[0]) == ('c = c', 'c = c')
    assert closing_reason(_state('goal P(c)\n').sequents[0]) is None


def test_close_rejects_open_goal() -> None:
    st = _state('goal P(c)\n')
    with pytest.raises(RuleError, match='goal 1 is not closed: P\\(c\\)'):
        close(st, 1)


def test_bad_addresses() -> None:
    st = _state('goal P(c)\n')
    with pytest.raises(RuleError, match='no goal 2'):
        apply_alpha(st, 2, 1)
    with pytest.raises(RuleError, match='no position 3'):
        apply_alpha(st, 1, 3)


def test_replay_liberalized_proof() -> None:
    problem = parse_problem(
        HEADER + 'var a^g : i\ngoal (ex x:i. P(x)) -> P(a^g)\n'
    )
    script = 'alpha 1 1\ndelta+ 1 1\ninst {a^g := x^d+}\nclose 1\n'
    st = replay_script(problem, parse_script(script))
    assert st.is_proved
    assert st.closed == 1
    assert [step.rule for step in st.trace] == [
        'alpha', 'delta_plus', 'instantiate', 'close'
    ]
    assert [step.line for step in st.trace] == [1, 2, 3, 4]


def test_replay_rejects_non_r_substitution() -> None:
    problem = parse_problem(
        HEADER + 'var a^g : i\ngoal (ex x:i. P(x)) -> P(a^g)\n'
    )
    script = 'alpha 1 1\ndelta- 1 1\ninst {a^g := x^d-}\n'
    with pytest.raises(ScriptError) as exc:
        replay_script(problem, parse_script(script))
    assert exc.value.line == 3  # noqa: PLR2004
    assert 'is not an R-substitution' in str(exc.value)
    assert isinstance(exc.value.__cause__, ConditionError)
    assert isinstance(exc.value.state, ProofState)
    assert len(exc.value.state.trace) == 2  # noqa: PLR2004


def test_instantiating_a_choice_variable_adds_an_obligation() -> None:
    problem = parse_problem(
        HEADER + 'var z^d+ : i\nchoice z^d+ := P(z^d+)\ngoal P(z^d+)\n'
    )
    st = replay_script(problem, parse_script('inst {z^d+ := c}\n'))
    assert _texts(st) == ['P(c)', 'ex z:i. P(z) -> P(c)']
    assert st.pair.cc == {}
    assert st.trace[-1].new_goals == (2,)


def test_only_rigid_variables_are_instantiated() -> None:
    problem = parse_problem(HEADER + 'var d^d- : i\ngoal P(d^d-)\n')
    with pytest.raises(ScriptError, match='only gamma- and delta-plus'):
        replay_script(problem, parse_script('inst {d^d- := c}\n'))


def test_lemma_is_added_as_conjugate() -> None:
    problem = parse_problem(
        HEADER + 'lemma refl : all x:i. R(x, x)\ngoal R(c, c)\n'
    )
    st = replay_script(problem, parse_script('lemma refl\n'))
    assert _texts(st) == ['~all x:i. R(x, x), R(c, c)']


def test_lemma_for_a_choice_condition() -> None:
    problem = parse_problem(
        HEADER + 'var z^d+ : i\nchoice z^d+ := P(z^d+)\ngoal P(z^d+)\n'
    )
    st = replay_script(problem, parse_script('lemma 1 q(z^d+)\n'))
    assert _texts(st) == [
        "~(ex z':i. P(z') -> P(z^d+)), P(z^d+)"
    ]


def test_extend_and_edge_commands() -> None:
    problem = parse_problem(HEADER + 'var x^d- : i\ngoal P(x^d-)\n')
    script = (
        'extend y^d+ : i := P(x^d-) -> Q(y^d+)\n'
        'var u^g : i\n'
        'edge u^g -> x^d-\n'
    )
    st = replay_script(problem, parse_script(script))
    assert set(st.variables) == {'x^d-', 'y^d+', 'u^g'}
    edges = {(a.surface, b.surface) for a, b in st.pair.vc.edges}
    assert edges == {('x^d-', 'y^d+'), ('u^g', 'x^d-')}


def test_cyclic_edge_command_is_rejected() -> None:
    problem = parse_problem(
        HEADER + 'var x^d- : i\nvar u^g : i\nedge u^g -> x^d-\ngoal T\n'
    )
    with pytest.raises(ScriptError, match='variable-condition is cyclic'):
        replay_script(problem, parse_script('edge x^d- -> u^g\n'))
