import random
from typing import List, Tuple

import pytest

from app.choicecond import CcPair
from app.exceptions import CapExceededError, OracleError
from app.oracle import (
    EMPTY_TABLE,
    FiniteStructure,
    all_structures,
    enumerate_e,
    epsilon_apply,
    evaluate,
    find_compatible_pi,
    find_witness,
    is_compatible,
    is_cr_valid,
    is_r_valid,
    reduces_check,
    structures_from_decl,
    sweep,
)
from app.parser import Problem, parse_formula, parse_problem, parse_structure
from app.syntax import (
    Const,
    Formula,
    Sequent,
    apply_substitution,
    free_var_set,
)
from tests.generators import FormulaGenerator, declarations

HEADER = """
sort i
const P : i > o
const Q : i > o
const c : i
"""

STRUCTURE = """
universe i = {a, b}
pred P = {(a)}
pred Q = {}
const c = b
"""


FREE = ('a^g', 'd^d-', 'y^d+')


def _problem(body: str) -> Problem:
    return parse_problem(HEADER + body)


def _structure(problem: Problem, text: str = STRUCTURE) -> FiniteStructure:
    (st,) = structures_from_decl(problem.signature, parse_structure(text))
    return st


def _goals(problem: Problem) -> List[Sequent]:
    return list(problem.goals)


def test_all_structures_counts_every_interpretation() -> None:
    problem = parse_problem('sort i\nconst P : i > o\n')
    structures = all_structures(problem.signature, 2)
    assert len(structures) == 6  # noqa: PLR2004
    assert structures[0].universes == {'i': ('i0',)}


def test_all_structures_respects_the_universe_cap() -> None:
    problem = parse_problem('sort i\n')
    with pytest.raises(CapExceededError, match='EPSK_MAX_UNIVERSE'):
        all_structures(problem.signature, 4)


def test_open_symbols_range_over_all_tables() -> None:
    problem = _problem('goal T\n')
    text = 'universe i = {a, b}\npred P = ?\npred Q = {}\nconst c = ?\n'
    structures = structures_from_decl(
        problem.signature, parse_structure(text)
    )
    assert len(structures) == 8  # noqa: PLR2004


def test_missing_interpretation_is_an_error() -> None:
    problem = _problem('goal T\n')
    with pytest.raises(OracleError, match='no interpretation given for Q'):
        structures_from_decl(
            problem.signature,
            parse_structure('universe i = {a}\npred P = ?\nconst c = a\n'),
        )


def test_partial_function_is_an_error() -> None:
    problem = parse_problem('sort i\nconst f : i > i\n')
    with pytest.raises(OracleError, match='not total'):
        structures_from_decl(
            problem.signature,
            parse_structure('universe i = {a, b}\nfun f = {a -> b}\n'),
        )


def test_evaluate_quantifiers_and_constants() -> None:
    problem = _problem('goal T\n')
    st = _structure(problem)
    signature = problem.signature
    assert evaluate(st, {}, parse_formula('ex x:i. P(x)', signature))
    assert not evaluate(st, {}, parse_formula('all x:i. P(x)', signature))
    assert not evaluate(st, {}, parse_formula('P(c)', signature))
    assert evaluate(st, {}, parse_formula('ex! x:i. P(x)', signature))


def test_gamma_variable_is_chosen_by_e() -> None:
    problem = _problem('var a^g : i\ngoal P(a^g)\n')
    assert is_cr_valid(_goals(problem), problem.pair, _structure(problem))


def test_delta_minus_variable_ranges_over_everything() -> None:
    problem = _problem('var d^d- : i\ngoal P(d^d-)\n')
    assert not is_cr_valid(
        _goals(problem), problem.pair, _structure(problem)
    )


def test_gamma_may_read_delta_minus_unless_forbidden() -> None:
    body = 'var a^g : i\nvar d^d- : i\n{edge}goal a^g = d^d-\n'
    free = _problem(body.format(edge=''))
    assert is_cr_valid(_goals(free), free.pair, _structure(free))
    fixed = _problem(body.format(edge='edge a^g -> d^d-\n'))
    assert not is_cr_valid(_goals(fixed), fixed.pair, _structure(fixed))


def test_committed_choice_variants() -> None:
    problem = _problem(
        'var x^d+ : i\nvar y^d+ : i\nchoice x^d+ := T\nchoice y^d+ := T\n'
        'goal x^d+ = y^d+\n'
    )
    st = _structure(problem)
    assert is_cr_valid(_goals(problem), problem.pair, st, 'some')
    assert not is_cr_valid(_goals(problem), problem.pair, st, 'any')


def test_r_validity_treats_delta_plus_as_delta() -> None:
    problem = _problem('var y^d+ : i\nchoice y^d+ := P(y^d+)\ngoal P(y^d+)\n')
    st = _structure(problem)
    assert is_cr_valid(_goals(problem), problem.pair, st, 'any')
    assert not is_r_valid(_goals(problem), problem.pair.vc, st)


def test_find_witness_returns_compatible_tables() -> None:
    problem = _problem(
        'var a^g : i\nvar y^d+ : i\nchoice y^d+ := P(y^d+)\n'
        'goal P(y^d+) /\\ a^g = y^d+\n'
    )
    st = _structure(problem)
    witness = find_witness(_goals(problem), problem.pair, st)
    assert witness is not None
    e, pi = witness
    y = problem.free_variable('y^d+')
    a = problem.free_variable('a^g')
    assert epsilon_apply(pi, {}, y) == 'a'
    assert e.sources(a) == (y,)
    assert epsilon_apply(e, {y: 'a'}, a) == 'a'
    assert is_compatible(pi, problem.pair, e, st)


def test_find_compatible_pi_for_empty_e() -> None:
    problem = _problem('var y^d+ : i\nchoice y^d+ := P(y^d+)\ngoal T\n')
    st = _structure(problem)
    pi = find_compatible_pi(problem.pair, EMPTY_TABLE, st)
    assert epsilon_apply(pi, {}, problem.free_variable('y^d+')) == 'a'
    assert pi.format() == ['y^d+[] = {() -> a}']


def test_epsilon_apply_needs_source_values() -> None:
    problem = _problem('var y^d+ : i\ngoal T\n')
    with pytest.raises(OracleError, match='not a target'):
        epsilon_apply(EMPTY_TABLE, {}, problem.free_variable('y^d+'))


def test_reduction_check() -> None:
    problem = _problem('goal P(c) \\/ Q(c)\ngoal P(c)\n')
    weak, strong = problem.goals
    for st in all_structures(problem.signature, 2):
        assert reduces_check([weak], [strong], CcPair(), st)
    counter = _structure(
        problem,
        'universe i = {a}\npred P = {}\npred Q = {(a)}\nconst c = a\n',
    )
    assert not reduces_check([strong], [weak], CcPair(), counter)


def test_oracle_caps() -> None:
    problem = _problem(
        'var a^g : i\nvar b^g : i\nvar e^g : i\nvar f^g : i\n'
        'goal P(a^g), P(b^g), P(e^g), P(f^g)\n'
    )
    with pytest.raises(CapExceededError, match='EPSK_MAX_GAMMA'):
        is_cr_valid(_goals(problem), problem.pair, _structure(problem))


def test_sweep_collects_failures() -> None:
    problem = _problem('goal P(c)\n')
    structures = all_structures(problem.signature, 1)
    result = sweep(_goals(problem), problem.pair, structures)
    assert result.checked == 4  # noqa: PLR2004
    assert not result.valid
    assert len(result.failures) == 2  # noqa: PLR2004


def test_enumerate_e_counts_tables_per_relation() -> None:
    body = 'var a^g : i\nvar d^d- : i\n{edge}goal a^g = d^d-\n'
    free = _problem(body.format(edge=''))
    a = free.free_variable('a^g')
    d = free.free_variable('d^d-')
    st = _structure(free)
    tables = list(enumerate_e(st, free.pair.vc, [a], [d]))
    assert len(tables) == 6  # noqa: PLR2004
    fixed = _problem(body.format(edge='edge a^g -> d^d-\n'))
    tables = list(enumerate_e(st, fixed.pair.vc, [a], [d]))
    assert len(tables) == 2  # noqa: PLR2004
    assert all(table.sources(a) == () for table in tables)


def test_enumerate_e_checks_the_cap_as_it_goes(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    monkeypatch.setattr('app.oracle.MAX_TABLES', 3)
    problem = _problem('var a^g : i\nvar d^d- : i\ngoal a^g = d^d-\n')
    a = problem.free_variable('a^g')
    d = problem.free_variable('d^d-')
    tables = enumerate_e(_structure(problem), problem.pair.vc, [a], [d])
    assert next(tables).sources(a) == ()
    with pytest.raises(CapExceededError, match='EPSK_MAX_TABLES'):
        list(tables)


@pytest.fixture(scope='module')
def small_structures() -> List[FiniteStructure]:
    """Every structure over P, Q and c with at most two individuals."""
    return all_structures(parse_problem(HEADER).signature, 2)


def _random_formula(seed: int) -> Tuple[Problem, Formula]:
    text = FormulaGenerator(seed, free=FREE).formula()
    problem = _problem(declarations(FREE) + f'goal {text}\n')
    ((f,),) = problem.goals
    return problem, f


def test_evaluation_reads_only_free_variables(
    small_structures: List[FiniteStructure],
) -> None:
    rng = random.Random(11)
    for seed in range(150):
        problem, f = _random_formula(seed)
        st = rng.choice(small_structures)
        domain = st.universes['i']
        full = {v: rng.choice(domain) for v in problem.variables.values()}
        free = free_var_set(f)
        restricted = {v: full[v] for v in free}
        varied = {
            v: full[v] if v in free else rng.choice(domain)
            for v in problem.variables.values()
        }
        expected = evaluate(st, full, f)
        assert evaluate(st, restricted, f) == expected
        assert evaluate(st, varied, f) == expected


def test_substitution_evaluates_through_the_value(
    small_structures: List[FiniteStructure],
) -> None:
    rng = random.Random(12)
    for seed in range(150):
        problem, f = _random_formula(seed)
        st = rng.choice(small_structures)
        a = problem.free_variable('a^g')
        c = Const('c', problem.signature.sort('i'))
        domain = st.universes['i']
        v = {x: rng.choice(domain) for x in problem.variables.values()}
        for t in (c, problem.free_variable('d^d-')):
            substituted = apply_substitution(f, {a: t})
            assert evaluate(st, v, substituted) == evaluate(
                st, {**v, a: evaluate(st, v, t)}, f
            ), f'{seed}: {t}'


def test_reduction_is_transitive(
    small_structures: List[FiniteStructure],
) -> None:
    rng = random.Random(13)
    free = ('a^g', 'd^d-')
    for seed in range(60):
        gen = FormulaGenerator(seed, quantifiers=1, depth=2, free=free)
        first, second, third = (gen.formula() for _ in range(3))
        problem = _problem(
            declarations(free)
            + f'goal {first}, {third}\ngoal {first}\ngoal {second}\n'
        )
        wide, narrow, other = problem.goals
        pair = problem.pair
        st = rng.choice(small_structures)
        assert reduces_check([wide], [narrow], pair, st)
        assert reduces_check([narrow], [narrow, other], pair, st)
        assert reduces_check([wide], [narrow, other], pair, st)
        g0, g1, g2 = rng.sample(
            [[wide], [narrow], [other], [narrow, other]], 3
        )
        if reduces_check(g0, g1, pair, st) and reduces_check(
            g1, g2, pair, st
        ):
            assert reduces_check(g0, g2, pair, st), f'seed {seed}'
