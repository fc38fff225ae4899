from pathlib import Path

import pytest

from app.exceptions import (
    BindingError,
    ConditionError,
    ParseError,
    TypeCheckError,
)
from app.parser import (
    format_problem,
    parse_formula,
    parse_problem,
    parse_script,
    parse_structure,
    split_free,
)
from app.syntax import Forall, Imp, Kind, Signature, format_expr
from app.utils.corpus_runner import load_manifest

PROBLEM_FILES = sorted({item.problem for item in load_manifest()})

HEADER = """
sort i
const P : i > o
const R : i > i > o
const f : i > i
"""


def _signature() -> Signature:
    return parse_problem(HEADER).signature


def test_parse_formula_precedence() -> None:
    f = parse_formula('P(c) /\\ P(c) -> P(c) \\/ ~P(c)', _with_c())
    assert isinstance(f, Imp)
    assert format_expr(f) == 'P(c) /\\ P(c) -> P(c) \\/ ~P(c)'


def _with_c() -> Signature:
    signature = _signature()
    signature.declare_const('c', signature.sort('i'))
    return signature


def test_implication_is_right_associative() -> None:
    f = parse_formula('P(c) -> P(c) -> P(c)', _with_c())
    assert isinstance(f, Imp)
    assert isinstance(f.right, Imp)


def test_binder_body_is_a_unary_expression() -> None:
    f = parse_formula('all x:i. (P(x) -> R(x, f(x)))', _signature())
    assert isinstance(f, Forall)
    assert format_expr(f) == 'all x:i. (P(x) -> R(x, f(x)))'


def test_unknown_predicate_is_a_type_error() -> None:
    with pytest.raises(TypeCheckError, match='unknown predicate'):
        parse_formula('S(c)', _with_c())


def test_wrong_arity_is_a_type_error() -> None:
    with pytest.raises(TypeCheckError, match='expects 2 arguments'):
        parse_formula('R(c)', _with_c())


def test_equality_on_functions_is_rejected() -> None:
    with pytest.raises(TypeCheckError, match='only base sorts'):
        parse_formula('f = f', _signature())


def test_nested_binder_on_same_name_is_rejected() -> None:
    with pytest.raises(BindingError):
        parse_formula('all x:i. ex x:i. R(x, x)', _signature())


def test_syntax_error_reports_the_line() -> None:
    with pytest.raises(ParseError, match='line 2'):
        parse_problem('sort i\nconst P : i >\n')


def test_split_free() -> None:
    assert split_free('y0^d+') == ('y0', Kind.DELTA_PLUS)
    assert split_free('x^g') == ('x', Kind.GAMMA)
    with pytest.raises(ParseError):
        split_free('x')


def test_problem_collects_declarations(donkey_text: str) -> None:
    problem = parse_problem(donkey_text, 'donkey')
    assert problem.name == 'donkey'
    assert sorted(problem.variables) == ['x1^g', 'y1^g']
    assert len(problem.goals) == 1
    assert problem.pair.cc == {}


def test_problem_with_choice_and_edges() -> None:
    problem = parse_problem(
        HEADER
        + 'var x^d- : i\nvar y^d+ : i\nedge x^d- -> y^d+\n'
        'choice y^d+ := P(x^d-) -> R(x^d-, y^d+)\n'
        'goal P(x^d-) -> R(x^d-, y^d+)\n'
    )
    y = problem.free_variable('y^d+')
    assert problem.pair.cc[y].format() == 'P(x^d-) -> R(x^d-, y^d+)'
    assert len(problem.pair.vc.edges) == 1


def test_choice_reading_without_edge_is_rejected() -> None:
    with pytest.raises(ConditionError, match='has no path'):
        parse_problem(
            HEADER
            + 'var x^d- : i\nvar y^d+ : i\n'
            'choice y^d+ := R(x^d-, y^d+)\ngoal R(x^d-, y^d+)\n'
        )


def test_variable_names_must_be_distinct_across_kinds() -> None:
    with pytest.raises(TypeCheckError, match='already used by x\\^g'):
        parse_problem(HEADER + 'var x^g : i\nvar x^d- : i\n')


def test_lemma_must_be_closed() -> None:
    with pytest.raises(TypeCheckError, match='free variables'):
        parse_problem(HEADER + 'var x^g : i\nlemma l : P(x^g)\n')


def test_product_sort_declares_projections() -> None:
    problem = parse_problem(
        'sort i\nsort pair = i * i\nconst P : i > o\nvar z^d+ : pair\n'
        'goal P(1st(z^d+)) -> P(2nd(z^d+))\n'
    )
    assert '1st' in problem.signature.constants
    assert problem.signature.products == {'pair': ('i', 'i')}


def test_format_problem_parses_back(donkey_text: str) -> None:
    problem = parse_problem(donkey_text, 'donkey')
    again = parse_problem(format_problem(problem), 'donkey')
    assert again.goals == problem.goals
    assert again.variables == problem.variables


def test_parse_script_commands() -> None:
    commands = parse_script(
        '# a comment\n'
        'alpha 1 2\n'
        'delta+ 1 1 y0\n'
        'gamma 2 1 f(c)\n'
        'inst {x^g := c, y^g := lambda z:i. z}\n'
        'lemma 1 Q(y^d+)\n'
        'close 3\n'
    )
    ops = [c.op for c in commands]
    assert ops == ['alpha', 'delta+', 'gamma', 'inst', 'lemma', 'close']
    assert commands[0].line == 2  # noqa: PLR2004
    assert commands[1].name == 'y0'
    assert [b[0] for b in commands[3].bindings] == ['x^g', 'y^g']
    assert commands[4].var == 'y^d+'
    assert commands[5].goal == 3  # noqa: PLR2004


def test_parse_structure() -> None:
    decl = parse_structure(
        'universe i = {a, b}\n'
        'pred P = {(a), (b)}\n'
        'pred R = ?\n'
        'fun f = {a -> b, b -> a}\n'
        'const c = a\n'
    )
    assert decl.universes == {'i': ['a', 'b']}
    assert decl.predicates['R'] is None
    assert decl.functions['c'] == [((), 'a')]
    assert len(decl.functions['f'] or []) == 2  # noqa: PLR2004


def test_structure_symbol_defined_twice() -> None:
    with pytest.raises(ParseError, match='defined twice'):
        parse_structure('universe i = {a}\npred P = ?\npred P = {}\n')


@pytest.mark.parametrize('name', PROBLEM_FILES)
def test_corpus_problems_print_to_a_fixpoint(
    corpus_dir: Path, name: str
) -> None:
    text = (corpus_dir / name).read_text(encoding='utf-8')
    printed = format_problem(parse_problem(text, name))
    assert format_problem(parse_problem(printed, name)) == printed
