from app.choicecond import CcPair
from app.epsilon import (
    classical_qelim,
    eliminate_choice_terms,
    metrics,
    nesting_depth,
    prenex_problem,
    quantifier_count,
    subordinate_pairs,
    term_count,
    vc_reduction,
)
from app.parser import parse_formula, parse_problem
from app.syntax import Kind, Signature, format_expr

HEADER = """
sort i
const P : i > o
const Q : i > o
const R : i > i > o
const c : i
"""


def _signature() -> Signature:
    return parse_problem(HEADER).signature


def test_classical_existential() -> None:
    f = parse_formula('ex x:i. P(x)', _signature())
    assert format_expr(classical_qelim(f)) == 'P(eps x:i. P(x))'


def test_classical_universal_chooses_a_counterexample() -> None:
    f = parse_formula('all x:i. P(x)', _signature())
    assert format_expr(classical_qelim(f)) == 'P(eps x:i. ~P(x))'


def test_classical_orders_agree_on_prenex_formulas() -> None:
    _, f = prenex_problem(3)
    assert classical_qelim(f, 'inside_out') == classical_qelim(
        f, 'outside_in'
    )


def test_classical_parallel_block_uses_tuple_sort() -> None:
    signature = _signature()
    f = parse_formula('all x:i. all y:i. R(x, y)', signature)
    result = format_expr(classical_qelim(f, 'inside_out', signature))
    assert 'tuple2_i' in signature.products
    assert '1st(' in result
    assert '2nd(' in result
    assert quantifier_count(classical_qelim(f)) == 0


def test_subordinate_pairs() -> None:
    f = parse_formula('all x:i. ex y:i. R(x, y)', _signature())
    assert len(subordinate_pairs(classical_qelim(f))) == 1
    g = parse_formula('(ex x:i. P(x)) /\\ (ex y:i. Q(y))', _signature())
    assert subordinate_pairs(classical_qelim(g)) == []


def test_prenex_metrics_grow_exponentially() -> None:
    rows = metrics(4)
    assert [row.quantifiers for row in rows] == [1, 2, 3, 4]
    assert [row.depth for row in rows] == [1, 3, 7, 15]
    assert all(row.orders_agree for row in rows)
    assert rows[0].terms == 1


def test_nesting_and_term_count_of_plain_formula() -> None:
    f = parse_formula('P(c)', _signature())
    assert nesting_depth(f) == 0
    assert term_count(f) == 0


def test_eliminate_choice_terms_extensionality(
    extensionality_text: str,
) -> None:
    problem = parse_problem(extensionality_text)
    ((f,),) = problem.goals
    result = eliminate_choice_terms(f, CcPair())
    assert format_expr(result.formula) == (
        'all x:i. (P(x) <-> Q(x)) -> x^d+ = x1^d+'
    )
    assert [v.surface for v in result.new_vars] == ['x^d+', 'x1^d+']
    texts = {y.surface: a.format() for y, a in result.pair.cc.items()}
    assert texts == {'x^d+': 'P(x^d+)', 'x1^d+': 'Q(x1^d+)'}


def test_alpha_equivalent_terms_share_a_variable() -> None:
    f = parse_formula(
        'P(eps x:i. Q(x)) -> Q(eps y:i. Q(y))', _signature()
    )
    shared = eliminate_choice_terms(f, CcPair())
    assert len(shared.new_vars) == 1
    assert format_expr(shared.formula) == 'P(x^d+) -> Q(x^d+)'
    separate = eliminate_choice_terms(f, CcPair(), share=False)
    assert len(separate.new_vars) == 2  # noqa: PLR2004


def test_choice_term_under_binder_gets_parameters() -> None:
    f = parse_formula('all x:i. P(eps y:i. R(x, y))', _signature())
    result = eliminate_choice_terms(f, CcPair())
    (y,) = result.new_vars
    assert format_expr(result.formula) == 'all x:i. P(y^d+(x))'
    assert result.pair.cc[y].format() == 'lambda x:i. R(x, y^d+(x))'


def test_iota_condition_requires_unique_existence() -> None:
    f = parse_formula('P(iota x:i. Q(x))', _signature())
    result = eliminate_choice_terms(f, CcPair())
    (y,) = result.new_vars
    assert result.pair.cc[y].format() == 'ex! x:i. Q(x) -> Q(x^d+)'


def test_eliminate_choice_terms_avoids_taken_names() -> None:
    f = parse_formula('P(eps x:i. Q(x))', _signature())
    result = eliminate_choice_terms(f, CcPair(), taken={'x'})
    assert [v.surface for v in result.new_vars] == ['x1^d+']


def test_vc_reduction_prefix() -> None:
    f = parse_formula('ex y:i. all x:i. R(x, y)', _signature())
    result = vc_reduction(f, CcPair())
    assert format_expr(result.formula) == 'R(x^d-, y^g)'
    assert [v.kind for v in result.new_vars] == [
        Kind.GAMMA, Kind.DELTA_MINUS
    ]
    edges = {(a.surface, b.surface) for a, b in result.pair.vc.edges}
    assert edges == {('y^g', 'x^d-')}


def test_vc_reduction_respects_polarity() -> None:
    f = parse_formula('(ex x:i. P(x)) -> P(c)', _signature())
    result = vc_reduction(f, CcPair())
    assert format_expr(result.formula) == 'P(x^d-) -> P(c)'
    assert result.pair.vc.edges == frozenset()
