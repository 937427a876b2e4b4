import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdistill.error_models import ProtocolSpec
from hdistill.pauli import UsageError
from hdistill.search import (SOURCE, DomainError, ProtocolExpr, UnreachableTarget, asymptotic_chain,
                             asymptotic_ratio_check, evaluate, fit_cost_curve, parse, pareto_search, query,
                             total_input_count)

from reference_data import EVALUATED_ROWS, PRIOR_COLUMNS

even_k = st.sampled_from(range(2, 21, 2))
specs = st.one_of(
    st.just(ProtocolSpec("BK")),
    st.just(ProtocolSpec("MEK")),
    st.sampled_from(range(2, 41, 2)).map(lambda k: ProtocolSpec("BH", k=k)),
    even_k.map(lambda k: ProtocolSpec("H1", k=k)),
    st.tuples(even_k, st.sampled_from([2, 3, 4])).map(lambda kt: ProtocolSpec("ML", k=kt[0], t=kt[1])),
)


def _node(children):
    return st.tuples(specs, children, children).map(
        lambda t: ProtocolExpr(t[0], (t[1], t[2]) if t[0].two_source else (t[1],)))


exprs = st.recursive(st.just(SOURCE), _node, max_leaves=8)


@given(exprs)
def test_serialization_round_trip(expr):
    text = str(expr)
    assert parse(text) == expr
    assert str(parse(text)) == text


def test_grammar_examples():
    assert str(parse("ML[2][24](BH[40](BK(eps0)),BK(eps0))").children[0].spec) == str(ProtocolSpec("BH", k=40))
    assert parse(" H1[4]( eps0 , MEK(eps0) ) ").depth == 2
    for bad in ("BK(eps0", "ML[2](eps0,eps0)", "BH[3](eps0)", "H1[2](eps0)", "eps1", "BK(eps0))"):
        with pytest.raises(UsageError):
            parse(bad)


@pytest.mark.parametrize("row", sorted(EVALUATED_ROWS))
def test_table_rows_by_evaluation(row):
    text, neg_log, log_tol, cost, rel = EVALUATED_ROWS[row]
    ev = evaluate(parse(text), 0.01)
    assert ev.neg_log10_eps == pytest.approx(neg_log, abs=log_tol)
    assert ev.cost == pytest.approx(cost, rel=rel)


def test_evaluate_small_cases():
    ev = evaluate(parse("BK(eps0)"), 0.01)
    assert ev.eps_out == pytest.approx(3.5e-5)
    assert ev.cost == pytest.approx(15 / 0.99**15)
    assert evaluate(SOURCE, 0.02) == evaluate(SOURCE, 0.02)
    assert evaluate(SOURCE, 0.02).cost == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        evaluate(SOURCE, 0.2)
    with pytest.raises(DomainError):
        # a 40-block on raw states at 0.05 leaves eps = 6.05 > 0.05 for the next stage
        evaluate(parse("BK(BH[40](eps0))"), 0.05)


@given(exprs.filter(lambda e: e.depth <= 3), st.floats(1e-4, 0.01))
def test_eval_invariants(expr, eps0):
    try:
        ev = evaluate(expr, eps0)
    except DomainError:
        return
    assert ev.eps_out >= 0
    assert 0 < ev.accept <= 1
    if expr.spec is not None:
        assert ev.cost >= expr.spec.inputs / expr.spec.outputs


def test_front_is_sorted_and_non_dominated(full_front):
    eps = [e for e, _, _ in full_front]
    costs = [c for _, c, _ in full_front]
    assert eps == sorted(eps)
    assert all(a > b for a, b in zip(costs, costs[1:]))
    assert full_front.entries[-1][2] == SOURCE
    assert all(expr.depth <= 5 for _, _, expr in full_front)


def test_front_entries_reproduce_exactly(full_front):
    for (eps, cost, expr), accept in zip(full_front.entries, full_front.accepts):
        ev = evaluate(expr, full_front.eps0)
        assert (ev.eps_out, ev.cost, ev.accept) == (eps, cost, accept)


def test_query_examples(full_front):
    expr, ev = query(full_front, 0.5)
    assert expr == SOURCE and ev.cost == 1
    expr, ev = query(full_front, 1e-4)
    assert str(expr) == "BK(eps0)"
    expr, ev = query(full_front, 1e-10)
    assert ev.cost == pytest.approx(110.7, rel=0.05)
    with pytest.raises(UnreachableTarget, match="not reachable within bounds"):
        query(full_front, 1e-80)


@pytest.mark.parametrize("column", sorted(PRIOR_COLUMNS))
def test_restricted_families_reproduce_prior_columns(column):
    families, costs = PRIOR_COLUMNS[column]
    front = pareto_search(0.01, families=families)
    for x, want in zip(range(4, 11), costs):
        _, ev = query(front, 10.0**-x)
        assert ev.cost == pytest.approx(want, rel=0.02), (column, x)


def test_empty_families_give_source_only():
    front = pareto_search(0.01, families=())
    assert [str(e) for _, _, e in front] == ["eps0"]


def test_thread_count_does_not_change_result():
    a = pareto_search(0.01, max_rounds=3, threads=1)
    b = pareto_search(0.01, max_rounds=3, threads=4)
    assert [(e, c, str(x)) for e, c, x in a] == [(e, c, str(x)) for e, c, x in b]


def test_more_rounds_or_larger_k_never_costs_more():
    fronts = {(r, k): pareto_search(0.01, max_rounds=r, max_k=k) for r in (2, 3, 4) for k in (10, 20)}
    for x in range(4, 13):
        target = 10.0**-x
        costs = {}
        for key, front in fronts.items():
            try:
                costs[key] = query(front, target)[1].cost
            except UnreachableTarget:
                costs[key] = math.inf
        for r in (2, 3, 4):
            assert costs[(r, 20)] <= costs[(r, 10)]
        for k in (10, 20):
            assert costs[(4, k)] <= costs[(3, k)] <= costs[(2, k)]


def test_bad_bounds():
    with pytest.raises(UsageError):
        pareto_search(0.01, max_rounds=6)
    with pytest.raises(UsageError):
        pareto_search(0.01, max_k=22)
    with pytest.raises(UsageError):
        pareto_search(0.01, families=("XYZ",))


@pytest.mark.parametrize("k", range(2, 21, 2))
def test_two_round_input_count(k):
    assert total_input_count(2, k) == 5 * k**3 + 24 * k**2 + 32 * k


def test_input_count_examples():
    assert total_input_count(3, 10) == 18_696_000
    assert total_input_count(1, 2) == 14 == 3 * 2 + 8
    with pytest.raises(UsageError):
        total_input_count(0, 2)


def test_fit_needs_points(full_front):
    with pytest.raises(ValueError):
        fit_cost_curve(full_front, [12])
    with pytest.raises(ValueError):
        fit_cost_curve(full_front, [5, 6])


def test_fit_finite(full_front):
    fit = fit_cost_curve(full_front, range(5, 41))
    assert math.isfinite(fit.slope) and math.isfinite(fit.gamma)
    assert len(fit.points) == 36


def test_asymptotic_chain():
    ratios = asymptotic_ratio_check(10**4, 1e-8, 3)
    assert ratios[0] == pytest.approx(3, rel=0.002)
    assert (ratios[2] - ratios[1]) / (ratios[1] - ratios[0]) == pytest.approx(2, rel=0.01)
    rows = asymptotic_chain(10**4, 1e-8, 3)
    assert rows[0].accept > 0.999
    assert rows[0].eps_out > rows[1].eps_out > rows[2].eps_out
    with pytest.raises(UsageError):
        asymptotic_ratio_check(100, 1e-8, 2)
