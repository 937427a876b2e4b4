import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdistill.error_models import (ErrorPoly2, ProtocolSpec, acceptance_probability, binomial_poly, collapse,
                                   e1_leading, e1_poly, e2_poly, et_poly, prior_protocol_poly)
from hdistill.pauli import UsageError

EVEN_K = st.sampled_from(range(2, 21, 2))
polys = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), st.integers(-50, 50),
                        max_size=6).map(ErrorPoly2)


@pytest.mark.parametrize("k", range(2, 21, 2))
def test_one_level_coefficients(k):
    p = e1_poly(k)
    assert p.coeff(2, 0) == k - 1
    assert p.coeff(0, 2) == 2 * k + 2
    assert p.coeff(1, 2) == k + 4
    assert p.coeff(0, 3) == 4
    assert p.coeff(1, 3) == 8 * (k - 1)
    assert p.coeff(4, 0) == (math.comb(k - 1, 3) if k >= 4 else 0)
    assert e1_leading(k).terms == {(2, 0): k - 1, (0, 2): 2 * k + 2}


@pytest.mark.parametrize("k", range(2, 21, 2))
def test_level_two_is_general_level_at_t2(k):
    assert et_poly(k, 2).terms == e2_poly(k).terms
    assert e2_poly(k).coeff(0, 4) == 8 * (k + 1) * (k + 3)


def test_two_level_small_values():
    assert e2_poly(2)(1e-3, 0) == pytest.approx(3e-6)
    assert et_poly(2, 3).terms == {(2, 0): 7, (0, 8): 2**8 * 3 * 25, (1, 4): 6**6}


def test_domain_checks():
    for bad in (0, 1, 3, 22, True, 2.0):
        with pytest.raises(UsageError):
            e1_poly(bad)
    with pytest.raises(UsageError):
        et_poly(4, 5)
    with pytest.raises(UsageError):
        ProtocolSpec("ML", k=4, t=1)
    with pytest.raises(UsageError):
        ProtocolSpec("XYZ")
    with pytest.raises(UsageError):
        acceptance_probability(ProtocolSpec("BK"), 0.06)


def test_prior_protocols():
    assert prior_protocol_poly("BK")(0.01) == pytest.approx(3.5e-5)
    assert prior_protocol_poly("MEK")(0.01) == pytest.approx(9e-4)
    assert prior_protocol_poly("BH", 40)(1e-3) == pytest.approx(121e-6)
    assert prior_protocol_poly("BH", 4, full=True).terms == collapse(e1_poly(4)).terms
    with pytest.raises(UsageError):
        prior_protocol_poly("BH", 30, full=True)


@pytest.mark.parametrize("spec,logical,physical,outputs", [
    (ProtocolSpec("BK"), 15, 0, 1),
    (ProtocolSpec("MEK"), 10, 0, 2),
    (ProtocolSpec("BH", k=6), 26, 0, 6),
    (ProtocolSpec("H1", k=6), 6, 20, 6),
    (ProtocolSpec("ML", k=6, t=2), 36, 200, 36),
    (ProtocolSpec("ML", k=12, t=3), 1728, 16384, 1728),
])
def test_input_output_counts(spec, logical, physical, outputs):
    assert (spec.inputs_logical, spec.inputs_physical, spec.outputs) == (logical, physical, outputs)
    assert spec.inputs == logical + physical


def test_acceptance_probability():
    spec = ProtocolSpec("H1", k=2)
    assert acceptance_probability(spec, 0, 0) == 1
    assert acceptance_probability(spec, 0.01, 0.02) == pytest.approx(0.99**2 * 0.98**12)
    assert acceptance_probability(ProtocolSpec("BK"), 0.01) == pytest.approx(0.99**15)


@given(st.integers(0, 30), st.floats(0, 0.05))
def test_binomial_expansion(count, eps):
    assert binomial_poly(count, 0)(eps, 0) == pytest.approx((1 - eps) ** count, rel=1e-12, abs=1e-15)
    assert binomial_poly(count, 1)(0.3, eps) == pytest.approx((1 - eps) ** count, rel=1e-12, abs=1e-15)


@given(polys, polys, polys, st.floats(-1, 1), st.floats(-1, 1))
def test_polynomial_ring_laws(a, b, c, x, y):
    assert ((a + b) * c).terms == (a * c + b * c).terms
    assert (a * b).terms == (b * a).terms
    assert (a - a).terms == {}
    assert (a * b)(x, y) == pytest.approx(a(x, y) * b(x, y), abs=1e-6)


@given(polys, st.integers(0, 8))
def test_truncate_and_json(a, d):
    t = a.truncate(d)
    assert all(i + j <= d for i, j in t.terms)
    assert ErrorPoly2.from_json(a.to_json()).terms == a.terms


@given(EVEN_K, st.floats(1e-6, 0.05))
def test_collapse_agrees_on_diagonal(k, eps):
    assert collapse(e1_poly(k))(eps, 0) == pytest.approx(e1_poly(k)(eps, eps), rel=1e-12)
