import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdistill.pauli import (BitMatrix, PauliString, UsageError, commutes, group_elements, in_group,
                            min_coset_weight)


def paulis(n):
    return st.builds(lambda x, z: PauliString(n, x, z),
                     st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1))


def dense_commutes(a, b):
    anti = 0
    for pa, pb in zip(a.label(), b.label()):
        if "I" not in (pa, pb) and pa != pb:
            anti += 1
    return anti % 2 == 0


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(paulis(n), paulis(n))))
def test_commutation_matches_symbol_count(pair):
    a, b = pair
    assert commutes(a, b) == dense_commutes(a, b) == commutes(b, a)


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(paulis(n), paulis(n), paulis(n))))
def test_product_group_laws(triple):
    a, b, c = triple
    assert (a * b) * c == a * (b * c)
    assert (a * a).is_identity()
    assert a.hadamard().hadamard() == a


@given(st.text(alphabet="IXYZ", min_size=1, max_size=30))
def test_label_round_trip(label):
    p = PauliString.from_label(label)
    assert p.label() == label
    assert p.weight == sum(ch != "I" for ch in label)


def test_from_indices_y_sets_both():
    p = PauliString.from_indices(4, x=[0], z=[1], y=[3])
    assert p.label() == "XZIY"


def test_support_bounds_rejected():
    with pytest.raises(UsageError):
        PauliString(3, 0b1000, 0)
    with pytest.raises(UsageError):
        PauliString.from_label("XQ")


@given(st.lists(st.integers(0, 255), min_size=1, max_size=10), st.integers(0, 255))
def test_solve_returns_valid_combination(rows, target):
    m = BitMatrix(rows, 8)
    combo = m.solve(target)
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    assert (combo is not None) == (target in span)
    if combo is not None:
        acc = 0
        for i, r in enumerate(rows):
            if combo >> i & 1:
                acc ^= r
        assert acc == target


@given(st.lists(st.integers(0, 1023), min_size=1, max_size=8))
def test_rank_nullity(rows):
    m = BitMatrix(rows, 10)
    null = m.nullspace()
    assert m.rank() + len(null) == 10
    for v in null:
        assert all((r & v).bit_count() % 2 == 0 for r in rows)


def test_group_elements_and_membership():
    gens = [PauliString.from_label("XXXX"), PauliString.from_label("ZZZZ")]
    elems = group_elements(gens, 4)
    assert len(elems) == 4
    assert in_group(PauliString.from_label("YYYY"), gens)
    assert not in_group(PauliString.from_label("XXII"), gens)


def test_min_coset_weight_small():
    gens = [PauliString.from_label("XXXX"), PauliString.from_label("ZZZZ")]
    assert min_coset_weight(PauliString.from_label("XXXI"), gens) == 1
    assert min_coset_weight(PauliString.from_label("YYII"), gens) == 2


def test_bitmatrix_list_round_trip():
    m = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1]])
    assert m.to_lists() == [[1, 0, 1], [0, 1, 1]]
    assert m.shape == (2, 3)
