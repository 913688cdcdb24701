import random

from hypothesis import given, strategies as st
from sympy import Matrix

from vertexfusion.field import QQ_FIELD as F
from vertexfusion.linalg import EchelonBasis, mat_apply, mat_mul, nullspace, rank, transpose

vectors = st.lists(
    st.dictionaries(st.integers(0, 5), st.integers(-3, 3).map(F)).map(
        lambda d: {k: v for k, v in d.items() if v != 0}),
    max_size=6)


def dense(vecs, n=6):
    return Matrix([[int(v.get(j, 0).numerator) / int(v.get(j, 0).denominator)
                    if v.get(j, 0) else 0 for j in range(n)] for v in vecs] or [[0] * n])


@given(vectors)
def test_rank_matches_sympy(vecs):
    assert rank(vecs) == dense(vecs).rank()


@given(vectors, st.randoms(use_true_random=False))
def test_echelon_basis_is_canonical(vecs, rnd):
    shuffled = list(vecs)
    rnd.shuffle(shuffled)
    assert EchelonBasis(vecs) == EchelonBasis(shuffled)


@given(vectors)
def test_echelon_rows_are_reduced(vecs):
    eb = EchelonBasis(vecs)
    for p, row in eb.rows.items():
        assert min(row) == p and row[p] == 1
        for q in eb.rows:
            if q != p:
                assert q not in row


@given(vectors)
def test_nullspace_annihilates_conditions(vecs):
    ns = nullspace(vecs, range(6))
    for x in ns.basis():
        for c in vecs:
            assert sum(c.get(k, 0) * v for k, v in x.items()) == 0
    assert len(ns) + rank(vecs) == 6


def test_contains_and_coordinates():
    eb = EchelonBasis([{0: F(1), 1: F(2)}, {1: F(1), 2: F(1)}])
    v = {0: F(1), 1: F(3), 2: F(1)}
    assert eb.contains(v)
    assert not eb.contains({2: F(1)})


def test_matrix_helpers():
    rng = random.Random(0)
    def sparse():
        m = {j: {i: F(rng.randint(-2, 2)) for i in range(3)} for j in range(3)}
        return {j: {i: x for i, x in c.items() if x != 0} for j, c in m.items()}
    a, b = sparse(), sparse()
    v = {0: F(1), 2: F(-1)}
    assert mat_apply(mat_mul(a, b), v) == mat_apply(a, mat_apply(b, v))
    assert transpose(transpose(a)) == {j: c for j, c in a.items() if c}
