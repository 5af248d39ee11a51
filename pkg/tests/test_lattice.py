"""Integer symmetric forms: invariants, classification, Smith form, witnesses."""
import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form
from hypothesis import given, settings, strategies as st

from exolink.lattice import (
    IntSymMatrix,
    abelian_invariants_from_matrix,
    admissible_check,
    complement_nonspin_witness,
    direct_sum,
    e8_gram,
    find_nonspin_witness,
    hyperbolic_pair,
    indefinite_unimodular_iso,
    invariants,
    negate,
    smith_normal_form as snf,
)


def test_hyperbolic_pair_invariants():
    h = hyperbolic_pair()
    inv = invariants(h)
    assert (inv.rank, inv.b_plus, inv.b_minus) == (2, 1, 1)
    assert inv.signature == 0
    assert inv.parity == "even"
    assert inv.unimodular
    assert inv.indefinite


def test_e8_invariants():
    inv = invariants(e8_gram())
    assert inv.rank == 8
    assert inv.signature == 8
    assert inv.parity == "even"
    assert inv.unimodular
    assert inv.definite


def test_k3_style_direct_sum():
    q = direct_sum(*([hyperbolic_pair()] * 3 + [negate(e8_gram())] * 2))
    inv = invariants(q)
    assert inv.rank == 22
    assert inv.signature == -16
    assert inv.parity == "even"
    assert inv.unimodular


def test_is_even_method():
    assert hyperbolic_pair().is_even()
    assert not IntSymMatrix.diagonal((1, -1)).is_even()


def test_indefinite_unimodular_iso():
    a = direct_sum(hyperbolic_pair(), hyperbolic_pair())
    b = direct_sum(hyperbolic_pair(), hyperbolic_pair())
    assert indefinite_unimodular_iso(a, b)
    # same rank and signature but different parity: not isomorphic
    odd = IntSymMatrix.diagonal((1, 1, -1, -1))
    assert not indefinite_unimodular_iso(a, odd)
    with pytest.raises(ValueError):
        indefinite_unimodular_iso(e8_gram(), e8_gram())
    with pytest.raises(ValueError):
        indefinite_unimodular_iso(
            IntSymMatrix.diagonal((2,)), IntSymMatrix.diagonal((2,))
        )


def test_smith_normal_form_against_sympy():
    samples = [
        [[2, 4], [4, 2]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 6]],
        [[12, 6, 4], [6, 10, 2], [4, 2, 8]],
        [[1, 0], [0, 0]],
    ]
    for rows in samples:
        cert = snf(rows)
        ref = smith_normal_form(sympy.Matrix(rows))
        ref_factors = [abs(ref[i, i]) for i in range(min(ref.shape)) if ref[i, i] != 0]
        ours = [f for f in cert.factors if f != 0]
        assert ours == ref_factors


def test_smith_certificate_multiplies_out():
    rows = [[12, 6, 4], [6, 10, 2], [4, 2, 8]]
    cert = snf(rows)
    u = sympy.Matrix(cert.u)
    v = sympy.Matrix(cert.v)
    d = sympy.Matrix(cert.d)
    assert u * sympy.Matrix(rows) * v == d
    assert abs(u.det()) == 1
    assert abs(v.det()) == 1


def test_abelian_invariants_from_matrix():
    # relations 2a = 0, b free
    free_rank, torsion = abelian_invariants_from_matrix([[2, 0]], 2)
    assert free_rank == 1
    assert torsion == (2,)


def test_complement_nonspin_witness():
    q = direct_sum(hyperbolic_pair(), IntSymMatrix.diagonal((1, -1, -1, -1)))
    t2 = (1, 0, 0, 0, 0, 0)
    s2 = (0, 1, 0, 0, 0, 0)
    alpha = (0, 0, 1, 0, 0, 0)  # odd square
    sigma = complement_nonspin_witness(q, alpha, t2, s2)
    assert sigma is not None
    # the witness is orthogonal to T2 and has odd square
    assert q.pair(sigma, t2) == 0
    assert q.pair(sigma, sigma) % 2 == 1
    # even-square classes yield no witness
    assert complement_nonspin_witness(q, (0, 1, 0, 0, 0, 0), t2, s2) is None


def test_find_nonspin_witness_scans_basis():
    q = direct_sum(hyperbolic_pair(), IntSymMatrix.diagonal((1, -1, -1, -1)))
    t2 = (1, 0, 0, 0, 0, 0)
    s2 = (0, 1, 0, 0, 0, 0)
    sigma = find_nonspin_witness(q, t2, s2)
    assert sigma is not None
    assert q.pair(sigma, sigma) % 2 == 1
    # an even form has no odd-square class at all
    even = direct_sum(hyperbolic_pair(), hyperbolic_pair())
    assert find_nonspin_witness(even, (1, 0, 0, 0), (0, 1, 0, 0)) is None


def _admissible_fixture_form():
    return direct_sum(*([hyperbolic_pair()] * 3 + [negate(e8_gram())] * 2))


def test_admissible_check_accepts():
    q = _admissible_fixture_form()
    report = admissible_check(q, {"T1": 0, "S1": 1, "T2": 2, "S2": 3})
    assert report.ok
    assert report.violations == ()


def test_admissible_check_rejects_definite():
    report = admissible_check(e8_gram(), {"T1": 0, "S1": 1, "T2": 2, "S2": 3})
    assert not report.ok
    assert "form not indefinite" in report.violations


def test_admissible_check_rejects_small_rank():
    q = direct_sum(hyperbolic_pair(), hyperbolic_pair())
    # rank 4, |signature| 0; the margin clause needs rank >= |sigma| + 4
    # with two disjoint hyperbolic pairs spoken for; use overlapping roles
    report = admissible_check(
        direct_sum(hyperbolic_pair(), negate(e8_gram())),
        {"T1": 0, "S1": 1, "T2": 2, "S2": 3},
    )
    assert not report.ok
    assert any("rank" in v for v in report.violations)


@st.composite
def small_symmetric(draw):
    n = draw(st.integers(2, 4))
    entries = {}
    for i in range(n):
        for j in range(i, n):
            entries[(i, j)] = draw(st.integers(-4, 4))
    rows = [[entries[(min(i, j), max(i, j))] for j in range(n)] for i in range(n)]
    return IntSymMatrix.from_rows(rows)


@st.composite
def unimodular_change(draw, n):
    # product of elementary row additions and sign flips
    mat = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(draw(st.integers(0, 6))):
        i = draw(st.integers(0, n - 1))
        j = draw(st.integers(0, n - 1))
        if i == j:
            continue
        c = draw(st.integers(-2, 2))
        for k in range(n):
            mat[i][k] += c * mat[j][k]
    i = draw(st.integers(0, n - 1))
    for k in range(n):
        mat[i][k] = -mat[i][k]
    return mat


@settings(max_examples=40)
@given(st.data())
def test_invariants_are_congruence_invariant(data):
    q = data.draw(small_symmetric())
    u = data.draw(unimodular_change(q.n))
    n = q.n
    transformed = [
        [
            sum(u[i][a] * q.entry(a, b) * u[j][b] for a in range(n) for b in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    left = invariants(q)
    right = invariants(IntSymMatrix.from_rows(transformed))
    assert (left.rank, left.b_plus, left.b_minus) == (right.rank, right.b_plus, right.b_minus)
    assert left.parity == right.parity
    assert abs(left.determinant) == abs(right.determinant)


@settings(max_examples=40)
@given(st.data())
def test_smith_factors_divide_in_chain(data):
    q = data.draw(small_symmetric())
    cert = snf([list(r) for r in q.rows])
    nonzero = [f for f in cert.factors if f != 0]
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0
