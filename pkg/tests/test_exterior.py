import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import forms, vectors
from dense import dense_contract, dense_hodge, dense_interior, dense_wedge
from g2kit import exterior as ex
from g2kit.exterior import Form, contract, e, hodge, inner, interior, norm2, volume, wedge
from g2kit.g2algebra import phi0, psi0
from g2kit.sampling import random_form

N_ORACLE = 100


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (3, 3), (3, 4)])
def test_wedge_matches_dense_oracle(rng, p, q):
    for _ in range(N_ORACLE if p + q <= 4 else 20):
        a, b = random_form(rng, p, density=0.5), random_form(rng, q, density=0.5)
        assert wedge(a, b) == dense_wedge(a, b)


@pytest.mark.parametrize("k", range(1, 8))
def test_interior_matches_dense_oracle(rng, k):
    for _ in range(N_ORACLE):
        x = [rng.randint(-3, 3) for _ in range(7)]
        a = random_form(rng, k, density=0.6)
        assert interior(x, a) == dense_interior(x, a)


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (3, 3), (1, 4)])
def test_contract_matches_dense_oracle(rng, p, q):
    for _ in range(N_ORACLE if p <= 2 else 20):
        a, b = random_form(rng, p, density=0.6), random_form(rng, q, density=0.6)
        assert contract(a, b) == dense_contract(a, b)


@pytest.mark.parametrize("k", range(0, 8))
def test_hodge_matches_dense_oracle(rng, k):
    for _ in range(N_ORACLE if k <= 4 else 20):
        a = random_form(rng, k, density=0.6)
        assert hodge(a) == dense_hodge(a)


def test_dense_oracle_agrees_on_model_forms():
    assert dense_hodge(phi0()) == psi0()
    assert dense_contract(phi0(), phi0()).value() == 7


# Examples.

def test_basis_products():
    assert wedge(e(1), e(2)) == e(1, 2)
    assert wedge(e(1), e(1)).is_zero()
    assert wedge(e(2), e(1)) == -e(1, 2)


def test_phi_wedge_psi_is_seven_vol():
    assert wedge(phi0(), psi0()) == volume() * 7


def test_interior_examples():
    assert interior([1, 0, 0, 0, 0, 0, 0], e(1, 2)) == e(2)
    assert interior([1, 0, 0, 0, 0, 0, 0], psi0()) == e(2, 5, 6) + e(2, 3, 4) + e(4, 5, 7) + e(3, 6, 7)
    assert interior([0, 0, 0, 0, 0, 0, 1], phi0()) == e(1, 2) + e(3, 4) + e(5, 6)


def test_contract_examples():
    assert contract(phi0(), phi0()).value() == 7
    assert contract(e(1), e(1, 2, 3)) == e(2, 3)


def test_tau1_psi_self_composition_is_minus_four():
    assert contract(contract(e(1), psi0()), psi0()) == e(1) * -4


def test_hodge_examples():
    assert hodge(phi0()) == psi0()
    assert hodge(Form(0, {(): 1})) == volume()


def test_norm2_examples():
    assert norm2(psi0()) == 7
    assert norm2(Form.zero(3)) == 0
    assert norm2(e(1, 2) + e(3, 4) * 2) == 5


def test_wedge_grade_overflow_is_error():
    with pytest.raises(ex.GradeError):
        wedge(e(1, 2, 3, 4), e(5, 6, 7, 1))


def test_interior_of_scalar_is_error():
    with pytest.raises(ex.GradeError):
        interior([1] * 7, Form(0, {(): 3}))


def test_contract_grade_order_is_error():
    with pytest.raises(ex.GradeError):
        contract(e(1, 2), e(3))


def test_mixed_backends_rejected():
    with pytest.raises(ex.BackendError):
        e(1) + e(1, backend="f64")
    with pytest.raises(ex.BackendError):
        wedge(e(1), e(2, backend="f64"))


def test_exact_backend_rejects_floats():
    with pytest.raises(ex.BackendError):
        Form(1, {(1,): 0.5})


def test_bad_keys_rejected():
    with pytest.raises(ValueError):
        Form(2, {(2, 1): 1})
    with pytest.raises(ValueError):
        Form(2, {(1, 8): 1})
    with pytest.raises(ValueError):
        Form(2, {(1,): 1})


def test_exact_scalars_in_lowest_terms():
    f = Form(1, {(1,): Fraction(4, -6)})
    c = f[(1,)]
    assert (c.numerator, c.denominator) == (-2, 3)


def test_getitem_recovers_antisymmetric_tensor():
    f = e(1, 2, 7) * 3
    assert f[(2, 1, 7)] == -3
    assert f[(7, 1, 2)] == 3
    assert f[(1, 1, 2)] == 0


# Properties.

@given(st.integers(0, 7).flatmap(lambda p: st.tuples(forms(grade=p), forms(max_grade=7 - p))))
def test_graded_commutativity(pair):
    a, b = pair
    assert wedge(a, b) == wedge(b, a) * (-1) ** (a.grade * b.grade)


@given(forms(max_grade=2), forms(max_grade=2), forms(max_grade=3))
def test_wedge_associative(a, b, c):
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@given(forms())
def test_hodge_is_involution(a):
    assert hodge(hodge(a)) == a


@given(st.integers(0, 7).flatmap(lambda k: st.tuples(forms(grade=k), forms(grade=k))))
def test_wedge_with_star_is_inner_times_vol(pair):
    a, b = pair
    assert wedge(a, hodge(b)) == volume() * inner(a, b)


@given(vectors, forms(min_grade=1))
def test_interior_equals_contract_with_flat(x, a):
    assert interior(x, a) == contract(ex.flat(x), a)


@given(vectors, forms(min_grade=1, max_grade=3), forms(min_grade=1, max_grade=3))
def test_interior_is_antiderivation(x, a, b):
    lhs = interior(x, wedge(a, b))
    rhs = wedge(interior(x, a), b) + wedge(a, interior(x, b)) * (-1) ** a.grade
    assert lhs == rhs


@given(forms())
def test_norm2_equals_self_contraction(a):
    assert norm2(a) == contract(a, a).value()
    assert norm2(a) >= 0


@given(vectors)
def test_sharp_flat_roundtrip(x):
    assert ex.sharp(ex.flat(x)) == x


# Serialization.

@given(forms())
def test_json_roundtrip_exact(a):
    s = a.to_json()
    b = Form.from_json(s)
    assert b == a and b.to_json() == s


def test_json_schema():
    f = e(1, 2, 7) - e(3, 4, 7) * Fraction(2, 3)
    d = json.loads(f.to_json())
    assert d == {"backend": "exact", "coeffs": {"127": "1", "347": "-2/3"}, "dim": 7, "grade": 3}


def test_json_f64_values_are_numbers():
    d = json.loads((e(1, 2, backend="f64") * 0.5).to_json())
    assert d["coeffs"] == {"12": 0.5}


def test_json_rejects_bad_input():
    with pytest.raises(ValueError):
        Form.from_dict({"grade": 2, "dim": 7, "backend": "exact", "coeffs": {"21": "1"}})
    with pytest.raises(ValueError):
        Form.from_dict({"grade": 2, "dim": 6, "backend": "exact", "coeffs": {}})


def test_f64_matches_exact(rng):
    for _ in range(20):
        a, b = random_form(rng, 2), random_form(rng, 3)
        af, bf = a.to_backend("f64"), b.to_backend("f64")
        assert ex.allclose(contract(af, wedge(af, bf)), contract(a, wedge(a, b)).to_backend("f64"))
        assert ex.allclose(hodge(wedge(af, hodge(bf))), hodge(wedge(a, hodge(b))).to_backend("f64"))
