import numpy as np
import pytest

from widthlab.forms import (CensusCapExceeded, FormSpec, all_vectors, form_eval, form_preserver_census, preserves,
                            space_bound, standard_forms)
from widthlab.gf import Matrix, field, field_of_order


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


# independent order formulas for isometry groups of the standard forms
def sp_order(m, q):
    h = m // 2
    return q ** (h * h) * _prod(q ** (2 * i) - 1 for i in range(1, h + 1))


def gu_order(m, q):  # q = sqrt of the field order
    return q ** (m * (m - 1) // 2) * _prod(q**i - (-1) ** i for i in range(1, m + 1))


def o_odd_order(m, q):  # O(2h+1, q), q odd
    h = (m - 1) // 2
    return 2 * q ** (h * h) * _prod(q ** (2 * i) - 1 for i in range(1, h + 1))


def o_even_order(m, q, eps):  # O^eps(2h, q)
    h = m // 2
    return 2 * q ** (h * (h - 1)) * (q**h - eps) * _prod(q ** (2 * i) - 1 for i in range(1, h))


def test_form_eval_bilinear():
    F = field(5)
    B = FormSpec(Matrix.identity(F, 2))
    assert form_eval(B, [1, 2], [3, 4]) == (3 + 8) % 5
    with pytest.raises(ValueError):
        form_eval(B, [1, 2, 3], [1, 2])


def test_form_validation():
    F = field(3)
    with pytest.raises(ValueError):
        FormSpec(Matrix(F, [[1, 1], [0, 1]]), 0, "symmetric")
    with pytest.raises(ValueError):
        FormSpec(Matrix(F, [[0, 0], [0, 1]]))
    with pytest.raises(ValueError):
        FormSpec(Matrix.identity(F, 2), 0, "hermitian")
    with pytest.raises(ValueError):
        FormSpec(Matrix.identity(F, 2), 0, "alternating")


@pytest.mark.parametrize("q", [2, 3, 4])
def test_symplectic_census_matches_order_formula(q):
    F = field_of_order(q)
    J = dict(standard_forms(F, 2))["alternating-standard"]
    assert form_preserver_census(J) == sp_order(2, q)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_unitary_census_over_gf4(m):
    F = field_of_order(4)
    H = dict(standard_forms(F, m))["hermitian-identity"]
    assert form_preserver_census(H) == gu_order(m, 2)


@pytest.mark.parametrize("q", [3, 5])
def test_orthogonal_census_small(q):
    F = field_of_order(q)
    forms = dict(standard_forms(F, 3))
    assert form_preserver_census(forms["symmetric-identity"]) == o_odd_order(3, q)
    forms2 = dict(standard_forms(F, 2))
    # the antidiagonal form is a hyperbolic plane: O+(2, q) of order 2(q-1)
    assert form_preserver_census(forms2["symmetric-antidiagonal"]) == o_even_order(2, q, 1)


def test_census_agrees_with_preserves():
    F = field(3)
    for name, B in standard_forms(F, 2):
        direct = 0
        for flat in np.ndindex(*(3,) * 4):
            X = Matrix(F, np.array(flat).reshape(2, 2))
            direct += preserves(B, X)
        assert direct == form_preserver_census(B), name


def test_census_cap():
    F = field_of_order(13)
    B = FormSpec(Matrix.identity(F, 3))
    with pytest.raises(CensusCapExceeded):
        form_preserver_census(B)


def test_standard_forms_kinds():
    kinds = {B.kind for _, B in standard_forms(field_of_order(4), 2)}
    assert kinds == {"symmetric", "alternating", "hermitian", "sesquilinear"}
    assert not any(B.kind == "hermitian" for _, B in standard_forms(field(3), 2))


def test_space_bound_and_vectors():
    assert space_bound(3, 2) == 27
    assert len(all_vectors(field(2), 3)) == 8
