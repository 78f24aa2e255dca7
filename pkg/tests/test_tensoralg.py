import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasipoisson.tensoralg import (
    AntisymmetryError,
    BasedSpace,
    Multivector,
    SpaceMismatchError,
    StructureConstants,
    ad_derivation,
    antisymmetrize,
    ce_differential,
    drinfeld_bracket,
    first_jacobi_violation,
    jacobi_defect,
    schouten,
    wedge,
    zeros,
)

SPACE = BasedSpace.standard(4)


def su2_plus_u1():
    f = zeros(4, 4, 4)
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        f[i, j, k], f[j, i, k] = Fraction(1), Fraction(-1)
    return StructureConstants(SPACE, f)


def solvable4():
    # [e1, e2] = e2, [e1, e3] = e2 + e3, [e1, e4] = 2 e4: not unimodular
    f = zeros(4, 4, 4)
    for j, k, v in ((1, 1, 1), (2, 1, 1), (2, 2, 1), (3, 3, 2)):
        f[0, j, k], f[j, 0, k] = Fraction(v), Fraction(-v)
    return StructureConstants(SPACE, f)


ALGEBRAS = [su2_plus_u1(), solvable4()]

coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def multivectors(draw, degree=None):
    k = draw(st.integers(0, 4)) if degree is None else degree
    keys = list(itertools.combinations(range(4), k))
    values = draw(st.lists(coeff, min_size=len(keys), max_size=len(keys)))
    return Multivector(SPACE, k, dict(zip(keys, values)))


def dense_wedge(u, v):
    """Oracle: (1/(p! q!)) Alt(T_u (x) T_v) on full tensors."""
    p, q = u.degree, v.degree
    t = np.multiply.outer(u.to_tensor(), v.to_tensor()) if p and q else u.to_tensor() * v.to_tensor()
    if p + q == 0:
        return t
    acc = zeros(*t.shape)
    for perm in itertools.permutations(range(p + q)):
        inv = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        acc = acc + (-1) ** inv * t.transpose(perm)
    return acc * Fraction(1, math.factorial(p) * math.factorial(q))


class TestMultivector:
    def test_sorting_sign(self):
        u = Multivector(SPACE, 2, {(2, 0): 3})
        assert u.terms == {(0, 2): Fraction(-3)}
        assert u[(2, 0)] == 3

    def test_repeated_index_vanishes(self):
        assert Multivector(SPACE, 2, {(1, 1): 5}).is_zero()

    def test_tensor_round_trip(self):
        u = Multivector(SPACE, 3, {(0, 1, 3): Fraction(1, 2), (1, 2, 3): -2})
        t = u.to_tensor()
        assert t[1, 0, 3] == Fraction(-1, 2)
        assert Multivector.from_tensor(SPACE, t) == u

    def test_basis_wedge_is_commutator(self):
        e1, e2 = Multivector.basis(SPACE, 0), Multivector.basis(SPACE, 1)
        t = (e1 ^ e2).to_tensor()
        assert (t[0, 1], t[1, 0]) == (1, -1)

    def test_space_mismatch(self):
        other = BasedSpace.standard(4, prefix="f")
        with pytest.raises(SpaceMismatchError):
            Multivector.basis(SPACE, 0) + Multivector.basis(other, 0)

    def test_immutable(self):
        with pytest.raises(AttributeError):
            Multivector.basis(SPACE, 0).degree = 2

    @given(multivectors(), multivectors())
    def test_wedge_matches_dense_oracle(self, u, v):
        if u.degree + v.degree > 4:
            return
        w = wedge(u, v)
        assert np.all(w.to_tensor() == dense_wedge(u, v))

    @given(multivectors(), multivectors(), multivectors())
    def test_wedge_associative(self, u, v, w):
        assert (u ^ v) ^ w == u ^ (v ^ w)

    @given(multivectors(), multivectors())
    def test_wedge_graded_commutative(self, u, v):
        assert u ^ v == (v ^ u) * (-1) ** (u.degree * v.degree)


class TestSchouten:
    def test_degree_one_is_lie_bracket(self):
        f = su2_plus_u1()
        e = [Multivector.basis(SPACE, i) for i in range(4)]
        assert schouten(e[0], e[1], f) == e[2]
        assert schouten(e[1], e[0], f) == -e[2]

    def test_frozen_value(self):
        # [DERIVED] from the Leibniz rule by hand: [e1^e2, e1] = e1^e3 on su(2)
        f = su2_plus_u1()
        e = [Multivector.basis(SPACE, i) for i in range(4)]
        assert schouten(e[0] ^ e[1], e[0], f) == e[0] ^ e[2]
        assert schouten(e[0] ^ e[1], e[2], f).is_zero()

    def test_scalar_brackets_vanish(self):
        f = su2_plus_u1()
        assert schouten(Multivector.scalar(SPACE, 2), Multivector.basis(SPACE, 0, 1), f).is_zero()

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=40, deadline=None)
    @given(u=multivectors(), v=multivectors(), w=multivectors())
    def test_leibniz(self, f, u, v, w):
        if u.degree == 0 or v.degree + w.degree > 4:
            return
        lhs = schouten(u, v ^ w, f)
        rhs = (schouten(u, v, f) ^ w) + (v ^ schouten(u, w, f)) * (-1) ** ((u.degree - 1) * v.degree)
        assert lhs == rhs

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=40, deadline=None)
    @given(u=multivectors(), v=multivectors())
    def test_graded_antisymmetry(self, f, u, v):
        assert schouten(v, u, f) == schouten(u, v, f) * (-1) ** (u.degree * v.degree)

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=25, deadline=None)
    @given(u=multivectors(), v=multivectors(), w=multivectors())
    def test_graded_jacobi(self, f, u, v, w):
        p, q = u.degree, v.degree
        if 0 in (p, q, w.degree):
            return
        lhs = schouten(u, schouten(v, w, f), f)
        rhs = (schouten(schouten(u, v, f), w, f) * (-1) ** (p - 1)
               + schouten(v, schouten(u, w, f), f) * (-1) ** ((p - 1) * (q - 1)))
        assert lhs == rhs

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=30, deadline=None)
    @given(r=multivectors(degree=2))
    def test_skew_calibration(self, f, r):
        # <r, r> = -1/2 [r, r] with <r, r> computed by an independent einsum
        lhs = antisymmetrize(drinfeld_bracket(r.to_tensor(), f), SPACE)
        assert lhs == schouten(r, r, f) * Fraction(-1, 2)

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=30, deadline=None)
    @given(x=multivectors(degree=1), u=multivectors())
    def test_ad_derivation_is_bracket_with_vector(self, f, x, u):
        assert ad_derivation(x, u, f) == schouten(x, u, f)


class TestAdDerivation:
    def test_example(self):
        f = su2_plus_u1()
        e = [Multivector.basis(SPACE, i) for i in range(4)]
        # ad_{e1}(e2^e4) = e3^e4
        assert ad_derivation(e[0], e[1] ^ e[3], f) == e[2] ^ e[3]

    def test_needs_vector(self):
        f = su2_plus_u1()
        with pytest.raises(ValueError):
            ad_derivation(Multivector.basis(SPACE, 0, 1), Multivector.basis(SPACE, 2), f)


def cobracket_of(f):
    """F_i^{jk} = f_jk^i: the dual of a Lie bracket, so d_F^2 = 0."""
    return np.transpose(f.f, (2, 0, 1)).copy()


class TestCE:
    @pytest.mark.parametrize("f", ALGEBRAS)
    def test_on_generators(self, f):
        F = cobracket_of(f)
        for i in range(4):
            d = ce_differential(F, Multivector.basis(SPACE, i))
            assert np.all(d.to_tensor() == F[i])

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=40, deadline=None)
    @given(u=multivectors(), v=multivectors())
    def test_odd_derivation(self, f, u, v):
        if u.degree + v.degree > 3:
            return
        F = cobracket_of(f)
        lhs = ce_differential(F, u ^ v)
        rhs = (ce_differential(F, u) ^ v) + (u ^ ce_differential(F, v)) * (-1) ** u.degree
        assert lhs == rhs

    @pytest.mark.parametrize("f", ALGEBRAS)
    @settings(max_examples=30, deadline=None)
    @given(u=multivectors())
    def test_square_zero_for_dual_bracket(self, f, u):
        F = cobracket_of(f)
        assert ce_differential(F, ce_differential(F, u)).is_zero()


class TestJacobi:
    def test_su2_zero(self):
        J = jacobi_defect(su2_plus_u1())
        assert J.shape == (4, 4, 4, 4) and not any(J.ravel())

    def test_perturbed_su2_nonzero(self):
        f = su2_plus_u1().f.copy()
        f[0, 1, 0], f[1, 0, 0] = Fraction(1), Fraction(-1)
        sc = StructureConstants(SPACE, f)
        assert any(jacobi_defect(sc).ravel())
        assert first_jacobi_violation(sc) is not None

    def test_non_antisymmetric_raises(self):
        f = su2_plus_u1().f.copy()
        f[0, 1, 2] = Fraction(2)
        with pytest.raises(AntisymmetryError) as err:
            jacobi_defect(StructureConstants(SPACE, f))
        assert err.value.index[:2] in ((0, 1), (1, 0))

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            StructureConstants(SPACE, zeros(3, 3, 3))
