"""Manin pairs, Manin quasi-triples and Lie quasi-bialgebras over exact rationals.

A quasi-triple is stored in the coordinates of its double ``d``: ``g_rows``
holds the basis e_i of the isotropic subalgebra g, ``h_rows`` a reference
complement normalized so that (h_i | e_k) = delta_ik, and ``twist`` the
antisymmetric matrix t with j(eps^i) = h_i + t^{ij} e_j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .report import Check, Report, exact_check
from .tensoralg import (
    BasedSpace,
    Multivector,
    StructureConstants,
    antisymmetric_part,
    antisymmetrize,
    ce_differential,
    cobracket_image,
    drinfeld_bracket,
    first_jacobi_violation,
    fraction_array,
    identity,
    is_totally_antisymmetric,
    jacobi_defect,
    max_abs,
    schouten,
    symmetric_part,
    zeros,
)


class DoubleJacobiError(ValueError):
    """The bracket assembled from (F, phi) violates Jacobi."""

    def __init__(self, triple: tuple[int, int, int], labels: tuple[str, ...]):
        self.triple = triple
        self.labels = tuple(labels[i] for i in triple)
        super().__init__(f"Jacobi identity fails on the triple {self.labels}")


class ComplementError(ValueError):
    def __init__(self, message: str, witness):
        self.witness = witness
        super().__init__(f"{message}: witness {witness}")


# exact linear algebra (sympy does the elimination)

def _to_sympy(arr) -> sympy.Matrix:
    arr = np.asarray(arr, dtype=object)
    return sympy.Matrix(arr.shape[0], arr.shape[1],
                        [sympy.Rational(v.numerator, v.denominator) for v in (Fraction(x) for x in arr.ravel())])


def _from_sympy(m: sympy.Matrix) -> np.ndarray:
    out = zeros(m.rows, m.cols)
    for a in range(m.rows):
        for b in range(m.cols):
            v = sympy.Rational(m[a, b])
            out[a, b] = Fraction(int(v.p), int(v.q))
    return out


def exact_inverse(a) -> np.ndarray:
    m = _to_sympy(a)
    if m.rank() < m.rows:
        raise ZeroDivisionError("matrix is singular")
    return _from_sympy(m.inv())


def exact_rank(a) -> int:
    a = np.asarray(a, dtype=object)
    if a.size == 0:
        return 0
    return _to_sympy(a).rank()


def exact_nullspace(a) -> np.ndarray:
    """Rows spanning {v : a v = 0}."""
    vecs = _to_sympy(a).nullspace()
    if not vecs:
        return zeros(0, np.asarray(a).shape[1])
    return _from_sympy(sympy.Matrix.hstack(*vecs).T)


def solve_coordinates(basis_rows, vectors) -> np.ndarray:
    """Coordinates c with c @ basis_rows = vectors (basis_rows square, invertible)."""
    return np.asarray(vectors, dtype=object).dot(exact_inverse(basis_rows))


def _labels(idx, names):
    return "(" + ", ".join(names[int(i)] for i in idx) + ")"


# Lie algebras

@dataclass(frozen=True)
class LieAlgebraSpec:
    name: str
    f: StructureConstants
    K: np.ndarray | None = field(default=None, compare=False)

    @property
    def space(self) -> BasedSpace:
        return self.f.space

    @property
    def dim(self) -> int:
        return self.f.dim

    @property
    def labels(self) -> tuple[str, ...]:
        return self.space.labels

    def form_invariance_defect(self) -> np.ndarray:
        """D[a, b, c] = K([e_a, e_b], e_c) + K(e_b, [e_a, e_c])."""
        K = self.K
        t = np.einsum("abm,mc->abc", self.f.f, K)
        return t + t.transpose(0, 2, 1)

    def checks(self) -> Report:
        rep = Report()
        names = self.labels
        bad = self.f.antisymmetry_violation()
        rep.add(Check("lie.antisymmetry", "structure constants: f_ij^k = -f_ji^k", bad is None,
                      Fraction(0) if bad is None else abs(self.f.f[bad] + self.f.f[bad[1], bad[0], bad[2]]),
                      None if bad is None else _labels(bad, names)))
        if bad is None:
            rep.add(exact_check("lie.jacobi", "Lie algebra axioms: cyclic sum of f_ij^m f_mk^l vanishes",
                                jacobi_defect(self.f), lambda idx: _labels(idx[:3], names)))
        if self.K is not None:
            K = self.K
            rep.add(exact_check("form.symmetric", "invariant form K is symmetric", K - K.T,
                                lambda idx: _labels(idx, names)))
            rank = exact_rank(K)
            rep.add(Check("form.nondegenerate", "invariant form K is nondegenerate", rank == self.dim,
                          Fraction(self.dim - rank), None if rank == self.dim else f"rank {rank}"))
            rep.add(exact_check("form.invariance", "K([x, y], z) + K(y, [x, z]) = 0",
                                self.form_invariance_defect(), lambda idx: _labels(idx, names)))
        return rep

    def require_valid(self, need_form: bool = False) -> None:
        if need_form and self.K is None:
            raise ValueError(f"{self.name}: an invariant bilinear form is required")
        failures = self.checks().failures()
        if failures:
            c = failures[0]
            raise ValueError(f"{self.name}: check {c.id} failed (witness {c.witness})")


def lie_algebra(name: str, labels, f, K=None) -> LieAlgebraSpec:
    space = BasedSpace(tuple(labels))
    return LieAlgebraSpec(name, StructureConstants(space, f), None if K is None else fraction_array(K))


# quasi-bialgebras and quasi-triples

@dataclass(frozen=True)
class QuasiBialgebraData:
    """(g, F, phi) with F[i, j, k] = F_i^{jk} and phi of degree 3 over g."""

    g: LieAlgebraSpec
    F: np.ndarray = field(compare=False)
    phi: Multivector

    def __eq__(self, other) -> bool:
        return (isinstance(other, QuasiBialgebraData) and self.g.f == other.g.f
                and bool(np.all(self.F == other.F)) and self.phi == other.phi)

    __hash__ = None

    def phi_tensor(self) -> np.ndarray:
        return self.phi.to_tensor()

    def cobracket(self, i: int) -> Multivector:
        return cobracket_image(self.F, i, self.g.space)


def _pairing_form(n: int) -> np.ndarray:
    G = zeros(2 * n, 2 * n)
    for i in range(n):
        G[i, n + i] = Fraction(1)
        G[n + i, i] = Fraction(1)
    return G


@dataclass(frozen=True)
class QuasiTriple:
    d: LieAlgebraSpec
    g_rows: np.ndarray = field(compare=False)
    h_rows: np.ndarray = field(compare=False)
    twist: np.ndarray = field(compare=False)
    g_labels: tuple[str, ...] = ()

    def __post_init__(self):
        n2 = self.d.dim
        if n2 % 2:
            raise ValueError("the double must be even-dimensional")
        n = n2 // 2
        for name, a, shape in (("g_rows", self.g_rows, (n, n2)), ("h_rows", self.h_rows, (n, n2)),
                               ("twist", self.twist, (n, n))):
            if np.asarray(a).shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
        if self.d.K is None:
            raise ValueError("the double needs its scalar product")
        if not self.g_labels:
            object.__setattr__(self, "g_labels", tuple(f"e{i + 1}" for i in range(n)))
        self.require_complement()

    @property
    def n(self) -> int:
        return self.d.dim // 2

    @property
    def j_rows(self) -> np.ndarray:
        return self.h_rows + self.twist.dot(self.g_rows)

    def gram(self, a, b) -> np.ndarray:
        return np.asarray(a, dtype=object).dot(self.d.K).dot(np.asarray(b, dtype=object).T)

    def require_complement(self) -> None:
        t = self.twist
        bad = np.argwhere(t + t.T != 0)
        if len(bad):
            raise ComplementError("twist is not antisymmetric", tuple(int(i) for i in bad[0]))
        gg = self.gram(self.g_rows, self.g_rows)
        bad = np.argwhere(gg != 0)
        if len(bad):
            raise ComplementError("g is not isotropic", tuple(int(i) for i in bad[0]))
        jj = self.gram(self.j_rows, self.j_rows)
        bad = np.argwhere(jj != 0)
        if len(bad):
            i, k = (int(x) for x in bad[0])
            raise ComplementError("complement is not isotropic", list(self.j_rows[i]))
        pair = self.gram(self.j_rows, self.g_rows) - identity(self.n)
        bad = np.argwhere(pair != 0)
        if len(bad):
            i, k = (int(x) for x in bad[0])
            raise ComplementError("complement is not dual to g (pairing (j eps^i | e_k) != delta)",
                                  list(self.j_rows[i]))

    def twisted(self, t) -> "QuasiTriple":
        """Same pair with the complement moved by the twist t (j' = j + t)."""
        return QuasiTriple(self.d, self.g_rows, self.h_rows, self.twist + fraction_array(t), self.g_labels)

    def g_algebra(self) -> LieAlgebraSpec:
        """The subalgebra g with structure constants f_ij^k = ([e_i, e_j] | j eps^k)."""
        n = self.n
        br = np.einsum("ia,jb,abc->ijc", self.g_rows, self.g_rows, self.d.f.f)
        f = np.einsum("ijc,cd,kd->ijk", br, self.d.K, self.j_rows)
        return LieAlgebraSpec(f"{self.d.name}:g", StructureConstants(BasedSpace(self.g_labels), f))

    def complement_brackets(self) -> np.ndarray:
        """B[i, k, :] = [j eps^i, j eps^k] in d coordinates."""
        J = self.j_rows
        return np.einsum("ia,kb,abc->ikc", J, J, self.d.f.f)


def derive_quasibialgebra(qt: QuasiTriple) -> QuasiBialgebraData:
    """F and phi from projecting brackets of complement generators.

    F_m^{ik} = ([j eps^i, j eps^k] | e_m) and phi^{ikm} = ([j eps^i, j eps^k] | j eps^m).
    """
    g = qt.g_algebra()
    B = qt.complement_brackets()
    KG = qt.d.K.dot(qt.g_rows.T)
    KJ = qt.d.K.dot(qt.j_rows.T)
    F = np.einsum("ikc,cm->mik", B, KG)
    phi_t = np.einsum("ikc,cm->ikm", B, KJ)
    if not is_totally_antisymmetric(phi_t):
        raise ValueError("derived phi is not totally antisymmetric")
    return QuasiBialgebraData(g, F, Multivector.from_tensor(g.space, phi_t))


def double_labels(labels: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(labels) + tuple(f"{l}*" for l in labels)


def double_structure(qb: QuasiBialgebraData) -> np.ndarray:
    """Structure constants of g + g* in the basis (e_1..e_n, eps^1..eps^n).

    [e_i, e_j]     = f_ij^k e_k
    [e_i, eps^j]   = -f_ik^j eps^k + F_i^{jk} e_k
    [eps^i, eps^j] = F_k^{ij} eps^k + phi^{ijk} e_k
    """
    n = qb.g.dim
    f, F, phi = qb.g.f.f, qb.F, qb.phi_tensor()
    D = zeros(2 * n, 2 * n, 2 * n)
    D[:n, :n, :n] = f
    mixed_dual = -np.transpose(f, (0, 2, 1))  # [i, j, k] -> -f_ik^j
    D[:n, n:, n:] = mixed_dual
    D[n:, :n, n:] = -mixed_dual.transpose(1, 0, 2)
    D[:n, n:, :n] = F
    D[n:, :n, :n] = -np.transpose(F, (1, 0, 2))
    D[n:, n:, n:] = np.transpose(F, (1, 2, 0))
    D[n:, n:, :n] = phi
    return D


def build_double(qb: QuasiBialgebraData) -> QuasiTriple:
    """The double g + g* with canonical pairing; raises DoubleJacobiError if (F, phi) is invalid."""
    n = qb.g.dim
    F = qb.F
    if np.asarray(F).shape != (n, n, n):
        raise ValueError(f"F must have shape {(n, n, n)}")
    if any(F[i, j, k] != -F[i, k, j] for i, j, k in itertools.product(range(n), repeat=3)):
        raise ValueError("F must be antisymmetric in its upper indices")
    labels = double_labels(qb.g.labels)
    space = BasedSpace(labels)
    sc = StructureConstants(space, double_structure(qb))
    bad = first_jacobi_violation(sc)
    if bad is not None:
        raise DoubleJacobiError(bad, labels)
    d = LieAlgebraSpec(f"double({qb.g.name})", sc, _pairing_form(n))
    g_rows = np.concatenate([identity(n), zeros(n, n)], axis=1)
    h_rows = np.concatenate([zeros(n, n), identity(n)], axis=1)
    return QuasiTriple(d, g_rows, h_rows, zeros(n, n), qb.g.labels)


def standard_triple(g: LieAlgebraSpec) -> QuasiTriple:
    n = g.dim
    return build_double(QuasiBialgebraData(g, zeros(n, n, n), Multivector.zero(g.space, 3)))


def build_pair_from_metric(g: LieAlgebraSpec) -> QuasiTriple:
    """d = g + g with form diag(K, -K), diagonal g and reference complement 1/2 of the anti-diagonal."""
    g.require_valid(need_form=True)
    n = g.dim
    K = g.K
    Kinv = exact_inverse(K)
    f2 = zeros(2 * n, 2 * n, 2 * n)
    f2[:n, :n, :n] = g.f.f
    f2[n:, n:, n:] = g.f.f
    form = zeros(2 * n, 2 * n)
    form[:n, :n] = K
    form[n:, n:] = -K
    labels = tuple(f"{l}_1" for l in g.labels) + tuple(f"{l}_2" for l in g.labels)
    d = LieAlgebraSpec(f"{g.name}+{g.name}", StructureConstants(BasedSpace(labels), f2), form)
    g_rows = np.concatenate([identity(n), identity(n)], axis=1)
    h_rows = np.concatenate([Kinv, -Kinv], axis=1) * Fraction(1, 2)
    return QuasiTriple(d, g_rows, h_rows, zeros(n, n), g.labels)


def canonical_r(qt: QuasiTriple) -> np.ndarray:
    """r_d = sum_i e_i (x) j(eps^i) as an element of d (x) d."""
    return np.einsum("ia,ib->ab", qt.g_rows, qt.j_rows)


def push_to_d(qt: QuasiTriple, tensor) -> np.ndarray:
    """Image in d coordinates of a tensor over g (every slot through e_i -> g_rows[i])."""
    t = np.asarray(tensor, dtype=object)
    for axis in range(t.ndim):
        t = np.moveaxis(np.tensordot(t, qt.g_rows, axes=([axis], [0])), -1, axis)
    return t


def twist_matrix(t, n: int) -> np.ndarray:
    if isinstance(t, Multivector):
        if t.degree != 2:
            raise ValueError("a twist has degree 2")
        return t.to_tensor()
    t = fraction_array(t)
    if t.shape != (n, n) or np.any(t + t.T != 0):
        raise ValueError("a twist must be an antisymmetric n x n matrix")
    return t


def apply_twist(qb: QuasiBialgebraData, t) -> QuasiBialgebraData:
    """(F', phi') for the complement moved by t.

    F'(x) = F(x) + ad_x t, and phi' = phi + <t, t> + phi_1 with
    phi_1^{ikm} = t^{ia} F_a^{km} - t^{kb} F_b^{im} + t^{mc} F_c^{ik}.
    """
    n = qb.g.dim
    t = twist_matrix(t, n)
    f, F = qb.g.f.f, qb.F
    adt = np.einsum("iaj,ak->ijk", f, t) + np.einsum("iak,ja->ijk", f, t)
    F_new = F + adt
    c = np.einsum("ia,akm->ikm", t, F)
    phi1 = c - c.transpose(1, 0, 2) + c.transpose(1, 2, 0)
    phi_new = qb.phi_tensor() + drinfeld_bracket(t, qb.g.f) + phi1
    return QuasiBialgebraData(qb.g, F_new, Multivector.from_tensor(qb.g.space, phi_new))


# verification

def verify_manin_pair(d: LieAlgebraSpec, g_rows) -> Report:
    rep = Report()
    g_rows = fraction_array(g_rows)
    n2 = d.dim
    names = d.labels
    K = d.K
    gram = g_rows.dot(K).dot(g_rows.T)
    rep.add(exact_check("pair.isotropic", "g is isotropic: (e_i | e_k) = 0", gram))
    rank = exact_rank(g_rows)
    orth_dim = n2 - exact_rank(g_rows.dot(K))
    ok = 2 * rank == n2 and orth_dim == rank
    rep.add(Check("pair.maximal", "g is maximal isotropic: equal to its own orthogonal", ok,
                  Fraction(abs(orth_dim - rank) + abs(n2 - 2 * rank)),
                  None if ok else f"dim g = {rank}, dim g^perp = {orth_dim}, dim d = {n2}"))
    worst, witness = Fraction(0), None
    for i, k in itertools.combinations(range(g_rows.shape[0]), 2):
        br = d.f.bracket_vectors(g_rows[i], g_rows[k])
        if exact_rank(np.vstack([g_rows, br[None, :]])) > rank:
            worst, witness = Fraction(1), f"[g{i + 1}, g{k + 1}] leaves g"
            break
    rep.add(Check("pair.closed", "g is a Lie subalgebra", witness is None, worst, witness))
    rep.add(exact_check("pair.form_invariance", "the scalar product of d is ad-invariant",
                        d.form_invariance_defect(), lambda idx: _labels(idx, names)))
    return rep


def a_d(n: int, space: BasedSpace) -> Multivector:
    """Antisymmetric part 1/2 sum e_i ^ eps^i of r_d in the adapted basis of g + g*."""
    return Multivector(space, 2, {(i, n + i): Fraction(1, 2) for i in range(n)})


def _embed(space2: BasedSpace, u: Multivector, offset: int) -> Multivector:
    return Multivector(space2, u.degree, {tuple(i + offset for i in k): c for k, c in u.terms.items()})


def _mv_diff(a: Multivector, b: Multivector) -> np.ndarray:
    diff = a - b
    return np.array(list(diff.terms.values()) or [Fraction(0)], dtype=object)


def _mv_check(check_id: str, anchor: str, pairs) -> Check:
    worst, witness = Fraction(0), None
    for label, lhs, rhs in pairs:
        diff = lhs - rhs
        m = diff.max_abs()
        if m > worst:
            worst, witness = m, label
    return Check(check_id, anchor, worst == 0, worst, witness)


def check_identities(qt: QuasiTriple) -> Report:
    """Exact verification of the quasi-triple identities on all basis elements."""
    rep = Report()
    n = qt.n
    qb = derive_quasibialgebra(qt)
    g = qb.g
    labels = g.labels
    rep.add(exact_check("double.jacobi", "d satisfies Jacobi", jacobi_defect(qt.d.f)))
    rep.add(exact_check("double.form_invariance", "scalar product of d is ad-invariant",
                        qt.d.form_invariance_defect()))
    dd = build_double(qb)
    sp = dd.d.space
    sc = dd.d.f
    ad_ = a_d(n, sp)
    phi_d = _embed(sp, qb.phi, 0)

    # [x, a_d] = F(x)
    rep.add(_mv_check("algsch.x", "[x, a_d] = F(x)",
                      ((labels[i], schouten(Multivector.basis(sp, i), ad_, sc), _embed(sp, qb.cobracket(i), 0))
                       for i in range(n))))

    # [xi, a_d] = -f(xi) + phi(xi)
    def rhs_dual(k):
        fxi = Multivector(sp, 2, {(n + i, n + j): g.f.f[i, j, k] for i in range(n) for j in range(i + 1, n)})
        phixi = Multivector(sp, 2, {(i, j): qb.phi[(k, i, j)] for i in range(n) for j in range(i + 1, n)})
        return phixi - fxi

    rep.add(_mv_check("algsch.xi", "[xi, a_d] = -f(xi) + phi(xi)",
                      ((f"{labels[k]}*", schouten(Multivector.basis(sp, n + k), ad_, sc), rhs_dual(k))
                       for k in range(n))))
    rep.add(_mv_check("algsch.phi", "[a_d, phi] = 0",
                      (("a_d", schouten(ad_, phi_d, sc), Multivector.zero(sp, 4)),)))

    # r-matrix identities in d coordinates
    r = canonical_r(qt)
    s, a = symmetric_part(r), antisymmetric_part(r)
    rep.add(exact_check("rmatrix.cyb", "<r_d, r_d> = phi", drinfeld_bracket(r, qt.d.f) - push_to_d(qt, qb.phi_tensor())))
    gram_inv = exact_inverse(qt.d.K)
    rep.add(exact_check("rmatrix.symmetric_part", "symmetric part of r_d is half the inverse scalar product",
                        s - gram_inv * Fraction(1, 2)))
    rep.add(exact_check("rmatrix.ras", "<r, r> = <a, a> + <s, s>",
                        drinfeld_bracket(r, qt.d.f) - drinfeld_bracket(a, qt.d.f) - drinfeld_bracket(s, qt.d.f)))
    A = Multivector.from_tensor(qt.d.space, a)
    rep.add(_mv_check("rmatrix.skew", "<a, a> = -1/2 [a, a]",
                      (("a", antisymmetrize(drinfeld_bracket(a, qt.d.f), qt.d.space),
                        schouten(A, A, qt.d.f) * Fraction(-1, 2)),)))

    # (d_F)^2 = [phi, .]
    gs = g.space

    def dF2_pairs():
        for deg in (1, 2):
            for key in itertools.combinations(range(n), deg):
                u = Multivector.basis(gs, *key)
                yield ("^".join(labels[i] for i in key), ce_differential(qb.F, ce_differential(qb.F, u)),
                       schouten(qb.phi, u, g.f))

    rep.add(_mv_check("cobracket.dF_squared", "(d_F)^2 = [phi, .]", dF2_pairs()))

    # the double rebuilt from (F, phi) is the original d in the basis (e, j eps)
    basis = np.concatenate([qt.g_rows, qt.j_rows], axis=0)
    br = np.einsum("ia,jb,abc->ijc", basis, basis, qt.d.f.f)
    coords = np.einsum("ijc,ck->ijk", br, exact_inverse(basis))
    rep.add(exact_check("double.isomorphic", "g + g* rebuilt from (F, phi) is isomorphic to d", coords - sc.f,
                        lambda idx: _labels(idx[:2], dd.d.labels)))
    rep.add(exact_check("double.pairing", "the basis (e, j eps) is hyperbolic for the scalar product",
                        basis.dot(qt.d.K).dot(basis.T) - dd.d.K))
    return rep
