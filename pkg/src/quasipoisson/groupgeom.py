"""Matrix-group realizations of quasi-Poisson geometry.

Everything is left-trivialized: a tangent vector at g is stored as the element
g^-1 v of g, a covector as its dual.  In this frame x^lambda -> x and
x^rho -> Ad_{g^-1} x.  Bivectors are antisymmetric n x n arrays P^{ab}, and
P^sharp(c) = P c contracts the second slot.

On S = (G x G)/G, identified with G through s = g1 g2^-1, the dressing field of
(x1, x2) is x2 - Ad_{s^-1} x1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg

from .quasilie import LieAlgebraSpec, QuasiTriple, build_pair_from_metric, exact_inverse
from .report import Report, exact_check, numeric_check
from .tensoralg import (
    BasedSpace,
    Multivector,
    StructureConstants,
    fraction_array,
    identity,
    schouten,
    zeros,
)

ADMISSIBILITY_TOL = 1e-7
SAMPLE_MARGIN = 1e-3


class NonAdmissibleError(ValueError):
    def __init__(self, margin: float):
        self.margin = margin
        super().__init__(f"complement is not admissible at this point (margin {margin:.3e})")


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=object).astype(float)


# groups

@dataclass(frozen=True)
class GroupPoint:
    matrix: np.ndarray
    Ad: np.ndarray = field(repr=False)

    @property
    def Ad_inv(self) -> np.ndarray:
        return np.linalg.inv(self.Ad)


class MatrixGroupModel:
    """A Lie algebra with a faithful matrix representation of its basis."""

    def __init__(self, algebra: LieAlgebraSpec, rep, rep_tol: float = 1e-12):
        self.algebra = algebra
        self.rep = [np.asarray(X, dtype=complex) for X in rep]
        n = algebra.dim
        if len(self.rep) != n:
            raise ValueError(f"need {n} representation matrices, got {len(self.rep)}")
        self.size = self.rep[0].shape[0]
        stacked = np.array([np.concatenate([X.real.ravel(), X.imag.ravel()]) for X in self.rep]).T
        if np.linalg.matrix_rank(stacked) < n:
            raise ValueError("representation is not faithful on the Lie algebra")
        self._coords = np.linalg.pinv(stacked)
        self._stacked = stacked
        self.f = to_float(algebra.f.f)
        self.K = None if algebra.K is None else to_float(algebra.K)
        self.Kinv = None if self.K is None else np.linalg.inv(self.K)
        defect = self.rep_defect()
        if defect > rep_tol:
            raise ValueError(f"representation matrices do not reproduce the brackets (defect {defect:.3e})")

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def rep_defect(self) -> float:
        worst = 0.0
        for i, j in itertools.product(range(self.dim), repeat=2):
            comm = self.rep[i] @ self.rep[j] - self.rep[j] @ self.rep[i]
            expect = sum(self.f[i, j, k] * self.rep[k] for k in range(self.dim))
            worst = max(worst, float(np.max(np.abs(comm - expect))))
        return worst

    def matrix_of(self, x) -> np.ndarray:
        return sum(float(c) * X for c, X in zip(x, self.rep))

    def coords_of(self, X) -> tuple[np.ndarray, float]:
        """Coordinates of a matrix in the Lie algebra and the residual of the projection."""
        X = np.asarray(X, dtype=complex)
        v = np.concatenate([X.real.ravel(), X.imag.ravel()])
        c = self._coords @ v
        return c, float(np.max(np.abs(self._stacked @ c - v), initial=0.0))

    def exp(self, x) -> np.ndarray:
        return scipy.linalg.expm(self.matrix_of(x))

    def log(self, g) -> np.ndarray:
        c, res = self.coords_of(scipy.linalg.logm(np.asarray(g, dtype=complex)))
        if res > 1e-8:
            raise ValueError(f"logarithm leaves the Lie algebra (residual {res:.3e})")
        return c

    def point(self, g, tol: float = 1e-9) -> GroupPoint:
        g = np.asarray(g, dtype=complex)
        ginv = np.linalg.inv(g)
        Ad = np.empty((self.dim, self.dim))
        worst = 0.0
        for j, X in enumerate(self.rep):
            Ad[:, j], res = self.coords_of(g @ X @ ginv)
            worst = max(worst, res)
        if worst > tol:
            raise ValueError(f"matrix does not normalize the Lie algebra (residual {worst:.3e})")
        if self.K is not None:
            defect = float(np.max(np.abs(Ad.T @ self.K @ Ad - self.K))) / max(1.0, float(np.max(np.abs(Ad))) ** 2)
            if defect > tol:
                raise ValueError(f"Ad_g does not preserve K (defect {defect:.3e})")
        return GroupPoint(g, Ad)

    def identity(self) -> GroupPoint:
        return self.point(np.eye(self.size, dtype=complex))

    def exp_point(self, x) -> GroupPoint:
        return self.point(self.exp(x))

    def multiply(self, a: GroupPoint, b: GroupPoint) -> GroupPoint:
        return GroupPoint(a.matrix @ b.matrix, a.Ad @ b.Ad)

    def inverse(self, a: GroupPoint) -> GroupPoint:
        return GroupPoint(np.linalg.inv(a.matrix), np.linalg.inv(a.Ad))

    @property
    def compact_form(self) -> bool:
        """K definite, so exp of a normal sample stays bounded."""
        if self.K is None:
            return False
        w = np.linalg.eigvalsh(self.K)
        return bool(np.all(w > 0) or np.all(w < 0))

    def random_point(self, rng: np.random.Generator, scale: float | None = None) -> GroupPoint:
        if scale is None:
            scale = 1.5 if self.compact_form else 0.5
        return self.exp_point(rng.normal(scale=scale, size=self.dim))


# frame algebra of invariant fields

class FrameAlgebra:
    """Exterior algebra on (e_i^lambda, e_i^rho) with brackets f and -f, the two frames commuting."""

    def __init__(self, algebra: LieAlgebraSpec):
        self.algebra = algebra
        n = algebra.dim
        labels = tuple(f"{l}^L" for l in algebra.labels) + tuple(f"{l}^R" for l in algebra.labels)
        f2 = zeros(2 * n, 2 * n, 2 * n)
        f2[:n, :n, :n] = algebra.f.f
        f2[n:, n:, n:] = -algebra.f.f
        self.space = BasedSpace(labels)
        self.f = StructureConstants(self.space, f2)
        self.n = n

    def _shift(self, u: Multivector, offset: int) -> Multivector:
        if u.space != self.algebra.space:
            raise ValueError("element does not live on the frame algebra's Lie algebra")
        return Multivector(self.space, u.degree, {tuple(i + offset for i in k): c for k, c in u.terms.items()})

    def lam(self, u: Multivector) -> Multivector:
        return self._shift(u, 0)

    def rho(self, u: Multivector) -> Multivector:
        return self._shift(u, self.n)

    def dressing(self, i: int) -> Multivector:
        """u_i = e_i^lambda - e_i^rho, the conjugation generator of e_i on S = G."""
        return Multivector(self.space, 1, {(i,): 1, (self.n + i,): -1})

    def bracket(self, a: Multivector, b: Multivector) -> Multivector:
        return schouten(a, b, self.f)

    def evaluate(self, u: Multivector, point: GroupPoint) -> np.ndarray:
        """Left-trivialized value at a point, as a full antisymmetric float tensor."""
        n = self.n
        E = np.vstack([np.eye(n), point.Ad_inv.T])  # row a = image of generator a
        if u.degree == 0:
            return np.array(float(u.terms.get((), 0)))
        out = np.zeros((n,) * u.degree)
        for key, c in u.terms.items():
            vecs = [E[a] for a in key]
            for perm in itertools.permutations(range(u.degree)):
                sign = _perm_sign(perm)
                term = vecs[perm[0]]
                for p in perm[1:]:
                    term = np.multiply.outer(term, vecs[p])
                out += sign * float(c) * term
        return out


def _perm_sign(perm) -> int:
    sign = 1
    p = list(perm)
    for a in range(len(p)):
        while p[a] != a:
            b = p[a]
            p[a], p[b] = p[b], p[a]
            sign = -sign
    return sign


def schouten_pointwise(frame: FrameAlgebra, a: Multivector, b: Multivector, point: GroupPoint) -> np.ndarray:
    return frame.evaluate(frame.bracket(a, b), point)


def P_S_field(frame: FrameAlgebra, t=None) -> Multivector:
    """P_S = 1/2 K^{il} e_i^lambda ^ e_l^rho - t_S, with t_S = sum_{i<j} t^{ij} u_i ^ u_j."""
    g = frame.algebra
    n = g.dim
    Kinv = exact_inverse(g.K)
    out = Multivector(frame.space, 2, {(i, n + l): Kinv[i, l] / 2 for i in range(n) for l in range(n) if Kinv[i, l]})
    if t is not None:
        t = fraction_array(t)
        for i, j in itertools.combinations(range(n), 2):
            if t[i, j]:
                out = out - (frame.dressing(i) ^ frame.dressing(j)) * t[i, j]
    return out


def phi_S_field(frame: FrameAlgebra, phi: Multivector) -> Multivector:
    out = Multivector.zero(frame.space, 3)
    for (i, j, k), c in phi.terms.items():
        out = out + (frame.dressing(i) ^ frame.dressing(j) ^ frame.dressing(k)) * c
    return out


# the (G x G, G) double

class DoubleModel:
    """(G x G, G) with S = G, diagonal g and reference complement 1/2 of the anti-diagonal."""

    def __init__(self, group: MatrixGroupModel):
        if group.algebra.K is None:
            raise ValueError("the double needs an invariant form")
        self.group = group
        self.triple: QuasiTriple = build_pair_from_metric(group.algebra)
        self.K = group.K
        self.Kinv = group.Kinv
        self.n = group.dim

    def U(self, s: GroupPoint) -> np.ndarray:
        """Columns u_i = (Delta e_i)_S(s)."""
        return np.eye(self.n) - s.Ad_inv

    def M(self, s: GroupPoint, t=None) -> np.ndarray:
        """Columns m_i = (j eps^i)_S(s) for the complement twisted by t."""
        A = s.Ad_inv
        m = -0.5 * (np.eye(self.n) + A) @ self.Kinv
        if t is not None:
            m = m + (np.eye(self.n) - A) @ np.asarray(t, dtype=float).T
        return m


def dressing_field(x1, x2, s: GroupPoint) -> np.ndarray:
    """Left-trivialized generator of (x1, x2) in g + g acting on S = G."""
    return np.asarray(x2, dtype=float) - s.Ad_inv @ np.asarray(x1, dtype=float)


def admissibility(s: GroupPoint, model: DoubleModel, t=None) -> tuple[bool, float]:
    margin = float(np.linalg.svd(model.M(s, t), compute_uv=False)[-1])
    return margin > ADMISSIBILITY_TOL, margin


def _require_admissible(s, model, t):
    ok, margin = admissibility(s, model, t)
    if not ok:
        raise NonAdmissibleError(margin)


def hat_form(x, s: GroupPoint, model: DoubleModel, t=None) -> np.ndarray:
    """Covector with <x^, xi_S> = -(x | xi) on the complement, solved against its dressing images."""
    _require_admissible(s, model, t)
    return -np.linalg.solve(model.M(s, t).T, np.asarray(x, dtype=float))


def hat_closed_form(x, s: GroupPoint, model: DoubleModel) -> np.ndarray:
    """Reference complement: x^ = 2 K (1 + Ad_s)^-1 x."""
    return 2 * model.K @ np.linalg.solve(np.eye(model.n) + s.Ad, np.asarray(x, dtype=float))


def tau_map(s: GroupPoint, model: DoubleModel, t=None, tol: float = 1e-9) -> np.ndarray:
    """tau with (e_i)_S = tau_ik (j eps^k)_S; antisymmetry is checked."""
    _require_admissible(s, model, t)
    tau = np.linalg.solve(model.M(s, t), model.U(s)).T
    asym = float(np.max(np.abs(tau + tau.T)))
    if asym > tol * max(1.0, float(np.max(np.abs(tau)))):
        raise ArithmeticError(f"tau is not antisymmetric (defect {asym:.3e})")
    return tau


def nu_map(s: GroupPoint, model: DoubleModel, t, base=None) -> np.ndarray:
    """nu = (1 + t o tau)^-1, with tau computed for the base complement."""
    tau = tau_map(s, model, base)
    t = np.asarray(t, dtype=float)
    mat = np.eye(model.n) + t.T @ tau.T
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] < ADMISSIBILITY_TOL:
        raise NonAdmissibleError(float(sv[-1]))
    return np.linalg.inv(mat)


def twisted_hat(x, s: GroupPoint, model: DoubleModel, t, base=None) -> np.ndarray:
    """Hat-form for the complement base + t, transported from the base complement."""
    nu = nu_map(s, model, t, base)
    return hat_form(nu @ np.asarray(x, dtype=float), s, model, base)


def bivector_P_S(s: GroupPoint, model: DoubleModel, t=None) -> np.ndarray:
    """P_S = -(r_d)_S = -U M^T (antisymmetrized to drop roundoff)."""
    P = -model.U(s) @ model.M(s, t).T
    return 0.5 * (P - P.T)


def P_S_closed_form(s: GroupPoint, model: DoubleModel) -> np.ndarray:
    """Reference complement: 1/2 (K^-1 Ad_{s^-1}^T - Ad_{s^-1} K^-1)."""
    A = s.Ad_inv
    return 0.5 * (model.Kinv @ A.T - A @ model.Kinv)


def t_S(s: GroupPoint, model: DoubleModel, t) -> np.ndarray:
    U = model.U(s)
    return U @ np.asarray(t, dtype=float) @ U.T


# admissible twists near the -1 locus

@dataclass(frozen=True)
class AdmissibleTwist:
    t: np.ndarray
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    eps: float


def find_admissible_twist(s: GroupPoint, eps: float, model: DoubleModel, tol: float = ADMISSIBILITY_TOL) -> AdmissibleTwist:
    """t = eps sum_a (a (x) b - b (x) a) over K-orthonormal pairs spanning ker(Ad_s + 1)."""
    if eps == 0:
        raise ValueError("eps must be nonzero")
    n = model.n
    _, sv, vh = np.linalg.svd(s.Ad + np.eye(n))
    V = vh[sv < tol].T
    if V.shape[1] == 0:
        return AdmissibleTwist(np.zeros((n, n)), (), eps)
    if V.shape[1] % 2:
        raise ArithmeticError(f"the -1 eigenspace has odd dimension {V.shape[1]}")
    G = V.T @ model.K @ V
    w = np.linalg.eigvalsh(G)
    if not (np.all(w > tol) or np.all(w < -tol)):
        raise ArithmeticError("K is not definite on the -1 eigenspace")
    sign = 1.0 if w[0] > 0 else -1.0
    basis = []
    for v in V.T:
        for b in basis:
            v = v - sign * (b @ model.K @ v) * b
        basis.append(v / np.sqrt(sign * (v @ model.K @ v)))
    pairs = tuple((basis[a], basis[a + 1]) for a in range(0, len(basis), 2))
    t = np.zeros((n, n))
    for a, b in pairs:
        t += eps * (np.outer(a, b) - np.outer(b, a))
    return AdmissibleTwist(t, pairs, eps)


# bivectors on G

def ad_D_double(g: GroupPoint) -> np.ndarray:
    """Ad of the diagonal element (g, g) on g + g."""
    return scipy.linalg.block_diag(g.Ad, g.Ad)


def ad_D_standard(g: GroupPoint) -> np.ndarray:
    """Ad of g on g + g* (coadjoint action on the dual block)."""
    return scipy.linalg.block_diag(g.Ad, np.linalg.inv(g.Ad).T)


def t_g(qt: QuasiTriple, g: GroupPoint, ad_D: Callable[[GroupPoint], np.ndarray], t=None) -> tuple[np.ndarray, float]:
    """Components c^{ab} of Ad_g r - r along e_a (x) e_b, and the size of its part outside g (x) g."""
    G = to_float(qt.d.K)
    grows = to_float(qt.g_rows)
    jrows = to_float(qt.j_rows)
    if t is not None:
        jrows = jrows + np.asarray(t, dtype=float) @ grows
    r = grows.T @ jrows
    A = ad_D(g)
    diff = A @ r @ A.T - r
    c = jrows @ G @ diff @ G @ jrows.T
    outside = float(np.max(np.abs(diff - grows.T @ c @ grows)))
    return c, outside


def bivector_P_G(qt: QuasiTriple, g: GroupPoint, ad_D, t=None) -> np.ndarray:
    """Left-trivialized P_G(g) = Ad_{g^-1} t_g."""
    c, _ = t_g(qt, g, ad_D, t)
    A = g.Ad_inv
    return A @ c @ A.T


# g* and the standard triple

def kks_bivector(f: StructureConstants, xi) -> np.ndarray:
    """P^{ab} = -f_ab^k xi_k, the bivector -(r_d)_S of the standard triple (exact)."""
    xi = fraction_array(xi)
    return -np.einsum("abk,k->ab", f.f, xi)


def kks_dressing(f: StructureConstants, xi) -> tuple[np.ndarray, np.ndarray]:
    """Columns (e_i)_S = f_ij^k xi_k d/dxi_j and (eps^i)_S = -d/dxi_i."""
    xi = fraction_array(xi)
    n = f.dim
    U = np.einsum("ijk,k->ji", f.f, xi)
    M = zeros(n, n)
    for i in range(n):
        M[i, i] = Fraction(-1)
    return U, M


def kks_hat(n: int) -> np.ndarray:
    """Rows are e_i^ = d xi_i."""
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


# invariant functions

def differential(func: Callable[[np.ndarray], float], s: GroupPoint, model: MatrixGroupModel, h: float = 1e-5) -> np.ndarray:
    """Left-trivialized df(s) by central differences along s exp(h e_a)."""
    out = np.empty(model.dim)
    for a in range(model.dim):
        step = np.zeros(model.dim)
        step[a] = h
        plus = func(s.matrix @ model.exp(step))
        minus = func(s.matrix @ model.exp(-step))
        out[a] = (plus - minus) / (2 * h)
    return out


def invariant_bracket(f1, f2, s: GroupPoint, model: DoubleModel, t=None, h: float = 1e-5) -> float:
    df1 = differential(f1, s, model.group, h)
    df2 = differential(f2, s, model.group, h)
    return float(df1 @ bivector_P_S(s, model, t) @ df2)


def sharp_image(P: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of im P^sharp."""
    u, sv, _ = np.linalg.svd(P)
    return u[:, sv > tol]


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest sine of principal angles; 1.0 for different dimensions."""
    if A.shape[1] != B.shape[1]:
        return 1.0
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(A, B), initial=0.0))


def distribution_check(s: GroupPoint, model: DoubleModel, t, tol: float = 1e-9) -> Report:
    rep = Report()
    img0 = sharp_image(bivector_P_S(s, model), tol)
    img1 = sharp_image(bivector_P_S(s, model, t), tol)
    rep.add(numeric_check("distribution.twist_invariant", "image of P^sharp does not depend on the complement",
                          subspace_distance(img0, img1), tol, f"ranks {img0.shape[1]} vs {img1.shape[1]}"))
    orbit = sharp_image(model.U(s), tol)
    proj = img0 @ img0.T @ orbit - orbit if img0.size else orbit
    rep.add(numeric_check("distribution.contains_orbit", "image of P^sharp contains the orbit tangent",
                          float(np.max(np.abs(proj), initial=0.0)), tol))
    return rep


# sampling

def admissible_sample(model: DoubleModel, rng: np.random.Generator, t=None, margin: float = SAMPLE_MARGIN,
                      max_tries: int = 1000) -> GroupPoint:
    for _ in range(max_tries):
        s = model.group.random_point(rng)
        if admissibility(s, model, t)[1] >= margin:
            return s
    raise RuntimeError("could not find an admissible sample point")


def random_twist(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(scale=scale, size=(n, n))
    return a - a.T


def random_rational_twist(rng: np.random.Generator, n: int, bound: int = 5) -> np.ndarray:
    t = zeros(n, n)
    for i, j in itertools.combinations(range(n), 2):
        v = Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, bound + 1)))
        t[i, j], t[j, i] = v, -v
    return t


def conjugacy_class_basis(m: GroupPoint, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the left-trivialized tangent space im(1 - Ad_{m^-1}) of the class."""
    return sharp_image(np.eye(m.Ad.shape[0]) - m.Ad_inv, tol)



def rel_residual(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


# moment maps

def moment_check_S(model: DoubleModel, rng: np.random.Generator, samples: int, tol: float = 1e-9) -> Report:
    """(P_S)^sharp(x^) = x_S with mu = id, for the reference complement and a random twist."""
    n = model.n
    frame = FrameAlgebra(model.group.algebra)
    field_P = P_S_field(frame)
    T = random_twist(rng, n)
    worst = dict.fromkeys(["ref", "twisted", "indep", "equiv", "equivariance"], (0.0, None))

    def bump(key, value, where):
        if value > worst[key][0]:
            worst[key] = (value, where)

    for k in range(samples):
        while True:
            s = admissible_sample(model, rng)
            if admissibility(s, model, T)[1] >= SAMPLE_MARGIN:
                break
        P = frame.evaluate(field_P, s)
        P_t = P - t_S(s, model, T)
        U = model.U(s)
        tau = tau_map(s, model)
        h = model.group.random_point(rng)
        hs = model.group.multiply(model.group.multiply(h, s), model.group.inverse(h))
        bump("equivariance", rel_residual(bivector_P_S(hs, model), h.Ad @ P @ h.Ad.T), f"sample {k}")
        for i in range(n):
            x = np.eye(n)[i]
            xs = U @ x
            bump("ref", rel_residual(P @ hat_form(x, s, model), xs), f"sample {k}, x = e{i + 1}")
            direct = hat_form(x, s, model, T)
            bump("twisted", rel_residual(P_t @ direct, xs), f"sample {k}, x = e{i + 1}")
            bump("indep", rel_residual(twisted_hat(x, s, model, T), direct), f"sample {k}, x = e{i + 1}")
            lhs = U @ T @ U.T @ hat_form(x, s, model)
            bump("equiv", rel_residual(lhs, -U @ (T.T @ tau.T @ x)), f"sample {k}, x = e{i + 1}")
    rep = Report()
    anchors = {
        "ref": "moment map condition (P_S)^sharp(x^) = x_S, reference complement",
        "twisted": "moment map condition after a twist of the complement",
        "indep": "twisted hat-forms: x^' = (nu_s x)^",
        "equiv": "t_S^sharp(y^) = -((t o tau_s) y)_S",
        "equivariance": "P_S(h s h^-1) = Ad_h P_S(s)",
    }
    for key, anchor in anchors.items():
        rep.add(numeric_check(f"moment_S.{key}", anchor, worst[key][0], tol, worst[key][1]))
    return rep


def moment_check_conjugacy(g0: GroupPoint, model: DoubleModel, rng: np.random.Generator, samples: int,
                           tol: float = 1e-9, eps: float | None = None, prefix: str = "class") -> Report:
    """Conjugacy class of g0 with the inclusion as moment map and P the restriction of P_S."""
    n = model.n
    G = model.group
    keys = ["moment_class", "pushforward", "kernel", "equivariance"] + (["twisted"] if eps is not None else [])
    worst = dict.fromkeys(keys, (0.0, None))

    def bump(key, value, where):
        if value > worst[key][0]:
            worst[key] = (value, where)

    for k in range(samples):
        h = G.random_point(rng)
        m = G.multiply(G.multiply(h, g0), G.inverse(h))
        # inclusion is equivariant: conjugating m by a second element stays in the class image
        h2 = G.random_point(rng)
        moved = G.multiply(G.multiply(h2, m), G.inverse(h2))
        direct = G.multiply(G.multiply(G.multiply(h2, h), g0), G.inverse(G.multiply(h2, h)))
        bump("equivariance", rel_residual(moved.matrix.view(float), direct.matrix.view(float)), f"sample {k}")
        P = P_S_closed_form(m, model)
        A = m.Ad_inv
        B = conjugacy_class_basis(m)
        proj = B @ B.T
        bump("pushforward", rel_residual(proj @ P @ proj, P), f"sample {k}")
        for i in range(n):
            x = np.eye(n)[i]
            rhs = 0.5 * (np.eye(n) - A) @ (np.eye(n) + m.Ad) @ x
            bump("moment_class", rel_residual(P @ model.K @ x, rhs), f"sample {k}, x = e{i + 1}")
        PM = B.T @ P @ B
        if B.shape[1]:
            u, sv, _ = np.linalg.svd(PM)
            ker = u[:, sv <= 1e-9]
        else:
            ker = np.zeros((0, 0))
        _, sv1, vh = np.linalg.svd(np.eye(n) + m.Ad)
        N = vh[sv1 < ADMISSIBILITY_TOL].T
        W = sharp_image(B.T @ model.K @ N) if N.size and B.size else np.zeros((B.shape[1], 0))
        bump("kernel", subspace_distance(ker, W), f"sample {k}")
        if eps is not None:
            at = find_admissible_twist(m, eps, model)
            Pt = P - t_S(m, model, at.t)
            for i in range(n):
                x = np.eye(n)[i]
                bump("twisted", rel_residual(Pt @ hat_form(x, m, model, at.t), model.U(m) @ x),
                     f"sample {k}, x = e{i + 1}")
    anchors = {
        "moment_class": "P^sharp(mu* K(x, theta)) = 1/2 ((1 + Ad_mu) x)_M",
        "pushforward": "the moment map is a bivector map: mu_* P_M = P_S",
        "kernel": "ker P_M^sharp = {mu* K(x, theta) : x in ker(1 + Ad_mu)}",
        "equivariance": "mu(h . m) = h mu(m) h^-1",
        "twisted": "moment map condition with an admissible eps-twist",
    }
    rep = Report()
    for key in keys:
        rep.add(numeric_check(f"{prefix}.{key}", anchors[key], worst[key][0], tol, worst[key][1]))
    return rep


def kks_check(f: StructureConstants, xi) -> Report:
    """Exact checks on g*: KKS components, dressing fields, e_i^ = d xi_i and the characteristic property."""
    n = f.dim
    P = kks_bivector(f, xi)
    U, M = kks_dressing(f, xi)
    H = kks_hat(n)
    rep = Report()
    rep.add(exact_check("kks.components", "P_S = -(r_d)_S = -f_ab^k xi_k d_a ^ d_b", P + U.dot(M.T)))
    rep.add(exact_check("kks.antisymmetric", "P_S is antisymmetric", P + P.T))
    rep.add(exact_check("kks.hat", "<e_i^, eps^k_S> = -(e_i | eps^k)", H.dot(M) + identity(n)))
    rep.add(exact_check("kks.smom", "(P_S)^sharp(e_i^) = (e_i)_S", P.dot(H.T) - U))
    return rep
