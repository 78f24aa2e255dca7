"""Exact multilinear algebra over a based vector space.

Multivectors use the unnormalized wedge ``x ^ y = x (x) y - y (x) x``, so the
coefficient stored under a strictly increasing key equals the corresponding
component of the fully antisymmetric tensor.  Tensors of rank 2 and 3 are
numpy object arrays of :class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

Scalar = Fraction


class SpaceMismatchError(ValueError):
    pass


class AntisymmetryError(ValueError):
    """Structure constants fail f_ij^k = -f_ji^k at ``index``."""

    def __init__(self, index: tuple[int, int, int]):
        self.index = index
        i, j, k = index
        super().__init__(f"structure constants not antisymmetric at (i, j, k) = {index}: "
                         f"f[{i},{j},{k}] != -f[{j},{i},{k}]")


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (float, np.floating)):
        raise TypeError(f"refusing to convert float {value!r} to an exact scalar")
    if isinstance(value, str):
        num, _, den = value.partition("/")
        if den and int(den) == 0:
            raise ZeroDivisionError(f"zero denominator in {value!r}")
    return Fraction(value)


def fraction_array(data, shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Object array of Fractions from nested sequences (or zeros of ``shape``)."""
    if data is None:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    arr = np.array(data, dtype=object)
    flat = [as_fraction(v) for v in arr.ravel()]
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = flat
    return out


def zeros(*shape: int) -> np.ndarray:
    return fraction_array(None, shape)


def identity(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def max_abs(arr) -> Fraction:
    """Largest absolute entry of an exact array (0 for empty input)."""
    vals = [abs(v) for v in np.asarray(arr, dtype=object).ravel()]
    return max(vals, default=Fraction(0))


@dataclass(frozen=True)
class BasedSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("a based space needs at least one basis vector")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate basis labels in {self.labels}")

    @classmethod
    def standard(cls, n: int, prefix: str = "e") -> "BasedSpace":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.labels)


def _sort_with_sign(idx: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple (sign 0 on repeats)."""
    idx = list(idx)
    sign = 1
    # insertion sort counts transpositions
    for a in range(1, len(idx)):
        b = a
        while b > 0 and idx[b - 1] > idx[b]:
            idx[b - 1], idx[b] = idx[b], idx[b - 1]
            sign = -sign
            b -= 1
    for a in range(1, len(idx)):
        if idx[a] == idx[a - 1]:
            return 0, tuple(idx)
    return sign, tuple(idx)


class Multivector:
    """Homogeneous element of the exterior algebra of a based space.

    ``terms`` maps strictly increasing index tuples to nonzero Fractions.
    """

    __slots__ = ("space", "degree", "terms")

    def __init__(self, space: BasedSpace, degree: int, terms: Mapping[tuple[int, ...], object] = ()):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        clean: dict[tuple[int, ...], Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, coeff in items:
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"key {key} does not have degree {degree}")
            if any(not 0 <= i < space.dim for i in key):
                raise IndexError(f"index out of range in {key} for dim {space.dim}")
            sign, skey = _sort_with_sign(key)
            if sign == 0:
                continue
            c = as_fraction(coeff) * sign
            total = clean.get(skey, Fraction(0)) + c
            if total:
                clean[skey] = total
            else:
                clean.pop(skey, None)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    # construction helpers
    @classmethod
    def zero(cls, space: BasedSpace, degree: int) -> "Multivector":
        return cls(space, degree)

    @classmethod
    def scalar(cls, space: BasedSpace, value) -> "Multivector":
        return cls(space, 0, {(): value})

    @classmethod
    def basis(cls, space: BasedSpace, *indices: int) -> "Multivector":
        return cls(space, len(indices), {tuple(indices): 1})

    @classmethod
    def vector(cls, space: BasedSpace, coords) -> "Multivector":
        return cls(space, 1, {(i,): c for i, c in enumerate(coords) if c})

    @classmethod
    def from_tensor(cls, space: BasedSpace, tensor, check: bool = True) -> "Multivector":
        """Read the sorted components of a fully antisymmetric tensor."""
        tensor = np.asarray(tensor, dtype=object)
        k = tensor.ndim
        if check and not is_totally_antisymmetric(tensor):
            raise ValueError("tensor is not totally antisymmetric")
        terms = {key: tensor[key] for key in itertools.combinations(range(space.dim), k) if tensor[key]}
        return cls(space, k, terms)

    # queries
    def __getitem__(self, key: tuple[int, ...]) -> Fraction:
        sign, skey = _sort_with_sign(key)
        if sign == 0:
            return Fraction(0)
        return sign * self.terms.get(skey, Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.terms.values()), default=Fraction(0))

    def to_tensor(self) -> np.ndarray:
        n, k = self.space.dim, self.degree
        out = zeros(*([n] * k)) if k else np.array(Fraction(0), dtype=object)
        if k == 0:
            return np.array(self.terms.get((), Fraction(0)), dtype=object)
        for key, c in self.terms.items():
            for perm in itertools.permutations(range(k)):
                sign, _ = _sort_with_sign(perm)
                out[tuple(key[p] for p in perm)] = sign * c
        return out

    # arithmetic
    def _check(self, other: "Multivector"):
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space.labels} vs {other.space.labels}")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise ValueError(f"cannot add degrees {self.degree} and {other.degree}")
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + c
        return Multivector(self.space, self.degree, terms)

    def __neg__(self) -> "Multivector":
        return Multivector(self.space, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def __mul__(self, scalar) -> "Multivector":
        s = as_fraction(scalar)
        return Multivector(self.space, self.degree, {k: s * c for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "Multivector") -> "Multivector":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        if self.space != other.space:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, self.degree, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return f"Multivector(0, degree={self.degree})"
        parts = []
        for key in sorted(self.terms):
            name = "^".join(self.space.labels[i] for i in key) or "1"
            parts.append(f"{self.terms[key]}*{name}")
        return " + ".join(parts)


class StructureConstants:
    """Bracket [e_i, e_j] = sum_k f[i, j, k] e_k on a based space."""

    def __init__(self, space: BasedSpace, f):
        arr = fraction_array(f)
        n = space.dim
        if arr.shape != (n, n, n):
            raise ValueError(f"structure constants must have shape {(n, n, n)}, got {arr.shape}")
        self.space = space
        self.f = arr
        self._table = {}
        for i, j, k in zip(*np.nonzero(arr != 0)):
            self._table.setdefault((int(i), int(j)), []).append((int(k), arr[i, j, k]))

    @property
    def dim(self) -> int:
        return self.space.dim

    def antisymmetry_violation(self) -> tuple[int, int, int] | None:
        n = self.dim
        for i, j, k in itertools.product(range(n), repeat=3):
            if self.f[i, j, k] != -self.f[j, i, k]:
                return (i, j, k)
        return None

    def require_antisymmetric(self) -> None:
        bad = self.antisymmetry_violation()
        if bad is not None:
            raise AntisymmetryError(bad)

    def basis_bracket(self, i: int, j: int) -> list[tuple[int, Fraction]]:
        return self._table.get((i, j), [])

    def bracket_vectors(self, u, v) -> np.ndarray:
        """Bracket of two coordinate vectors."""
        return np.einsum("i,j,ijk->k", np.asarray(u, dtype=object), np.asarray(v, dtype=object), self.f)

    def ad_matrix(self, i: int) -> np.ndarray:
        """Matrix of ad_{e_i}: column j holds [e_i, e_j]."""
        return self.f[i].T.copy()

    def __eq__(self, other) -> bool:
        return (isinstance(other, StructureConstants) and self.space == other.space
                and bool(np.all(self.f == other.f)))

    def __repr__(self) -> str:
        return f"StructureConstants(dim={self.dim}, nonzero={sum(len(v) for v in self._table.values())})"


def wedge(u: Multivector, v: Multivector) -> Multivector:
    u._check(v)
    terms: dict[tuple[int, ...], Fraction] = {}
    for ku, cu in u.terms.items():
        for kv, cv in v.terms.items():
            sign, key = _sort_with_sign(ku + kv)
            if sign:
                terms[key] = terms.get(key, Fraction(0)) + sign * cu * cv
    return Multivector(u.space, u.degree + v.degree, terms)


def _wedge_keys(space: BasedSpace, a: tuple[int, ...], b: tuple[int, ...], coeff: Fraction,
                acc: dict[tuple[int, ...], Fraction]) -> None:
    sign, key = _sort_with_sign(a + b)
    if sign:
        acc[key] = acc.get(key, Fraction(0)) + sign * coeff


def schouten(u: Multivector, v: Multivector, f: StructureConstants) -> Multivector:
    """Algebraic Schouten bracket on the exterior algebra of (space, f).

    On decomposables,
    [x_0^...^x_{p-1}, y_0^...^y_{q-1}]
        = (-1)^(p-1) sum_{a,b} (-1)^(a+b) [x_a, y_b] ^ x_0..^x_a..x_{p-1} ^ y_0..^y_b..y_{q-1}.

    The (-1)^(p-1) prefactor makes <r, r> = -1/2 [r, r] for antisymmetric r;
    degree-1 brackets are the Lie bracket.  Consequences:
    [u, v^w] = [u, v]^w + (-1)^((|u|-1)|v|) v^[u, w]  and  [v, u] = (-1)^(|u||v|) [u, v].
    Brackets involving a scalar vanish.
    """
    u._check(v)
    if f.space != u.space:
        raise SpaceMismatchError("structure constants live on a different space")
    p, q = u.degree, v.degree
    out_degree = max(p + q - 1, 0)
    if p == 0 or q == 0:
        return Multivector.zero(u.space, out_degree)
    acc: dict[tuple[int, ...], Fraction] = {}
    for ku, cu in u.terms.items():
        for kv, cv in v.terms.items():
            c = cu * cv
            for a, i in enumerate(ku):
                rest_u = ku[:a] + ku[a + 1:]
                for b, j in enumerate(kv):
                    br = f.basis_bracket(i, j)
                    if not br:
                        continue
                    rest_v = kv[:b] + kv[b + 1:]
                    s = c if (a + b + p - 1) % 2 == 0 else -c
                    for k, fk in br:
                        _wedge_keys(u.space, (k,) + rest_u, rest_v, s * fk, acc)
    return Multivector(u.space, out_degree, acc)


def ad_derivation(x: Multivector, u: Multivector, f: StructureConstants) -> Multivector:
    """Action of ad_x (x of degree 1) on the exterior algebra, extended by Leibniz."""
    if x.degree != 1:
        raise ValueError("ad_derivation needs a degree-1 element")
    x._check(u)
    acc: dict[tuple[int, ...], Fraction] = {}
    for (i,), cx in x.terms.items():
        for key, cu in u.terms.items():
            for a, j in enumerate(key):
                for k, fk in f.basis_bracket(i, j):
                    new = key[:a] + (k,) + key[a + 1:]
                    sign, skey = _sort_with_sign(new)
                    if sign:
                        acc[skey] = acc.get(skey, Fraction(0)) + sign * cx * cu * fk
    return Multivector(u.space, u.degree, acc)


def cobracket_image(F, i: int, space: BasedSpace) -> Multivector:
    """F(e_i) = sum_{j<k} F[i, j, k] e_j ^ e_k."""
    n = space.dim
    return Multivector(space, 2, {(j, k): F[i, j, k] for j in range(n) for k in range(j + 1, n) if F[i, j, k]})


def ce_differential(F, u: Multivector) -> Multivector:
    """Odd derivation d_F of the exterior algebra with d_F(e_i) = F(e_i).

    ``F[i, j, k]`` holds F_i^{jk}, antisymmetric in (j, k).
    """
    F = np.asarray(F, dtype=object)
    space = u.space
    images = [cobracket_image(F, i, space) for i in range(space.dim)]
    out = Multivector.zero(space, u.degree + 1)
    for key, c in u.terms.items():
        for a, i in enumerate(key):
            if images[i].is_zero():
                continue
            left = Multivector.basis(space, *key[:a])
            right = Multivector.basis(space, *key[a + 1:])
            term = wedge(wedge(left, images[i]), right)
            out = out + term * (c if a % 2 == 0 else -c)
    return out


def jacobi_defect(f: StructureConstants) -> np.ndarray:
    """Jacobiator J[i, j, k, l] = sum_cyc(ijk) sum_m f_ij^m f_mk^l.

    Raises :class:`AntisymmetryError` if f is not antisymmetric.
    """
    f.require_antisymmetric()
    ff = np.einsum("ijm,mkl->ijkl", f.f, f.f)
    return ff + ff.transpose(1, 2, 0, 3) + ff.transpose(2, 0, 1, 3)


def first_jacobi_violation(f: StructureConstants) -> tuple[int, int, int] | None:
    J = jacobi_defect(f)
    for i, j, k in itertools.product(range(f.dim), repeat=3):
        if any(J[i, j, k]):
            return (i, j, k)
    return None


def drinfeld_bracket(r, f: StructureConstants) -> np.ndarray:
    """[r12, r13] + [r12, r23] + [r13, r23] for r = r^{ab} e_a (x) e_b."""
    r = fraction_array(r)
    n = f.dim
    if r.shape != (n, n):
        raise ValueError(f"r must have shape {(n, n)}, got {r.shape}")
    t12_13 = np.einsum("ab,cd,acz->zbd", r, r, f.f, optimize=True)
    t12_23 = np.einsum("ab,cd,bcz->azd", r, r, f.f, optimize=True)
    t13_23 = np.einsum("ab,cd,bdz->acz", r, r, f.f, optimize=True)
    return t12_13 + t12_23 + t13_23


def symmetric_part(r) -> np.ndarray:
    r = np.asarray(r, dtype=object)
    return (r + r.T) * Fraction(1, 2)


def antisymmetric_part(r) -> np.ndarray:
    r = np.asarray(r, dtype=object)
    return (r - r.T) * Fraction(1, 2)


def bivector_from_matrix(space: BasedSpace, r) -> Multivector:
    """The element of the second exterior power with tensor components r (antisymmetric)."""
    return Multivector.from_tensor(space, fraction_array(r))


def is_totally_antisymmetric(t) -> bool:
    t = np.asarray(t, dtype=object)
    for a in range(t.ndim - 1):
        axes = list(range(t.ndim))
        axes[a], axes[a + 1] = axes[a + 1], axes[a]
        if not np.all(t == -t.transpose(axes)):
            return False
    return True


def antisymmetrize(t, space: BasedSpace) -> Multivector:
    """Multivector whose tensor is the alternating projection (1/k!) sum sgn t^sigma."""
    t = np.asarray(t, dtype=object)
    k = t.ndim
    acc = zeros(*t.shape)
    count = 0
    for perm in itertools.permutations(range(k)):
        sign, _ = _sort_with_sign(perm)
        acc = acc + sign * t.transpose(perm)
        count += 1
    return Multivector.from_tensor(space, acc * Fraction(1, count))


def ad_invariance_defect(tensor, f: StructureConstants) -> Fraction:
    """Max over x = e_i of |ad_x applied to a tensor of any rank| (0 iff ad-invariant)."""
    t = np.asarray(tensor, dtype=object)
    worst = Fraction(0)
    for i in range(f.dim):
        ad = f.ad_matrix(i)
        total = zeros(*t.shape)
        for axis in range(t.ndim):
            total = total + np.moveaxis(np.tensordot(ad, t, axes=([1], [axis])), 0, axis)
        worst = max(worst, max_abs(total))
    return worst
