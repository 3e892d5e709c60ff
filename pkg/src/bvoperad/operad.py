"""Non-symmetric operads with multiplication and the cochain-level algebra
they carry: cosimplicial structure, differential, cup product, composition
product and the degree -1 bracket.

A concrete operad supplies per-degree dimensions, the bilinear insertion
``basis_compose`` on basis elements, and the three distinguished cochains
(identity, multiplication, unit).  Everything else here is derived from
those and is instance-agnostic.

Cochains of negative degree are allowed and denote the zero element of a
rank-0 space; they arise as empty sums (composition product of two
degree-0 cochains, homotopy operators applied in low degree) and behave as
absorbing zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence

from .fields import FieldSpec, Scalar
from .linalg import Matrix, Vec, vec_axpy, vec_scale


class DegreeError(ValueError):
    """Operation leaves the configured degree window."""


@dataclass(frozen=True)
class Cochain:
    """Degree plus sparse coefficients over the canonical basis of O(n)."""

    degree: int
    coeffs: Mapping[int, Scalar]

    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self) -> List[int]:
        return sorted(self.coeffs)


def _strip(field: FieldSpec, v: Dict[int, Scalar]) -> Dict[int, Scalar]:
    return {k: x for k, x in v.items() if x != field.zero}


class Operad:
    """Base class: a (non-Sigma) operad with multiplication, degrees 0..n_max."""

    def __init__(self, field: FieldSpec, n_max: int):
        if n_max < 2:
            raise ValueError("degree cutoff must be at least 2")
        self.field = field
        self.n_max = n_max
        self._coface_cache: Dict[tuple, List[Vec]] = {}
        self._codeg_cache: Dict[tuple, List[Vec]] = {}
        # subclasses assign these in their constructor
        self.identity_elt: Cochain
        self.mult_elt: Cochain
        self.unit_elt: Cochain

    # -- subclass API -------------------------------------------------------

    def basis_dim(self, n: int) -> int:
        raise NotImplementedError

    def basis_compose(self, m: int, n: int, i: int, a: int, b: int) -> Vec:
        """Sparse expansion of e_a o_i e_b, e_a in O(m), e_b in O(n)."""
        raise NotImplementedError

    # -- degree bookkeeping --------------------------------------------------

    def dim(self, n: int) -> int:
        if n < 0:
            return 0
        if n > self.n_max:
            raise DegreeError(f"degree {n} beyond cutoff {self.n_max}")
        return self.basis_dim(n)

    def check_degree(self, n: int) -> None:
        if n > self.n_max:
            raise DegreeError(f"degree {n} beyond cutoff {self.n_max}")

    def zero(self, n: int) -> Cochain:
        return Cochain(n, {})

    def basis_cochain(self, n: int, k: int) -> Cochain:
        if not 0 <= k < self.dim(n):
            raise ValueError(f"basis index {k} out of range in degree {n}")
        return Cochain(n, {k: self.field.one})

    def cochain(self, n: int, coeffs: Mapping[int, Scalar]) -> Cochain:
        d = self.dim(n)
        clean: Dict[int, Scalar] = {}
        for k, x in coeffs.items():
            if not 0 <= k < d:
                raise ValueError(f"basis index {k} out of range in degree {n}")
            x = self.field.coerce(x)
            if x != self.field.zero:
                clean[k] = x
        return Cochain(n, clean)

    def add(self, f: Cochain, g: Cochain) -> Cochain:
        if f.degree != g.degree:
            raise ValueError("degree mismatch in sum")
        acc = dict(f.coeffs)
        vec_axpy(self.field, acc, self.field.one, dict(g.coeffs))
        return Cochain(f.degree, acc)

    def scale(self, c: Scalar, f: Cochain) -> Cochain:
        return Cochain(f.degree, _strip(self.field, vec_scale(self.field, c, dict(f.coeffs))))

    def sub(self, f: Cochain, g: Cochain) -> Cochain:
        return self.add(f, self.scale(self.field.neg(self.field.one), g))

    def sum(self, terms: Sequence[Cochain], degree: int) -> Cochain:
        acc: Dict[int, Scalar] = {}
        for t in terms:
            if t.degree != degree:
                raise ValueError("degree mismatch in sum")
            vec_axpy(self.field, acc, self.field.one, dict(t.coeffs))
        return Cochain(degree, acc)

    # -- composition ---------------------------------------------------------

    def compose(self, f: Cochain, g: Cochain, i: int) -> Cochain:
        """f o_i g, bilinear extension of basis_compose."""
        m, n = f.degree, g.degree
        if m < 0 or n < 0:
            return self.zero(m + n - 1)
        if m < 1 or not 1 <= i <= m:
            raise ValueError(f"slot {i} out of range for degree {m}")
        self.check_degree(m + n - 1)
        field = self.field
        acc: Dict[int, Scalar] = {}
        for a, ca in f.coeffs.items():
            for b, cb in g.coeffs.items():
                c = field.mul(ca, cb)
                for k, ck in self.basis_compose(m, n, i, a, b).items():
                    w = field.add(acc.get(k, field.zero), field.mul(c, ck))
                    if w == field.zero:
                        acc.pop(k, None)
                    else:
                        acc[k] = w
        return Cochain(m + n - 1, acc)

    def gamma(self, f: Cochain, gs: Sequence[Cochain]) -> Cochain:
        """Full substitution, realized as iterated o_i from the last slot down."""
        if f.degree < 1 or len(gs) != f.degree:
            raise ValueError("arity mismatch in substitution")
        out = f
        for i in range(f.degree, 0, -1):
            out = self.compose(out, gs[i - 1], i)
        return out

    # -- cosimplicial structure ----------------------------------------------

    def coface(self, i: int, f: Cochain) -> Cochain:
        n = f.degree
        if n < 0:
            raise ValueError("coface of a negative-degree cochain")
        if not 0 <= i <= n + 1:
            raise ValueError(f"coface index {i} out of range in degree {n}")
        if i == 0:
            return self.compose(self.mult_elt, f, 2)
        if i == n + 1:
            return self.compose(self.mult_elt, f, 1)
        return self.compose(f, self.mult_elt, i)

    def codegeneracy(self, j: int, f: Cochain) -> Cochain:
        n = f.degree
        if n < 1 or not 0 <= j <= n - 1:
            raise ValueError(f"codegeneracy index {j} out of range in degree {n}")
        return self.compose(f, self.unit_elt, j + 1)

    def differential(self, f: Cochain) -> Cochain:
        n = f.degree
        self.check_degree(n + 1)
        field = self.field
        acc: Dict[int, Scalar] = {}
        sign = field.one
        for i in range(n + 2):
            vec_axpy(field, acc, sign, dict(self.coface(i, f).coeffs))
            sign = field.neg(sign)
        return Cochain(n + 1, acc)

    # -- cup, composition product, bracket -------------------------------------

    def cup(self, f: Cochain, g: Cochain) -> Cochain:
        m, n = f.degree, g.degree
        if m < 0 or n < 0:
            return self.zero(m + n)
        self.check_degree(m + n)
        return self.compose(self.compose(self.mult_elt, f, 1), g, m + 1)

    def cup_via_second_slot(self, f: Cochain, g: Cochain) -> Cochain:
        """Alternative expansion (mu o_2 g) o_1 f; must agree with cup."""
        m, n = f.degree, g.degree
        if m < 0 or n < 0:
            return self.zero(m + n)
        self.check_degree(m + n)
        return self.compose(self.compose(self.mult_elt, g, 2), f, 1)

    def comp_bar(self, f: Cochain, g: Cochain) -> Cochain:
        m, n = f.degree, g.degree
        if m <= 0 or n < 0:
            return self.zero(m + n - 1)
        field = self.field
        self.check_degree(m + n - 1)
        acc: Dict[int, Scalar] = {}
        for i in range(1, m + 1):
            s = (m - 1) * (n - 1) + (n - 1) * (i - 1)
            c = field.one if s % 2 == 0 else field.neg(field.one)
            vec_axpy(field, acc, c, dict(self.compose(f, g, i).coeffs))
        return Cochain(m + n - 1, acc)

    def bracket(self, f: Cochain, g: Cochain) -> Cochain:
        m, n = f.degree, g.degree
        fg = self.comp_bar(f, g)
        gf = self.comp_bar(g, f)
        sign = self.field.one
        if ((m - 1) * (n - 1)) % 2 == 1:
            sign = self.field.neg(sign)
        return self.sub(fg, self.scale(sign, gf))

    # -- cached matrices -------------------------------------------------------

    def coface_columns(self, n: int, i: int) -> List[Vec]:
        """Images of the degree-n basis under the i-th coface, as sparse columns."""
        key = (n, i)
        cached = self._coface_cache.get(key)
        if cached is None:
            cached = [
                dict(self.coface(i, self.basis_cochain(n, k)).coeffs)
                for k in range(self.dim(n))
            ]
            self._coface_cache[key] = cached
        return cached

    def codegeneracy_columns(self, n: int, j: int) -> List[Vec]:
        key = (n, j)
        cached = self._codeg_cache.get(key)
        if cached is None:
            cached = [
                dict(self.codegeneracy(j, self.basis_cochain(n, k)).coeffs)
                for k in range(self.dim(n))
            ]
            self._codeg_cache[key] = cached
        return cached

    def coface_matrix(self, n: int, i: int) -> Matrix:
        return Matrix.from_columns(self.field, self.dim(n + 1), self.coface_columns(n, i))

    def codegeneracy_matrix(self, n: int, j: int) -> Matrix:
        return Matrix.from_columns(self.field, self.dim(n - 1), self.codegeneracy_columns(n, j))

    def differential_matrix(self, n: int) -> Matrix:
        field = self.field
        cols: List[Vec] = [dict() for _ in range(self.dim(n))]
        sign = field.one
        for i in range(n + 2):
            for k, col in enumerate(self.coface_columns(n, i)):
                vec_axpy(field, cols[k], sign, col)
            sign = field.neg(sign)
        return Matrix.from_columns(field, self.dim(n + 1), cols)
