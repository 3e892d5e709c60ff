"""Cohomology of the normalized complex and everything living on it: the
induced Gerstenhaber/BV structure on classes, the cyclic total complex, the
Connes exact-couple maps and the degree -2 Lie bracket.

Grading dictionary.  The mixed complex is cohomological: d raises degree by
one, Connes' B lowers it.  Total slices are T^m = C^m + C^{m+2} + ... up to
the configured cutoff, with

    D(c_m, c_{m+2}, ...) = (d c_m + B c_{m+2},  d c_{m+2} + B c_{m+4}, ...),

the sequence runs ... -> H^{m-2} -I-> HC^{m-2} -S-> HC^m -dl-> H^{m-1} -> ...
and the bracket [a,b] = (-1)^{|a|} I(dl(a) cup dl(b)) has degree -2.  The
ascending sums are truncated at the cutoff, so a differential escaping the
top summand is dropped; classes are therefore trusted only in the window
m <= cutoff - 3, quotients divide by im(D) intersected with ker(D), and
stability of reported dimensions under a cutoff increase is the operational
check that the window is honest.  Reports carry this dictionary in their
metadata so the numbers are unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .fields import FieldSpec, Scalar
from .linalg import (
    Matrix,
    Subspace,
    Vec,
    echelonize,
    image_basis,
    kernel_basis,
    vec_axpy,
)
from .operad import Cochain
from .cyclic import CyclicStructure, NormalizedSlice, SliceCache, _sgn
from .reports import CheckResult, Report, render_vec


@dataclass
class Quotient:
    """ker / (im intersected with ker), with echelon-first representatives."""

    field: FieldSpec
    ambient: int
    ker: Subspace
    relations: Subspace
    reps: Subspace

    @classmethod
    def build(cls, field: FieldSpec, ambient: int, ker: Subspace,
              im_gens: Sequence[Vec], constraint: Optional[Matrix]) -> "Quotient":
        im = echelonize(field, ambient, im_gens)
        if constraint is None:
            relations = im
        else:
            cols = [constraint.matvec(v) for v in im.basis]
            coeff_kernel = kernel_basis(
                Matrix.from_columns(field, constraint.rows, cols))
            vecs = []
            for kv in coeff_kernel.basis:
                out: Vec = {}
                for idx, c in kv.items():
                    vec_axpy(field, out, c, im.basis[idx])
                vecs.append(out)
            relations = echelonize(field, ambient, vecs)
        rep_gens = []
        for v in ker.basis:
            _, rem = relations.reduce(v)
            if rem:
                rep_gens.append(rem)
        reps = echelonize(field, ambient, rep_gens)
        return cls(field, ambient, ker, relations, reps)

    @property
    def dim(self) -> int:
        return self.reps.dim

    def coords(self, v: Vec) -> List[Scalar]:
        """Class coordinates of a vector already known to lie in ker."""
        _, rem = self.relations.reduce(v)
        found = self.reps.in_span(rem)
        if found is None:
            raise ValueError("vector is not in the kernel this quotient was built on")
        return found

    def rep_vec(self, k: int) -> Vec:
        return dict(self.reps.basis[k])


@dataclass
class MixedComplexData:
    """Dimensions and the (d, B) matrices of a cohomological mixed complex,
    degrees 0..N; d[n] maps degree n to n+1 (n < N), b[n] degree n to n-1."""

    field: FieldSpec
    dims: List[int]
    d_mats: List[Matrix]
    b_mats: List[Matrix]

    def __post_init__(self) -> None:
        N = len(self.dims) - 1
        if len(self.d_mats) != N or len(self.b_mats) != N + 1:
            raise ValueError("matrix lists do not match the degree range")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    @classmethod
    def zero_complex(cls, field: FieldSpec, top: int) -> "MixedComplexData":
        dims = [0] * (top + 1)
        d = [Matrix.zeros(field, 0, 0) for _ in range(top)]
        b = [Matrix.zeros(field, 0, 0) for _ in range(top + 1)]
        return cls(field, dims, d, b)

    @classmethod
    def from_cyclic(cls, cyc: CyclicStructure, max_degree: int,
                    slices: Optional[SliceCache] = None) -> "MixedComplexData":
        """Restrict d and B to the normalized slices, in slice coordinates."""
        op = cyc.op
        field = op.field
        slices = slices or SliceCache(op)
        dims = [slices.get(n).dim for n in range(max_degree + 1)]
        d_mats: List[Matrix] = []
        for n in range(max_degree):
            tgt = slices.get(n + 1)
            cols = [
                tgt.coords(op.differential(f))
                for f in slices.get(n).basis_cochains()
            ]
            d_mats.append(Matrix.from_dense(field, _transpose_dense(cols, tgt.dim, field)))
        b_mats: List[Matrix] = [Matrix.zeros(field, 0, dims[0])]
        for n in range(1, max_degree + 1):
            tgt = slices.get(n - 1)
            cols = [
                tgt.coords(cyc.connes_B(f))
                for f in slices.get(n).basis_cochains()
            ]
            b_mats.append(Matrix.from_dense(field, _transpose_dense(cols, tgt.dim, field)))
        return cls(field, dims, d_mats, b_mats)

    def h_quotient(self, n: int) -> Quotient:
        """H^n = ker d_n / im d_{n-1}; valid for n <= top - 1."""
        if not 0 <= n <= self.top - 1:
            raise ValueError(f"cohomology degree {n} outside window 0..{self.top - 1}")
        ker = kernel_basis(self.d_mats[n])
        gens = list(self.d_mats[n - 1].columns) if n >= 1 else []
        return Quotient.build(self.field, self.dims[n], ker, gens, None)


def _transpose_dense(cols: List[List[Scalar]], rows: int, field: FieldSpec) -> List[List[Scalar]]:
    out = [[field.zero] * len(cols) for _ in range(rows)]
    for j, col in enumerate(cols):
        for i, x in enumerate(col):
            out[i][j] = x
    return out


@dataclass(frozen=True)
class CohomologyClass:
    degree: int
    coords: Tuple[Scalar, ...]
    representative: Cochain

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)


class CohomologyEngine:
    """Classes of the normalized complex with the operations they inherit."""

    def __init__(self, cyc: CyclicStructure, max_degree: int):
        op = cyc.op
        if max_degree > op.n_max:
            raise ValueError("engine degree window exceeds the operad cutoff")
        self.cyc = cyc
        self.op = op
        self.field = op.field
        self.max_degree = max_degree
        self.slices = SliceCache(op)
        self.data = MixedComplexData.from_cyclic(cyc, max_degree, self.slices)
        self._quotients: Dict[int, Quotient] = {}

    @property
    def class_window(self) -> int:
        """Largest degree whose cohomology is computable."""
        return self.max_degree - 1

    def slice(self, n: int) -> NormalizedSlice:
        return self.slices.get(n)

    def quotient(self, n: int) -> Quotient:
        q = self._quotients.get(n)
        if q is None:
            q = self.data.h_quotient(n)
            self._quotients[n] = q
        return q

    def h_dim(self, n: int) -> int:
        return self.quotient(n).dim

    def h_dims(self) -> List[int]:
        return [self.h_dim(n) for n in range(self.class_window + 1)]

    def _class_from_slice_coords(self, n: int, v: Vec) -> CohomologyClass:
        q = self.quotient(n)
        coords = q.coords(v)
        canonical: Vec = {}
        for c, b in zip(coords, q.reps.basis):
            vec_axpy(self.field, canonical, c, b)
        rep = self.slice(n).include(
            [canonical.get(k, self.field.zero) for k in range(self.slice(n).dim)])
        return CohomologyClass(n, tuple(coords), rep)

    def h_basis(self, n: int) -> List[CohomologyClass]:
        q = self.quotient(n)
        return [self._class_from_slice_coords(n, q.rep_vec(k)) for k in range(q.dim)]

    def reduce_to_class(self, c: Cochain) -> Optional[CohomologyClass]:
        """None when c is not a cocycle; the zero class when c is a coboundary."""
        n = c.degree
        if n < 0:
            raise ValueError("cannot reduce a negative-degree cochain")
        if n > self.class_window:
            raise ValueError(f"degree {n} outside the class window {self.class_window}")
        sl = self.slice(n)
        v_list = sl.coords(c)
        v: Vec = {k: x for k, x in enumerate(v_list) if x != self.field.zero}
        dv = self.data.d_mats[n].matvec(v)
        if dv:
            return None
        return self._class_from_slice_coords(n, v)

    # -- induced operations ---------------------------------------------------

    def induced_cup(self, a: CohomologyClass, b: CohomologyClass) -> CohomologyClass:
        out = self.reduce_to_class(self.op.cup(a.representative, b.representative))
        if out is None:
            raise ValueError("cup of cocycles failed to be a cocycle")
        return out

    def induced_bracket(self, a: CohomologyClass, b: CohomologyClass) -> CohomologyClass:
        chain = self.op.bracket(a.representative, b.representative)
        if chain.degree < 0:
            return self.zero_class(0) if False else CohomologyClass(chain.degree, (), chain)
        out = self.reduce_to_class(chain)
        if out is None:
            raise ValueError("bracket of cocycles failed to be a cocycle")
        return out

    def induced_B(self, a: CohomologyClass) -> CohomologyClass:
        chain = self.cyc.connes_B(a.representative)
        if chain.degree < 0:
            return CohomologyClass(chain.degree, (), chain)
        out = self.reduce_to_class(chain)
        if out is None:
            raise ValueError("B of a cocycle failed to be a cocycle")
        return out

    def zero_class(self, n: int) -> CohomologyClass:
        return CohomologyClass(n, tuple([self.field.zero] * self.h_dim(n)),
                               Cochain(n, {}))

    def induced_b_matrix(self, m: int) -> Matrix:
        """Matrix of the induced B: H^m -> H^{m-1} in the class bases."""
        cols: List[Vec] = []
        tgt_dim = self.h_dim(m - 1) if m >= 1 else 0
        for cls_a in self.h_basis(m):
            img = self.induced_B(cls_a)
            if img.degree < 0:
                cols.append({})
            else:
                cols.append({k: x for k, x in enumerate(img.coords)
                             if x != self.field.zero})
        return Matrix.from_columns(self.field, tgt_dim, cols)

    # -- class-level axiom sweeps -----------------------------------------------

    def check_bv(self, maxdeg: int) -> Report:
        """BV relation, graded commutativity, Lie axioms and the Poisson rule,
        on every pair/triple of basis classes within the stated total degree."""
        field = self.field
        report = Report("bv-structure", metadata={
            "maxdeg": maxdeg, "h_dims": self.h_dims()})
        if maxdeg > self.class_window:
            raise ValueError("sweep degree exceeds the class window")

        basis: Dict[int, List[CohomologyClass]] = {
            n: self.h_basis(n) for n in range(maxdeg + 1)
        }

        def class_eq(x: CohomologyClass, y: CohomologyClass) -> bool:
            return x.degree == y.degree and x.coords == y.coords

        def scale_class(c: Scalar, x: CohomologyClass) -> CohomologyClass:
            return CohomologyClass(
                x.degree, tuple(field.mul(c, t) for t in x.coords),
                self.op.scale(c, x.representative))

        def add_class(x: CohomologyClass, y: CohomologyClass) -> CohomologyClass:
            return CohomologyClass(
                x.degree, tuple(field.add(s, t) for s, t in zip(x.coords, y.coords)),
                self.op.add(x.representative, y.representative))

        pairs = [
            (a, b)
            for p in range(maxdeg + 1)
            for q in range(maxdeg + 1 - p)
            for a in basis[p]
            for b in basis[q]
        ]

        counter = None
        total = 0
        for a, b in pairs:
            p, q = a.degree, b.degree
            lhs = self.induced_cup(a, b)
            rhs = scale_class(_sgn(field, p * q), self.induced_cup(b, a))
            total += 1
            if not class_eq(lhs, rhs):
                counter = {"p": p, "q": q,
                           "a": [field.render(x) for x in a.coords],
                           "b": [field.render(x) for x in b.coords]}
                break
        report.add(CheckResult(
            "class-cup-commutative", "[a][b] == (-1)^{pq} [b][a] in cohomology",
            f"class pairs, p+q <= {maxdeg}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for a, b in pairs:
            p, q = a.degree, b.degree
            if p + q < 1:
                continue
            lhs = self.induced_bracket(a, b)
            ba = self.induced_B(self.induced_cup(a, b))
            term2 = self.induced_cup(self.induced_B(a), b) if p >= 1 else self.zero_class(q - 1)
            term3 = self.induced_cup(a, self.induced_B(b)) if q >= 1 else self.zero_class(p - 1)
            inner = add_class(ba, scale_class(field.neg(field.one), term2))
            inner = add_class(inner, scale_class(field.neg(_sgn(field, p)), term3))
            rhs = scale_class(_sgn(field, p), inner)
            total += 1
            if not class_eq(lhs, rhs):
                counter = {"p": p, "q": q,
                           "a": [field.render(x) for x in a.coords],
                           "b": [field.render(x) for x in b.coords],
                           "lhs": [field.render(x) for x in lhs.coords],
                           "rhs": [field.render(x) for x in rhs.coords]}
                break
        report.add(CheckResult(
            "class-bv-relation",
            "{a,b} == (-1)^p (B(a cup b) - B(a) cup b - (-1)^p a cup B(b))",
            f"class pairs, p+q <= {maxdeg}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for a, b in pairs:
            p, q = a.degree, b.degree
            if p + q < 1:
                continue
            lhs = self.induced_bracket(a, b)
            rhs = scale_class(field.neg(_sgn(field, (p - 1) * (q - 1))),
                              self.induced_bracket(b, a))
            total += 1
            if not class_eq(lhs, rhs):
                counter = {"p": p, "q": q}
                break
        report.add(CheckResult(
            "class-bracket-antisymmetry",
            "{a,b} == -(-1)^{(p-1)(q-1)} {b,a}",
            f"class pairs, p+q <= {maxdeg}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for p in range(maxdeg + 1):
            for q in range(maxdeg + 1 - p):
                for r in range(maxdeg + 1 - p - q):
                    if p + q + r < 2:
                        continue
                    for a in basis[p]:
                        for b in basis[q]:
                            for c in basis[r]:
                                lhs = self.induced_bracket(a, self.induced_bracket(b, c))
                                rhs = add_class(
                                    self.induced_bracket(self.induced_bracket(a, b), c),
                                    scale_class(_sgn(field, (p - 1) * (q - 1)),
                                                self.induced_bracket(b, self.induced_bracket(a, c))))
                                total += 1
                                if not class_eq(lhs, rhs):
                                    counter = {"p": p, "q": q, "r": r}
                                    break
                            if counter:
                                break
                        if counter:
                            break
                    if counter:
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "class-bracket-jacobi",
            "{a,{b,c}} == {{a,b},c} + (-1)^{(p-1)(q-1)} {b,{a,c}}",
            f"class triples, p+q+r <= {maxdeg}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for p in range(maxdeg + 1):
            for q in range(maxdeg + 1 - p):
                for r in range(maxdeg + 1 - p - q):
                    for a in basis[p]:
                        for b in basis[q]:
                            for c in basis[r]:
                                lhs = self.induced_bracket(a, self.induced_cup(b, c))
                                rhs = add_class(
                                    self.induced_cup(self.induced_bracket(a, b), c),
                                    scale_class(_sgn(field, q * (p - 1)),
                                                self.induced_cup(b, self.induced_bracket(a, c))))
                                total += 1
                                if not class_eq(lhs, rhs):
                                    counter = {"p": p, "q": q, "r": r}
                                    break
                            if counter:
                                break
                        if counter:
                            break
                    if counter:
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "class-poisson",
            "{a, b cup c} == {a,b} cup c + (-1)^{q(p-1)} b cup {a,c}",
            f"class triples, p+q+r <= {maxdeg}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for n in range(maxdeg + 1):
            for a in basis[n]:
                bba = self.induced_B(a)
                if bba.degree >= 1:
                    bba = self.induced_B(bba)
                elif bba.degree >= 0:
                    bba = self.induced_B(bba) if bba.degree >= 1 else self.zero_class(0) \
                        if False else CohomologyClass(bba.degree - 1, (), Cochain(bba.degree - 1, {}))
                total += 1
                if bba.degree >= 0 and not bba.is_zero():
                    counter = {"n": n, "a": [field.render(x) for x in a.coords]}
                    break
            if counter:
                break
        report.add(CheckResult(
            "class-b-squared", "B o B == 0 on classes",
            f"degrees <= {maxdeg}, {total} instances",
            counter is None, counter))

        # cup-unit and well-definedness spot checks
        unit_class = self.reduce_to_class(self.op.unit_elt)
        ok = unit_class is not None
        counter = None
        if ok:
            for n in range(maxdeg + 1):
                for a in basis[n]:
                    if not class_eq(self.induced_cup(unit_class, a), a) or \
                       not class_eq(self.induced_cup(a, unit_class), a):
                        counter = {"n": n}
                        ok = False
                        break
                if not ok:
                    break
        report.add(CheckResult(
            "class-cup-unit", "the class of the degree-0 unit is a cup unit",
            f"degrees <= {maxdeg}", ok, counter))

        counter = None
        total = 0
        for a, b in pairs:
            p, q = a.degree, b.degree
            if p < 1 or p > self.class_window - 1:
                continue
            for y in self.slice(p - 1).basis_cochains()[:2]:
                perturbed = self.op.add(a.representative, self.op.differential(y))
                cls2 = self.reduce_to_class(self.op.cup(perturbed, b.representative))
                total += 1
                if cls2 is None or not class_eq(cls2, self.induced_cup(a, b)):
                    counter = {"p": p, "q": q}
                    break
            if counter:
                break
        report.add(CheckResult(
            "class-cup-well-defined",
            "cup(x + dy, z) and cup(x, z) land in the same class",
            f"class pairs with coboundary perturbations, {total} instances",
            counter is None, counter))

        return report


# == the cyclic total complex =======================================================

@dataclass(frozen=True)
class CyclicClass:
    degree: int
    coords: Tuple[Scalar, ...]
    components: Tuple[Vec, ...]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)


class TotalComplex:
    """Truncated ascending total complex of a mixed complex; HC classes are
    kernel mod (image intersected with kernel), trusted in the window
    m <= cutoff - 3."""

    def __init__(self, data: MixedComplexData, cutoff: int):
        if cutoff > data.top:
            raise ValueError("cutoff exceeds the mixed-complex range")
        self.data = data
        self.field = data.field
        self.cutoff = cutoff
        self._d_cache: Dict[int, Matrix] = {}
        self._q_cache: Dict[int, Quotient] = {}
        self._h_cache: Dict[int, Quotient] = {}

    @property
    def window(self) -> int:
        return self.cutoff - 3

    def in_window(self, m: int) -> bool:
        return 0 <= m <= self.window

    def summand_degrees(self, m: int) -> List[int]:
        return list(range(m, self.cutoff + 1, 2))

    def offsets(self, m: int) -> List[int]:
        offs = []
        acc = 0
        for deg in self.summand_degrees(m):
            offs.append(acc)
            acc += self.data.dims[deg]
        return offs

    def total_dim(self, m: int) -> int:
        return sum(self.data.dims[deg] for deg in self.summand_degrees(m))

    def embed(self, m: int, block: int, v: Vec) -> Vec:
        off = self.offsets(m)[block]
        return {off + k: x for k, x in v.items()}

    def blocks(self, m: int, v: Vec) -> List[Vec]:
        degs = self.summand_degrees(m)
        offs = self.offsets(m)
        out: List[Vec] = [dict() for _ in degs]
        for k, x in v.items():
            for b in range(len(degs) - 1, -1, -1):
                if k >= offs[b]:
                    out[b][k - offs[b]] = x
                    break
        return out

    def d_matrix(self, m: int) -> Matrix:
        """D: T^m -> T^{m+1}; the d leaving the top summand is dropped."""
        cached = self._d_cache.get(m)
        if cached is not None:
            return cached
        src_degs = self.summand_degrees(m)
        tgt_degs = self.summand_degrees(m + 1)
        tgt_off = self.offsets(m + 1)
        rows = self.total_dim(m + 1)
        cols: List[Vec] = [dict() for _ in range(self.total_dim(m))]
        src_off = self.offsets(m)
        for bi, deg in enumerate(src_degs):
            # d part: degree deg -> deg+1
            if deg + 1 <= self.cutoff:
                tb = tgt_degs.index(deg + 1)
                dmat = self.data.d_mats[deg]
                for j in range(self.data.dims[deg]):
                    for i, x in dmat.column(j).items():
                        cols[src_off[bi] + j][tgt_off[tb] + i] = x
            # B part: degree deg -> deg-1
            if deg - 1 >= m + 1:
                tb = tgt_degs.index(deg - 1)
                bmat = self.data.b_mats[deg]
                for j in range(self.data.dims[deg]):
                    col = bmat.column(j)
                    if not col:
                        continue
                    target = cols[src_off[bi] + j]
                    for i, x in col.items():
                        idx = tgt_off[tb] + i
                        w = self.field.add(target.get(idx, self.field.zero), x)
                        if w == self.field.zero:
                            target.pop(idx, None)
                        else:
                            target[idx] = w
        out = Matrix.from_columns(self.field, rows, cols)
        self._d_cache[m] = out
        return out

    def quotient(self, m: int) -> Quotient:
        q = self._q_cache.get(m)
        if q is None:
            ker = kernel_basis(self.d_matrix(m))
            gens = list(self.d_matrix(m - 1).columns) if m >= 1 else []
            q = Quotient.build(self.field, self.total_dim(m), ker, gens,
                               self.d_matrix(m))
            self._q_cache[m] = q
        return q

    def hc_dim(self, m: int) -> int:
        if not self.in_window(m):
            raise ValueError(f"total degree {m} outside validity window 0..{self.window}")
        return self.quotient(m).dim

    def hc_dims(self) -> List[int]:
        return [self.hc_dim(m) for m in range(self.window + 1)]

    def hc_basis(self, m: int) -> List[CyclicClass]:
        if not self.in_window(m):
            raise ValueError(f"total degree {m} outside validity window 0..{self.window}")
        q = self.quotient(m)
        out = []
        for k in range(q.dim):
            v = q.rep_vec(k)
            coords = [self.field.zero] * q.dim
            coords[k] = self.field.one
            out.append(CyclicClass(m, tuple(coords), tuple(self.blocks(m, v))))
        return out

    def hc_class(self, m: int, v: Vec) -> CyclicClass:
        q = self.quotient(m)
        coords = q.coords(v)
        return CyclicClass(m, tuple(coords), tuple(self.blocks(m, v)))

    def h_quotient(self, n: int) -> Quotient:
        q = self._h_cache.get(n)
        if q is None:
            q = self.data.h_quotient(n)
            self._h_cache[n] = q
        return q

    # -- the exact-couple maps, as matrices in the class bases ------------------

    def i_matrix(self, m: int) -> Matrix:
        """I: H^m -> HC^m, the class of c goes to the class of (c, 0, ...)."""
        hq = self.h_quotient(m)
        q = self.quotient(m)
        cols = []
        for k in range(hq.dim):
            total = self.embed(m, 0, hq.rep_vec(k))
            cols.append(_coords_vec(self.field, q.coords(total)))
        return Matrix.from_columns(self.field, q.dim, cols)

    def s_matrix(self, m: int) -> Matrix:
        """S: HC^{m-2} -> HC^m, dropping the leading coordinate."""
        src = self.quotient(m - 2)
        tgt = self.quotient(m)
        cols = []
        for k in range(src.dim):
            blocks = self.blocks(m - 2, src.rep_vec(k))
            total: Vec = {}
            for bi, block in enumerate(blocks[1:]):
                for idx, x in self.embed(m, bi, block).items():
                    total[idx] = x
            cols.append(_coords_vec(self.field, tgt.coords(total)))
        return Matrix.from_columns(self.field, tgt.dim, cols)

    def partial_matrix(self, m: int) -> Matrix:
        """dl: HC^m -> H^{m-1}, the class of (c_m, ...) goes to [B c_m]."""
        src = self.quotient(m)
        tgt = self.h_quotient(m - 1)
        cols = []
        for k in range(src.dim):
            leading = self.blocks(m, src.rep_vec(k))[0]
            img = self.data.b_mats[m].matvec(leading)
            cols.append(_coords_vec(self.field, tgt.coords(img)))
        return Matrix.from_columns(self.field, tgt.dim, cols)

    def induced_b_matrix(self, m: int) -> Matrix:
        """H^m -> H^{m-1} induced by B, straight from the mixed complex."""
        hq = self.h_quotient(m)
        tgt = self.h_quotient(m - 1)
        cols = []
        for k in range(hq.dim):
            img = self.data.b_mats[m].matvec(hq.rep_vec(k))
            cols.append(_coords_vec(self.field, tgt.coords(img)))
        return Matrix.from_columns(self.field, tgt.dim, cols)

    # -- verification -------------------------------------------------------------

    def verify(self) -> Report:
        field = self.field
        report = Report("cyclic-total-complex", metadata={
            "cutoff": self.cutoff,
            "window": self.window,
            "grading": "T^m = C^m + C^{m+2} + ...; D = d + B; window m <= cutoff-3",
        })

        counter = None
        for m in range(0, self.window + 1):
            prod = self.d_matrix(m + 1).mul(self.d_matrix(m))
            degs = self.summand_degrees(m + 2)
            offs = self.offsets(m + 2)
            for bi, deg in enumerate(degs):
                if deg >= self.cutoff:
                    continue  # the block the truncation is allowed to pollute
                lo, hi = offs[bi], offs[bi] + self.data.dims[deg]
                for col in prod.columns:
                    if any(lo <= i < hi for i in col):
                        counter = {"m": m, "block_degree": deg}
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "total-d-squared", "D o D == 0 away from the truncation boundary",
            f"total degrees <= {self.window}", counter is None, counter))

        counter = None
        for m in range(1, self.window + 1):
            lhs = self.partial_matrix(m).mul(self.i_matrix(m))
            rhs = self.induced_b_matrix(m)
            if lhs != rhs:
                counter = {"m": m}
                break
        report.add(CheckResult(
            "partial-after-i", "dl o I == induced B on H^m",
            f"1 <= m <= {self.window}", counter is None, counter))

        counter = None
        for m in range(0, self.window):
            # exactness at H^m: ker I == im dl from HC^{m+1}
            ker = kernel_basis(self.i_matrix(m))
            im = image_basis(self.partial_matrix(m + 1))
            if (ker.basis, ker.pivots) != (im.basis, im.pivots):
                counter = {"node": f"H^{m}"}
                break
        report.add(CheckResult(
            "exactness-at-h", "ker(I) == im(dl)",
            f"0 <= m < {self.window}", counter is None, counter))

        counter = None
        for m in range(0, self.window - 1):
            # exactness at HC^m: ker(S out of HC^m) == im(I)
            ker = kernel_basis(self.s_matrix(m + 2))
            im = image_basis(self.i_matrix(m))
            if (ker.basis, ker.pivots) != (im.basis, im.pivots):
                counter = {"node": f"HC^{m} (I/S)"}
                break
        report.add(CheckResult(
            "exactness-at-hc-i", "ker(S) == im(I)",
            f"0 <= m <= {self.window - 2}", counter is None, counter))

        counter = None
        for m in range(2, self.window + 1):
            # exactness at HC^m: ker(dl) == im(S into HC^m)
            ker = kernel_basis(self.partial_matrix(m))
            im = image_basis(self.s_matrix(m))
            if (ker.basis, ker.pivots) != (im.basis, im.pivots):
                counter = {"node": f"HC^{m} (S/dl)"}
                break
        report.add(CheckResult(
            "exactness-at-hc-s", "ker(dl) == im(S)",
            f"2 <= m <= {self.window}", counter is None, counter))

        return report


def _coords_vec(field: FieldSpec, coords: List[Scalar]) -> Vec:
    return {k: x for k, x in enumerate(coords) if x != field.zero}


class CyclicCohomology:
    """Total complex plus the degree -2 bracket, which needs chain-level cups."""

    def __init__(self, coho: CohomologyEngine, cutoff: Optional[int] = None):
        self.coho = coho
        self.field = coho.field
        self.cutoff = coho.max_degree if cutoff is None else cutoff
        self.total = TotalComplex(coho.data, self.cutoff)

    @property
    def window(self) -> int:
        return self.total.window

    def hc_dims(self) -> List[int]:
        return self.total.hc_dims()

    def hc_basis(self, m: int) -> List[CyclicClass]:
        return self.total.hc_basis(m)

    def partial_class(self, a: CyclicClass) -> CohomologyClass:
        """dl(a) = [B c_m] as an honest cohomology class with a representative."""
        leading = a.components[0]
        img = self.coho.data.b_mats[a.degree].matvec(leading)
        return self.coho._class_from_slice_coords(a.degree - 1, img)

    def i_class(self, x: CohomologyClass) -> CyclicClass:
        sl = self.coho.slice(x.degree)
        v_list = sl.coords(x.representative)
        v = {k: c for k, c in enumerate(v_list) if c != self.field.zero}
        total = self.total.embed(x.degree, 0, v)
        return self.total.hc_class(x.degree, total)

    def bracket(self, a: CyclicClass, b: CyclicClass) -> CyclicClass:
        """[a, b] = (-1)^{|a|} I(dl(a) cup dl(b)), of total degree |a|+|b|-2."""
        p, q = a.degree, b.degree
        if p + q - 2 < 0 or p + q - 2 > self.window:
            raise ValueError("bracket lands outside the validity window")
        if p == 0 or q == 0:
            dim = self.total.quotient(p + q - 2).dim
            return CyclicClass(p + q - 2, tuple([self.field.zero] * dim), ())
        da = self.partial_class(a)
        db = self.partial_class(b)
        cup = self.coho.reduce_to_class(
            self.coho.op.cup(da.representative, db.representative))
        if cup is None:
            raise ValueError("cup of boundary classes failed to be a cocycle")
        out = self.i_class(cup)
        return CyclicClass(out.degree,
                           tuple(self.field.mul(_sgn(self.field, p), c)
                                 for c in out.coords),
                           out.components)

    def verify_bracket(self, maxdeg: Optional[int] = None) -> Report:
        """Degree, antisymmetry and Jacobi for the degree -2 bracket."""
        field = self.field
        window = self.window if maxdeg is None else min(maxdeg, self.window)
        report = Report("cyclic-bracket", metadata={"window": window})

        basis = {m: self.hc_basis(m) for m in range(window + 1)}

        def zero_like(m: int) -> Tuple[Scalar, ...]:
            return tuple([field.zero] * self.total.quotient(m).dim)

        counter = None
        total = 0
        for p in range(window + 1):
            for q in range(window + 1):
                if p + q - 2 < 0 or p + q - 2 > window:
                    continue
                for a in basis[p]:
                    for b in basis[q]:
                        lhs = self.bracket(a, b)
                        rhs = self.bracket(b, a)
                        want = tuple(
                            field.neg(field.mul(_sgn(field, p * q), c))
                            for c in rhs.coords)
                        total += 1
                        if lhs.coords != want:
                            counter = {"p": p, "q": q,
                                       "lhs": [field.render(c) for c in lhs.coords],
                                       "rhs": [field.render(c) for c in want]}
                            break
                    if counter:
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "cyclic-bracket-antisymmetry", "[a,b] == -(-1)^{pq} [b,a]",
            f"class pairs within window {window}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for p in range(window + 1):
            for q in range(window + 1):
                for r in range(window + 1):
                    if any(t - 2 < 0 or t - 2 > window
                           for t in (q + r, p + q, p + r)):
                        continue
                    if p + q + r - 4 < 0 or p + q + r - 4 > window:
                        continue
                    for a in basis[p]:
                        for b in basis[q]:
                            for c in basis[r]:
                                lhs = self.bracket(a, self.bracket(b, c))
                                t1 = self.bracket(self.bracket(a, b), c)
                                t2 = self.bracket(b, self.bracket(a, c))
                                rhs = tuple(
                                    field.add(x, field.mul(_sgn(field, p * q), y))
                                    for x, y in zip(t1.coords, t2.coords))
                                total += 1
                                if lhs.coords != rhs:
                                    counter = {"p": p, "q": q, "r": r}
                                    break
                            if counter:
                                break
                        if counter:
                            break
                    if counter:
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "cyclic-bracket-jacobi",
            "[a,[b,c]] == [[a,b],c] + (-1)^{pq} [b,[a,c]]",
            f"class triples within window {window}, {total} instances",
            counter is None, counter))

        counter = None
        total = 0
        for p in range(1, window + 1):
            for q in range(1, window + 1):
                if p + q - 2 > window:
                    continue
                for a in basis[p]:
                    if not self.partial_class(a).is_zero():
                        continue
                    for b in basis[q]:
                        total += 1
                        if not self.bracket(a, b).is_zero():
                            counter = {"p": p, "q": q}
                            break
                    if counter:
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "cyclic-bracket-boundary-kills", "dl(a) == 0 implies [a,b] == 0",
            f"within window {window}, {total} instances",
            counter is None, counter))

        return report
