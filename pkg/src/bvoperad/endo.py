"""Endomorphism operad of a finite-dimensional algebra with a bilinear form.

The operad has O(n) = Hom(A^{tensor n}, A) with basis maps "send one input
tuple to one output basis vector"; the basis is enumerated row-major on the
input tuple with the output index last, and that order is frozen: coefficient
vectors double as stable identifiers in reports.

Two independent oracles live here as well:

* the classical Hochschild coboundary assembled directly from structure
  constants (never touching the operad layer), and
* the dual cyclic model on Hom(A^{tensor n+1}, k), where the cyclic operator
  is a plain index rotation and degeneracies insert the unit; the adjunction
  f -> f-hat transports everything back.

Cross-checking the operadic pipeline against both is part of the test
contract, not an optional extra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .fields import FieldError, FieldSpec, Scalar
from .linalg import Matrix, Vec, inverse, kernel_basis, rank, vec_axpy
from .operad import Cochain, Operad
from .reports import CheckResult, Report, render_vec


def encode_tuple(t: Sequence[int], dim: int) -> int:
    idx = 0
    for x in t:
        idx = idx * dim + x
    return idx


def decode_tuple(idx: int, n: int, dim: int) -> Tuple[int, ...]:
    out = [0] * n
    for k in range(n - 1, -1, -1):
        out[k] = idx % dim
        idx //= dim
    return tuple(out)


class PresentationError(ValueError):
    """Input presentation is structurally unusable."""


@dataclass
class AlgebraPresentation:
    """Structure constants of a finite-dimensional unital algebra, with an
    optional bilinear form given as a dense Gram matrix."""

    field: FieldSpec
    dim: int
    basis_names: List[str]
    mul: Dict[Tuple[int, int], Vec]
    unit: Vec
    form: Optional[List[List[Scalar]]] = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise PresentationError("algebra dimension must be positive")
        if len(self.basis_names) != self.dim:
            raise PresentationError("basis_names length does not match dim")

    def mul_basis(self, i: int, j: int) -> Vec:
        return self.mul.get((i, j), {})

    def product(self, u: Vec, v: Vec) -> Vec:
        out: Vec = {}
        for i, a in u.items():
            for j, b in v.items():
                vec_axpy(self.field, out, self.field.mul(a, b), self.mul_basis(i, j))
        return out

    def gram_matrix(self) -> Matrix:
        if self.form is None:
            raise PresentationError("presentation carries no bilinear form")
        return Matrix.from_dense(self.field, self.form)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AlgebraPresentation":
        try:
            field = FieldSpec.from_json(obj["field"])
            dim = int(obj["dim"])
            names = [str(s) for s in obj["basis_names"]]
            mul: Dict[Tuple[int, int], Vec] = {}
            for entry in obj["mul"]:
                i, j, k, text = entry
                i, j, k = int(i), int(j), int(k)
                if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                    raise PresentationError(f"mul entry {entry!r} out of range")
                c = field.parse(text)
                if c != field.zero:
                    mul.setdefault((i, j), {})[k] = c
            unit = {}
            unit_list = obj["unit"]
            if len(unit_list) != dim:
                raise PresentationError("unit vector has wrong length")
            for k, text in enumerate(unit_list):
                c = field.parse(text)
                if c != field.zero:
                    unit[k] = c
            form = None
            if obj.get("form") is not None:
                rows = obj["form"]
                if len(rows) != dim or any(len(r) != dim for r in rows):
                    raise PresentationError("form matrix has wrong shape")
                form = [[field.parse(x) for x in row] for row in rows]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, PresentationError):
                raise
            raise PresentationError(f"malformed algebra presentation: {exc}") from exc
        return cls(field, dim, names, mul, unit, form)

    def to_json_dict(self) -> dict:
        mul_entries = []
        for (i, j) in sorted(self.mul):
            for k in sorted(self.mul[(i, j)]):
                mul_entries.append([i, j, k, self.field.render(self.mul[(i, j)][k])])
        out: dict = {
            "kind": "algebra",
            "field": self.field.to_json(),
            "dim": self.dim,
            "basis_names": list(self.basis_names),
            "mul": mul_entries,
            "unit": [
                self.field.render(self.unit.get(k, self.field.zero))
                for k in range(self.dim)
            ],
        }
        if self.form is not None:
            out["form"] = [
                [self.field.render(x) for x in row] for row in self.form
            ]
        return out


def validate_algebra(p: AlgebraPresentation) -> Report:
    """Check associativity, the unit law, and the bilinear-form axioms, all as
    exact equalities over every basis tuple."""
    field = p.field
    report = Report("algebra-presentation", metadata={"dim": p.dim, "field": str(field)})

    counter = None
    for i in range(p.dim):
        for j in range(p.dim):
            for l in range(p.dim):
                left: Vec = {}
                for k, c in p.mul_basis(i, j).items():
                    vec_axpy(field, left, c, p.mul_basis(k, l))
                right: Vec = {}
                for k, c in p.mul_basis(j, l).items():
                    vec_axpy(field, right, c, p.mul_basis(i, k))
                if left != right:
                    counter = {
                        "triple": [i, j, l],
                        "lhs": render_vec(field, left),
                        "rhs": render_vec(field, right),
                    }
                    break
            if counter:
                break
        if counter:
            break
    report.add(CheckResult(
        "associativity", "(ei ej) el == ei (ej el)",
        f"all basis triples, dim {p.dim}", counter is None, counter))

    counter = None
    for i in range(p.dim):
        left = p.product(p.unit, {i: field.one})
        right = p.product({i: field.one}, p.unit)
        want = {i: field.one}
        if left != want or right != want:
            counter = {
                "basis_index": i,
                "unit_times": render_vec(field, left),
                "times_unit": render_vec(field, right),
            }
            break
    report.add(CheckResult(
        "unit-law", "1*ei == ei == ei*1",
        "all basis elements", counter is None, counter))

    if p.form is not None:
        G = p.form
        counter = None
        for i in range(p.dim):
            for j in range(p.dim):
                if G[i][j] != G[j][i]:
                    counter = {
                        "pair": [i, j],
                        "phi_ij": field.render(G[i][j]),
                        "phi_ji": field.render(G[j][i]),
                    }
                    break
            if counter:
                break
        report.add(CheckResult(
            "form-symmetric", "phi(a,b) == phi(b,a)",
            "all basis pairs", counter is None, counter))

        counter = None
        for a0 in range(p.dim):
            for a1 in range(p.dim):
                for a2 in range(p.dim):
                    lhs = field.zero
                    for k, c in p.mul_basis(a0, a1).items():
                        lhs = field.add(lhs, field.mul(c, G[a2][k]))
                    rhs = field.zero
                    for k, c in p.mul_basis(a1, a2).items():
                        rhs = field.add(rhs, field.mul(c, G[a0][k]))
                    if lhs != rhs:
                        counter = {
                            "triple": [a0, a1, a2],
                            "lhs": field.render(lhs),
                            "rhs": field.render(rhs),
                        }
                        break
                if counter:
                    break
            if counter:
                break
        report.add(CheckResult(
            "form-frobenius", "phi(a2, a0 a1) == phi(a0, a1 a2)",
            "all basis triples", counter is None, counter))

        nondegen = True
        try:
            inverse(p.gram_matrix())
        except ValueError:
            nondegen = False
        report.add(CheckResult(
            "form-nondegenerate", "Gram matrix is invertible",
            f"{p.dim}x{p.dim}", nondegen,
            None if nondegen else {"gram": [[field.render(x) for x in r] for r in G]}))

    return report


def structurally_valid(report: Report) -> bool:
    """The axioms an operad build genuinely needs (form symmetry excluded,
    so that planted asymmetric forms can still be swept for failures)."""
    for name in ("associativity", "unit-law", "form-nondegenerate"):
        item = report.find(name)
        if item is not None and not item.passed:
            return False
    return True


class EndOperad(Operad):
    """O(n) = Hom(A^{tensor n}, A) with substitution composition; cyclic via
    the form-adjoint rotation when a nondegenerate form is present."""

    def __init__(self, p: AlgebraPresentation, n_max: int):
        super().__init__(p.field, n_max)
        self.presentation = p
        self.d = p.dim
        field = p.field

        ident: Dict[int, Scalar] = {}
        for i in range(self.d):
            ident[i * self.d + i] = field.one
        self.identity_elt = Cochain(1, ident)

        mult: Dict[int, Scalar] = {}
        for (i, j), col in p.mul.items():
            base = (i * self.d + j) * self.d
            for k, c in col.items():
                mult[base + k] = c
        self.mult_elt = Cochain(2, mult)

        self.unit_elt = Cochain(0, dict(p.unit))

        self._gram: Optional[List[List[Scalar]]] = None
        self._gram_inv: Optional[List[List[Scalar]]] = None
        if p.form is not None:
            self._gram = p.form
            self._gram_inv = inverse(p.gram_matrix()).to_dense()

    @property
    def is_cyclic(self) -> bool:
        return self._gram is not None

    def basis_dim(self, n: int) -> int:
        return self.d ** (n + 1)

    def decode(self, n: int, idx: int) -> Tuple[Tuple[int, ...], int]:
        return decode_tuple(idx // self.d, n, self.d), idx % self.d

    def encode(self, inputs: Sequence[int], out: int) -> int:
        return encode_tuple(inputs, self.d) * self.d + out

    def basis_compose(self, m: int, n: int, i: int, a: int, b: int) -> Vec:
        I, j = self.decode(m, a)
        K, l = self.decode(n, b)
        if I[i - 1] != l:
            return {}
        merged = I[: i - 1] + K + I[i:]
        return {self.encode(merged, j): self.field.one}

    def basis_tau(self, n: int, a: int) -> Vec:
        """Rotation adjoint to the form: phi(v0, tau f(v1..vn)) = phi(vn, f(v0..vn-1))."""
        if self._gram is None or self._gram_inv is None:
            raise PresentationError("cyclic operator needs a nondegenerate form")
        if n == 0:
            return {a: self.field.one}
        field = self.field
        I, j = self.decode(n, a)
        out: Vec = {}
        for k in range(self.d):
            gk = self._gram[k][j]
            if gk == field.zero:
                continue
            shifted = I[1:] + (k,)
            base = encode_tuple(shifted, self.d) * self.d
            for b in range(self.d):
                gb = self._gram_inv[b][I[0]]
                if gb == field.zero:
                    continue
                idx = base + b
                w = field.add(out.get(idx, field.zero), field.mul(gk, gb))
                if w == field.zero:
                    out.pop(idx, None)
                else:
                    out[idx] = w
        return out


def build_endo_operad(p: AlgebraPresentation, n_max: int) -> EndOperad:
    report = validate_algebra(p)
    if not structurally_valid(report):
        failing = ", ".join(item.name for item in report.failures())
        raise PresentationError(f"algebra presentation rejected: {failing}")
    return EndOperad(p, n_max)


# -- oracle 1: classical Hochschild coboundary ---------------------------------

def hochschild_face_matrix(p: AlgebraPresentation, n: int, i: int) -> Matrix:
    """Matrix of the i-th classical coface Hom(A^n, A) -> Hom(A^{n+1}, A),
    assembled from structure constants only."""
    field = p.field
    d = p.dim
    src = d ** (n + 1)
    dst = d ** (n + 2)
    cols: List[Vec] = []
    for a in range(src):
        I = decode_tuple(a // d, n, d)
        j = a % d
        col: Vec = {}
        if i == 0:
            # a1 . f(a2 .. a_{n+1})
            for k0 in range(d):
                for l, c in p.mul_basis(k0, j).items():
                    idx = encode_tuple((k0,) + I, d) * d + l
                    col[idx] = field.add(col.get(idx, field.zero), c)
        elif i == n + 1:
            # f(a1 .. an) . a_{n+1}
            for kn in range(d):
                for l, c in p.mul_basis(j, kn).items():
                    idx = encode_tuple(I + (kn,), d) * d + l
                    col[idx] = field.add(col.get(idx, field.zero), c)
        else:
            # f(a1, .., a_i a_{i+1}, .., a_{n+1})
            target = I[i - 1]
            for x in range(d):
                for y in range(d):
                    c = p.mul_basis(x, y).get(target)
                    if c is None:
                        continue
                    merged = I[: i - 1] + (x, y) + I[i:]
                    idx = encode_tuple(merged, d) * d + j
                    col[idx] = field.add(col.get(idx, field.zero), c)
        cols.append({k: v for k, v in col.items() if v != field.zero})
    return Matrix.from_columns(field, dst, cols)


def hochschild_degeneracy_matrix(p: AlgebraPresentation, n: int, j: int) -> Matrix:
    """Matrix of the classical codegeneracy (insert the unit in slot j+1)."""
    field = p.field
    d = p.dim
    src = d ** (n + 1)
    dst = d ** n
    cols: List[Vec] = []
    for a in range(src):
        I = decode_tuple(a // d, n, d)
        out = a % d
        u = p.unit.get(I[j], field.zero)
        if u == field.zero:
            cols.append({})
        else:
            reduced = I[:j] + I[j + 1:]
            cols.append({encode_tuple(reduced, d) * d + out: u})
    return Matrix.from_columns(field, dst, cols)


def hochschild_coboundary_matrix(p: AlgebraPresentation, n: int) -> Matrix:
    field = p.field
    d = p.dim
    out = Matrix.zeros(field, d ** (n + 2), d ** (n + 1))
    sign = field.one
    for i in range(n + 2):
        out = out.add(hochschild_face_matrix(p, n, i).scale(sign))
        sign = field.neg(sign)
    return out


def hochschild_dims_bruteforce(p: AlgebraPresentation, max_n: int) -> List[int]:
    """HH^n dimensions for n <= max_n from ranks of the classical complex."""
    dims: List[int] = []
    prev_rank = 0
    for n in range(max_n + 1):
        d_n = hochschild_coboundary_matrix(p, n)
        ker = kernel_basis(d_n).dim
        dims.append(ker - prev_rank)
        prev_rank = rank(d_n)
    return dims


# -- oracle 2: the dual cyclic model --------------------------------------------

class DualCyclicModel:
    """Hom(A^{tensor n+1}, k) with the index-rotation cyclic operator; the
    adjunction f -> f-hat transports the whole structure."""

    def __init__(self, p: AlgebraPresentation):
        if p.form is None:
            raise PresentationError("dual model needs a bilinear form")
        self.p = p
        self.field = p.field
        self.d = p.dim
        self.gram = p.form
        try:
            self.gram_inv = inverse(p.gram_matrix()).to_dense()
        except ValueError as exc:
            raise PresentationError("bilinear form is degenerate") from exc

    def space_dim(self, n: int) -> int:
        return self.d ** (n + 1)

    def hat_matrix(self, n: int) -> Matrix:
        """f -> f-hat, f-hat(v0..vn) = phi(v0, f(v1..vn)); an isomorphism."""
        field = self.field
        d = self.d
        cols: List[Vec] = []
        for a in range(self.space_dim(n)):
            I = decode_tuple(a // d, n, d)
            j = a % d
            col: Vec = {}
            for k0 in range(d):
                g = self.gram[k0][j]
                if g != field.zero:
                    col[encode_tuple((k0,) + I, d)] = g
            cols.append(col)
        return Matrix.from_columns(field, self.space_dim(n), cols)

    def tau_matrix(self, n: int) -> Matrix:
        """Dual of the tuple rotation (v0..vn) -> (vn, v0..vn-1)."""
        field = self.field
        d = self.d
        size = self.space_dim(n)
        cols: List[Vec] = []
        for a in range(size):
            T = decode_tuple(a, n + 1, d)
            cols.append({encode_tuple(T[1:] + (T[0],), d): field.one})
        return Matrix.from_columns(field, size, cols)

    def sigma_matrix(self, n: int, j: int) -> Matrix:
        """Dual of inserting the unit after slot j: Hom(A^{n+2},k) -> Hom(A^{n+1},k)."""
        field = self.field
        d = self.d
        cols: List[Vec] = []
        for a in range(self.space_dim(n + 1)):
            T = decode_tuple(a, n + 2, d)
            u = self.p.unit.get(T[j + 1], field.zero)
            if u == field.zero:
                cols.append({})
            else:
                cols.append({encode_tuple(T[: j + 1] + T[j + 2:], d): u})
        return Matrix.from_columns(field, self.space_dim(n), cols)

    def delta_matrix(self, n: int, i: int) -> Matrix:
        """Dual of the Hochschild face on A^{tensor n+1}: Hom(A^n..) -> Hom(A^{n+1}..)."""
        field = self.field
        d = self.d
        cols: List[Vec] = []
        for a in range(self.space_dim(n - 1)):
            T = decode_tuple(a, n, d)
            col: Vec = {}
            if i < n:
                for x in range(d):
                    for y in range(d):
                        c = self.p.mul_basis(x, y).get(T[i])
                        if c is None:
                            continue
                        S = T[:i] + (x, y) + T[i + 1:]
                        idx = encode_tuple(S, d)
                        col[idx] = field.add(col.get(idx, field.zero), c)
            else:
                for x in range(d):
                    for y in range(d):
                        c = self.p.mul_basis(x, y).get(T[0])
                        if c is None:
                            continue
                        S = (y,) + T[1:] + (x,)
                        idx = encode_tuple(S, d)
                        col[idx] = field.add(col.get(idx, field.zero), c)
            cols.append({k: v for k, v in col.items() if v != field.zero})
        return Matrix.from_columns(field, self.space_dim(n), cols)

    def extra_degeneracy_matrix(self, n: int) -> Matrix:
        return self.sigma_matrix(n - 1, n - 1).mul(self.tau_matrix(n))

    def norm_matrix(self, k: int) -> Matrix:
        """N = sum_i (-1)^{ik} tau^i on the degree-k dual space."""
        field = self.field
        size = self.space_dim(k)
        tau = self.tau_matrix(k)
        acc = Matrix.zeros(field, size, size)
        power = Matrix.identity(field, size)
        for i in range(k + 1):
            c = field.one if (i * k) % 2 == 0 else field.neg(field.one)
            acc = acc.add(power.scale(c))
            power = tau.mul(power)
        return acc

    def connes_b_matrix(self, n: int) -> Matrix:
        """Oracle for Connes' coboundary on Hom(A^n, A), transported via hat."""
        inner = self.norm_matrix(n - 1).mul(self.extra_degeneracy_matrix(n))
        hat_n = self.hat_matrix(n)
        hat_prev_inv = inverse(self.hat_matrix(n - 1))
        return hat_prev_inv.mul(inner).mul(hat_n)
