"""Cobar operad of a finite-dimensional Hopf algebra with a character.

O(n) = H^{tensor n}, basis = index tuples in row-major order, with insertion
given by the iterated diagonal of the inserted-into slot multiplied
componentwise into the inserted tensor.  The cyclic operator twists the
first slot by the twisted antipode (convolution of the character with the
antipode) and rotates; construction is refused when the twisted antipode
fails to square to the identity, because the rotation would not have the
right order.  A ``force`` escape hatch builds anyway so the axiom sweep can
exhibit the failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .fields import FieldSpec, Scalar
from .linalg import Matrix, Vec, vec_axpy
from .operad import Cochain, Operad
from .reports import CheckResult, Report, render_vec
from .endo import (
    AlgebraPresentation,
    PresentationError,
    decode_tuple,
    encode_tuple,
)

Pairs = Dict[Tuple[int, int], Scalar]


@dataclass
class HopfPresentation:
    """Structure constants of a finite-dimensional Hopf algebra plus a
    character (algebra map to the ground field)."""

    field: FieldSpec
    dim: int
    basis_names: List[str]
    mul: Dict[Tuple[int, int], Vec]
    unit: Vec
    comul: Dict[int, Pairs]
    counit: List[Scalar]
    antipode: List[List[Scalar]]
    character: List[Scalar]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise PresentationError("Hopf dimension must be positive")
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

    def comul_basis(self, i: int) -> Pairs:
        return self.comul.get(i, {})

    def antipode_column(self, j: int) -> Vec:
        field = self.field
        return {
            i: self.antipode[i][j]
            for i in range(self.dim)
            if self.antipode[i][j] != field.zero
        }

    def as_algebra(self) -> AlgebraPresentation:
        return AlgebraPresentation(
            self.field, self.dim, self.basis_names, self.mul, self.unit, None
        )

    @classmethod
    def from_json_dict(cls, obj: dict) -> "HopfPresentation":
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
            unit: Vec = {}
            if len(obj["unit"]) != dim:
                raise PresentationError("unit vector has wrong length")
            for k, text in enumerate(obj["unit"]):
                c = field.parse(text)
                if c != field.zero:
                    unit[k] = c
            comul: Dict[int, Pairs] = {}
            for entry in obj["comul"]:
                i, j, k, text = entry
                i, j, k = int(i), int(j), int(k)
                if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                    raise PresentationError(f"comul entry {entry!r} out of range")
                c = field.parse(text)
                if c != field.zero:
                    comul.setdefault(i, {})[(j, k)] = c
            counit = [field.parse(x) for x in obj["counit"]]
            antipode = [[field.parse(x) for x in row] for row in obj["antipode"]]
            character = [field.parse(x) for x in obj["character"]]
            if len(counit) != dim or len(character) != dim:
                raise PresentationError("counit/character length mismatch")
            if len(antipode) != dim or any(len(r) != dim for r in antipode):
                raise PresentationError("antipode matrix has wrong shape")
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, PresentationError):
                raise
            raise PresentationError(f"malformed Hopf presentation: {exc}") from exc
        return cls(field, dim, names, mul, unit, comul, counit, antipode, character)

    def to_json_dict(self) -> dict:
        field = self.field
        mul_entries = []
        for (i, j) in sorted(self.mul):
            for k in sorted(self.mul[(i, j)]):
                mul_entries.append([i, j, k, field.render(self.mul[(i, j)][k])])
        comul_entries = []
        for i in sorted(self.comul):
            for (j, k) in sorted(self.comul[i]):
                comul_entries.append([i, j, k, field.render(self.comul[i][(j, k)])])
        return {
            "kind": "hopf",
            "field": field.to_json(),
            "dim": self.dim,
            "basis_names": list(self.basis_names),
            "mul": mul_entries,
            "unit": [field.render(self.unit.get(k, field.zero)) for k in range(self.dim)],
            "comul": comul_entries,
            "counit": [field.render(x) for x in self.counit],
            "antipode": [[field.render(x) for x in row] for row in self.antipode],
            "character": [field.render(x) for x in self.character],
        }


def validate_hopf(p: HopfPresentation) -> Report:
    """Every Hopf axiom, checked exactly on all basis tuples."""
    field = p.field
    report = Report("hopf-presentation", metadata={"dim": p.dim, "field": str(field)})
    report.extend(_algebra_part(p))

    # coassociativity: (Delta ox id) Delta == (id ox Delta) Delta
    counter = None
    for i in range(p.dim):
        lhs: Dict[Tuple[int, int, int], Scalar] = {}
        rhs: Dict[Tuple[int, int, int], Scalar] = {}
        for (x, c), v in p.comul_basis(i).items():
            for (a, b), w in p.comul_basis(x).items():
                key = (a, b, c)
                s = field.add(lhs.get(key, field.zero), field.mul(v, w))
                if s == field.zero:
                    lhs.pop(key, None)
                else:
                    lhs[key] = s
        for (a, x), v in p.comul_basis(i).items():
            for (b, c), w in p.comul_basis(x).items():
                key = (a, b, c)
                s = field.add(rhs.get(key, field.zero), field.mul(v, w))
                if s == field.zero:
                    rhs.pop(key, None)
                else:
                    rhs[key] = s
        if lhs != rhs:
            counter = {"basis_index": i}
            break
    report.add(CheckResult(
        "coassociativity", "(Delta ox id) Delta == (id ox Delta) Delta",
        "all basis elements", counter is None, counter))

    counter = None
    for i in range(p.dim):
        left: Vec = {}
        right: Vec = {}
        for (j, k), c in p.comul_basis(i).items():
            vec_axpy(field, left, field.mul(c, p.counit[j]), {k: field.one})
            vec_axpy(field, right, field.mul(c, p.counit[k]), {j: field.one})
        want = {i: field.one}
        if left != want or right != want:
            counter = {
                "basis_index": i,
                "counit_left": render_vec(field, left),
                "counit_right": render_vec(field, right),
            }
            break
    report.add(CheckResult(
        "counit", "(eps ox id) Delta == id == (id ox eps) Delta",
        "all basis elements", counter is None, counter))

    # Delta and eps are algebra maps
    counter = None
    for i in range(p.dim):
        for j in range(p.dim):
            lhs2: Pairs = {}
            for k, c in p.mul_basis(i, j).items():
                for (a, b), w in p.comul_basis(k).items():
                    key = (a, b)
                    s = field.add(lhs2.get(key, field.zero), field.mul(c, w))
                    if s == field.zero:
                        lhs2.pop(key, None)
                    else:
                        lhs2[key] = s
            rhs2: Pairs = {}
            for (a1, b1), c1 in p.comul_basis(i).items():
                for (a2, b2), c2 in p.comul_basis(j).items():
                    c12 = field.mul(c1, c2)
                    for a, ca in p.mul_basis(a1, a2).items():
                        for b, cb in p.mul_basis(b1, b2).items():
                            key = (a, b)
                            s = field.add(
                                rhs2.get(key, field.zero),
                                field.mul(c12, field.mul(ca, cb)),
                            )
                            if s == field.zero:
                                rhs2.pop(key, None)
                            else:
                                rhs2[key] = s
            if lhs2 != rhs2:
                counter = {"pair": [i, j]}
                break
        if counter:
            break
    if counter is None:
        lhs_unit: Pairs = {}
        for i, c in p.unit.items():
            for key, w in p.comul_basis(i).items():
                s = field.add(lhs_unit.get(key, field.zero), field.mul(c, w))
                if s == field.zero:
                    lhs_unit.pop(key, None)
                else:
                    lhs_unit[key] = s
        rhs_unit: Pairs = {}
        for a, ca in p.unit.items():
            for b, cb in p.unit.items():
                rhs_unit[(a, b)] = field.mul(ca, cb)
        rhs_unit = {k: v for k, v in rhs_unit.items() if v != field.zero}
        if lhs_unit != rhs_unit:
            counter = {"pair": "unit"}
    report.add(CheckResult(
        "bialgebra-comultiplication", "Delta(ab) == Delta(a) Delta(b), Delta(1) == 1 ox 1",
        "all basis pairs", counter is None, counter))

    counter = None
    for i in range(p.dim):
        for j in range(p.dim):
            lhs1 = field.zero
            for k, c in p.mul_basis(i, j).items():
                lhs1 = field.add(lhs1, field.mul(c, p.counit[k]))
            if lhs1 != field.mul(p.counit[i], p.counit[j]):
                counter = {"pair": [i, j]}
                break
        if counter:
            break
    if counter is None:
        e1 = field.zero
        for i, c in p.unit.items():
            e1 = field.add(e1, field.mul(c, p.counit[i]))
        if e1 != field.one:
            counter = {"pair": "unit"}
    report.add(CheckResult(
        "bialgebra-counit", "eps(ab) == eps(a) eps(b), eps(1) == 1",
        "all basis pairs", counter is None, counter))

    # antipode: convolution inverse of the identity
    counter = None
    for i in range(p.dim):
        left = _convolve_side(p, i, left_side=True)
        right = _convolve_side(p, i, left_side=False)
        want: Vec = {}
        vec_axpy(field, want, p.counit[i], p.unit)
        if left != want or right != want:
            counter = {
                "basis_index": i,
                "s_conv_id": render_vec(field, left),
                "id_conv_s": render_vec(field, right),
            }
            break
    report.add(CheckResult(
        "antipode", "S(h1) h2 == eps(h) 1 == h1 S(h2)",
        "all basis elements", counter is None, counter))

    counter = None
    for i in range(p.dim):
        for j in range(p.dim):
            lhs1 = field.zero
            for k, c in p.mul_basis(i, j).items():
                lhs1 = field.add(lhs1, field.mul(c, p.character[k]))
            if lhs1 != field.mul(p.character[i], p.character[j]):
                counter = {"pair": [i, j]}
                break
        if counter:
            break
    if counter is None:
        c1 = field.zero
        for i, c in p.unit.items():
            c1 = field.add(c1, field.mul(c, p.character[i]))
        if c1 != field.one:
            counter = {"pair": "unit"}
    report.add(CheckResult(
        "character", "chi(ab) == chi(a) chi(b), chi(1) == 1",
        "all basis pairs", counter is None, counter))

    return report


def _algebra_part(p: HopfPresentation) -> Report:
    from .endo import validate_algebra

    return validate_algebra(p.as_algebra())


def _convolve_side(p: HopfPresentation, i: int, left_side: bool) -> Vec:
    field = p.field
    out: Vec = {}
    for (a, b), c in p.comul_basis(i).items():
        if left_side:
            vec_axpy(field, out, c, p.product(p.antipode_column(a), {b: field.one}))
        else:
            vec_axpy(field, out, c, p.product({a: field.one}, p.antipode_column(b)))
    return out


def twisted_antipode(p: HopfPresentation) -> List[List[Scalar]]:
    """Matrix of chi(h1) S(h2), column j = image of the j-th basis vector."""
    field = p.field
    cols: List[Vec] = []
    for i in range(p.dim):
        col: Vec = {}
        for (a, b), c in p.comul_basis(i).items():
            vec_axpy(field, col, field.mul(c, p.character[a]), p.antipode_column(b))
        cols.append(col)
    dense = [[field.zero] * p.dim for _ in range(p.dim)]
    for j, col in enumerate(cols):
        for r, x in col.items():
            dense[r][j] = x
    return dense


def twisted_antipode_report(p: HopfPresentation) -> Report:
    """Anti-homomorphism and twisted-coalgebra laws for the twisted antipode."""
    field = p.field
    st = twisted_antipode(p)
    report = Report("twisted-antipode")

    def st_col(j: int) -> Vec:
        return {r: st[r][j] for r in range(p.dim) if st[r][j] != field.zero}

    unit_img: Vec = {}
    for j, c in p.unit.items():
        vec_axpy(field, unit_img, c, st_col(j))
    report.add(CheckResult(
        "twisted-antipode-unit", "St(1) == 1", "unit vector",
        unit_img == p.unit,
        None if unit_img == p.unit else {"image": render_vec(field, unit_img)}))

    counter = None
    for i in range(p.dim):
        for j in range(p.dim):
            lhs: Vec = {}
            for k, c in p.mul_basis(i, j).items():
                vec_axpy(field, lhs, c, st_col(k))
            rhs = p.product(st_col(j), st_col(i))
            if lhs != rhs:
                counter = {
                    "pair": [i, j],
                    "lhs": render_vec(field, lhs),
                    "rhs": render_vec(field, rhs),
                }
                break
        if counter:
            break
    report.add(CheckResult(
        "twisted-antipode-antihom", "St(ab) == St(b) St(a)",
        "all basis pairs", counter is None, counter))

    counter = None
    for i in range(p.dim):
        lhs2: Pairs = {}
        for j, c in st_col(i).items():
            for key, w in p.comul_basis(j).items():
                s = field.add(lhs2.get(key, field.zero), field.mul(c, w))
                if s == field.zero:
                    lhs2.pop(key, None)
                else:
                    lhs2[key] = s
        rhs2: Pairs = {}
        for (a, b), c in p.comul_basis(i).items():
            for r1, x1 in p.antipode_column(b).items():
                for r2, x2 in st_col(a).items():
                    key = (r1, r2)
                    s = field.add(rhs2.get(key, field.zero),
                                  field.mul(c, field.mul(x1, x2)))
                    if s == field.zero:
                        rhs2.pop(key, None)
                    else:
                        rhs2[key] = s
        if lhs2 != rhs2:
            counter = {"basis_index": i}
            break
    report.add(CheckResult(
        "twisted-antipode-coalgebra", "Delta St(h) == S(h2) ox St(h1)",
        "all basis elements", counter is None, counter))

    return report


def check_modular_pair(p: HopfPresentation) -> CheckResult:
    """Exact matrix equality St o St == id."""
    field = p.field
    st = Matrix.from_dense(field, twisted_antipode(p))
    square = st.mul(st)
    ident = Matrix.identity(field, p.dim)
    ok = square == ident
    return CheckResult(
        "modular-pair-involution", "St o St == id",
        f"{p.dim}x{p.dim} matrix square", ok,
        None if ok else {
            "square": [[field.render(x) for x in row] for row in square.to_dense()]
        })


class CobarOperad(Operad):
    """O(n) = H^{tensor n}; insertion via the iterated diagonal."""

    def __init__(self, p: HopfPresentation, n_max: int):
        super().__init__(p.field, n_max)
        self.presentation = p
        self.d = p.dim
        field = p.field

        self.identity_elt = Cochain(1, dict(p.unit))
        mult: Dict[int, Scalar] = {}
        for a, ca in p.unit.items():
            for b, cb in p.unit.items():
                c = field.mul(ca, cb)
                if c != field.zero:
                    mult[a * self.d + b] = c
        self.mult_elt = Cochain(2, mult)
        self.unit_elt = Cochain(0, {0: field.one})

        self.twisted = twisted_antipode(p)
        self._delta_cache: Dict[Tuple[int, int], Dict[Tuple[int, ...], Scalar]] = {}

    def basis_dim(self, n: int) -> int:
        return self.d ** n

    def delta_power(self, i: int, n: int) -> Dict[Tuple[int, ...], Scalar]:
        """Iterated diagonal of a basis vector as a sparse tensor in H^{ox n}.

        n == 0 is the counit, n == 1 the identity; higher powers expand the
        first tensor slot (coassociativity makes the choice immaterial).
        """
        field = self.field
        p = self.presentation
        key = (i, n)
        cached = self._delta_cache.get(key)
        if cached is not None:
            return cached
        if n == 0:
            out = {(): p.counit[i]} if p.counit[i] != field.zero else {}
        elif n == 1:
            out = {(i,): field.one}
        else:
            prev = self.delta_power(i, n - 1)
            out = {}
            for T, c in prev.items():
                for (a, b), w in p.comul_basis(T[0]).items():
                    key2 = (a, b) + T[1:]
                    s = field.add(out.get(key2, field.zero), field.mul(c, w))
                    if s == field.zero:
                        out.pop(key2, None)
                    else:
                        out[key2] = s
        self._delta_cache[key] = out
        return out

    def iterated_diagonal(self, v: Vec, n: int) -> Vec:
        """Delta^{n-1} of an element of H, as a sparse vector over H^{ox n}."""
        field = self.field
        out: Vec = {}
        for i, c in v.items():
            for T, w in self.delta_power(i, n).items():
                idx = encode_tuple(T, self.d)
                s = field.add(out.get(idx, field.zero), field.mul(c, w))
                if s == field.zero:
                    out.pop(idx, None)
                else:
                    out[idx] = s
        return out

    def _pointwise(self, T: Tuple[int, ...], factors: List[Vec], c0: Scalar) -> Dict[Tuple[int, ...], Scalar]:
        """Expand (e_{T_1} ... ) . (factors) componentwise in H^{ox n}."""
        field = self.field
        p = self.presentation
        acc: Dict[Tuple[int, ...], Scalar] = {(): c0}
        for k, factor in enumerate(factors):
            nxt: Dict[Tuple[int, ...], Scalar] = {}
            for prefix, c in acc.items():
                for l, cl in factor.items():
                    for r, cr in p.mul_basis(T[k], l).items():
                        key = prefix + (r,)
                        w = field.mul(c, field.mul(cl, cr))
                        s = field.add(nxt.get(key, field.zero), w)
                        if s == field.zero:
                            nxt.pop(key, None)
                        else:
                            nxt[key] = s
            acc = nxt
            if not acc:
                break
        return acc

    def basis_compose(self, m: int, n: int, i: int, a: int, b: int) -> Vec:
        field = self.field
        A = decode_tuple(a, m, self.d)
        if n == 0:
            eps = self.presentation.counit[A[i - 1]]
            if eps == field.zero:
                return {}
            reduced = A[: i - 1] + A[i:]
            return {encode_tuple(reduced, self.d): eps}
        B = decode_tuple(b, n, self.d)
        out: Vec = {}
        factors: List[Vec] = [{B[k]: field.one} for k in range(n)]
        for T, c in self.delta_power(A[i - 1], n).items():
            for middle, w in self._pointwise(T, factors, c).items():
                full = A[: i - 1] + middle + A[i:]
                idx = encode_tuple(full, self.d)
                s = field.add(out.get(idx, field.zero), w)
                if s == field.zero:
                    out.pop(idx, None)
                else:
                    out[idx] = s
        return out

    def twisted_column(self, j: int) -> Vec:
        field = self.field
        return {
            r: self.twisted[r][j]
            for r in range(self.d)
            if self.twisted[r][j] != field.zero
        }

    def basis_tau(self, n: int, a: int) -> Vec:
        """tau(h1 ox .. ox hn) = Delta^{n-1}(St(h1)) . (h2 ox .. ox hn ox 1)."""
        field = self.field
        if n == 0:
            return {a: field.one}
        A = decode_tuple(a, n, self.d)
        factors: List[Vec] = [{A[k]: field.one} for k in range(1, n)]
        factors.append(dict(self.presentation.unit))
        out: Vec = {}
        for s0, c0 in self.twisted_column(A[0]).items():
            for T, c in self.delta_power(s0, n).items():
                for tup, w in self._pointwise(T, factors, field.mul(c0, c)).items():
                    idx = encode_tuple(tup, self.d)
                    s = field.add(out.get(idx, field.zero), w)
                    if s == field.zero:
                        out.pop(idx, None)
                    else:
                        out[idx] = s
        return out


def twisted_coalgebra_report(op: CobarOperad, n_max: int) -> Report:
    """Delta^{n-1} St(h) == S(h^n) ox .. ox S(h^2) ox St(h^1) for n <= n_max."""
    p = op.presentation
    field = p.field
    report = Report("twisted-coalgebra-tower")
    for n in range(1, n_max + 1):
        counter = None
        for i in range(p.dim):
            lhs: Vec = {}
            for s0, c0 in op.twisted_column(i).items():
                for T, c in op.delta_power(s0, n).items():
                    idx = encode_tuple(T, p.dim)
                    s = field.add(lhs.get(idx, field.zero), field.mul(c0, c))
                    if s == field.zero:
                        lhs.pop(idx, None)
                    else:
                        lhs[idx] = s
            rhs: Vec = {}
            for T, c in op.delta_power(i, n).items():
                # reversed, S on slots n..2, twisted antipode on slot 1 (last)
                acc: Dict[Tuple[int, ...], Scalar] = {(): c}
                for k in range(n - 1, 0, -1):
                    nxt: Dict[Tuple[int, ...], Scalar] = {}
                    for prefix, cc in acc.items():
                        col = {
                            r: p.antipode[r][T[k]]
                            for r in range(p.dim)
                            if p.antipode[r][T[k]] != field.zero
                        }
                        for r, x in col.items():
                            key = prefix + (r,)
                            s = field.add(nxt.get(key, field.zero), field.mul(cc, x))
                            if s == field.zero:
                                nxt.pop(key, None)
                            else:
                                nxt[key] = s
                    acc = nxt
                for prefix, cc in acc.items():
                    for r, x in op.twisted_column(T[0]).items():
                        idx = encode_tuple(prefix + (r,), p.dim)
                        s = field.add(rhs.get(idx, field.zero), field.mul(cc, x))
                        if s == field.zero:
                            rhs.pop(idx, None)
                        else:
                            rhs[idx] = s
            if lhs != rhs:
                counter = {
                    "basis_index": i,
                    "n": n,
                    "lhs": render_vec(field, lhs),
                    "rhs": render_vec(field, rhs),
                }
                break
        report.add(CheckResult(
            "twisted-coalgebra-power",
            "Delta^{n-1} St(h) == S(h^n) ox .. ox S(h^2) ox St(h^1)",
            f"n = {n}, all basis elements", counter is None, counter))
    return report


def build_cobar_operad(p: HopfPresentation, n_max: int, force: bool = False) -> CobarOperad:
    report = validate_hopf(p)
    if not report.all_passed:
        failing = ", ".join(item.name for item in report.failures())
        raise PresentationError(f"Hopf presentation rejected: {failing}")
    mpi = check_modular_pair(p)
    if not mpi.passed and not force:
        raise PresentationError(
            "modular pair in involution fails: the twisted antipode does not "
            "square to the identity; pass force=True to build anyway"
        )
    return CobarOperad(p, n_max)
