"""Exact sparse linear algebra: echelon bases, kernels, span membership.

Vectors are zero-free dicts ``index -> scalar``.  Elimination always picks
the first nonzero column as pivot, normalizes pivots to 1 and keeps bases
fully reduced, so a :class:`Subspace` stores the reduced row-echelon basis
of its span -- which is unique, making every downstream computation (and
hence every report) reproducible bit for bit.

Matrices are stored column-sparse: the ones arising here (cofaces,
codegeneracies, cyclic operators in a monomial-ish basis) have a handful of
entries per column, while Gaussian elimination works on copies row by row.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .fields import FieldSpec, Scalar

Vec = Dict[int, Scalar]


def vec_axpy(field: FieldSpec, target: Vec, c: Scalar, src: Vec) -> None:
    """target += c * src, in place, keeping the dict zero-free."""
    if c == field.zero:
        return
    for k, v in src.items():
        w = field.add(target.get(k, field.zero), field.mul(c, v))
        if w == field.zero:
            target.pop(k, None)
        else:
            target[k] = w


def vec_scale(field: FieldSpec, c: Scalar, v: Vec) -> Vec:
    if c == field.zero:
        return {}
    return {k: field.mul(c, x) for k, x in v.items()}


def vec_add(field: FieldSpec, u: Vec, v: Vec) -> Vec:
    out = dict(u)
    vec_axpy(field, out, field.one, v)
    return out


def vec_sub(field: FieldSpec, u: Vec, v: Vec) -> Vec:
    out = dict(u)
    vec_axpy(field, out, field.neg(field.one), v)
    return out


def vec_from_dense(field: FieldSpec, seq: Sequence) -> Vec:
    out: Vec = {}
    for i, x in enumerate(seq):
        x = field.coerce(x)
        if x != field.zero:
            out[i] = x
    return out


def vec_to_dense(field: FieldSpec, v: Vec, length: int) -> list:
    out = [field.zero] * length
    for k, x in v.items():
        if not 0 <= k < length:
            raise ValueError(f"index {k} out of range for length {length}")
        out[k] = x
    return out


@dataclass
class Matrix:
    """Column-sparse matrix over a fixed field."""

    field: FieldSpec
    rows: int
    cols: int
    columns: List[Vec] = dc_field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.columns:
            self.columns = [dict() for _ in range(self.cols)]
        if len(self.columns) != self.cols:
            raise ValueError("column count mismatch")

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "Matrix":
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "Matrix":
        return cls(field, n, n, [{i: field.one} for i in range(n)])

    @classmethod
    def from_columns(cls, field: FieldSpec, rows: int, cols: Sequence[Vec]) -> "Matrix":
        return cls(field, rows, len(cols), [dict(c) for c in cols])

    @classmethod
    def from_dense(cls, field: FieldSpec, rows: Sequence[Sequence]) -> "Matrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        cols: List[Vec] = [dict() for _ in range(nc)]
        for i, row in enumerate(rows):
            if len(row) != nc:
                raise ValueError("ragged dense matrix")
            for j, x in enumerate(row):
                x = field.coerce(x)
                if x != field.zero:
                    cols[j][i] = x
        return cls(field, nr, nc, cols)

    def entry(self, i: int, j: int) -> Scalar:
        return self.columns[j].get(i, self.field.zero)

    def set_entry(self, i: int, j: int, x: Scalar) -> None:
        if x == self.field.zero:
            self.columns[j].pop(i, None)
        else:
            self.columns[j][i] = x

    def column(self, j: int) -> Vec:
        return self.columns[j]

    def row_vectors(self) -> List[Vec]:
        rows: List[Vec] = [dict() for _ in range(self.rows)]
        for j, col in enumerate(self.columns):
            for i, x in col.items():
                rows[i][j] = x
        return rows

    def matvec(self, v: Vec) -> Vec:
        out: Vec = {}
        for j, c in v.items():
            vec_axpy(self.field, out, c, self.columns[j])
        return out

    def mul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        return Matrix.from_columns(
            self.field, self.rows, [self.matvec(c) for c in other.columns]
        )

    def add(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in matrix sum")
        return Matrix.from_columns(
            self.field,
            self.rows,
            [vec_add(self.field, a, b) for a, b in zip(self.columns, other.columns)],
        )

    def scale(self, c: Scalar) -> "Matrix":
        return Matrix.from_columns(
            self.field, self.rows, [vec_scale(self.field, c, col) for col in self.columns]
        )

    def transpose(self) -> "Matrix":
        return Matrix.from_columns(self.field, self.cols, self.row_vectors())

    def is_zero(self) -> bool:
        return all(not c for c in self.columns)

    def to_dense(self) -> List[list]:
        out = [[self.field.zero] * self.cols for _ in range(self.rows)]
        for j, col in enumerate(self.columns):
            for i, x in col.items():
                out[i][j] = x
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.rows == other.rows
            and self.cols == other.cols
            and self.columns == other.columns
        )


@dataclass
class Subspace:
    """A subspace of k^n presented by its reduced row-echelon basis."""

    field: FieldSpec
    ambient_dim: int
    basis: List[Vec]
    pivots: List[int]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Vec) -> Tuple[List[Scalar], Vec]:
        """Eliminate every pivot from v; return (coordinates, remainder)."""
        rem = dict(v)
        coords: List[Scalar] = []
        for p, b in zip(self.pivots, self.basis):
            c = rem.get(p, self.field.zero)
            coords.append(c)
            if c != self.field.zero:
                vec_axpy(self.field, rem, self.field.neg(c), b)
        return coords, rem

    def in_span(self, v: Vec) -> Optional[List[Scalar]]:
        for k in v:
            if not 0 <= k < self.ambient_dim:
                raise ValueError("vector length does not match ambient dimension")
        coords, rem = self.reduce(v)
        return coords if not rem else None

    def contains(self, v: Vec) -> bool:
        return self.in_span(v) is not None

    def combination(self, coords: Sequence[Scalar]) -> Vec:
        if len(coords) != self.dim:
            raise ValueError("coordinate length mismatch")
        out: Vec = {}
        for c, b in zip(coords, self.basis):
            vec_axpy(self.field, out, c, b)
        return out


def echelonize(field: FieldSpec, ambient_dim: int, vectors: Iterable[Vec]) -> Subspace:
    """Reduced row-echelon basis of the span (unique, hence order independent)."""
    basis: Dict[int, Vec] = {}
    for v in vectors:
        w = dict(v)
        for k in w:
            if not 0 <= k < ambient_dim:
                raise ValueError("inconsistent vector length")
        # forward-reduce against every existing pivot, in column order
        for p in sorted(basis):
            c = w.get(p)
            if c is not None:
                vec_axpy(field, w, field.neg(c), basis[p])
        if not w:
            continue
        piv = min(w)
        inv = field.inv(w[piv])
        w = vec_scale(field, inv, w)
        for u in basis.values():
            c = u.get(piv)
            if c is not None:
                vec_axpy(field, u, field.neg(c), w)
        basis[piv] = w
    pivots = sorted(basis)
    return Subspace(field, ambient_dim, [basis[p] for p in pivots], pivots)


def rank(M: Matrix) -> int:
    return echelonize(M.field, M.cols, M.row_vectors()).dim


def kernel_basis(M: Matrix) -> Subspace:
    """RREF basis of {v : M v = 0}; dim(kernel) + rank = cols."""
    field = M.field
    rowspace = echelonize(field, M.cols, M.row_vectors())
    pivset = set(rowspace.pivots)
    free_cols = [j for j in range(M.cols) if j not in pivset]
    gens: List[Vec] = []
    for f in free_cols:
        v: Vec = {f: field.one}
        for p, row in zip(rowspace.pivots, rowspace.basis):
            c = row.get(f)
            if c is not None:
                v[p] = field.neg(c)
        gens.append(v)
    return echelonize(field, M.cols, gens)


def image_basis(M: Matrix) -> Subspace:
    return echelonize(M.field, M.rows, M.columns)


def inverse(M: Matrix) -> Matrix:
    """Inverse of a square matrix; raises ValueError when singular."""
    if M.rows != M.cols:
        raise ValueError("inverse of a non-square matrix")
    field = M.field
    n = M.rows
    # eliminate on rows of [M | I]
    rows = M.row_vectors()
    aug = [dict(r) for r in rows]
    for i in range(n):
        aug[i][n + i] = field.one
    space = echelonize(field, 2 * n, aug)
    if space.pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    cols: List[Vec] = [dict() for _ in range(n)]
    for i, row in enumerate(space.basis):
        for j, x in row.items():
            if j >= n:
                cols[j - n][i] = x
    return Matrix.from_columns(field, n, cols)


def stack_rows(mats: Sequence[Matrix]) -> Matrix:
    """Vertical stack; all blocks must share the field and column count."""
    if not mats:
        raise ValueError("nothing to stack")
    field = mats[0].field
    cols = mats[0].cols
    total = 0
    out_cols: List[Vec] = [dict() for _ in range(cols)]
    for M in mats:
        if M.field != field or M.cols != cols:
            raise ValueError("incompatible blocks")
        for j, col in enumerate(M.columns):
            for i, x in col.items():
                out_cols[j][total + i] = x
        total += M.rows
    return Matrix.from_columns(field, total, out_cols)
