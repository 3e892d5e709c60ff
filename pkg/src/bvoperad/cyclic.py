"""Cyclic structure on an operad with multiplication, and the machine
verification of every chain-level identity that structure carries.

The cyclic operator tau is supplied per basis element by the operad
instance; its powers are cached per degree as sparse column matrices and
negative exponents are realized by modular reduction, never by inversion.
On top of it live the extra degeneracy, the signed norm operator, Connes'
coboundary B on the normalized complex, the degree -1 operator Z and the
degree -2 homotopy H, plus exhaustive sweeps for:

* the cyclic-operad axioms (order of tau, rotation versus insertion in
  first / inner slots, and both shifted generalizations),
* the induced cocyclic relations,
* the auxiliary extra-degeneracy identities,
* the cup/B splitting, the homotopy identity, and the six equations that
  assemble into it,
* the mixed-complex axioms on the normalized slices.

Every identity checked here is multilinear, so exhausting basis pairs at a
given cutoff is a complete proof at that cutoff, not a sample.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .fields import FieldSpec, Scalar
from .linalg import Matrix, Subspace, Vec, echelonize, kernel_basis, stack_rows, vec_axpy
from .operad import Cochain, Operad
from .reports import CheckResult, Report, render_vec


def _sgn(field: FieldSpec, exponent: int) -> Scalar:
    return field.one if exponent % 2 == 0 else field.neg(field.one)


def thread_count() -> int:
    """Worker cap from BVOPERAD_THREADS; 0 means one per CPU, default serial."""
    raw = os.environ.get("BVOPERAD_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value == 0:
        return os.cpu_count() or 1
    return max(1, value)


@dataclass
class NormalizedSlice:
    """The degree-n part of the normalized complex, as a subspace of O(n)."""

    degree: int
    subspace: Subspace

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def basis_cochains(self) -> List[Cochain]:
        return [Cochain(self.degree, dict(v)) for v in self.subspace.basis]

    def contains(self, c: Cochain) -> bool:
        if c.degree != self.degree:
            return False
        return self.subspace.contains(dict(c.coeffs))

    def coords(self, c: Cochain) -> List[Scalar]:
        found = self.subspace.in_span(dict(c.coeffs))
        if found is None:
            raise ValueError(f"cochain is not in the normalized degree-{self.degree} slice")
        return found

    def include(self, coords: Sequence[Scalar]) -> Cochain:
        return Cochain(self.degree, self.subspace.combination(coords))


def normalized_slice(op: Operad, n: int) -> NormalizedSlice:
    """Echelon basis of the joint kernel of all codegeneracies in degree n."""
    field = op.field
    if n == 0:
        full = echelonize(field, op.dim(0), [{k: field.one} for k in range(op.dim(0))])
        return NormalizedSlice(0, full)
    mats = [op.codegeneracy_matrix(n, j) for j in range(n)]
    return NormalizedSlice(n, kernel_basis(stack_rows(mats)))


class SliceCache:
    def __init__(self, op: Operad):
        self.op = op
        self._slices: Dict[int, NormalizedSlice] = {}

    def get(self, n: int) -> NormalizedSlice:
        s = self._slices.get(n)
        if s is None:
            s = normalized_slice(self.op, n)
            self._slices[n] = s
        return s


class CyclicStructure:
    """An operad with multiplication plus its cyclic operator and cached powers."""

    def __init__(self, op: Operad):
        if not hasattr(op, "basis_tau"):
            raise ValueError("operad instance carries no cyclic operator")
        if getattr(op, "is_cyclic", True) is False:
            raise ValueError("operad instance carries no cyclic operator")
        self.op = op
        self.field = op.field
        self._tau_cols: Dict[Tuple[int, int], List[Vec]] = {}

    # -- tau powers ----------------------------------------------------------

    def tau_columns(self, n: int, e: int) -> List[Vec]:
        """Columns of tau_n^e with 0 <= e <= n; powers are built incrementally."""
        e %= n + 1
        key = (n, e)
        cached = self._tau_cols.get(key)
        if cached is not None:
            return cached
        field = self.field
        if e == 0:
            cols = [{k: field.one} for k in range(self.op.dim(n))]
        elif e == 1:
            cols = [dict(self.op.basis_tau(n, k)) for k in range(self.op.dim(n))]
        else:
            prev = self.tau_columns(n, e - 1)
            tau1 = self.tau_columns(n, 1)
            cols = [self._apply(tau1, col) for col in prev]
        self._tau_cols[key] = cols
        return cols

    def _apply(self, cols: List[Vec], v: Vec) -> Vec:
        out: Vec = {}
        for k, c in v.items():
            vec_axpy(self.field, out, c, cols[k])
        return out

    def tau_pow(self, f: Cochain, j: int) -> Cochain:
        """tau^j with any integer j, reduced mod the order n+1 of the action."""
        n = f.degree
        if n < 0:
            return f
        if n > self.op.n_max:
            raise ValueError(f"degree {n} beyond cutoff")
        e = j % (n + 1)
        if e == 0:
            return f
        return Cochain(n, self._apply(self.tau_columns(n, e), dict(f.coeffs)))

    def tau_vec(self, n: int, v: Vec, j: int) -> Vec:
        e = j % (n + 1)
        if e == 0:
            return dict(v)
        return self._apply(self.tau_columns(n, e), v)

    # -- derived operators ------------------------------------------------------

    def extra_degeneracy(self, f: Cochain) -> Cochain:
        """sigma_n = sigma_{n-1} tau_n, defined for degree >= 1."""
        if f.degree < 1:
            raise ValueError("extra degeneracy needs degree >= 1")
        return self.op.codegeneracy(f.degree - 1, self.tau_pow(f, 1))

    def norm_N(self, f: Cochain) -> Cochain:
        """Signed norm on O(k): sum_i (-1)^{ik} tau^i."""
        k = f.degree
        if k < 0:
            return f
        field = self.field
        acc: Dict[int, Scalar] = {}
        for i in range(k + 1):
            term = self.tau_pow(f, i)
            vec_axpy(field, acc, _sgn(field, i * k), dict(term.coeffs))
        return Cochain(k, acc)

    def connes_B(self, f: Cochain) -> Cochain:
        """Normalized Connes coboundary N o (extra degeneracy); zero in degree 0."""
        if f.degree <= 0:
            return Cochain(f.degree - 1, {})
        return self.norm_N(self.extra_degeneracy(f))

    def connes_B_rotated(self, f: Cochain) -> Cochain:
        """The expansion sum_j (-1)^{j(m-1)} sigma_{j-1} tau^{-j}; must agree
        with connes_B everywhere."""
        m = f.degree
        if m <= 0:
            return Cochain(m - 1, {})
        field = self.field
        acc: Dict[int, Scalar] = {}
        for j in range(1, m + 1):
            term = self.op.codegeneracy(j - 1, self.tau_pow(f, -j))
            vec_axpy(field, acc, _sgn(field, j * (m - 1)), dict(term.coeffs))
        return Cochain(m - 1, acc)

    def z_op(self, f: Cochain, g: Cochain) -> Cochain:
        """Z(f,g) = (-1)^{mn} sum_j (-1)^{j(m+n-1)} tau^{-j} sigma_x(g cup f)."""
        m, n = f.degree, g.degree
        if m <= 0:
            return Cochain(m + n - 1, {})
        field = self.field
        base = self.extra_degeneracy(self.op.cup(g, f))
        acc: Dict[int, Scalar] = {}
        for j in range(1, m + 1):
            term = self.tau_pow(base, -j)
            vec_axpy(field, acc, _sgn(field, m * n + j * (m + n - 1)), dict(term.coeffs))
        return Cochain(m + n - 1, acc)

    def h_term(self, f: Cochain, g: Cochain, j: int, p: int) -> Cochain:
        """H_{j,p}(f,g) = +- tau^{-j} sigma_x (f o_{p-j+1} g)."""
        m, n = f.degree, g.degree
        comp = self.op.compose(f, g, p - j + 1)
        term = self.tau_pow(self.extra_degeneracy(comp), -j)
        sign = _sgn(self.field, j * m - j + (n - 1) * (p + 1 + m))
        return self.op.scale(sign, term)

    def h_term_rotated(self, f: Cochain, g: Cochain, j: int, p: int) -> Cochain:
        """Alternative expansion sigma_{j-1}(tau^{-j} f o_{p+1} g), same sign."""
        m, n = f.degree, g.degree
        comp = self.op.compose(self.tau_pow(f, -j), g, p + 1)
        term = self.op.codegeneracy(j - 1, comp)
        sign = _sgn(self.field, j * m - j + (n - 1) * (p + 1 + m))
        return self.op.scale(sign, term)

    def h_op(self, f: Cochain, g: Cochain) -> Cochain:
        """H(f,g) = sum over 1 <= j <= p <= m-1 of H_{j,p}(f,g)."""
        m, n = f.degree, g.degree
        if m <= 1:
            return Cochain(m + n - 2, {})
        field = self.field
        acc: Dict[int, Scalar] = {}
        for j in range(1, m):
            for p in range(j, m):
                vec_axpy(field, acc, field.one, dict(self.h_term(f, g, j, p).coeffs))
        return Cochain(m + n - 2, acc)


# == verification sweeps ==========================================================

_WORKER_CTX: Optional[dict] = None


def _init_from_global() -> dict:
    assert _WORKER_CTX is not None
    return _WORKER_CTX


def _compose_vecs(op: Operad, m: int, n: int, i: int, u: Vec, v: Vec) -> Vec:
    field = op.field
    out: Vec = {}
    for a, ca in u.items():
        for b, cb in v.items():
            c = field.mul(ca, cb)
            for k, ck in op.basis_compose(m, n, i, a, b).items():
                w = field.add(out.get(k, field.zero), field.mul(c, ck))
                if w == field.zero:
                    out.pop(k, None)
                else:
                    out[k] = w
    return out


def _axiom_task(task: Tuple[str, int, int]) -> Tuple[int, Optional[dict]]:
    ctx = _init_from_global()
    cyc: CyclicStructure = ctx["cyc"]
    kind, m, n = task
    return _run_axiom_block(cyc, kind, m, n)


def _run_axiom_block(cyc: CyclicStructure, kind: str, m: int, n: int) -> Tuple[int, Optional[dict]]:
    """Sweep one identity over all basis pairs in degrees (m, n)."""
    op = cyc.op
    field = op.field
    checked = 0

    def fail(i: int, j: int, a: int, b: int, lhs: Vec, rhs: Vec) -> dict:
        return {
            "m": m, "n": n, "i": i, "j": j,
            "f_index": a, "g_index": b,
            "lhs": render_vec(field, lhs),
            "rhs": render_vec(field, rhs),
        }

    dim_m, dim_n = op.dim(m), op.dim(n)
    N = m + n - 1

    if kind == "first-slot":
        tau_m = cyc.tau_columns(m, 1)
        tau_n = cyc.tau_columns(n, 1)
        for a in range(dim_m):
            ta = tau_m[a]
            for b in range(dim_n):
                lhs = cyc.tau_vec(N, op.basis_compose(m, n, 1, a, b), 1)
                rhs = _compose_vecs(op, n, m, n, tau_n[b], ta)
                checked += 1
                if lhs != rhs:
                    return checked, fail(1, 1, a, b, lhs, rhs)
        return checked, None

    if kind == "inner-slot":
        tau_m = cyc.tau_columns(m, 1)
        for i in range(2, m + 1):
            for a in range(dim_m):
                ta = tau_m[a]
                for b in range(dim_n):
                    lhs = cyc.tau_vec(N, op.basis_compose(m, n, i, a, b), 1)
                    rhs = _compose_vecs(op, m, n, i - 1, ta, {b: field.one})
                    checked += 1
                    if lhs != rhs:
                        return checked, fail(i, 1, a, b, lhs, rhs)
        return checked, None

    if kind == "shift":
        # tau^{-j}(f o_i g) == tau^{-j} f o_{i+j} g whenever 1 <= i+j <= m
        for i in range(1, m + 1):
            for j in range(1 - i, m - i + 1):
                tee = (-j) % (m + 1)
                tau_mj = cyc.tau_columns(m, tee)
                for a in range(dim_m):
                    ta = tau_mj[a]
                    for b in range(dim_n):
                        lhs = cyc.tau_vec(N, op.basis_compose(m, n, i, a, b), -j)
                        rhs = _compose_vecs(op, m, n, i + j, ta, {b: field.one})
                        checked += 1
                        if lhs != rhs:
                            return checked, fail(i, j, a, b, lhs, rhs)
        return checked, None

    if kind == "wrap":
        # m+1 <= i+j <= m+n:
        # tau^{-j}(f o_i g) == tau_n^{m-i-j} g o_{i+j-m} tau_m^{i-m-1} f
        for i in range(1, m + 1):
            for j in range(m + 1 - i, m + n - i + 1):
                tau_g = cyc.tau_columns(n, (m - i - j) % (n + 1))
                tau_f = cyc.tau_columns(m, (i - m - 1) % (m + 1))
                for a in range(dim_m):
                    tf = tau_f[a]
                    for b in range(dim_n):
                        lhs = cyc.tau_vec(N, op.basis_compose(m, n, i, a, b), -j)
                        rhs = _compose_vecs(op, n, m, i + j - m, tau_g[b], tf)
                        checked += 1
                        if lhs != rhs:
                            return checked, fail(i, j, a, b, lhs, rhs)
        return checked, None

    raise ValueError(f"unknown axiom block {kind!r}")


def verify_cyclic_axioms(cyc: CyclicStructure, maxdeg: int) -> Report:
    """Exhaustive check of the cyclic-operad axioms up to composite degree maxdeg."""
    op = cyc.op
    field = op.field
    report = Report(
        "cyclic-operad-axioms",
        metadata={"maxdeg": maxdeg, "field": str(field)},
    )

    # order of the cyclic action, degree by degree
    order_detail: Dict[str, bool] = {}
    order_counter = None
    for n in range(maxdeg + 1):
        tau1 = cyc.tau_columns(n, 1)
        cols = [{k: field.one} for k in range(op.dim(n))]
        for _ in range(n + 1):
            cols = [cyc._apply(tau1, c) for c in cols]
        good = all(cols[k] == {k: field.one} for k in range(op.dim(n)))
        order_detail[str(n)] = good
        if not good and order_counter is None:
            bad = next(k for k in range(op.dim(n)) if cols[k] != {k: field.one})
            order_counter = {
                "n": n,
                "basis_index": bad,
                "image": render_vec(field, cols[bad]),
            }
    report.add(CheckResult(
        "tau-order", "tau_n^{n+1} == id on O(n)",
        f"degrees 0..{maxdeg}", order_counter is None, order_counter,
        details={"per_degree": order_detail}))

    tid = cyc.tau_pow(op.identity_elt, 1)
    report.add(CheckResult(
        "tau-identity-fixed", "tau_1(id) == id", "degree 1",
        tid == op.identity_elt,
        None if tid == op.identity_elt else {"image": render_vec(field, dict(tid.coeffs))}))

    tmu = cyc.tau_pow(op.mult_elt, 1)
    report.add(CheckResult(
        "tau-mult-fixed", "tau_2(mu) == mu", "degree 2",
        tmu == op.mult_elt,
        None if tmu == op.mult_elt else {"image": render_vec(field, dict(tmu.coeffs))}))

    blocks: List[Tuple[str, str, str, List[Tuple[str, int, int]]]] = []

    def degree_pairs(min_m: int, min_n: int) -> List[Tuple[int, int]]:
        out = []
        for m in range(min_m, maxdeg + 2):
            for n in range(min_n, maxdeg + 2):
                if 1 <= m + n - 1 <= maxdeg:
                    out.append((m, n))
        return out

    blocks.append((
        "rotate-compose-first-slot",
        "tau(f o_1 g) == tau(g) o_n tau(f)",
        "m,n >= 1",
        [("first-slot", m, n) for (m, n) in degree_pairs(1, 1)],
    ))
    blocks.append((
        "rotate-compose-inner-slot",
        "tau(f o_i g) == tau(f) o_{i-1} g for 2 <= i <= m",
        "m >= 2, n >= 0",
        [("inner-slot", m, n) for (m, n) in degree_pairs(2, 0)],
    ))
    blocks.append((
        "rotate-compose-shift",
        "tau^{-j}(f o_i g) == tau^{-j}(f) o_{i+j} g for 1 <= i+j <= m",
        "m >= 1, n >= 0, all legal (i, j)",
        [("shift", m, n) for (m, n) in degree_pairs(1, 0)],
    ))
    blocks.append((
        "rotate-compose-wrap",
        "tau^{-j}(f o_i g) == tau^{m-i-j}(g) o_{i+j-m} tau^{i-m-1}(f) for m+1 <= i+j <= m+n",
        "m >= 1, n >= 1, all legal (i, j)",
        [("wrap", m, n) for (m, n) in degree_pairs(1, 1)],
    ))

    workers = thread_count()
    for name, statement, scope, tasks in blocks:
        results: List[Tuple[int, Optional[dict]]] = []
        if workers > 1 and len(tasks) > 1:
            global _WORKER_CTX
            _WORKER_CTX = {"cyc": cyc}
            try:
                import multiprocessing as mp

                with mp.get_context("fork").Pool(workers) as pool:
                    results = pool.map(_axiom_task, tasks)
            finally:
                _WORKER_CTX = None
        else:
            results = [_run_axiom_block(cyc, *task) for task in tasks]
        total = sum(r[0] for r in results)
        counter = next((r[1] for r in results if r[1] is not None), None)
        report.add(CheckResult(
            name, statement,
            f"{scope}, m+n-1 <= {maxdeg}, {total} instances",
            counter is None, counter))

    return report


def verify_cocyclic(cyc: CyclicStructure, maxdeg: int) -> Report:
    """The relations making the cosimplicial structure cocyclic."""
    op = cyc.op
    field = op.field
    report = Report("cocyclic-structure", metadata={"maxdeg": maxdeg})

    def sweep(name: str, statement: str, scope: str,
              instances: Callable[[], Optional[dict]]) -> None:
        counter = instances()
        report.add(CheckResult(name, statement, scope, counter is None, counter))

    def coface_zero() -> Optional[dict]:
        for n in range(1, maxdeg + 1):
            for a in range(op.dim(n - 1)):
                f = op.basis_cochain(n - 1, a)
                lhs = cyc.tau_pow(op.coface(0, f), 1)
                rhs = op.coface(n, f)
                if lhs != rhs:
                    return {"n": n, "basis_index": a,
                            "lhs": render_vec(field, dict(lhs.coeffs)),
                            "rhs": render_vec(field, dict(rhs.coeffs))}
        return None

    sweep("tau-coface-zero", "tau_n delta_0 == delta_n",
          f"degrees 1..{maxdeg}", coface_zero)

    def coface_inner() -> Optional[dict]:
        for n in range(1, maxdeg + 1):
            for i in range(1, n + 1):
                for a in range(op.dim(n - 1)):
                    f = op.basis_cochain(n - 1, a)
                    lhs = cyc.tau_pow(op.coface(i, f), 1)
                    rhs = op.coface(i - 1, cyc.tau_pow(f, 1))
                    if lhs != rhs:
                        return {"n": n, "i": i, "basis_index": a,
                                "lhs": render_vec(field, dict(lhs.coeffs)),
                                "rhs": render_vec(field, dict(rhs.coeffs))}
        return None

    sweep("tau-coface-inner", "tau_n delta_i == delta_{i-1} tau_{n-1} for 1 <= i <= n",
          f"degrees 1..{maxdeg}", coface_inner)

    def codegeneracy_shift() -> Optional[dict]:
        for n in range(0, maxdeg):
            # operators O(n+1) -> O(n)
            for j in range(1, n + 1):
                for a in range(op.dim(n + 1)):
                    f = op.basis_cochain(n + 1, a)
                    lhs = cyc.tau_pow(op.codegeneracy(j, f), 1)
                    rhs = op.codegeneracy(j - 1, cyc.tau_pow(f, 1))
                    if lhs != rhs:
                        return {"n": n, "j": j, "basis_index": a,
                                "lhs": render_vec(field, dict(lhs.coeffs)),
                                "rhs": render_vec(field, dict(rhs.coeffs))}
        return None

    sweep("tau-codegeneracy", "tau_n sigma_j == sigma_{j-1} tau_{n+1} for 1 <= j <= n",
          f"degrees up to {maxdeg}", codegeneracy_shift)

    def power_codegeneracy() -> Optional[dict]:
        for n in range(0, maxdeg):
            for i in range(0, n + 1):
                for r in range(0, i + 1):
                    for a in range(op.dim(n + 1)):
                        f = op.basis_cochain(n + 1, a)
                        lhs = cyc.tau_pow(op.codegeneracy(i, f), r)
                        rhs = op.codegeneracy(i - r, cyc.tau_pow(f, r))
                        if lhs != rhs:
                            return {"n": n, "i": i, "r": r, "basis_index": a,
                                    "lhs": render_vec(field, dict(lhs.coeffs)),
                                    "rhs": render_vec(field, dict(rhs.coeffs))}
        return None

    sweep("tau-power-codegeneracy",
          "tau_n^r sigma_i == sigma_{i-r} tau_{n+1}^r for 0 <= r <= i <= n",
          f"degrees up to {maxdeg}", power_codegeneracy)

    return report


def verify_extra_degeneracy(cyc: CyclicStructure, maxdeg: int) -> Report:
    """The auxiliary identities tying the extra degeneracy to cup and tau."""
    op = cyc.op
    field = op.field
    report = Report("extra-degeneracy-identities", metadata={"maxdeg": maxdeg})

    counter = None
    total = 0
    for m in range(1, maxdeg + 1):
        for n in range(0, maxdeg - m + 1):
            for a in range(op.dim(m)):
                f = op.basis_cochain(m, a)
                tf = cyc.tau_pow(f, 1)
                for b in range(op.dim(n)):
                    g = op.basis_cochain(n, b)
                    lhs = cyc.extra_degeneracy(op.cup(f, g))
                    rhs = op.compose(tf, g, m)
                    total += 1
                    if lhs != rhs:
                        counter = {"m": m, "n": n, "f_index": a, "g_index": b,
                                   "lhs": render_vec(field, dict(lhs.coeffs)),
                                   "rhs": render_vec(field, dict(rhs.coeffs))}
                        break
                if counter:
                    break
            if counter:
                break
        if counter:
            break
    report.add(CheckResult(
        "extra-degeneracy-cup", "sigma_x(f cup g) == tau(f) o_m g",
        f"m >= 1, n >= 0, m+n <= {maxdeg}, {total} instances",
        counter is None, counter))

    counter = None
    total = 0
    for m in range(1, maxdeg + 1):
        for n in range(1, maxdeg - m + 1):
            for a in range(op.dim(m)):
                f = op.basis_cochain(m, a)
                for b in range(op.dim(n)):
                    g = op.basis_cochain(n, b)
                    lhs = cyc.tau_pow(cyc.extra_degeneracy(op.cup(f, g)), -n)
                    rhs = cyc.extra_degeneracy(op.cup(g, f))
                    total += 1
                    if lhs != rhs:
                        counter = {"m": m, "n": n, "f_index": a, "g_index": b,
                                   "lhs": render_vec(field, dict(lhs.coeffs)),
                                   "rhs": render_vec(field, dict(rhs.coeffs))}
                        break
                if counter:
                    break
            if counter:
                break
        if counter:
            break
    report.add(CheckResult(
        "extra-degeneracy-swap", "tau^{-n} sigma_x(f cup g) == sigma_x(g cup f)",
        f"m, n >= 1, m+n <= {maxdeg}, {total} instances",
        counter is None, counter))

    counter = None
    total = 0
    for n in range(0, maxdeg):
        for j in range(1, n + 2):
            for a in range(op.dim(n + 1)):
                f = op.basis_cochain(n + 1, a)
                lhs = cyc.tau_pow(cyc.extra_degeneracy(f), -j)
                rhs = op.codegeneracy(j - 1, cyc.tau_pow(f, -j))
                total += 1
                if lhs != rhs:
                    counter = {"n": n, "j": j, "basis_index": a,
                               "lhs": render_vec(field, dict(lhs.coeffs)),
                               "rhs": render_vec(field, dict(rhs.coeffs))}
                    break
            if counter:
                break
        if counter:
            break
    report.add(CheckResult(
        "extra-degeneracy-rotation",
        "tau_n^{-j} sigma_{n+1} == sigma_{j-1} tau_{n+1}^{-j} for 1 <= j <= n+1",
        f"degrees up to {maxdeg}, {total} instances",
        counter is None, counter))

    counter = None
    total = 0
    for n in range(1, maxdeg + 1):
        for a in range(op.dim(n)):
            f = op.basis_cochain(n, a)
            lhs = cyc.connes_B(f)
            rhs = cyc.connes_B_rotated(f)
            total += 1
            if lhs != rhs:
                counter = {"n": n, "basis_index": a,
                           "lhs": render_vec(field, dict(lhs.coeffs)),
                           "rhs": render_vec(field, dict(rhs.coeffs))}
                break
        if counter:
            break
    report.add(CheckResult(
        "connes-b-two-forms",
        "N sigma_x == sum_j (-1)^{j(m-1)} sigma_{j-1} tau^{-j}",
        f"degrees 1..{maxdeg}, {total} instances",
        counter is None, counter))

    return report


def _d_safe(op: Operad, c: Cochain) -> Cochain:
    if c.degree < 0:
        return Cochain(c.degree + 1, {})
    return op.differential(c)


def verify_homotopy_identities(cyc: CyclicStructure, maxdeg: int,
                               slices: Optional[SliceCache] = None) -> Report:
    """Cup/B splitting, the two-term H expansion, the homotopy identity and
    the six equations behind it, swept over normalized basis pairs.

    The equations substitute cofaces of f and g, so the operad cutoff must
    exceed maxdeg by one.
    """
    op = cyc.op
    field = op.field
    if op.n_max < maxdeg + 1:
        raise ValueError(
            f"identity sweep at pair degree {maxdeg} needs cutoff >= {maxdeg + 1}")
    slices = slices or SliceCache(op)
    report = Report("homotopy-identities", metadata={"maxdeg": maxdeg})

    pairs: List[Tuple[Cochain, Cochain]] = []
    for m in range(0, maxdeg + 1):
        for n in range(0, maxdeg - m + 1):
            for f in slices.get(m).basis_cochains():
                for g in slices.get(n).basis_cochains():
                    pairs.append((f, g))

    def record(name: str, statement: str,
               check: Callable[[Cochain, Cochain], Tuple[Cochain, Cochain]],
               limit: Callable[[int, int], bool] = lambda m, n: True) -> None:
        counter = None
        total = 0
        for f, g in pairs:
            if not limit(f.degree, g.degree):
                continue
            lhs, rhs = check(f, g)
            total += 1
            if lhs != rhs:
                counter = {"m": f.degree, "n": g.degree,
                           "f": render_vec(field, dict(f.coeffs)),
                           "g": render_vec(field, dict(g.coeffs)),
                           "lhs": render_vec(field, dict(lhs.coeffs)),
                           "rhs": render_vec(field, dict(rhs.coeffs))}
                break
        report.add(CheckResult(
            name, statement,
            f"normalized basis pairs, m+n <= {maxdeg}, {total} instances",
            counter is None, counter))

    def h_two_forms(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.zero(m + n - 2)
        rhs = op.zero(m + n - 2)
        for j in range(1, m):
            for p in range(j, m):
                lhs = op.add(lhs, cyc.h_term(f, g, j, p))
                rhs = op.add(rhs, cyc.h_term_rotated(f, g, j, p))
        return lhs, rhs

    record("h-term-two-forms",
           "H_{j,p} via extra degeneracy == sigma_{j-1}(tau^{-j} f o_{p+1} g)",
           h_two_forms)

    def lemma(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = cyc.connes_B(op.cup(f, g))
        rhs = op.add(cyc.z_op(f, g), op.scale(_sgn(field, m * n), cyc.z_op(g, f)))
        return lhs, rhs

    record("cup-b-split", "B(f cup g) == Z(f,g) + (-1)^{mn} Z(g,f)", lemma)

    def even_double(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        lhs = cyc.connes_B(op.cup(f, f))
        rhs = op.scale(field.add(field.one, field.one), cyc.z_op(f, f))
        return lhs, rhs

    record("cup-b-even-double", "B(f cup f) == 2 Z(f,f) for even degree f",
           even_double, limit=lambda m, n: m == n and m % 2 == 0)

    def homotopy(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.sub(
            op.scale(_sgn(field, m),
                     op.sub(cyc.z_op(f, g), op.cup(cyc.connes_B(f), g))),
            op.comp_bar(f, g))
        rhs = op.add(
            _d_safe(op, cyc.h_op(f, g)),
            op.add(cyc.h_op(_d_safe(op, f), g),
                   op.scale(_sgn(field, m - 1), cyc.h_op(f, _d_safe(op, g)))))
        return lhs, rhs

    record("cup-b-homotopy",
           "(-1)^m (Z(f,g) - B(f) cup g) - f comp g == dH(f,g) + H(df,g) + (-1)^{m-1} H(f,dg)",
           homotopy)

    # the six equations assembling into the homotopy identity
    def eq1(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.sub(op.scale(_sgn(field, m), cyc.z_op(f, g)), op.comp_bar(f, g))
        rhs = op.add(cyc.h_op(op.coface(0, f), g),
                     op.scale(_sgn(field, m + 1), cyc.h_op(op.coface(m + 1, f), g)))
        return lhs, rhs

    def eq2(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.zero(m + n - 1)
        for j in range(1, m + 1):
            for p in range(j + 1, m + 1):
                term = cyc.h_term(op.compose(f, op.mult_elt, p - j), g, j, p)
                lhs = op.add(lhs, op.scale(_sgn(field, p - j), term))
        rhs = op.scale(_sgn(field, m), cyc.h_op(f, op.coface(0, g)))
        return lhs, rhs

    def eq3(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.zero(m + n - 1)
        for j in range(1, m):
            for p in range(j, m):
                term = cyc.h_term(op.compose(f, op.mult_elt, p - j + 1), g, j, p)
                lhs = op.add(lhs, op.scale(_sgn(field, p - j + 1), term))
        rhs = op.scale(_sgn(field, m + n + 1), cyc.h_op(f, op.coface(n + 1, g)))
        return lhs, rhs

    def eq4(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.zero(m + n - 1)
        for j in range(1, m + 1):
            term = cyc.h_term(op.compose(f, op.mult_elt, m - j + 1), g, j, m)
            lhs = op.add(lhs, op.scale(_sgn(field, m - j + 1), term))
        rhs = op.scale(_sgn(field, m + 1), op.cup(cyc.connes_B(f), g))
        return lhs, rhs

    def eq5(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.zero(m + n - 1)
        for j in range(1, m + 1):
            for p in range(j, m + 1):
                for i in range(1, m + 1):
                    if i == p - j or i == p - j + 1:
                        continue
                    term = cyc.h_term(op.compose(f, op.mult_elt, i), g, j, p)
                    lhs = op.add(lhs, op.scale(_sgn(field, i), term))
        h = cyc.h_op(f, g)
        rhs = op.scale(field.neg(field.one), op.compose(op.mult_elt, h, 2))
        if h.degree >= 0:
            rhs = op.sub(rhs, op.scale(_sgn(field, m + n - 1),
                                       op.compose(op.mult_elt, h, 1)))
        for j in range(1, m):
            for p in range(j, m):
                hterm = cyc.h_term(f, g, j, p)
                for i in list(range(1, p)) + list(range(p + n, m + n - 1)):
                    rhs = op.sub(rhs, op.scale(_sgn(field, i),
                                               op.compose(hterm, op.mult_elt, i)))
        return lhs, rhs

    def eq6(f: Cochain, g: Cochain) -> Tuple[Cochain, Cochain]:
        m, n = f.degree, g.degree
        lhs = op.zero(m + n - 1)
        for j in range(1, m):
            for p in range(j, m):
                hterm = cyc.h_term(f, g, j, p)
                for i in range(p, p + n):
                    lhs = op.add(lhs, op.scale(_sgn(field, i),
                                               op.compose(hterm, op.mult_elt, i)))
        rhs = op.zero(m + n - 1)
        for i in range(1, n + 1):
            rhs = op.add(rhs, op.scale(_sgn(field, m + i),
                                       cyc.h_op(f, op.compose(g, op.mult_elt, i))))
        return lhs, rhs

    statements = [
        ("homotopy-eq-1",
         "(-1)^m Z(f,g) - f comp g == H(mu o_2 f, g) + (-1)^{m+1} H(mu o_1 f, g)", eq1),
        ("homotopy-eq-2",
         "sum H_{j,p}((-1)^{p-j} f o_{p-j} mu, g) over j<p == (-1)^m H(f, mu o_2 g)", eq2),
        ("homotopy-eq-3",
         "sum H_{j,p}((-1)^{p-j+1} f o_{p-j+1} mu, g) == (-1)^m H(f, (-1)^{n+1} mu o_1 g)", eq3),
        ("homotopy-eq-4",
         "sum H_{j,m}((-1)^{m-j+1} f o_{m-j+1} mu, g) == -(-1)^m B(f) cup g", eq4),
        ("homotopy-eq-5",
         "sum H_{j,p}(off-window faces of f, g) == -mu o_2 H - (-1)^{m+n-1} mu o_1 H - outer H o_i mu", eq5),
        ("homotopy-eq-6",
         "sum over p <= i <= p+n-1 of (-1)^i H_{j,p}(f,g) o_i mu == (-1)^m H(f, faces of g)", eq6),
    ]
    for name, statement, fn in statements:
        record(name, statement, fn)

    return report


def verify_normalized_closure(cyc: CyclicStructure, maxdeg: int,
                              slices: Optional[SliceCache] = None) -> Report:
    """The normalized slices form a subalgebra and a sub Lie algebra."""
    op = cyc.op
    slices = slices or SliceCache(op)
    report = Report("normalized-closure", metadata={"maxdeg": maxdeg})

    counter = None
    for n in range(0, maxdeg):
        target = slices.get(n + 1)
        for f in slices.get(n).basis_cochains():
            if not target.contains(op.differential(f)):
                counter = {"n": n}
                break
        if counter:
            break
    report.add(CheckResult(
        "normalized-closed-under-d", "d maps the slice into the next slice",
        f"degrees < {maxdeg}", counter is None, counter))

    counter = None
    for m in range(0, maxdeg + 1):
        for n in range(0, maxdeg - m + 1):
            target = slices.get(m + n)
            for f in slices.get(m).basis_cochains():
                for g in slices.get(n).basis_cochains():
                    if not target.contains(op.cup(f, g)):
                        counter = {"m": m, "n": n}
                        break
                if counter:
                    break
            if counter:
                break
        if counter:
            break
    report.add(CheckResult(
        "normalized-closed-under-cup", "cup of normalized cochains is normalized",
        f"m+n <= {maxdeg}", counter is None, counter))

    counter = None
    for m in range(1, maxdeg + 1):
        for n in range(0, maxdeg - m + 2):
            if m + n - 1 > maxdeg:
                continue
            target = slices.get(m + n - 1)
            for f in slices.get(m).basis_cochains():
                for g in slices.get(n).basis_cochains():
                    for i in range(1, m + 1):
                        if not target.contains(op.compose(f, g, i)):
                            counter = {"m": m, "n": n, "i": i}
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
        "normalized-closed-under-compose", "each o_i of normalized cochains is normalized",
        f"m+n-1 <= {maxdeg}", counter is None, counter))

    counter = None
    for n in range(1, maxdeg + 1):
        target = slices.get(n - 1)
        for f in slices.get(n).basis_cochains():
            if not target.contains(cyc.connes_B(f)):
                counter = {"n": n}
                break
        if counter:
            break
    report.add(CheckResult(
        "normalized-closed-under-b", "B maps the slice into the previous slice",
        f"degrees 1..{maxdeg}", counter is None, counter))

    return report


def verify_mixed_complex(cyc: CyclicStructure, maxdeg: int,
                         slices: Optional[SliceCache] = None) -> Report:
    """d^2 == B^2 == dB + Bd == 0 on the normalized slices."""
    op = cyc.op
    field = op.field
    slices = slices or SliceCache(op)
    report = Report("mixed-complex", metadata={"maxdeg": maxdeg})

    counter = None
    for n in range(0, maxdeg - 1):
        for f in slices.get(n).basis_cochains():
            if not op.differential(op.differential(f)).is_zero():
                counter = {"n": n, "f": render_vec(field, dict(f.coeffs))}
                break
        if counter:
            break
    report.add(CheckResult(
        "d-squared", "d o d == 0", f"degrees <= {maxdeg - 2}",
        counter is None, counter))

    counter = None
    for n in range(0, maxdeg + 1):
        for f in slices.get(n).basis_cochains():
            bf = cyc.connes_B(f)
            bbf = cyc.connes_B(bf) if bf.degree >= 0 else bf
            if not bbf.is_zero():
                counter = {"n": n, "f": render_vec(field, dict(f.coeffs))}
                break
        if counter:
            break
    report.add(CheckResult(
        "b-squared", "B o B == 0", f"degrees <= {maxdeg}",
        counter is None, counter))

    counter = None
    for n in range(0, maxdeg):
        for f in slices.get(n).basis_cochains():
            lhs = cyc.connes_B(op.differential(f))
            rhs = _d_safe(op, cyc.connes_B(f))
            if not op.add(lhs, rhs).is_zero():
                counter = {"n": n, "f": render_vec(field, dict(f.coeffs))}
                break
        if counter:
            break
    report.add(CheckResult(
        "db-anticommute", "d B + B d == 0", f"degrees <= {maxdeg - 1}",
        counter is None, counter))

    return report


def verify_all(cyc: CyclicStructure, maxdeg: int) -> Report:
    """The full identity ledger, in a deterministic section order."""
    slices = SliceCache(cyc.op)
    report = Report("identity-suite", metadata={"maxdeg": maxdeg})
    report.extend(verify_cyclic_axioms(cyc, maxdeg))
    report.extend(verify_cocyclic(cyc, maxdeg))
    report.extend(verify_extra_degeneracy(cyc, maxdeg))
    report.extend(verify_normalized_closure(cyc, maxdeg, slices))
    report.extend(verify_mixed_complex(cyc, maxdeg, slices))
    report.extend(verify_homotopy_identities(cyc, maxdeg, slices))
    return report
