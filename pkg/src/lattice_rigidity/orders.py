"""Orders given by structure constants and lattices given by representations.

Modules are right modules: a lattice of rank m is a map sending each basis
element b_i of the order to an m x m matrix Delta(b_i) acting on row vectors,
with Delta(b_i) Delta(b_j) = sum_k c_ijk Delta(b_k).  A homomorphism L -> M
is a matrix X with Delta_L(b) X = X Delta_M(b).
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

from .errors import (
    AssociativityFailure,
    ContextMismatch,
    IdentityFailure,
    MultiplicativityFailure,
    PrecisionExhausted,
    SeparabilityUnverified,
    StabilizationFailure,
    ValidationError,
)
from .linalg import (
    RMatrix,
    _howell_rows,
    _smith_vals,
    kernel,
    kernel_module,
    rank_mod_p,
    smith_invariants,
)
from .witt import ArithmeticContext, Raw, RingElement, extend

SWEEP_CAP = 4096


def _add_into(ctx: ArithmeticContext, acc: dict, k: int, c: Raw):
    cur = acc.get(k)
    new = c if cur is None else ctx.add(cur, c)
    if any(new):
        acc[k] = new
    else:
        acc.pop(k, None)


@dataclass(frozen=True, eq=False)
class Order:
    """An O-order with basis b_0..b_(d-1) and b_i b_j = sum_k c[i][j][k] b_k.

    ``products[i][j]`` stores the nonzero c[i][j][k] sparsely as {k: c}.
    ``generators`` optionally lists basis indices generating the order as an
    O-algebra; intertwiner systems then only use those.  ``ext_exponent`` is a
    certified c with p^c annihilating Ext^1 between lattices (for example
    nu_p(|G|) for a group order).
    """

    ctx: ArithmeticContext
    dim: int
    labels: tuple[str, ...]
    products: tuple
    identity: tuple
    generators: tuple[int, ...] | None = None
    ext_exponent: int | None = None
    trace_det_valuation: int | None = field(default=None, compare=False)

    def structure_constant(self, i: int, j: int, k: int) -> RingElement:
        return RingElement(self.ctx, self.products[i][j].get(k, self.ctx.zero))

    def dense_constants(self) -> list:
        z = self.ctx.zero
        return [[[self.products[i][j].get(k, z) for k in range(self.dim)] for j in range(self.dim)] for i in range(self.dim)]

    def multiply(self, x: Sequence[Raw], y: Sequence[Raw]) -> list[Raw]:
        """Product of two elements given by coordinate vectors."""
        ctx = self.ctx
        acc: dict = {}
        for i, a in enumerate(x):
            if not any(a):
                continue
            for j, b in enumerate(y):
                if not any(b):
                    continue
                ab = ctx.mul(a, b)
                for k, c in self.products[i][j].items():
                    _add_into(ctx, acc, k, ctx.mul(ab, c))
        return [acc.get(k, ctx.zero) for k in range(self.dim)]

    @property
    def action_indices(self) -> tuple[int, ...]:
        return self.generators if self.generators is not None else tuple(range(self.dim))

    def at_precision(self, N: int) -> "Order":
        ctx = self.ctx.with_precision(N)
        conv = ctx.convert
        src = self.ctx
        products = [[{k: conv(c, src) for k, c in cell.items()} for cell in row] for row in self.products]
        return make_order(
            ctx,
            products,
            [conv(e, src) for e in self.identity],
            labels=self.labels,
            generators=self.generators,
            ext_exponent=self.ext_exponent,
        )

    def encode(self) -> dict:
        return {
            "context": self.ctx.to_dict(),
            "dimension": self.dim,
            "labels": list(self.labels),
            "structure_constants": [[[list(c) for c in cell] for cell in row] for row in self.dense_constants()],
            "identity": [list(e) for e in self.identity],
            **({"generators": [self.labels[g] for g in self.generators]} if self.generators is not None else {}),
            **({"ext_exponent": self.ext_exponent} if self.ext_exponent is not None else {}),
        }


def same_order(a: Order, b: Order) -> bool:
    """Structural equality of orders (same context, constants and identity)."""
    return a is b or (a.ctx == b.ctx and a.products == b.products and a.identity == b.identity)


def _sparse_products(ctx: ArithmeticContext, constants, d: int):
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            cell = constants[i][j]
            if isinstance(cell, Mapping):
                entries = {int(k): ctx.decode(v) if not isinstance(v, tuple) else v for k, v in cell.items()}
            else:
                if len(cell) != d:
                    raise ValidationError("structure constants must have shape d x d x d")
                entries = {k: ctx.decode(v) if not isinstance(v, tuple) else v for k, v in enumerate(cell)}
            row.append({k: v for k, v in entries.items() if any(v)})
        out.append(tuple(row))
    return tuple(out)


def make_order(
    ctx: ArithmeticContext,
    constants,
    identity: Sequence,
    labels: Sequence[str] | None = None,
    generators: Sequence[int] | None = None,
    ext_exponent: int | None = None,
    check_separability: bool = True,
) -> Order:
    """Validate structure constants and build an Order.

    ``constants[i][j]`` is either a length-d sequence of ring-element
    encodings or a sparse mapping {k: encoding}.
    """
    d = len(constants)
    if d == 0 or any(len(row) != d for row in constants):
        raise ValidationError("structure constants must have shape d x d x d")
    products = _sparse_products(ctx, constants, d)
    ident = tuple(e if isinstance(e, tuple) else ctx.decode(e) for e in identity)
    if len(ident) != d:
        raise ValidationError("identity must have d coordinates")
    labels = tuple(labels) if labels is not None else tuple(f"b{i}" for i in range(d))
    if len(labels) != d or len(set(labels)) != d:
        raise ValidationError("labels must be d distinct strings")
    order = Order(ctx, d, labels, products, ident, tuple(generators) if generators is not None else None, ext_exponent)
    _check_associative(order)
    _check_identity(order)
    if check_separability:
        v = trace_form_det_valuation(order)
        object.__setattr__(order, "trace_det_valuation", v)
        if v >= ctx.N:
            warnings.warn(
                f"trace form determinant vanishes at precision {ctx.N}; separability not verified",
                SeparabilityUnverified,
                stacklevel=2,
            )
    return order


def _check_associative(order: Order):
    ctx = order.ctx
    P = order.products
    d = order.dim
    for i in range(d):
        for j in range(d):
            ij = P[i][j]
            for l in range(d):
                left: dict = {}
                for k, c in ij.items():
                    for s, c2 in P[k][l].items():
                        _add_into(ctx, left, s, ctx.mul(c, c2))
                right: dict = {}
                for t, c in P[j][l].items():
                    for s, c2 in P[i][t].items():
                        _add_into(ctx, right, s, ctx.mul(c, c2))
                if left != right:
                    raise AssociativityFailure(
                        f"({order.labels[i]}*{order.labels[j]})*{order.labels[l]} != "
                        f"{order.labels[i]}*({order.labels[j]}*{order.labels[l]})"
                    )


def _check_identity(order: Order):
    ctx = order.ctx
    d = order.dim
    for i in range(d):
        b = [ctx.one if k == i else ctx.zero for k in range(d)]
        if order.multiply(order.identity, b) != b or order.multiply(b, order.identity) != b:
            raise IdentityFailure(f"identity does not act as a unit on {order.labels[i]}")


def trace_form_det_valuation(order: Order) -> int:
    """Valuation of det(tr(b_i b_j)) for the right regular representation."""
    ctx = order.ctx
    d = order.dim
    P = order.products
    # tr of right multiplication by b_k is sum_s c[s][k][s]
    tr = []
    for k in range(d):
        acc = ctx.zero
        for s in range(d):
            c = P[s][k].get(s)
            if c is not None:
                acc = ctx.add(acc, c)
        tr.append(acc)
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = ctx.zero
            for k, c in P[i][j].items():
                acc = ctx.add(acc, ctx.mul(c, tr[k]))
            row.append(acc)
        rows.append(row)
    vals = _smith_vals(ctx, rows, d)
    if any(v >= ctx.N for v in vals):
        return ctx.N
    return min(ctx.N, sum(vals))


@dataclass(frozen=True, eq=False)
class Lattice:
    """A right lattice over an order: matrices[i] is Delta(b_i)."""

    order: Order
    rank: int
    matrices: tuple[RMatrix, ...]

    @property
    def ctx(self) -> ArithmeticContext:
        return self.order.ctx

    def action(self, label_or_index) -> RMatrix:
        if isinstance(label_or_index, str):
            return self.matrices[self.order.labels.index(label_or_index)]
        return self.matrices[label_or_index]

    def at_precision(self, N: int, order: Order | None = None) -> "Lattice":
        order = order or self.order.at_precision(N)
        return make_lattice(order, [M.at_context(order.ctx) for M in self.matrices])

    def encode(self, inline_order: bool = True) -> dict:
        out = {
            "rank": self.rank,
            "matrices": {lab: M.to_ints() for lab, M in zip(self.order.labels, self.matrices)},
        }
        if inline_order:
            out["order"] = self.order.encode()
        return out


def make_lattice(order: Order, matrices) -> Lattice:
    """Validate a representation; ``matrices`` is a list by basis index or a {label: matrix} map."""
    ctx = order.ctx
    if isinstance(matrices, Mapping):
        missing = set(order.labels) - set(matrices)
        if missing:
            raise ValidationError(f"missing matrices for {sorted(missing)}")
        matrices = [matrices[lab] for lab in order.labels]
    if len(matrices) != order.dim:
        raise ValidationError("need one matrix per order basis element")
    mats = []
    for M in matrices:
        if not isinstance(M, RMatrix):
            M = RMatrix.from_entries(ctx, M)
        if M.ctx != ctx:
            raise ContextMismatch("representation matrix from a different context")
        mats.append(M)
    m = mats[0].nrows
    if any(M.shape != (m, m) for M in mats):
        raise ValidationError("representation matrices must be square of equal size")
    L = Lattice(order, m, tuple(mats))
    _check_multiplicative(L)
    return L


def _linear_combination(ctx: ArithmeticContext, coeffs: Mapping[int, Raw] | Sequence[Raw], mats) -> list[list[Raw]]:
    items = coeffs.items() if isinstance(coeffs, Mapping) else enumerate(coeffs)
    m = mats[0].nrows
    acc = [[ctx.zero] * m for _ in range(m)]
    for k, c in items:
        if not any(c):
            continue
        for r, row in enumerate(mats[k].data):
            arow = acc[r]
            for s, x in enumerate(row):
                if any(x):
                    arow[s] = ctx.add(arow[s], ctx.mul(c, x))
    return acc


def _check_multiplicative(L: Lattice):
    order = L.order
    ctx = order.ctx
    m = L.rank
    ident = _linear_combination(ctx, order.identity, L.matrices)
    if RMatrix(ctx, ident, m) != RMatrix.identity(ctx, m):
        raise MultiplicativityFailure("Delta(1) is not the identity")
    for i in range(order.dim):
        for j in range(order.dim):
            lhs = L.matrices[i] @ L.matrices[j]
            rhs = RMatrix(ctx, _linear_combination(ctx, order.products[i][j], L.matrices), m)
            if lhs != rhs:
                raise MultiplicativityFailure(
                    f"Delta({order.labels[i]}) Delta({order.labels[j]}) != Delta({order.labels[i]}*{order.labels[j]})"
                )


# -- Hom and Ext ---------------------------------------------------------------------

def hom_system(L: Lattice, M: Lattice) -> RMatrix:
    """Matrix A with x A = 0 iff the row-major vector x is an intertwiner L -> M.

    Rows are indexed by unknowns X[a][b], columns by (lambda, i, j) for the
    equations (Delta_L(lambda) X - X Delta_M(lambda))[i][j] = 0.
    """
    if not same_order(L.order, M.order):
        raise ContextMismatch("lattices over different orders")
    ctx = L.ctx
    mL, mM = L.rank, M.rank
    idx = L.order.action_indices
    ncols = len(idx) * mL * mM
    rows = [[ctx.zero] * ncols for _ in range(mL * mM)]
    for t, lam in enumerate(idx):
        DL = L.matrices[lam].data
        DM = M.matrices[lam].data
        base = t * mL * mM
        for i in range(mL):
            for j in range(mM):
                col = base + i * mM + j
                # (DL X)[i][j] = sum_a DL[i][a] X[a][j]
                for a in range(mL):
                    c = DL[i][a]
                    if any(c):
                        r = rows[a * mM + j]
                        r[col] = ctx.add(r[col], c)
                # (X DM)[i][j] = sum_b X[i][b] DM[b][j]
                for b in range(mM):
                    c = DM[b][j]
                    if any(c):
                        r = rows[i * mM + b]
                        r[col] = ctx.sub(r[col], c)
    return RMatrix(ctx, rows, ncols)


@dataclass(frozen=True, eq=False)
class HomBasis:
    source: Lattice
    target: Lattice
    basis: tuple[RMatrix, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def combination(self, coeffs: Sequence[Raw]) -> RMatrix:
        ctx = self.source.ctx
        return RMatrix(ctx, _linear_combination(ctx, list(coeffs), self.basis), self.target.rank)


def _vectors_to_matrices(ctx, rows, mL: int, mM: int) -> tuple[RMatrix, ...]:
    return tuple(RMatrix(ctx, [row[a * mM:(a + 1) * mM] for a in range(mL)], mM) for row in rows)


def hom_basis(L: Lattice, M: Lattice) -> HomBasis:
    """Saturated O-basis of Hom(L, M) (Howell-canonical on the row-major vectors)."""
    A = hom_system(L, M)
    K = kernel(A, saturate=True)
    return HomBasis(L, M, _vectors_to_matrices(L.ctx, K.data, L.rank, M.rank))


def end_rank_mod_p(L: Lattice) -> int:
    """dim over the residue field of End(L/pL)."""
    A = hom_system(L, L).residue()
    return kernel_module(A).nrows


def end_reduction_surjective(L: Lattice) -> bool:
    hb = hom_basis(L, L)
    if hb.rank:
        image = RMatrix(L.ctx, [B.flatten() for B in hb.basis], L.rank * L.rank)
        image_rank = rank_mod_p(image)
    else:
        image_rank = 0
    return image_rank == end_rank_mod_p(L)


def is_rigid(L: Lattice) -> bool:
    """Ext^1(L, L) = 0, decided by surjectivity of End(L) -> End(L/pL)."""
    return end_reduction_surjective(L)


@dataclass(frozen=True)
class ExtInvariants:
    """Ext^1 as a finite O-module: sum of O/p^v for v in ``invariants``."""

    invariants: tuple[int, ...]
    exponent: int
    certified: bool

    @property
    def vanishes(self) -> bool:
        return not self.invariants

    @property
    def length(self) -> int:
        return sum(self.invariants)


def _coker_invariants(A: RMatrix, hom_rows, c: int) -> tuple[int, ...]:
    """Elementary divisors of coker(Hom(L, M) -> Hom(L, M/p^c M))."""
    ctx_c = A.ctx.with_precision(c)
    A_c = A.at_context(ctx_c)
    K = kernel_module(A_c)
    s = K.nrows
    if s == 0:
        return ()
    conv = ctx_c.convert
    src = A.ctx
    images = [[conv(x, src) for x in row] for row in hom_rows]
    stacked = RMatrix(ctx_c, list(K.data) + images, A.nrows)
    rel = kernel_module(stacked)
    Q = [row[:s] for row in rel.data]
    vals = _smith_vals(ctx_c, Q, s) if Q else []
    vals = vals + [c] * (s - len(vals))
    return tuple(sorted(min(v, c) for v in vals if v > 0))


def ext1_invariants(L: Lattice, M: Lattice, c: int | None = None) -> ExtInvariants:
    """Ext^1(L, M) via the annihilator trick.

    With ``c`` given, returns the elementary divisors of
    coker(Hom(L, M) -> Hom(L, M/p^c M)), which is Ext^1 when p^c kills it.
    Without ``c`` the order's certified exponent is used if known; otherwise
    c is increased until the invariants agree at c and c + 1 (cap N - 1).
    """
    A = hom_system(L, M)
    K = kernel(A, saturate=True)
    N = L.ctx.N
    if c is not None:
        if not 1 <= c <= N:
            raise ValidationError(f"exponent must lie in [1, {N}]")
        return ExtInvariants(_coker_invariants(A, K.data, c), c, False)
    if L.order.ext_exponent is not None:
        c = max(1, L.order.ext_exponent)
        if c > N:
            raise PrecisionExhausted(f"certified exponent {c} exceeds precision {N}")
        return ExtInvariants(_coker_invariants(A, K.data, c), c, True)
    prev = _coker_invariants(A, K.data, 1)
    for c in range(1, N - 1):
        nxt = _coker_invariants(A, K.data, c + 1)
        if nxt == prev:
            return ExtInvariants(prev, c, False)
        prev = nxt
    raise StabilizationFailure(f"Ext invariants did not stabilize below precision {N}")


def ext1_smith_shortcut(L: Lattice, M: Lattice, c: int) -> tuple[int, ...]:
    """Ext^1[p^c] read from the Smith invariants of the intertwiner system.

    Independent of the cokernel construction; used as a cross-check.
    """
    N = L.ctx.N
    vals = smith_invariants(hom_system(L, M))
    return tuple(sorted(min(v, c) for v in vals if 0 < v < N))


# -- isomorphism ------------------------------------------------------------------------

def _field_rank(ctx1: ArithmeticContext, rows, ncols: int) -> int:
    return len(_howell_rows(ctx1, rows, ncols)[1])


def _search_unit_combination(basis_mod_p: Sequence[RMatrix], m: int, seed: int):
    """Find z over some F_(q^k) with det(sum z_i Mbar_i) != 0.

    Returns (k, z, embedding) or None when the determinant polynomial is zero.
    """
    res = basis_mod_p[0].ctx
    d = len(basis_mod_p)
    k = 1
    while res.q ** k <= m:
        k += 1
    rng = random.Random(seed)
    for deg in range(1, k + 1):
        emb = extend(res, deg)
        big = emb.target
        mats = [[[emb(x) for x in row] for row in B.data] for B in basis_mod_p]
        qk = big.q
        exhaustive = qk ** d <= SWEEP_CAP
        if deg < k and not exhaustive:
            continue

        def det_nonzero(z):
            acc = [[big.zero] * m for _ in range(m)]
            for zi, Mi in zip(z, mats):
                if any(zi):
                    for r in range(m):
                        for s in range(m):
                            if any(Mi[r][s]):
                                acc[r][s] = big.add(acc[r][s], big.mul(zi, Mi[r][s]))
            return _field_rank(big, acc, m) == m

        if exhaustive:
            elems = list(big.residue_elements())
            for z in itertools.product(elems, repeat=d):
                if det_nonzero(z):
                    return deg, z, emb
        else:
            # a nonzero det polynomial has degree <= m < q^k
            trials = math.ceil(40 / math.log2(qk / m))
            for _ in range(trials):
                z = tuple(big.random_residue(rng) for _ in range(d))
                if det_nonzero(z):
                    return deg, z, emb
    return None


def isomorphism_witness(L: Lattice, M: Lattice, seed: int = 0) -> RMatrix | None:
    """A unit intertwiner L -> M, or None when none exists.

    The witness lives over the residue extension where a nonvanishing point
    of det(sum Z_i Mbar_i) was found (the base context when possible).
    """
    if not same_order(L.order, M.order):
        raise ContextMismatch("lattices over different orders")
    if L.rank != M.rank:
        return None
    if L.rank == 0:
        return RMatrix(L.ctx, [], 0)
    hb = hom_basis(L, M)
    if hb.rank == 0:
        return None
    found = _search_unit_combination([B.residue() for B in hb.basis], L.rank, seed)
    if found is None:
        return None
    deg, z, emb = found
    if deg == 1:
        ctx = L.ctx
        lifts = [ctx.teichmuller(zi) for zi in z]
        return hb.combination(lifts)
    full = extend(L.ctx, deg)
    big = full.target
    lifts = [big.teichmuller(zi) for zi in z]
    mats = [[[full(x) for x in row] for row in B.data] for B in hb.basis]
    acc = [[big.zero] * M.rank for _ in range(L.rank)]
    for c, Mi in zip(lifts, mats):
        for r in range(L.rank):
            for s in range(M.rank):
                acc[r][s] = big.add(acc[r][s], big.mul(c, Mi[r][s]))
    return RMatrix(big, acc, M.rank)


def is_isomorphic(L: Lattice, M: Lattice, seed: int = 0) -> bool:
    if L is M:
        return True
    return isomorphism_witness(L, M, seed) is not None


# -- constructions ---------------------------------------------------------------------

def direct_sum(L: Lattice, M: Lattice) -> Lattice:
    if not same_order(L.order, M.order):
        raise ContextMismatch("lattices over different orders")
    return Lattice(L.order, L.rank + M.rank, tuple(A.block_diag(B) for A, B in zip(L.matrices, M.matrices)))


@dataclass(frozen=True, eq=False)
class FiniteModule:
    """L/p^c L with its action of Lambda/p^c Lambda."""

    parent: Lattice
    exponent: int
    ctx: ArithmeticContext
    matrices: tuple[RMatrix, ...]

    @property
    def rank(self) -> int:
        return self.parent.rank

    @property
    def size(self) -> int:
        return self.ctx.q ** (self.rank * self.exponent)

    def act(self, v: Sequence[Raw], index: int) -> list[Raw]:
        ctx = self.ctx
        out = [ctx.zero] * self.rank
        for a, row in zip(v, self.matrices[index].data):
            if any(a):
                for j, x in enumerate(row):
                    out[j] = ctx.add(out[j], ctx.mul(a, x))
        return out


def reduce_mod(L: Lattice, c: int) -> FiniteModule:
    N = L.ctx.N
    if not 1 <= c <= N:
        raise ValidationError(f"exponent must lie in [1, {N}]")
    ctx_c = L.ctx.with_precision(c)
    return FiniteModule(L, c, ctx_c, tuple(M.at_context(ctx_c) for M in L.matrices))
