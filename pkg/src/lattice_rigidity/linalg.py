"""Linear algebra over the chain ring R_N = W_N(F_q).

Every nonzero element of R_N is p^v times a unit, so elimination always
pivots on an entry of minimal valuation.  The canonical form is the Howell
form: echelon rows with pivots normalized to p^v, entries above a pivot
reduced to canonical representatives mod p^v, and the extra rows
p^(N-v) * row that make row-span membership decidable by reduction.

Kernels are computed as left kernels (row vectors v with v A = 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ContextMismatch, NotUnit, PrecisionExhausted, ValidationError
from .witt import ArithmeticContext, Raw, RingElement


class RMatrix:
    """Immutable matrix over R_N, stored row-major as raw coefficient tuples."""

    __slots__ = ("ctx", "nrows", "ncols", "data")

    def __init__(self, ctx: ArithmeticContext, data: Sequence[Sequence[Raw]], ncols: int | None = None):
        self.ctx = ctx
        self.data = tuple(tuple(row) for row in data)
        self.nrows = len(self.data)
        if ncols is None:
            if not self.data:
                raise ValidationError("column count required for a matrix with no rows")
            ncols = len(self.data[0])
        self.ncols = ncols
        if any(len(row) != ncols for row in self.data):
            raise ValidationError("ragged matrix rows")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_entries(cls, ctx: ArithmeticContext, rows: Sequence[Sequence], ncols: int | None = None) -> "RMatrix":
        """Rows of integers, coefficient lists or RingElements."""

        def conv(x):
            if isinstance(x, RingElement):
                if x.ctx != ctx:
                    raise ContextMismatch("entry from a different context")
                return x.coeffs
            return ctx.decode(x)

        return cls(ctx, [[conv(x) for x in row] for row in rows], ncols)

    @classmethod
    def identity(cls, ctx: ArithmeticContext, n: int) -> "RMatrix":
        z, o = ctx.zero, ctx.one
        return cls(ctx, [[o if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, ctx: ArithmeticContext, nrows: int, ncols: int) -> "RMatrix":
        return cls(ctx, [[ctx.zero] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def diagonal(cls, ctx: ArithmeticContext, entries: Sequence) -> "RMatrix":
        n = len(entries)
        rows = [[0] * n for _ in range(n)]
        for i, e in enumerate(entries):
            rows[i][i] = e
        return cls.from_entries(ctx, rows, n)

    # -- access ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij) -> RingElement:
        i, j = ij
        return RingElement(self.ctx, self.data[i][j])

    def row(self, i: int) -> tuple:
        return self.data[i]

    def __eq__(self, other):
        if not isinstance(other, RMatrix):
            return NotImplemented
        return self.ctx == other.ctx and self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.ctx, self.shape, self.data))

    def __repr__(self):
        if self.ctx.m == 1:
            body = [[x[0] for x in row] for row in self.data]
        else:
            body = [[list(x) for x in row] for row in self.data]
        return f"RMatrix({body}, p={self.ctx.p}, N={self.ctx.N})"

    def to_ints(self) -> list[list]:
        """Entries as plain integers when m == 1, coefficient lists otherwise."""
        if self.ctx.m == 1:
            return [[x[0] for x in row] for row in self.data]
        return [[list(x) for x in row] for row in self.data]

    def encode(self) -> dict:
        return {
            "rows": self.nrows,
            "cols": self.ncols,
            "entries": [list(x) for row in self.data for x in row],
        }

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "RMatrix"):
        if self.ctx != other.ctx:
            raise ContextMismatch("matrices from different contexts")

    def __add__(self, other: "RMatrix") -> "RMatrix":
        self._check(other)
        add = self.ctx.add
        return RMatrix(self.ctx, [[add(a, b) for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.ncols)

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        self._check(other)
        sub = self.ctx.sub
        return RMatrix(self.ctx, [[sub(a, b) for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.ncols)

    def __neg__(self) -> "RMatrix":
        neg = self.ctx.neg
        return RMatrix(self.ctx, [[neg(a) for a in r] for r in self.data], self.ncols)

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        self._check(other)
        if self.ncols != other.nrows:
            raise ValidationError(f"shape mismatch {self.shape} @ {other.shape}")
        ctx = self.ctx
        return RMatrix(ctx, _matmul(ctx, self.data, other.data, other.ncols), other.ncols)

    def scale(self, c) -> "RMatrix":
        c = c.coeffs if isinstance(c, RingElement) else self.ctx.decode(c)
        mul = self.ctx.mul
        return RMatrix(self.ctx, [[mul(c, a) for a in r] for r in self.data], self.ncols)

    def transpose(self) -> "RMatrix":
        return RMatrix(self.ctx, [list(col) for col in zip(*self.data)] if self.nrows else [], self.nrows)

    def is_zero(self) -> bool:
        return not any(any(x) for row in self.data for x in row)

    def at_context(self, ctx: ArithmeticContext) -> "RMatrix":
        """Reduce to lower precision or canonically lift to higher precision."""
        conv = ctx.convert
        src = self.ctx
        return RMatrix(ctx, [[conv(x, src) for x in row] for row in self.data], self.ncols)

    def residue(self) -> "RMatrix":
        return self.at_context(self.ctx.residue_field)

    def block_diag(self, other: "RMatrix") -> "RMatrix":
        self._check(other)
        z = self.ctx.zero
        rows = [list(r) + [z] * other.ncols for r in self.data]
        rows += [[z] * self.ncols + list(r) for r in other.data]
        return RMatrix(self.ctx, rows, self.ncols + other.ncols)

    def flatten(self) -> tuple:
        return tuple(x for row in self.data for x in row)


def _matmul(ctx: ArithmeticContext, A, B, ncols: int):
    add, mul = ctx.add, ctx.mul
    zero = ctx.zero
    out = []
    for arow in A:
        acc = [zero] * ncols
        for k, a in enumerate(arow):
            if not any(a):
                continue
            brow = B[k]
            for j, b in enumerate(brow):
                if any(b):
                    acc[j] = add(acc[j], mul(a, b))
        out.append(acc)
    return out


# -- Howell form -----------------------------------------------------------------

def _howell_rows(ctx: ArithmeticContext, rows, ncols: int):
    """Howell form of the row span; returns (nonzero rows, [(col, pivot valuation)])."""
    N = ctx.N
    val, mul, sub = ctx.val, ctx.mul, ctx.sub
    work = [list(r) for r in rows if any(any(x) for x in r)]
    result: list[list] = []
    pivots: list[tuple[int, int]] = []
    for j in range(ncols):
        if not work:
            break
        best, bv = -1, N
        for idx, r in enumerate(work):
            x = r[j]
            if any(x):
                v = val(x)
                if v < bv:
                    best, bv = idx, v
                    if v == 0:
                        break
        if best < 0:
            continue
        prow = work.pop(best)
        uinv = ctx.inv(ctx.div_p(prow[j], bv))
        prow[j:] = [mul(uinv, x) for x in prow[j:]]
        survivors = []
        for r in work:
            a = r[j]
            if any(a):
                t = ctx.div_p(a, bv)
                r[j:] = [sub(x, mul(t, y)) for x, y in zip(r[j:], prow[j:])]
            if any(any(x) for x in r[j + 1:]):
                survivors.append(r)
        if bv > 0:
            extra = [ctx.mul_p(x, N - bv) for x in prow]
            if any(any(x) for x in extra):
                survivors.append(extra)
        work = survivors
        result.append(prow)
        pivots.append((j, bv))
    # reduce entries above each pivot to canonical representatives mod p^v
    for i, (j, v) in enumerate(pivots):
        prow = result[i]
        for r in range(i):
            a = result[r][j]
            rem = ctx.mod_p(a, v)
            if rem != a:
                t = ctx.div_p(sub(a, rem), v)
                row = result[r]
                row[j:] = [sub(x, mul(t, y)) for x, y in zip(row[j:], prow[j:])]
    return result, pivots


@dataclass(frozen=True)
class HowellForm:
    """Canonical row form H = U A.

    H has exactly ``A.ncols`` rows: the nonzero Howell rows followed by zero
    rows.  U has the same number of rows as H and ``A.nrows`` columns; it is
    square and unimodular only when A is square and of full rank over K.
    """

    H: RMatrix
    U: RMatrix
    pivots: tuple[tuple[int, int], ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def howell_form(A: RMatrix) -> HowellForm:
    ctx = A.ctx
    r, c = A.shape
    z, o = ctx.zero, ctx.one
    aug = [list(row) + [o if k == i else z for k in range(r)] for i, row in enumerate(A.data)]
    rows, pivots = _howell_rows(ctx, aug, c + r)
    h_rows, u_rows, h_piv = [], [], []
    for row, (j, v) in zip(rows, pivots):
        if j < c:
            h_rows.append(row[:c])
            u_rows.append(row[c:])
            h_piv.append((j, v))
    while len(h_rows) < c:
        h_rows.append([z] * c)
        u_rows.append([z] * r)
    return HowellForm(RMatrix(ctx, h_rows, c), RMatrix(ctx, u_rows, r), tuple(h_piv))


def howell_basis(ctx: ArithmeticContext, rows, ncols: int) -> tuple[list[list], list[tuple[int, int]]]:
    """Howell rows (nonzero only) of an arbitrary generating set."""
    return _howell_rows(ctx, rows, ncols)


def reduce_vector(ctx: ArithmeticContext, rows, pivots, v) -> tuple[list, bool]:
    """Reduce v modulo a Howell basis; returns (remainder, v lies in the span)."""
    v = list(v)
    sub, mul = ctx.sub, ctx.mul
    for row, (j, pv) in zip(rows, pivots):
        a = v[j]
        if not any(a):
            continue
        if ctx.val(a) < pv:
            return v, False
        t = ctx.div_p(a, pv)
        v[j:] = [sub(x, mul(t, y)) for x, y in zip(v[j:], row[j:])]
    return v, not any(any(x) for x in v)


def span_contains(ctx: ArithmeticContext, rows, pivots, v) -> bool:
    return reduce_vector(ctx, rows, pivots, v)[1]


# -- kernels -----------------------------------------------------------------------

def _kernel_split(A: RMatrix):
    ctx = A.ctx
    r, c = A.shape
    z, o = ctx.zero, ctx.one
    aug = [list(row) + [o if k == i else z for k in range(r)] for i, row in enumerate(A.data)]
    rows, pivots = _howell_rows(ctx, aug, c + r)
    a_piv = [(j, v) for j, v in pivots if j < c]
    kern = [(row[c:], v) for row, (j, v) in zip(rows, pivots) if j >= c]
    return a_piv, kern


def kernel_module(A: RMatrix) -> RMatrix:
    """Howell basis of the full left kernel {v : v A = 0 mod p^N}, torsion included."""
    _, kern = _kernel_split(A)
    return RMatrix(A.ctx, [row for row, _ in kern], A.nrows)


def certificate_bound(ctx: ArithmeticContext) -> int:
    return ctx.N // 2


def _smith_rows(ctx: ArithmeticContext, rows, ncols: int):
    """Full-pivoting elimination tracking row operations.

    Returns (pivot valuations, rows of the transform P whose image in A is
    zero).  P is unimodular, so those rows are primitive and independent mod p.
    """
    N = ctx.N
    val, mul, sub = ctx.val, ctx.mul, ctx.sub
    r = len(rows)
    z, o = ctx.zero, ctx.one
    work = [list(row) + [o if k == i else z for k in range(r)] for i, row in enumerate(rows)]
    cols = list(range(ncols))
    vals = []
    while work and cols:
        bi, bj, bv = -1, -1, N
        for i, row in enumerate(work):
            for j in cols:
                x = row[j]
                if any(x):
                    v = val(x)
                    if v < bv:
                        bi, bj, bv = i, j, v
                        if v == 0:
                            break
            if bv == 0:
                break
        if bi < 0:
            break
        prow = work.pop(bi)
        for row in work:
            a = row[bj]
            if any(a):
                t = ctx.div_p(mul(a, ctx.inv(ctx.div_p(prow[bj], bv))), bv)
                for k in range(len(row)):
                    if any(prow[k]):
                        row[k] = sub(row[k], mul(t, prow[k]))
        cols.remove(bj)
        vals.append(bv)
    return vals, [row[ncols:] for row in work]


def unit_echelon(ctx: ArithmeticContext, rows, ncols: int) -> list[list]:
    """Reduced echelon form with unit pivots equal to 1.

    Canonical for the span of rows that are independent mod p (a free direct
    summand); raises ValueError otherwise.
    """
    work = [list(r) for r in rows]
    done: list[list] = []
    for j in range(ncols):
        idx = next((i for i, r in enumerate(work) if any(r[j]) and ctx.val(r[j]) == 0), None)
        if idx is None:
            continue
        prow = work.pop(idx)
        inv = ctx.inv(prow[j])
        prow = [ctx.mul(inv, x) for x in prow]
        for r in work + done:
            a = r[j]
            if any(a):
                r[:] = [ctx.sub(x, ctx.mul(a, y)) for x, y in zip(r, prow)]
        done.append(prow)
    if any(any(any(x) for x in r) for r in work):
        raise ValueError("rows are not independent mod p")
    return done


def kernel(A: RMatrix, saturate: bool = False) -> RMatrix:
    """Saturated basis of the O-kernel of A, read off at precision N.

    Rows v of the result satisfy v A = 0 mod p^N, are independent mod p, and
    are in reduced echelon form with unit pivots.  The computation is
    certified when every elementary divisor of A below p^N has valuation
    <= N // 2; otherwise PrecisionExhausted is raised.  (Howell pivots are
    not used for this: completion rows p^(N-v) r produce pivots of valuation
    close to N that say nothing about A over O.)

    Kernel elements that only exist because of the truncation (p^(N-d) times
    a row whose image is p^d) are torsion.  They raise PrecisionExhausted
    unless ``saturate`` is set, in which case they are dropped.
    """
    ctx = A.ctx
    vals, free = _smith_rows(ctx, A.data, A.ncols)
    bound = certificate_bound(ctx)
    worst = max(vals, default=0)
    if worst > bound:
        raise PrecisionExhausted(
            f"elementary divisor valuation {worst} exceeds certificate bound {bound} at precision {ctx.N}"
        )
    if not saturate and any(v > 0 for v in vals):
        raise PrecisionExhausted("kernel has torsion elements at this precision (pass saturate=True to drop them)")
    return RMatrix(ctx, unit_echelon(ctx, free, A.nrows), A.nrows)


def pivot_profile(A: RMatrix) -> tuple[tuple[int, int], ...]:
    return tuple(_howell_rows(A.ctx, A.data, A.ncols)[1])


def rank_mod_p(A: RMatrix) -> int:
    """Rank of the reduction of A over the residue field."""
    R = A.residue()
    return len(_howell_rows(R.ctx, R.data, R.ncols)[1])


# -- determinants, Smith invariants, inverses -----------------------------------------

def _smith_vals(ctx: ArithmeticContext, rows, ncols: int) -> list[int]:
    N = ctx.N
    val, mul, sub = ctx.val, ctx.mul, ctx.sub
    A = [list(r) for r in rows]
    n = min(len(A), ncols)
    cols = list(range(ncols))
    out = []
    while A and cols:
        bi, bj, bv = -1, -1, N
        for i, r in enumerate(A):
            for j in cols:
                x = r[j]
                if any(x):
                    v = val(x)
                    if v < bv:
                        bi, bj, bv = i, j, v
                        if v == 0:
                            break
            if bv == 0:
                break
        if bi < 0:
            break
        prow = A.pop(bi)
        uinv = ctx.inv(ctx.div_p(prow[bj], bv))
        prow = [mul(uinv, x) for x in prow]
        for r in A:
            a = r[bj]
            if any(a):
                t = ctx.div_p(a, bv)
                for k in cols:
                    r[k] = sub(r[k], mul(t, prow[k]))
        # column operations against the pivot only touch the removed row
        cols.remove(bj)
        out.append(bv)
    out += [N] * (n - len(out))
    return sorted(out)


def smith_invariants(A: RMatrix) -> list[int]:
    """Elementary-divisor valuations, sorted; N stands for a zero divisor (>= N)."""
    return _smith_vals(A.ctx, A.data, A.ncols)


def det_valuation(A: RMatrix) -> int:
    """nu_p(det A), capped at N (N means det = 0 at this precision)."""
    if A.nrows != A.ncols:
        raise ValidationError("det_valuation needs a square matrix")
    vals = smith_invariants(A)
    N = A.ctx.N
    if any(v >= N for v in vals):
        return N
    return min(N, sum(vals))


def invert(A: RMatrix) -> RMatrix:
    ctx = A.ctx
    n = A.nrows
    if A.ncols != n:
        raise ValidationError("invert needs a square matrix")
    z, o = ctx.zero, ctx.one
    mul, sub = ctx.mul, ctx.sub
    M = [list(row) + [o if k == i else z for k in range(n)] for i, row in enumerate(A.data)]
    for j in range(n):
        piv = next((i for i in range(j, n) if ctx.val(M[i][j]) == 0), None)
        if piv is None:
            raise NotUnit("matrix is not invertible over R_N")
        M[j], M[piv] = M[piv], M[j]
        uinv = ctx.inv(M[j][j])
        M[j] = [mul(uinv, x) for x in M[j]]
        for i in range(n):
            if i != j and any(M[i][j]):
                t = M[i][j]
                M[i] = [sub(x, mul(t, y)) for x, y in zip(M[i], M[j])]
    return RMatrix(ctx, [row[n:] for row in M], n)
