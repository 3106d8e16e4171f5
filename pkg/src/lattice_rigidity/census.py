"""Full-rank Lambda-sublattices of bounded colength and their isomorphism classes.

A sublattice L' <= L of colength l contains p^l L, so it is determined by its
image in L/p^N L whenever l < N.  It is stored as the Howell-canonical upper
triangular matrix B whose rows are an O-basis of L' in the coordinates of L.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from .errors import CapExceeded, NotStable, PrecisionExhausted, ValidationError
from .linalg import RMatrix, howell_basis, kernel_module, span_contains
from .orders import (
    ExtInvariants,
    Lattice,
    end_rank_mod_p,
    ext1_invariants,
    hom_basis,
    is_isomorphic,
    is_rigid,
    make_lattice,
)
from .witt import ArithmeticContext

SPIN_CAP = 1 << 16


@dataclass(frozen=True, eq=False)
class SublatticeBasis:
    parent: Lattice
    B: RMatrix

    @property
    def valuations(self) -> tuple[int, ...]:
        ctx = self.B.ctx
        return tuple(ctx.val(self.B.data[i][i]) for i in range(self.B.nrows))

    @property
    def colength(self) -> int:
        return sum(self.valuations)

    @property
    def key(self) -> tuple:
        return tuple(tuple(r) for r in self.B.data)

    def __eq__(self, other):
        return isinstance(other, SublatticeBasis) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def lattice(self, precision: int | None = None) -> Lattice:
        """L' as a lattice in the basis given by the rows of B.

        A higher ``precision`` recomputes the representation from the exact
        integer data of the parent.
        """
        N = precision or self.parent.ctx.N
        cache = self.__dict__.setdefault("_lattices", {})
        if N not in cache:
            parent = _lift(self.parent, N)
            cache[N] = sublattice_representation(parent, self.B.at_context(parent.ctx))
        return cache[N]

    def encode(self) -> dict:
        return {"basis": self.B.to_ints(), "valuations": list(self.valuations), "colength": self.colength}


def _lift(L: Lattice, N: int) -> Lattice:
    if N == L.ctx.N:
        return L
    cache = L.__dict__.setdefault("_lifts", {})
    if N not in cache:
        cache[N] = L.at_precision(N)
    return cache[N]


def certified(fn, N: int, attempts: int = 3):
    """Evaluate fn(precision) at N, doubling the precision on PrecisionExhausted."""
    for k in range(attempts):
        try:
            return fn(N << k)
        except PrecisionExhausted:
            if k == attempts - 1:
                raise


def _sort_key(S: SublatticeBasis):
    return (S.colength, S.valuations, S.B.to_ints())


def _canonical_rows(L: Lattice, rows) -> RMatrix:
    ctx = L.ctx
    m = L.rank
    H, piv = howell_basis(ctx, rows, m)
    if len(piv) < m:
        raise ValidationError("generators do not span a full-rank sublattice at this precision")
    if sum(v for _, v in piv) >= ctx.N:
        raise PrecisionExhausted(f"colength {sum(v for _, v in piv)} needs precision above {ctx.N}")
    return RMatrix(ctx, H[:m], m)


def _is_stable(L: Lattice, B: RMatrix) -> bool:
    ctx = L.ctx
    rows = [list(r) for r in B.data]
    piv = [(i, ctx.val(B.data[i][i])) for i in range(B.nrows)]
    for D in L.matrices:
        for r in (B @ D).data:
            if not span_contains(ctx, rows, piv, r):
                return False
    return True


def canonical_basis(B, parent: Lattice | None = None) -> SublatticeBasis:
    """Howell-canonical basis of the sublattice spanned by the rows of ``B``.

    ``B`` may be a SublatticeBasis or any generating set (rows in the
    coordinates of ``parent``).  Raises NotStable unless the span is
    Lambda-stable.
    """
    if isinstance(B, SublatticeBasis):
        parent, rows = B.parent, B.B.data
    else:
        if parent is None:
            raise ValidationError("a parent lattice is needed for a bare generating set")
        if not isinstance(B, RMatrix):
            B = RMatrix.from_entries(parent.ctx, B, parent.rank)
        rows = B.data
    if any(len(r) != parent.rank for r in rows):
        raise ValidationError("generator length must equal the lattice rank")
    H = _canonical_rows(parent, rows)
    if not _is_stable(parent, H):
        raise NotStable("row span is not stable under the order")
    return SublatticeBasis(parent, H)


def sublattice_representation(L: Lattice, B: RMatrix) -> Lattice:
    """The lattice with matrices B Delta(b) B^-1.

    B is upper triangular with diagonal p^v_i, so X B = B Delta is solved by
    back substitution.  Integer representatives of the input are taken as
    exact and the division is done at precision N + l, so the result is
    correct to precision N.
    """
    ctx = L.ctx
    m = L.rank
    vals = [ctx.val(B.data[i][i]) for i in range(m)]
    big = ctx.with_precision(ctx.N + sum(vals))
    Bb = B.at_context(big)
    mats = []
    for D in L.matrices:
        C = (Bb @ D.at_context(big)).data
        X = [[big.zero] * m for _ in range(m)]
        for i in range(m):
            for j in range(m):
                rhs = C[i][j]
                for k in range(j):
                    if any(X[i][k]) and any(Bb.data[k][j]):
                        rhs = big.sub(rhs, big.mul(X[i][k], Bb.data[k][j]))
                v = vals[j]
                if v:
                    if big.val(rhs) < v:
                        raise NotStable("row span is not stable under the order")
                    rhs = big.div_p(rhs, v)
                X[i][j] = rhs
        mats.append(RMatrix(big, X, m).at_context(ctx))
    return make_lattice(L.order, mats)


def _normalized_vectors(res: ArithmeticContext, m: int):
    elems = list(res.residue_elements())
    for lead in range(m):
        for tail in itertools.product(elems, repeat=m - lead - 1):
            yield [res.zero] * lead + [res.one] + list(tail)


def _spin(res: ArithmeticContext, mats, u) -> tuple[list, list]:
    """Smallest subspace containing u stable under u -> M u for each M (column action)."""
    m = len(u)
    basis, piv = howell_basis(res, [u], m)
    queue = [list(u)]
    while queue:
        v = queue.pop()
        for M in mats:
            w = [res.zero] * m
            for i in range(m):
                acc = res.zero
                for j in range(m):
                    if any(M[i][j]) and any(v[j]):
                        acc = res.add(acc, res.mul(M[i][j], v[j]))
                w[i] = acc
            if not span_contains(res, basis, piv, w):
                basis, piv = howell_basis(res, basis + [w], m)
                queue.append(w)
    return basis, piv


def maximal_sublattices(S: SublatticeBasis) -> list[SublatticeBasis]:
    """Maximal Lambda-sublattices of the sublattice S, in the coordinates of the parent.

    Maximal submodules W of V = L'/pL' are annihilators of minimal submodules
    of the dual module (column vectors with Delta acting on the left).
    """
    L = S.parent
    ctx = L.ctx
    m = L.rank
    res = ctx.with_precision(1)
    if res.q ** m > SPIN_CAP:
        raise CapExceeded(f"residue module of size {res.q}^{m} exceeds spin cap {SPIN_CAP}")
    Lp = S.lattice()
    mats = [[[res.convert(x, ctx) for x in row] for row in D.data] for D in Lp.matrices]
    cyclic = {}
    for u in _normalized_vectors(res, m):
        basis, _ = _spin(res, mats, u)
        key = tuple(tuple(r) for r in basis)
        cyclic.setdefault(key, basis)
    subspaces = list(cyclic.values())
    minimal = []
    for Sb in subspaces:
        piv = howell_basis(res, Sb, m)[1]
        if not any(len(T) < len(Sb) and all(span_contains(res, Sb, piv, t) for t in T) for T in subspaces):
            minimal.append(Sb)
    children = []
    for Sb in minimal:
        # W = {w : w . s = 0 for s in Sb}: left kernel of the columns Sb^T
        A = RMatrix(res, [[Sb[c][r] for c in range(len(Sb))] for r in range(m)], len(Sb))
        W = kernel_module(A).data
        gens = [[ctx.convert(x, res) for x in w] for w in W]
        Bl = S.B
        rows = [r for r in (RMatrix(ctx, gens, m) @ Bl).data] if gens else []
        rows += [[ctx.mul_p(x, 1) for x in r] for r in Bl.data]
        H = _canonical_rows(L, rows)
        children.append(SublatticeBasis(L, H))
    return children


def _root(L: Lattice) -> SublatticeBasis:
    return SublatticeBasis(L, RMatrix.identity(L.ctx, L.rank))


def enumerate_by_colength(L: Lattice, l_max: int) -> dict[int, list[SublatticeBasis]]:
    """All full-rank Lambda-sublattices of colength 0..l_max, by breadth-first descent."""
    N = L.ctx.N
    if l_max < 0:
        raise ValidationError("colength must be non-negative")
    if l_max >= N:
        raise PrecisionExhausted(f"colength {l_max} needs precision above {N}")
    levels: dict[int, set] = {k: set() for k in range(l_max + 1)}
    levels[0].add(_root(L))
    for k in range(l_max + 1):
        for S in sorted(levels[k], key=_sort_key):
            if k == l_max:
                break
            for child in maximal_sublattices(S):
                c = child.colength
                if c <= l_max:
                    levels[c].add(child)
    return {k: sorted(v, key=_sort_key) for k, v in levels.items()}


def enumerate_sublattices(L: Lattice, l: int) -> list[SublatticeBasis]:
    """Full-rank Lambda-sublattices of O-colength exactly ``l``, each once, canonical and sorted."""
    if l >= L.ctx.N:
        raise PrecisionExhausted(f"colength {l} needs precision above {L.ctx.N}")
    if l < 1:
        raise ValidationError("colength must be at least 1")
    return enumerate_by_colength(L, l)[l]


@dataclass
class IsoClass:
    representative: SublatticeBasis
    multiplicity: dict[int, int]
    rigid: bool
    end_rank: int
    end_rank_mod_p: int
    ext1: ExtInvariants
    members: list[SublatticeBasis] = field(default_factory=list, repr=False)

    def encode(self) -> dict:
        return {
            "representative": self.representative.encode(),
            "multiplicity": {str(k): v for k, v in sorted(self.multiplicity.items())},
            "rigid": self.rigid,
            "end_rank": self.end_rank,
            "end_rank_mod_p": self.end_rank_mod_p,
            "ext1": list(self.ext1.invariants),
        }


@dataclass
class CensusReport:
    parent: Lattice
    l_max: int
    classes: list[IsoClass]
    counts: dict[int, int]

    @property
    def rigid_classes(self) -> list[IsoClass]:
        return [c for c in self.classes if c.rigid]

    def encode(self) -> dict:
        return {
            "max_colength": self.l_max,
            "precision": self.parent.ctx.N,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "class_count": len(self.classes),
            "rigid_class_count": len(self.rigid_classes),
            "classes": [c.encode() for c in self.classes],
        }


def _invariants(Lp: Lattice):
    return hom_basis(Lp, Lp).rank, end_rank_mod_p(Lp), ext1_invariants(Lp, Lp), is_rigid(Lp)


def census_rigid(L0: Lattice, l_max: int, seed: int = 0) -> CensusReport:
    """Group all sublattices of colength <= l_max into isomorphism classes.

    Cheap invariants (End rank, its mod-p dimension, Ext^1) bucket the
    candidates; is_isomorphic decides within a bucket.
    """
    levels = enumerate_by_colength(L0, l_max)
    classes: list[IsoClass] = []
    buckets: dict[tuple, list[IsoClass]] = {}
    N = L0.ctx.N
    for k in sorted(levels):
        for S in levels[k]:
            er, erp, ext, rigid = certified(lambda n: _invariants(S.lattice(n)), N)
            key = (er, erp, ext.invariants)
            target = None
            for cls in buckets.get(key, []):
                rep = cls.representative
                if certified(lambda n: is_isomorphic(rep.lattice(n), S.lattice(n), seed), N):
                    target = cls
                    break
            if target is None:
                target = IsoClass(S, {}, rigid, er, erp, ext)
                buckets.setdefault(key, []).append(target)
                classes.append(target)
            target.multiplicity[k] = target.multiplicity.get(k, 0) + 1
            target.members.append(S)
    counts = {k: len(v) for k, v in levels.items()}
    return CensusReport(L0, l_max, classes, counts)
