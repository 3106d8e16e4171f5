"""Finite permutation groups, their group orders and permutation lattices.

Permutations act on the right: i^(gh) = (i^g)^h, so the product ``gh`` means
"first g, then h".  This matches right modules, where Delta(g) Delta(h) is
the matrix of v -> (v g) h.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CapExceeded, GroupTooLarge, NotSubgroup, ValidationError
from .linalg import RMatrix
from .orders import Lattice, Order, is_rigid, make_lattice, make_order
from .witt import ArithmeticContext, vp

GROUP_CAP = 64
ENVELOPE_CAP = 4096

Perm = tuple[int, ...]

CATALOG = {
    "C2": "(1 2)",
    "C3": "(1 2 3)",
    "C4": "(1 2 3 4)",
    "C2xC2": "(1 2)(3 4),(1 3)(2 4)",
    "S3": "(1 2),(1 2 3)",
    "D4": "(1 2 3 4),(1 3)",
}


def parse_permutation(text: str, degree: int | None = None) -> Perm:
    """Parse cycle notation such as ``(1 2)(3 4)`` (1-based points)."""
    text = text.strip()
    if not re.fullmatch(r"(\(\s*\d+(?:[\s,]+\d+)*\s*\))*|\(\s*\)", text):
        raise ValidationError(f"bad cycle notation: {text!r}")
    cycles = [[int(x) for x in re.split(r"[\s,]+", body.strip()) if x] for body in re.findall(r"\(([^)]*)\)", text)]
    points = [x for c in cycles for x in c]
    if any(x < 1 for x in points):
        raise ValidationError("points are numbered from 1")
    if len(points) != len(set(points)):
        raise ValidationError(f"cycles are not disjoint: {text!r}")
    n = max(points, default=1)
    if degree is not None:
        if n > degree:
            raise ValidationError(f"{text!r} moves points beyond degree {degree}")
        n = degree
    image = list(range(n))
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            image[a - 1] = b - 1
    return tuple(image)


def split_generators(text: str) -> list[str]:
    """Split ``"(1 2),(1 2 3)"`` at top-level commas."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur))
    return [s.strip() for s in out if s.strip()]


def cycle_string(perm: Perm) -> str:
    seen, parts = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x + 1)
            x = perm[x]
        parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts) or "()"


def _compose(g: Perm, h: Perm) -> Perm:
    return tuple(h[g[i]] for i in range(len(g)))


@dataclass(frozen=True, eq=False)
class GroupData:
    degree: int
    generators: tuple[Perm, ...]
    elements: tuple[Perm, ...]
    table: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, g: Perm) -> int:
        return self._lookup[g]

    @property
    def _lookup(self) -> dict:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {g: i for i, g in enumerate(self.elements)}
            self.__dict__["_lookup_cache"] = cache
        return cache

    def inverse(self, i: int) -> int:
        return next(j for j in range(self.order) if self.table[i][j] == 0)

    @property
    def generator_indices(self) -> tuple[int, ...]:
        return tuple(self.index(g) for g in self.generators)

    def labels(self) -> list[str]:
        return [cycle_string(g) if k else "e" for k, g in enumerate(self.elements)]


def make_group(generators: Iterable, cap: int = GROUP_CAP) -> GroupData:
    """Enumerate the group generated by permutations (cycle strings or image tuples)."""
    gens = list(generators)
    if isinstance(generators, str):
        gens = split_generators(generators)
    parsed = [parse_permutation(g) if isinstance(g, str) else tuple(g) for g in gens]
    degree = max((len(g) for g in parsed), default=1)
    perms = []
    for g in parsed:
        g = tuple(g) + tuple(range(len(g), degree))
        if sorted(g) != list(range(degree)):
            raise ValidationError(f"not a permutation: {g}")
        perms.append(g)
    identity = tuple(range(degree))
    elements = [identity]
    seen = {identity: 0}
    frontier = [identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in perms:
                y = _compose(x, g)
                if y not in seen:
                    seen[y] = len(elements)
                    elements.append(y)
                    if len(elements) > cap:
                        raise GroupTooLarge(f"group order exceeds cap {cap}")
                    nxt.append(y)
        frontier = nxt
    table = tuple(tuple(seen[_compose(x, y)] for y in elements) for x in elements)
    return GroupData(degree, tuple(perms), tuple(elements), table)


def subgroup(G: GroupData, generators: Iterable) -> frozenset[int]:
    """Element indices of the subgroup of G generated by the given permutations."""
    gens = generators
    if isinstance(generators, str):
        gens = split_generators(generators)
    idx = []
    for g in gens:
        perm = parse_permutation(g, G.degree) if isinstance(g, str) else tuple(g)
        perm = tuple(perm) + tuple(range(len(perm), G.degree))
        if len(perm) != G.degree or perm not in G._lookup:
            raise NotSubgroup(f"{g!r} is not an element of the group")
        idx.append(G.index(perm))
    members = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in idx:
                y = G.table[x][g]
                if y not in members:
                    members.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(members)


def _check_subgroup(G: GroupData, H: frozenset[int]):
    if 0 not in H or any(G.table[a][b] not in H for a in H for b in H):
        raise NotSubgroup("element set is not closed under multiplication")


def subgroups(G: GroupData) -> list[frozenset[int]]:
    """Every subgroup of G, sorted by (order, elements).

    Starts from the cyclic subgroups and closes under joins.
    """
    found = {_closure(G, (g,)) for g in range(G.order)}
    frontier = set(found)
    while frontier:
        new = set()
        for a in frontier:
            for b in found:
                j = _closure(G, tuple(a | b))
                if j not in found:
                    new.add(j)
        found |= new
        frontier = new
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _closure(G: GroupData, gens: Sequence[int]) -> frozenset[int]:
    members = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.table[x][g]
                if y not in members:
                    members.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(members)


@dataclass(frozen=True)
class DoubleCosetPartition:
    group: GroupData
    subgroup: frozenset[int]
    cosets: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.cosets)


def double_cosets(G: GroupData, H: frozenset[int] | Iterable) -> DoubleCosetPartition:
    H = _as_subgroup(G, H)
    remaining = set(range(G.order))
    cosets = []
    for g in range(G.order):
        if g not in remaining:
            continue
        dc = frozenset(G.table[G.table[h1][g]][h2] for h1 in H for h2 in H)
        remaining -= dc
        cosets.append(dc)
    return DoubleCosetPartition(G, H, tuple(cosets))


def _as_subgroup(G: GroupData, H) -> frozenset[int]:
    if isinstance(H, frozenset):
        _check_subgroup(G, H)
        return H
    return subgroup(G, H)


def right_cosets(G: GroupData, H) -> list[frozenset[int]]:
    H = _as_subgroup(G, H)
    out, seen = [], set()
    for g in range(G.order):
        if g in seen:
            continue
        coset = frozenset(G.table[h][g] for h in H)
        seen |= coset
        out.append(coset)
    return out


def group_order(G: GroupData, ctx: ArithmeticContext) -> Order:
    """The group order O G with basis the group elements."""
    n = G.order
    one = ctx.one
    products = [[{G.table[i][j]: one} for j in range(n)] for i in range(n)]
    identity = [one] + [ctx.zero] * (n - 1)
    return make_order(
        ctx,
        products,
        identity,
        labels=G.labels(),
        generators=G.generator_indices or (0,),
        ext_exponent=vp(n, ctx.p),
    )


def permutation_lattice(G: GroupData, H, ctx: ArithmeticContext, order: Order | None = None) -> Lattice:
    """O[H\\G]: basis the right cosets Hx, with g acting by Hx -> Hxg."""
    cosets = right_cosets(G, H)
    where = {}
    for c, coset in enumerate(cosets):
        for x in coset:
            where[x] = c
    order = order or group_order(G, ctx)
    n = len(cosets)
    one, zero = ctx.one, ctx.zero
    mats = []
    for g in range(G.order):
        rows = [[zero] * n for _ in range(n)]
        for c, coset in enumerate(cosets):
            x = min(coset)
            rows[c][where[G.table[x][g]]] = one
        mats.append(RMatrix(ctx, rows, n))
    return make_lattice(order, mats)


@dataclass(frozen=True, eq=False)
class EnvelopingOrder:
    """Lambda^e = Lambda^op (x) Lambda with Lambda as a right Lambda^e-lattice.

    Basis element (i, j) is b_i (x) b_j at index i * d + j and acts on
    Lambda by x . (b_i (x) b_j) = b_i x b_j.
    """

    base: Order
    order: Order
    diagonal: Lattice


def enveloping_order(base: Order, cap: int = ENVELOPE_CAP) -> EnvelopingOrder:
    ctx = base.ctx
    d = base.dim
    D = d * d
    if D > cap:
        raise CapExceeded(f"enveloping order dimension {D} exceeds cap {cap}")
    P = base.products
    products = []
    for i in range(d):
        for j in range(d):
            row = []
            for k in range(d):
                for l in range(d):
                    # (b_i (x) b_j)(b_k (x) b_l) = (b_k b_i) (x) (b_j b_l)
                    cell: dict = {}
                    for r, c1 in P[k][i].items():
                        for s, c2 in P[j][l].items():
                            cell[r * d + s] = ctx.mul(c1, c2)
                    row.append(cell)
            products.append(row)
    identity = [ctx.mul(a, b) for a in base.identity for b in base.identity]
    labels = [f"{a}|{b}" for a in base.labels for b in base.labels]
    gens = None
    if base.generators is not None:
        unit_index = _unit_index(base)
        if unit_index is not None:
            gens = tuple(sorted({g * d + unit_index for g in base.generators} | {unit_index * d + g for g in base.generators}))
    ext = 2 * base.ext_exponent if base.ext_exponent is not None else None
    env = make_order(ctx, products, identity, labels=labels, generators=gens, ext_exponent=ext)
    mats = []
    for i in range(d):
        for j in range(d):
            rows = []
            for s in range(d):
                # b_i b_s b_j
                left = P[i][s]
                acc: dict = {}
                for t, c1 in left.items():
                    for u, c2 in P[t][j].items():
                        acc[u] = ctx.add(acc.get(u, ctx.zero), ctx.mul(c1, c2))
                rows.append([acc.get(u, ctx.zero) for u in range(d)])
            mats.append(RMatrix(ctx, rows, d))
    return EnvelopingOrder(base, env, make_lattice(env, mats))


def _unit_index(order: Order) -> int | None:
    """Basis index of the identity when the identity is a basis vector."""
    nz = [k for k, e in enumerate(order.identity) if any(e)]
    if len(nz) == 1 and order.identity[nz[0]] == order.ctx.one:
        return nz[0]
    return None


def hochschild1_vanishes(base: Order) -> bool:
    """HH^1(Lambda) = Ext^1 over Lambda^e of Lambda with itself; zero iff that lattice is rigid."""
    return is_rigid(enveloping_order(base).diagonal)
