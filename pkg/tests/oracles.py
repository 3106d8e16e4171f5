"""Reference computations that do not use the package.

Everything here works with Python integers and Fractions over Z or Z/p^k,
so agreement with the library is evidence rather than a tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def vp(n: int, p: int) -> int:
    if n == 0:
        return 10**9
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# -- ranks ------------------------------------------------------------------

def rank_q(rows) -> int:
    """Rank over Q by Fraction elimination."""
    A = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for j in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][j] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(len(A)):
            if i != rank and A[i][j] != 0:
                f = A[i][j] / A[rank][j]
                A[i] = [a - f * b for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def rank_mod_p(rows, p: int) -> int:
    A = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for j in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][j]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][j], -1, p)
        A[rank] = [a * inv % p for a in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][j]:
                f = A[i][j]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


# -- groups -----------------------------------------------------------------

def perm_group(gens: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    n = len(gens[0])
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(g[x[i]] for i in range(n))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def parse_cycles(text: str, degree: int) -> tuple[int, ...]:
    img = list(range(degree))
    for body in text.replace(")", "").split("("):
        pts = [int(t) - 1 for t in body.split()]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
    return tuple(img)


def group_algebra_constants(elements):
    """c[i][j][k] for the group algebra with basis ``elements`` (x then y)."""
    idx = {g: i for i, g in enumerate(elements)}
    n = len(elements)
    d = len(elements[0])
    c = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            c[i][j][idx[tuple(y[x[t]] for t in range(d))]] = 1
    return c


def double_coset_count(elements, H) -> int:
    d = len(elements[0])

    def mul(x, y):
        return tuple(y[x[t]] for t in range(d))

    seen, count = set(), 0
    for g in elements:
        if g in seen:
            continue
        count += 1
        seen |= {mul(mul(h1, g), h2) for h1 in H for h2 in H}
    return count


# -- Hochschild H^1 by derivations --------------------------------------------

def hh1_vanishes(c, p: int) -> bool:
    """HH^1 of the Z_(p)-order with integer structure constants c.

    Derivations D (d x d matrices, D(b_i) = sum_k D[i][k] b_k) solve
    D(b_i b_j) = D(b_i) b_j + b_i D(b_j).  Inner derivations ad(b_s) span a
    sublattice of the (saturated) derivation lattice of the same rank r.
    They are equal over Z_(p) iff the inner ones stay of rank r mod p.
    """
    d = len(c)
    nvar = d * d
    eqs = []
    for i in range(d):
        for j in range(d):
            for t in range(d):
                row = [0] * nvar
                # sum_k c[i][j][k] D[k][t]
                for k in range(d):
                    row[k * d + t] += c[i][j][k]
                # - sum_k D[i][k] c[k][j][t] - sum_k D[j][k] c[i][k][t]
                for k in range(d):
                    row[i * d + k] -= c[k][j][t]
                    row[j * d + k] -= c[i][k][t]
                eqs.append(row)
    r = nvar - rank_q(eqs)
    inner = []
    for s in range(d):
        # ad(b_s)(b_i) = b_s b_i - b_i b_s
        inner.append([c[s][i][k] - c[i][s][k] for i in range(d) for k in range(d)])
    return rank_q(inner) == r and rank_mod_p(inner, p) == r


# -- sublattices ------------------------------------------------------------

def _solve_upper(B, C):
    """X with X B = C over Q, B upper triangular."""
    m = len(B)
    X = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            s = Fraction(C[i][j]) - sum(X[i][k] * B[k][j] for k in range(j))
            X[i][j] = s / B[j][j]
    return X


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def stable_triangular_bases(mats, p: int, l: int):
    """All canonical upper triangular B with diagonal p^v, sum v = l, entries above
    the diagonal in [0, p^(v_col)), such that B Delta B^-1 is p-integral."""
    m = len(mats[0])
    out = []
    for vs in itertools.product(range(l + 1), repeat=m):
        if sum(vs) != l:
            continue
        slots = [(i, j) for i in range(m) for j in range(i + 1, m)]
        ranges = [range(p ** vs[j]) for _, j in slots]
        for vals in itertools.product(*ranges):
            B = [[0] * m for _ in range(m)]
            for i in range(m):
                B[i][i] = p ** vs[i]
            for (i, j), v in zip(slots, vals):
                B[i][j] = v
            ok = True
            for D in mats:
                X = _solve_upper(B, _matmul(B, D))
                if any(vp(x.denominator, p) > 0 for row in X for x in row):
                    ok = False
                    break
            if ok:
                out.append(B)
    return out


# -- generic valuation ------------------------------------------------------

def min_valuation_over_lifts(terms, point, p: int, l: int, N: int) -> int:
    """min over all y in (Z/p^N)^n with y = x^ mod p^l of v_p(f(y)), capped at N.

    ``terms`` is a list of (exponents, integer coefficient); ``point`` gives
    the zero-tail lifts x^ as integers (for m = 1 these are Teichmueller sums).
    """
    mod = p ** N
    best = N
    n = len(point)
    for tail in itertools.product(range(p ** (N - l)), repeat=n):
        y = [(x + p**l * t) % mod for x, t in zip(point, tail)]
        val = 0
        for e, c in terms:
            t = c
            for yi, k in zip(y, e):
                t *= yi**k
            val += t
        val %= mod
        best = min(best, vp(val, p) if val else N)
    return best


def teichmuller_int(a: int, p: int, N: int) -> int:
    """Teichmueller lift of a in F_p to Z/p^N by iterating x -> x^p."""
    mod = p**N
    x = a % p
    for _ in range(N + 1):
        x = pow(x, p, mod)
    return x


def zero_tail_lift(digits, p: int, N: int) -> int:
    """sum p^i tau(x_i) for prime field digits (Frobenius is trivial on F_p)."""
    return sum(p**i * teichmuller_int(d, p, N) for i, d in enumerate(digits)) % p**N


def witt_digits_int(x: int, p: int, N: int) -> list[int]:
    """Witt components of x in Z/p^N (m = 1) by repeated Teichmueller subtraction."""
    out = []
    r = x % p**N
    for i in range(N):
        d = r % p
        out.append(d)
        r = ((r - teichmuller_int(d, p, N - i)) % p ** (N - i)) // p
    return out


def min_valuation_over_quadratic_lifts(terms, digits, p: int, l: int, N: int, modulus=(1, 1)) -> int:
    """Like min_valuation_over_lifts, but lifts range over Z/p^N[t]/(t^2 + c1 t + c0),
    the unramified quadratic extension (for p = 2 the default modulus is t^2 + t + 1).

    ``digits`` are prime-field digits of each coordinate; elements are pairs (a, b) = a + b t.
    """
    c0, c1 = modulus
    mod = p**N

    def mul(x, y):
        a, b = x
        c, d = y
        # t^2 = -c1 t - c0
        bd = b * d
        return ((a * c - c0 * bd) % mod, (a * d + b * c - c1 * bd) % mod)

    def power(x, k):
        out = (1, 0)
        for _ in range(k):
            out = mul(out, x)
        return out

    def val(x):
        return min(vp(x[0], p) if x[0] else N, vp(x[1], p) if x[1] else N)

    base = [(zero_tail_lift(d, p, N), 0) for d in digits]
    n = len(base)
    pl = p**l
    tails = list(itertools.product(range(p ** (N - l)), repeat=2))
    best = N
    for choice in itertools.product(tails, repeat=n):
        y = [((b[0] + pl * t[0]) % mod, (b[1] + pl * t[1]) % mod) for b, t in zip(base, choice)]
        acc = (0, 0)
        for e, c in terms:
            term = (c % mod, 0)
            for yi, k in zip(y, e):
                term = mul(term, power(yi, k))
            acc = ((acc[0] + term[0]) % mod, (acc[1] + term[1]) % mod)
        best = min(best, val(acc))
    return best
