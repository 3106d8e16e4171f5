"""Naive and generic valuations of polynomials at truncated Witt points.

For f in O[X_1..X_n] and a point x of W_l(k)^n, the generic valuation is the
smallest p-valuation of f over all lifts of x.  It equals the naive valuation
(minimum coefficient valuation) of f(x^ + p^l Z) as a polynomial in Z, where
x^ is the zero-tail lift of x.  The expansion is exact over R_N, so any
value below N is exact; a vanishing expansion means "at least N" and raises
PrecisionExhausted.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from math import comb
from typing import Mapping, Sequence

from .errors import CapExceeded, ContextMismatch, PrecisionExhausted, ValidationError
from .witt import (
    ArithmeticContext,
    Embedding,
    Raw,
    RingElement,
    WittDigits,
    extend,
    from_witt_digits,
)

ENUMERATION_CAP = 1 << 16
MAX_EXTENSION_DEGREE = 12

Exponents = tuple[int, ...]


@dataclass(frozen=True)
class PolynomialO:
    """A polynomial over R_N; ``terms`` maps exponent vectors to nonzero raw coefficients."""

    ctx: ArithmeticContext
    n: int
    terms: Mapping[Exponents, Raw]

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != self.n or any(x < 0 for x in e):
                raise ValidationError(f"exponent vector {e} does not match {self.n} variables")
            if any(c):
                clean[e] = tuple(c)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def from_terms(cls, ctx: ArithmeticContext, n: int, terms) -> "PolynomialO":
        """Build from (exponents, coefficient encoding) pairs, summing repeats."""
        acc: dict = {}
        for e, c in terms:
            e = tuple(e)
            acc[e] = ctx.add(acc.get(e, ctx.zero), c if isinstance(c, tuple) else ctx.decode(c))
        return cls(ctx, n, acc)

    @classmethod
    def constant(cls, ctx: ArithmeticContext, n: int, c) -> "PolynomialO":
        return cls.from_terms(ctx, n, [((0,) * n, c)])

    @classmethod
    def variable(cls, ctx: ArithmeticContext, n: int, i: int) -> "PolynomialO":
        return cls.from_terms(ctx, n, [(tuple(int(k == i) for k in range(n)), 1)])

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "PolynomialO"):
        if self.ctx != other.ctx or self.n != other.n:
            raise ContextMismatch("polynomials over different rings")

    def __add__(self, other: "PolynomialO") -> "PolynomialO":
        self._check(other)
        return PolynomialO.from_terms(self.ctx, self.n, list(self.terms.items()) + list(other.terms.items()))

    def __mul__(self, other: "PolynomialO") -> "PolynomialO":
        self._check(other)
        ctx = self.ctx
        acc: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = ctx.add(acc.get(e, ctx.zero), ctx.mul(c1, c2))
        return PolynomialO(ctx, self.n, acc)

    def evaluate(self, point: Sequence[Raw]) -> Raw:
        ctx = self.ctx
        if len(point) != self.n:
            raise ValidationError(f"expected {self.n} coordinates")
        acc = ctx.zero
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = ctx.mul(t, ctx.pow(x, k))
            acc = ctx.add(acc, t)
        return acc

    def embed(self, emb: Embedding) -> "PolynomialO":
        if emb.source != self.ctx:
            raise ContextMismatch("embedding does not start at this context")
        return PolynomialO(emb.target, self.n, {e: emb(c) for e, c in self.terms.items()})

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"exponents": list(e), "coefficient": self.ctx.encode(c)} for e, c in self.terms.items()],
        }

    @classmethod
    def from_dict(cls, ctx: ArithmeticContext, data: Mapping) -> "PolynomialO":
        try:
            n = int(data["n"])
            terms = [(t["exponents"], t["coefficient"]) for t in data["terms"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed polynomial record: {exc}") from exc
        return cls.from_terms(ctx, n, terms)

    @classmethod
    def random(cls, ctx: ArithmeticContext, n: int, degree: int, rng: random.Random, nterms: int = 3) -> "PolynomialO":
        exps = [e for d in range(degree + 1) for e in _compositions(d, n)]
        terms = [(rng.choice(exps), ctx.random(rng)) for _ in range(nterms)]
        return cls.from_terms(ctx, n, terms)


def _compositions(d: int, n: int):
    if n == 1:
        yield (d,)
        return
    for k in range(d + 1):
        for rest in _compositions(d - k, n - 1):
            yield (k,) + rest


@dataclass(frozen=True)
class WittPoint:
    """A point of W_l(k)^n: one WittDigits vector of length l per coordinate."""

    ctx: ArithmeticContext
    coordinates: tuple[WittDigits, ...]

    def __post_init__(self):
        ls = {c.l for c in self.coordinates}
        if len(ls) > 1:
            raise ValidationError("all coordinates need the same number of digits")
        if any(c.ctx != self.ctx for c in self.coordinates):
            raise ContextMismatch("coordinates from a different context")
        if self.l > self.ctx.N:
            raise PrecisionExhausted(f"{self.l} digits exceed precision {self.ctx.N}")

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def l(self) -> int:
        return self.coordinates[0].l if self.coordinates else 0

    @classmethod
    def from_ints(cls, ctx: ArithmeticContext, coords: Sequence, l: int | None = None) -> "WittPoint":
        """Each coordinate is a digit or a list of digits (packed ints), zero-padded to l digits."""
        rows = [list(c) if isinstance(c, (list, tuple)) else [c] for c in coords]
        if l is None:
            l = max((len(r) for r in rows), default=0)
        if any(len(r) > l for r in rows):
            raise ValidationError(f"coordinate has more than {l} digits")
        return cls(ctx, tuple(WittDigits.from_ints(ctx, r + [0] * (l - len(r))) for r in rows))

    def lift(self) -> list[Raw]:
        return [from_witt_digits(c).coeffs for c in self.coordinates]

    def embed(self, emb: Embedding) -> "WittPoint":
        res_emb = extend(self.ctx.residue_field, emb.target.m // self.ctx.m)
        return WittPoint(
            emb.target,
            tuple(WittDigits(emb.target, tuple(res_emb(d) for d in c.digits)) for c in self.coordinates),
        )

    def to_dict(self) -> dict:
        return {"n": self.n, "l": self.l, "digits": [[self.ctx.residue_to_int(d) for d in c.digits] for c in self.coordinates]}


def naive_valuation(f: PolynomialO) -> int:
    """Minimum coefficient valuation; N (meaning "at least N") for the zero polynomial."""
    return min((f.ctx.val(c) for c in f.terms.values()), default=f.ctx.N)


def expand_at(f: PolynomialO, x: WittPoint) -> PolynomialO:
    """f(x^ + p^l Z) as a polynomial in Z over R_N."""
    if x.n != f.n:
        raise ValidationError(f"point has {x.n} coordinates, polynomial has {f.n} variables")
    if x.ctx != f.ctx:
        raise ContextMismatch("point and polynomial over different contexts")
    ctx = f.ctx
    l = x.l
    base = x.lift()
    pl = ctx.mul_p(ctx.one, l)
    # (x_i + p^l Z_i)^e = sum_k C(e, k) x_i^(e-k) p^(lk) Z_i^k
    cache: dict = {}

    def binomial_terms(i: int, e: int):
        key = (i, e)
        if key not in cache:
            out = []
            for k in range(e + 1):
                c = ctx.mul(ctx.scale(ctx.pow(base[i], e - k), comb(e, k)), ctx.pow(pl, k))
                if any(c):
                    out.append((k, c))
            cache[key] = out
        return cache[key]

    acc: dict = {}
    for e, c in f.terms.items():
        partial = {(): c}
        for i, ei in enumerate(e):
            nxt: dict = {}
            for prefix, pc in partial.items():
                for k, bc in binomial_terms(i, ei):
                    key = prefix + (k,)
                    nxt[key] = ctx.add(nxt.get(key, ctx.zero), ctx.mul(pc, bc))
            partial = nxt
        for key, pc in partial.items():
            acc[key] = ctx.add(acc.get(key, ctx.zero), pc)
    return PolynomialO(ctx, f.n, acc)


def generic_valuation(f: PolynomialO, x: WittPoint) -> int:
    """nu_(p,x)(f); raises PrecisionExhausted when the answer is only known to be >= N."""
    g = expand_at(f, x)
    if g.is_zero():
        raise PrecisionExhausted(f"generic valuation is at least the precision {f.ctx.N}")
    return naive_valuation(g)


def variety_membership(f: PolynomialO, x: WittPoint, r: int) -> bool:
    """Whether nu_(p,x)(f) >= r."""
    if r < 0:
        raise ValidationError("threshold must be non-negative")
    try:
        return generic_valuation(f, x) >= r
    except PrecisionExhausted:
        if r <= f.ctx.N:
            return True
        raise


@dataclass(frozen=True)
class WitnessLift:
    """Teichmueller witness z over the residue extension of the given degree."""

    z: tuple[RingElement, ...]
    degree: int
    valuation: int
    searched: str

    @property
    def ctx(self) -> ArithmeticContext:
        return self.z[0].ctx if self.z else None

    def encode(self) -> dict:
        return {
            "z": [e.encode() for e in self.z],
            "extension_degree": self.degree,
            "valuation": self.valuation,
            "search": self.searched,
        }


def _reduced(g: PolynomialO, v: int) -> dict:
    """(g / p^v) mod p as {exponents: residue element}."""
    ctx = g.ctx
    out = {}
    for e, c in g.terms.items():
        if ctx.val(c) == v:
            out[e] = ctx.residue(ctx.div_p(c, v))
    return out


def _eval_residue(res: ArithmeticContext, terms: dict, z: Sequence[Raw]) -> Raw:
    acc = res.zero
    for e, c in terms.items():
        t = c
        for zi, k in zip(z, e):
            if k:
                t = res.mul(t, res.pow(zi, k))
        acc = res.add(acc, t)
    return acc


def witness_lift(f: PolynomialO, x: WittPoint, seed: int = 0) -> WitnessLift:
    """A lift z with nu_p(f(x^ + p^l z)) equal to the generic valuation.

    Extension degrees are tried in increasing order; points are enumerated
    when there are at most 2^16 of them and sampled (seeded) otherwise.
    """
    g = expand_at(f, x)
    if g.is_zero():
        raise PrecisionExhausted(f"generic valuation is at least the precision {f.ctx.N}")
    v = naive_valuation(g)
    gbar = _reduced(g, v)
    ctx = f.ctx
    res = ctx.residue_field
    n = f.n
    d = max(1, g.degree)
    rng = random.Random(seed)
    for k in range(1, MAX_EXTENSION_DEGREE + 1):
        emb = extend(res, k)
        big = emb.target
        terms = {e: emb(c) for e, c in gbar.items()}
        Q = big.q
        found = None
        if Q ** n <= ENUMERATION_CAP:
            how = "enumerated"
            for z in itertools.product(list(big.residue_elements()), repeat=n):
                if any(_eval_residue(big, terms, z)):
                    found = z
                    break
        elif Q > d:
            how = "sampled"
            trials = math.ceil(40 / math.log2(Q / d))
            for _ in range(trials):
                z = tuple(big.random_residue(rng) for _ in range(n))
                if any(_eval_residue(big, terms, z)):
                    found = z
                    break
        else:
            continue
        if found is not None:
            full = extend(ctx, k).target
            return WitnessLift(tuple(RingElement(full, full.teichmuller(zi)) for zi in found), k, v, how)
    raise CapExceeded(f"no witness found up to extension degree {MAX_EXTENSION_DEGREE}")


def valuation_at_lift(f: PolynomialO, x: WittPoint, z: Sequence[RingElement]) -> int:
    """nu_p(f(x^ + p^l z)), computed in the context of z (capped at N)."""
    if not z:
        raise ValidationError("empty lift")
    target = z[0].ctx
    k = target.m // f.ctx.m
    emb = extend(f.ctx, k)
    F = f.embed(emb) if k > 1 else f
    X = x.embed(emb) if k > 1 else x
    base = X.lift()
    point = [target.add(b, target.mul_p(zi.coeffs, x.l)) for b, zi in zip(base, z)]
    return target.val(F.evaluate(point))
