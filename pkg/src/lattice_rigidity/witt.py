"""Truncated Witt rings ``W_N(F_q)`` and their Witt-digit coordinates.

Elements live in the Galois ring ``Z[x]/(p^N, f)`` where ``f`` is monic of
degree ``m`` and irreducible mod ``p``; this ring is isomorphic to
``W_N(F_{p^m})``.  Witt coordinates are only a conversion layer:

    x = sum_i p^i * teich(x_i^(p^-i))

Internally an element is a tuple of ``m`` integers in ``[0, p^N)`` (the
coefficients of ``1, x, ..., x^(m-1)``).  The residue field ``F_q`` is the same
construction at ``N = 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import sympy

from .errors import CapExceeded, ContextMismatch, NotPrime, NotUnit, PrecisionExhausted, ValidationError

Raw = tuple

ROOT_SEARCH_CAP = 1 << 20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# -- polynomials over F_p, coefficient lists low-to-high ---------------------

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    a = _fp_trim(list(a))
    b = _fp_trim(list(b))
    inv_lead = pow(b[-1], -1, p)
    quo = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        quo[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _fp_trim(a)
    return quo, a


def _fp_mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b))
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    return _fp_divmod(prod, f, p)[1]


def _fp_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _fp_trim(list(a)), _fp_trim(list(b))
    while b:
        a, b = b, _fp_divmod(a, b, p)[1]
    return a


def fp_is_irreducible(f: Sequence[int], p: int) -> bool:
    """Ben-Or test: f has no factor of degree <= deg(f)/2."""
    f = _fp_trim([c % p for c in f])
    m = len(f) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    x = [0, 1]
    power = x
    for _ in range(m // 2):
        # power <- power^p mod f
        result = [1]
        base = power
        e = p
        while e:
            if e & 1:
                result = _fp_mulmod(result, base, f, p)
            base = _fp_mulmod(base, base, f, p)
            e >>= 1
        power = result
        diff = list(power) + [0] * max(0, 2 - len(power))
        diff[1] = (diff[1] - 1) % p
        if len(_fp_gcd(f, diff, p)) != 1:
            return False
    return True


def smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m (low-to-high)."""
    for low in itertools.product(range(p), repeat=m):
        f = list(low) + [1]
        if fp_is_irreducible(f, p):
            return tuple(f)
    raise RuntimeError(f"no irreducible polynomial of degree {m} over F_{p}")


@dataclass(frozen=True)
class ArithmeticContext:
    """The ring ``R_N = W_N(F_{p^m})`` with a fixed defining polynomial."""

    p: int
    m: int
    N: int
    modulus: tuple[int, ...]
    _memo: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "pN", self.p ** self.N)
        object.__setattr__(self, "q", self.p ** self.m)

    # -- construction and conversion ------------------------------------

    @property
    def zero(self) -> Raw:
        return (0,) * self.m

    @property
    def one(self) -> Raw:
        return (1 % self.pN,) + (0,) * (self.m - 1)

    def from_int(self, n: int) -> Raw:
        return (n % self.pN,) + (0,) * (self.m - 1)

    def from_coeffs(self, coeffs: Sequence[int]) -> Raw:
        if len(coeffs) != self.m:
            raise ValidationError(f"expected {self.m} coefficients, got {len(coeffs)}")
        return tuple(int(c) % self.pN for c in coeffs)

    def decode(self, obj) -> Raw:
        """Accept an integer or an array of m integers."""
        if isinstance(obj, bool):
            raise ValidationError(f"not a ring element encoding: {obj!r}")
        if isinstance(obj, int):
            return self.from_int(obj)
        if isinstance(obj, (list, tuple)) and all(isinstance(c, int) for c in obj):
            return self.from_coeffs(obj)
        raise ValidationError(f"not a ring element encoding: {obj!r}")

    def encode(self, a: Raw) -> list[int]:
        return list(a)

    def element(self, obj) -> "RingElement":
        if isinstance(obj, RingElement):
            if obj.ctx != self:
                raise ContextMismatch("element belongs to a different context")
            return obj
        return RingElement(self, self.decode(obj))

    def with_precision(self, N: int) -> "ArithmeticContext":
        if N == self.N:
            return self
        key = ("prec", N)
        if key not in self._memo:
            self._memo[key] = ArithmeticContext(self.p, self.m, N, self.modulus)
        return self._memo[key]

    @property
    def residue_field(self) -> "ArithmeticContext":
        return self.with_precision(1)

    def convert(self, a: Raw, source: "ArithmeticContext") -> Raw:
        """Reduce (or lift) an element of a context with the same modulus.

        Lifting uses centered representatives, so small signed integers
        (the usual input data) survive a precision increase exactly.
        """
        if source.modulus != self.modulus or source.p != self.p:
            raise ContextMismatch("contexts differ in more than precision")
        if source.N >= self.N:
            return tuple(c % self.pN for c in a)
        half, spN, pN = source.pN // 2, source.pN, self.pN
        return tuple((c - spN if c > half else c) % pN for c in a)

    def to_dict(self) -> dict:
        return {"p": self.p, "m": self.m, "N": self.N, "modulus": list(self.modulus)}

    # -- ring operations on raw tuples ----------------------------------

    def add(self, a: Raw, b: Raw) -> Raw:
        pN = self.pN
        return tuple((x + y) % pN for x, y in zip(a, b))

    def sub(self, a: Raw, b: Raw) -> Raw:
        pN = self.pN
        return tuple((x - y) % pN for x, y in zip(a, b))

    def neg(self, a: Raw) -> Raw:
        pN = self.pN
        return tuple((-x) % pN for x in a)

    def scale(self, a: Raw, n: int) -> Raw:
        pN = self.pN
        return tuple((x * n) % pN for x in a)

    def mul(self, a: Raw, b: Raw) -> Raw:
        pN = self.pN
        m = self.m
        if m == 1:
            return ((a[0] * b[0]) % pN,)
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        f = self.modulus
        for i in range(2 * m - 2, m - 1, -1):
            c = prod[i]
            if c:
                base = i - m
                for j in range(m):
                    prod[base + j] -= c * f[j]
        return tuple(c % pN for c in prod[:m])

    def pow(self, a: Raw, e: int) -> Raw:
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_zero(self, a: Raw) -> bool:
        return not any(a)

    def val(self, a: Raw) -> int:
        """p-adic valuation, N meaning zero at this precision."""
        p = self.p
        best = self.N
        for c in a:
            if c:
                v = 0
                while c % p == 0:
                    c //= p
                    v += 1
                if v < best:
                    best = v
                    if v == 0:
                        break
        return best

    def mul_p(self, a: Raw, k: int) -> Raw:
        """Multiply by p^k."""
        if k >= self.N:
            return self.zero
        return self.scale(a, self.p ** k)

    def div_p(self, a: Raw, k: int) -> Raw:
        """Exact division by p^k; requires val(a) >= k.

        The quotient is only determined modulo p^(N-k); the canonical
        representative with coefficients in [0, p^(N-k)) is returned.
        """
        pk = self.p ** k
        return tuple(c // pk for c in a)

    def mod_p(self, a: Raw, k: int) -> Raw:
        """Coefficientwise remainder mod p^k: canonical representative of a + p^k R."""
        pk = self.p ** k
        return tuple(c % pk for c in a)

    def inv(self, a: Raw) -> Raw:
        if self.val(a) != 0:
            raise NotUnit("element is not a unit")
        if self.m == 1:
            return (pow(a[0], -1, self.pN),)
        # unit group order is (q-1) q^(N-1)
        return self.pow(a, (self.q - 1) * self.q ** (self.N - 1) - 1)

    def residue(self, a: Raw) -> Raw:
        p = self.p
        return tuple(c % p for c in a)

    def teichmuller(self, a: Raw) -> Raw:
        """Multiplicative lift of a residue-field element (raw, coefficients < p)."""
        key = ("teich", a)
        hit = self._memo.get(key)
        if hit is None:
            # any lift raised to q^(N-1) is the fixed point of x -> x^q
            hit = self.pow(tuple(a), self.q ** (self.N - 1))
            self._memo[key] = hit
        return hit

    # -- residue field helpers (meaningful when N == 1) ------------------

    def residue_elements(self) -> Iterable[Raw]:
        return itertools.product(range(self.p), repeat=self.m)

    def residue_from_int(self, n: int) -> Raw:
        if not 0 <= n < self.q:
            raise ValidationError(f"residue encoding {n} out of range [0, {self.q})")
        digits = []
        for _ in range(self.m):
            n, r = divmod(n, self.p)
            digits.append(r)
        return tuple(digits)

    def residue_to_int(self, a: Raw) -> int:
        return sum(c * self.p ** i for i, c in enumerate(a))

    def random(self, rng) -> Raw:
        return tuple(rng.randrange(self.pN) for _ in range(self.m))

    def random_residue(self, rng) -> Raw:
        return tuple(rng.randrange(self.p) for _ in range(self.m))


def make_context(p: int, m: int = 1, N: int = 1, modulus: Sequence[int] | None = None) -> ArithmeticContext:
    if not isinstance(p, int) or not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if m < 1 or N < 1:
        raise ValidationError("need m >= 1 and N >= 1")
    if modulus is None:
        modulus = _cached_irreducible(p, m)
    else:
        modulus = tuple(int(c) for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise ValidationError(f"modulus must be monic of degree {m}")
        if not fp_is_irreducible(modulus, p):
            raise ValidationError("modulus is not irreducible mod p")
    return ArithmeticContext(p, m, N, tuple(modulus))


@lru_cache(maxsize=None)
def _cached_irreducible(p: int, m: int) -> tuple[int, ...]:
    return smallest_irreducible(p, m)


class RingElement:
    """An element of R_N with operator support."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: ArithmeticContext, coeffs: Raw):
        self.ctx = ctx
        self.coeffs = tuple(coeffs)

    def _other(self, other) -> Raw:
        if isinstance(other, RingElement):
            if other.ctx != self.ctx:
                raise ContextMismatch("ring elements from different contexts")
            return other.coeffs
        if isinstance(other, int):
            return self.ctx.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ctx, self.ctx.add(self.coeffs, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ctx, self.ctx.sub(self.coeffs, o))

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ctx, self.ctx.sub(o, self.coeffs))

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ctx, self.ctx.mul(self.coeffs, o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ctx, self.ctx.neg(self.coeffs))

    def __pow__(self, e: int):
        return RingElement(self.ctx, self.ctx.pow(self.coeffs, e))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.coeffs == self.ctx.from_int(other)
        if isinstance(other, RingElement):
            return self.ctx == other.ctx and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx, self.coeffs))

    def __repr__(self):
        if self.ctx.m == 1:
            return f"RingElement({self.coeffs[0]} mod {self.ctx.p}^{self.ctx.N})"
        return f"RingElement({list(self.coeffs)} in GR({self.ctx.p}^{self.ctx.N}, {self.ctx.m}))"

    def valuation(self) -> int:
        return self.ctx.val(self.coeffs)

    def is_unit(self) -> bool:
        return self.ctx.val(self.coeffs) == 0

    def inverse(self) -> "RingElement":
        return RingElement(self.ctx, self.ctx.inv(self.coeffs))

    def encode(self) -> list[int]:
        return list(self.coeffs)


def ring_add(a: RingElement, b: RingElement) -> RingElement:
    return a + b


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    return a * b


def teichmuller(a, ctx: ArithmeticContext) -> RingElement:
    """Teichmueller lift of a residue element (raw tuple or packed integer)."""
    if isinstance(a, int):
        a = ctx.residue_from_int(a)
    a = tuple(a)
    if len(a) != ctx.m or any(not 0 <= c < ctx.p for c in a):
        raise ValidationError(f"{a!r} is not a residue field element")
    return RingElement(ctx, ctx.teichmuller(a))


@dataclass(frozen=True)
class WittDigits:
    """The first l Witt components, each a residue-field element."""

    ctx: ArithmeticContext
    digits: tuple

    def __post_init__(self):
        p, m = self.ctx.p, self.ctx.m
        for d in self.digits:
            if len(d) != m or any(not 0 <= c < p for c in d):
                raise ValidationError(f"invalid Witt digit {d!r}")

    @property
    def l(self) -> int:
        return len(self.digits)

    @classmethod
    def from_ints(cls, ctx: ArithmeticContext, values: Sequence) -> "WittDigits":
        """Digits given as packed integers (base p) or coefficient lists."""
        out = []
        for v in values:
            out.append(ctx.residue_from_int(v) if isinstance(v, int) else tuple(v))
        return cls(ctx, tuple(out))

    def encode(self) -> list[list[int]]:
        return [list(d) for d in self.digits]


def to_witt_digits(x: RingElement, l: int) -> WittDigits:
    """rho_l: the first l Witt components of x."""
    ctx = x.ctx
    if l > ctx.N:
        raise PrecisionExhausted(f"{l} Witt digits requested at precision {ctx.N}")
    p = ctx.p
    res = ctx.residue_field
    r = x.coeffs
    digits = []
    for i in range(l):
        y = tuple(c % p for c in r)
        digits.append(res.pow(y, p ** i))
        if i + 1 < l:
            # r is only meaningful mod p^(N-i)
            mod = p ** (ctx.N - i)
            t = ctx.teichmuller(y)
            r = tuple(((c - tc) % mod) // p for c, tc in zip(r, t))
    return WittDigits(ctx, tuple(digits))


def from_witt_digits(d: WittDigits, ctx: ArithmeticContext | None = None) -> RingElement:
    """The lift of d whose Witt components beyond index l are zero."""
    ctx = ctx or d.ctx
    if d.l > ctx.N:
        raise PrecisionExhausted(f"{d.l} Witt digits do not fit precision {ctx.N}")
    p, m = ctx.p, ctx.m
    res = ctx.residue_field
    total = ctx.zero
    for i, xi in enumerate(d.digits):
        if not any(xi):
            continue
        # x_i^(p^-i) = x_i^(p^(m - i mod m))
        root = res.pow(tuple(xi), p ** ((m - i % m) % m))
        total = ctx.add(total, ctx.mul_p(ctx.teichmuller(root), i))
    return RingElement(ctx, total)


# -- ghost-polynomial oracle --------------------------------------------------

@dataclass(frozen=True)
class GhostPolynomials:
    """Witt addition and multiplication polynomials S_i, P_i in X_0..X_i, Y_0..Y_i."""

    index: int
    p: int
    S: sympy.Poly
    P: sympy.Poly

    @property
    def gens(self):
        return self.S.gens


@lru_cache(maxsize=None)
def _ghost_tables(p: int, n: int) -> tuple[list, list, tuple]:
    xs = sympy.symbols(f"X0:{n + 1}")
    ys = sympy.symbols(f"Y0:{n + 1}")
    gens = xs + ys

    def poly(e):
        return sympy.Poly(e, *gens, domain=sympy.ZZ)

    X = [poly(v) for v in xs]
    Y = [poly(v) for v in ys]

    def ghost(Z, k):
        acc = poly(0)
        for i in range(k + 1):
            acc = acc + Z[i] ** (p ** (k - i)) * p ** i
        return acc

    S, P = [], []
    for k in range(n + 1):
        s = ghost(X, k) + ghost(Y, k)
        t = ghost(X, k) * ghost(Y, k)
        for i in range(k):
            s = s - S[i] ** (p ** (k - i)) * p ** i
            t = t - P[i] ** (p ** (k - i)) * p ** i
        # exquo_ground raises unless every coefficient is divisible
        S.append(s.exquo_ground(p ** k))
        P.append(t.exquo_ground(p ** k))
    return S, P, gens


def ghost_oracle(i: int, p: int) -> GhostPolynomials:
    """Solve the ghost identities for the i-th Witt sum and product polynomials."""
    if i < 0:
        raise ValidationError("index must be non-negative")
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    S, P, _ = _ghost_tables(p, i)
    return GhostPolynomials(i, p, S[i], P[i])


@lru_cache(maxsize=None)
def _term_list(p: int, i: int, which: str) -> tuple:
    S, P, _ = _ghost_tables(p, i)
    poly = (S if which == "S" else P)[i]
    return tuple((int(c) % p, monom) for monom, c in poly.terms() if int(c) % p)


def _eval_terms(terms, values: Sequence[Raw], res: ArithmeticContext) -> Raw:
    powers: dict = {}
    acc = res.zero
    for coef, monom in terms:
        t = res.from_int(coef)
        for var, e in enumerate(monom):
            if e:
                key = (var, e)
                pw = powers.get(key)
                if pw is None:
                    pw = powers[key] = res.pow(values[var], e)
                t = res.mul(t, pw)
        acc = res.add(acc, t)
    return acc


def _digitwise(a: WittDigits, b: WittDigits, which: str) -> WittDigits:
    if a.ctx != b.ctx or a.l != b.l:
        raise ContextMismatch("Witt digit vectors must share context and length")
    ctx = a.ctx
    res = ctx.residue_field
    l = a.l
    out = []
    for i in range(l):
        # gens of the index-i table are X_0..X_i, Y_0..Y_i
        values = list(a.digits[: i + 1]) + list(b.digits[: i + 1])
        out.append(_eval_terms(_term_list(ctx.p, i, which), values, res))
    return WittDigits(ctx, tuple(out))


def digitwise_add(a: WittDigits, b: WittDigits) -> WittDigits:
    """Componentwise Witt addition through the ghost polynomials S_i."""
    return _digitwise(a, b, "S")


def digitwise_mul(a: WittDigits, b: WittDigits) -> WittDigits:
    """Componentwise Witt multiplication through the ghost polynomials P_i."""
    return _digitwise(a, b, "P")


# -- residue-degree extensions --------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    """Ring embedding R_N(m) -> R_N(m*k) sending x to a lifted root of the modulus."""

    source: ArithmeticContext
    target: ArithmeticContext
    generator_image: Raw

    def __call__(self, a: Raw) -> Raw:
        tgt = self.target
        if self.source.m == 1:
            return tgt.from_int(a[0])
        acc = tgt.zero
        for c in reversed(a):
            acc = tgt.add(tgt.mul(acc, self.generator_image), tgt.from_int(c))
        return acc

    def at_precision(self, N: int) -> "Embedding":
        return Embedding(
            self.source.with_precision(N),
            self.target.with_precision(N),
            self.target.with_precision(N).convert(self.generator_image, self.target),
        )


def _eval_int_poly(coeffs: Sequence[int], x: Raw, ctx: ArithmeticContext) -> Raw:
    acc = ctx.zero
    for c in reversed(coeffs):
        acc = ctx.add(ctx.mul(acc, x), ctx.from_int(c))
    return acc


@lru_cache(maxsize=None)
def extend(ctx: ArithmeticContext, k: int) -> Embedding:
    """Embed ctx into the context of residue degree m*k at the same precision."""
    if k < 1:
        raise ValidationError("extension degree must be >= 1")
    if k == 1:
        return Embedding(ctx, ctx, (0, 1) + (0,) * (ctx.m - 2) if ctx.m > 1 else (0,))
    target = make_context(ctx.p, ctx.m * k, ctx.N)
    if ctx.m == 1:
        return Embedding(ctx, target, target.zero)
    big_res = target.residue_field
    if big_res.q > ROOT_SEARCH_CAP:
        raise CapExceeded(f"root search over F_{big_res.q} exceeds cap")
    f = ctx.modulus
    root = next(
        (r for r in big_res.residue_elements() if big_res.is_zero(_eval_int_poly(f, r, big_res))),
        None,
    )
    if root is None:
        raise RuntimeError("modulus has no root in the extension field")
    df = [i * c for i, c in enumerate(f)][1:]
    theta = tuple(root)
    for _ in range(ctx.N):
        theta = target.sub(
            theta,
            target.mul(_eval_int_poly(f, theta, target), target.inv(_eval_int_poly(df, theta, target))),
        )
    return Embedding(ctx, target, theta)
