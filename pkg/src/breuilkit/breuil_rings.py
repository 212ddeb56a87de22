"""Truncated Breuil rings.

``RElem`` lives in the ring of invariants of the Breuil ring under the descent
action, truncated at p-adic precision ``N`` and divided-power level ``M``.
Elements are stored in the basis ``delta_k = E(u)^k / k!`` with
``E(u) = u^e + p``, so that

    delta_j * delta_k = C(j+k, j) * delta_{j+k}

and every filtration ideal is read off coefficientwise.  With ``N = 1`` and
``M = p`` the same ring is ``F_p[u^e]/(u^{ep})`` (``delta_k -> t^k/k!``), which
is how the mod-p algorithms reuse this code.

``SBarElem`` is an element of ``F[u]/(u^{ep})`` with coefficients in ``F_p``
or in the dual numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb, factorial

from .coeff import (
    BreuilError,
    ContextMismatch,
    Dual,
    Fq,
    NonUnit,
    PrimeCtx,
    ZpN,
    factorial_split,
    inv_mod,
)


class NotDivisible(BreuilError, ArithmeticError):
    pass


class PrecisionLoss(BreuilError, ArithmeticError):
    pass


class RRing:
    """Parameters ``(ctx, N, M)`` of a truncated ring and its cached tables."""

    def __init__(self, ctx: PrimeCtx, N: int, M: int):
        if N < 1:
            raise ValueError("N must be positive")
        if not 1 <= M <= ctx.p:
            raise ValueError(f"need 1 <= M <= p, got M={M}")
        self.ctx = ctx
        self.p = ctx.p
        self.N = N
        self.M = M
        self.mod = ctx.p**N
        # _binom[j][k] = C(j+k, j)
        self._binom = [[comb(j + k, j) % self.mod for k in range(M)] for j in range(M)]
        self._inv = [0] + [inv_mod(k, self.mod, self.p) for k in range(1, M)]
        self._fact = [factorial(k) % self.mod for k in range(M)]
        self._inv_fact = [inv_mod(f, self.mod, self.p) for f in self._fact]

    def __eq__(self, other):
        return isinstance(other, RRing) and (self.ctx, self.N, self.M) == (
            other.ctx,
            other.N,
            other.M,
        )

    def __hash__(self):
        return hash((self.ctx, self.N, self.M))

    def __repr__(self):
        return f"RRing(p={self.p}, N={self.N}, M={self.M})"

    @property
    def is_modp(self) -> bool:
        return self.N == 1 and self.M == self.p

    def elem(self, coeffs) -> RElem:
        c = [int(x) % self.mod for x in coeffs]
        if len(c) > self.M:
            c = c[: self.M]
        c += [0] * (self.M - len(c))
        return RElem(self, tuple(c))

    def const(self, c: int) -> RElem:
        return self.elem([c])

    @cached_property
    def zero(self) -> RElem:
        return self.elem([])

    @cached_property
    def one(self) -> RElem:
        return self.elem([1])

    def delta(self, k: int) -> RElem:
        c = [0] * self.M
        if k < self.M:
            c[k] = 1
        return RElem(self, tuple(c))

    @cached_property
    def E(self) -> RElem:
        return self.delta(1)

    @cached_property
    def ue(self) -> RElem:
        """``u^e = E(u) - p``."""
        return self.elem([-self.p, 1])

    def ue_power(self, k: int) -> RElem:
        return _ue_powers(self, k)

    @cached_property
    def phi_E(self) -> RElem:
        """``phi(E(u)) = u^{pe} + p = p! * gamma_p + p``."""
        v, unit = factorial_split(self.p, self.ctx, self.N)
        gp = gamma_to_delta(self.p, self.ctx, self.N, self.M)
        scale = pow(self.p, v, self.mod) * unit.value
        return RElem(self, tuple(c * scale % self.mod for c in gp.coeffs)) + self.p

    @cached_property
    def phi_table(self) -> tuple[tuple[int, ...], ...]:
        """Coefficient tuples of ``phi(delta_k) = phi(E)^k / k!``."""
        rows = [self.one.coeffs]
        power = self.one
        for k in range(1, self.M):
            power = power * self.phi_E
            rows.append(tuple(c * self._inv_fact[k] % self.mod for c in power.coeffs))
        return tuple(rows)

    def from_t_poly(self, coeffs) -> RElem:
        """Mod-p only: the element ``sum c_k t^k`` with ``t = u^e``."""
        assert self.N == 1
        return self.elem([int(c) * self._fact[k] for k, c in enumerate(coeffs) if k < self.M])

    def to_t_poly(self, x: RElem) -> list[int]:
        assert self.N == 1
        return [c * self._inv_fact[k] % self.mod for k, c in enumerate(x.coeffs)]


_UE_CACHE: dict = {}


def _ue_powers(ring: RRing, k: int) -> RElem:
    key = (ring, k)
    hit = _UE_CACHE.get(key)
    if hit is None:
        hit = ring.one
        for _ in range(k):
            hit = hit * ring.ue
        _UE_CACHE[key] = hit
    return hit


class RElem:
    """``sum_k c_k delta_k`` modulo ``(p^N, Fil^M)``."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: RRing, coeffs: tuple[int, ...]):
        self.ring = ring
        self.coeffs = coeffs

    def _other(self, other):
        if isinstance(other, RElem):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ContextMismatch(f"{self.ring} vs {other.ring}")
            return other.coeffs
        if isinstance(other, int):
            return (other,) + (0,) * (self.ring.M - 1)
        if isinstance(other, ZpN):
            return (other.value,) + (0,) * (self.ring.M - 1)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        m = self.ring.mod
        return RElem(self.ring, tuple((a + b) % m for a, b in zip(self.coeffs, o)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        m = self.ring.mod
        return RElem(self.ring, tuple((a - b) % m for a, b in zip(self.coeffs, o)))

    def __rsub__(self, other):
        return -(self - other)

    def __neg__(self):
        m = self.ring.mod
        return RElem(self.ring, tuple(-a % m for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, ZpN)):
            s = other if isinstance(other, int) else other.value
            m = self.ring.mod
            return RElem(self.ring, tuple(a * s % m for a in self.coeffs))
        o = self._other(other)
        if o is None:
            return NotImplemented
        return RElem(self.ring, _mul_coeffs(self.ring, self.coeffs, o))

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        m = self.ring.mod
        return all((a - b) % m == 0 for a, b in zip(self.coeffs, o))

    def __hash__(self):
        return hash((self.ring, self.coeffs))

    def __repr__(self):
        terms = [f"{c}*d{k}" for k, c in enumerate(self.coeffs) if c]
        return "RElem(" + (" + ".join(terms) or "0") + ")"

    def __bool__(self):
        return any(self.coeffs)

    @property
    def c0(self) -> int:
        return self.coeffs[0]

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.ring.p != 0

    def is_constant(self, upto: int | None = None) -> bool:
        top = self.ring.M if upto is None else upto
        return not any(self.coeffs[1:top])

    def truncate(self, level: int) -> RElem:
        """Zero every coefficient of index ``>= level``."""
        c = self.coeffs[:level] + (0,) * (self.ring.M - min(level, self.ring.M))
        return RElem(self.ring, c[: self.ring.M])

    def project(self, top: int) -> RElem:
        """Keep only the components ``delta_0 .. delta_top``."""
        return self.truncate(top + 1)

    def eq_upto(self, other: RElem, level: int) -> bool:
        m = self.ring.mod
        return all((a - b) % m == 0 for a, b in zip(self.coeffs[:level], other.coeffs[:level]))

    def inverse(self) -> RElem:
        ring = self.ring
        m = ring.mod
        if not self.is_unit():
            raise NonUnit(f"{self!r} is not a unit")
        # work in the E-power basis, where this is a power series inversion
        d = [c * f % m for c, f in zip(self.coeffs, ring._inv_fact)]
        g0 = inv_mod(d[0], m, ring.p)
        g = [g0]
        for n in range(1, ring.M):
            s = 0
            for k in range(1, n + 1):
                if d[k]:
                    s += d[k] * g[n - k]
            g.append(-s * g0 % m)
        return RElem(ring, tuple(x * f % m for x, f in zip(g, ring._fact)))

    def reduce(self, N: int) -> RElem:
        """Image in the ring with the same ``M`` and smaller precision ``N``."""
        target = get_ring(self.ring.ctx, N, self.ring.M)
        return target.elem(self.coeffs)

    def encode(self) -> list[list[int]]:
        return [[k, c] for k, c in enumerate(self.coeffs) if c]


def _mul_coeffs(ring: RRing, a, b) -> tuple[int, ...]:
    M = ring.M
    B = ring._binom
    out = [0] * M
    nz_b = [(k, y) for k, y in enumerate(b) if y]
    if not nz_b:
        return (0,) * M
    for j, x in enumerate(a):
        if x:
            Bj = B[j]
            lim = M - j
            for k, y in nz_b:
                if k >= lim:
                    break
                out[j + k] += x * y * Bj[k]
    m = ring.mod
    return tuple(v % m for v in out)


_RINGS: dict = {}


def get_ring(ctx: PrimeCtx, N: int, M: int) -> RRing:
    """Shared ``RRing`` instances, so tables are built once per parameter set."""
    key = (ctx, N, M)
    ring = _RINGS.get(key)
    if ring is None:
        ring = _RINGS[key] = RRing(ctx, N, M)
    return ring


def modp_ring(ctx: PrimeCtx) -> RRing:
    """``F_p[u^e]/(u^{ep})`` realised as the truncated ring with ``N=1, M=p``."""
    return get_ring(ctx, 1, ctx.p)


def decode_r(ring: RRing, pairs) -> RElem:
    c = [0] * ring.M
    for k, v in pairs:
        if k < ring.M:
            c[k] = (c[k] + int(v)) % ring.mod
    return RElem(ring, tuple(c))


def r_mul(x: RElem, y: RElem) -> RElem:
    return x * y


def gamma_to_delta(i: int, ctx: PrimeCtx, N: int, M: int) -> RElem:
    """``u^{ie}/i!`` expanded as ``sum_k delta_k (-p)^{i-k}/(i-k)!``."""
    if i < 0:
        raise ValueError("i must be non-negative")
    ring = get_ring(ctx, N, M)
    p, mod = ctx.p, ring.mod
    c = [0] * M
    for k in range(min(i, M - 1) + 1):
        j = i - k
        v, unit = factorial_split(j, ctx, N)
        if j - v < 0:
            raise PrecisionLoss(f"negative valuation for j={j}")
        sign = -1 if j % 2 else 1
        c[k] = sign * pow(p, j - v, mod) * inv_mod(unit.value, mod, p) % mod
    return RElem(ring, tuple(c))


def frobenius_r(x: RElem) -> RElem:
    """``phi(sum c_k delta_k) = sum c_k phi(E)^k / k!``."""
    ring = x.ring
    table = ring.phi_table
    M, mod = ring.M, ring.mod
    out = [0] * M
    for k, c in enumerate(x.coeffs):
        if c:
            row = table[k]
            for j in range(M):
                if row[j]:
                    out[j] += c * row[j]
    return RElem(ring, tuple(v % mod for v in out))


def divide_by_E(x: RElem, k: int = 1) -> RElem:
    """Exact division by ``E(u)^k``.

    Uses ``E * delta_j = (j+1) * delta_{j+1}``.  The top ``k`` coefficients of
    the result are unknown (set to zero): the result is only meaningful
    modulo ``Fil^{M-k}``.
    """
    ring = x.ring
    c = list(x.coeffs)
    mod, M = ring.mod, ring.M
    for _ in range(k):
        if c[0] % mod:
            raise NotDivisible(f"{x!r} is not divisible by E^{k}")
        c = [c[j + 1] * ring._inv[j + 1] % mod for j in range(M - 1)] + [0]
    return RElem(ring, tuple(c))


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class IdealTag:
    """A coefficientwise ideal of the truncated ring.

    kinds:
      ``R``      the whole ring,
      ``Fil``    ``Fil^m``,
      ``I``      ``p Fil^1``,
      ``J``      ``(p Fil^2, Fil^3)``,
      ``pFil``   ``(p Fil^m, Fil^{m+1})``; ``m = 0`` gives ``(p, Fil^1)``,
      ``IJp``    ``J + I + p R`` (the target of Frobenius on twisted entries).
    Every kind is multiplied by ``p^n``.
    """

    kind: str
    m: int = 0
    n: int = 0

    def min_val(self, k: int) -> int | None:
        """Required valuation of ``c_k``; ``None`` means ``c_k`` must vanish."""
        n = self.n
        if self.kind == "R":
            return n
        if self.kind == "Fil":
            return None if k < self.m else n
        if self.kind == "I":
            return None if k == 0 else n + 1
        if self.kind == "J":
            return None if k < 2 else (n + 1 if k == 2 else n)
        if self.kind == "pFil":
            return None if k < self.m else (n + 1 if k == self.m else n)
        if self.kind == "IJp":
            return n + 1 if k <= 2 else n
        raise ValueError(f"unknown ideal kind {self.kind!r}")

    def __str__(self):
        base = {
            "R": "R",
            "Fil": f"Fil^{self.m}",
            "I": "I",
            "J": "J",
            "pFil": f"(p Fil^{self.m}, Fil^{self.m + 1})",
            "IJp": "(J + I + pR)",
        }[self.kind]
        return base if self.n == 0 else f"p^{self.n}*{base}"


def Fil(m: int, n: int = 0) -> IdealTag:
    return IdealTag("Fil", m, n)


def ideal_member(x: RElem, tag: IdealTag, upto: int | None = None) -> bool:
    """Coefficientwise membership; only indices ``< upto`` are inspected."""
    ring = x.ring
    top = ring.M if upto is None else min(upto, ring.M)
    for k in range(top):
        c = x.coeffs[k]
        req = tag.min_val(k)
        if req is None or req >= ring.N:
            if c % ring.mod:
                return False
        elif c % ring.p**req:
            return False
    return True


def split_p_power(x: RElem, n: int) -> tuple[RElem, RElem, RElem]:
    """Write ``x`` in ``p^{n+1} R`` as ``c + i + j`` with ``c`` constant in
    ``p^{n+1}``, ``i`` in ``p^n I`` and ``j`` in ``p^n J``; raises if ``x`` is not
    in ``p^{n+1} R``."""
    ring = x.ring
    if not ideal_member(x, IdealTag("R", n=n + 1)):
        raise ValueError("element is not in p^(n+1) R")
    c = x.coeffs
    const = ring.elem([c[0]])
    i_part = ring.elem([0, c[1]] + [0] * (ring.M - 2)) if ring.M > 1 else ring.zero
    j_part = ring.elem([0, 0] + list(c[2:])) if ring.M > 2 else ring.zero
    return const, i_part, j_part


# ---------------------------------------------------------------------------
# F[u]/(u^{ep})


def _norm_coef(c, p):
    if isinstance(c, (Fq, Dual)):
        return c
    if isinstance(c, tuple):
        return Dual(c[0], c[1], p)
    return Fq(int(c), p)


class SBarElem:
    """Sparse element of ``F[u]/(u^{ep})`` (coefficients ``Fq`` or ``Dual``)."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: PrimeCtx, terms=None):
        self.ctx = ctx
        top = ctx.e * ctx.p
        clean = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for d, c in items:
                c = _norm_coef(c, ctx.p)
                if 0 <= d < top and c:
                    clean[d] = clean[d] + c if d in clean else c
                    if not clean[d]:
                        del clean[d]
        self.terms = clean

    @classmethod
    def monomial(cls, ctx: PrimeCtx, d: int, c=1) -> SBarElem:
        return cls(ctx, {d: c})

    @property
    def top(self) -> int:
        return self.ctx.e * self.ctx.p

    def _check(self, other):
        if other.ctx != self.ctx:
            raise ContextMismatch("SBarElem contexts differ")

    def __add__(self, other):
        if not isinstance(other, SBarElem):
            other = SBarElem(self.ctx, {0: other})
        self._check(other)
        t = dict(self.terms)
        for d, c in other.terms.items():
            t[d] = t[d] + c if d in t else c
        return SBarElem(self.ctx, t)

    __radd__ = __add__

    def __neg__(self):
        return SBarElem(self.ctx, {d: -c for d, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, SBarElem):
            other = SBarElem(self.ctx, {0: other})
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, SBarElem):
            c = _norm_coef(other, self.ctx.p)
            return SBarElem(self.ctx, {d: v * c for d, v in self.terms.items()})
        self._check(other)
        top = self.top
        out: dict = {}
        for d1, c1 in self.terms.items():
            for d2, c2 in other.terms.items():
                d = d1 + d2
                if d < top:
                    out[d] = out[d] + c1 * c2 if d in out else c1 * c2
        return SBarElem(self.ctx, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SBarElem):
            other = SBarElem(self.ctx, {0: other})
        return self.ctx == other.ctx and not (self - other).terms

    def __hash__(self):
        return hash(tuple(sorted((d, hash(c)) for d, c in self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "SBarElem(0)"
        return "SBarElem(" + " + ".join(f"{c!r}*u^{d}" for d, c in sorted(self.terms.items())) + ")"

    def coeff(self, d: int):
        return self.terms.get(d, Fq(0, self.ctx.p))

    def shift(self, k: int) -> SBarElem:
        """Multiply by ``u^k``."""
        return SBarElem(self.ctx, {d + k: c for d, c in self.terms.items()})

    def divide_u(self, k: int) -> SBarElem:
        """Divide by ``u^k``; the top ``k`` degrees of the quotient are left zero."""
        if any(d < k for d in self.terms):
            raise NotDivisible(f"not divisible by u^{k}")
        return SBarElem(self.ctx, {d - k: c for d, c in self.terms.items()})

    def low_part(self, k: int) -> SBarElem:
        """Terms of degree ``< k``."""
        return SBarElem(self.ctx, {d: c for d, c in self.terms.items() if d < k})

    def encode(self) -> list:
        out = []
        for d, c in sorted(self.terms.items()):
            out.append([d, [c.a, c.b] if isinstance(c, Dual) else c.value])
        return out


def decode_sbar(ctx: PrimeCtx, pairs) -> SBarElem:
    return SBarElem(ctx, [(int(d), tuple(c) if isinstance(c, list) else c) for d, c in pairs])


def sbar_mul(x: SBarElem, y: SBarElem) -> SBarElem:
    return x * y


def sbar_frobenius(x: SBarElem) -> SBarElem:
    """``u^d -> u^{pd}``; coefficients are fixed (prime field)."""
    p = x.ctx.p
    return SBarElem(x.ctx, {p * d: c for d, c in x.terms.items()})


def monodromy_s(x: SBarElem) -> SBarElem:
    """``N_S = -u d/du``: ``u^d -> -d u^d``."""
    return SBarElem(x.ctx, {d: c * (-d) for d, c in x.terms.items()})


def isotypic(x: SBarElem, c: int) -> SBarElem:
    """Component on which the descent action is through ``omega^c``."""
    e = x.ctx.e
    return SBarElem(x.ctx, {d: v for d, v in x.terms.items() if d % e == c % e})
