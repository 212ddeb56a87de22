"""Exact coefficient arithmetic.

Three coefficient systems are used throughout the package:

* ``ZpN``  -- residues modulo ``p**N`` (truncated p-adic integers),
* ``Fq``   -- the prime field ``F_p``,
* ``Dual`` -- dual numbers ``F_p[eps]/(eps^2)``, used for tangent computations.

All values are immutable and carry their modulus, so mixing incompatible
values raises ``ContextMismatch`` instead of silently reducing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial


class BreuilError(Exception):
    """Base class of every error raised by the package."""


class ContextMismatch(BreuilError, ValueError):
    pass


class NonUnit(BreuilError, ArithmeticError):
    pass


class GenericityViolation(BreuilError, ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeCtx:
    """A prime ``p`` together with the weight triple ``(a0, a1, a2)``.

    ``e = p - 1`` is the ramification index of ``Q_p((-p)^(1/e))``.
    The constructor accepts any odd prime so that genericity can be
    *reported* for small primes; routines that need strong genericity
    call :meth:`require_generic`.
    """

    p: int
    weights: tuple[int, int, int] = (0, 4, 8)

    def __post_init__(self):
        if not (self.p % 2 == 1 and is_prime(self.p)):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        w = tuple(int(a) for a in self.weights)
        if len(w) != 3:
            raise ValueError("weights must be a triple")
        object.__setattr__(self, "weights", w)
        a0, a1, a2 = w
        if not (0 <= a0 < a1 < a2 <= self.p - 2):
            raise ValueError(f"weights must satisfy 0 <= a0 < a1 < a2 <= p-2, got {w}")

    @property
    def e(self) -> int:
        return self.p - 1

    def bracket(self, i: int, j: int) -> int:
        """``[a_i - a_j]``: the representative in ``[0, e)`` of ``-(a_i - a_j)``."""
        return (self.weights[j] - self.weights[i]) % self.e

    @cached_property
    def brackets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.bracket(i, j) for j in range(3)) for i in range(3))

    def excess(self, i: int, k: int, j: int) -> int:
        """Number of ``u^e`` factors produced when twists ``(i,k)`` and ``(k,j)`` meet."""
        b = self.brackets
        q, r = divmod(b[i][k] + b[k][j] - b[i][j], self.e)
        assert r == 0 and q in (0, 1)
        return q

    @cached_property
    def excesses(self) -> tuple:
        return tuple(
            tuple(tuple(self.excess(i, k, j) for j in range(3)) for k in range(3))
            for i in range(3)
        )

    def require_generic(self) -> None:
        if not check_strong_genericity(self):
            raise GenericityViolation(
                f"weights {self.weights} are not strongly generic for p={self.p}"
            )


def check_strong_genericity(ctx: PrimeCtx) -> bool:
    a0, a1, a2 = ctx.weights
    return a1 - a0 > 3 and a2 - a1 > 3 and a2 - a0 < ctx.p - 4


# ---------------------------------------------------------------------------
# coefficient types


class ZpN:
    """A residue modulo ``p**N``."""

    __slots__ = ("value", "p", "N", "modulus")

    def __init__(self, value: int, p: int, N: int):
        self.p = p
        self.N = N
        self.modulus = p**N
        self.value = value % self.modulus

    def _coerce(self, other) -> int:
        if isinstance(other, ZpN):
            if other.p != self.p or other.N != self.N:
                raise ContextMismatch("ZpN precision or prime differ")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else ZpN(self.value + v, self.p, self.N)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else ZpN(self.value - v, self.p, self.N)

    def __rsub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else ZpN(v - self.value, self.p, self.N)

    def __mul__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else ZpN(self.value * v, self.p, self.N)

    __rmul__ = __mul__

    def __neg__(self):
        return ZpN(-self.value, self.p, self.N)

    def __eq__(self, other):
        if isinstance(other, int):
            return (self.value - other) % self.modulus == 0
        if isinstance(other, ZpN):
            return (self.p, self.N, self.value) == (other.p, other.N, other.value)
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.N, self.value))

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def valuation(self) -> int:
        """p-adic valuation, ``N`` for zero."""
        if self.value == 0:
            return self.N
        v, x = 0, self.value
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v

    def __repr__(self):
        return f"ZpN({self.value}, p={self.p}, N={self.N})"


class Fq:
    """An element of the prime field ``F_p``."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.p = p
        self.value = value % p

    def _coerce(self, other):
        if isinstance(other, Fq):
            if other.p != self.p:
                raise ContextMismatch("different primes")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Dual):
            return NotImplemented
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fq(self.value + v, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return NotImplemented
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fq(self.value - v, self.p)

    def __rsub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fq(v - self.value, self.p)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return NotImplemented
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fq(self.value * v, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fq(-self.value, self.p)

    def __eq__(self, other):
        if isinstance(other, int):
            return (self.value - other) % self.p == 0
        if isinstance(other, Fq):
            return self.p == other.p and self.value == other.value
        if isinstance(other, Dual):
            return other == self
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.value))

    def __bool__(self):
        return self.value != 0

    def is_unit(self) -> bool:
        return self.value != 0

    def __repr__(self):
        return f"Fq({self.value}, p={self.p})"


class Dual:
    """``a + b*eps`` with ``eps**2 = 0`` over ``F_p``."""

    __slots__ = ("a", "b", "p")

    def __init__(self, a: int, b: int, p: int):
        self.p = p
        self.a = a % p
        self.b = b % p

    def _coerce(self, other):
        if isinstance(other, Dual):
            if other.p != self.p:
                raise ContextMismatch("different primes")
            return other.a, other.b
        if isinstance(other, Fq):
            if other.p != self.p:
                raise ContextMismatch("different primes")
            return other.value, 0
        if isinstance(other, int):
            return other, 0
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Dual(self.a + o[0], self.b + o[1], self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Dual(self.a - o[0], self.b - o[1], self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Dual(o[0] - self.a, o[1] - self.b, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        c, d = o
        return Dual(self.a * c, self.a * d + self.b * c, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Dual(-self.a, -self.b, self.p)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self.a - o[0]) % self.p == 0 and (self.b - o[1]) % self.p == 0

    def __hash__(self):
        return hash((self.p, self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def is_unit(self) -> bool:
        return self.a != 0

    def __repr__(self):
        return f"Dual({self.a} + {self.b}*eps, p={self.p})"


def inv_mod(x: int, m: int, p: int) -> int:
    """Inverse of ``x`` modulo ``m`` (a power of ``p``); raises NonUnit."""
    if x % p == 0:
        raise NonUnit(f"{x} is divisible by {p}")
    return pow(x, -1, m)


def inv_unit(x):
    """Multiplicative inverse of a unit ``ZpN``, ``Fq`` or ``Dual``."""
    if isinstance(x, ZpN):
        return ZpN(inv_mod(x.value, x.modulus, x.p), x.p, x.N)
    if isinstance(x, Fq):
        return Fq(inv_mod(x.value, x.p, x.p), x.p)
    if isinstance(x, Dual):
        ia = inv_mod(x.a, x.p, x.p)
        # (a + b eps)^-1 = a^-1 - b a^-2 eps
        return Dual(ia, -x.b * ia * ia, x.p)
    raise TypeError(f"cannot invert {type(x).__name__}")


def digit_sum(k: int, p: int) -> int:
    s = 0
    while k:
        k, r = divmod(k, p)
        s += r
    return s


def factorial_split(k: int, ctx: PrimeCtx | int, N: int) -> tuple[int, ZpN]:
    """Write ``k! = p**v * unit``; return ``(v, unit mod p**N)``.

    ``v`` is Legendre's ``(k - S_p(k)) / (p - 1)``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    p = ctx.p if isinstance(ctx, PrimeCtx) else ctx
    v = (k - digit_sum(k, p)) // (p - 1)
    m = p**N
    unit = 1
    for j in range(2, k + 1):
        while j % p == 0:
            j //= p
        unit = unit * j % m
    return v, ZpN(unit, p, N)


def row_reduce_modp(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over ``F_p``; returns ``(rows, pivot_columns)``."""
    rows = [[x % p for x in r] for r in rows if any(x % p for x in r)]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank_modp(rows: list[list[int]], p: int) -> int:
    return len(row_reduce_modp(rows, p)[1])


def solve_affine_modp(columns: list[list[int]], rhs: list[int], p: int):
    """Solve ``sum_k x_k columns[k] = rhs`` over ``F_p``.

    Returns ``(particular, kernel_basis)`` or ``None`` if inconsistent.
    """
    n = len(columns)
    m = len(rhs)
    rows = [[columns[k][i] for k in range(n)] + [rhs[i]] for i in range(m)]
    red, pivots = row_reduce_modp(rows, p)
    if n in pivots:
        return None
    x = [0] * n
    for r, c in zip(red, pivots):
        x[c] = r[n]
    free = [c for c in range(n) if c not in pivots]
    kernel = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for r, c in zip(red, pivots):
            v[c] = -r[f] % p
        kernel.append(v)
    return x, kernel
