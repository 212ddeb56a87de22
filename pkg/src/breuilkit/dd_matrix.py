"""3x3 matrices with descent data.

A ``DDMatrix`` stores the untwisted entries ``m_ij``; the honest matrix entry
is ``u^[a_i - a_j] * m_ij``.  When two twists meet in a product their
exponents add up to ``[a_i - a_j]`` plus ``0`` or ``e``; the surplus ``u^e`` is
put back into the base ring as ``u^e = E(u) - p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .breuil_rings import (
    IdealTag,
    NotDivisible,
    RElem,
    RRing,
    divide_by_E,
    frobenius_r,
    ideal_member,
)
from .coeff import BreuilError, ContextMismatch, GenericityViolation


class ContractViolation(BreuilError, AssertionError):
    pass


def mul_ue(z: RElem) -> RElem:
    """``u^e * z`` with ``u^e = delta_1 - p delta_0``."""
    ring = z.ring
    c = z.coeffs
    mod, p = ring.mod, ring.p
    out = [-p * c[0] % mod]
    for k in range(1, ring.M):
        out.append((k * c[k - 1] - p * c[k]) % mod)
    return RElem(ring, tuple(out))


def _mul_ue_pow(z: RElem, k: int) -> RElem:
    for _ in range(k):
        z = mul_ue(z)
    return z


class DDMatrix:
    __slots__ = ("ring", "rows")

    def __init__(self, ring: RRing, rows):
        self.ring = ring
        self.rows = tuple(tuple(x if isinstance(x, RElem) else ring.const(x) for x in r) for r in rows)
        assert len(self.rows) == 3 and all(len(r) == 3 for r in self.rows)

    @property
    def ctx(self):
        return self.ring.ctx

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def identity(cls, ring: RRing) -> DDMatrix:
        return cls.diag(ring, (1, 1, 1))

    @classmethod
    def zero(cls, ring: RRing) -> DDMatrix:
        z = ring.zero
        return cls(ring, [[z] * 3 for _ in range(3)])

    @classmethod
    def diag(cls, ring: RRing, values) -> DDMatrix:
        z = ring.zero
        vals = [v if isinstance(v, RElem) else ring.const(v) for v in values]
        return cls(ring, [[vals[i] if i == j else z for j in range(3)] for i in range(3)])

    def _check(self, other: DDMatrix):
        if self.ring != other.ring:
            raise ContextMismatch(f"{self.ring} vs {other.ring}")

    def __add__(self, other: DDMatrix) -> DDMatrix:
        self._check(other)
        return DDMatrix(self.ring, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: DDMatrix) -> DDMatrix:
        self._check(other)
        return DDMatrix(self.ring, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return DDMatrix(self.ring, [[-a for a in r] for r in self.rows])

    def scale(self, c) -> DDMatrix:
        return DDMatrix(self.ring, [[a * c for a in r] for r in self.rows])

    def __mul__(self, other: DDMatrix) -> DDMatrix:
        return dd_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, DDMatrix):
            return NotImplemented
        return self.ring == other.ring and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def eq_upto(self, other: DDMatrix, level: int) -> bool:
        return all(
            self.rows[i][j].eq_upto(other.rows[i][j], level) for i in range(3) for j in range(3)
        )

    def map(self, f) -> DDMatrix:
        return DDMatrix(self.ring, [[f(a) for a in r] for r in self.rows])

    def reduce(self, N: int) -> DDMatrix:
        from .breuil_rings import get_ring

        ring = get_ring(self.ctx, N, self.ring.M)
        return DDMatrix(ring, [[x.reduce(N) for x in r] for r in self.rows])

    def conjugate_diag(self, d) -> DDMatrix:
        """``D X D^-1`` for a diagonal of constant units ``d`` (given as ints)."""
        from .coeff import inv_mod

        ring = self.ring
        dinv = [inv_mod(x, ring.mod, ring.p) for x in d]
        return DDMatrix(
            ring, [[self.rows[i][j] * (d[i] * dinv[j]) for j in range(3)] for i in range(3)]
        )

    def transpose_entries(self):
        return [[self.rows[j][i] for j in range(3)] for i in range(3)]

    def encode(self) -> list:
        return [[x.encode() for x in r] for r in self.rows]

    def __repr__(self):
        return "DDMatrix(\n  " + "\n  ".join(repr(list(r)) for r in self.rows) + ")"


def dd_mul(X: DDMatrix, Y: DDMatrix) -> DDMatrix:
    """``(XY)_ij = sum_k (u^e)^{c(i,k,j)} x_ik y_kj``."""
    X._check(Y)
    ring = X.ring
    exc = ring.ctx.excesses
    out = []
    zero = ring.zero
    for i in range(3):
        row = []
        for j in range(3):
            acc = zero
            plain = None
            for k in range(3):
                x, y = X.rows[i][k], Y.rows[k][j]
                if not x or not y:
                    continue
                t = x * y
                if exc[i][k][j]:
                    acc = acc + t
                else:
                    plain = t if plain is None else plain + t
            s = mul_ue(acc) if acc else zero
            if plain is not None:
                s = s + plain
            row.append(s)
        out.append(row)
    return DDMatrix(ring, out)


def _perm_sign(s) -> int:
    sign = 1
    s = list(s)
    for i in range(len(s)):
        while s[i] != i:
            j = s[i]
            s[i], s[j] = s[j], s[i]
            sign = -sign
    return sign


def dd_det(X: DDMatrix) -> RElem:
    """Determinant; the twists of each permutation term sum to a multiple of ``e``."""
    ring = X.ring
    ctx = ring.ctx
    b = ctx.brackets
    total = ring.zero
    for s in permutations(range(3)):
        term = ring.one
        for i in range(3):
            term = term * X.rows[i][s[i]]
        tw = sum(b[i][s[i]] for i in range(3))
        assert tw % ctx.e == 0
        term = _mul_ue_pow(term, tw // ctx.e)
        total = total + term if _perm_sign(s) > 0 else total - term
    return total


def dd_adjugate(X: DDMatrix) -> DDMatrix:
    """Adjugate via cofactors, each product corrected by its twist surplus."""
    ring = X.ring
    ctx = ring.ctx
    b, e = ctx.brackets, ctx.e
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r1, r2 = [r for r in range(3) if r != j]
            c1, c2 = [c for c in range(3) if c != i]
            s1 = b[r1][c1] + b[r2][c2] - b[i][j]
            s2 = b[r1][c2] + b[r2][c1] - b[i][j]
            assert s1 % e == 0 and s2 % e == 0 and s1 >= 0 and s2 >= 0
            t1 = _mul_ue_pow(X.rows[r1][c1] * X.rows[r2][c2], s1 // e)
            t2 = _mul_ue_pow(X.rows[r1][c2] * X.rows[r2][c1], s2 // e)
            m = t1 - t2
            out[i][j] = m if (i + j) % 2 == 0 else -m
    return DDMatrix(ring, out)


def dd_divide_by_E(X: DDMatrix, k: int) -> DDMatrix:
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            try:
                row.append(divide_by_E(X.rows[i][j], k))
            except NotDivisible as exc:
                raise NotDivisible(f"entry ({i},{j}) is not divisible by E^{k}") from exc
        out.append(row)
    return DDMatrix(X.ring, out)


# ---------------------------------------------------------------------------
# structured subsets


@dataclass(frozen=True)
class SubsetTag:
    """Named subsets of matrices with descent data.

    ``kind`` is one of ``GL``, ``B_upper``, ``B_opp``, ``U_opp``, ``L_lower``,
    ``T_scalar`` or ``congruence``.  A congruence class ``T + ...`` is given by
    the ideal allowed below the diagonal, on the non-constant part of the
    diagonal, and above the diagonal (``None`` = unrestricted); its diagonal
    constants must be units.
    """

    kind: str
    lower: IdealTag | None = None
    diag: IdealTag | None = None
    upper: IdealTag | None = None

    def __str__(self):
        if self.kind != "congruence":
            return self.kind
        return f"T + [lower {self.lower}, diag {self.diag}, upper {self.upper}]"


def T_plus(K: IdealTag) -> SubsetTag:
    """``T_3(O_E) + M(K)``."""
    return SubsetTag("congruence", K, K, K)


def T_plus_L(n: int) -> SubsetTag:
    """``T_3(O_E) + L(p^n R) + M(p^n (p, Fil^1))``."""
    return SubsetTag(
        "congruence", IdealTag("R", n=n), IdealTag("R", n=n), IdealTag("pFil", 0, n)
    )


def Bopp_plus(K: IdealTag) -> SubsetTag:
    """Lower-triangular invertible plus ``M(K)``: only the upper part is constrained."""
    return SubsetTag("congruence", None, None, K)


def _is_zero(x: RElem, upto) -> bool:
    top = x.ring.M if upto is None else upto
    return not any(c % x.ring.mod for c in x.coeffs[:top])


def subset_member(X: DDMatrix, tag: SubsetTag, upto: int | None = None) -> bool:
    """Membership of ``X`` in a structured subset (entries inspected below ``upto``)."""
    rows = X.rows
    lower = [(i, j) for i in range(3) for j in range(3) if i > j]
    upper = [(i, j) for i in range(3) for j in range(3) if i < j]
    if tag.kind == "GL":
        return dd_det(X).is_unit()
    if tag.kind == "B_upper":
        return all(_is_zero(rows[i][j], upto) for i, j in lower) and dd_det(X).is_unit()
    if tag.kind == "B_opp":
        return all(_is_zero(rows[i][j], upto) for i, j in upper) and dd_det(X).is_unit()
    if tag.kind == "L_lower":
        return all(_is_zero(rows[i][j], upto) for i, j in upper)
    if tag.kind == "U_opp":
        one = X.ring.one
        return all(_is_zero(rows[i][j], upto) for i, j in upper) and all(
            rows[i][i].eq_upto(one, X.ring.M if upto is None else upto) for i in range(3)
        )
    if tag.kind == "T_scalar":
        return (
            all(_is_zero(rows[i][j], upto) for i in range(3) for j in range(3) if i != j)
            and all(rows[i][i].is_constant(upto) and rows[i][i].is_unit() for i in range(3))
        )
    if tag.kind == "congruence":
        for i in range(3):
            d = rows[i][i]
            if not d.is_unit():
                return False
            if tag.diag is not None and not ideal_member(d - d.coeffs[0], tag.diag, upto):
                return False
        for K, pos in ((tag.lower, lower), (tag.upper, upper)):
            if K is None:
                continue
            if not all(ideal_member(rows[i][j], K, upto) for i, j in pos):
                return False
        return True
    raise ValueError(f"unknown subset kind {tag.kind!r}")


# ---------------------------------------------------------------------------
# Frobenius


def dd_frobenius(X: DDMatrix, part: str | None = None, n: int = 0, upto: int | None = None) -> DDMatrix:
    """Frobenius of a matrix with descent data.

    ``phi(u^b m) = u^b (u^e)^b phi(m)`` since ``phi(u) = u^p`` and
    ``u^{pb} = u^b u^{(p-1)b}``.  With ``part='i'`` or ``part='ii'`` the
    corresponding congruence contract is asserted (hypothesis checked on the
    input, conclusion on the output); ``upto`` bounds the coefficients of the
    input that are known.
    """
    ring = X.ring
    ctx = ring.ctx
    b = ctx.brackets
    if part == "i" and any(b[i][j] < 3 for i in range(3) for j in range(3) if i != j):
        raise GenericityViolation("contract (i) needs every bracket [a_i - a_j] >= 3")
    out = [
        [_mul_ue_pow(frobenius_r(X.rows[i][j]), b[i][j]) for j in range(3)] for i in range(3)
    ]
    Y = DDMatrix(ring, out)
    if part == "i":
        hyp = subset_member(X, SubsetTag("GL")) if n == 0 else subset_member(
            X, T_plus(IdealTag("R", n=n)), upto
        )
        if hyp and not subset_member(Y, T_plus(IdealTag("IJp", n=n))):
            raise ContractViolation(f"phi(X) not in T + M(p^{n}J + p^{n}I + p^{n + 1}R)")
        if hyp and n > 0:
            diff = Y - X
            if not all(ideal_member(diff.rows[i][j], IdealTag("R", n=n), upto) for i in range(3) for j in range(3)):
                raise ContractViolation(f"phi(X) differs from X outside p^{n}R")
    elif part == "ii":
        if subset_member(X, T_plus(IdealTag("pFil", 0, n)), upto):
            if not subset_member(Y, T_plus(IdealTag("R", n=n + 1))):
                raise ContractViolation(f"phi(X) not in T + M(p^{n + 1}R)")
    elif part is not None:
        raise ValueError(f"unknown contract part {part!r}")
    return Y
