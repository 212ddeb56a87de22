"""From ordinary Breuil modules to etale phi-modules and Fontaine-Laffaille data.

Polynomials in ``pi`` (or in ``p_ = pi^e``) are sparse dicts ``{exponent: c}``
with ``c`` an int mod p.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .coeff import BreuilError, Fq, PrimeCtx, inv_mod
from .monodromy import NoMonodromy, OrdinaryModule


class TruncationTooSmall(BreuilError, ValueError):
    pass


class ExponentNotDivisible(BreuilError, AssertionError):
    pass


class WeightMismatch(BreuilError, ValueError):
    pass


def _clean(poly: dict, p: int, T: int | None = None) -> dict:
    return {d: c % p for d, c in poly.items() if c % p and (T is None or d < T)}


def _pmul(f: dict, g: dict, p: int) -> dict:
    out: dict = {}
    for d1, c1 in f.items():
        for d2, c2 in g.items():
            out[d1 + d2] = (out.get(d1 + d2, 0) + c1 * c2) % p
    return _clean(out, p)


def _padd(f: dict, g: dict, p: int, sign: int = 1) -> dict:
    out = dict(f)
    for d, c in g.items():
        out[d] = (out.get(d, 0) + sign * c) % p
    return _clean(out, p)


def _val(f: dict) -> int | None:
    return min(f) if f else None


def _perm_sign(s) -> int:
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if s[i] > s[j])
    return -1 if inv % 2 else 1


def poly_det(X, p: int) -> dict:
    total: dict = {}
    for s in permutations(range(3)):
        term = {0: 1}
        for i in range(3):
            term = _pmul(term, X[i][s[i]], p)
        total = _padd(total, term, p, _perm_sign(s))
    return total


def _fq(x) -> int:
    if not isinstance(x, Fq):
        raise TypeError("comparison works with F_p coefficients")
    return x.value


@dataclass(frozen=True)
class EtalePhiModule:
    ctx: PrimeCtx
    T: int
    frob: tuple  # 3x3 of {exponent: coefficient}

    def det(self) -> dict:
        return poly_det(self.frob, self.ctx.p)

    def det_valuation(self) -> int:
        return _val(self.det())

    def encode(self) -> dict:
        return {
            "T": self.T,
            "frob": [[sorted(e.items()) for e in row] for row in self.frob],
        }


@dataclass(frozen=True)
class IsotypicDescent:
    """Frobenius matrix over ``F[p_]`` (``p_ = pi^e``) after the change of basis ``e_i -> pi^{a_i} e_i``."""

    ctx: PrimeCtx
    matrix: tuple
    pi_exponents: tuple  # diagonal exponents in pi before substitution
    diagonal_pattern: tuple  # the same divided by e

    def strip(self) -> tuple:
        """Divide column ``j`` by ``p_^{d_j}`` for the diagonal pattern ``d``; the result must be constant."""
        p = self.ctx.p
        out = []
        for i in range(3):
            row = []
            for j in range(3):
                f = {d - self.diagonal_pattern[j]: c for d, c in self.matrix[i][j].items()}
                if any(d != 0 for d in f):
                    raise ExponentNotDivisible(f"entry ({i},{j}) is not a constant multiple of p_^{self.diagonal_pattern[j]}")
                row.append(f.get(0, 0) % p)
            out.append(tuple(row))
        return tuple(out)


@dataclass(frozen=True)
class FLModule:
    hodge_tate: tuple
    frob: tuple  # 3x3 ints mod p: U(x, y, z) Diag(alpha^-1)
    p: int

    def __post_init__(self):
        h = self.hodge_tate
        if not (h[0] < h[1] < h[2] < self.p - 1):
            raise ValueError(f"Hodge-Tate weights {h} outside the Fontaine-Laffaille range")
        if any(self.frob[i][j] % self.p for i in range(3) for j in range(i)):
            raise ValueError("Frobenius matrix must be upper triangular")
        if any(self.frob[i][i] % self.p == 0 for i in range(3)):
            raise ValueError("Frobenius matrix must be invertible")

    @property
    def alpha(self) -> tuple:
        return tuple(inv_mod(self.frob[i][i], self.p, self.p) for i in range(3))

    def unipotent(self) -> tuple:
        """``(x, y, z)`` of ``U`` in ``Mat = U Diag(alpha^-1)``."""
        a = self.alpha
        F = self.frob
        return (F[0][1] * a[1] % self.p, F[0][2] * a[2] % self.p, F[1][2] * a[2] % self.p)

    def encode(self) -> dict:
        return {"hodge_tate": list(self.hodge_tate), "frob": [list(r) for r in self.frob]}


def to_etale(m: OrdinaryModule, T: int | None = None) -> EtalePhiModule:
    """``Mat(phi) = V^t (A^-1)^t`` with ``u -> pi``, truncated at ``pi^T``."""
    ctx = m.ctx
    e, p = ctx.e, ctx.p
    T = e * p if T is None else T
    need = 2 * e + max(max(r) for r in ctx.brackets) + 1
    if T < need:
        raise TruncationTooSmall(f"T={T} < {need}")
    V = m.filtration_matrix()
    ainv = [inv_mod(_fq(a), p, p) for a in m.alpha]
    frob = tuple(
        tuple(_clean({d: _fq(c) * ainv[j] for d, c in V[j][i].terms.items()}, p, T) for j in range(3))
        for i in range(3)
    )
    return EtalePhiModule(ctx, T, frob)


def descend_isotypic(em: EtalePhiModule) -> IsotypicDescent:
    """Change of basis ``e_i -> pi^{a_i} e_i``: entry ``(i, j)`` is multiplied by ``pi^{p a_j - a_i}``."""
    ctx = em.ctx
    e, p, a = ctx.e, ctx.p, ctx.weights
    mat = []
    for i in range(3):
        row = []
        for j in range(3):
            shifted = {d + p * a[j] - a[i]: c for d, c in em.frob[i][j].items()}
            bad = [d for d in shifted if d % e]
            if bad:
                raise ExponentNotDivisible(f"entry ({i},{j}) has pi-exponents {bad} not divisible by e")
            row.append({d // e: c for d, c in shifted.items()})
        mat.append(tuple(row))
    diag_pi = tuple(_val({d * e: c for d, c in mat[i][i].items()}) for i in range(3))
    return IsotypicDescent(ctx, tuple(mat), diag_pi, tuple(d // e for d in diag_pi))


def fl_weights(ctx: PrimeCtx) -> tuple:
    a0, a1, a2 = ctx.weights
    return (0, a1 - a0 + 1, a2 - a0 + 2)


def to_fl(m: OrdinaryModule) -> FLModule:
    g = m.gauge
    if g.v20:
        raise NoMonodromy("v20 != 0: no Fontaine-Laffaille module attached")
    p = m.ctx.p
    x, y, z = _fq(g.v10), _fq(g.v20p), _fq(g.v21)
    ainv = [inv_mod(_fq(a), p, p) for a in m.alpha]
    U = ((1, x, y), (0, 1, z), (0, 0, 1))
    frob = tuple(tuple(U[i][j] * ainv[j] % p for j in range(3)) for i in range(3))
    return FLModule(fl_weights(m.ctx), frob, p)


def fl_isomorphic(f1: FLModule, f2: FLModule, mode: str = "right") -> bool:
    """Isomorphism test for Fontaine-Laffaille Frobenius matrices.

    ``mode='right'``: ``Mat1 = Mat2 Diag(lam, mu, nu)`` for units ``lam, mu, nu``.
    ``mode='conjugate'``: ``Mat1 = D^-1 Mat2 D`` for a diagonal unit ``D``
    (a change of basis preserving both filtrations).
    """
    if f1.hodge_tate != f2.hodge_tate or f1.p != f2.p:
        raise WeightMismatch(f"{f1.hodge_tate} vs {f2.hodge_tate}")
    p = f1.p
    A, B = f1.frob, f2.frob
    if mode == "right":
        lam = [A[j][j] * inv_mod(B[j][j], p, p) % p for j in range(3)]
        return all((A[i][j] - B[i][j] * lam[j]) % p == 0 for i in range(3) for j in range(3))
    if mode == "conjugate":
        for d1, d2 in product(range(1, p), repeat=2):
            d = (1, d1, d2)
            if all(
                (A[i][j] * d[i] - B[i][j] * d[j]) % p == 0 for i in range(3) for j in range(3)
            ):
                return True
        return False
    raise ValueError(f"unknown mode {mode!r}")


def rescale_gauge(m: OrdinaryModule, t) -> OrdinaryModule:
    """The same module in the basis ``e * Diag(t)^-1``: ``v_ij -> t_i v_ij / t_j``, ``alpha`` unchanged."""
    p = m.ctx.p
    g = m.gauge
    tinv = [inv_mod(x, p, p) for x in t]
    v10 = _fq(g.v10) * t[1] * tinv[0]
    v21 = _fq(g.v21) * t[2] * tinv[1]
    v20 = _fq(g.v20) * t[2] * tinv[0]
    v20p = _fq(g.v20p) * t[2] * tinv[0]
    return OrdinaryModule.from_values(m.ctx, v10, v20, v20p, v21, tuple(_fq(a) for a in m.alpha))
