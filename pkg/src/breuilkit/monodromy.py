"""Monodromy on ordinary mod-p Breuil modules.

Everything here happens over ``S = F[u]/(u^{ep})`` with honest (explicitly
twisted) matrices: the filtration generators are the columns ``f_j`` of

    [ 1                      0                  0      ]
    [ u^[10] v10             u^e                0      ]
    [ u^[20] (v20 + u^e v20') u^{e+[21]} v21    u^{2e} ]

and ``phi_2(f_j) = alpha_j e_j``.  A monodromy operator is strictly lower
triangular, ``N(e_j) = sum_i u^[ij] P_ij(u^e) e_i``, and has to satisfy

  (i)  ``u^e N(f_j)`` lies in ``Fil^2``,
  (ii) ``phi_2(u^e N(f_j)) = N(phi_2(f_j))``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .breuil_rings import SBarElem, monodromy_s, sbar_frobenius
from .coeff import BreuilError, Dual, Fq, PrimeCtx, inv_unit, solve_affine_modp
from .gauge import GaugeData

LOWER = ((1, 0), (2, 0), (2, 1))


class NoMonodromy(BreuilError, ValueError):
    pass


@dataclass(frozen=True)
class OrdinaryModule:
    """A mod-p Breuil module in ordinary form: gauge parameters and ``A = Diag(alpha)``."""

    ctx: PrimeCtx
    gauge: GaugeData

    def __post_init__(self):
        if not self.gauge.is_modp and not isinstance(self.gauge.v10, Dual):
            raise ValueError("ordinary modules carry mod-p gauge data")

    @classmethod
    def from_values(cls, ctx: PrimeCtx, v10=0, v20=0, v20p=0, v21=0, alpha=(1, 1, 1)) -> OrdinaryModule:
        """Values are ints (``F_p``) or pairs ``(a, b)`` meaning ``a + b*eps``."""
        vals = [v10, v21, v20, v20p, *alpha]
        if any(isinstance(x, (tuple, Dual)) for x in vals):
            conv = lambda x: x if isinstance(x, Dual) else (Dual(*x, ctx.p) if isinstance(x, tuple) else Dual(x, 0, ctx.p))
        else:
            conv = lambda x: x if isinstance(x, Fq) else Fq(x, ctx.p)
        g = GaugeData(conv(v10), conv(v21), conv(v20), conv(v20p), tuple(conv(a) for a in alpha))
        return cls(ctx, g)

    @property
    def alpha(self):
        return self.gauge.lam

    @property
    def dual(self) -> bool:
        return isinstance(self.gauge.v10, Dual)

    def zero(self):
        return Dual(0, 0, self.ctx.p) if self.dual else Fq(0, self.ctx.p)

    def filtration_matrix(self) -> list[list[SBarElem]]:
        ctx, g = self.ctx, self.gauge
        e, b = ctx.e, ctx.brackets
        mono = lambda d, c=1: SBarElem.monomial(ctx, d, c)
        z = SBarElem(ctx)
        return [
            [mono(0), z, z],
            [mono(b[1][0], g.v10), mono(e), z],
            [mono(b[2][0], g.v20) + mono(b[2][0] + e, g.v20p), mono(e + b[2][1], g.v21), mono(2 * e)],
        ]


@dataclass(frozen=True)
class MonodromyData:
    """``P_10, P_21, P_20`` as coefficient tuples in powers of ``t = u^e`` (length ``p``)."""

    P10: tuple
    P21: tuple
    P20: tuple

    @classmethod
    def zero(cls, m: OrdinaryModule) -> MonodromyData:
        z = (m.zero(),) * m.ctx.p
        return cls(z, z, z)

    def poly(self, i: int, j: int) -> tuple:
        return {(1, 0): self.P10, (2, 1): self.P21, (2, 0): self.P20}[(i, j)]

    def matrix(self, ctx: PrimeCtx) -> list[list[SBarElem]]:
        b, e = ctx.brackets, ctx.e
        N = [[SBarElem(ctx) for _ in range(3)] for _ in range(3)]
        for i, j in LOWER:
            N[i][j] = SBarElem(ctx, {b[i][j] + e * k: c for k, c in enumerate(self.poly(i, j))})
        return N

    def encode(self) -> dict:
        def enc(c):
            return [c.a, c.b] if isinstance(c, Dual) else c.value

        return {name: [enc(c) for c in getattr(self, name)] for name in ("P10", "P21", "P20")}

    def support(self) -> dict:
        return {
            name: [k for k, c in enumerate(getattr(self, name)) if c]
            for name in ("P10", "P21", "P20")
        }


# ---------------------------------------------------------------------------
# axioms


def _matmul(X, Y, ctx):
    return [[sum((X[i][k] * Y[k][j] for k in range(3)), SBarElem(ctx)) for j in range(3)] for i in range(3)]


def fil2_coordinates(m: OrdinaryModule, x: list[SBarElem]):
    """Solve ``V s = x`` by back-substitution.

    Returns ``(s, residue)``: ``x`` is in ``Fil^2`` iff every residue vanishes.
    Coordinates are determined up to terms that ``phi`` kills; those are set to 0.
    """
    V = m.filtration_matrix()
    e = m.ctx.e
    s0 = x[0]
    y1 = x[1] - V[1][0] * s0
    r1 = y1.low_part(e)
    s1 = (y1 - r1).divide_u(e)
    y2 = x[2] - V[2][0] * s0 - V[2][1] * s1
    r2 = y2.low_part(2 * e)
    s2 = (y2 - r2).divide_u(2 * e)
    return (s0, s1, s2), (r1, r2)


def phi2(m: OrdinaryModule, s) -> list[SBarElem]:
    """``phi_2(sum s_k f_k) = sum phi(s_k) alpha_k e_k``."""
    return [sbar_frobenius(s[k]) * m.alpha[k] for k in range(3)]


def ue_N_f(m: OrdinaryModule, nd: MonodromyData) -> list[list[SBarElem]]:
    """Columns ``u^e N(f_j)``, using the Leibniz rule ``N(Q x) = N_S(Q) x + Q N(x)``."""
    ctx = m.ctx
    V = m.filtration_matrix()
    NV = _matmul(nd.matrix(ctx), V, ctx)
    return [[(monodromy_s(V[i][j]) + NV[i][j]).shift(ctx.e) for i in range(3)] for j in range(3)]


def axiom_residuals(m: OrdinaryModule, nd: MonodromyData) -> list:
    """Everything that must vanish for ``nd`` to be a monodromy operator, in a fixed order."""
    ctx = m.ctx
    N = nd.matrix(ctx)
    out = []
    for j, x in enumerate(ue_N_f(m, nd)):
        s, (r1, r2) = fil2_coordinates(m, x)
        out.append(r1)
        out.append(r2)
        lhs = phi2(m, s)
        for i in range(3):
            out.append(lhs[i] - N[i][j] * m.alpha[j])
    return out


def verify_monodromy_axioms(m: OrdinaryModule, nd: MonodromyData) -> bool:
    return not any(axiom_residuals(m, nd))


# ---------------------------------------------------------------------------
# closed form


def monodromy_exists(m: OrdinaryModule) -> bool:
    m.ctx.require_generic()
    return not m.gauge.v20


def monodromy_closed_form(m: OrdinaryModule) -> MonodromyData:
    ctx = m.ctx
    ctx.require_generic()
    g = m.gauge
    if g.v20:
        raise NoMonodromy("v20 != 0: the module has no monodromy operator")
    b = ctx.brackets
    a0, a1, a2 = m.alpha
    z = m.zero()

    def at(k, c):
        out = [z] * ctx.p
        out[k] = c
        return tuple(out)

    P10 = -(a1 * inv_unit(a0)) * b[1][0] * g.v10
    P21 = -(a2 * inv_unit(a1)) * b[2][1] * g.v21
    P20 = (a2 * inv_unit(a0)) * (g.v10 * g.v21 * b[1][0] - g.v20p * (b[2][0] - 1))
    return MonodromyData(at(b[1][0], P10), at(b[2][1], P21), at(b[2][0], P20))


def alternate_formula_diagnostic(m: OrdinaryModule) -> dict:
    """Evaluate the alternative formulas (no sign on ``P_{i+1,i}``, exponent
    ``e[a_{i+2} - a_i]`` with indices mod 3) against the axioms.

    Only a report: the closed form above is what the oracle confirms.
    """
    ctx = m.ctx
    g = m.gauge
    b = ctx.brackets
    a = m.alpha
    z = m.zero()

    def at(k, c):
        out = [z] * ctx.p
        out[k] = c
        return tuple(out)

    P10 = a[1] * inv_unit(a[0]) * b[1][0] * g.v10
    P21 = a[2] * inv_unit(a[1]) * b[2][1] * g.v21
    P20 = -(a[2] * inv_unit(a[0])) * (g.v20p * (b[2][0] - 1) - g.v10 * g.v21 * b[1][0])
    # [a_{i+2} - a_i]: i = 0 -> [a2 - a0], i = 1 -> [a0 - a1]
    variant = MonodromyData(at(b[2][0], P10), at(b[0][1], P21), at(b[2][0], P20))
    return {
        "variant": variant.encode(),
        "variant_satisfies_axioms": verify_monodromy_axioms(m, variant),
        "closed_form_satisfies_axioms": (not g.v20) and verify_monodromy_axioms(m, monodromy_closed_form(m)),
    }


# ---------------------------------------------------------------------------
# brute-force oracle


def _flatten(values, dual: bool) -> list[int]:
    out = []
    for x in values:
        for c in x:
            if dual:
                out.extend((c.a, c.b) if isinstance(c, Dual) else (c.value, 0))
            else:
                out.append(c.value)
    return out


def _dense(x: SBarElem, top: int, zero) -> list:
    return [x.terms.get(d, zero) for d in range(top)]


@dataclass
class AffineSolutionSet:
    """``particular + span_{F_p}(kernel)`` inside the space of ``MonodromyData``."""

    module: OrdinaryModule
    particular: MonodromyData | None
    kernel: list

    @property
    def empty(self) -> bool:
        return self.particular is None

    @property
    def dimension(self) -> int:
        return -1 if self.empty else len(self.kernel)

    def contains(self, nd: MonodromyData) -> bool:
        if self.empty:
            return False
        return _in_affine(self, nd)


def _unknown_vector(m: OrdinaryModule, nd: MonodromyData) -> list[int]:
    out = []
    for name in ("P10", "P21", "P20"):
        for c in getattr(nd, name):
            if m.dual:
                out.extend((c.a, c.b) if isinstance(c, Dual) else (c.value, 0))
            else:
                out.append(c.value)
    return out


def _from_vector(m: OrdinaryModule, x: list[int]) -> MonodromyData:
    p = m.ctx.p
    w = 2 if m.dual else 1
    conv = (lambda a, b: Dual(a, b, p)) if m.dual else (lambda a, b: Fq(a, p))
    polys = []
    for q in range(3):
        chunk = x[q * p * w : (q + 1) * p * w]
        polys.append(tuple(conv(chunk[k * w], chunk[k * w + 1] if m.dual else 0) for k in range(p)))
    return MonodromyData(polys[0], polys[1], polys[2])


def _in_affine(S: AffineSolutionSet, nd: MonodromyData) -> bool:
    from .coeff import rank_modp

    p = S.module.ctx.p
    target = _unknown_vector(S.module, nd)
    base = _unknown_vector(S.module, S.particular)
    diff = [(a - b) % p for a, b in zip(target, base)]
    if not any(diff):
        return True
    K = [_unknown_vector(S.module, k) for k in S.kernel]
    return rank_modp(K + [diff], p) == rank_modp(K, p) if K else False


def monodromy_bruteforce(m: OrdinaryModule) -> AffineSolutionSet:
    """All ``(P10, P21, P20)`` satisfying the axioms, by Gaussian elimination over ``F_p``.

    The residual map is affine in the ``F_p``-coordinates of the unknowns (Frobenius is trivial on
    the prime field and on ``eps``), so it is sampled at 0 and at each basis vector.
    """
    ctx = m.ctx
    p, top = ctx.p, ctx.e * ctx.p
    w = 2 if m.dual else 1
    zero = m.zero()
    n_unknowns = 3 * p * w

    def residual(x: list[int]) -> list[int]:
        nd = _from_vector(m, x)
        res = axiom_residuals(m, nd)
        return _flatten([_dense(r, top, zero) for r in res], m.dual)

    r0 = residual([0] * n_unknowns)
    columns = []
    for k in range(n_unknowns):
        x = [0] * n_unknowns
        x[k] = 1
        rk = residual(x)
        columns.append([(a - b) % p for a, b in zip(rk, r0)])
    # drop equations that no unknown touches and that already hold
    keep = [i for i in range(len(r0)) if r0[i] or any(col[i] for col in columns)]
    sol = solve_affine_modp([[c[i] for i in keep] for c in columns], [-r0[i] % p for i in keep], p)
    if sol is None:
        return AffineSolutionSet(m, None, [])
    x, kernel = sol
    return AffineSolutionSet(m, _from_vector(m, x), [_from_vector(m, k) for k in kernel])
