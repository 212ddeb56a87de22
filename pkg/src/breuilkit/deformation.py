"""Tangent directions of the gauge chart and the monodromy locus.

A first-order deformation of an ordinary module over ``F`` is the same data
over ``F[eps]``: each of the seven coordinates ``(v10, v20, v20', v21,
alpha_0, alpha_1, alpha_2)`` moves by ``eps * d``.
"""

from __future__ import annotations

import random

from .coeff import Dual, Fq, PrimeCtx, rank_modp, solve_affine_modp
from .monodromy import (
    MonodromyData,
    OrdinaryModule,
    axiom_residuals,
    monodromy_bruteforce,
    monodromy_exists,
)

COORDS = ("v10", "v20", "v20p", "v21", "alpha0", "alpha1", "alpha2")


def base_values(m: OrdinaryModule) -> list[int]:
    g = m.gauge
    return [g.v10.value, g.v20.value, g.v20p.value, g.v21.value] + [a.value for a in g.lam]


def deform(m: OrdinaryModule, direction) -> OrdinaryModule:
    """``m + eps * direction`` over the dual numbers."""
    b = base_values(m)
    v = [(b[k], int(direction[k])) for k in range(7)]
    return OrdinaryModule.from_values(m.ctx, v[0], v[1], v[2], v[3], tuple(v[4:]))


def _eps_part(values, top) -> list[int]:
    out = []
    for x in values:
        for d in range(top):
            c = x.terms.get(d)
            out.append(c.b if isinstance(c, Dual) else 0)
    return out


def monodromy_tangent_directions(m: OrdinaryModule):
    """Solve the first-order axioms jointly in the direction ``d`` and the
    eps-part ``P1`` of the monodromy; return a basis of the admissible ``d``."""
    ctx = m.ctx
    p, top = ctx.p, ctx.e * ctx.p
    base = monodromy_bruteforce(m)
    if base.empty:
        raise ValueError("base module has no monodromy operator")
    P0 = base.particular
    n = 7 + 3 * p

    def residual(x):
        mod = deform(m, x[:7])
        polys = []
        for q, name in enumerate(("P10", "P21", "P20")):
            c0 = getattr(P0, name)
            polys.append(tuple(Dual(c0[k].value, x[7 + q * p + k], p) for k in range(p)))
        return _eps_part(axiom_residuals(mod, MonodromyData(*polys)), top)

    r0 = residual([0] * n)
    assert not any(r0), "base monodromy must satisfy the axioms"
    cols = []
    for k in range(n):
        x = [0] * n
        x[k] = 1
        cols.append(residual(x))
    keep = [i for i in range(len(r0)) if any(c[i] for c in cols)]
    sol = solve_affine_modp([[c[i] for i in keep] for c in cols], [0] * len(keep), p)
    _, kernel = sol
    proj = [v[:7] for v in kernel]
    return proj


def tangent_dimension(kind: str, base: OrdinaryModule) -> int:
    ctx = base.ctx
    ctx.require_generic()
    p = ctx.p
    if kind == "quasi":
        # every direction gives an ordinary quasi-Breuil module: the alpha stay units
        valid = []
        for k in range(7):
            d = [0] * 7
            d[k] = 1
            mod = deform(base, d)
            if all(a.is_unit() for a in mod.alpha):
                valid.append(d)
        return rank_modp(valid, p)
    if kind == "with_monodromy":
        if base.gauge.v20:
            raise ValueError("with_monodromy needs a base with v20 = 0")
        return rank_modp(monodromy_tangent_directions(base), p)
    raise ValueError(f"unknown kind {kind!r}")


def excluded_directions(base: OrdinaryModule) -> list[str]:
    """Coordinate directions that are not admissible for monodromy."""
    p = base.ctx.p
    dirs = monodromy_tangent_directions(base)
    r = rank_modp(dirs, p)
    out = []
    for k in range(7):
        e = [0] * 7
        e[k] = 1
        if rank_modp(dirs + [e], p) > r:
            out.append(COORDS[k])
    return out


def random_module(ctx: PrimeCtx, rng: random.Random, v20=None) -> OrdinaryModule:
    p = ctx.p
    v = [rng.randrange(p) for _ in range(4)]
    if v20 is not None:
        v[1] = v20
    alpha = tuple(rng.randrange(1, p) for _ in range(3))
    return OrdinaryModule.from_values(ctx, v[0], v[1], v[2], v[3], alpha)


def monodromy_locus_report(ctx: PrimeCtx, base: OrdinaryModule | None = None, samples: int = 100, lines: int = 10, seed: int = 0) -> dict:
    """Admissibility of monodromy across the gauge parameter space."""
    ctx.require_generic()
    p = ctx.p
    rng = random.Random(seed)
    base = base or random_module(ctx, rng, v20=0)
    b = base_values(base)

    sweep = []
    for v20 in range(p):
        mod = OrdinaryModule.from_values(ctx, b[0], v20, b[2], b[3], tuple(b[4:]))
        sweep.append(
            {"v20": v20, "oracle": not monodromy_bruteforce(mod).empty, "exists": monodromy_exists(mod)}
        )

    sampled = []
    for _ in range(samples):
        mod = random_module(ctx, rng)
        sampled.append(not monodromy_bruteforce(mod).empty)

    # affine lines through two admissible points stay admissible
    line_checks = 0
    line_failures = 0
    for _ in range(lines):
        P = base_values(random_module(ctx, rng, v20=0))
        Q = base_values(random_module(ctx, rng, v20=0))
        for s in range(p):
            pt = [((1 - s) * x + s * y) % p for x, y in zip(P, Q)]
            if any(a == 0 for a in pt[4:]):
                continue
            mod = OrdinaryModule.from_values(ctx, pt[0], pt[1], pt[2], pt[3], tuple(pt[4:]))
            line_checks += 1
            if monodromy_bruteforce(mod).empty:
                line_failures += 1

    dims = {"quasi": tangent_dimension("quasi", base), "with_monodromy": tangent_dimension("with_monodromy", base)}
    return {
        "prime": p,
        "weights": list(ctx.weights),
        "base": dict(zip(COORDS, b)),
        "sweep_v20": sweep,
        "sweep_admissible": sum(r["oracle"] for r in sweep),
        "sweep_total": p,
        "sweep_agrees_with_exists": all(r["oracle"] == r["exists"] for r in sweep),
        "sampled_admissible": sum(sampled),
        "sampled_total": samples,
        "line_checks": line_checks,
        "line_failures": line_failures,
        "tangent_dimensions": dims,
        "excluded_directions": excluded_directions(base),
        "framed_dimension": "not computed: needs Galois-side framing data",
    }
