"""Command line interface.

Input documents are JSON::

    {
      "prime": 13,
      "weights": [0, 4, 8],
      "precision": {"padic": 8, "fil": 11, "pi_truncation": 156},
      "coefficients": "ZpN",            # or "Fp", "Fp-dual"
      "frobenius": [[c00, c01, c02], ...],
      "filtration": "standard",
      "gauge": {"v10": 1, "v20": 0, "v20p": 1, "v21": 1, "alpha": [1, 1, 1]},
      "seed": 0
    }

``frobenius`` entries are coefficient lists: in the delta basis for ``ZpN``,
in powers of ``u^e`` for ``Fp``.  Missing matrices are drawn from ``seed``.
Exit codes: 0 ok, 1 input error, 2 failed check, 3 no convergence.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .breuil_rings import get_ring, modp_ring
from .coeff import BreuilError, GenericityViolation, PrimeCtx, check_strong_genericity
from .comparison import descend_isotypic, fl_isomorphic, to_etale, to_fl
from .dd_matrix import DDMatrix, SubsetTag, subset_member
from .deformation import excluded_directions, monodromy_locus_report, tangent_dimension
from .gauge import NoConvergence, diagonalize, ordinary_form_modp
from .monodromy import (
    OrdinaryModule,
    monodromy_bruteforce,
    monodromy_closed_form,
    monodromy_exists,
    alternate_formula_diagnostic,
    verify_monodromy_axioms,
)

COMMANDS = ("validate", "gauge", "gauge-modp", "monodromy", "etale", "fl", "dims", "selftest")


class InputError(Exception):
    pass


def load_document(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read input: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    return doc


def context_from(doc: dict) -> PrimeCtx:
    try:
        return PrimeCtx(int(doc.get("prime", 13)), tuple(doc.get("weights", (0, 4, 8))))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _filtration_ok(doc: dict):
    if doc.get("filtration", "standard") != "standard":
        raise InputError("only the standard filtration Diag(1, E, E^2) is supported")


def random_padic_frobenius(ring, rng: random.Random) -> DDMatrix:
    """``Diag(units) * (Id + p * X)`` with random ``X``."""
    p = ring.p
    units = [rng.randrange(1, p) for _ in range(3)]
    X = [[ring.elem([rng.randrange(ring.mod) for _ in range(ring.M)]) * p for _ in range(3)] for _ in range(3)]
    rows = [[X[i][j] * units[i] + (units[i] if i == j else 0) for j in range(3)] for i in range(3)]
    return DDMatrix(ring, rows)


def random_modp_frobenius(ctx: PrimeCtx, rng: random.Random) -> DDMatrix:
    ring = modp_ring(ctx)
    p = ctx.p
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            if j > i:
                row.append(ring.zero)
            else:
                c = [rng.randrange(p) for _ in range(p)]
                if i == j and c[0] == 0:
                    c[0] = 1
                row.append(ring.from_t_poly(c))
        rows.append(row)
    return DDMatrix(ring, rows)


def padic_frobenius(doc: dict, ctx: PrimeCtx, N: int, M: int, rng) -> DDMatrix:
    ring = get_ring(ctx, N, M)
    F = doc.get("frobenius")
    if F is None:
        return random_padic_frobenius(ring, rng)
    try:
        return DDMatrix(ring, [[ring.elem(c) for c in row] for row in F])
    except (TypeError, ValueError, AssertionError) as exc:
        raise InputError(f"bad frobenius matrix: {exc}") from exc


def modp_frobenius(doc: dict, ctx: PrimeCtx, rng) -> DDMatrix:
    ring = modp_ring(ctx)
    F = doc.get("frobenius")
    if F is None:
        return random_modp_frobenius(ctx, rng)
    try:
        return DDMatrix(ring, [[ring.from_t_poly(c) for c in row] for row in F])
    except (TypeError, ValueError, AssertionError) as exc:
        raise InputError(f"bad frobenius matrix: {exc}") from exc


def ordinary_module(doc: dict, ctx: PrimeCtx, rng) -> OrdinaryModule:
    g = doc.get("gauge")
    if g is not None:
        try:
            return OrdinaryModule.from_values(
                ctx,
                g.get("v10", 0),
                g.get("v20", 0),
                g.get("v20p", 0),
                g.get("v21", 0),
                tuple(g.get("alpha", (1, 1, 1))),
            )
        except (TypeError, ValueError, ArithmeticError) as exc:
            raise InputError(f"bad gauge data: {exc}") from exc
    data, _, _ = ordinary_form_modp(modp_frobenius(doc, ctx, rng))
    return OrdinaryModule(ctx, data)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(doc, args):
    ctx = context_from(doc)
    _filtration_ok(doc)
    generic = check_strong_genericity(ctx)
    return (
        {
            "ok": generic,
            "prime": ctx.p,
            "weights": list(ctx.weights),
            "strongly_generic": generic,
            "brackets": [list(r) for r in ctx.brackets],
        },
        0 if generic else 1,
    )


def cmd_gauge(doc, args):
    ctx = context_from(doc)
    _filtration_ok(doc)
    prec = doc.get("precision", {})
    N = args.precision or prec.get("padic", 8)
    M = args.fil or prec.get("fil", min(ctx.p, N + 3))
    A0 = padic_frobenius(doc, ctx, N, M, random.Random(args.seed))
    data, V, tr = diagonalize(A0, N)
    out = {
        "gauge": data.to_dict(),
        "steps": len(tr.steps),
        "verified": tr.ok,
        "gauge_normal_form": V.is_gauge_normal(),
        "final_diagonal_scalar": subset_member(tr.final_A, SubsetTag("T_scalar")),
    }
    if args.transcript:
        out["transcript"] = tr.to_list()
    return out, 0


def cmd_gauge_modp(doc, args):
    ctx = context_from(doc)
    A = modp_frobenius(doc, ctx, random.Random(args.seed))
    data, V, tr = ordinary_form_modp(A)
    out = {"gauge": data.to_dict(), "sweeps": len(tr.steps)}
    if args.transcript:
        out["transcript"] = tr.to_list()
    return out, 0


def cmd_monodromy(doc, args):
    ctx = context_from(doc)
    m = ordinary_module(doc, ctx, random.Random(args.seed))
    exists = monodromy_exists(m)
    oracle = monodromy_bruteforce(m)
    out = {
        "gauge": m.gauge.to_dict(),
        "exists": exists,
        "oracle_solvable": not oracle.empty,
        "oracle_dimension": oracle.dimension,
        "alternate_formula": alternate_formula_diagnostic(m),
    }
    status = 0 if exists == (not oracle.empty) else 2
    if exists:
        cf = monodromy_closed_form(m)
        out["closed_form"] = cf.encode()
        out["closed_form_verified"] = verify_monodromy_axioms(m, cf)
        out["closed_form_in_oracle"] = oracle.contains(cf)
        if not (out["closed_form_verified"] and out["closed_form_in_oracle"]):
            status = 2
    return out, status


def cmd_etale(doc, args):
    ctx = context_from(doc)
    m = ordinary_module(doc, ctx, random.Random(args.seed))
    T = doc.get("precision", {}).get("pi_truncation")
    em = to_etale(m, T)
    d = descend_isotypic(em)
    return (
        {
            "etale": em.encode(),
            "det_valuation": em.det_valuation(),
            "descent_pi_exponents": list(d.pi_exponents),
            "descent_pattern": list(d.diagonal_pattern),
            "descent": [[sorted(e.items()) for e in row] for row in d.matrix],
        },
        0,
    )


def cmd_fl(doc, args):
    ctx = context_from(doc)
    m = ordinary_module(doc, ctx, random.Random(args.seed))
    f = to_fl(m)
    out = {"fl": f.encode()}
    other = doc.get("compare_with")
    if other is not None:
        f2 = to_fl(ordinary_module({"gauge": other}, ctx, None))
        out["isomorphic_right"] = fl_isomorphic(f, f2, "right")
        out["isomorphic_conjugate"] = fl_isomorphic(f, f2, "conjugate")
    return out, 0


def cmd_dims(doc, args):
    ctx = context_from(doc)
    rng = random.Random(args.seed)
    base = ordinary_module(doc, ctx, rng) if "gauge" in doc else None
    if base is not None and base.gauge.v20:
        return {
            "tangent_dimensions": {"quasi": tangent_dimension("quasi", base)},
            "note": "base has v20 != 0, no monodromy",
        }, 0
    report = monodromy_locus_report(ctx, base, samples=doc.get("samples", 50), lines=doc.get("lines", 5), seed=args.seed)
    return report, 0


def cmd_selftest(doc, args):
    results = run_selftest(seed=args.seed)
    ok = all(r["ok"] for r in results)
    return {"results": results, "ok": ok}, 0 if ok else 2


def _check(name, fn):
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failed check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return {"name": name, "ok": bool(ok), "detail": detail}


def run_selftest(seed: int = 0) -> list[dict]:
    """A compact version of the invariant suite, runnable without pytest."""
    ctx = PrimeCtx(13, (0, 4, 8))
    rng = random.Random(seed)
    ring = get_ring(ctx, 8, 11)

    def phi_E():
        f = ring.phi_E
        ok = all(c % 13 == 0 for c in f.coeffs) and (f.c0 // 13) % 13 != 0
        return ok, "phi(E) = p * unit"

    def gauge_runs():
        bad = 0
        for _ in range(10):
            A0 = random_padic_frobenius(ring, rng)
            data, V, tr = diagonalize(A0, 8)
            data4, _, _ = diagonalize(A0, 4)
            if not (tr.ok and V.is_gauge_normal() and data.reduce(4) == data4):
                bad += 1
        return bad == 0, f"{10 - bad}/10 runs converged and agree at N'=4"

    def monodromy_iff():
        from .deformation import random_module

        bad = 0
        for k in range(20):
            m = random_module(ctx, rng, v20=0 if k % 2 else None)
            S = monodromy_bruteforce(m)
            if S.empty != (not monodromy_exists(m)):
                bad += 1
            elif not S.empty and not S.contains(monodromy_closed_form(m)):
                bad += 1
        return bad == 0, f"{20 - bad}/20 modules agree with the oracle"

    def dims():
        from .deformation import random_module

        m = random_module(ctx, rng, v20=0)
        d = (tangent_dimension("quasi", m), tangent_dimension("with_monodromy", m))
        return d == (7, 6) and excluded_directions(m) == ["v20"], f"dimensions {d}"

    def pipeline():
        from .comparison import rescale_gauge
        from .deformation import random_module

        bad = 0
        for _ in range(10):
            m = random_module(ctx, rng, v20=0)
            em = to_etale(m)
            d = descend_isotypic(em)
            t = (1, rng.randrange(1, 13), rng.randrange(1, 13))
            if not (
                em.det_valuation() == 3 * ctx.e
                and d.diagonal_pattern == (0, 5, 10)
                and d.strip() == to_fl(m).frob
                and fl_isomorphic(to_fl(m), to_fl(rescale_gauge(m, t)), "conjugate")
            ):
                bad += 1
        return bad == 0, f"{10 - bad}/10 comparison pipelines consistent"

    return [
        _check("frobenius of E", phi_E),
        _check("gauge convergence", gauge_runs),
        _check("monodromy iff", monodromy_iff),
        _check("tangent dimensions", dims),
        _check("comparison pipeline", pipeline),
    ]


HANDLERS = {
    "validate": cmd_validate,
    "gauge": cmd_gauge,
    "gauge-modp": cmd_gauge_modp,
    "monodromy": cmd_monodromy,
    "etale": cmd_etale,
    "fl": cmd_fl,
    "dims": cmd_dims,
    "selftest": cmd_selftest,
}


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, str, bool)) for x in (v if isinstance(v, list) else [])):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, sort_keys=True)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(_text(x, indent) if isinstance(x, dict) else f"{pad}- {json.dumps(x, sort_keys=True)}" for x in obj)
    return f"{pad}{obj}"


class _Parser(argparse.ArgumentParser):
    # bad flags are input errors (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="breuilkit", description="Breuil module computations")
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--command", dest="command_flag", choices=COMMANDS)
    ap.add_argument("--input", help="JSON input document")
    ap.add_argument("--precision", type=int, help="p-adic precision N")
    ap.add_argument("--fil", type=int, help="filtration level M")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--format", choices=("text", "machine"), default="text")
    ap.add_argument("--transcript", action="store_true")
    return ap


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    command = args.command_flag or args.command
    if command is None:
        print("error: no command given", file=sys.stderr)
        return 1
    try:
        doc = load_document(args.input)
        if args.seed is None:
            args.seed = int(doc.get("seed", 0))
        report, status = HANDLERS[command](doc, args)
    except InputError as exc:
        report, status = {"error": str(exc), "kind": "input"}, 1
    except GenericityViolation as exc:
        report, status = {"error": str(exc), "kind": "input"}, 1
    except NoConvergence as exc:
        report, status = {"error": str(exc), "kind": "no_convergence"}, 3
    except AssertionError as exc:
        report, status = {"error": str(exc), "kind": "assertion"}, 2
    except ValueError as exc:
        report, status = {"error": f"{type(exc).__name__}: {exc}", "kind": "input"}, 1
    except BreuilError as exc:
        report, status = {"error": f"{type(exc).__name__}: {exc}", "kind": "computation"}, 2
    report = {"command": command, **report}
    if args.format == "machine":
        out.write(json.dumps(report, sort_keys=True) + "\n")
    else:
        out.write(_text(report) + "\n")
    return status


def main() -> None:
    sys.exit(run())
