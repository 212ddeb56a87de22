"""Gauge bases by p-adic approximation, and ordinary form modulo p.

The state of the iteration is a pair ``(A, U)``: ``A`` is the matrix of the
divided Frobenius on the filtration generators and ``U`` the lower unipotent
part of the filtration matrix ``V = U * Diag(1, E, E^2)``.  Each step solves
for a new unipotent ``U'`` making ``adj(U) A U'`` lower-trivial up to the
step's congruence ideal, extracts ``B`` from ``A V' = V B``, and moves to
``phi(B)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .breuil_rings import (
    Fil,
    IdealTag,
    PrecisionLoss,
    RElem,
    RRing,
    get_ring,
    ideal_member,
    modp_ring,
)
from .coeff import BreuilError, Fq, NonUnit, ZpN
from .dd_matrix import (
    DDMatrix,
    SubsetTag,
    T_plus,
    T_plus_L,
    Bopp_plus,
    dd_adjugate,
    dd_divide_by_E,
    dd_frobenius,
    subset_member,
)


class NonUnitPivot(NonUnit):
    pass


class CongruenceFailure(BreuilError, AssertionError):
    pass


class MembershipFailure(BreuilError, AssertionError):
    pass


class NoConvergence(BreuilError, RuntimeError):
    pass


LOWER = ((1, 0), (2, 0), (2, 1))


@dataclass(frozen=True)
class FiltrationMatrix:
    """``V = U * Diag(1, E, E^2)`` with ``U`` lower unipotent."""

    ring: RRing
    v10: RElem
    v20: RElem
    v21: RElem

    @classmethod
    def standard(cls, ring: RRing) -> FiltrationMatrix:
        z = ring.zero
        return cls(ring, z, z, z)

    @classmethod
    def from_values(cls, ring: RRing, v10: int, v20: int, v20p: int, v21: int) -> FiltrationMatrix:
        return cls(ring, ring.const(v10), ring.elem([v20, v20p]), ring.const(v21))

    def unipotent(self) -> DDMatrix:
        r = self.ring
        z, o = r.zero, r.one
        return DDMatrix(r, [[o, z, z], [self.v10, o, z], [self.v20, self.v21, o]])

    def full(self) -> DDMatrix:
        # (U * Diag(d))_ij = u_ij d_j: no twist surplus since c(i,j,j) = 0
        r = self.ring
        d = (r.one, r.E, r.E * r.E)
        U = self.unipotent()
        return DDMatrix(r, [[U[i, j] * d[j] for j in range(3)] for i in range(3)])

    def is_gauge_normal(self) -> bool:
        return (
            self.v10.is_constant()
            and self.v21.is_constant()
            and not any(self.v20.coeffs[2:])
        )

    def conjugate(self, d) -> FiltrationMatrix:
        U = self.unipotent().conjugate_diag(d)
        return FiltrationMatrix(self.ring, U[1, 0], U[2, 0], U[2, 1])

    def reduce(self, N: int) -> FiltrationMatrix:
        return FiltrationMatrix(
            get_ring(self.ring.ctx, N, self.ring.M),
            self.v10.reduce(N),
            self.v20.reduce(N),
            self.v21.reduce(N),
        )

    def values(self) -> tuple[int, int, int, int]:
        """``(v10, v20, v20', v21)`` as integers (the leading coefficients)."""
        return (self.v10.c0, self.v20.c0, self.v20.coeffs[1] if self.ring.M > 1 else 0, self.v21.c0)

    def __eq__(self, other):
        if not isinstance(other, FiltrationMatrix):
            return NotImplemented
        return (self.ring, self.v10, self.v20, self.v21) == (other.ring, other.v10, other.v20, other.v21)

    def __hash__(self):
        return hash((self.v10, self.v20, self.v21))


@dataclass(frozen=True)
class GaugeData:
    """Gauge parameters ``(v10, v21, v20, v20')`` and Frobenius eigenvalues.

    Fields are ``ZpN`` for a p-adic run and ``Fq`` for ordinary form mod p.
    """

    v10: object
    v21: object
    v20: object
    v20p: object
    lam: tuple

    def __post_init__(self):
        if not all(x.is_unit() for x in self.lam):
            raise NonUnit("Frobenius eigenvalues must be units")

    @property
    def p(self) -> int:
        return self.v10.p

    @property
    def is_modp(self) -> bool:
        return isinstance(self.v10, Fq)

    def reduce(self, N: int = 1) -> GaugeData:
        """Image modulo ``p^N``; ``N = 1`` gives mod-p data."""
        conv = (lambda x: Fq(x.value, x.p)) if N == 1 else (lambda x: ZpN(x.value, x.p, N))
        return GaugeData(
            conv(self.v10), conv(self.v21), conv(self.v20), conv(self.v20p), tuple(conv(x) for x in self.lam)
        )

    def to_dict(self) -> dict:
        return {
            "v10": self.v10.value,
            "v21": self.v21.value,
            "v20": self.v20.value,
            "v20p": self.v20p.value,
            "lambda": [x.value for x in self.lam],
        }


@dataclass
class StepRecord:
    step: int
    parity: str
    n: int
    v: tuple
    B: list
    checks: dict
    precision: int

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "parity": self.parity,
            "n": self.n,
            "v": list(self.v),
            "B": self.B,
            "checks": dict(self.checks),
            "precision": self.precision,
        }


@dataclass
class IterationTranscript:
    steps: list = field(default_factory=list)
    final_A: DDMatrix | None = None

    @property
    def ok(self) -> bool:
        return all(all(s.checks.values()) for s in self.steps)

    def to_list(self) -> list:
        return [s.to_dict() for s in self.steps]


# ---------------------------------------------------------------------------
# one step


def _lower_tag(parity: str, d: int, n: int) -> IdealTag:
    if parity == "even":
        return Fil(d, n)
    return IdealTag("pFil", d, n)


def _solve(A: DDMatrix, V: FiltrationMatrix, n: int, parity: str) -> FiltrationMatrix:
    ring = A.ring
    W = dd_adjugate(V.unipotent())
    m = (W * A).rows
    m10, m11, m12 = m[1]
    m20, m21, m22 = m[2]
    for name, x in (("m11", m11), ("m22", m22)):
        if not x.is_unit():
            raise NonUnitPivot(f"pivot {name} is not a unit")
    ue = ring.ue
    det0 = m11 * m22 - m12 * ue * m21
    if not det0.is_unit():
        raise NonUnitPivot("det M0 is not a unit")
    inv22 = m22.inverse()
    v21 = -(m21 * inv22)
    v10 = -(det0.inverse() * (m22 * m10 - m12 * m20))
    v10 = v10.project(0)
    v21 = v21.project(0)
    # re-solve the (2,0) equation against the projected v10 before projecting v20
    v20 = -(inv22 * (m20 + ue * m21 * v10))
    v20 = v20.project(1)
    V_new = FiltrationMatrix(ring, v10, v20, v21)

    R = W * A * V_new.unipotent()
    for i, j in LOWER:
        tag = _lower_tag(parity, i - j, n)
        if not ideal_member(R[i, j], tag):
            raise CongruenceFailure(
                f"{parity} step n={n}: entry ({i},{j}) of adj(U) A U' not in {tag}"
            )
    return V_new


def even_step(A: DDMatrix, V: FiltrationMatrix, n: int) -> FiltrationMatrix:
    """Make ``A`` lower triangular modulo ``p^{n+1}`` (new filtration matrix)."""
    pre = SubsetTag("GL") if n == 0 else T_plus(IdealTag("R", n=n))
    if not subset_member(A, pre):
        raise MembershipFailure(f"even step n={n}: A not in {pre}")
    return _solve(A, V, n, "even")


def odd_step(A: DDMatrix, V: FiltrationMatrix, n: int) -> FiltrationMatrix:
    """Make ``A`` diagonal modulo ``p^{n+1}`` (new filtration matrix)."""
    pre = T_plus(IdealTag("IJp", n=n))
    if not subset_member(A, pre):
        raise MembershipFailure(f"odd step n={n}: A not in {pre}")
    return _solve(A, V, n, "odd")


def _B_tag(parity: str, n: int) -> SubsetTag:
    if parity == "odd":
        return T_plus(IdealTag("pFil", 0, n))
    if n == 0:
        return Bopp_plus(IdealTag("pFil", 0, 0))
    return T_plus_L(n)


def solve_B(
    A: DDMatrix, V_old: FiltrationMatrix, V_new: FiltrationMatrix, parity: str | None = None, n: int = 0
) -> DDMatrix:
    """``B`` with ``A V_new = V_old B``, read off from ``E^3 B = adj(V_old) A V_new``.

    ``B`` is determined modulo ``Fil^{M-3}``; both the identity and (when
    ``parity`` is given) the membership of ``B`` are asserted at that level.
    """
    ring = A.ring
    if ring.M <= 3:
        raise PrecisionLoss("need M > 3 to divide by E^3")
    Vo, Vn = V_old.full(), V_new.full()
    B = dd_divide_by_E(dd_adjugate(Vo) * A * Vn, 3)
    level = ring.M - 3
    if not (A * Vn).eq_upto(Vo * B, level):
        raise MembershipFailure("A V' = V B fails")
    if parity is not None:
        tag = _B_tag(parity, n)
        if not subset_member(B, tag, upto=level):
            raise MembershipFailure(f"{parity} step n={n}: B not in {tag}")
    return B


def _step(A, V, k, contracts: bool, modp: bool):
    parity = "even" if k % 2 == 0 else "odd"
    n = 0 if modp else k // 2
    V_new = even_step(A, V, n) if parity == "even" else odd_step(A, V, n)
    B = solve_B(A, V, V_new, parity, n)
    level = A.ring.M - 3
    part = None
    if contracts:
        part = "i" if parity == "even" else "ii"
    A_phi = dd_frobenius(B, part=part, n=n, upto=level)
    # the diagonal torus acts on the pair (A, U) by conjugation; normalising by
    # the new eigenvalues keeps the fixed point fixed
    d = tuple(A_phi[i, i].c0 for i in range(3))
    A_next = A_phi.conjugate_diag(d)
    V_next = V_new.conjugate(d)
    rec = StepRecord(
        step=k,
        parity=parity,
        n=n,
        v=V_new.values(),
        B=B.encode(),
        checks={"congruence": True, "AV=VB": True, "B_membership": True},
        precision=level,
    )
    return A_next, V_next, rec


def _is_diag_scalar(A: DDMatrix) -> bool:
    return subset_member(A, SubsetTag("T_scalar"))


def diagonalize(A0: DDMatrix, target_N: int | None = None, max_steps: int | None = None):
    """Run the even/odd iteration from ``V = Diag(1, E, E^2)``.

    Returns ``(GaugeData, FiltrationMatrix, IterationTranscript)``.
    """
    ctx = A0.ctx
    ctx.require_generic()
    Np = target_N or A0.ring.N
    if Np > A0.ring.N:
        raise PrecisionLoss(f"input known only mod p^{A0.ring.N}")
    M = A0.ring.M
    if M < Np + 3:
        raise PrecisionLoss(f"need M >= N' + 3, got M={M}, N'={Np}")
    ring = get_ring(ctx, Np, M)
    A = A0 if A0.ring == ring else A0.reduce(Np)
    if not subset_member(A, SubsetTag("GL")):
        raise MembershipFailure("A0 is not invertible")
    V = FiltrationMatrix.standard(ring)
    cap = max_steps if max_steps is not None else 2 * Np + 4
    tr = IterationTranscript()
    for k in range(cap):
        A_next, V_next, rec = _step(A, V, k, contracts=True, modp=False)
        tr.steps.append(rec)
        stable = A_next == A and V_next == V
        A, V = A_next, V_next
        if stable and _is_diag_scalar(A):
            tr.final_A = A
            return _gauge_data(A, V, ZpN, Np), V, tr
    tr.final_A = A
    raise NoConvergence(f"no stabilisation after {cap} steps")


def _gauge_data(A, V, kind, N=1) -> GaugeData:
    p = A.ring.p
    make = (lambda x: ZpN(x, p, N)) if kind is ZpN else (lambda x: Fq(x, p))
    v10, v20, v20p, v21 = V.values()
    return GaugeData(
        make(v10), make(v21), make(v20), make(v20p), tuple(make(A[i, i].c0) for i in range(3))
    )


def modp_matrix(A: DDMatrix) -> DDMatrix:
    """Reduce a p-adic matrix into ``F_p[u^e]/(u^{ep})`` (coefficients beyond ``M`` are zero)."""
    ring = modp_ring(A.ctx)
    return DDMatrix(ring, [[ring.elem(x.coeffs) for x in r] for r in A.rows])


def ordinary_form_modp(A: DDMatrix, V: FiltrationMatrix | None = None, max_sweeps: int = 4):
    """Ordinary form of a mod-p Breuil module with lower triangular Frobenius.

    Returns ``(GaugeData, FiltrationMatrix, IterationTranscript)`` with ``Fq``
    fields; raises ``NoConvergence`` if the pair ``(A, V)`` is not stable
    after ``max_sweeps`` steps.
    """
    ring = A.ring
    if not ring.is_modp:
        raise ValueError("ordinary_form_modp works over F_p[u^e]/(u^{ep})")
    ring.ctx.require_generic()
    if not subset_member(A, SubsetTag("B_opp")):
        raise MembershipFailure("A must be lower triangular and invertible")
    V = V or FiltrationMatrix.standard(ring)
    tr = IterationTranscript()
    for k in range(max_sweeps + 1):
        A_next, V_next, rec = _step(A, V, k, contracts=False, modp=True)
        tr.steps.append(rec)
        stable = A_next == A and V_next == V
        A, V = A_next, V_next
        if stable and _is_diag_scalar(A):
            tr.final_A = A
            return _gauge_data(A, V, Fq), V, tr
    tr.final_A = A
    raise NoConvergence(f"ordinary form not reached within {max_sweeps} sweeps")
