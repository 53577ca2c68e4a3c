"""Casimirs, variational derivatives and the first flows of a trio.

Flows are u_t = (P_1 + eps^2 R) dC for Casimirs C of Q_1; commutativity is the
vanishing of the prolonged Lie bracket of the two evolutionary fields.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .diffop import MatrixDiffOp, _DerivCache, apply
from .errors import NegativeRadicand, NotACasimir, PoleAtPoint, Undecided
from .jetcalc import Expression, eval_numeric, is_total_derivative, param, u, variational_gradient
from .jetcalc.expression import REGISTRY
from .linsolve import monomial_rows, solve

EPS = "eps"


@dataclass(frozen=True)
class Functional:
    """Integral of ``density`` over the circle; densities are equal modulo D_x."""

    density: Expression
    m: int = 2
    name: str = ""

    def gradient(self) -> list[Expression]:
        return variational_gradient(self.density, self.m)

    def equivalent(self, other: "Functional") -> bool:
        return is_total_derivative(self.density - other.density)


@dataclass
class Flow:
    """Evolutionary field u^i_t = F^i(u, u_x, ...)."""

    components: list
    name: str = ""
    eps: Optional[str] = EPS

    @property
    def m(self) -> int:
        return len(self.components)

    def at(self, eps) -> "Flow":
        if self.eps is None:
            return self
        return Flow([c.subs({param(self.eps): eps}) for c in self.components], self.name, None)

    def eps_part(self, power: int) -> list[Expression]:
        """Coefficient of eps^power in each component."""
        if self.eps is None:
            return list(self.components) if power == 0 else [Expression.const(0)] * self.m
        e = param(self.eps)
        out = []
        for c in self.components:
            out.append(c.coefficients([e]).get((power,), Expression.const(0)))
        return out

    def __eq__(self, other):
        if not isinstance(other, Flow) or other.m != self.m:
            return NotImplemented
        return all((a - b).is_zero() for a, b in zip(self.components, other.components))


def casimir_check(C: Functional, Q: MatrixDiffOp) -> bool:
    """Q dC = 0."""
    return all(x.is_zero() for x in apply(Q, C.gradient()))


def first_flows(trio: Sequence[MatrixDiffOp], casimirs: Sequence[Functional], eps=None) -> list[Flow]:
    """(P_1 + eps^2 R) dC for every Casimir C of Q_1; ``eps=None`` keeps eps symbolic."""
    P1, Q1, R = trio
    for C in casimirs:
        if not casimir_check(C, Q1):
            raise NotACasimir(f"{C.name or C.density} is not a Casimir of Q1")
    e = param(EPS) if eps is None else Expression.coerce(eps)
    op = P1 + R.scale(e * e)
    flows = []
    for C in casimirs:
        flows.append(Flow(apply(op, C.gradient()), C.name, EPS if eps is None else None))
    return flows


def prolonged_derivative(F: Sequence[Expression], G: Sequence[Expression]) -> list[Expression]:
    """(D_F[G])^i = sum_{j,k} dF^i/du^j_(k) D_x^k G^j."""
    caches = [_DerivCache(Expression.coerce(g)) for g in G]
    out = []
    for f in F:
        acc = Expression.const(0)
        for idx in f.deep_variables():
            v = REGISTRY.vars[idx]
            if v.kind != "u":
                continue
            acc = acc + f.diff(idx) * caches[v.field - 1][v.order]
        out.append(acc)
    return out


def commutator(F: Flow, G: Flow) -> list[Expression]:
    """Components of [F, G] = D_F[G] - D_G[F]."""
    if F.m != G.m:
        raise ValueError("flows of different size")
    a = prolonged_derivative(F.components, G.components)
    b = prolonged_derivative(G.components, F.components)
    return [x - y for x, y in zip(a, b)]


def _sample_value(e: Expression, rng: random.Random, lo: float, hi: float):
    pt = {}
    for idx in e.deep_variables():
        v = REGISTRY.vars[idx]
        if v.kind == "sqrt":
            continue
        if v.kind == "u" and v.order == 0:
            pt[idx] = Fraction(rng.randint(int(lo * 1000), int(hi * 1000)), 1000)
        else:
            pt[idx] = Fraction(rng.randint(-1000, 1000), 1000)
    return eval_numeric(e, pt)


def flows_commute(F: Flow, G: Flow, *, numeric: bool = False, samples: int = 10, seed: int = 0,
                  domain: tuple = (1.0, 2.0), tol: float = 1e-9) -> bool:
    """Exact test, or numeric evaluation of the commutator at seeded points."""
    comps = commutator(F, G)
    if not numeric:
        return all(c.is_zero() for c in comps)
    rng = random.Random(seed)
    for c in comps:
        good = 0
        tries = 0
        while good < samples:
            tries += 1
            if tries > 100 * samples:
                raise Undecided("no admissible sample points for the commutator")
            try:
                val = _sample_value(c, rng, *domain)
            except (PoleAtPoint, NegativeRadicand):
                continue
            if abs(val) > tol:
                return False
            good += 1
    return True


# -- Hamiltonian flows -------------------------------------------------------------------

@dataclass
class HamiltonianVerdict:
    hamiltonian: bool
    density: Optional[Expression] = None
    reason: str = ""
    obstructions: list = field(default_factory=list)

    def __bool__(self):
        return self.hamiltonian


def _monomials(m: int, order: int, degree: int) -> list[Expression]:
    vars_ = [u(i + 1, k) for k in range(order + 1) for i in range(m)]
    out = []
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(vars_, d):
            e = Expression.const(1)
            for v in combo:
                e = e * v
            out.append(e)
    return out


def _params_of(*exprs) -> list[Expression]:
    seen = set()
    for e in exprs:
        for idx in e.deep_variables():
            if REGISTRY.vars[idx].kind == "param":
                seen.add(idx)
    return [Expression.of_var(REGISTRY.vars[i]) for i in sorted(seen)]


def _linear_casimirs(P: MatrixDiffOp) -> list[Functional]:
    out = []
    for i in range(P.m):
        C = Functional(u(i + 1), P.m, f"u{i + 1}")
        if casimir_check(C, P):
            out.append(C)
    return out


def is_hamiltonian_flow(F: Flow, P: MatrixDiffOp, *, degree: int = 3, order: int = 1,
                        candidates: Sequence[Expression] = (),
                        casimirs: Sequence[Functional] = ()) -> HamiltonianVerdict:
    """Decide whether F = P dH for some density H.

    First the Casimir obstruction: for every Casimir C of P, dC . F must be a
    total derivative.  Then a bounded search for H among ``candidates`` and
    polynomial densities of the given degree and jet order (times the
    parameters occurring in F and P).  Exhausting the ansatz raises Undecided.
    """
    comps = [Expression.coerce(c) for c in F.components]
    if len(comps) != P.m:
        raise ValueError("flow and operator sizes differ")
    obstructions = []
    for C in list(casimirs) + _linear_casimirs(P):
        pairing = Expression.const(0)
        for a, b in zip(C.gradient(), comps):
            pairing = pairing + a * b
        if not is_total_derivative(pairing):
            obstructions.append(C.name or str(C.density))
    if obstructions:
        return HamiltonianVerdict(False, None, "Casimir obstruction", obstructions)
    params = _params_of(*comps, *[a for _, _, _, a in P.items()])
    basis = [Expression.coerce(c) for c in candidates]
    mons = _monomials(P.m, order, degree)
    basis += [p * mm for mm in mons for p in [Expression.const(1)] + params]
    columns = [apply(P, variational_gradient(b, P.m)) for b in basis]
    rows = monomial_rows(columns + [comps], len(basis) + 1)
    n = len(basis)
    x = solve([{j: v for j, v in r.items() if j < n} for r in rows], [r.get(n, 0) for r in rows], n)
    if x is None:
        raise Undecided(f"no density within degree {degree}, jet order {order}")
    H = Expression.const(0)
    for coef, b in zip(x, basis):
        if coef:
            H = H + b * coef
    check = apply(P, variational_gradient(H, P.m))
    if not all((a - b).is_zero() for a, b in zip(check, comps)):
        raise Undecided("the linear solve did not reproduce the flow")
    return HamiltonianVerdict(True, H, "density found")
