"""Total derivative, Euler operator, grading and numeric evaluation."""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import flint

from ..errors import JetOrderExceeded, NotHomogeneous
from .expression import (
    REGISTRY,
    Expression,
    Var,
    psi_name,
    u_name,
    var_index,
)

DEFAULT_MAX_JET_ORDER = 9

_jet_cap: contextvars.ContextVar[int] = contextvars.ContextVar("jet_cap", default=DEFAULT_MAX_JET_ORDER)


def max_jet_order() -> int:
    return _jet_cap.get()


@contextlib.contextmanager
def jet_order(cap: int):
    """Temporarily change the jet-order cap (per thread / task)."""
    token = _jet_cap.set(cap)
    try:
        yield cap
    finally:
        _jet_cap.reset(token)


@dataclass(frozen=True)
class JetContext:
    """Component count, jet cap and declared parameter names."""

    m: int
    max_jet_order: int = DEFAULT_MAX_JET_ORDER
    params: tuple[str, ...] = field(default=())

    def fields(self) -> list[Expression]:
        from .expression import u

        return [u(i) for i in range(1, self.m + 1)]

    def activate(self):
        return jet_order(self.max_jet_order)


_next_cache: dict[int, int] = {}


def _shift(idx: int) -> int:
    """Index of the jet coordinate one derivative higher."""
    nxt = _next_cache.get(idx)
    if nxt is not None:
        return nxt
    v = REGISTRY.vars[idx]
    k = v.order + 1
    if v.kind == "u":
        nv = Var(u_name(v.field, k), "u", field=v.field, order=k)
    else:
        nv = Var(psi_name(v.slot, v.field, k), "psi", field=v.field, order=k, slot=v.slot)
    nxt = REGISTRY.intern(nv)
    _next_cache[idx] = nxt
    return nxt


def _dx_poly(p: flint.fmpq_mpoly, ctx, jets: list[int]) -> flint.fmpq_mpoly:
    out = ctx.constant(0)
    gens = ctx.gens()
    for idx in jets:
        dp = p.derivative(idx)
        if not dp.is_zero():
            out += dp * gens[_shift(idx)]
    return out


def _check_cap(e: Expression) -> list[int]:
    cap = _jet_cap.get()
    jets = []
    for idx in e.variables():
        v = REGISTRY.vars[idx]
        if v.is_jet:
            if v.order + 1 > cap:
                raise JetOrderExceeded(f"D_x of {v.name} exceeds jet order cap {cap}")
            jets.append(idx)
    return jets


def total_derivative(e, times: int = 1) -> Expression:
    """D_x applied ``times`` times; sqrt atoms are differentiated through."""
    e = Expression.coerce(e)
    for _ in range(times):
        e = _total_derivative(e)
    return e


def _total_derivative(e: Expression) -> Expression:
    jets = _check_cap(e)
    for idx in jets:
        _shift(idx)
    atoms = sorted(e.atoms())
    n, d, ctx = e.polys()
    if not jets and not atoms:
        return Expression.const(0)
    dn = _dx_poly(n, ctx, jets)
    if d.is_one():
        out = Expression.from_polys(dn, d)
    else:
        dd = _dx_poly(d, ctx, jets)
        out = Expression.from_polys(dn * d - n * dd, d * d)
    for a in atoms:
        rad = REGISTRY.radicands[a]
        dr = _total_derivative(rad)
        if dr.is_zero():
            continue
        out = out + e._pdiff(a) * dr / (2 * Expression.of_var(a))
    return out


Dx = total_derivative


# -- dependent variables -----------------------------------------------------------

DepVar = Union[int, tuple]


def dependent_key(var: DepVar) -> tuple:
    """Normalise ``i`` / ``("u", i)`` / ``("psi", a, i)`` to a dependent key."""
    if isinstance(var, int):
        return ("u", var)
    if isinstance(var, tuple) and var and var[0] in ("u", "psi"):
        return var
    raise ValueError(f"not a dependent variable: {var!r}")


def dependent_variables(e: Expression) -> list[tuple]:
    keys = set()
    for idx in e.deep_variables():
        v = REGISTRY.vars[idx]
        if v.is_jet:
            keys.add(v.dependent)
    return sorted(keys)


def jet_coordinates(e: Expression, var: DepVar) -> dict[int, int]:
    """``{order: registry index}`` of the jets of ``var`` occurring in ``e``."""
    key = dependent_key(var)
    out = {}
    for idx in e.deep_variables():
        v = REGISTRY.vars[idx]
        if v.is_jet and v.dependent == key:
            out[v.order] = idx
    return out


def jet_order_of(e: Expression) -> int:
    """Highest derivative order of any jet coordinate in ``e`` (-1 if none)."""
    orders = [REGISTRY.vars[i].order for i in e.deep_variables() if REGISTRY.vars[i].is_jet]
    return max(orders, default=-1)


def euler(e, var: DepVar) -> Expression:
    """Variational derivative sum_k (-D_x)^k d e / d var_(k), Horner style."""
    e = Expression.coerce(e)
    jets = jet_coordinates(e, var)
    if not jets:
        return Expression.const(0)
    top = max(jets)
    result = Expression.const(0)
    for k in range(top, -1, -1):
        if result.is_zero():
            result = e.diff(jets[k]) if k in jets else result
        else:
            result = (e.diff(jets[k]) if k in jets else Expression.const(0)) - total_derivative(result)
    return result


def variational_gradient(e, m: int) -> list[Expression]:
    return [euler(e, i) for i in range(1, m + 1)]


def is_total_derivative(e) -> bool:
    """True iff every Euler residual (fields and test covectors) vanishes."""
    e = Expression.coerce(e)
    if e.is_zero():
        return True
    return all(euler(e, key).is_zero() for key in dependent_variables(e))


def _var_weight(idx: int):
    v = REGISTRY.vars[idx]
    return _atom_weight(idx) if v.kind == "sqrt" else v.weight


def _poly_weights(p) -> set:
    out = set()
    for exps, _ in p.terms():
        out.add(sum(_var_weight(i) * int(k) for i, k in enumerate(exps) if k))
    return out


_atom_weight_cache: dict[int, Fraction] = {}


def _atom_weight(idx: int) -> Fraction:
    w = _atom_weight_cache.get(idx)
    if w is None:
        # raises NotHomogeneous for a mixed radicand
        w = Fraction(homogeneous_degree(REGISTRY.radicands[idx]), 2)
        _atom_weight_cache[idx] = w
    return w


def homogeneous_degree(e) -> int:
    """Total jet degree, with u^i_(k) of weight k; NotHomogeneous if mixed."""
    e = Expression.coerce(e)
    n, d, _ = e.polys()
    if n.is_zero():
        raise NotHomogeneous("the zero expression has no degree")
    nw = _poly_weights(n)
    dw = _poly_weights(d)
    if len(nw) != 1 or len(dw) != 1:
        raise NotHomogeneous(f"{e} mixes jet degrees")
    deg = nw.pop() - dw.pop()
    if isinstance(deg, Fraction):
        if deg.denominator != 1:
            raise NotHomogeneous(f"{e} has fractional degree {deg}")
        deg = int(deg)
    return deg


def eval_numeric(e, point: Mapping) -> float:
    """IEEE double value of ``e`` at ``point`` ({name|Var|index|Expression: number})."""
    e = Expression.coerce(e)
    resolved = {}
    for k, v in point.items():
        if isinstance(k, Expression):
            (k,) = k.variables()
        resolved[var_index(k)] = v
    return float(e.evaluate(resolved))


def split_by(e: Expression, vars: Iterable) -> dict[tuple, Expression]:
    """Coefficients of ``e`` as a polynomial in ``vars`` (denominator free of them)."""
    return e.coefficients(list(vars))
