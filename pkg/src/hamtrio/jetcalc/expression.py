"""Exact expressions on the jet space.

An :class:`Expression` is a canonical rational function ``num/den`` of
multivariate polynomials with rational coefficients.  The indeterminates live
in one process-wide registry that only grows; polynomials built against an
older (smaller) context are lifted on demand.  Square roots are atoms:
each distinct radicand gets its own indeterminate, and s^2 is rewritten to the
radicand whenever an expression is normalised.

Canonical form: ``gcd(num, den) == 1`` and ``den`` is monic with respect to
the registry's lex order, so two rational expressions are equal iff their
numerators and denominators coincide.  Expressions that contain square-root
atoms are only compared numerically (see :meth:`Expression.is_zero`).
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import flint
import mpmath

from ..errors import HamtrioError, NegativeRadicand, PoleAtPoint

Number = Union[int, Fraction, flint.fmpq]

ZERO_TEST_POINTS = 8
ZERO_TEST_TOL = 1e-9


@dataclass(frozen=True)
class Var:
    """One indeterminate.

    ``kind`` is ``"u"`` (field ``u^field`` differentiated ``order`` times),
    ``"psi"`` (component ``field`` of test covector ``slot``, ``order``
    derivatives), ``"param"`` or ``"sqrt"`` (an opaque square-root atom).
    """

    name: str
    kind: str
    field: int = 0
    order: int = 0
    slot: int = 0

    @property
    def is_jet(self) -> bool:
        return self.kind in ("u", "psi")

    @property
    def weight(self) -> int:
        return self.order if self.is_jet else 0

    @property
    def dependent(self) -> tuple:
        """Key of the dependent variable this jet coordinate belongs to."""
        if self.kind == "u":
            return ("u", self.field)
        if self.kind == "psi":
            return ("psi", self.slot, self.field)
        raise ValueError(f"{self.name} is not a jet coordinate")


def u_name(i: int, k: int = 0) -> str:
    return f"u{i}" if k == 0 else f"u{i}_{k}"


def psi_name(a: int, i: int, k: int = 0) -> str:
    return f"psi{a}_{i}_{k}"


class _Registry:
    def __init__(self) -> None:
        self.lock = threading.RLock()
        self.vars: list[Var] = []
        self.index: dict[str, int] = {}
        self.ctx = flint.fmpq_mpoly_ctx.get((), "lex")
        self.radicands: dict[int, Expression] = {}
        self.sqrt_of: dict[tuple, int] = {}

    def intern(self, var: Var) -> int:
        idx = self.index.get(var.name)
        if idx is not None:
            if self.vars[idx] != var:
                raise HamtrioError(f"name clash for variable {var.name!r}")
            return idx
        with self.lock:
            idx = self.index.get(var.name)
            if idx is not None:
                return idx
            self.vars.append(var)
            idx = len(self.vars) - 1
            self.ctx = flint.fmpq_mpoly_ctx.get(tuple(v.name for v in self.vars), "lex")
            self.index[var.name] = idx
            return idx


REGISTRY = _Registry()


def var_index(var: Union[Var, str, int]) -> int:
    if isinstance(var, int):
        return var
    if isinstance(var, Var):
        return REGISTRY.intern(var)
    if isinstance(var, Expression):
        return index_of(var)
    idx = REGISTRY.index.get(var)
    if idx is None:
        raise KeyError(f"unknown variable {var!r}")
    return idx


def index_of(e: "Expression") -> int:
    """Registry index of an Expression that is a single indeterminate."""
    (idx,) = e.variables()
    return idx


def var_of(idx: int) -> Var:
    return REGISTRY.vars[idx]


def _lift(p: flint.fmpq_mpoly, ctx) -> flint.fmpq_mpoly:
    if p.context() is ctx:
        return p
    return p.project_to_context(ctx)


def _to_fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, int):
        return flint.fmpq(x)
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if isinstance(x, float):
        f = Fraction(x)
        return flint.fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


class Expression:
    """Immutable canonical rational function (possibly with sqrt atoms)."""

    __slots__ = ("_num", "_den", "_key", "_vars")

    def __init__(self, num: flint.fmpq_mpoly, den: flint.fmpq_mpoly):
        # callers guarantee canonical form; use Expression.from_polys otherwise
        self._num = num
        self._den = den
        self._key = None
        self._vars = None

    # -- construction -----------------------------------------------------
    @staticmethod
    def from_polys(num: flint.fmpq_mpoly, den: flint.fmpq_mpoly) -> "Expression":
        ctx = REGISTRY.ctx
        num = _lift(num, ctx)
        den = _lift(den, ctx)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if REGISTRY.radicands and not num.is_zero():
            num, den = _reduce_radicals(num, den, ctx)
        if num.is_zero():
            return Expression(num, ctx.constant(1))
        if den.is_constant():
            c = den.leading_coefficient()
            if c != 1:
                num = num / c
            return Expression(num, ctx.constant(1))
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        return Expression(num, den)

    @staticmethod
    def const(value: Number) -> "Expression":
        ctx = REGISTRY.ctx
        return Expression(ctx.constant(_to_fmpq(value)), ctx.constant(1))

    @staticmethod
    def of_var(var: Union[Var, str, int]) -> "Expression":
        idx = var_index(var)
        ctx = REGISTRY.ctx
        return Expression(ctx.gens()[idx], ctx.constant(1))

    def polys(self):
        """Numerator and denominator lifted to the current registry context."""
        ctx = REGISTRY.ctx
        if self._num.context() is not ctx:
            self._num = _lift(self._num, ctx)
            self._den = _lift(self._den, ctx)
        return self._num, self._den, ctx

    # -- coercion -----------------------------------------------------------
    @staticmethod
    def coerce(x) -> "Expression":
        if isinstance(x, Expression):
            return x
        if isinstance(x, (int, Fraction, flint.fmpq)):
            return Expression.const(x)
        raise TypeError(f"cannot use {type(x).__name__} as an Expression")

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        try:
            other = Expression.coerce(other)
        except TypeError:
            return NotImplemented
        an, ad, _ = self.polys()
        bn, bd, _ = other.polys()
        if ad == bd:
            return Expression.from_polys(an + bn, ad)
        if ad.is_one():
            return Expression(an * bd + bn, bd)
        if bd.is_one():
            return Expression(an + bn * ad, ad)
        g = ad.gcd(bd)
        if g.is_one():
            return Expression.from_polys(an * bd + bn * ad, ad * bd)
        bq = bd / g
        return Expression.from_polys(an * bq + bn * (ad / g), ad * bq)

    __radd__ = __add__

    def __neg__(self):
        n, d, _ = self.polys()
        return Expression(-n, d)

    def __sub__(self, other):
        try:
            other = Expression.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Expression.coerce(other) - self

    def __mul__(self, other):
        try:
            other = Expression.coerce(other)
        except TypeError:
            return NotImplemented
        an, ad, _ = self.polys()
        bn, bd, _ = other.polys()
        if an.is_zero() or bn.is_zero():
            return Expression(an * 0, REGISTRY.ctx.constant(1))
        if ad.is_one() and bd.is_one() and not REGISTRY.radicands:
            return Expression(an * bn, ad)
        return Expression.from_polys(an * bn, ad * bd)

    __rmul__ = __mul__

    def inverse(self) -> "Expression":
        n, d, _ = self.polys()
        if n.is_zero():
            raise ZeroDivisionError("division by zero expression")
        lc = n.leading_coefficient()
        return Expression(d / lc, n / lc)

    def __truediv__(self, other):
        try:
            other = Expression.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Expression.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        num, den, _ = self.polys()
        if self.atoms():
            return Expression.from_polys(num**n, den**n)
        return Expression(num**n, den**n)

    # -- comparison ------------------------------------------------------------
    def _canonical_key(self):
        if self._key is None:
            n, d, ctx = self.polys()
            names = ctx.names()

            def terms(p):
                out = []
                for exps, c in p.terms():
                    mono = tuple((names[i], e) for i, e in enumerate(exps) if e)
                    out.append((mono, (int(c.p), int(c.q))))
                return frozenset(out)

            self._key = (terms(n), terms(d))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Expression):
            try:
                other = Expression.coerce(other)
            except TypeError:
                return NotImplemented
        an, ad, _ = self.polys()
        bn, bd, _ = other.polys()
        return an == bn and ad == bd

    def __hash__(self):
        return hash(self._canonical_key())

    def __bool__(self):
        return not self.is_zero()

    # -- structure ---------------------------------------------------------------
    @property
    def num(self) -> "Expression":
        n, _, ctx = self.polys()
        return Expression(n, ctx.constant(1))

    @property
    def den(self) -> "Expression":
        _, d, ctx = self.polys()
        return Expression(d, ctx.constant(1))

    def is_polynomial(self) -> bool:
        return self.polys()[1].is_one()

    def is_constant(self) -> bool:
        n, d, _ = self.polys()
        return n.is_constant() and d.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        n, _, _ = self.polys()
        c = n.leading_coefficient() if not n.is_zero() else flint.fmpq(0)
        return Fraction(int(c.p), int(c.q))

    def variables(self) -> frozenset[int]:
        """Indices of indeterminates that occur directly (sqrt atoms included)."""
        if self._vars is None:
            n, d, _ = self.polys()
            out = set()
            for p in (n, d):
                if p.is_constant():
                    continue
                for i, e in enumerate(p.degrees()):
                    if e:
                        out.add(i)
            self._vars = frozenset(out)
        return self._vars

    def atoms(self) -> frozenset[int]:
        """Square-root atoms occurring directly."""
        return frozenset(i for i in self.variables() if REGISTRY.vars[i].kind == "sqrt")

    def deep_variables(self) -> frozenset[int]:
        """Variables including those hidden inside square-root radicands."""
        out = set(self.variables())
        for a in self.atoms():
            out |= REGISTRY.radicands[a].deep_variables()
        return frozenset(out)

    def has_radicals(self) -> bool:
        return bool(self.atoms())

    def depends_on(self, var) -> bool:
        return var_index(var) in self.deep_variables()

    def degree_in(self, var) -> int:
        """Degree of the numerator in ``var``; the denominator must be free of it."""
        idx = var_index(var)
        n, d, _ = self.polys()
        if not d.is_constant() and d.degrees()[idx]:
            raise ValueError(f"denominator depends on {var_of(idx).name}")
        return 0 if n.is_constant() else n.degrees()[idx]

    def coefficients(self, vars: Iterable) -> dict[tuple, "Expression"]:
        """Split the numerator as a polynomial in ``vars``.

        Returns ``{exponent tuple: coefficient}`` with coefficients divided by
        the denominator, which must not involve ``vars``.
        """
        idxs = [var_index(v) for v in vars]
        n, d, ctx = self.polys()
        if not d.is_constant():
            degs = d.degrees()
            for i in idxs:
                if degs[i]:
                    raise ValueError(f"denominator depends on {var_of(i).name}")
        if n.is_zero():
            return {}
        buckets: dict[tuple, dict] = {}
        for exps, c in n.terms():
            key = tuple(int(exps[i]) for i in idxs)
            rest = list(exps)
            for i in idxs:
                rest[i] = 0
            buckets.setdefault(key, {})[tuple(rest)] = c
        return {k: Expression.from_polys(ctx.from_dict(v), d) for k, v in buckets.items()}

    def coeff(self, var, power: int) -> "Expression":
        return self.coefficients([var]).get((power,), Expression.const(0))

    # -- calculus helpers ------------------------------------------------------
    def _pdiff(self, idx: int) -> "Expression":
        """Partial derivative treating sqrt atoms as independent variables."""
        n, d, ctx = self.polys()
        if idx >= ctx.nvars():
            return Expression.const(0)
        dn = n.derivative(idx) if not n.is_constant() else n * 0
        dd = d.derivative(idx) if not d.is_constant() else d * 0
        if dd.is_zero():
            return Expression.from_polys(dn, d)
        return Expression.from_polys(dn * d - n * dd, d * d)

    def diff(self, var) -> "Expression":
        """Partial derivative, with the chain rule through sqrt atoms."""
        idx = var_index(var)
        result = self._pdiff(idx) if idx in self.variables() else Expression.const(0)
        for a in self.atoms():
            rad = REGISTRY.radicands[a]
            if idx in rad.deep_variables():
                da = rad.diff(idx) / (2 * Expression.of_var(a))
                result = result + self._pdiff(a) * da
        return result

    def subs(self, mapping: Mapping) -> "Expression":
        """Simultaneous substitution ``{var: value}``."""
        if not mapping:
            return self
        values = {var_index(k): Expression.coerce(v) for k, v in mapping.items()}
        vs = self.variables()
        values = {k: v for k, v in values.items() if k in vs}
        atoms = self.atoms()
        full = {var_index(k): Expression.coerce(v) for k, v in mapping.items()}
        for a in atoms:
            rad = REGISTRY.radicands[a]
            if rad.deep_variables() & set(full):
                values[a] = sqrt(rad.subs(full))
        if not values:
            return self
        n, d, ctx = self.polys()
        return _eval_poly(n, values) / _eval_poly(d, values)

    # -- zero testing and numerics ----------------------------------------------
    def is_zero(self) -> bool:
        """Exact for rational expressions, numeric (semi-decision) with radicals."""
        n, _, _ = self.polys()
        if n.is_zero():
            return True
        if not self.atoms():
            return False
        return numeric_zero(self)

    def evaluate(self, point: Mapping, *, dps: int = 30):
        """Evaluate at ``point`` ({name or Var or index: number}).

        Exact (``Fraction``) when no radicals occur, otherwise an ``mpmath.mpf``.
        """
        values = {var_index(k): v for k, v in point.items()}
        return _evaluate(self, values, dps)

    # -- printing ----------------------------------------------------------------
    def __str__(self):
        from .grammar import format_expression

        return format_expression(self)

    def __repr__(self):
        return f"Expression({str(self)!r})"


def _reduce_radicals(num, den, ctx):
    """Rewrite s^k as r^(k//2) s^(k%2) for every sqrt atom s = sqrt(r)."""
    for _ in range(8):
        changed = False
        for a, rad in list(REGISTRY.radicands.items()):
            if a >= ctx.nvars():
                continue
            hn = (num.degrees()[a] // 2) if not num.is_constant() else 0
            hd = (den.degrees()[a] // 2) if not den.is_constant() else 0
            if not hn and not hd:
                continue
            rn, rd, _ = rad.polys()
            num = _halve(num, a, rn, rd, hn, ctx)
            den = _halve(den, a, rn, rd, hd, ctx)
            # num/rd^hn over den/rd^hd
            if hn > hd:
                den = den * rd ** (hn - hd)
            elif hd > hn:
                num = num * rd ** (hd - hn)
            changed = True
        if not changed:
            break
    return num, den


def _halve(p, a, rn, rd, h, ctx):
    """rd^h * p with s_a^k replaced by (rn/rd)^(k//2) s_a^(k%2)."""
    if not h:
        return p
    total = ctx.constant(0)
    for exps, c in p.terms():
        k = int(exps[a])
        rest = list(exps)
        rest[a] = k % 2
        q = k // 2
        total += ctx.from_dict({tuple(rest): c}) * rn**q * rd ** (h - q)
    return total


def _eval_poly(p: flint.fmpq_mpoly, values: Mapping[int, Expression]) -> Expression:
    """Substitute Expressions for some generators of ``p``."""
    ctx = p.context()
    if p.is_constant():
        return Expression.from_polys(p, ctx.constant(1))
    subs_idx = [i for i in values if i < ctx.nvars()]
    if all(values[i].is_polynomial() for i in subs_idx):
        nctx = REGISTRY.ctx
        gens = list(nctx.gens())
        args = [gens[i] for i in range(ctx.nvars())]
        for i in subs_idx:
            args[i] = values[i].polys()[0]
        out = p.compose(*args, ctx=nctx) if args else p
        return Expression.from_polys(out, nctx.constant(1))
    # rational substitution: clear denominators per variable
    degs = p.degrees()
    nctx = REGISTRY.ctx
    gens = nctx.gens()
    pieces = {i: values[i].polys()[:2] for i in subs_idx if degs[i]}
    denom = nctx.constant(1)
    for i, (_, dv) in pieces.items():
        denom *= dv ** degs[i]
    pow_cache: dict[tuple, flint.fmpq_mpoly] = {}

    def power(i, which, e):
        key = (i, which, e)
        if key not in pow_cache:
            pow_cache[key] = pieces[i][which] ** e
        return pow_cache[key]

    total = nctx.constant(0)
    for exps, c in p.terms():
        term = nctx.constant(c)
        for i, e in enumerate(exps):
            if i in pieces:
                term *= power(i, 0, e) * power(i, 1, degs[i] - e)
            elif e:
                term *= gens[i] ** e
        total += term
    return Expression.from_polys(total, denom)


def sqrt(e) -> Expression:
    """Square-root atom of ``e``; constant perfect squares are taken exactly."""
    e = Expression.coerce(e)
    if e.is_constant():
        v = e.constant_value()
        if v < 0:
            raise NegativeRadicand(f"sqrt of negative constant {v}")
        rn, rd = _isqrt(v.numerator), _isqrt(v.denominator)
        if rn is not None and rd is not None:
            return Expression.const(Fraction(rn, rd))
    key = e._canonical_key()
    idx = REGISTRY.sqrt_of.get(key)
    if idx is None:
        with REGISTRY.lock:
            idx = REGISTRY.sqrt_of.get(key)
            if idx is None:
                name = f"_sqrt{len(REGISTRY.sqrt_of)}"
                idx = REGISTRY.intern(Var(name, "sqrt"))
                REGISTRY.radicands[idx] = e
                REGISTRY.sqrt_of[key] = idx
    return Expression.of_var(idx)


def radicand(atom: int) -> Expression:
    return REGISTRY.radicands[atom]


def _isqrt(n: int):
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


# -- numeric evaluation --------------------------------------------------------

def _evaluate(e: Expression, values: Mapping[int, object], dps: int):
    n, d, ctx = e.polys()
    missing = [i for i in e.deep_variables() if REGISTRY.vars[i].kind != "sqrt" and i not in values]
    if missing:
        raise KeyError("unassigned variables: " + ", ".join(REGISTRY.vars[i].name for i in missing))
    if not e.atoms():
        exact = {REGISTRY.vars[i].name: _to_fmpq(_as_rational(values[i])) for i in e.variables()}
        dv = d.subs(exact) if exact else d
        dval = dv.leading_coefficient() if not dv.is_zero() else flint.fmpq(0)
        if dval == 0:
            raise PoleAtPoint(f"denominator of {e} vanishes")
        nv = n.subs(exact) if exact else n
        nval = nv.leading_coefficient() if not nv.is_zero() else flint.fmpq(0)
        q = nval / dval
        return Fraction(int(q.p), int(q.q))
    with mpmath.workdps(dps):
        mp_values = {i: mpmath.mpf(_as_mp(values[i])) for i in values}
        _fill_atoms(e, mp_values, dps)
        dval = _mp_poly(d, mp_values)
        if dval == 0:
            raise PoleAtPoint(f"denominator of {e} vanishes")
        return _mp_poly(n, mp_values) / dval


def _as_rational(x):
    if isinstance(x, float):
        return Fraction(x)
    return x


def _as_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, flint.fmpq):
        return mpmath.mpf(int(x.p)) / int(x.q)
    return x


def _fill_atoms(e: Expression, mp_values: dict, dps: int) -> None:
    for a in e.atoms():
        if a in mp_values:
            continue
        rad = REGISTRY.radicands[a]
        _fill_atoms(rad, mp_values, dps)
        rn, rd, _ = rad.polys()
        den = _mp_poly(rd, mp_values)
        if den == 0:
            raise PoleAtPoint(f"radicand {rad} has a pole")
        val = _mp_poly(rn, mp_values) / den
        if val < 0:
            raise NegativeRadicand(f"sqrt({rad}) of negative value")
        mp_values[a] = mpmath.sqrt(val)


def _mp_poly(p: flint.fmpq_mpoly, values: Mapping[int, object]):
    total = mpmath.mpf(0)
    for exps, c in p.terms():
        term = mpmath.mpf(int(c.p)) / int(c.q)
        for i, k in enumerate(exps):
            if k:
                term *= values[i] ** int(k)
        total += term
    return total


def sample_point(variables: Iterable[int], rng: random.Random, lo=-2, hi=2) -> dict[int, Fraction]:
    return {i: Fraction(rng.randint(lo * 1000, hi * 1000), 1000) for i in variables}


def numeric_zero(e: Expression, points: int = ZERO_TEST_POINTS, tol: float = ZERO_TEST_TOL) -> bool:
    """Semi-decision: ``e`` vanishes within ``tol`` at ``points`` random points."""
    rng = random.Random(0x5EED)
    base = [i for i in e.deep_variables() if REGISTRY.vars[i].kind != "sqrt"]
    good = 0
    for _ in range(100 * points):
        pt = sample_point(base, rng)
        try:
            val = _evaluate(e, pt, 40)
        except (PoleAtPoint, NegativeRadicand):
            continue
        if abs(val) > tol:
            return False
        good += 1
        if good >= points:
            return True
    raise HamtrioError(f"could not find {points} admissible sample points for {e}")


# -- convenient constructors -----------------------------------------------------

def u(i: int, k: int = 0) -> Expression:
    return Expression.of_var(Var(u_name(i, k), "u", field=i, order=k))


def psi(a: int, i: int, k: int = 0) -> Expression:
    return Expression.of_var(Var(psi_name(a, i, k), "psi", field=i, order=k, slot=a))


def param(name: str) -> Expression:
    return Expression.of_var(Var(name, "param"))


def const(x: Number) -> Expression:
    return Expression.const(x)


def zero() -> Expression:
    return Expression.const(0)


def one() -> Expression:
    return Expression.const(1)
