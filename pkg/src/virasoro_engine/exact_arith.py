"""Exact scalar, polynomial and truncated-series arithmetic.

Scalars are :class:`fractions.Fraction` throughout.  The central parameter
``c`` lives in :class:`CPoly`; truncated Laurent series in one variable live in
:class:`TruncLaurent`; :class:`MPoly` is a sparse multivariate polynomial used
to compare rational functions after clearing denominators.

All values are immutable once built.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

Rat = Fraction

_RAT_RE = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


class TruncationError(ArithmeticError):
    """An operation needed a coefficient outside the known window."""


def as_rat(value) -> Fraction:
    """Coerce ``int``, ``Fraction`` or a ``"p/q"`` string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RAT_RE.match(value):
            raise ValueError(f"malformed rational: {value!r}")
        num, _, den = value.replace(" ", "").partition("/")
        if den and int(den) == 0:
            raise ValueError(f"zero denominator: {value!r}")
        return Fraction(int(num), int(den) if den else 1)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def rat_str(x: Fraction) -> str:
    """Serialize a rational as ``"p"`` or ``"p/q"``."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Polynomials in the central parameter


class CPoly:
    """Univariate polynomial in the central parameter ``c`` over Q."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | int | Fraction | "CPoly" | None = None):
        if terms is None:
            data = {}
        elif isinstance(terms, CPoly):
            data = terms._terms
        elif isinstance(terms, Mapping):
            data = {}
            for k, v in terms.items():
                if k < 0:
                    raise ValueError("CPoly exponents must be non-negative")
                v = as_rat(v)
                if v:
                    data[int(k)] = v
        else:
            v = as_rat(terms)
            data = {0: v} if v else {}
        self._terms = data
        self._hash = None

    @classmethod
    def _raw(cls, data: dict) -> "CPoly":
        obj = cls.__new__(cls)
        obj._terms = data
        obj._hash = None
        return obj

    @classmethod
    def c(cls) -> "CPoly":
        return cls._raw({1: Fraction(1)})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def degree(self) -> int:
        return max(self._terms, default=-1)

    def coeff(self, k: int) -> Fraction:
        return self._terms.get(k, Fraction(0))

    def is_constant(self) -> bool:
        return all(k == 0 for k in self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __call__(self, c0) -> Fraction:
        c0 = as_rat(c0)
        total = Fraction(0)
        for k, v in self._terms.items():
            total += v * c0**k
        return total

    def _coerce(self, other) -> "CPoly | None":
        if isinstance(other, CPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return CPoly(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        data = dict(self._terms)
        for k, v in o._terms.items():
            s = data.get(k, 0) + v
            if s:
                data[k] = s
            else:
                data.pop(k, None)
        return CPoly._raw(data)

    __radd__ = __add__

    def __neg__(self):
        return CPoly._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return CPoly._raw({})
            return CPoly._raw({k: v * other for k, v in self._terms.items()})
        if not isinstance(other, CPoly):
            return NotImplemented
        data: dict[int, Fraction] = {}
        for i, a in self._terms.items():
            for j, b in other._terms.items():
                data[i + j] = data.get(i + j, 0) + a * b
        return CPoly._raw({k: v for k, v in data.items() if v})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self * (Fraction(1) / other)
        if isinstance(other, CPoly) and other.is_constant() and other:
            return self * (1 / other.coeff(0))
        return NotImplemented

    def __pow__(self, n: int):
        result = CPoly(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for k in sorted(self._terms, reverse=True):
            v = self._terms[k]
            if k == 0:
                parts.append(rat_str(v))
                continue
            mono = "c" if k == 1 else f"c^{k}"
            if v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{rat_str(v)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"CPoly({self})"


def as_cpoly(value) -> CPoly:
    return value if isinstance(value, CPoly) else CPoly(value)


def _is_zero(x) -> bool:
    return not x


# ---------------------------------------------------------------------------
# Truncated Laurent series


class TruncLaurent:
    """Laurent series ``sum a_k z^k`` known exactly for exponents below ``order``.

    ``order=None`` means the series is an exact Laurent polynomial.
    Coefficients are Fractions, or CPoly where the central parameter flows
    through.  Reading a coefficient at or above ``order`` raises
    :class:`TruncationError`.
    """

    __slots__ = ("var", "_coeffs", "order")

    def __init__(self, coeffs: Mapping[int, object] | None = None, order: int | None = None, var: str = "z"):
        self.var = var
        self.order = order
        data = {}
        for k, v in (coeffs or {}).items():
            if not isinstance(v, CPoly):
                v = as_rat(v)
            if v and (order is None or k < order):
                data[int(k)] = v
        self._coeffs = data

    @classmethod
    def _raw(cls, data, order, var):
        obj = cls.__new__(cls)
        obj.var = var
        obj.order = order
        obj._coeffs = data
        return obj

    @classmethod
    def monomial(cls, k: int, coeff=1, order: int | None = None, var: str = "z") -> "TruncLaurent":
        return cls({k: coeff}, order, var)

    @classmethod
    def from_list(cls, coeffs: Iterable, order: int | None = None, var: str = "z", start: int = 0):
        return cls({start + i: a for i, a in enumerate(coeffs)}, order, var)

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def _check_var(self, other: "TruncLaurent"):
        if other.var != self.var:
            raise ValueError(f"variable mismatch: {self.var!r} vs {other.var!r}")

    def known(self, k: int) -> bool:
        return self.order is None or k < self.order

    def coeff(self, k: int):
        if not self.known(k):
            raise TruncationError(f"coefficient of {self.var}^{k} unknown (order {self.order})")
        return self._coeffs.get(k, Fraction(0))

    def valuation(self) -> float:
        """Lowest exponent with non-zero coefficient; ``order`` (or inf) if none is known."""
        if self._coeffs:
            return min(self._coeffs)
        return float("inf") if self.order is None else self.order

    def is_zero(self) -> bool:
        """True if every known coefficient vanishes."""
        return not self._coeffs

    def truncate(self, order: int | None) -> "TruncLaurent":
        new = _min_order(self.order, order)
        return TruncLaurent(self._coeffs, new, self.var)

    def map_coeffs(self, fn) -> "TruncLaurent":
        return TruncLaurent({k: fn(v) for k, v in self._coeffs.items()}, self.order, self.var)

    def __add__(self, other):
        if not isinstance(other, TruncLaurent):
            other = TruncLaurent({0: other}, None, self.var)
        self._check_var(other)
        order = _min_order(self.order, other.order)
        data = {}
        for src in (self._coeffs, other._coeffs):
            for k, v in src.items():
                if order is None or k < order:
                    data[k] = data.get(k, 0) + v
        return TruncLaurent._raw({k: v for k, v in data.items() if v}, order, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncLaurent._raw({k: -v for k, v in self._coeffs.items()}, self.order, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncLaurent):
            if isinstance(other, (int, Fraction, CPoly)) and not isinstance(other, bool):
                return TruncLaurent._raw(
                    {k: v * other for k, v in self._coeffs.items() if v * other}, self.order, self.var
                )
            return NotImplemented
        self._check_var(other)
        va, vb = self.valuation(), other.valuation()
        if va == float("inf") or vb == float("inf"):
            # an exact zero factor gives an exact zero
            return TruncLaurent._raw({}, None, self.var)
        cand = []
        if self.order is not None:
            cand.append(self.order + vb)
        if other.order is not None:
            cand.append(other.order + va)
        order = min(cand) if cand else None
        data = {}
        for i, a in self._coeffs.items():
            for j, b in other._coeffs.items():
                k = i + j
                if order is None or k < order:
                    data[k] = data.get(k, 0) + a * b
        return TruncLaurent._raw({k: v for k, v in data.items() if v}, order, self.var)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = TruncLaurent({0: 1}, None, self.var)
        for _ in range(n):
            result = result * self
        return result

    def inverse(self, order: int | None = None) -> "TruncLaurent":
        """Multiplicative inverse.

        The leading coefficient must be a known non-zero scalar.  Exact
        multi-term inputs need an explicit ``order`` for the result.
        """
        if not self._coeffs:
            raise ZeroDivisionError("inverse of a series with no known non-zero coefficient")
        v = min(self._coeffs)
        lead = self._coeffs[v]
        if isinstance(lead, CPoly):
            if not lead.is_constant():
                raise ValueError("leading coefficient must be a scalar to invert")
            lead = lead.coeff(0)
        if self.order is None and len(self._coeffs) == 1:
            return TruncLaurent._raw({-v: 1 / lead}, None, self.var)
        rel = None if self.order is None else self.order - v
        if order is not None:
            rel = order + v if rel is None else min(rel, order + v)
        if rel is None:
            raise TruncationError("exact series inverse needs a target order")
        inv_lead = 1 / lead
        u = {k - v: a for k, a in self._coeffs.items()}
        b = [inv_lead]
        for k in range(1, rel):
            s = 0
            for i in range(1, k + 1):
                ui = u.get(i)
                if ui:
                    s = s + ui * b[k - i]
            b.append(-inv_lead * s)
        return TruncLaurent({k - v: bk for k, bk in enumerate(b)}, rel - v, self.var)

    def __truediv__(self, other):
        if isinstance(other, TruncLaurent):
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return NotImplemented

    def derivative(self) -> "TruncLaurent":
        order = None if self.order is None else self.order - 1
        return TruncLaurent._raw(
            {k - 1: v * k for k, v in self._coeffs.items() if k != 0}, order, self.var
        )

    def residue(self):
        """Coefficient of ``z^-1``."""
        return self.coeff(-1)

    def compose(self, g: "TruncLaurent") -> "TruncLaurent":
        """``self(g(z))`` for a power series ``self`` and ``g`` with ``g(0) = 0``."""
        f = self
        if f._coeffs and min(f._coeffs) < 0:
            raise ValueError("outer series of a composition must be a power series")
        vg = g.valuation()
        if vg == float("inf") or vg < 1:
            raise ValueError("inner series must have strictly positive known valuation")
        cand = []
        if f.order is not None:
            cand.append(f.order * vg)
        if g.order is not None and any(k >= 1 for k in f._coeffs):
            cand.append(g.order)
        order = min(cand) if cand else None
        result = TruncLaurent._raw({}, order, g.var)
        power = TruncLaurent._raw({0: Fraction(1)}, None, g.var)
        top = max(f._coeffs, default=0)
        for k in range(0, top + 1):
            if k > 0:
                power = (power * g).truncate(order)
            if order is not None and k * vg >= order:
                break
            a = f._coeffs.get(k)
            if a:
                result = result + (power * a)
        return result.truncate(order)

    def agrees_with(self, other: "TruncLaurent") -> bool:
        """Equality on the common known window."""
        self._check_var(other)
        order = _min_order(self.order, other.order)
        keys = set(self._coeffs) | set(other._coeffs)
        for k in keys:
            if order is not None and k >= order:
                continue
            if self._coeffs.get(k, 0) != other._coeffs.get(k, 0):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, TruncLaurent):
            return NotImplemented
        return self.var == other.var and self.order == other.order and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.var, self.order, frozenset(self._coeffs.items())))

    def __repr__(self):
        terms = " + ".join(f"({v})*{self.var}^{k}" for k, v in sorted(self._coeffs.items())) or "0"
        tail = "" if self.order is None else f" + O({self.var}^{self.order})"
        return f"TruncLaurent({terms}{tail})"


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def series_mul(a: TruncLaurent, b: TruncLaurent) -> TruncLaurent:
    return a * b


def residue(a: TruncLaurent):
    return a.residue()


def series_compose(f: TruncLaurent, g: TruncLaurent) -> TruncLaurent:
    return f.compose(g)


def exp_series(order: int, var: str = "z") -> TruncLaurent:
    coeffs, fact = {}, 1
    for k in range(order):
        if k:
            fact *= k
        coeffs[k] = Fraction(1, fact)
    return TruncLaurent(coeffs, order, var)


def log1p_series(order: int, var: str = "z") -> TruncLaurent:
    """``log(1 + z)``."""
    return TruncLaurent({k: Fraction((-1) ** (k + 1), k) for k in range(1, order)}, order, var)


# ---------------------------------------------------------------------------
# Multivariate polynomials


class MPoly:
    """Sparse polynomial over Q in named variables.

    Terms are keyed by exponent tuples aligned with ``variables``.  Printing
    uses graded lexicographic order; equality ignores order.
    """

    __slots__ = ("variables", "_terms")

    def __init__(self, variables: tuple[str, ...], terms: Mapping[tuple, object] | None = None):
        self.variables = tuple(variables)
        data = {}
        for exps, v in (terms or {}).items():
            if len(exps) != len(self.variables):
                raise ValueError("exponent tuple length does not match variables")
            v = as_rat(v)
            if v:
                data[tuple(exps)] = data.get(tuple(exps), 0) + v
        self._terms = {k: v for k, v in data.items() if v}

    @classmethod
    def _raw(cls, variables, data):
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._terms = data
        return obj

    @classmethod
    def const(cls, variables, value) -> "MPoly":
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def var(cls, variables, name: str) -> "MPoly":
        exps = tuple(1 if v == name else 0 for v in variables)
        if sum(exps) != 1:
            raise ValueError(f"unknown variable {name!r}")
        return cls(variables, {exps: 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def _check(self, other: "MPoly"):
        if other.variables != self.variables:
            raise ValueError("MPoly variable mismatch")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(self.variables, other)
        self._check(other)
        data = dict(self._terms)
        for k, v in other._terms.items():
            s = data.get(k, 0) + v
            if s:
                data[k] = s
            else:
                data.pop(k, None)
        return MPoly._raw(self.variables, data)

    __radd__ = __add__

    def __neg__(self):
        return MPoly._raw(self.variables, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return MPoly._raw(self.variables, {})
            return MPoly._raw(self.variables, {k: v * other for k, v in self._terms.items()})
        self._check(other)
        data: dict = {}
        for ea, a in self._terms.items():
            for eb, b in other._terms.items():
                k = tuple(x + y for x, y in zip(ea, eb))
                data[k] = data.get(k, 0) + a * b
        return MPoly._raw(self.variables, {k: v for k, v in data.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = MPoly.const(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        vals = [as_rat(values[v]) for v in self.variables]
        total = Fraction(0)
        for exps, coef in self._terms.items():
            term = coef
            for x, e in zip(vals, exps):
                if e:
                    term *= x**e
            total += term
        return total

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(self.variables, other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.variables == other.variables and self._terms == other._terms

    def __hash__(self):
        return hash((self.variables, frozenset(self._terms.items())))

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        """Terms in descending graded-lex order (variables ordered as given)."""
        return sorted(self._terms.items(), key=lambda kv: (sum(kv[0]), kv[0][::-1]), reverse=True)

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for exps, coef in self.sorted_terms():
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exps) if e
            )
            if not mono:
                out.append(rat_str(coef))
            elif coef == 1:
                out.append(mono)
            else:
                out.append(f"{rat_str(coef)}*{mono}")
        return " + ".join(out)

    def __repr__(self):
        return f"MPoly({self})"
