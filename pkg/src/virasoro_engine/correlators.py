"""Sphere correlators of the stress tensor as exact rational functions.

A correlator is stored as a sum of products of pairwise differences
``(x_i - x_j)^e`` (``i < j``, 0-based point labels, ``e`` any integer) with
coefficients in Q[c].  Products, derivatives and relabelings stay inside this
form; equality of two sums goes through a common denominator.
"""

from __future__ import annotations

import itertools
import math
import os
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exact_arith import CPoly, MPoly, as_rat

DiffMonomial = tuple  # sorted tuple of ((i, j), e) with i < j and e != 0

WARD = "ward"
PAPER_PRINTED = "paper-printed"

MAX_POINTS = int(os.environ.get("VIRASORO_MAX_POINTS", "6"))

_HALF_C = CPoly({1: Fraction(1, 2)})


def _monomial(exps: Mapping[tuple[int, int], int]) -> DiffMonomial:
    return tuple(sorted((k, e) for k, e in exps.items() if e))


def _oriented(i: int, j: int, k: int) -> tuple[tuple[int, int], int]:
    """Return ((a, b), sign) with a < b and (x_i - x_j)^k = sign * (x_a - x_b)^k."""
    if i == j:
        raise ValueError("a difference needs two distinct points")
    if i < j:
        return (i, j), 1
    return (j, i), (-1 if k % 2 else 1)


class CorrelatorSum:
    """Sum of difference monomials with Q[c] coefficients on ``n`` points."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[DiffMonomial, object] | None = None):
        self.n = n
        data: dict = {}
        for mono, coef in (terms or {}).items():
            mono = _monomial(dict(mono))
            for (i, j), _ in mono:
                if not (0 <= i < j < n):
                    raise ValueError(f"pair {(i, j)} invalid for n={n}")
            coef = coef if isinstance(coef, CPoly) else CPoly(coef)
            data[mono] = data.get(mono, CPoly()) + coef
        self._terms = {k: v for k, v in data.items() if v}

    @classmethod
    def _raw(cls, n, data):
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = data
        return obj

    @classmethod
    def constant(cls, n: int, value=1) -> "CorrelatorSum":
        return cls(n, {(): value})

    @classmethod
    def pair_power(cls, n: int, i: int, j: int, k: int, coeff=1) -> "CorrelatorSum":
        """``coeff * (x_i - x_j)^k`` (any orientation)."""
        key, sign = _oriented(i, j, k)
        return cls(n, {((key, k),): as_cpoly_scaled(coeff, sign)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_structurally_zero(self) -> bool:
        return not self._terms

    def _check(self, other: "CorrelatorSum"):
        if other.n != self.n:
            raise ValueError(f"point count mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "CorrelatorSum") -> "CorrelatorSum":
        self._check(other)
        data = dict(self._terms)
        for k, v in other._terms.items():
            s = data.get(k)
            s = v if s is None else s + v
            if s:
                data[k] = s
            else:
                data.pop(k, None)
        return CorrelatorSum._raw(self.n, data)

    def __neg__(self):
        return CorrelatorSum._raw(self.n, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "CorrelatorSum":
        data = {k: v * factor for k, v in self._terms.items()}
        return CorrelatorSum._raw(self.n, {k: v for k, v in data.items() if v})

    def times_pair(self, i: int, j: int, k: int) -> "CorrelatorSum":
        """Multiply by ``(x_i - x_j)^k``."""
        key, sign = _oriented(i, j, k)
        data: dict = {}
        for mono, coef in self._terms.items():
            exps = dict(mono)
            exps[key] = exps.get(key, 0) + k
            new = _monomial(exps)
            val = coef * sign
            data[new] = data[new] + val if new in data else val
        return CorrelatorSum._raw(self.n, {m: v for m, v in data.items() if v})

    def derivative(self, k: int) -> "CorrelatorSum":
        """Partial derivative with respect to ``x_k``."""
        data: dict = {}
        for mono, coef in self._terms.items():
            for idx, ((a, b), e) in enumerate(mono):
                if k != a and k != b:
                    continue
                factor = e if k == a else -e
                exps = dict(mono)
                exps[(a, b)] = e - 1
                new = _monomial(exps)
                val = coef * factor
                data[new] = data[new] + val if new in data else val
        return CorrelatorSum._raw(self.n, {m: v for m, v in data.items() if v})

    def relabel(self, mapping: Mapping[int, int], n: int | None = None) -> "CorrelatorSum":
        """Rename point ``i`` to ``mapping[i]`` (orientation signs handled)."""
        n = self.n if n is None else n
        data: dict = {}
        for mono, coef in self._terms.items():
            exps: dict = {}
            sign = 1
            for (a, b), e in mono:
                key, s = _oriented(mapping[a], mapping[b], e)
                exps[key] = exps.get(key, 0) + e
                sign *= s
            new = _monomial(exps)
            val = coef * sign
            data[new] = data[new] + val if new in data else val
        return CorrelatorSum._raw(n, {m: v for m, v in data.items() if v})

    def compose_perm(self, perm: Sequence[int]) -> "CorrelatorSum":
        """``F o perm``: the function ``x -> F(x_perm[0], ..., x_perm[n-1])``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"not a permutation of 0..{self.n - 1}: {perm}")
        return self.relabel({i: perm[i] for i in range(self.n)})

    def c_part(self, power: int) -> "CorrelatorSum":
        """Terms' coefficient of ``c^power`` (as constant coefficients)."""
        data = {}
        for mono, coef in self._terms.items():
            v = coef.coeff(power)
            if v:
                data[mono] = CPoly(v)
        return CorrelatorSum._raw(self.n, data)

    def evaluate(self, points: Sequence, c0) -> Fraction:
        if len(points) != self.n:
            raise ValueError(f"expected {self.n} points, got {len(points)}")
        xs = [as_rat(p) for p in points]
        if len(set(xs)) != len(xs):
            raise ZeroDivisionError("coincident insertion points")
        c0 = as_rat(c0)
        total = Fraction(0)
        for mono, coef in self._terms.items():
            val = coef(c0)
            for (a, b), e in mono:
                val *= (xs[a] - xs[b]) ** e
            total += val
        return total

    def max_poles(self) -> dict[tuple[int, int], int]:
        poles: dict = {}
        for mono in self._terms:
            for key, e in mono:
                if e < 0:
                    poles[key] = max(poles.get(key, 0), -e)
        return poles

    def numerator(self, poles: Mapping[tuple[int, int], int] | None = None, anchor_first: bool = True) -> MPoly:
        """Expand ``F * prod (x_i - x_j)^poles[i, j]`` as a polynomial.

        With ``anchor_first`` the first point is placed at 0; every factor is a
        difference, so this loses nothing when testing for vanishing.
        """
        if poles is None:
            poles = self.max_poles()
        return _expand(self, dict(poles), anchor_first)

    def to_json(self) -> list[dict]:
        out = []
        for mono, coef in sorted(self._terms.items()):
            out.append(
                {
                    "coefficient": str(coef),
                    "factors": [{"i": a + 1, "j": b + 1, "power": e} for (a, b), e in mono],
                }
            )
        return out

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for mono, coef in sorted(self._terms.items()):
            fac = "*".join(f"(x{a + 1}-x{b + 1})^{e}" for (a, b), e in mono)
            parts.append(f"({coef})" + (f"*{fac}" if fac else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"CorrelatorSum(n={self.n}, {self})"


def as_cpoly_scaled(value, sign: int) -> CPoly:
    base = value if isinstance(value, CPoly) else CPoly(value)
    return base * sign


def _variables(n: int) -> tuple[str, ...]:
    return ("c",) + tuple(f"x{i + 1}" for i in range(n))


_BITS = 12  # per-variable exponent field in packed monomial keys


def _expand(F: CorrelatorSum, poles: dict, anchor_first: bool) -> MPoly:
    # Packed-integer kernel: monomial keys are ints with one _BITS-wide field
    # per variable, coefficients are ints after clearing denominators.
    variables = _variables(F.n)
    nv = len(variables)
    mask = (1 << _BITS) - 1
    denom = 1
    for coef in F._terms.values():
        for v in coef.terms.values():
            denom = denom * v.denominator // math.gcd(denom, v.denominator)

    def shift(var_index: int) -> int:
        return 1 << (_BITS * var_index)

    def x(i: int) -> dict:
        if anchor_first and i == 0:
            return {}
        return {shift(i + 1): 1}

    def mul(p: dict, q: dict) -> dict:
        out: dict = {}
        get = out.get
        for ka, a in p.items():
            for kb, b in q.items():
                k = ka + kb
                out[k] = get(k, 0) + a * b
        return {k: v for k, v in out.items() if v}

    power_cache: dict = {}

    def diff_power(a: int, b: int, k: int) -> dict:
        key = (a, b, k)
        if key not in power_cache:
            base = dict(x(a))
            for m, v in x(b).items():
                base[m] = base.get(m, 0) - v
            result = {0: 1}
            for _ in range(k):
                result = mul(result, base)
            power_cache[key] = result
        return power_cache[key]

    total: dict = {}
    for mono, coef in F._terms.items():
        exps = dict(mono)
        prod = {k * shift(0): int(v * denom) for k, v in coef.terms.items()}
        for key in sorted(set(exps) | set(poles)):
            k = exps.get(key, 0) + poles.get(key, 0)
            if k < 0:
                raise ValueError("pole bound too small for numerator expansion")
            if k:
                if k > mask:
                    raise OverflowError("exponent exceeds packed field width")
                prod = mul(prod, diff_power(key[0], key[1], k))
        for m, v in prod.items():
            s = total.get(m, 0) + v
            if s:
                total[m] = s
            else:
                del total[m]
    terms = {}
    for m, v in total.items():
        exps = tuple((m >> (_BITS * i)) & mask for i in range(nv))
        terms[exps] = Fraction(v, denom)
    return MPoly._raw(variables, terms)


def corr_equal(A: CorrelatorSum, B: CorrelatorSum) -> bool:
    """Exact equality of rational functions via a common denominator."""
    A._check(B)
    D = A - B
    if D.is_structurally_zero():
        return True
    return not D.numerator()


def is_zero(F: CorrelatorSum) -> bool:
    return F.is_structurally_zero() or not F.numerator()


# ---------------------------------------------------------------------------
# n-point recursion


@lru_cache(maxsize=None)
def _npoint_on(labels: tuple[int, ...], n: int, form: str) -> CorrelatorSum:
    k = len(labels)
    if k == 0:
        return CorrelatorSum.constant(n, 1)
    if k == 1:
        return CorrelatorSum(n)
    first, rest = labels[0], labels[1:]
    prev = _npoint_on(rest, n, form)
    total = CorrelatorSum(n)
    for pos, xj in enumerate(rest):
        hat = rest[:pos] + rest[pos + 1 :]
        prev2 = _npoint_on(hat, n, form)
        if form == WARD:
            total = total + prev.times_pair(first, xj, -2).scale(2)
            total = total + prev.derivative(xj).times_pair(first, xj, -1)
            total = total + prev2.times_pair(first, xj, -4).scale(_HALF_C)
        elif form == PAPER_PRINTED:
            # j is the 1-based position of xj in the original argument list
            j = pos + 2
            total = total + prev.derivative(xj).times_pair(xj, first, -1)
            total = total + prev.times_pair(xj, first, -2)
            total = total + prev2.times_pair(xj, first, -4).scale(_HALF_C * (-1 if j % 2 else 1))
        else:
            raise ValueError(f"unknown recursion form {form!r}")
    return total


def npoint(n: int, form: str = WARD, max_points: int | None = None) -> CorrelatorSum:
    """The ``n``-point function of the stress tensor on the sphere.

    ``form="ward"`` uses weight coefficient 2 on the double pole and
    ``1/(x_1 - x_j)`` on the derivative term; ``form="paper-printed"`` keeps
    the alternative coefficients (unit double pole, ``1/(x_j - x_1)``
    orientation, alternating sign on the central term) for comparison.
    """
    cap = MAX_POINTS if max_points is None else max_points
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > cap:
        raise ValueError(f"n={n} exceeds the configured cap of {cap} points")
    return _npoint_on(tuple(range(n)), n, form)


def two_point_closed_form() -> CorrelatorSum:
    return CorrelatorSum(2, {(((0, 1), -4),): _HALF_C})


def three_point_closed_form() -> CorrelatorSum:
    return CorrelatorSum(3, {(((0, 1), -2), ((0, 2), -2), ((1, 2), -2)): CPoly.c()})


def pairing_sum(n: int) -> CorrelatorSum:
    """Sum over perfect pairings of products of 2-point functions."""
    if n % 2:
        return CorrelatorSum(n)

    def pairings(items):
        if not items:
            yield []
            return
        a = items[0]
        for idx in range(1, len(items)):
            b = items[idx]
            rest = items[1:idx] + items[idx + 1 :]
            for p in pairings(rest):
                yield [(a, b)] + p

    total = CorrelatorSum(n)
    for p in pairings(list(range(n))):
        term = CorrelatorSum.constant(n, _HALF_C ** len(p))
        for a, b in p:
            term = term.times_pair(a, b, -4)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Checks


def ward_defects(F: CorrelatorSum, weight: int = 2) -> tuple[CorrelatorSum, CorrelatorSum, CorrelatorSum]:
    """Global conformal Ward operators applied to ``F``.

    Returns ``(sum_i d_i F, sum_i (x_i d_i + h) F, K)`` where ``K`` is the
    special conformal defect ``sum_i (x_i^2 d_i + 2h x_i) F`` written in the
    frame ``x_1 = 0``.  The full special conformal defect equals
    ``K + 2 x_1 * (second defect)``, so all three vanish iff the true
    operators annihilate ``F``.
    """
    n = F.n
    if n < 1:
        raise ValueError("Ward defects need at least one point")
    d1 = CorrelatorSum(n)
    for i in range(n):
        d1 = d1 + F.derivative(i)
    d2: dict = {}
    g: list[dict] = [dict() for _ in range(n)]
    for mono, coef in F._terms.items():
        deg = sum(e for _, e in mono)
        s = coef * (deg + weight * n)
        if s:
            d2[mono] = d2[mono] + s if mono in d2 else s
        # x_i^2 d_i acting on a product of differences: sum_e e (x_a + x_b)
        load = [2 * weight] * n
        for (a, b), e in mono:
            load[a] += e
            load[b] += e
        for i in range(n):
            if load[i]:
                val = coef * load[i]
                g[i][mono] = g[i][mono] + val if mono in g[i] else val
    D2 = CorrelatorSum._raw(n, {m: v for m, v in d2.items() if v})
    K = CorrelatorSum(n)
    for i in range(1, n):
        Gi = CorrelatorSum._raw(n, {m: v for m, v in g[i].items() if v})
        K = K + Gi.times_pair(i, 0, 1)
    return d1, D2, K


def symmetry_defect(F: CorrelatorSum, perm: Sequence[int]) -> CorrelatorSum:
    return F - F.compose_perm(perm)


def generating_transpositions(n: int) -> list[tuple[int, ...]]:
    out = []
    for i in range(n - 1):
        p = list(range(n))
        p[i], p[i + 1] = p[i + 1], p[i]
        out.append(tuple(p))
    return out


def all_permutations(n: int) -> Iterable[tuple[int, ...]]:
    return itertools.permutations(range(n))


def evaluate(F: CorrelatorSum, points: Sequence, c0) -> Fraction:
    return F.evaluate(points, c0)
