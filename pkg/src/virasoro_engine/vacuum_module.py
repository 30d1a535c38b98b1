"""The Virasoro vacuum module with its partition basis.

A basis ket is a non-increasing tuple ``(n1, ..., nk)`` with every part at
least 2, standing for ``L_{-n1} ... L_{-nk}|0>``.  The empty tuple is the
vacuum.  ``L_n`` kills the vacuum for ``n >= -1`` and ``C`` acts by ``c``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping

from .exact_arith import CPoly, TruncLaurent, as_cpoly, as_rat
from .virasoro_pbw import PBWVector

BasisKet = tuple

VACUUM: BasisKet = ()


def _check_ket(ket: tuple) -> tuple:
    ket = tuple(int(p) for p in ket)
    if any(p < 2 for p in ket) or any(ket[i] < ket[i + 1] for i in range(len(ket) - 1)):
        raise ValueError(f"{ket} is not a partition with parts >= 2 in non-increasing order")
    return ket


def level(ket: BasisKet) -> int:
    return sum(ket)


class StateVector:
    """Finite combination of basis kets with Q[c] coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        data: dict = {}
        for ket, a in (terms or {}).items():
            ket = _check_ket(ket)
            a = as_cpoly(a)
            data[ket] = data.get(ket, CPoly()) + a
        self._terms = {k: v for k, v in data.items() if v}
        self._hash = None

    @classmethod
    def _raw(cls, data: dict) -> "StateVector":
        obj = cls.__new__(cls)
        obj._terms = data
        obj._hash = None
        return obj

    @classmethod
    def vacuum(cls) -> "StateVector":
        return cls._raw({VACUUM: CPoly(1)})

    @classmethod
    def ket(cls, *parts: int, coeff=1) -> "StateVector":
        return cls({tuple(parts): coeff})

    @classmethod
    def zero(cls) -> "StateVector":
        return cls._raw({})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, ket: tuple) -> CPoly:
        return self._terms.get(tuple(ket), CPoly())

    def levels(self) -> set[int]:
        return {level(k) for k in self._terms}

    def max_level(self) -> int:
        return max(self.levels(), default=-1)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector._raw(_combine(self._terms, other._terms, 1))

    def __sub__(self, other: "StateVector") -> "StateVector":
        return StateVector._raw(_combine(self._terms, other._terms, -1))

    def __neg__(self):
        return StateVector._raw({k: -v for k, v in self._terms.items()})

    def scale(self, a) -> "StateVector":
        if not a:
            return StateVector._raw({})
        return StateVector._raw({k: v * a for k, v in self._terms.items() if v * a})

    def specialize(self, c0) -> dict[tuple, Fraction]:
        """Evaluate coefficients at ``c = c0``; zero coefficients are dropped."""
        c0 = as_rat(c0)
        out = {}
        for k, v in self._terms.items():
            val = v(c0)
            if val:
                out[k] = val
        return out

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def to_json(self) -> list[dict]:
        return [
            {"ket": list(k), "coefficient": str(v)}
            for k, v in sorted(self._terms.items(), key=lambda kv: (level(kv[0]), kv[0]))
        ]

    def __repr__(self):
        if not self._terms:
            return "StateVector(0)"
        parts = []
        for k, v in sorted(self._terms.items(), key=lambda kv: (level(kv[0]), kv[0])):
            word = "".join(f"L{-p}" for p in k) + "|0>"
            parts.append(f"({v})*{word}")
        return "StateVector(" + " + ".join(parts) + ")"


def _combine(a: dict, b: dict, sign: int) -> dict:
    data = dict(a)
    for k, v in b.items():
        s = data[k] + v * sign if k in data else v * sign
        if s:
            data[k] = s
        else:
            data.pop(k, None)
    return data


def _accumulate(out: dict, src: dict, factor) -> None:
    for k, v in src.items():
        s = out[k] + v * factor if k in out else v * factor
        if s:
            out[k] = s
        else:
            del out[k]


@lru_cache(maxsize=None)
def _act_ket(n: int, ket: tuple) -> dict:
    """``L_n`` applied to a basis ket, as a dict ket -> CPoly."""
    if not ket:
        if n >= -1:
            return {}
        return {(-n,): CPoly(1)}
    p = ket[0]
    if n <= -2 and -n >= p:
        return {(-n,) + ket: CPoly(1)}
    rest = ket[1:]
    out: dict = {}
    # L_n L_{-p} X = L_{-p} L_n X + (n + p) L_{n-p} X + c (n^3 - n)/12 [n = p] X
    for k, v in _act_ket(n, rest).items():
        _accumulate(out, _act_ket(-p, k), v)
    if n + p:
        _accumulate(out, _act_ket(n - p, rest), CPoly(n + p))
    if n == p:
        _accumulate(out, {rest: CPoly(1)}, CPoly({1: Fraction(n**3 - n, 12)}))
    return out


def act(n: int, v: StateVector) -> StateVector:
    """Apply ``L_n`` to a state."""
    out: dict = {}
    for ket, a in v._terms.items():
        _accumulate(out, _act_ket(int(n), ket), a)
    return StateVector._raw(out)


def act_element(a: PBWVector, v: StateVector) -> StateVector:
    """Apply an element of U(Vir); each word acts right-to-left."""
    total = StateVector.zero()
    for word, coef in a:
        w = v
        for n in reversed(word):
            w = act(n, w)
            if w.is_zero():
                break
        total = total + w.scale(coef)
    return total


def _partitions(total: int, largest: int) -> Iterator[tuple]:
    if total == 0:
        yield ()
        return
    for p in range(min(total, largest), 1, -1):
        for rest in _partitions(total - p, p):
            yield (p,) + rest


def basis(level_: int) -> list[BasisKet]:
    """All basis kets at a given level, in reverse lexicographic order."""
    if level_ < 0:
        raise ValueError("level must be non-negative")
    return list(_partitions(level_, level_))


def basis_up_to(max_level: int) -> list[BasisKet]:
    return [k for lv in range(max_level + 1) for k in basis(lv)]


def graded_dimension(level_: int) -> int:
    return len(basis(level_))


def character(order: int, var: str = "q") -> TruncLaurent:
    """``prod_{n >= 2} 1/(1 - q^n)`` truncated at ``q^order``."""
    if order < 1:
        raise ValueError("order must be at least 1")
    result = TruncLaurent({0: 1}, order, var)
    for n in range(2, order):
        factor = TruncLaurent({0: 1, n: -1}, order, var)
        result = result * factor.inverse()
    return result.truncate(order)
