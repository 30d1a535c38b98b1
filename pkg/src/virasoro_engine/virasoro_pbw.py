"""Virasoro Lie algebra and its universal enveloping algebra in PBW form.

Words are tuples of mode indices.  The normal form is ascending, so the
non-negative (annihilating) modes sit on the right.  The central element is
folded into the coefficient ring as the variable ``c``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .exact_arith import CPoly, as_cpoly

RESIDUE = "residue"
PAPER_PRINTED = "paper-printed"
CONVENTIONS = (RESIDUE, PAPER_PRINTED)

PBWWord = tuple


def central_coefficient(n: int, m: int, convention: str = RESIDUE) -> Fraction:
    """Coefficient of ``C`` in ``[L_n, L_m]``.

    ``residue`` puts the cubic on the first index, ``(n^3 - n)/12``;
    ``paper-printed`` uses ``(m^3 - m)/12``, the opposite sign on ``m = -n``.
    """
    if n + m != 0:
        return Fraction(0)
    if convention == RESIDUE:
        return Fraction(n**3 - n, 12)
    if convention == PAPER_PRINTED:
        return Fraction(m**3 - m, 12)
    raise ValueError(f"unknown convention {convention!r}")


class VirElement:
    """Finite combination ``sum a_n L_n + b C`` with coefficients in Q[c]."""

    __slots__ = ("modes", "central")

    def __init__(self, modes: Mapping[int, object] | None = None, central=0):
        self.modes = {int(n): as_cpoly(a) for n, a in (modes or {}).items() if a}
        self.central = as_cpoly(central)

    @classmethod
    def L(cls, n: int, coeff=1) -> "VirElement":
        return cls({n: coeff})

    @classmethod
    def C(cls, coeff=1) -> "VirElement":
        return cls({}, coeff)

    def __add__(self, other: "VirElement") -> "VirElement":
        modes = dict(self.modes)
        for n, a in other.modes.items():
            modes[n] = modes.get(n, CPoly()) + a
        return VirElement(modes, self.central + other.central)

    def __neg__(self):
        return VirElement({n: -a for n, a in self.modes.items()}, -self.central)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a) -> "VirElement":
        return VirElement({n: v * a for n, v in self.modes.items()}, self.central * a)

    def is_zero(self) -> bool:
        return not self.modes and not self.central

    def __eq__(self, other):
        if not isinstance(other, VirElement):
            return NotImplemented
        return self.modes == other.modes and self.central == other.central

    def __hash__(self):
        return hash((frozenset(self.modes.items()), self.central))

    def __repr__(self):
        parts = [f"({a})*L{n}" for n, a in sorted(self.modes.items())]
        if self.central:
            parts.append(f"({self.central})*C")
        return "VirElement(" + (" + ".join(parts) or "0") + ")"


def vir_bracket(x: VirElement, y: VirElement, convention: str = RESIDUE) -> VirElement:
    modes: dict[int, CPoly] = {}
    central = CPoly()
    for n, a in x.modes.items():
        for m, b in y.modes.items():
            ab = a * b
            if n != m:
                modes[n + m] = modes.get(n + m, CPoly()) + ab * (n - m)
            cc = central_coefficient(n, m, convention)
            if cc:
                central = central + ab * cc
    return VirElement(modes, central)


class PBWVector:
    """Element of U(Vir): normal-ordered words with Q[c] coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        data: dict = {}
        for w, a in (terms or {}).items():
            w = tuple(w)
            if any(w[i] > w[i + 1] for i in range(len(w) - 1)):
                raise ValueError(f"word {w} is not normal-ordered; use straighten()")
            a = as_cpoly(a)
            data[w] = data.get(w, CPoly()) + a
        self._terms = {w: a for w, a in data.items() if a}

    @classmethod
    def _raw(cls, data: dict) -> "PBWVector":
        obj = cls.__new__(cls)
        obj._terms = data
        return obj

    @classmethod
    def one(cls) -> "PBWVector":
        return cls({(): 1})

    @classmethod
    def from_vir(cls, x: VirElement) -> "PBWVector":
        terms = {(n,): a for n, a in x.modes.items()}
        if x.central:
            terms[()] = x.central * CPoly.c()
        return cls(terms)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __add__(self, other: "PBWVector") -> "PBWVector":
        return PBWVector._raw(_combine(self._terms, other._terms, 1))

    def __sub__(self, other: "PBWVector") -> "PBWVector":
        return PBWVector._raw(_combine(self._terms, other._terms, -1))

    def scale(self, a) -> "PBWVector":
        return PBWVector._raw({w: v * a for w, v in self._terms.items() if v * a})

    def __mul__(self, other: "PBWVector") -> "PBWVector":
        return u_multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, PBWVector):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "PBWVector(0)"
        parts = []
        for w, a in sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            word = "".join(f"L{n}" for n in w) or "1"
            parts.append(f"({a})*{word}")
        return "PBWVector(" + " + ".join(parts) + ")"


def _combine(a: dict, b: dict, sign: int) -> dict:
    data = dict(a)
    for w, v in b.items():
        s = data.get(w, CPoly()) + v * sign
        if s:
            data[w] = s
        else:
            data.pop(w, None)
    return data


def _first_descent(word: tuple, strategy: str) -> int:
    rng = range(len(word) - 1)
    if strategy == "rightmost":
        rng = reversed(rng)
    for i in rng:
        if word[i] > word[i + 1]:
            return i
    return -1


@lru_cache(maxsize=None)
def _straighten(word: tuple, strategy: str, convention: str) -> dict:
    i = _first_descent(word, strategy)
    if i < 0:
        return {word: CPoly(1)}
    a, b = word[i], word[i + 1]
    head, tail = word[:i], word[i + 2 :]
    # L_a L_b = L_b L_a + (a - b) L_(a+b) + c * central(a, b)
    out = dict(_straighten(head + (b, a) + tail, strategy, convention))
    for w, v in _straighten(head + (a + b,) + tail, strategy, convention).items():
        out = _combine(out, {w: v * (a - b)}, 1)
    cc = central_coefficient(a, b, convention)
    if cc:
        cterm = CPoly({1: cc})
        for w, v in _straighten(head + tail, strategy, convention).items():
            out = _combine(out, {w: v * cterm}, 1)
    return out


def straighten(word, strategy: str = "leftmost", convention: str = RESIDUE) -> PBWVector:
    """Normal-ordered expansion of ``L_{n1} ... L_{nk}`` in U(Vir).

    Adjacent out-of-order pairs are swapped, leftmost first by default.
    Every swap lowers the inversion count or shortens the word, so the
    rewriting terminates.
    """
    if strategy not in ("leftmost", "rightmost"):
        raise ValueError(f"unknown strategy {strategy!r}")
    return PBWVector._raw(dict(_straighten(tuple(int(n) for n in word), strategy, convention)))


def u_multiply(a: PBWVector, b: PBWVector, convention: str = RESIDUE) -> PBWVector:
    out: dict = {}
    for wa, ca in a._terms.items():
        for wb, cb in b._terms.items():
            coef = ca * cb
            for w, v in _straighten(wa + wb, "leftmost", convention).items():
                out = _combine(out, {w: v * coef}, 1)
    return PBWVector._raw(out)
