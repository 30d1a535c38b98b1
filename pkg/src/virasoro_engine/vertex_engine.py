"""Vertex operators on the Virasoro vacuum module.

Fields are indexed by the vertex-algebra modes ``v_(j)``, the coefficient of
``z^(-j-1)`` in ``Y(v, z)``.  For the conformal vector ``omega = L_{-2}|0>``
this gives ``omega_(j) = L_{j-1}``.

``Y`` of a basis ket ``(n1, ..., nk)`` is the nested normal-ordered product
``:d^(n1-2) L(z) Y((n2, ..., nk), z):`` with divided-power derivatives.  The
normal-ordered product splits ``A(z)`` at ``j < 0`` (creation, left) and
``j >= 0`` (annihilation, right).  Modes are computed lazily and memoized per
``(ket, j, input ket)``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .exact_arith import CPoly
from .vacuum_module import (
    StateVector,
    _accumulate,
    _act_ket,
    act,
    basis_up_to,
    level,
)

OMEGA = StateVector.ket(2)

_memo: dict = {}
_memo_lock = threading.Lock()


def _binom(x: int, k: int) -> Fraction:
    """Generalized binomial ``x (x-1) ... (x-k+1) / k!`` for integer ``x``."""
    if k < 0:
        return Fraction(0)
    if x >= 0:
        return Fraction(comb(x, k))
    # binom(x, k) = (-1)^k binom(k - x - 1, k)
    return Fraction((-1) ** k * comb(k - x - 1, k))


def weight(ket: tuple) -> int:
    return level(ket)


def _deriv_mode(p: int, j: int, w: tuple) -> dict:
    """Mode ``j`` of ``d^(p) L(z)`` (divided power) on a basis ket."""
    # (d^(p) A)_(j) = binom(p - j - 1, p) A_(j - p), with omega_(i) = L_{i-1}
    coef = _binom(p - j - 1, p)
    if not coef:
        return {}
    src = _act_ket(j - p - 1, w)
    if coef == 1:
        return src
    return {k: v * coef for k, v in src.items()}


def _ket_mode(ket: tuple, j: int, w: tuple) -> dict:
    """``Y(ket, z)`` mode ``j`` applied to basis ket ``w``."""
    key = (ket, j, w)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    result = _compute_ket_mode(ket, j, w)
    with _memo_lock:
        _memo.setdefault(key, result)
    return result


def _compute_ket_mode(ket: tuple, j: int, w: tuple) -> dict:
    lw = level(w)
    if lw + weight(ket) - j - 1 < 0:
        return {}
    if not ket:
        return {w: CPoly(1)} if j == -1 else {}
    p = ket[0] - 2
    rest = ket[1:]
    wt_a, wt_b = ket[0], weight(rest)
    out: dict = {}
    # creation part: sum_{i<0} A_(i) B_(j-i-1) w; B_(j-i-1) w vanishes for i < j - wt_b - lw
    for i in range(j - wt_b - lw, 0):
        inner = _ket_mode(rest, j - i - 1, w)
        for k, v in inner.items():
            _accumulate(out, _deriv_mode(p, i, k), v)
    # annihilation part: sum_{i>=0} B_(j-i-1) A_(i) w; A_(i) w vanishes for i > wt_a + lw - 1
    for i in range(0, wt_a + lw):
        inner = _deriv_mode(p, i, w)
        for k, v in inner.items():
            _accumulate(out, _ket_mode(rest, j - i - 1, k), v)
    return out


def clear_cache() -> None:
    with _memo_lock:
        _memo.clear()


def stress_mode(n: int, v: StateVector) -> StateVector:
    """``L_n`` acting on ``v``; the modes of ``L(z) = sum L_n z^(-n-2)``."""
    return act(n, v)


@dataclass(frozen=True)
class FieldHandle:
    """Lazy field ``Y(state, z)``."""

    state: StateVector

    def mode(self, j: int, w: StateVector) -> StateVector:
        out: dict = {}
        for ket, a in self.state.items():
            for wk, b in w.items():
                _accumulate(out, _ket_mode(ket, j, wk), a * b)
        return StateVector._raw(out)

    def max_weight(self) -> int:
        return self.state.max_level()

    def singular_range(self, w: StateVector) -> range:
        """Modes ``j >= 0`` that can act non-trivially on ``w``."""
        top = self.max_weight() + w.max_level()
        return range(0, max(top, 0))


def reconstruct_field(v: StateVector) -> FieldHandle:
    return FieldHandle(v)


@dataclass(frozen=True)
class LaurentState:
    """Coefficients ``z^e -> state`` known for ``lo <= e < hi``."""

    coeffs: dict
    lo: int
    hi: int

    def coeff(self, e: int) -> StateVector:
        if not (self.lo <= e < self.hi):
            raise KeyError(f"exponent {e} outside window [{self.lo}, {self.hi})")
        return self.coeffs.get(e, StateVector.zero())

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.coeffs.values())

    def negative_part(self) -> dict:
        return {e: s for e, s in self.coeffs.items() if e < 0 and not s.is_zero()}


def apply_field(v: StateVector, w: StateVector, window: tuple[int, int]) -> LaurentState:
    """``Y(v, z) w`` restricted to exponents ``window[0] <= e < window[1]``."""
    lo, hi = window
    field = reconstruct_field(v)
    coeffs = {}
    for e in range(lo, hi):
        s = field.mode(-e - 1, w)
        if not s.is_zero():
            coeffs[e] = s
    return LaurentState(coeffs, lo, hi)


def ope_singular(v: StateVector, w: StateVector) -> list[tuple[int, StateVector]]:
    """Non-zero singular terms of ``Y(v, z) w`` as ``(pole order, state)``, highest pole first."""
    field = reconstruct_field(v)
    out = []
    for j in field.singular_range(w):
        s = field.mode(j, w)
        if not s.is_zero():
            out.append((j + 1, s))
    return sorted(out, key=lambda t: -t[0])


def translation(v: StateVector) -> StateVector:
    return act(-1, v)


def check_translation(v: StateVector, order: int = 6, level_cap: int = 4) -> dict[tuple, LaurentState]:
    """Defect of ``[T, Y(v, z)] - d/dz Y(v, z)`` on every test ket up to ``level_cap``.

    Exponents run from the deepest possible pole up to ``order``.  Every
    returned LaurentState should be zero.
    """
    field = reconstruct_field(v)
    out = {}
    for ket in basis_up_to(level_cap):
        w = StateVector._raw({ket: CPoly(1)})
        lo = -(field.max_weight() + level(ket) + 2)
        Tw = translation(w)
        coeffs = {}
        for e in range(lo, order):
            j = -e - 1
            lhs = translation(field.mode(j, w)) - field.mode(j, Tw)
            rhs = field.mode(j - 1, w).scale(e + 1)
            d = lhs - rhs
            if not d.is_zero():
                coeffs[e] = d
        out[ket] = LaurentState(coeffs, lo, order)
    return out


def locality_witnesses(
    v: StateVector, w: StateVector, N: int, level_cap: int, mode_cap: int
) -> list[tuple[int, int, tuple]]:
    """Mode pairs ``(m, n)`` and test kets where ``(z-w)^N [Y(v,z), Y(w,w)]`` fails.

    Uses the mode form ``sum_i (-1)^i binom(N, i) [v_(m+N-i), w_(n+i)] = 0``
    for ``|m|, |n| <= mode_cap`` on kets of level at most ``level_cap``.
    """
    A, B = reconstruct_field(v), reconstruct_field(w)
    bad = []
    kets = basis_up_to(level_cap)
    for m in range(-mode_cap, mode_cap + 1):
        for n in range(-mode_cap, mode_cap + 1):
            for ket in kets:
                x = StateVector._raw({ket: CPoly(1)})
                total = StateVector.zero()
                for i in range(N + 1):
                    sign = (-1) ** i * comb(N, i)
                    a_j, b_j = m + N - i, n + i
                    comm = A.mode(a_j, B.mode(b_j, x)) - B.mode(b_j, A.mode(a_j, x))
                    total = total + comm.scale(sign)
                if not total.is_zero():
                    bad.append((m, n, ket))
    return bad


def check_locality(v: StateVector, w: StateVector, N: int, level_cap: int = 6, mode_cap: int = 6) -> bool:
    return not locality_witnesses(v, w, N, level_cap, mode_cap)


def vacuum_axiom_holds(v: StateVector) -> bool:
    """``Y(v, z)|0>`` has no negative powers and starts with ``v``."""
    field = reconstruct_field(v)
    vac = StateVector.vacuum()
    for j in field.singular_range(vac):
        if not field.mode(j, vac).is_zero():
            return False
    return field.mode(-1, vac) == v


def skew_symmetry_defect(a: StateVector, b: StateVector, order: int = 6) -> LaurentState:
    """``Y(a, z) b - e^{zT} Y(b, -z) a`` for exponents below ``order``."""
    A, B = reconstruct_field(a), reconstruct_field(b)
    lo = -(a.max_level() + b.max_level() + 1)
    coeffs = {}
    for e in range(lo, order):
        lhs = A.mode(-e - 1, b)
        rhs = StateVector.zero()
        fact = 1
        for k in range(0, e - lo + 1):
            if k:
                fact *= k
            ep = e - k
            term = B.mode(-ep - 1, a).scale((-1) ** (ep % 2))
            for _ in range(k):
                term = translation(term)
            rhs = rhs + term.scale(Fraction(1, fact))
        d = lhs - rhs
        if not d.is_zero():
            coeffs[e] = d
    return LaurentState(coeffs, lo, order)


def stress_bracket_defect(n: int, m: int, v: StateVector) -> StateVector:
    """``[L_n, L_m] v - (n - m) L_{n+m} v - (n^3 - n)/12 c [n + m = 0] v``."""
    lhs = act(n, act(m, v)) - act(m, act(n, v))
    rhs = act(n + m, v).scale(n - m)
    if n + m == 0:
        rhs = rhs + v.scale(CPoly({1: Fraction(n**3 - n, 12)}))
    return lhs - rhs

