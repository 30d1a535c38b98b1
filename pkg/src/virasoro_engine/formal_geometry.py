"""Vector fields on the formal punctured disk and the Schwarzian derivative.

A vector field ``f(z) d/dz`` is stored through its coefficient series ``f``.
The mode ``L_n`` of the Virasoro algebra corresponds to ``-z^(n+1) d/dz``;
with that sign the field bracket ``f g' - f' g`` matches
``[L_n, L_m] = (n - m) L_(n+m)``, and the residue cocycle
``(1/12) Res(f''' g)`` is unchanged because it is bilinear.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .exact_arith import TruncLaurent, as_rat


@dataclass(frozen=True)
class LaurentVF:
    coefficient: TruncLaurent

    @classmethod
    def monomial(cls, k: int, coeff=1, order: int | None = None) -> "LaurentVF":
        """``coeff * z^k d/dz``."""
        return cls(TruncLaurent.monomial(k, coeff, order))

    @classmethod
    def mode(cls, n: int) -> "LaurentVF":
        """The field representing ``L_n``, namely ``-z^(n+1) d/dz``."""
        return cls.monomial(n + 1, -1)

    def __add__(self, other: "LaurentVF") -> "LaurentVF":
        return LaurentVF(self.coefficient + other.coefficient)

    def __neg__(self):
        return LaurentVF(-self.coefficient)

    def scale(self, a) -> "LaurentVF":
        return LaurentVF(self.coefficient * as_rat(a))


@dataclass(frozen=True)
class FormalMap:
    """A coordinate change ``z -> f(z)`` with ``f(0) = 0`` and ``f'(0) != 0``."""

    series: TruncLaurent

    def __post_init__(self):
        s = self.series
        if s._coeffs and min(s._coeffs) < 0:
            raise ValueError("a formal map is a power series")
        if s.coeff(0):
            raise ValueError("a formal map must fix the origin")
        if not s.coeff(1):
            raise ValueError("a formal map needs an invertible linear term")

    def __matmul__(self, other: "FormalMap") -> "FormalMap":
        return FormalMap(self.series.compose(other.series))


def vf_bracket(X: LaurentVF, Y: LaurentVF) -> LaurentVF:
    f, g = X.coefficient, Y.coefficient
    return LaurentVF(f * g.derivative() - f.derivative() * g)


def gelfand_fuks(X: LaurentVF, Y: LaurentVF) -> Fraction:
    """``(1/12) Res(f''' g)``."""
    f3 = X.coefficient.derivative().derivative().derivative()
    return (f3 * Y.coefficient).residue() / 12


def cocycle_defect(X: LaurentVF, Y: LaurentVF, Z: LaurentVF) -> Fraction:
    return (
        gelfand_fuks(vf_bracket(X, Y), Z)
        + gelfand_fuks(vf_bracket(Y, Z), X)
        + gelfand_fuks(vf_bracket(Z, X), Y)
    )


def schwarzian(f: FormalMap) -> TruncLaurent:
    """``(f''/f')' - (1/2) (f''/f')^2``."""
    d1 = f.series.derivative()
    if d1.order is None:
        # exact polynomial maps still need a finite window for 1/f'
        d1 = d1.truncate(2 * (max(d1._coeffs, default=0) + 8))
    pre = d1.derivative() / d1
    return pre.derivative() - pre * pre * Fraction(1, 2)


def mobius_series(a, b, c, d, order: int) -> FormalMap:
    """Expansion of ``(az + b)/(cz + d) - b/d`` to ``O(z^order)``."""
    a, b, c, d = (as_rat(t) for t in (a, b, c, d))
    if a * d - b * c == 0:
        raise ValueError("degenerate Mobius transformation (ad - bc = 0)")
    if d == 0:
        raise ValueError("Mobius map has a pole at the origin (d = 0)")
    # (az + b)/d * sum_k (-c/d)^k z^k
    r = -c / d
    geo = {k: r**k for k in range(order)}
    coeffs: dict = {}
    for k, g in geo.items():
        coeffs[k] = coeffs.get(k, 0) + b / d * g
        if k + 1 < order:
            coeffs[k + 1] = coeffs.get(k + 1, 0) + a / d * g
    coeffs[0] -= b / d
    return FormalMap(TruncLaurent(coeffs, order))


def random_formal_map(rng: random.Random, order: int, bound: int = 5) -> FormalMap:
    """A FormalMap with small random rational coefficients, for sweeps."""
    coeffs = {1: Fraction(rng.choice([i for i in range(-bound, bound + 1) if i]), rng.randint(1, 3))}
    for k in range(2, order):
        coeffs[k] = Fraction(rng.randint(-bound, bound), rng.randint(1, 4))
    return FormalMap(TruncLaurent(coeffs, order))
