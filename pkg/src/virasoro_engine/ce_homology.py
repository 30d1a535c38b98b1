"""Chevalley-Eilenberg homology of finite-dimensional Lie algebras over Q.

Chains are exterior powers of the algebra, grading is homological
(non-negative degrees).  Cohomologically graded statements elsewhere use the
negated degree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, lcm
from pathlib import Path
from typing import Mapping, Sequence

from .exact_arith import as_rat


class JacobiError(ValueError):
    pass


@dataclass(frozen=True)
class LieTable:
    """Structure constants ``[e_i, e_j] = sum_k coeffs[k] e_k`` for ``i < j``."""

    dim: int
    brackets: Mapping[tuple[int, int], tuple[Fraction, ...]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        clean = {}
        for (i, j), vec in self.brackets.items():
            if not (0 <= i < j < self.dim):
                raise ValueError(f"bracket index pair {(i, j)} must satisfy 0 <= i < j < dim")
            vec = tuple(as_rat(v) for v in vec)
            if len(vec) != self.dim:
                raise ValueError(f"bracket [{i},{j}] has {len(vec)} coefficients, expected {self.dim}")
            if any(vec):
                clean[(i, j)] = vec
        object.__setattr__(self, "brackets", clean)
        defect = self.jacobi_defect()
        if defect is not None:
            raise JacobiError(f"Jacobi identity fails on basis triple {defect}")

    def bracket(self, i: int, j: int) -> tuple[Fraction, ...]:
        if i == j:
            return (Fraction(0),) * self.dim
        if i < j:
            return self.brackets.get((i, j), (Fraction(0),) * self.dim)
        return tuple(-v for v in self.bracket(j, i))

    def bracket_vec(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, a in enumerate(x):
            if not a:
                continue
            for j, b in enumerate(y):
                if not b or i == j:
                    continue
                for k, v in enumerate(self.bracket(i, j)):
                    if v:
                        out[k] += a * b * v
        return out

    def jacobi_defect(self):
        basis = [[Fraction(int(k == i)) for k in range(self.dim)] for i in range(self.dim)]
        for i, j, k in combinations(range(self.dim), 3):
            ei, ej, ek = basis[i], basis[j], basis[k]
            t1 = self.bracket_vec(ei, self.bracket_vec(ej, ek))
            t2 = self.bracket_vec(ej, self.bracket_vec(ek, ei))
            t3 = self.bracket_vec(ek, self.bracket_vec(ei, ej))
            if any(a + b + c for a, b, c in zip(t1, t2, t3)):
                return (i, j, k)
        return None

    @classmethod
    def from_json(cls, doc: Mapping | str | Path) -> "LieTable":
        """Read ``{"dim": d, "brackets": [{"i": .., "j": .., "coeffs": [..]}]}``.

        Coefficients may be integers or ``"p/q"`` strings; a pair given as
        ``i > j`` is stored with the sign flipped.
        """
        if isinstance(doc, (str, Path)):
            doc = json.loads(Path(doc).read_text(encoding="utf-8"))
        dim = int(doc["dim"])
        brackets: dict = {}
        for entry in doc.get("brackets", []):
            i, j = int(entry["i"]), int(entry["j"])
            vec = [as_rat(v) for v in entry["coeffs"]]
            if i == j:
                raise ValueError("bracket of a basis vector with itself must be omitted")
            if i > j:
                i, j, vec = j, i, [-v for v in vec]
            brackets[(i, j)] = tuple(vec)
        return cls(dim, brackets, doc.get("name", ""))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "brackets": [
                {"i": i, "j": j, "coeffs": [str(v) for v in vec]}
                for (i, j), vec in sorted(self.brackets.items())
            ],
        }


@dataclass(frozen=True)
class ChainComplex:
    """Boundary matrices ``d[k]: Lambda^k -> Lambda^(k-1)`` for k = 1..dim."""

    dims: tuple[int, ...]
    boundaries: tuple[tuple[tuple[Fraction, ...], ...], ...]

    def boundary(self, k: int) -> list[list[Fraction]]:
        """Matrix of ``d_k`` (rows index degree k-1, columns degree k)."""
        return [list(r) for r in self.boundaries[k - 1]]

    def square_defects(self) -> list[int]:
        """Degrees ``k`` where ``d_(k-1) d_k != 0``."""
        bad = []
        for k in range(2, len(self.dims)):
            prod = _matmul(self.boundary(k - 1), self.boundary(k))
            if any(v for row in prod for v in row):
                bad.append(k)
        return bad


def build_ce(L: LieTable) -> ChainComplex:
    """``d(x1 ^ ... ^ xk) = sum_{i<j} (-1)^(i+j) [xi, xj] ^ x1 ^ .. ^ xk`` (hats on i, j)."""
    d = L.dim
    wedges = [list(combinations(range(d), k)) for k in range(d + 1)]
    index = [{w: n for n, w in enumerate(ws)} for ws in wedges]
    boundaries = []
    for k in range(1, d + 1):
        rows, cols = len(wedges[k - 1]), len(wedges[k])
        mat = [[Fraction(0)] * cols for _ in range(rows)]
        for col, w in enumerate(wedges[k]):
            for a, b in combinations(range(k), 2):
                sign = -1 if (a + b) % 2 else 1  # positions are 0-based, (-1)^((a+1)+(b+1))
                rest = w[:a] + w[a + 1 : b] + w[b + 1 :]
                for t, coef in enumerate(L.bracket(w[a], w[b])):
                    if not coef or t in rest:
                        continue
                    # move e_t to sorted position in rest
                    pos = sum(1 for r in rest if r < t)
                    target = rest[:pos] + (t,) + rest[pos:]
                    s = sign * (-1 if pos % 2 else 1)
                    mat[index[k - 1][target]][col] += s * coef
        boundaries.append(tuple(tuple(r) for r in mat))
    return ChainComplex(tuple(len(ws) for ws in wedges), tuple(boundaries))


def _matmul(a, b):
    if not a or not b:
        return []
    return [[sum(x * y for x, y in zip(row, colvec)) for colvec in zip(*b)] for row in a]


def rank(matrix: Sequence[Sequence[Fraction]]) -> int:
    """Exact rank by fraction-free (Bareiss) elimination."""
    m = [[as_rat(v) for v in row] for row in matrix]
    if not m or not m[0]:
        return 0
    # scale to integers row by row
    rows = []
    for row in m:
        den = lcm(*(v.denominator for v in row))
        rows.append([int(v * den) for v in row])
    nr, nc = len(rows), len(rows[0])
    r, prev = 0, 1
    for col in range(nc):
        piv = next((i for i in range(r, nr) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, nr):
            for j in range(col + 1, nc):
                rows[i][j] = (rows[i][j] * rows[r][col] - rows[i][col] * rows[r][j]) // prev
            rows[i][col] = 0
        prev = rows[r][col]
        r += 1
        if r == nr:
            break
    return r


def betti(C: ChainComplex) -> list[int]:
    dims = C.dims
    top = len(dims) - 1
    ranks = [0] * (top + 2)  # ranks[k] = rank d_k, d_0 = d_(top+1) = 0
    for k in range(1, top + 1):
        ranks[k] = rank(C.boundary(k))
    return [dims[k] - ranks[k] - ranks[k + 1] for k in range(top + 1)]


def euler_characteristic(values: Sequence[int]) -> int:
    return sum((-1) ** k * v for k, v in enumerate(values))


# ---------------------------------------------------------------------------
# Standard algebras


def sl2() -> LieTable:
    """Basis (e, h, f): [e,h] = -2e, [e,f] = h, [h,f] = -2f."""
    return LieTable(3, {(0, 1): (-2, 0, 0), (0, 2): (0, 1, 0), (1, 2): (0, 0, -2)}, "sl2")


def sl2_vector_fields() -> LieTable:
    """Span of d/dz, z d/dz, z^2 d/dz with the field bracket f g' - f' g."""
    # basis index k <-> z^k d/dz; [z^a, z^b] = (b - a) z^(a+b-1)
    br = {}
    for a, b in combinations(range(3), 2):
        vec = [0, 0, 0]
        vec[a + b - 1] = b - a
        br[(a, b)] = tuple(vec)
    return LieTable(3, br, "vect_sl2")


def abelian(d: int) -> LieTable:
    return LieTable(d, {}, f"abelian{d}")


def heisenberg() -> LieTable:
    """[x, y] = z."""
    return LieTable(3, {(0, 1): (0, 0, 1)}, "heisenberg3")


def affine_line() -> LieTable:
    """Non-abelian 2-dimensional algebra: [x, y] = y."""
    return LieTable(2, {(0, 1): (0, 1)}, "aff1")


def so3() -> LieTable:
    return LieTable(3, {(0, 1): (0, 0, 1), (1, 2): (1, 0, 0), (0, 2): (0, -1, 0)}, "so3")


def gl2() -> LieTable:
    """sl2 (e, h, f) plus a central identity."""
    return LieTable(
        4, {(0, 1): (-2, 0, 0, 0), (0, 2): (0, 1, 0, 0), (1, 2): (0, 0, -2, 0)}, "gl2"
    )


def upper_triangular_3() -> LieTable:
    """Strictly upper-triangular 3x3 matrices plus the diagonal Cartan of sl3 (dim 5 Borel)."""
    # basis: h1, h2, E12, E23, E13
    br = {
        (0, 2): (0, 0, 2, 0, 0),
        (0, 3): (0, 0, 0, -1, 0),
        (0, 4): (0, 0, 0, 0, 1),
        (1, 2): (0, 0, -1, 0, 0),
        (1, 3): (0, 0, 0, 2, 0),
        (1, 4): (0, 0, 0, 0, 1),
        (2, 3): (0, 0, 0, 0, 1),
    }
    return LieTable(5, br, "borel_sl3")


def filiform4() -> LieTable:
    """[x1, x2] = x3, [x1, x3] = x4."""
    return LieTable(4, {(0, 1): (0, 0, 1, 0), (0, 2): (0, 0, 0, 1)}, "filiform4")


def corpus() -> list[LieTable]:
    return [
        abelian(1),
        abelian(2),
        abelian(3),
        affine_line(),
        heisenberg(),
        sl2(),
        sl2_vector_fields(),
        so3(),
        gl2(),
        filiform4(),
        upper_triangular_3(),
    ]


# ---------------------------------------------------------------------------
# Factorization homology presentations


def genus_table(g: int) -> dict:
    """Polynomial presentation of global sections on a closed genus-``g`` surface.

    Genus 0 is computed from the homology of the three global vector fields;
    higher genus is assembled from the abelian cohomology of the tangent
    bundle.  ``degree`` is the degree in the presentation; for genus 0 it is
    the homological (chain) degree of the Lie class, whose cohomological
    degree is its negation.
    """
    if g < 0:
        raise ValueError("genus must be non-negative")
    if g == 0:
        b = betti(build_ce(sl2_vector_fields()))
        gens = []
        for k, bk in enumerate(b):
            if k == 0:
                continue
            for idx in range(bk):
                gens.append({"name": "y" if bk == 1 else f"y{idx + 1}", "degree": k, "cohomological_degree": -k})
        gens.append({"name": "C", "degree": 0, "cohomological_degree": 0})
        return {"genus": 0, "ring": _ring(gens), "generators": gens, "lie_betti": b}
    if g == 1:
        gens = [
            {"name": "x", "degree": -1, "source": "H^1(T), shifted"},
            {"name": "y", "degree": 0, "source": "H^0(T) = C d/dz"},
            {"name": "C", "degree": 0},
        ]
        return {"genus": 1, "ring": _ring(gens), "generators": gens}
    gens = [{"name": f"y{i + 1}", "degree": 0} for i in range(3 * g - 3)]
    gens.append({"name": "C", "degree": 0})
    return {"genus": g, "ring": _ring(gens), "generators": gens}


def _ring(gens: list[dict]) -> str:
    return "C[" + ",".join(gen["name"] for gen in gens) + "]"


def exterior_dims(d: int) -> list[int]:
    return [comb(d, k) for k in range(d + 1)]
