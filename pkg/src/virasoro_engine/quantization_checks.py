"""Numeric and exact reproductions of the annulus and one-loop integrals.

Plane measure is ``d^2z = dx dy``.  A bump function for the annulus
``r < |z| < R`` is a smooth function of ``s = |z|^2`` normalized so that
``int f(|z|^2) d^2z = 1``.  Normalization constants that differ from that
convention are never absorbed silently: every result record carries the
factors it applied.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from .exact_arith import as_rat, rat_str

TOL_ENV = "VIRASORO_QUAD_TOL"


def default_tolerance() -> float:
    """Absolute quadrature tolerance, overridable through ``VIRASORO_QUAD_TOL``."""
    raw = os.environ.get(TOL_ENV, "1e-10")
    try:
        tol = float(raw)
    except ValueError:
        raise ValueError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise ValueError(f"{TOL_ENV} must be positive")
    return tol


DEFAULT_TOL = 1e-10

# family tag -> (alpha, p) for phi(t) = exp(-alpha / (1 - t^2)^p)
BUMP_FAMILIES = {
    "exp": (1.0, 1),
    "exp-sharp": (2.0, 1),
    "exp-square": (1.0, 2),
}


class QuadratureError(ArithmeticError):
    """Refinement stopped before the error estimate met the tolerance."""


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    evaluations: int

    def __post_init__(self):
        if self.error < 0:
            raise ValueError("error estimate must be non-negative")

    @property
    def real(self) -> float:
        return complex(self.value).real

    def to_json(self) -> dict:
        v = complex(self.value)
        out = {"error": self.error, "evaluations": self.evaluations}
        if v.imag == 0:
            out["value"] = v.real
        else:
            out["value"] = [v.real, v.imag]
        return out


# ---------------------------------------------------------------------------
# Gauss-Legendre machinery


_NODES: dict = {}


def _gl(n: int):
    if n not in _NODES:
        _NODES[n] = np.polynomial.legendre.leggauss(n)
    return _NODES[n]


def _panel_nodes(a: float, b: float, panels: int, n: int):
    x, w = _gl(n)
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _roundoff(terms: np.ndarray) -> float:
    return 64 * np.finfo(float).eps * float(np.sum(np.abs(terms)))


def composite_gl(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    n: int = 16,
    max_panels: int = 4096,
) -> QuadratureResult:
    """Composite Gauss-Legendre with dyadic panel refinement.

    The error estimate is the change between successive refinements, floored
    by a roundoff bound.  A result whose roundoff floor exceeds ``tol`` is
    returned with that larger error rather than refined forever.
    """
    panels, prev, evals = 1, None, 0
    while True:
        x, w = _panel_nodes(a, b, panels, n)
        terms = w * fn(x)
        evals += x.size
        val = terms.sum()
        if prev is not None:
            noise = _roundoff(terms)
            err = max(abs(val - prev), noise)
            # once the change is at roundoff level, refining further cannot help
            if err <= max(tol, noise):
                return QuadratureResult(complex(val) if np.iscomplexobj(val) else float(val), float(err), evals)
        if panels >= max_panels:
            raise QuadratureError(f"no convergence on [{a}, {b}] after {panels} panels")
        prev, panels = val, panels * 2


def adaptive_gl(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    n: int = 12,
    max_depth: int = 60,
) -> QuadratureResult:
    """Adaptive bisection: a panel is accepted when its GL value agrees with
    the sum over its two halves to within a share of the tolerance."""
    x, w = _gl(n)
    evals = 0

    def panel(lo, hi):
        nonlocal evals
        half, mid = (hi - lo) / 2, (hi + lo) / 2
        terms = half * w * fn(mid + half * x)
        evals += n
        return terms.sum(), terms

    whole, _ = panel(a, b)
    stack = [(a, b, whole, 0)]
    total, err_total = 0.0, 0.0
    done: list = []
    while stack:
        lo, hi, val, depth = stack.pop()
        mid = (lo + hi) / 2
        left, lt = panel(lo, mid)
        right, rt = panel(mid, hi)
        refined = left + right
        err = abs(refined - val)
        local_tol = tol * (hi - lo) / (b - a)
        if err <= max(local_tol, _roundoff(np.concatenate([lt, rt]))):
            done.append((lo, refined, err))
        elif depth >= max_depth:
            raise QuadratureError(f"adaptive quadrature failed near [{lo}, {hi}]")
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    # fixed summation order by panel position
    done.sort(key=lambda t: t[0])
    for _, v, e in done:
        total += v
        err_total += e
    return QuadratureResult(float(total), float(err_total), evals)


def tensor_gl(
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    box: tuple[float, float, float, float],
    tol: float = DEFAULT_TOL,
    n: int = 16,
    max_panels: int = 512,
    start_panels: int = 1,
    y_panels: int | None = None,
) -> QuadratureResult:
    """Tensor-product Gauss-Legendre on ``[a, b] x [c, d]``.

    Both directions are refined dyadically together until successive values
    agree, unless ``y_panels`` pins the second direction (useful when the
    integrand is a low-order trigonometric polynomial in it).
    """
    a, b, c, d = box
    panels, prev, evals = start_panels, None, 0
    while True:
        xs, wx = _panel_nodes(a, b, panels, n)
        ys, wy = _panel_nodes(c, d, y_panels or panels, n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        terms = (wx[:, None] * wy[None, :]) * fn(X, Y)
        evals += terms.size
        val = terms.sum()
        if prev is not None:
            noise = _roundoff(terms)
            err = max(abs(val - prev), noise)
            # once the change is at roundoff level, refining further cannot help
            if err <= max(tol, noise):
                return QuadratureResult(complex(val), float(err), evals)
        if panels >= max_panels:
            raise QuadratureError(f"tensor quadrature did not converge after {panels} panels")
        prev, panels = val, panels * 2


# ---------------------------------------------------------------------------
# Bump functions


def _phi_derivs(t: np.ndarray, alpha: float, p: int, order: int = 3) -> list[np.ndarray]:
    """``phi, phi', phi'', phi'''`` for ``phi(t) = exp(-alpha (1-t^2)^-p)``, zero off (-1, 1)."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1
    out = [np.zeros_like(t) for _ in range(order + 1)]
    if not inside.any():
        return out
    s = t[inside]
    g = 1 - s * s
    h = -alpha * g ** (-p)
    h1 = -2 * alpha * p * s * g ** (-p - 1)
    h2 = -2 * alpha * p * (g ** (-p - 1) + 2 * (p + 1) * s * s * g ** (-p - 2))
    h3 = -2 * alpha * p * (p + 1) * (6 * s * g ** (-p - 2) + 4 * (p + 2) * s**3 * g ** (-p - 3))
    phi = np.exp(h)
    vals = [phi, h1 * phi, (h2 + h1 * h1) * phi, (h3 + 3 * h1 * h2 + h1**3) * phi]
    for k in range(order + 1):
        out[k][inside] = vals[k]
    return out


@dataclass(frozen=True)
class BumpSpec:
    """Smooth radial bump supported on ``inner < |z| < outer``."""

    inner: float
    outer: float
    family: str = "exp"
    normalization: float = field(init=False, default=0.0)

    def __post_init__(self):
        if not (0 < self.inner < self.outer):
            raise ValueError("need 0 < inner < outer")
        if self.family not in BUMP_FAMILIES:
            raise ValueError(f"unknown bump family {self.family!r}; choose from {sorted(BUMP_FAMILIES)}")
        alpha, p = BUMP_FAMILIES[self.family]
        # int f d^2z = pi * int f(s) ds with s = |z|^2; ds = (width/2) dt
        mass = composite_gl(lambda t: _phi_derivs(t, alpha, p, 0)[0], -1.0, 1.0, tol=1e-13)
        norm = 1.0 / (math.pi * self.half_width * mass.real)
        object.__setattr__(self, "normalization", norm)

    @property
    def s_range(self) -> tuple[float, float]:
        return self.inner**2, self.outer**2

    @property
    def half_width(self) -> float:
        lo, hi = self.s_range
        return (hi - lo) / 2

    def _t(self, s):
        lo, hi = self.s_range
        return (2 * np.asarray(s, dtype=float) - (lo + hi)) / (hi - lo)

    def derivatives(self, s, order: int = 3) -> list[np.ndarray]:
        """``f, f', ...`` as functions of ``s = |z|^2``."""
        alpha, p = BUMP_FAMILIES[self.family]
        raw = _phi_derivs(self._t(s), alpha, p, order)
        scale = 1.0 / self.half_width
        return [self.normalization * d * scale**k for k, d in enumerate(raw)]

    def __call__(self, s) -> np.ndarray:
        return self.derivatives(s, 0)[0]

    def to_json(self) -> dict:
        return {
            "inner": self.inner,
            "outer": self.outer,
            "family": self.family,
            "normalization": self.normalization,
        }


def _polar_box(b: BumpSpec) -> tuple[float, float, float, float]:
    lo, hi = b.s_range
    return (lo, hi, 0.0, 2 * math.pi)


def annulus_moment(b: BumpSpec, k: int, tol: float | None = None) -> QuadratureResult:
    """``int f(|z|^2) z^k d^2z``; in ``(s, theta)`` coordinates ``d^2z = ds dtheta / 2``."""

    def integrand(s, th):
        return 0.5 * b(s) * s ** (k / 2) * np.exp(1j * k * th)

    return tensor_gl(integrand, _polar_box(b), tol=tol or default_tolerance())


def _falling(q: int, i: int) -> int:
    out = 1
    for r in range(i):
        out *= q - r
    return out


def _check_nested(bumps) -> None:
    b1, b2, b3 = bumps
    if not (b1.outer < b2.inner and b2.outer < b3.inner):
        raise ValueError("bump supports must be disjoint and radially ordered A1 < A2 < A3")


def _cumulative_difference(b1: BumpSpec, b3: BumpSpec, s: np.ndarray) -> np.ndarray:
    """``G(s) = int_0^s (f1 - f3)`` at each node, by 1D quadrature."""
    out = np.empty_like(s, dtype=float)
    cache: dict = {}

    def partial(b: BumpSpec, upto: float) -> float:
        lo, hi = b.s_range
        top = min(max(upto, lo), hi)
        if top <= lo:
            return 0.0
        key = (id(b), top if top < hi else hi)
        if key not in cache:
            cache[key] = composite_gl(b, lo, top, tol=1e-13).real
        return cache[key]

    uniq, inv = np.unique(s, return_inverse=True)
    vals = np.array([partial(b1, float(v)) - partial(b3, float(v)) for v in uniq])
    out[...] = vals[inv].reshape(s.shape)
    return out


# constants that map the d^2z / int f d^2z = 1 convention onto the
# (m^3 - m)/12 normalization of the central term
CENTRAL_TERM_FACTORS = {
    "prefactor_1_over_2pi": 1 / (2 * math.pi),
    "prefactor_1_over_12": 1 / 12,
    "integration_by_parts_sign": -1.0,
    "inner_integral_normalization_pi": math.pi,
    "radial_normalization_2pi": 2 * math.pi,
}


@dataclass(frozen=True)
class CentralTermResult:
    value: float
    error: float
    evaluations: int
    raw_integral: QuadratureResult
    factors: dict
    target: Fraction
    measured_constant: float | None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "evaluations": self.evaluations,
            "raw_integral": self.raw_integral.to_json(),
            "factors": dict(self.factors),
            "target": rat_str(self.target),
            "measured_constant": self.measured_constant,
        }


def default_nested_bumps(family: str = "exp") -> tuple[BumpSpec, BumpSpec, BumpSpec]:
    return (
        BumpSpec(0.5, 1.0, family),
        BumpSpec(1.2, 1.8, family),
        BumpSpec(2.0, 2.6, family),
    )


def central_term_quadrature(
    m: int, n: int, bumps: tuple[BumpSpec, BumpSpec, BumpSpec] | None = None, tol: float | None = None
) -> CentralTermResult:
    """Central term of ``L_m . L_n - L_n . L_m`` from the nested-annulus integral.

    Evaluates ``J = int_A F(z, zbar) d_z^3(f2(|z|^2) z^(n+2)) d^2z`` with
    ``F = z^(m+1) int_0^{|z|^2} (f1 - f3)`` by honest 2D quadrature over the
    support of ``f2``, then multiplies by the itemized constants in
    :data:`CENTRAL_TERM_FACTORS`.
    """
    bumps = bumps or default_nested_bumps()
    _check_nested(bumps)
    b1, b2, b3 = bumps
    q = n + 2
    # z^(m+1) zbar^j z^(q-3+j) = r^(m+n+2j) e^{i(m+n)theta}
    G_cache: dict = {}

    def G(s):
        key = s.shape
        if key not in G_cache or not np.array_equal(G_cache[key][0], s):
            G_cache[key] = (s.copy(), _cumulative_difference(b1, b3, s))
        return G_cache[key][1]

    def integrand(s, th):
        derivs = b2.derivatives(s, 3)
        acc = np.zeros_like(s, dtype=complex)
        for j in range(4):
            coef = math.comb(3, j) * _falling(q, 3 - j)
            if coef:
                acc = acc + coef * derivs[j] * s ** ((m + n + 2 * j) / 2)
        return 0.5 * G(s) * acc * np.exp(1j * (m + n) * th)

    # the angular factor is e^{i(m+n) theta}; a fixed 64-node angular grid resolves it to roundoff for |m + n| <= 16
    raw = tensor_gl(integrand, _polar_box(b2), tol=tol or default_tolerance(), y_panels=4, max_panels=2048)
    factor = 1.0
    for v in CENTRAL_TERM_FACTORS.values():
        factor *= v
    value = complex(raw.value) * factor
    target = Fraction(m**3 - m, 12) if m + n == 0 else Fraction(0)
    measured = None
    if m + n == 0 and m**3 - m:
        measured = complex(raw.value).real / (m**3 - m)
    return CentralTermResult(
        value=value.real,
        error=raw.error * abs(factor) + abs(value.imag),
        evaluations=raw.evaluations,
        raw_integral=raw,
        factors=dict(CENTRAL_TERM_FACTORS),
        target=target,
        measured_constant=measured,
    )


# ---------------------------------------------------------------------------
# Heat kernel and the one-loop anomaly


def heat_kernel(Lt: float, z: complex, w: complex) -> float:
    """Scalar factor ``exp(-|z-w|^2 / 4L) / (4 pi L)``."""
    if Lt <= 0:
        raise ValueError("heat-kernel time must be positive")
    return math.exp(-abs(z - w) ** 2 / (4 * Lt)) / (4 * math.pi * Lt)


def heat_kernel_mass(Lt: float, tol: float = 1e-12) -> QuadratureResult:
    """``int K_L(0, w) d^2w`` over a disk of radius ``16 sqrt(L)`` (tail below 1e-27)."""
    if Lt <= 0:
        raise ValueError("heat-kernel time must be positive")
    rmax = 16 * math.sqrt(Lt)

    def integrand(r, th):
        return np.exp(-(r**2) / (4 * Lt)) / (4 * math.pi * Lt) * r + 0 * th

    return tensor_gl(integrand, (0.0, rmax, 0.0, 2 * math.pi), tol=tol, start_panels=2)


def _check_eps_L(eps: Fraction, L: Fraction) -> None:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps > L:
        raise ValueError("eps must not exceed L")


def _anomaly_closed_form(eps: Fraction, L: Fraction) -> Fraction:
    return Fraction(1, 12) - eps**2 / (2 * (eps + L) ** 2) + eps**3 / (3 * (eps + L) ** 3)


def anomaly_integral_exact(eps, L) -> Fraction:
    """``int_eps^L eps^2 t / (eps + t)^4 dt`` via its antiderivative."""
    eps, L = as_rat(eps), as_rat(L)
    _check_eps_L(eps, L)
    return _anomaly_closed_form(eps, L)


def anomaly_integrand(t, eps: float):
    t = np.asarray(t, dtype=float)
    return eps**2 * t / (eps + t) ** 4


def anomaly_integral_numeric(eps, L, tol: float = 1e-13) -> QuadratureResult:
    e, l = float(as_rat(eps)), float(as_rat(L))
    _check_eps_L(as_rat(eps), as_rat(L))
    if e == l:
        return QuadratureResult(0.0, 0.0, 0)
    return adaptive_gl(lambda t: anomaly_integrand(t, e), e, l, tol=tol)


def anomaly_limit_defect(eps, L) -> Fraction:
    """``|I(eps, L) - 1/12|``."""
    return abs(anomaly_integral_exact(eps, L) - Fraction(1, 12))


def anomaly_defect_bound(eps, L) -> Fraction:
    eps, L = as_rat(eps), as_rat(L)
    _check_eps_L(eps, L)
    return eps**2 / (2 * L**2) + eps**3 / (3 * L**3)


def anomaly_limit(L=1) -> Fraction:
    """``lim_{eps -> 0} I(eps, L)``.

    The closed form is a rational function of ``eps`` with denominators
    ``(eps + L)^k``, continuous at ``eps = 0``, so the limit is its value there.
    """
    L = as_rat(L)
    if L <= 0:
        raise ValueError("L must be positive")
    return _anomaly_closed_form(Fraction(0), L)


@dataclass(frozen=True)
class PiFactor:
    """Exact constant ``rational * pi^power``."""

    rational: Fraction
    pi_power: int = 0

    def __mul__(self, other: "PiFactor") -> "PiFactor":
        return PiFactor(self.rational * other.rational, self.pi_power + other.pi_power)

    def __float__(self):
        return float(self.rational) * math.pi**self.pi_power

    def __str__(self):
        r = rat_str(self.rational)
        if not self.pi_power:
            return r
        return f"{r}*pi^{self.pi_power}"


def beta_gamma_central_charge(n: int) -> dict:
    """Central charge of the ``n``-component beta-gamma system from the one-loop cocycle.

    The obstruction cocycle is assembled as a product of exact factors; the
    charge is read off against the Virasoro cocycle ``(1/2pi)(c/12) int f''' g``.
    """
    if n < 1:
        raise ValueError("need at least one beta-gamma pair")
    wheel = PiFactor(Fraction(1, 16), -2)
    wick = PiFactor(Fraction(8), 1)
    y_integration = wheel * wick
    if y_integration != PiFactor(Fraction(1, 2), -1):
        raise ArithmeticError("y-integration prefactor does not reduce to 1/(2 pi)")
    t_limit = PiFactor(anomaly_limit())
    flavours = PiFactor(Fraction(n))
    alpha = flavours * y_integration * t_limit
    # Virasoro cocycle at charge c: (1/(2 pi)) (c/12) int d^3 f g
    per_unit_charge = PiFactor(Fraction(1, 2), -1) * PiFactor(Fraction(1, 12))
    ratio = alpha.rational / per_unit_charge.rational
    if alpha.pi_power != per_unit_charge.pi_power or ratio.denominator != 1:
        raise ArithmeticError("obstruction cocycle is not an integer multiple of the Virasoro cocycle")
    cocycle_coefficient = alpha * PiFactor(Fraction(2), 1)
    steps = [
        {"step": "flavour trace over V + V*", "factor": str(flavours)},
        {"step": "two-vertex wheel prefactor", "factor": str(wheel)},
        {"step": "Gaussian y-integration (Wick)", "factor": str(wick)},
        {"step": "net y-integration prefactor", "factor": str(y_integration)},
        {"step": "t-integral limit eps -> 0", "factor": str(t_limit)},
        {"step": "obstruction cocycle alpha", "factor": str(alpha)},
        {"step": "remove shared 1/(2 pi)", "factor": str(PiFactor(Fraction(2), 1))},
        {"step": "cocycle coefficient (c/12)", "factor": str(cocycle_coefficient)},
    ]
    return {
        "charge": int(ratio),
        "cocycle_coefficient": cocycle_coefficient.rational,
        "alpha": str(alpha),
        "audit": steps,
    }
