"""Closed-form curvature formulas and the gauge action on generators.

A holomorphic generator ``w`` gives the density ``4|w'|^2 / (|w|^2 + 1)^2``
solving ``lap(log nu) + 2 nu = 0``.  A pair of generators ``(w1, w2)`` gives
densities ``p`` and ``q`` and through them the Gauss curvature ``K`` and the
normal curvature ``kappa`` of a minimal surface in R^4.  The Moebius map
``w -> (-conj(b) + conj(a) w) / (a + b w)`` with ``|a|^2 + |b|^2 = 1`` leaves
all of these unchanged.

The value-level functions (``curvatures_from_pq`` and friends) accept numpy
arrays as well as floats; the functions taking a :class:`HoloFn` evaluate at
a single point and raise on singular points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .expr import (BinOp, Const, HoloFn, Jet, Neg, Num, SingularityError,
                   eval_jet)

__all__ = [
    "CurvaturePair", "AlphaBeta", "PQ", "MoebiusParams", "WeierstrassPair",
    "DomainError", "NormalizationError", "NORM_TOL",
    "density_from_jet", "curvatures_from_jets", "canonical_from_jet",
    "liouville_density", "pq_from_w", "curvatures_from_pq", "curvature_pair",
    "alpha_beta_from_curvatures", "pq_from_alpha_beta", "curvatures_from_alpha_beta",
    "moebius", "moebius_value", "weierstrass_FG", "su2_transform",
    "canonical_derivatives", "weierstrass_derivatives",
]

NORM_TOL = 1e-12


class DomainError(ValueError):
    """Curvature values outside ``K < 0, K^2 - kappa^2 > 0``."""


class NormalizationError(ValueError):
    """Gauge parameters with ``|a|^2 + |b|^2`` different from 1."""


@dataclass(frozen=True)
class CurvaturePair:
    K: float
    kappa: float


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float
    beta: float


@dataclass(frozen=True)
class PQ:
    p: float
    q: float


@dataclass(frozen=True)
class WeierstrassPair:
    F: complex
    G: complex


@dataclass(frozen=True)
class MoebiusParams:
    """Coefficients ``(a, b)`` of an SU(2) gauge transformation."""

    a: complex
    b: complex

    @property
    def norm_sq(self) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2

    def check(self, tol: float = NORM_TOL) -> "MoebiusParams":
        dev = abs(self.norm_sq - 1.0)
        if not dev <= tol:
            raise NormalizationError(
                f"|a|^2 + |b|^2 = {self.norm_sq!r} deviates from 1 by {dev:.3g} "
                f"(tolerance {tol:g}) for a = {self.a!r}, b = {self.b!r}")
        return self

    def normalized(self) -> "MoebiusParams":
        n = np.sqrt(self.norm_sq)
        if not n > 0:
            raise NormalizationError("cannot normalize a = b = 0")
        return MoebiusParams(complex(self.a) / n, complex(self.b) / n)

    def resolve(self, renormalize: bool = False) -> "MoebiusParams":
        return self.normalized() if renormalize else self.check()

    @classmethod
    def random(cls, rng: np.random.Generator) -> "MoebiusParams":
        x = rng.standard_normal(4)
        x /= np.linalg.norm(x)
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    def matrix(self) -> np.ndarray:
        """The SU(2) matrix acting on column vectors ``(F, G)``."""
        a, b = complex(self.a), complex(self.b)
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


# --------------------------------------------------------------------------
# array-level kernels shared with numerics and surface

def density_from_jet(jet: Jet):
    """``4 |w'|^2 / (|w|^2 + 1)^2`` from a (possibly array) jet."""
    return 4 * np.abs(jet.deriv) ** 2 / (np.abs(jet.value) ** 2 + 1) ** 2


def curvatures_from_jets(j1: Jet, j2: Jet):
    """Direct evaluation of ``(K, kappa)`` from the two generator jets."""
    s1 = np.abs(j1.value) ** 2 + 1
    s2 = np.abs(j2.value) ** 2 + 1
    a = np.abs(j1.deriv) ** 2 / s1 ** 2
    b = np.abs(j2.deriv) ** 2 / s2 ** 2
    scale = 8 * np.abs(j1.deriv * j2.deriv) / (s1 * s2)
    return -scale * (a + b), scale * (a - b)


def canonical_from_jet(jet: Jet):
    w, dw = jet.value, jet.deriv
    return (0.5 * (w * w - 1) / dw,
            -0.5j * (w * w + 1) / dw,
            -w / dw)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _regular_jet(w: HoloFn, z, which: Optional[str] = None) -> Jet:
    try:
        jet = eval_jet(w, z)
    except SingularityError as exc:
        raise SingularityError(exc.kind, z, w.source, which) from None
    if jet.deriv == 0:
        raise SingularityError("derivative zero", z, w.source, which)
    return jet


# --------------------------------------------------------------------------
# point operations

def liouville_density(w: HoloFn, z: complex) -> float:
    """Density ``nu`` generated by ``w`` at ``z``; strictly positive."""
    return float(density_from_jet(_regular_jet(w, z)))


def pq_from_w(w1: HoloFn, w2: HoloFn, z: complex) -> PQ:
    p = density_from_jet(_regular_jet(w1, z, "w1"))
    q = density_from_jet(_regular_jet(w2, z, "w2"))
    return PQ(float(p), float(q))


def curvatures_from_pq(pq: PQ) -> CurvaturePair:
    p, q = pq.p, pq.q
    if not (np.all(np.asarray(p) > 0) and np.all(np.asarray(q) > 0)):
        raise DomainError(f"p and q must be positive, got p = {p}, q = {q}")
    r = np.sqrt(p * q)
    return CurvaturePair(_scalar(-0.5 * r * (p + q)), _scalar(0.5 * r * (p - q)))


def curvature_pair(w1: HoloFn, w2: HoloFn, z: complex) -> CurvaturePair:
    """``(K, kappa)`` generated by ``(w1, w2)`` at ``z``.

    Evaluated from the closed form in the jets, independently of the
    ``p, q`` route through :func:`curvatures_from_pq`.
    """
    j1 = _regular_jet(w1, z, "w1")
    j2 = _regular_jet(w2, z, "w2")
    K, kappa = curvatures_from_jets(j1, j2)
    return CurvaturePair(float(K), float(kappa))


def alpha_beta_from_curvatures(c: CurvaturePair) -> AlphaBeta:
    K, kappa = np.asarray(c.K), np.asarray(c.kappa)
    if not (np.all(K < 0) and np.all(K * K - kappa * kappa > 0)):
        raise DomainError(
            f"need K < 0 and K^2 - kappa^2 > 0, got K = {c.K}, kappa = {c.kappa}")
    alpha = np.sqrt((c.kappa - c.K) / 4)
    beta = np.sqrt(-(c.K + c.kappa) / 4)
    return AlphaBeta(_scalar(alpha), _scalar(beta))


def pq_from_alpha_beta(ab: AlphaBeta) -> PQ:
    a, b = ab.alpha, ab.beta
    return PQ(_scalar(2 * np.sqrt(a ** 3 / b)), _scalar(2 * np.sqrt(b ** 3 / a)))


def curvatures_from_alpha_beta(ab: AlphaBeta) -> CurvaturePair:
    a2, b2 = ab.alpha ** 2, ab.beta ** 2
    return CurvaturePair(_scalar(-2 * (a2 + b2)), _scalar(2 * (a2 - b2)))


# --------------------------------------------------------------------------
# gauge

def _literal(c: complex):
    """Expression tree for the complex constant ``c`` built from real literals."""
    c = complex(c)
    re_part = im_part = None
    if c.real != 0:
        re_part = Num(abs(c.real)) if c.real > 0 else Neg(Num(-c.real))
    if c.imag != 0:
        mag = abs(c.imag)
        im_part = Const("i") if mag == 1 else BinOp("*", Num(mag), Const("i"))
        if re_part is None:
            return im_part if c.imag > 0 else Neg(im_part)
        return BinOp("+" if c.imag > 0 else "-", re_part, im_part)
    return re_part if re_part is not None else Num(0.0)


def _affine(c0: complex, c1: complex, w):
    """Tree for ``c0 + c1 * w`` with zero and unit coefficients elided."""
    term = None
    if c1 != 0:
        term = w if c1 == 1 else BinOp("*", _literal(c1), w)
    if c0 == 0:
        return term if term is not None else Num(0.0)
    if term is None:
        return _literal(c0)
    return BinOp("+", _literal(c0), term)


def moebius(w: HoloFn, m: MoebiusParams, renormalize: bool = False) -> HoloFn:
    """The gauge-equivalent generator ``(-conj(b) + conj(a) w) / (a + b w)``.

    Built as a new expression so the result is evaluatable like any other
    :class:`HoloFn`.  A zero of ``a + b w`` shows up as a pole on evaluation.
    """
    m = m.resolve(renormalize)
    a, b = complex(m.a), complex(m.b)
    num = _affine(-b.conjugate(), a.conjugate(), w.ast)
    if b == 0 and a == 1:
        return HoloFn.from_ast(num)
    den = _affine(a, b, w.ast)
    return HoloFn.from_ast(BinOp("/", num, den))


def moebius_value(w: complex, m: MoebiusParams) -> complex:
    a, b = complex(m.a), complex(m.b)
    return (-b.conjugate() + a.conjugate() * w) / (a + b * w)


def weierstrass_FG(w: HoloFn, z: complex) -> WeierstrassPair:
    """``F = 1 / sqrt(-2 w')``, ``G = w F`` on the principal branch."""
    jet = _regular_jet(w, z)
    # + 0j turns a negative-zero imaginary part positive so the branch is principal
    F = 1 / np.sqrt(complex(-2 * jet.deriv) + 0j)
    return WeierstrassPair(complex(F), complex(jet.value * F))


def su2_transform(pair: WeierstrassPair, m: MoebiusParams,
                  renormalize: bool = False) -> WeierstrassPair:
    m = m.resolve(renormalize)
    a, b = complex(m.a), complex(m.b)
    return WeierstrassPair(a * pair.F + b * pair.G,
                           -b.conjugate() * pair.F + a.conjugate() * pair.G)


def canonical_derivatives(w: HoloFn, z: complex) -> tuple[complex, complex, complex]:
    """Derivatives of the three surface coordinates in the canonical chart."""
    return tuple(complex(v) for v in canonical_from_jet(_regular_jet(w, z)))


def weierstrass_derivatives(pair: WeierstrassPair) -> tuple[complex, complex, complex]:
    F2, G2 = pair.F ** 2, pair.G ** 2
    return F2 - G2, 1j * (F2 + G2), 2 * pair.F * pair.G
