"""Grid sampling, the five-point Laplacian and PDE residual reports.

Every equation checked here has the shape ``c * lap(log f) = r`` for sampled
fields ``c``, ``f`` and ``r``.  The residual ``c * lap_h(log f) - r`` is
collected over interior nodes whose whole stencil is valid, and
:func:`convergence_order` compares two reports at ``h`` and ``h/2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import geometry as geo
from .expr import (DERIVATIVE_ZERO, KIND_NAMES, OK, HoloFn, Jet)

__all__ = [
    "GridSpec", "ScalarField", "ResidualReport", "ConvergenceOrder", "SystemFields",
    "EmptyFieldError", "MaskedStencilError", "MismatchedReportError",
    "EPS_LOG", "EXCLUDED", "LOG_DOMAIN", "FORMS",
    "sample", "sample_array", "laplacian", "laplacian_field",
    "critical_distance", "generator_jets", "system_fields",
    "residual_liouville", "residual_system", "residual_chain", "convergence_order",
    "identity_defect", "mask_counts", "rounding_floor",
]

EPS_LOG = 1e-12
FD_STEP = 1e-6
DEGENERATE_RHS = 1e-12

# mask reason codes beyond the evaluation codes of ``expr``
EXCLUDED, LOG_DOMAIN = 5, 6
_REASONS = {**KIND_NAMES, EXCLUDED: "excluded", LOG_DOMAIN: "log domain"}

FORMS = {"eq1": "original", "eq2": "rewritten", "original": "original",
         "rewritten": "rewritten"}


class EmptyFieldError(ValueError):
    pass


class MaskedStencilError(ValueError):
    pass


class MismatchedReportError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Rectangle ``[x0, x1] x [y0, y1]`` sampled with equal spacing on both axes.

    A single-node axis must have zero extent.  Node ``(i, j)`` sits at
    ``x0 + i h + 1j (y0 + j h)``.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    def __post_init__(self):
        for lo, hi, n, ax in ((self.x0, self.x1, self.nx, "x"),
                              (self.y0, self.y1, self.ny, "y")):
            if not (isinstance(n, (int, np.integer)) and n >= 1):
                raise ValueError(f"n{ax} must be a positive integer, got {n!r}")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"non-finite {ax} range")
            if n == 1 and hi != lo:
                raise ValueError(f"{ax} range must be degenerate for n{ax} = 1")
            if n > 1 and not hi > lo:
                raise ValueError(f"need {ax}1 > {ax}0, got [{lo}, {hi}]")
        if self.nx > 1 and self.ny > 1:
            hx, hy = self.hx, self.hy
            if abs(hx - hy) > 1e-9 * max(hx, hy):
                raise ValueError(f"anisotropic grid: hx = {hx!r}, hy = {hy!r}")

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1) if self.nx > 1 else 0.0

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / (self.ny - 1) if self.ny > 1 else 0.0

    @property
    def h(self) -> float:
        return self.hx if self.nx > 1 else self.hy

    @property
    def shape(self) -> tuple[int, int]:
        return self.nx, self.ny

    @classmethod
    def square(cls, x0, x1, y0, y1, n) -> "GridSpec":
        """``n`` nodes along x; the y count follows from the aspect ratio.

        ``y1`` is moved (by less than half a cell) so the spacings agree.
        """
        if n == 1:
            return cls(x0, x0, y0, y0, 1, 1)
        h = (x1 - x0) / (n - 1)
        if not h > 0:
            raise ValueError(f"need x1 > x0, got [{x0}, {x1}]")
        ny = int(round((y1 - y0) / h)) + 1
        if ny < 1:
            raise ValueError(f"need y1 >= y0, got [{y0}, {y1}]")
        return cls(x0, x1, y0, y0 + (ny - 1) * h, n, ny)

    def refined(self) -> "GridSpec":
        """Same rectangle at half the spacing."""
        return GridSpec(self.x0, self.x1, self.y0, self.y1,
                        2 * self.nx - 1 if self.nx > 1 else 1,
                        2 * self.ny - 1 if self.ny > 1 else 1)

    def xs(self) -> np.ndarray:
        t = np.arange(self.nx) / max(self.nx - 1, 1)
        return self.x0 * (1 - t) + self.x1 * t

    def ys(self) -> np.ndarray:
        t = np.arange(self.ny) / max(self.ny - 1, 1)
        return self.y0 * (1 - t) + self.y1 * t

    def nodes(self) -> np.ndarray:
        """Complex node coordinates, shape ``(nx, ny)``."""
        return self.xs()[:, None] + 1j * self.ys()[None, :]

    def node(self, i: int, j: int) -> complex:
        return complex(self.xs()[i], self.ys()[j])

    def index_of(self, z: complex, rtol: float = 1e-9) -> tuple[int, int]:
        """Indices of the node at ``z``; ``ValueError`` if ``z`` is not a node."""
        z = complex(z)
        i = int(np.argmin(np.abs(self.xs() - z.real)))
        j = int(np.argmin(np.abs(self.ys() - z.imag)))
        tol = rtol * max(self.h, 1.0)
        if abs(self.node(i, j) - z) > tol:
            raise ValueError(f"{z!r} is not a grid node (nearest {self.node(i, j)!r})")
        return i, j


@dataclass
class ScalarField:
    """Sampled real values; masked entries hold ``nan``."""

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.where(self.mask, self.values, np.nan)

    @property
    def n_valid(self) -> int:
        return int(self.mask.sum())


def sample(f: Callable[[complex], float], grid: GridSpec) -> ScalarField:
    """Evaluate ``f`` node by node; failing or non-finite nodes are masked."""
    values = np.full(grid.shape, np.nan)
    mask = np.zeros(grid.shape, dtype=bool)
    Z = grid.nodes()
    for idx in np.ndindex(*grid.shape):
        try:
            v = float(f(complex(Z[idx])))
        except (ArithmeticError, ValueError):
            continue
        if math.isfinite(v):
            values[idx] = v
            mask[idx] = True
    if not mask.any():
        raise EmptyFieldError(f"every one of the {values.size} nodes is masked")
    return ScalarField(grid, values, mask)


def sample_array(f: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
                 grid: GridSpec) -> ScalarField:
    """Vectorised :func:`sample`; ``f`` maps node array to ``(values, valid)``."""
    with np.errstate(all="ignore"):
        values, mask = f(grid.nodes())
    mask = np.asarray(mask, dtype=bool) & np.isfinite(values)
    if not mask.any():
        raise EmptyFieldError(f"every one of the {mask.size} nodes is masked")
    return ScalarField(grid, values, mask)


def laplacian(field: ScalarField, i: int, j: int) -> float:
    nx, ny = field.grid.shape
    if not (0 < i < nx - 1 and 0 < j < ny - 1):
        raise MaskedStencilError(f"node ({i}, {j}) is not interior")
    cross = [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
    bad = [ij for ij in cross if not field.mask[ij]]
    if bad:
        raise MaskedStencilError(f"stencil at ({i}, {j}) reads masked node(s) {bad}")
    f = field.values
    h = field.grid.h
    return (f[i + 1, j] + f[i - 1, j] + f[i, j + 1] + f[i, j - 1] - 4 * f[i, j]) / h**2


def _stencil(values, mask, h):
    """Five-point Laplacian over the interior; returns (lap, valid)."""
    out = np.full(values.shape, np.nan)
    ok = np.zeros(values.shape, dtype=bool)
    if min(values.shape) < 3:
        return out, ok
    f = np.where(mask, values, 0.0)
    c = (slice(1, -1), slice(1, -1))
    out[c] = (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2] - 4 * f[c]) / h**2
    ok[c] = (mask[c] & mask[2:, 1:-1] & mask[:-2, 1:-1]
             & mask[1:-1, 2:] & mask[1:-1, :-2])
    out[~ok] = np.nan
    return out, ok


def laplacian_field(field: ScalarField) -> ScalarField:
    lap, ok = _stencil(field.values, field.mask, field.grid.h)
    return ScalarField(field.grid, lap, ok)


# --------------------------------------------------------------------------
# residual reports

@dataclass(frozen=True)
class ResidualReport:
    equation: str
    h: float
    n_valid: int
    max_abs: float
    mean_abs: float
    max_rel: float
    n_log_masked: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("n_log_masked")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class ConvergenceOrder(NamedTuple):
    order: float
    below_floor: bool

    def within(self, lo: float = 1.8, hi: float = 2.2) -> bool:
        return self.below_floor or lo <= self.order <= hi


def rounding_floor(h: float) -> float:
    """Relative residual level attributable to rounding in a stencil at ``h``."""
    return 1e3 * np.finfo(float).eps / h**2 if h > 0 else math.inf


def convergence_order(r_h: ResidualReport, r_h2: ResidualReport,
                      floor: Optional[float] = None) -> ConvergenceOrder:
    """Observed order ``log2(max_abs(h) / max_abs(h/2))``.

    When both relative residuals sit at or below the rounding floor (or the
    explicit relative ``floor``) the order is reported as 0 with
    ``below_floor`` set.
    """
    if r_h.equation != r_h2.equation:
        raise MismatchedReportError(
            f"different equations: {r_h.equation!r} vs {r_h2.equation!r}")
    if not (r_h2.h > 0 and abs(r_h.h / r_h2.h - 2) <= 1e-9):
        raise MismatchedReportError(f"spacing ratio is not 2: {r_h.h!r} / {r_h2.h!r}")
    if floor is None:
        floor = rounding_floor(r_h2.h)
    if max(r_h.max_rel, r_h2.max_rel) <= floor or max(r_h.max_abs, r_h2.max_abs) == 0:
        return ConvergenceOrder(0.0, True)
    if r_h2.max_abs == 0:
        return ConvergenceOrder(math.inf, False)
    return ConvergenceOrder(math.log2(r_h.max_abs / r_h2.max_abs), False)


def _log_residual(equation, grid, mask, coeff, arg, rhs, scale=None) -> ResidualReport:
    """Report for ``coeff * lap(log arg) = rhs``.

    ``scale`` is the size of the terms ``rhs`` is built from.  When ``rhs``
    vanishes identically up to rounding relative to it, ``max_rel`` is taken
    relative to ``scale`` instead of ``max |rhs|``.
    """
    mask = mask & np.isfinite(arg)
    if not mask.any():
        raise EmptyFieldError(f"{equation}: every node is masked")
    with np.errstate(all="ignore"):
        top = np.max(np.where(mask, arg, -np.inf))
        log_ok = mask & (arg > EPS_LOG * top)
        log_f = np.where(log_ok, np.log(np.where(log_ok, arg, 1.0)), np.nan)
        lap, ok = _stencil(log_f, log_ok, grid.h)
        ok &= np.isfinite(coeff) & np.isfinite(rhs)
        if not ok.any():
            where = ""
            bad = np.argwhere(mask & ~log_ok)
            if bad.size:
                where = f", first at z = {grid.node(*map(int, bad[0]))!r}"
            raise EmptyFieldError(
                f"{equation}: no interior node with a fully valid stencil "
                f"({int(mask.sum())} valid nodes, {int((mask & ~log_ok).sum())} "
                f"masked by the log domain{where})")
        r = np.abs(coeff[ok] * lap[ok] - rhs[ok])
    max_abs = float(r.max())
    rhs_max = float(np.abs(rhs[ok]).max())
    term_max = float(np.abs(scale[ok]).max()) if scale is not None else rhs_max
    if rhs_max <= DEGENERATE_RHS * term_max:
        rhs_max = term_max
    return ResidualReport(
        equation=equation,
        h=grid.h,
        n_valid=int(ok.sum()),
        max_abs=max_abs,
        mean_abs=float(r.mean()),
        max_rel=max_abs / rhs_max if rhs_max > 0 else max_abs,
        n_log_masked=int((mask & ~log_ok).sum()),
    )


# --------------------------------------------------------------------------
# generator fields

def critical_distance(w: HoloFn, Z: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Newton estimate ``|w'| / |w''|`` of the distance to a critical point.

    ``w''`` is a central difference of the exact ``w'``.  Points where the
    estimate cannot be formed get distance 0.
    """
    jp, cp = w.jet_array(Z + step)
    jm, cm = w.jet_array(Z - step)
    j0, c0 = w.jet_array(Z)
    with np.errstate(all="ignore"):
        d2 = (jp.deriv - jm.deriv) / (2 * step)
        dist = np.abs(j0.deriv) / np.abs(d2)
    good = (cp == OK) & (cm == OK) & (c0 == OK) & ~np.isnan(dist)
    return np.where(good, dist, 0.0)


def generator_jets(w: HoloFn, grid: GridSpec, exclusion: float = 0.0):
    """Jets of ``w`` on the grid with per-node mask reason codes.

    Nodes where evaluation fails or ``w' = 0`` are flagged; with
    ``exclusion > 0`` nodes whose :func:`critical_distance` is below it are
    flagged as well.  The exclusion set depends only on position, so it is
    the same on every grid.
    """
    Z = grid.nodes()
    jet, code = w.jet_array(Z)
    code = code.copy()
    code[(code == OK) & (jet.deriv == 0)] = DERIVATIVE_ZERO
    if exclusion > 0:
        code[(code == OK) & (critical_distance(w, Z) < exclusion)] = EXCLUDED
    return jet, code


def mask_counts(code: np.ndarray) -> dict:
    return {_REASONS[k]: int((code == k).sum()) for k in sorted(_REASONS)
            if (code == k).any()}


def _first_singular(grid: GridSpec, code: np.ndarray) -> str:
    bad = np.argwhere(code != OK)
    if not bad.size:
        return ""
    i, j = map(int, bad[0])
    return f", first at z = {grid.node(i, j)!r} ({_REASONS[int(code[i, j])]})"


@dataclass
class SystemFields:
    """Curvature fields of a generator pair sampled on a grid."""

    grid: GridSpec
    K: np.ndarray
    kappa: np.ndarray
    p: np.ndarray
    q: np.ndarray
    code1: np.ndarray
    code2: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return (self.code1 == OK) & (self.code2 == OK)

    def curvature_pair(self) -> geo.CurvaturePair:
        m = self.mask
        return geo.CurvaturePair(self.K[m], self.kappa[m])


def system_fields(w1: HoloFn, w2: HoloFn, grid: GridSpec,
                  exclusion: float = 0.0) -> SystemFields:
    j1, c1 = generator_jets(w1, grid, exclusion)
    j2, c2 = generator_jets(w2, grid, exclusion)
    with np.errstate(all="ignore"):
        K, kappa = geo.curvatures_from_jets(j1, j2)
        p, q = geo.density_from_jet(j1), geo.density_from_jet(j2)
    fields = SystemFields(grid, K, kappa, p, q, c1, c2)
    if not fields.mask.any():
        raise EmptyFieldError(
            f"every one of the {K.size} nodes is masked "
            f"(w1: {mask_counts(c1)}, w2: {mask_counts(c2)}"
            f"{_first_singular(grid, np.where(c1 != OK, c1, c2))})")
    return fields


def _masked(arr, mask, fill=1.0):
    return np.where(mask, arr, fill)


def residual_liouville(w: HoloFn, grid: GridSpec, exclusion: float = 0.0) -> ResidualReport:
    """Residual of ``lap(log nu) + 2 nu = 0`` for the density of ``w``."""
    jet, code = generator_jets(w, grid, exclusion)
    mask = code == OK
    if not mask.any():
        raise EmptyFieldError(
            f"every one of the {mask.size} nodes is masked "
            f"({mask_counts(code)}{_first_singular(grid, code)})")
    with np.errstate(all="ignore"):
        nu = _masked(geo.density_from_jet(jet), mask)
    return _log_residual("liouville", grid, mask, np.ones(grid.shape), nu, -2 * nu)


def residual_system(w1: HoloFn, w2: HoloFn, grid: GridSpec, form: str = "rewritten",
                    exclusion: float = 0.0, fields: Optional[SystemFields] = None):
    """Both equations of the natural system for ``(w1, w2)``.

    ``form="original"`` (alias ``"eq1"``) checks the equations in
    ``log|kappa -+ K|``; ``form="rewritten"`` (alias ``"eq2"``) checks the
    ``log sqrt(K^2 - kappa^2)`` / ``log((K - kappa)/(K + kappa))`` pair.
    """
    try:
        form = FORMS[form]
    except KeyError:
        raise ValueError(f"unknown form {form!r}; choose from {sorted(FORMS)}") from None
    f = fields or system_fields(w1, w2, grid, exclusion)
    m = f.mask
    K, kap = _masked(f.K, m, -2.0), _masked(f.kappa, m, 0.0)
    with np.errstate(all="ignore"):
        disc = (K - kap) * (K + kap)
        coeff = disc ** 0.25
        size = 2 * (2 * np.abs(K) + np.abs(kap))
        if form == "original":
            return (
                _log_residual("original.log_abs_kappa_minus_K", grid, m, coeff,
                              np.abs(kap - K), 2 * (2 * K - kap), size),
                _log_residual("original.log_abs_kappa_plus_K", grid, m, coeff,
                              np.abs(kap + K), 2 * (2 * K + kap), size),
            )
        return (
            _log_residual("rewritten.log_sqrt_discriminant", grid, m, coeff,
                          np.sqrt(disc), 4 * K),
            _log_residual("rewritten.log_ratio", grid, m, coeff,
                          (K - kap) / (K + kap), -4 * kap, 4 * np.abs(K)),
        )


def residual_chain(w1: HoloFn, w2: HoloFn, grid: GridSpec, exclusion: float = 0.0,
                   fields: Optional[SystemFields] = None) -> list[ResidualReport]:
    """Residuals of the intermediate forms in the alpha/beta and p/q variables.

    ``alpha, beta`` are recovered from the sampled ``(K, kappa)``, so the
    substitution is exercised; the final pair uses the sampled densities and
    coincides with :func:`residual_liouville` of each generator.
    """
    f = fields or system_fields(w1, w2, grid, exclusion)
    m = f.mask
    ab = geo.alpha_beta_from_curvatures(
        geo.CurvaturePair(_masked(f.K, m, -2.0), _masked(f.kappa, m, 0.0)))
    a, b = ab.alpha, ab.beta
    p, q = _masked(f.p, m), _masked(f.q, m)
    one = np.ones(grid.shape)
    with np.errstate(all="ignore"):
        sab = 2 * np.sqrt(a * b)
        u, v = 4 * a**3 / b, 4 * b**3 / a
        return [
            _log_residual("alpha_beta.log_product", grid, m, sab, a * b,
                          -8 * (a**2 + b**2)),
            _log_residual("alpha_beta.log_ratio", grid, m, sab, a / b,
                          -4 * (a**2 - b**2), 4 * (a**2 + b**2)),
            _log_residual("alpha_beta.log_p_squared", grid, m, one, u, -4 * np.sqrt(u)),
            _log_residual("alpha_beta.log_q_squared", grid, m, one, v, -4 * np.sqrt(v)),
            _log_residual("pq.p", grid, m, one, p, -2 * p),
            _log_residual("pq.q", grid, m, one, q, -2 * q),
        ]


def identity_defect(fields: SystemFields) -> float:
    """Max relative defect of ``K^2 - kappa^2 = (pq)^2`` over valid nodes."""
    m = fields.mask
    K, kap, p, q = fields.K[m], fields.kappa[m], fields.p[m], fields.q[m]
    target = (p * q) ** 2
    return float(np.max(np.abs((K - kap) * (K + kap) - target) / target))
