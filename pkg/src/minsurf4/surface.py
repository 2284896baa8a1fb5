"""Minimal surface patches in R^3 from a single holomorphic generator.

The coordinate derivatives ``(w^2 - 1) / (2 w')``, ``-i (w^2 + 1) / (2 w')``
and ``-w / w'`` are integrated from a basepoint node along axis-aligned
staircases with the trapezoidal rule; the patch is the real part.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .expr import DERIVATIVE_ZERO, KIND_NAMES, NONFINITE, OK, HoloFn
from .geometry import canonical_from_jet
from .numerics import EmptyFieldError, GridSpec, _stencil

__all__ = [
    "SurfacePatch", "SingularPathError", "EmptyMeshError",
    "coordinate_derivatives", "integrate_patch", "path_independence_check",
    "conformality_residual", "harmonicity_residual", "export_mesh", "write_mesh",
]


class SingularPathError(ArithmeticError):
    def __init__(self, z, index, kind):
        self.z, self.index, self.kind = complex(z), index, kind
        super().__init__(
            f"integration path crosses a singular node ({kind}) at z = {self.z!r}, "
            f"index {index}")


class EmptyMeshError(ValueError):
    pass


@dataclass
class SurfacePatch:
    """Surface points on a parameter grid, shape ``(nx, ny, 3)``."""

    grid: GridSpec
    points: np.ndarray
    mask: np.ndarray

    def translated(self, v) -> "SurfacePatch":
        return SurfacePatch(self.grid, self.points + np.asarray(v, float), self.mask)

    def scaled(self, s: float) -> "SurfacePatch":
        return SurfacePatch(self.grid, self.points * s, self.mask)


def coordinate_derivatives(w: HoloFn, grid: GridSpec):
    """Complex derivatives of the three coordinates, shape ``(3, nx, ny)``, and codes."""
    jet, code = w.jet_array(grid.nodes())
    code = code.copy()
    code[(code == OK) & (jet.deriv == 0)] = DERIVATIVE_ZERO
    with np.errstate(all="ignore"):
        phi = np.array(canonical_from_jet(jet))
    code[(code == OK) & ~np.all(np.isfinite(phi), axis=0)] = NONFINITE
    return phi, code


def _cumtrapz(f, h, start, axis):
    """Signed cumulative trapezoid integral from index ``start`` along ``axis``."""
    f = np.moveaxis(f, axis, -1)
    out = np.zeros(f.shape, dtype=complex)
    seg = 0.5 * h * (f[..., 1:] + f[..., :-1])
    out[..., start + 1:] = np.cumsum(seg[..., start:], axis=-1)
    if start > 0:
        out[..., :start] = -np.cumsum(seg[..., :start][..., ::-1], axis=-1)[..., ::-1]
    return np.moveaxis(out, -1, axis)


def _reach(ok, start, axis):
    """True where every node between ``start`` and the node along ``axis`` is ok."""
    ok = np.moveaxis(ok, axis, -1)
    out = np.zeros(ok.shape, dtype=bool)
    out[..., start:] = np.logical_and.accumulate(ok[..., start:], axis=-1)
    out[..., :start + 1] = np.logical_and.accumulate(
        ok[..., :start + 1][..., ::-1], axis=-1)[..., ::-1]
    return np.moveaxis(out, -1, axis)


def _first_blocked(code, i0, j0, horizontal_first):
    """First singular node met when walking the staircases outward."""
    nx, ny = code.shape
    if horizontal_first:
        legs = [((i, j0) for i in sorted(range(nx), key=lambda i: abs(i - i0))),
                ((i, j) for j in sorted(range(ny), key=lambda j: abs(j - j0))
                 for i in range(nx))]
    else:
        legs = [((i0, j) for j in sorted(range(ny), key=lambda j: abs(j - j0))),
                ((i, j) for i in sorted(range(nx), key=lambda i: abs(i - i0))
                 for j in range(ny))]
    for leg in legs:
        for ij in leg:
            if code[ij] != OK:
                return ij
    return None


def _integrate(phi, code, grid, i0, j0, horizontal_first):
    h = grid.h
    ok = code == OK
    f = np.where(ok, phi, 0)
    if horizontal_first:
        base = _cumtrapz(f[:, :, j0], h, i0, axis=1)            # (3, nx)
        rest = 1j * _cumtrapz(f, h, j0, axis=2)                 # (3, nx, ny)
        total = base[:, :, None] + rest
        reach = _reach(ok[:, j0], i0, 0)[:, None] & _reach(ok, j0, 1)
    else:
        base = 1j * _cumtrapz(f[:, i0, :], h, j0, axis=1)       # (3, ny)
        rest = _cumtrapz(f, h, i0, axis=1)
        total = base[:, None, :] + rest
        reach = _reach(ok[i0, :], j0, 0)[None, :] & _reach(ok, i0, 0)
    pts = np.moveaxis(total.real, 0, -1)
    pts[~reach] = np.nan
    return pts, reach


def integrate_patch(w: HoloFn, grid: GridSpec, basepoint: complex = 0j,
                    horizontal_first: bool = True, strict: bool = True) -> SurfacePatch:
    """Integrate the canonical representation of ``w`` over ``grid``.

    Each node is reached from ``basepoint`` (which must be a node) by a
    horizontal then a vertical leg, or the reverse.  With ``strict`` a
    singular node anywhere on a path raises :class:`SingularPathError`;
    otherwise unreachable nodes are masked.
    """
    i0, j0 = grid.index_of(basepoint)
    phi, code = coordinate_derivatives(w, grid)
    if strict:
        blocked = _first_blocked(code, i0, j0, horizontal_first)
        if blocked is not None:
            raise SingularPathError(grid.node(*blocked), blocked,
                                    KIND_NAMES.get(int(code[blocked]), "singular"))
    pts, reach = _integrate(phi, code, grid, i0, j0, horizontal_first)
    return SurfacePatch(grid, pts, reach)


def path_independence_check(w: HoloFn, grid: GridSpec, basepoint: complex = 0j) -> float:
    """Largest distance between the horizontal-first and vertical-first patches."""
    a = integrate_patch(w, grid, basepoint, horizontal_first=True)
    b = integrate_patch(w, grid, basepoint, horizontal_first=False)
    both = a.mask & b.mask
    return float(np.max(np.linalg.norm(a.points[both] - b.points[both], axis=-1)))


def _tangents(patch):
    P, m, h = patch.points, patch.mask, patch.grid.h
    nx, ny = m.shape
    if nx < 3 or ny < 3:
        raise EmptyFieldError("patch has no interior nodes")
    c = (slice(1, -1), slice(1, -1))
    ok = (m[c] & m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2])
    if not ok.any():
        raise EmptyFieldError("no interior node with a valid stencil")
    xu = (P[2:, 1:-1] - P[:-2, 1:-1]) / (2 * h)
    xv = (P[1:-1, 2:] - P[1:-1, :-2]) / (2 * h)
    return xu[ok], xv[ok]


def conformality_residual(patch: SurfacePatch) -> tuple[float, float]:
    """Normalised ``max | |x_u|^2 - |x_v|^2 |`` and ``max |x_u . x_v|``."""
    xu, xv = _tangents(patch)
    E = np.einsum("ij,ij->i", xu, xu)
    G = np.einsum("ij,ij->i", xv, xv)
    F = np.einsum("ij,ij->i", xu, xv)
    scale = E.max()
    return float(np.abs(E - G).max() / scale), float(np.abs(F).max() / scale)


def harmonicity_residual(patch: SurfacePatch) -> float:
    """Max five-point Laplacian of the coordinates over the bounding-box diagonal."""
    P, m, h = patch.points, patch.mask, patch.grid.h
    worst = 0.0
    found = False
    for k in range(3):
        lap, ok = _stencil(P[..., k], m, h)
        if ok.any():
            found = True
            worst = max(worst, float(np.abs(lap[ok]).max()))
    if not found:
        raise EmptyFieldError("no interior node with a valid stencil")
    pts = P[m]
    diameter = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    return worst / diameter


def _fmt(x):
    return format(float(x), ".17g")


def export_mesh(patch: SurfacePatch, format: str = "obj") -> bytes:
    """Triangle mesh of the valid nodes as ASCII OBJ or PLY.

    Vertices follow row-major node order; each grid cell whose four corners
    are valid becomes two triangles.
    """
    if format not in ("obj", "ply"):
        raise ValueError(f"unknown mesh format {format!r}")
    m = patch.mask
    if m.shape[0] < 2 or m.shape[1] < 2 or not m.any():
        raise EmptyMeshError(f"need a grid of at least 2x2 valid nodes, got {m.shape}")
    index = np.full(m.shape, -1, dtype=np.int64)
    index[m] = np.arange(int(m.sum()))
    verts = patch.points[m]
    a, b = index[:-1, :-1], index[1:, :-1]
    c, d = index[1:, 1:], index[:-1, 1:]
    quad = m[:-1, :-1] & m[1:, :-1] & m[1:, 1:] & m[:-1, 1:]
    a, b, c, d = a[quad], b[quad], c[quad], d[quad]
    faces = np.empty((2 * a.size, 3), dtype=np.int64)
    faces[0::2] = np.stack([a, b, c], axis=1)
    faces[1::2] = np.stack([a, c, d], axis=1)

    out = io.StringIO(newline="\n")
    if format == "obj":
        for x, y, z in verts:
            out.write(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
        for f in faces + 1:
            out.write(f"f {f[0]} {f[1]} {f[2]}\n")
    else:
        out.write("ply\nformat ascii 1.0\n")
        out.write(f"element vertex {len(verts)}\n")
        out.write("property double x\nproperty double y\nproperty double z\n")
        out.write(f"element face {len(faces)}\n")
        out.write("property list uchar int vertex_indices\nend_header\n")
        for x, y, z in verts:
            out.write(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
        for f in faces:
            out.write(f"3 {f[0]} {f[1]} {f[2]}\n")
    return out.getvalue().encode("ascii")


def write_mesh(patch: SurfacePatch, path, format: str = "obj") -> int:
    """Write :func:`export_mesh` output to ``path``; returns the byte count."""
    data = export_mesh(patch, format)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)
