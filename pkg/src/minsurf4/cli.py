"""Command line front end.

Subcommands ``liouville``, ``verify``, ``curvature``, ``gauge`` and ``mesh``.
Reports are JSON documents written to ``--out`` (``-`` for stdout).

Exit codes: 0 pass, 1 criteria failed, 2 parse/usage error, 3 empty field,
4 normalization error, 5 singular integration path.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from . import geometry as geo
from . import numerics as num
from . import surface as surf
from .expr import OK, ExprError, HoloFn

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_EMPTY, EXIT_NORM, EXIT_PATH = range(6)

ORDER_RANGE = (1.8, 2.2)
DEFAULT_TOL = {"liouville": 5e-3, "verify": 5e-3, "gauge": 1e-9, "mesh": 5e-3}
IDENTITY_TOL = 1e-12
PATH_TOL = 1e-3
HARMONIC_TOL = 1e-3
MIN_NODES = {"liouville": 5, "verify": 5, "gauge": 5, "mesh": 2, "curvature": 1}

_GRID = ("domain", "n", "exclude", "out")
FIELDS = {
    "liouville": ("command", "w") + _GRID + ("tol",),
    "verify": ("command", "w1", "w2", "form") + _GRID + ("tol",),
    "curvature": ("command", "w1", "w2") + _GRID,
    "gauge": ("command", "w", "w1", "w2", "a", "b", "a1", "b1", "a2", "b2",
              "renormalize") + _GRID + ("tol",),
    "mesh": ("command", "w", "basepoint", "format", "report") + _GRID + ("tol",),
}

_VALUE_FLAGS = {"--w", "--w1", "--w2", "--domain", "--n", "--tol", "--a", "--b",
                "--a1", "--b1", "--a2", "--b2", "--form", "--basepoint", "--out",
                "--format", "--exclude", "--report"}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    w: Optional[str] = None
    w1: Optional[str] = None
    w2: Optional[str] = None
    domain: tuple = (-1.0, 1.0, -1.0, 1.0)
    n: int = 101
    tol: Optional[float] = None
    a: Optional[str] = None
    b: Optional[str] = None
    a1: Optional[str] = None
    b1: Optional[str] = None
    a2: Optional[str] = None
    b2: Optional[str] = None
    renormalize: bool = False
    form: str = "eq2"
    basepoint: Optional[str] = None
    out: str = "-"
    format: Optional[str] = None
    exclude: float = 0.0
    report: Optional[str] = None
    generators: dict = field(default_factory=dict, repr=False)

    def validate(self):
        if self.n < MIN_NODES[self.command]:
            raise UsageError(f"--n must be at least {MIN_NODES[self.command]} "
                             f"for {self.command}, got {self.n}")
        x0, x1, y0, y1 = self.domain
        if self.n > 1 and not (x1 > x0 and y1 >= y0):
            raise UsageError(f"degenerate --domain {self.domain}")
        if self.tol is None:
            self.tol = DEFAULT_TOL.get(self.command)
        single = self.command in ("liouville", "mesh")
        pair = self.command in ("verify", "curvature")
        if single and not self.w:
            raise UsageError(f"{self.command} needs --w")
        if pair and not (self.w1 and self.w2):
            raise UsageError(f"{self.command} needs --w1 and --w2")
        if self.command == "gauge" and not (self.w or (self.w1 and self.w2)):
            raise UsageError("gauge needs --w or both --w1 and --w2")
        for name in ("w", "w1", "w2"):
            text = getattr(self, name)
            if text is not None:
                try:
                    self.generators[name] = HoloFn.parse(text)
                except ExprError as exc:
                    raise UsageError(_locate(f"--{name}", text, exc)) from None

    def grid(self) -> num.GridSpec:
        x0, x1, y0, y1 = self.domain
        try:
            return num.GridSpec.square(x0, x1, y0, y1, self.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def payload(self) -> dict:
        d = asdict(self)
        d["domain"] = list(self.domain)
        return {k: d[k] for k in FIELDS[self.command] if d[k] is not None}


def _locate(flag, text, exc: ExprError) -> str:
    pad = len(text.encode("utf-8")[:exc.offset].decode("utf-8", "replace"))
    return f"{flag}: {exc}\n  {text}\n  {' ' * pad}^"


def _complex(text, flag) -> complex:
    try:
        parts = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag}: expected 're,im', got {text!r}") from None
    if len(parts) == 1:
        parts.append(0.0)
    if len(parts) != 2:
        raise UsageError(f"{flag}: expected 're,im', got {text!r}")
    return complex(*parts)


def _domain(text):
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected x0,x1,y0,y1, got {text!r}")
    return vals


def _order_dict(o: num.ConvergenceOrder) -> dict:
    return {"order": o.order if np.isfinite(o.order) else None,
            "below_floor": o.below_floor}


def _document(cfg, reports, passed, **extra) -> dict:
    doc = {"command": cfg.command, "config": cfg.payload(),
           "reports": [r.to_dict() for r in reports]}
    doc.update(extra)
    doc["pass"] = bool(passed)
    doc["meta"] = {"version": __version__,
                   "timestamp": datetime.now(timezone.utc).isoformat()}
    return doc


def _emit(text: str, path: Optional[str], stdout):
    if path is None:
        return
    if path == "-":
        stdout.write(text)
        stdout.flush()
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _paired(run, grid):
    """Run ``run(grid)`` at h and h/2 and pair reports with their orders."""
    coarse, fine = run(grid), run(grid.refined())
    orders = {}
    for a, b in zip(coarse, fine):
        orders[a.equation] = num.convergence_order(a, b)
    return list(coarse) + list(fine), coarse, orders


def _suite_pass(coarse, orders, tol):
    return all(orders[r.equation].within(*ORDER_RANGE) and
               (orders[r.equation].below_floor or r.max_rel <= tol) for r in coarse)


# --------------------------------------------------------------------------
# subcommands

def cmd_liouville(cfg: RunConfig, stdout) -> int:
    w = cfg.generators["w"]
    grid = cfg.grid()
    reports, coarse, orders = _paired(
        lambda g: [num.residual_liouville(w, g, cfg.exclude)], grid)
    _, code = num.generator_jets(w, grid, cfg.exclude)
    passed = _suite_pass(coarse, orders, cfg.tol)
    doc = _document(cfg, reports, passed,
                    orders={k: _order_dict(v) for k, v in orders.items()},
                    checks={"masked": num.mask_counts(code)})
    _emit(_json(doc), cfg.out, stdout)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_verify(cfg: RunConfig, stdout) -> int:
    w1, w2 = cfg.generators["w1"], cfg.generators["w2"]
    grid = cfg.grid()
    form = "eq2" if cfg.form == "chain" else cfg.form
    defects, kappa_zero, masked = [], True, {}

    def run(g):
        f = num.system_fields(w1, w2, g, cfg.exclude)
        nonlocal kappa_zero
        defects.append(num.identity_defect(f))
        m = f.mask
        kappa_zero &= bool(np.abs(f.kappa[m]).max() <= 1e-12 * np.abs(f.K[m]).max())
        if not masked:
            masked.update(w1=num.mask_counts(f.code1), w2=num.mask_counts(f.code2))
        out = list(num.residual_system(w1, w2, g, form, fields=f))
        if cfg.form == "chain":
            out += num.residual_chain(w1, w2, g, fields=f)
        return out

    reports, coarse, orders = _paired(run, grid)
    identity = max(defects)
    passed = _suite_pass(coarse, orders, cfg.tol) and identity <= IDENTITY_TOL
    doc = _document(cfg, reports, passed,
                    orders={k: _order_dict(v) for k, v in orders.items()},
                    checks={"identity_defect": identity,
                            "identity_pass": identity <= IDENTITY_TOL,
                            "kappa_identically_zero": kappa_zero,
                            "masked": masked})
    _emit(_json(doc), cfg.out, stdout)
    return EXIT_PASS if passed else EXIT_FAIL


def _cell(v) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def cmd_curvature(cfg: RunConfig, stdout) -> int:
    w1, w2 = cfg.generators["w1"], cfg.generators["w2"]
    grid = cfg.grid()
    j1, c1 = num.generator_jets(w1, grid, cfg.exclude)
    j2, c2 = num.generator_jets(w2, grid, cfg.exclude)
    with np.errstate(all="ignore"):
        K, kappa = geo.curvatures_from_jets(j1, j2)
        p, q = geo.density_from_jet(j1), geo.density_from_jet(j2)
    valid = (c1 == OK) & (c2 == OK)
    Z = grid.nodes()
    lines = ["x,y,K,kappa,p,q,valid"]
    for idx in np.ndindex(*grid.shape):
        x, y = _cell(Z[idx].real), _cell(Z[idx].imag)
        if valid[idx]:
            vals = ",".join(_cell(a[idx]) for a in (K, kappa, p, q))
            lines.append(f"{x},{y},{vals},1")
        else:
            lines.append(f"{x},{y},,,,,0")
    _emit("\n".join(lines) + "\n", cfg.out, stdout)
    if not valid.any():
        print(f"error: every one of the {valid.size} nodes is singular "
              f"(w1: {num.mask_counts(c1)}, w2: {num.mask_counts(c2)})", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_PASS


def _params(cfg, a, b) -> geo.MoebiusParams:
    a = _complex(a if a is not None else "1,0", "--a")
    b = _complex(b if b is not None else "0,0", "--b")
    return geo.MoebiusParams(a, b).resolve(cfg.renormalize)


def cmd_gauge(cfg: RunConfig, stdout) -> int:
    grid = cfg.grid()
    Z = grid.nodes()
    if "w" in cfg.generators:
        w = cfg.generators["w"]
        m = _params(cfg, cfg.a, cfg.b)
        wh = geo.moebius(w, m)
        j, c = w.jet_array(Z)
        jh, ch = wh.jet_array(Z)
        ok = (c == OK) & (ch == OK) & (j.deriv != 0) & (jh.deriv != 0)
        with np.errstate(all="ignore"):
            nu, nuh = geo.density_from_jet(j), geo.density_from_jet(jh)
            dev = np.abs(nuh - nu) / nu
        transformed = {"w": wh.source}
    else:
        w1, w2 = cfg.generators["w1"], cfg.generators["w2"]
        m1 = _params(cfg, cfg.a1 or cfg.a, cfg.b1 or cfg.b)
        m2 = _params(cfg, cfg.a2 or cfg.a, cfg.b2 or cfg.b)
        h1, h2 = geo.moebius(w1, m1), geo.moebius(w2, m2)
        jets = [f.jet_array(Z) for f in (w1, w2, h1, h2)]
        ok = np.logical_and.reduce([(c == OK) & (j.deriv != 0) for j, c in jets])
        with np.errstate(all="ignore"):
            K, kap = geo.curvatures_from_jets(jets[0][0], jets[1][0])
            Kh, kaph = geo.curvatures_from_jets(jets[2][0], jets[3][0])
            dev = np.maximum(np.abs(Kh - K), np.abs(kaph - kap)) / np.abs(K)
        transformed = {"w1": h1.source, "w2": h2.source}
    ok &= np.isfinite(dev)
    if not ok.any():
        raise num.EmptyFieldError("no node where both generators are regular")
    deviation = float(dev[ok].max())
    passed = deviation <= cfg.tol
    doc = _document(cfg, [], passed,
                    checks={"max_rel_deviation": deviation, "n_valid": int(ok.sum()),
                            "transformed": transformed})
    _emit(_json(doc), cfg.out, stdout)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_mesh(cfg: RunConfig, stdout) -> int:
    w = cfg.generators["w"]
    grid = cfg.grid()
    if cfg.basepoint is not None:
        base = _complex(cfg.basepoint, "--basepoint")
    else:
        x0, x1, y0, y1 = cfg.domain
        i = int(np.argmin(np.abs(grid.xs() - (x0 + x1) / 2)))
        j = int(np.argmin(np.abs(grid.ys() - (y0 + y1) / 2)))
        base = grid.node(i, j)
    try:
        grid.index_of(base)
    except ValueError as exc:
        raise UsageError(f"--basepoint: {exc}") from None
    fmt = cfg.format or ("ply" if cfg.out.endswith(".ply") else "obj")
    if fmt not in ("obj", "ply"):
        raise UsageError(f"--format must be obj or ply, got {fmt!r}")
    patch = surf.integrate_patch(w, grid, base)
    path_dev = surf.path_independence_check(w, grid, base)
    try:
        conf = surf.conformality_residual(patch)
        harm = surf.harmonicity_residual(patch)
    except num.EmptyFieldError:
        conf, harm = None, None
    data = surf.export_mesh(patch, fmt)
    if cfg.out == "-":
        stdout.buffer.write(data) if hasattr(stdout, "buffer") else stdout.write(data.decode())
        stdout.flush()
    else:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
    n_faces = 2 * int((patch.mask[:-1, :-1] & patch.mask[1:, :-1]
                       & patch.mask[1:, 1:] & patch.mask[:-1, 1:]).sum())
    passed = path_dev <= PATH_TOL
    if conf is not None:
        passed = passed and max(conf) <= cfg.tol and harm <= HARMONIC_TOL
    checks = {"basepoint": [base.real, base.imag], "format": fmt,
              "vertices": int(patch.mask.sum()), "triangles": n_faces,
              "path_independence": path_dev,
              "conformality": list(conf) if conf is not None else None,
              "harmonicity": harm}
    doc = _document(cfg, [], passed, checks=checks)
    report_path = cfg.report if cfg.report is not None else (None if cfg.out == "-" else "-")
    _emit(_json(doc), report_path, stdout)
    return EXIT_PASS if passed else EXIT_FAIL


COMMANDS = {"liouville": cmd_liouville, "verify": cmd_verify, "curvature": cmd_curvature,
            "gauge": cmd_gauge, "mesh": cmd_mesh}


# --------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minsurf4",
        description="Curvature fields of minimal surfaces in R^4 from holomorphic generators.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--domain", type=_domain, default=(-1.0, 1.0, -1.0, 1.0),
                       help="x0,x1,y0,y1 (default -1,1,-1,1)")
        p.add_argument("--n", type=int, default=101, help="nodes along x (default 101)")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--exclude", type=float, default=0.0,
                       help="mask nodes closer than this to a critical point of a generator")
        return p

    p = common(sub.add_parser("liouville", help="check the density equation for one generator"))
    p.add_argument("--w", required=True)
    p.add_argument("--tol", type=float)

    p = common(sub.add_parser("verify", help="check the natural system for a generator pair"))
    p.add_argument("--w1", required=True)
    p.add_argument("--w2", required=True)
    p.add_argument("--form", choices=("eq1", "eq2", "chain"), default="eq2")
    p.add_argument("--tol", type=float)

    p = common(sub.add_parser("curvature", help="CSV of K, kappa, p, q on the grid"))
    p.add_argument("--w1", required=True)
    p.add_argument("--w2", required=True)

    p = common(sub.add_parser("gauge", help="compare generators before and after a gauge map"))
    p.add_argument("--w")
    p.add_argument("--w1")
    p.add_argument("--w2")
    for flag in ("--a", "--b", "--a1", "--b1", "--a2", "--b2"):
        p.add_argument(flag, help="complex number 're,im'")
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--tol", type=float)

    p = common(sub.add_parser("mesh", help="integrate and export a surface patch"))
    p.add_argument("--w", required=True)
    p.add_argument("--basepoint", help="grid node 're,im' (default: centre node)")
    p.add_argument("--format", choices=("obj", "ply"))
    p.add_argument("--report", help="where to write the JSON report")
    p.add_argument("--tol", type=float)
    return parser


def _join_values(argv):
    """Glue flag values that start with '-' (``--domain -1,1,-1,1``) to their flag."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in _VALUE_FLAGS and k + 1 < len(argv):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(_join_values(list(argv)))
    cfg = RunConfig(**{k: v for k, v in vars(args).items()})
    cfg.validate()
    return cfg


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[cfg.command](cfg, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except num.EmptyFieldError as exc:
        print(f"error: empty field: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except geo.NormalizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NORM
    except surf.SingularPathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PATH


if __name__ == "__main__":
    sys.exit(main())
