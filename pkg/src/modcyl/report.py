"""Kernel tables, deterministic CSV/JSON writers and SVG rendering.

Every table has the columns (a, b, x, y, part, re, im).  Distributional
parts are stored as coefficients on their support: ``delta`` rows sit at
``y = y*(x)`` (the diagonal for G and H, the flow trajectory for K),
``mirror`` rows at the anti-local point, ``delta_prime`` rows carry the
coefficient of ``delta'(x - y)`` on the diagonal, and ``pv``/``smooth`` rows
are pointwise kernel values off their singular locus.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correlators import SIGNS, two_point_kernel
from .distributions import InvSinDiff, SingularKernel1D
from .geometry import Geometry, jacobian, omega, position
from .modular import flow_kernel, hamiltonian_kernel
from .states import StateParams

__all__ = [
    "COLUMNS",
    "PARTS",
    "SCHEMA_VERSION",
    "KernelTable",
    "atomic_write",
    "flow_table",
    "hamiltonian_table",
    "midpoint_grid",
    "read_table",
    "render_svg",
    "table_to_csv",
    "table_to_json",
    "two_point_table",
]

SCHEMA_VERSION = 1
COLUMNS = ("a", "b", "x", "y", "part", "re", "im")
PARTS = ("smooth", "pv", "delta", "delta_prime", "mirror")


@dataclass(frozen=True)
class KernelTable:
    """Rows of one kernel; ``name`` identifies it (two_point, hamiltonian, flow_t=...)."""

    name: str
    rows: list
    meta: dict

    def parts(self) -> set:
        return {r[4] for r in self.rows}

    def select(self, part: str) -> list:
        return [r for r in self.rows if r[4] == part]


def midpoint_grid(geo: Geometry, N: int) -> np.ndarray:
    """Midpoint nodes (j + 1/2) dx - ell, dx = 2 ell / N."""
    dx = 2 * geo.ell / N
    return -geo.ell + (np.arange(N) + 0.5) * dx


def _emit(rows: list, a: int, b: int, x, y, part: str, val) -> None:
    x, y, val = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(val, complex))
    for xi, yi, vi in zip(x.ravel(), y.ravel(), val.ravel()):
        if np.isfinite(vi):
            rows.append((a, b, float(xi), float(yi), part, float(vi.real), float(vi.imag)))


def _entry_rows(rows: list, a: int, b: int, k: SingularKernel1D, x: np.ndarray, geo: Geometry) -> None:
    u = omega(1, x, geo)
    U, V = np.meshgrid(u, u, indexing="ij")
    X, Y = np.meshgrid(x, x, indexing="ij")
    if k.smooth is not None:
        _emit(rows, a, b, X, Y, "smooth", np.broadcast_to(k.smooth(U, V), U.shape))
    if k.pv is not None:
        sing = k.pv.singularity
        if isinstance(sing, InvSinDiff):
            arg = np.sin(np.pi * (X - Y) / geo.L)
        else:
            sa = SIGNS[sing.a - 1]
            sb = SIGNS[sing.b - 1]
            arg = np.sinh(sing.scale * (sing.shift - sa * U + sb * V))
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(np.abs(arg) > 1e-12, k.pv.prefactor(U, V) / arg, np.nan)
        _emit(rows, a, b, X, Y, "pv", val)
    if k.delta_diag is not None:
        _emit(rows, a, b, x, x, "delta", np.broadcast_to(k.delta_diag(u), u.shape))
    if k.delta_prime is not None:
        _emit(rows, a, b, x, x, "delta_prime", k.delta_prime.value(u))
    if k.delta_mirror is not None:
        _emit(rows, a, b, x, -x, "mirror", np.broadcast_to(k.delta_mirror(u), u.shape))


def _finish(name: str, rows: list, meta: dict) -> KernelTable:
    rows.sort(key=lambda r: (r[0], r[1], PARTS.index(r[4]), r[2], r[3]))
    return KernelTable(name, rows, meta)


def two_point_table(state: StateParams, geo: Geometry, N: int) -> KernelTable:
    x = midpoint_grid(geo, N)
    rows: list = []
    for (a, b), k in two_point_kernel(state, geo).entries.items():
        _entry_rows(rows, a, b, k, x, geo)
    return _finish("two_point", rows, {})


def hamiltonian_table(state: StateParams, geo: Geometry, N: int) -> KernelTable:
    x = midpoint_grid(geo, N)
    rows: list = []
    for (a, b), k in hamiltonian_kernel(state, geo).entries.items():
        _entry_rows(rows, a, b, k, x, geo)
    return _finish("hamiltonian", rows, {})


def flow_table(t: float, state: StateParams, geo: Geometry, N: int) -> KernelTable:
    x = midpoint_grid(geo, N)
    u = omega(1, x, geo)
    k = flow_kernel(t, state, geo)
    rows: list = []
    for a, s in zip((1, 2), SIGNS):
        vs = u - s * 2 * np.pi * t
        w = np.sqrt(jacobian(vs, geo) / jacobian(u, geo))
        if k.cos_factor:
            w = w * np.cos(np.pi / geo.L * (x - position(vs, geo)))
        _emit(rows, a, a, x, position(vs, geo), "delta", w)
    if k.delta_matrix is not None:
        pref = 1j * np.pi / geo.L * math.sinh(np.pi * t)
        for a, sa in zip((1, 2), SIGNS):
            for b, sb in zip((1, 2), SIGNS):
                m = k.delta_matrix[a - 1, b - 1]
                if m == 0:
                    continue
                vs = sb * (sa * u - 2 * np.pi * t)
                _emit(rows, a, b, x, position(vs, geo), "delta" if a == b else "mirror", pref * m * jacobian(vs, geo))
    for (a, b), ent in k.nonlocal_entries.items():
        _entry_rows(rows, a, b, ent, x, geo)
    return _finish(f"flow_t{float(t)!r}", rows, {"t": float(t)})


# --------------------------------------------------------------------------
# writers


def atomic_write(path: Path, data: bytes) -> None:
    """Write via a temporary file in the same directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        # mkstemp creates 0600; give the final file the usual umask-derived mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_to_csv(table: KernelTable) -> bytes:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(COLUMNS)
    for a, b, x, y, part, re, im in table.rows:
        wr.writerow((a, b, repr(x), repr(y), part, repr(re), repr(im)))
    return buf.getvalue().encode()


def table_to_json(table: KernelTable, extra: dict | None = None) -> bytes:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "kernel", "name": table.name, "meta": table.meta,
           "columns": list(COLUMNS), "rows": [dict(zip(COLUMNS, r)) for r in table.rows]}
    if extra:
        doc.update(extra)
    return (json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n").encode()


def read_table(path: Path) -> tuple[str, dict]:
    """Load a CSV/JSON file written by this package; returns (kind, document).

    Kernel and spectrum CSV files are recognized by their header and parts.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"{path}: unsupported or missing schema_version")
        kind = doc.get("kind")
        if kind not in ("kernel", "spectrum", "verify"):
            raise ValueError(f"{path}: unknown document kind {kind!r}")
        return kind, doc
    if path.suffix != ".csv":
        raise ValueError(f"{path}: expected a .csv or .json file")
    rd = csv.reader(io.StringIO(text))
    header = next(rd, None)
    if header is None or tuple(header) != COLUMNS:
        raise ValueError(f"{path}: header must be {','.join(COLUMNS)}")
    rows = []
    for n, r in enumerate(rd, start=2):
        if len(r) != len(COLUMNS):
            raise ValueError(f"{path}:{n}: expected {len(COLUMNS)} fields")
        rows.append({"a": int(r[0]), "b": int(r[1]), "x": float(r[2]), "y": float(r[3]), "part": r[4],
                     "re": float(r[5]), "im": float(r[6])})
    parts = {r["part"] for r in rows}
    kind = "spectrum" if parts and parts <= {"matrix", "analytic"} else "kernel"
    if kind == "kernel" and not parts <= set(PARTS):
        raise ValueError(f"{path}: unknown part tags {sorted(parts - set(PARTS))}")
    return kind, {"name": path.stem, "rows": rows}


# --------------------------------------------------------------------------
# SVG


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "modcyl"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def _svg_bytes(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "modcyl"})
    _figure().close(fig)
    return buf.getvalue()


def _kernel_svg(doc: dict) -> bytes:
    plt = _figure()
    rows = doc["rows"]
    blocks = sorted({(r["a"], r["b"]) for r in rows})
    fig, axes = plt.subplots(1, len(blocks), figsize=(4 * len(blocks), 3.8), squeeze=False)
    for ax, (a, b) in zip(axes[0], blocks):
        sub = [r for r in rows if (r["a"], r["b"]) == (a, b)]
        dense = [r for r in sub if r["part"] in ("pv", "smooth")]
        if dense:
            xs = np.array(sorted({r["x"] for r in dense}))
            grid = np.zeros((xs.size, xs.size))
            idx = {v: i for i, v in enumerate(xs)}
            for r in dense:
                j = idx.get(r["y"])
                if j is not None:
                    grid[idx[r["x"]], j] += math.hypot(r["re"], r["im"])
            lo, hi = float(xs[0]), float(xs[-1])
            im = ax.imshow(np.log10(grid + 1e-16), origin="lower", extent=(lo, hi, lo, hi), cmap="viridis",
                           aspect="auto", interpolation="nearest")
            fig.colorbar(im, ax=ax, label="log10 |K| (pv + smooth)")
        for part, style in (("delta", "-"), ("mirror", "--"), ("delta_prime", ":")):
            pts = [r for r in sub if r["part"] == part]
            if pts:
                pts.sort(key=lambda r: r["x"])
                ax.plot([r["y"] for r in pts], [r["x"] for r in pts], style, color="crimson", lw=1.2, label=part)
        if any(r["part"] in ("delta", "mirror", "delta_prime") for r in sub):
            ax.legend(loc="upper left", fontsize=7)
        ax.set_title(f"{doc.get('name', '')} ({a},{b})")
        ax.set_xlabel("y")
        ax.set_ylabel("x")
    fig.tight_layout()
    return _svg_bytes(fig)


def _spectrum_svg(doc: dict) -> bytes:
    plt = _figure()
    rows = doc["rows"]
    fig, ax = plt.subplots(figsize=(6, 3.8))
    for part, style in (("analytic", "-"), ("matrix", "o")):
        pts = sorted((r for r in rows if r["part"] == part), key=lambda r: r["x"])
        if pts:
            ax.plot([0.5 * (r["x"] + r["y"]) for r in pts], [r["re"] for r in pts], style, ms=3, label=part)
    ax.set_xlabel("mu")
    ax.set_ylabel("Re density of <g, dE f>")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _svg_bytes(fig)


def _verify_svg(doc: dict) -> bytes:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    drawn = False
    for crit in doc.get("criteria", []):
        for key, rep in sorted(crit.get("details", {}).items()):
            if not (isinstance(rep, dict) and "N" in rep and "error" in rep):
                continue
            Ns, errs = np.array(rep["N"], float), np.array(rep["error"], float)
            order = rep.get("order")
            label = f"{key}: order {order:.2f}" if order is not None else f"{key}: at noise floor"
            ax.loglog(Ns, errs, "o-", ms=3, lw=1, label=label)
            drawn = True
    if not drawn:
        ax.text(0.5, 0.5, "no convergence data", ha="center", va="center", transform=ax.transAxes)
    else:
        ax.legend(fontsize=6, ncol=2)
    ax.set_xlabel("N")
    ax.set_ylabel("relative L2 error")
    fig.tight_layout()
    return _svg_bytes(fig)


def render_svg(kind: str, doc: dict) -> bytes:
    if kind == "kernel":
        return _kernel_svg(doc)
    if kind == "spectrum":
        return _spectrum_svg(doc)
    if kind == "verify":
        return _verify_svg(doc)
    raise ValueError(f"cannot plot documents of kind {kind!r}")
