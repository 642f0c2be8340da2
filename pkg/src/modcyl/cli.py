"""Command-line front end: ``modcyl {kernel,verify,spectrum,plot}``.

Configuration comes from an optional TOML file whose sections mirror
:class:`RunConfig`; command-line flags override it.  Everything is
validated before any output is written.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import Geometry, GeometryError
from .states import InvalidStateError, StateConstraintError, StateParams, preset

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "load_config", "main"]

log = logging.getLogger("modcyl")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3
FORMATS = ("csv", "json", "svg")
DEFAULT_FORMATS = {"kernel": ("csv", "json"), "spectrum": ("csv", "json"), "verify": ("json",)}

_SCHEMA = {
    "geometry": {"L", "ell"},
    "state": {"preset", "bc", "h1", "h2", "psi", "phi"},
    "grid": {"N", "probe", "seed"},
    "output": {"directory", "formats"},
}
_TOP = set(_SCHEMA) | {"times"}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key (dotted path)."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    geometry: Geometry = field(default_factory=lambda: Geometry(4.0, 1.0))
    state: StateParams = field(default_factory=StateParams.ns)
    state_label: str = "ns-vacuum"
    N: int = 256
    probe: str = "modular-gaussian"
    seed: int = 0
    times: tuple = (0.1, 0.4, 1.0)
    directory: Path = Path("modcyl-out")
    formats: tuple | None = None

    def to_dict(self) -> dict:
        return {"geometry": {"L": self.geometry.L, "ell": self.geometry.ell}, "state": self.state.to_dict(),
                "state_label": self.state_label, "grid": {"N": self.N, "probe": self.probe, "seed": self.seed},
                "times": list(self.times)}


# --------------------------------------------------------------------------
# validation helpers


def _number(where: str, v, *, integer: bool = False) -> float | int:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(where, f"expected a number, got {type(v).__name__}")
    if integer:
        if not isinstance(v, int):
            raise ConfigError(where, f"expected an integer, got {v!r}")
        return v
    if not math.isfinite(v):
        raise ConfigError(where, f"must be finite, got {v!r}")
    return float(v)


def _string(where: str, v) -> str:
    if not isinstance(v, str):
        raise ConfigError(where, f"expected a string, got {type(v).__name__}")
    return v


def _check_N(where: str, N: int) -> int:
    if N < 16 or N % 2:
        raise ConfigError(where, f"must be an even integer >= 16, got {N}")
    return N


def _check_times(where: str, ts) -> tuple:
    if not isinstance(ts, (list, tuple)) or not ts:
        raise ConfigError(where, "expected a non-empty list of numbers")
    return tuple(_number(f"{where}[{i}]", t) for i, t in enumerate(ts))


def _check_formats(where: str, fs) -> tuple:
    if not isinstance(fs, (list, tuple)) or not fs:
        raise ConfigError(where, "expected a non-empty list drawn from csv, json, svg")
    out = []
    for i, f in enumerate(fs):
        f = _string(f"{where}[{i}]", f).strip().lower()
        if f not in FORMATS:
            raise ConfigError(f"{where}[{i}]", f"unknown format {f!r}; choose from {', '.join(FORMATS)}")
        if f not in out:
            out.append(f)
    return tuple(out)


def _build_geometry(raw: dict) -> Geometry:
    L = _number("geometry.L", raw.get("L", 4.0))
    ell = _number("geometry.ell", raw.get("ell", 1.0))
    try:
        return Geometry(L, ell)
    except GeometryError as exc:
        key = "geometry.L" if "L must" in str(exc) else "geometry.ell"
        raise ConfigError(key, str(exc)) from None


def _build_state(raw: dict, geo: Geometry) -> tuple[StateParams, str]:
    if "preset" in raw:
        extra = sorted(set(raw) - {"preset"})
        if extra:
            raise ConfigError(f"state.{extra[0]}", "cannot be combined with state.preset")
        name = _string("state.preset", raw["preset"])
        try:
            return preset(name, geo).validate(geo), name.strip().lower()
        except (InvalidStateError, StateConstraintError) as exc:
            raise ConfigError("state.preset", str(exc)) from None
    bc = _string("state.bc", raw.get("bc", "NS")).strip().upper()
    if bc not in ("NS", "R"):
        raise ConfigError("state.bc", f"expected 'NS' or 'R', got {bc!r}")
    if bc == "NS":
        extra = sorted(set(raw) - {"bc"})
        if extra:
            raise ConfigError(f"state.{extra[0]}", "NS states take no zero-mode parameters")
        return StateParams.ns(), "NS"
    vals = {}
    for k in ("h1", "h2"):
        if k not in raw:
            raise ConfigError(f"state.{k}", "required for bc = 'R'")
        vals[k] = _number(f"state.{k}", raw[k])
    for k in ("psi", "phi"):
        vals[k] = _number(f"state.{k}", raw.get(k, 0.0))
    try:
        st = StateParams.ramond(**vals).validate(geo)
    except (InvalidStateError, StateConstraintError) as exc:
        msg = str(exc)
        key = next((k for k in ("h1", "h2", "psi", "phi") if msg.lstrip("|").startswith(k)), "bc")
        raise ConfigError(f"state.{key}", msg) from None
    return st, "R"


def load_config(raw: dict) -> RunConfig:
    """Validate a parsed TOML document; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a table")
    for k in sorted(raw):
        if k not in _TOP:
            raise ConfigError(k, f"unknown key; allowed: {', '.join(sorted(_TOP))}")
        if k in _SCHEMA:
            if not isinstance(raw[k], dict):
                raise ConfigError(k, "expected a table")
            for sub in sorted(raw[k]):
                if sub not in _SCHEMA[k]:
                    raise ConfigError(f"{k}.{sub}", f"unknown key; allowed: {', '.join(sorted(_SCHEMA[k]))}")
    geo = _build_geometry(raw.get("geometry", {}))
    state, label = _build_state(raw.get("state", {}), geo)
    grid = raw.get("grid", {})
    N = _check_N("grid.N", _number("grid.N", grid.get("N", 256), integer=True))
    probe = _string("grid.probe", grid.get("probe", "modular-gaussian")).strip().lower()
    if probe not in ("modular-gaussian", "standard"):
        raise ConfigError("grid.probe", f"unknown probe family {probe!r}; known: modular-gaussian, standard")
    seed = _number("grid.seed", grid.get("seed", 0), integer=True)
    times = _check_times("times", raw.get("times", [0.1, 0.4, 1.0]))
    out = raw.get("output", {})
    directory = Path(_string("output.directory", out.get("directory", "modcyl-out")))
    formats = _check_formats("output.formats", out["formats"]) if "formats" in out else None
    return RunConfig(geo, state, label, N, probe, seed, times, directory, formats)


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    upd = {}
    if getattr(args, "preset", None):
        try:
            upd["state"] = preset(args.preset, cfg.geometry).validate(cfg.geometry)
        except (InvalidStateError, StateConstraintError) as exc:
            raise ConfigError("--preset", str(exc)) from None
        upd["state_label"] = args.preset.strip().lower()
    if getattr(args, "N", None) is not None:
        upd["N"] = _check_N("--N", args.N)
    if getattr(args, "t", None):
        try:
            ts = [float(s) for s in args.t.split(",") if s.strip()]
        except ValueError:
            raise ConfigError("--t", f"expected a comma-separated list of numbers, got {args.t!r}") from None
        upd["times"] = _check_times("--t", ts)
    if getattr(args, "out", None):
        upd["directory"] = Path(args.out)
    if getattr(args, "format", None):
        upd["formats"] = _check_formats("--format", args.format.split(","))
    return replace(cfg, **upd)


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"malformed TOML: {exc}") from None


# --------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    return obj


def _dump_json(doc: dict) -> bytes:
    return (json.dumps(_jsonable(doc), indent=1, sort_keys=True, allow_nan=False) + "\n").encode()


def _prepare_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror or exc}") from None
    if not os.access(path, os.W_OK | os.X_OK):
        raise OSError(f"output directory {path} is not writable")


def _formats(cfg: RunConfig, verb: str) -> tuple:
    fs = cfg.formats or DEFAULT_FORMATS[verb]
    if verb == "verify" and "csv" in fs:
        raise ConfigError("--format", "verify reports are written as json or svg, not csv")
    return fs


# --------------------------------------------------------------------------
# verbs


def cmd_kernel(cfg: RunConfig) -> int:
    from . import report

    fs = _formats(cfg, "kernel")
    _prepare_dir(cfg.directory)
    tables = [report.two_point_table(cfg.state, cfg.geometry, cfg.N),
              report.hamiltonian_table(cfg.state, cfg.geometry, cfg.N)]
    tables += [report.flow_table(t, cfg.state, cfg.geometry, cfg.N) for t in cfg.times]
    meta = {"config": _jsonable(cfg.to_dict())}
    for tab in tables:
        doc_bytes = report.table_to_json(tab, meta)
        base = cfg.directory / tab.name
        if "csv" in fs:
            report.atomic_write(Path(f"{base}.csv"), report.table_to_csv(tab))
        if "json" in fs:
            report.atomic_write(Path(f"{base}.json"), doc_bytes)
        if "svg" in fs:
            report.atomic_write(Path(f"{base}.svg"), report.render_svg("kernel", json.loads(doc_bytes)))
        log.info("%s: %d rows (%s)", tab.name, len(tab.rows), ", ".join(sorted(tab.parts())) or "empty")
    return EXIT_OK


def _probes(cfg: RunConfig):
    from .probes import probe_family

    return probe_family(cfg.probe, cfg.geometry, cfg.seed)


def cmd_verify(cfg: RunConfig, desk_criteria: list | None) -> int:
    from . import report, verify

    fs = _formats(cfg, "verify")
    _prepare_dir(cfg.directory)
    if desk_criteria is not None:
        d = verify.desk(cfg.geometry.L, cfg.geometry.ell)
        results = verify.run_acceptance(desk_criteria or None, d)
        scope = "desk"
    else:
        results = verify.verify_state(cfg.state, cfg.geometry, cfg.N, cfg.times, _probes(cfg))
        scope = "state"
    for r in results:
        print(r.line())
    passed = all(r.passed for r in results)
    doc = {"schema_version": report.SCHEMA_VERSION, "kind": "verify", "scope": scope,
           "config": cfg.to_dict(), "passed": passed, "criteria": [r.to_dict() for r in results]}
    data = _dump_json(doc)
    if "json" in fs:
        report.atomic_write(cfg.directory / "verify.json", data)
    if "svg" in fs:
        report.atomic_write(cfg.directory / "verify.svg", report.render_svg("verify", json.loads(data)))
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_spectrum(cfg: RunConfig, bins: int) -> int:
    from . import report
    from .oracle import spectral_measure_check

    fs = _formats(cfg, "spectrum")
    _prepare_dir(cfg.directory)
    probes = _probes(cfg)[:2]
    rows = []
    for i, f in enumerate(probes):
        for j, g in enumerate(probes):
            edges, mat, ana = spectral_measure_check(f, g, cfg.state, cfg.geometry, cfg.N, bins)
            for k in range(bins):
                for part, val in (("matrix", mat[k]), ("analytic", ana[k])):
                    rows.append((i, j, float(edges[k]), float(edges[k + 1]), part,
                                 float(np.real(val)), float(np.imag(val))))
    rows.sort(key=lambda r: (r[0], r[1], r[4], r[2]))
    tab = report.KernelTable("spectrum", rows, {})
    doc = {"schema_version": report.SCHEMA_VERSION, "kind": "spectrum", "name": "spectrum",
           "config": cfg.to_dict(), "bins": bins, "columns": list(report.COLUMNS),
           "rows": [dict(zip(report.COLUMNS, r)) for r in rows]}
    data = _dump_json(doc)
    if "csv" in fs:
        report.atomic_write(cfg.directory / "spectrum.csv", report.table_to_csv(tab))
    if "json" in fs:
        report.atomic_write(cfg.directory / "spectrum.json", data)
    if "svg" in fs:
        report.atomic_write(cfg.directory / "spectrum.svg", report.render_svg("spectrum", json.loads(data)))
    return EXIT_OK


def cmd_plot(files: list, out: Path | None) -> int:
    from . import report

    docs = []
    for p in map(Path, files):
        try:
            kind, doc = report.read_table(p)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(str(p), f"not a modcyl table or report: {exc}") from None
        docs.append((p, kind, doc))
    for p, kind, doc in docs:
        target_dir = out if out is not None else p.parent
        _prepare_dir(target_dir)
        report.atomic_write(target_dir / (p.stem + ".svg"), report.render_svg(kind, doc))
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modcyl", description="Modular kernels of Dirac fermions on a cylinder.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--preset", help="named state: ns-vacuum, zero-temperature, massive-vacuum, "
                                        "tip-plus, tip-minus, rim(psi,phi)")
        p.add_argument("--N", type=int, help="grid size (even, >= 16)")
        p.add_argument("--t", help="comma-separated flow times")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", help="comma-separated subset of csv,json,svg")

    common(sub.add_parser("kernel", help="evaluate G, H and K(t) kernels on a grid"))
    pv = sub.add_parser("verify", help="run the verification suite")
    common(pv)
    pv.add_argument("--desk", nargs="?", const="all", default=None,
                    help="run the fixed acceptance criteria on the reference configuration "
                         "(optionally a comma list of criterion numbers)")
    ps = sub.add_parser("spectrum", help="binned spectral measure: matrix vs closed form")
    common(ps)
    ps.add_argument("--bins", type=int, default=32)
    pp = sub.add_parser("plot", help="render CSV/JSON outputs as SVG")
    pp.add_argument("files", nargs="+")
    pp.add_argument("--out", help="output directory (default: next to each input)")
    return ap


def _thread_limit():
    raw = os.environ.get("MODCYL_THREADS")
    if raw is None or raw.strip() == "":
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError("MODCYL_THREADS", f"expected a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _desk_list(text: str | None) -> list | None:
    if text is None:
        return None
    if text == "all":
        return []
    try:
        nums = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError("--desk", f"expected criterion numbers, got {text!r}") from None
    bad = [n for n in nums if not 1 <= n <= 11]
    if bad:
        raise ConfigError("--desk", f"criteria are numbered 1..11, got {bad}")
    return nums


def main(argv: list | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        with _thread_limit():
            if args.verb == "plot":
                return cmd_plot(args.files, Path(args.out) if args.out else None)
            cfg = _apply_flags(load_config(_read_config(args.config)), args)
            if args.verb == "kernel":
                return cmd_kernel(cfg)
            if args.verb == "verify":
                return cmd_verify(cfg, _desk_list(args.desk))
            if args.bins < 1:
                raise ConfigError("--bins", f"must be positive, got {args.bins}")
            return cmd_spectrum(cfg, args.bins)
    except (ArithmeticError, ValueError) as exc:
        print(f"modcyl: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"modcyl: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
