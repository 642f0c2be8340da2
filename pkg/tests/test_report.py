import json

import numpy as np
import pytest

from modcyl.report import (COLUMNS, SCHEMA_VERSION, KernelTable, atomic_write, flow_table, hamiltonian_table,
                           read_table, render_svg, table_to_csv, table_to_json, two_point_table)
from modcyl.states import StateParams, preset


def test_csv_round_trip_is_exact(tmp_path):
    rows = [(1, 2, 0.1, -1 / 3, "pv", np.pi, -np.e), (2, 2, 0.5, 0.5, "delta", 1e-300, 0.0)]
    tab = KernelTable("demo", rows, {})
    p = tmp_path / "demo.csv"
    atomic_write(p, table_to_csv(tab))
    kind, doc = read_table(p)
    assert kind == "kernel"
    back = [tuple(r[c] for c in COLUMNS) for r in doc["rows"]]
    assert back == rows


def test_json_has_schema(tmp_path):
    tab = KernelTable("demo", [(1, 1, 0.0, 0.0, "delta", 1.0, 0.0)], {})
    doc = json.loads(table_to_json(tab))
    assert doc["schema_version"] == SCHEMA_VERSION and doc["columns"] == list(COLUMNS)
    p = tmp_path / "demo.json"
    atomic_write(p, table_to_json(tab))
    assert read_table(p)[0] == "kernel"


def test_read_table_rejects_foreign_files(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_table(p)
    q = tmp_path / "x.json"
    q.write_text(json.dumps({"schema_version": 99, "kind": "kernel"}))
    with pytest.raises(ValueError):
        read_table(q)


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write(tmp_path / "a.txt", b"one")
    atomic_write(tmp_path / "a.txt", b"two")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_bytes() == b"two"


def test_kernel_tables_parts(geo):
    # NS: G keeps its Cauchy kernel on the diagonal blocks, H and K have no non-local part
    g = two_point_table(StateParams.ns(), geo, 16)
    assert g.select("pv") and all(r[0] == r[1] for r in g.rows) and not g.select("mirror")
    for tab in (hamiltonian_table(StateParams.ns(), geo, 16), flow_table(0.2, StateParams.ns(), geo, 16)):
        assert not tab.select("pv") and not tab.select("smooth") and not tab.select("mirror")
    rim = hamiltonian_table(preset("rim(pi/2,pi/2)", geo), geo, 16)
    assert rim.select("mirror")
    zt = flow_table(0.2, preset("zero-temperature", geo), geo, 16)
    assert zt.select("pv") or zt.select("smooth")
    assert all(r[0] == r[1] for r in zt.rows if r[4] in ("pv", "smooth"))


def test_svg_deterministic(geo):
    tab = hamiltonian_table(preset("rim(pi/2,pi/2)", geo), geo, 16)
    doc = json.loads(table_to_json(tab))
    a, b = render_svg("kernel", doc), render_svg("kernel", doc)
    assert a == b and a.startswith(b"<?xml")
    with pytest.raises(ValueError):
        render_svg("other", doc)


def test_svg_without_mirror_layer(geo):
    doc = json.loads(table_to_json(hamiltonian_table(StateParams.ns(), geo, 16)))
    assert b"mirror" not in render_svg("kernel", doc)
