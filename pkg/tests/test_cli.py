import csv
import json
import math

import pytest

from weyl_tbc import cli


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_weyl_table_free(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "free"}, "interval": {"a_minus": 0, "a_plus": 1},
                           "weyl_table": {"lambdas": [-1]}})
    out = tmp_path / "w.csv"
    assert cli.main(["weyl-table", cfg, "--out", str(out)]) == 0
    r = rows(out)
    assert [x["side"] for x in r] == ["left", "right"]
    assert all(float(x["re_m"]) == -1 for x in r)
    assert list(r[0]) == cli.WEYL_COLUMNS
    meta = json.loads((tmp_path / "w.csv.meta.json").read_text())
    assert "config_sha256" in meta and "wall_time" not in meta


def test_weyl_table_examples(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "poschl_teller", "ell": 1}, "interval": {"a_minus": -1, "a_plus": 0},
                           "weyl_table": {"lambdas": [-1], "sides": ["right"]}})
    out = tmp_path / "pt.json"
    assert cli.main(["weyl-table", cfg, "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert abs(doc["rows"][0]["re_m"]) < 1e-12
    cfg = write(tmp_path, {"potential": {"kind": "harmonic"}, "interval": {"a_minus": -1, "a_plus": 1},
                           "weyl_table": {"grid": {"re": [0.5, 0.5, 1], "im": [0, 0, 1]}, "sides": ["right"],
                                          "method": "parabolic_cylinder"}}, "h.json")
    assert cli.main(["weyl-table", cfg, "--out", str(out), "--format", "json"]) == 0
    assert json.loads(out.read_text())["rows"][0]["re_m"] == pytest.approx(-0.5, abs=1e-10)


def test_weyl_table_threads_are_deterministic(tmp_path):
    doc = {"potential": {"kind": "harmonic"}, "interval": {"a_minus": -1, "a_plus": 2},
           "weyl_table": {"grid": {"re": [-2, 4, 7], "im": [0.5, 2, 3]}, "method": "numeric"}}
    cfg = write(tmp_path, doc)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["weyl-table", cfg, "--out", str(a)]) == 0
    assert cli.main(["weyl-table", cfg, "--out", str(b), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_failed_rows_are_flagged(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "tabulated", "xs": [-1, 1], "vs": [0, 0]},
                           "interval": {"a_minus": -1, "a_plus": 1},
                           "weyl_table": {"lambdas": [-1], "method": "closed_form"}})
    out = tmp_path / "f.csv"
    assert cli.main(["weyl-table", cfg, "--out", str(out)]) == 0
    assert all(r["pole"] == "error" and r["re_m"] == "nan" for r in rows(out))


def test_spectrum_and_eigenfunctions(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "poschl_teller", "ell": 1}, "interval": {"a_minus": -2, "a_plus": 2},
                           "spectrum": {"window": [-3, -0.01], "grid": 100}, "output": {"precision": 12}})
    out, edir = tmp_path / "s.csv", tmp_path / "ef"
    assert cli.main(["spectrum", cfg, "--out", str(out), "--eigenfunctions", str(edir)]) == 0
    r = rows(out)
    assert len(r) == 1 and float(r[0]["E"]) == pytest.approx(-1, abs=1e-8)
    assert len(r[0]["E"].lstrip("-").replace(".", "")) <= 12
    ef = rows(edir / "eigenfunction_000.csv")
    assert list(ef[0]) == cli.EIGENFUNCTION_COLUMNS and len(ef) > 100


def test_spectrum_dirichlet(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "harmonic"}, "interval": {"a_minus": -1, "a_plus": 2},
                           "spectrum": {"window": [0, 6], "grid": 200, "left": "dirichlet", "right": "dirichlet"}})
    out = tmp_path / "d.csv"
    assert cli.main(["spectrum", cfg, "--out", str(out)]) == 0
    es = [float(r["E"]) for r in rows(out)]
    assert len(es) >= 1 and es[0] > 0.5


def test_resolve_and_oracle(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "free"}, "interval": {"a_minus": 0, "a_plus": 1},
                           "resolve": {"lambda": -1, "source": {"kind": "constant", "value": 1}}})
    out = tmp_path / "r.csv"
    assert cli.main(["resolve", cfg, "--out", str(out), "--oracle"]) == 0
    r = rows(out)
    assert float(r[0]["re_phi"]) == pytest.approx((1 - math.exp(-1)) / 2, abs=1e-8)
    assert abs(float(r[0]["re_oracle"]) - float(r[0]["re_phi"])) < 1e-4


def test_resolve_tabulated_source_file(tmp_path):
    (tmp_path / "g.csv").write_text("x,re,im\n" + "".join(f"{i / 20},0,0\n" for i in range(21)))
    cfg = write(tmp_path, {"potential": {"kind": "free"}, "interval": {"a_minus": 0, "a_plus": 1},
                           "resolve": {"lambda": [0, 1], "source": {"kind": "tabulated", "path": "g.csv"}}})
    out = tmp_path / "z.csv"
    assert cli.main(["resolve", cfg, "--out", str(out)]) == 0
    assert all(float(r["re_phi"]) == 0 and float(r["im_phi"]) == 0 for r in rows(out))


def test_exit_codes(tmp_path):
    bad = write(tmp_path, {"potential": {"kind": "free"}, "interval": {"a_minus": 1, "a_plus": 0}}, "bad.json")
    assert cli.main(["weyl-table", bad]) == cli.EXIT_CONFIG
    missing = write(tmp_path, {"potential": {"kind": "free"}, "interval": {"a_minus": 0, "a_plus": 1},
                               "resolve": {"lambda": -1, "source": {"kind": "tabulated", "path": "nope.csv"}}}, "m.json")
    assert cli.main(["resolve", missing]) == cli.EXIT_CONFIG
    prec = write(tmp_path, {"potential": {"kind": "free"}, "interval": {"a_minus": 0, "a_plus": 1},
                            "output": {"precision": 30}}, "p.json")
    assert cli.main(["weyl-table", prec]) == cli.EXIT_CONFIG
    eig = write(tmp_path, {"potential": {"kind": "harmonic"}, "interval": {"a_minus": -1, "a_plus": 2},
                           "resolve": {"lambda": 0.5}}, "e.json")
    assert cli.main(["resolve", eig]) == cli.EXIT_NOT_REGULAR
    assert cli.main(["weyl-table", str(tmp_path / "absent.json")]) == cli.EXIT_CONFIG


def test_spectrum_identical_runs(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "poschl_teller", "ell": 1}, "interval": {"a_minus": -2, "a_plus": 2},
                           "spectrum": {"window": [-3, -0.01], "grid": 60}, "output": {"format": "json"}})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(["spectrum", cfg, "--out", str(a)])
    cli.main(["spectrum", cfg, "--out", str(b), "--threads", "3"])
    assert a.read_bytes() == b.read_bytes()


def test_verify_filter(capsys):
    code = cli.main(["verify", "--filter", "parabolic_cylinder"])
    out = capsys.readouterr().out
    assert code == 0 and "[PASS]" in out and out.count("[") == 1
