import csv
import io
import json

import pytest

from widthlab.cli import main, make_config, build_parser, render
from widthlab.suites import ConfigError, SuiteConfig, run_suite


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def strip_time(text):
    doc = json.loads(text)
    doc.pop("generated_at")
    return json.dumps(doc, sort_keys=True)


def test_width_pass(capsys):
    code, out, err = run(["width", "--group", "alt:5,psl:2:7"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] and {r["width"] for r in doc["records"]} == {1}
    assert "generated_at" in doc
    assert "PASS" in err


def test_assertion_failure_exit_code(capsys):
    code, out, err = run(["dns", "certify", "--factors", "psl:2:5,psl:2:7,psl:2:11", "--levels", "1,2"], capsys)
    assert code == 1
    assert json.loads(out)["pass"] is False
    assert "FAIL" in err


@pytest.mark.parametrize("argv", [
    ["lemma", "epsilon"],                      # empty group list
    ["width", "--group", "foo:3"],             # unknown family
    ["width", "--group", "alt:5", "--threads", "0"],
    ["lemma", "nonsense"],                     # parse error
    ["newcomm", "--group", "sym4", "--ys", "(1,2)"],  # ys not generating / not symmetric
])
def test_invalid_config_exit_code(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == 2


def test_cap_exit_code(capsys):
    code, _, err = run(["width", "--group", "alt:7", "--cap", "100"], capsys)
    assert code == 3 and "cap" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\ngroups = alt:5\nseed = 7\nh = derived\n")
    args = build_parser().parse_args(["width", "--config", str(cfg), "--seed", "3"])
    c = make_config(args)
    assert c.groups == ["alt:5"] and c.seed == 3 and c.params["h"] == "derived"
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus_option = 1\n")
    code, _, err = run(["width", "--group", "alt:5", "--config", str(bad)], capsys)
    assert code == 2 and "bogus_option" in err
    worse = tmp_path / "worse.cfg"
    worse.write_text("no equals sign\n")
    assert run(["width", "--config", str(worse)], capsys)[0] == 2


def test_out_file_and_csv_parity(tmp_path, capsys):
    js = tmp_path / "r.json"
    cs = tmp_path / "r.csv"
    assert run(["lemma", "epsilon", "--group", "psl:2:7,psl:2:8", "--all-autos", "--out", str(js)], capsys)[0] == 0
    assert run(["lemma", "epsilon", "--group", "psl:2:7,psl:2:8", "--all-autos", "--format", "csv",
                "--out", str(cs)], capsys)[0] == 0
    recs = json.loads(js.read_text())["records"]
    rows = list(csv.DictReader(io.StringIO(cs.read_text())))
    assert len(rows) == len(recs)
    for rec, row in zip(recs, rows):
        assert int(row["disp_size"]) == rec["disp_size"]
        assert float(row["ratio"]) == rec["ratio"]
        assert int(row["eps_width"]) == rec["eps_width"]
        assert row["in_Q"] == str(rec["in_Q"])
        assert json.loads(row["eps_chain"]) == rec["eps_chain"]


@pytest.mark.parametrize("argv", [
    ["lemma", "epsilon", "--group", "psl:2:7,alt:6,psl:2:8", "--all-autos"],
    ["g0", "property", "--random", "8"],
    ["kt", "identities", "--trials", "100"],
])
def test_determinism_across_threads(argv, capsys):
    outs = []
    for threads in ("1", "3"):
        code, out, _ = run(argv + ["--threads", threads, "--seed", "5"], capsys)
        assert code == 0
        outs.append(strip_time(out))
    assert outs[0] == outs[1]


def test_records_sorted_canonically():
    rep = run_suite(SuiteConfig("lemma bdedrank", groups=["psl:2:8", "alt:5"], threads=2))
    keys = [(r["group"], r["auto"]) for r in rep.records]
    assert [k[0] for k in keys] == sorted(k[0] for k in keys)


def test_unknown_suite_and_render():
    with pytest.raises(ConfigError):
        run_suite(SuiteConfig("nope"))
    text = render({"records": [{"a": 1, "b": [1, 2], "c": None}]}, "csv")
    assert text.splitlines() == ["a,b,c", '1,"[1, 2]",']
