import csv
import json

import numpy as np
import pytest

from aus.cli import ConfigError, ScenarioConfig, expand_eps, main, parse_f0
from aus.groups import parse_group
from aus.report import emit_plots
from aus.verifier import corrupt_bundle


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    out = d / "b.json"
    code = main(["construct", "--group", "circle", "--f0", "one",
                 "--eps", "0.5,0.25,0.125", "--out", str(out)])
    return code, out


def test_construct_writes_three_records(built):
    code, out = built
    assert code == 0
    assert len(json.loads(out.read_text())["records"]) == 3


def test_verify_clean_exit_zero(built, tmp_path, capsys):
    _, out = built
    rep = tmp_path / "r.json"
    assert main(["verify", str(out), "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["pass"] is True
    assert "PASS" in capsys.readouterr().out


def test_verify_corrupted_exit_one(built, circle_bundle, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    corrupt_bundle(circle_bundle, "scale_up", 2).save(bad)
    rep = tmp_path / "bad.report.json"
    assert main(["verify", str(bad), "--report", str(rep)]) == 1
    assert json.loads(rep.read_text())["failed_checks"] == ["upper"]
    assert "FAIL upper" in capsys.readouterr().out


def test_verify_bad_inputs_exit_two(built, tmp_path):
    _, out = built
    obj = json.loads(out.read_text())
    obj["version"] = 2
    v = tmp_path / "v.json"
    v.write_text(json.dumps(obj))
    assert main(["verify", str(v)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["verify", str(tmp_path / "junk.json")]) == 2


def test_construct_config_errors(tmp_path, capsys):
    assert main(["construct", "--group", "lattice", "--eps", "0.5", "--out", str(tmp_path / "x")]) == 2
    assert "unknown group" in capsys.readouterr().err
    assert main(["construct", "--group", "circle", "--eps", "0.1,0.2"]) == 2
    assert main(["construct", "--group", "circle"]) == 2
    assert main(["construct", "--config", str(tmp_path / "none.json")]) == 2
    assert main(["frobnicate"]) == 2


def test_construct_cap_exit_three(tmp_path):
    out = tmp_path / "p.json"
    code = main(["construct", "--group", "circle", "--eps", "0.5,0.25,0.125",
                 "--band-cap", "256", "--out", str(out)])
    assert code == 3
    obj = json.loads(out.read_text())
    assert obj["partial"] is True and len(obj["records"]) == 2
    assert main(["verify", str(out), "--report", str(tmp_path / "p.r.json")]) == 1


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"group": "circle", "f0": "one",
                               "eps": {"start": 0.5, "ratio": 0.5, "count": 2},
                               "out": str(tmp_path / "from_file.json")}))
    override = tmp_path / "flag.json"
    assert main(["construct", "--config", str(cfg), "--eps", "0.4", "--out", str(override)]) == 0
    obj = json.loads(override.read_text())
    assert obj["epsilons"] == [0.4] and len(obj["records"]) == 1
    assert not (tmp_path / "from_file.json").exists()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"group": "circle", "colour": "red"}))
    with pytest.raises(ConfigError):
        ScenarioConfig.load(bad)


def test_expand_eps():
    assert expand_eps({"start": 0.5, "ratio": 0.5, "count": 4}) == [0.5, 0.25, 0.125, 0.0625]
    assert expand_eps("0.5,0.25") == [0.5, 0.25]
    assert expand_eps([0.3]) == [0.3]
    with pytest.raises(ConfigError):
        expand_eps({"start": 0.5})
    with pytest.raises(ConfigError):
        expand_eps("a,b")


def test_parse_f0_inline():
    g = parse_group("torus:2")
    f0 = parse_f0(g, '{"n=(1,0)": [[0.5, 0.5]], "n=(0,0)": [[1, 0]]}')
    assert f0[f0.labels()[1]][0, 0] == 0.5 + 0.5j
    assert parse_f0(g, "one").labels()[0].index == (0, 0)
    with pytest.raises(ConfigError):
        parse_f0(g, "zero")
    with pytest.raises(ConfigError):
        parse_f0(g, '{"j=1/2": [[1, 0]]}')


def test_plot_outputs(built, tmp_path):
    _, out = built
    d = tmp_path / "plots"
    assert main(["plot", str(out), "--out-dir", str(d)]) == 0
    names = sorted(p.name for p in d.iterdir())
    assert names == sorted(f"{k}_m{m}.{e}" for m in (1, 2, 3)
                           for k, e in (("profile", "csv"), ("band", "svg"), ("spectrum", "csv")))
    obj = json.loads(out.read_text())
    eps = obj["epsilons"]
    for m in (1, 2, 3):
        rows = list(csv.DictReader(open(d / f"profile_m{m}.csv")))
        assert len(rows) == 2048
        fm = np.array([float(r["abs_f_m"]) for r in rows])
        f0 = np.array([float(r["abs_f0"]) for r in rows])
        inside = np.array([r["in_omega"] == "1" for r in rows])
        assert np.all(fm < f0 + eps[m - 1])
        assert np.all(fm[inside] > f0[inside] - eps[m - 1])
        assert (d / f"band_m{m}.svg").read_text().startswith("<svg")
    spectra = [{r["label"] for r in csv.DictReader(open(d / f"spectrum_m{m}.csv"))} for m in (1, 2, 3)]
    assert not spectra[0] & spectra[1] and not spectra[1] & spectra[2]


def test_plot_deterministic(built, tmp_path):
    _, out = built
    a, b = tmp_path / "a", tmp_path / "b"
    main(["plot", str(out), "--out-dir", str(a), "--seed", "3"])
    main(["plot", str(out), "--out-dir", str(b), "--seed", "3"])
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_plot_empty_bundle_warns(circle_bundle, tmp_path, caplog):
    import copy

    b = copy.deepcopy(circle_bundle)
    b.records = []
    with caplog.at_level("WARNING"):
        assert emit_plots(b, tmp_path / "none") == []
    assert "no records" in caplog.text
    assert not (tmp_path / "none").exists()


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("AUS_THREADS", "many")
    assert main(["selftest"]) == 2
    monkeypatch.setenv("AUS_THREADS", "1")
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 7
