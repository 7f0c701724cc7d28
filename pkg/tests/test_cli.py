import json

import pytest

from polarlab import channel_to_json, make_group
from polarlab.cli import main
from polarlab.presets import bsc_channel, parse_group_spec, parse_preset


def write_channel(tmp_path, channel, name="chan.json"):
    path = tmp_path / name
    path.write_text(json.dumps(channel_to_json(channel)))
    return str(path)


def test_parse_group_spec():
    assert parse_group_spec("Z4").orders == (4,)
    assert parse_group_spec("z2xz2").orders == (2, 2)
    assert parse_group_spec("[2,4]").orders == (2, 4)
    with pytest.raises(ValueError):
        parse_group_spec("Q8")


def test_parse_preset_variants():
    assert parse_preset("bec:0.5").n_outputs == 3
    assert parse_preset("bsc:0.1").n_outputs == 2
    dh = parse_preset("dh:Z4:{0,2}")
    assert dh.n_outputs == 2
    ml = parse_preset("z4-multilevel:0.5")
    assert ml.n_outputs == 6
    rnd = parse_preset("random:7", group=make_group([4]), n_outputs=5)
    assert rnd.n_outputs == 5 and rnd.group.orders == (4,)
    mix = parse_preset("dh-mix:3", group=make_group([4]))
    assert mix.n_outputs == 7
    with pytest.raises(ValueError):
        parse_preset("nope:1")
    with pytest.raises(ValueError):
        parse_preset("bec:two")


def test_polarize_exhaustive_record_count(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main([
        "polarize", "--preset", "bec:0.5", "--depth", "8",
        "--mode", "exhaustive", "--delta", "0.1", "--output", str(out),
    ])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["schema"] == "polarlab-report/1"
    assert len(data["records"]) == 256
    assert data["config"]["source"] == "preset:bec:0.5"


def test_polarize_reports_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    args = ["polarize", "--preset", "bec:0.5", "--depth", "6", "--output"]
    assert main(args + [str(out1)]) == 0
    assert main(args + [str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_polarize_depth_zero(tmp_path):
    out = tmp_path / "r.json"
    assert main(["polarize", "--preset", "bsc:0.1", "--depth", "0", "--output", str(out)]) == 0
    assert len(json.loads(out.read_text())["records"]) == 1


def test_polarize_written_report_round_trips(tmp_path):
    out = tmp_path / "r.json"
    main(["polarize", "--preset", "bec:0.5", "--depth", "4", "--output", str(out)])
    raw = out.read_text()
    assert json.dumps(json.loads(raw), indent=2) + "\n" == raw


def test_polarize_csv_aggregates(tmp_path):
    out = tmp_path / "r.csv"
    code = main([
        "polarize", "--preset", "bec:0.5", "--depth", "4",
        "--format", "csv", "--output", str(out),
    ])
    assert code == 0
    text = out.read_text()
    assert text.startswith("key,value\n")
    assert "fraction_determined," in text


def test_polarize_sample_mode(tmp_path):
    out = tmp_path / "r.json"
    code = main([
        "polarize", "--preset", "bec:0.5", "--depth", "6", "--mode", "sample",
        "--samples", "25", "--seed", "3", "--output", str(out),
    ])
    assert code == 0
    assert len(json.loads(out.read_text())["records"]) == 25


def test_polarize_resource_failures_exit_2(tmp_path):
    out = tmp_path / "r.json"
    code = main([
        "polarize", "--preset", "random:0", "--group", "Z4", "--depth", "4",
        "--atom-budget", "200", "--output", str(out),
    ])
    assert code == 2
    data = json.loads(out.read_text())
    assert data["aggregates"]["failed"] > 0


def test_polarize_invalid_inputs(tmp_path, capsys):
    assert main(["polarize", "--depth", "4"]) == 1
    assert "error:" in capsys.readouterr().err

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["polarize", "--channel", str(bad), "--depth", "2"]) == 1
    assert "malformed JSON" in capsys.readouterr().err

    nonstoch = tmp_path / "ns.json"
    nonstoch.write_text(json.dumps({"group": [2], "outputs": ["a", "b"],
                                    "rows": [[0.5, 0.4], [0.5, 0.5]]}))
    assert main(["polarize", "--channel", str(nonstoch), "--depth", "2"]) == 1
    err = capsys.readouterr().err
    assert "row 0" in err

    mismatch = tmp_path / "mm.json"
    mismatch.write_text(json.dumps({"group": [4], "outputs": ["a", "b"],
                                    "rows": [[0.5, 0.5], [0.5, 0.5]]}))
    assert main(["polarize", "--channel", str(mismatch), "--depth", "2"]) == 1
    assert "group" in capsys.readouterr().err

    assert main(["polarize", "--preset", "bec:0.5", "--depth", "4",
                 "--merge-tau", "0.1"]) == 1
    assert "tolerance" in capsys.readouterr().err


def test_classify_exit_codes(tmp_path, capsys):
    assert main(["classify", "--preset", "dh:Z4:{0,2}", "--delta", "0.01"]) == 0
    out = capsys.readouterr().out
    assert "determined=true" in out
    assert "subgroup={0,2}" in out

    assert main(["classify", "--preset", "bsc:0.1", "--delta", "0.05"]) == 3
    assert "determined=false" in capsys.readouterr().out

    assert main(["classify", "--preset", "identity", "--group", "Z4",
                 "--delta", "0.01"]) == 0
    assert "subgroup={0}" in capsys.readouterr().out


def test_distance_identical_and_relabeled(tmp_path, capsys):
    w = bsc_channel(0.1)
    a = write_channel(tmp_path, w, "a.json")
    b = write_channel(tmp_path, w, "b.json")
    assert main(["distance", "--channel-a", a, "--channel-b", b]) == 0
    assert float(capsys.readouterr().out) == 0.0

    relabeled = {"group": [2], "outputs": ["x", "y"],
                 "rows": [row[::-1] for row in channel_to_json(w)["rows"]]}
    (tmp_path / "c.json").write_text(json.dumps(relabeled))
    assert main(["distance", "--channel-a", a, "--channel-b", str(tmp_path / "c.json")]) == 0
    assert float(capsys.readouterr().out) == 0.0


def test_distance_pc_bound(capsys):
    code = main([
        "distance", "--channel-a", "preset:identity", "--channel-b", "preset:useless",
        "--metric", "pc-bound",
    ])
    assert code == 0
    assert float(capsys.readouterr().out) >= 0.5 - 1e-9


def test_distance_alphabet_mismatch(tmp_path, capsys):
    a = write_channel(tmp_path, bsc_channel(0.1), "a.json")
    from polarlab.presets import identity_channel

    b = write_channel(tmp_path, identity_channel(make_group([4])), "b.json")
    assert main(["distance", "--channel-a", a, "--channel-b", b]) == 1
    assert "differ" in capsys.readouterr().err


def test_verify_pol_set_suite(capsys):
    assert main(["verify", "--suite", "pol-set"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
