import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from dsloc.cli import main

SVG = "{http://www.w3.org/2000/svg}"


def run(argv, capsys):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["fixture", "two_islands", "--measure", "heavy", "--dir", str(d)]) == 0
    G, D = d / "two_islands.subdivision.json", d / "two_islands.heavy.measure.json"
    out = d / "s.json"
    assert main(["build", str(G), str(D), "-o", str(out), "--r", "4", "--m-cap", "3000",
                 "--stats", str(d / "stats.json")]) == 0
    return d, G, D, out


def test_build_writes_stats(files):
    d, *_ = files
    st = json.loads((d / "stats.json").read_text())
    assert st["nodes"] > 1 and st["params"]["r"] == 4


def test_build_malformed_json(tmp_path, files, capsys):
    _, G, D, _ = files
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert run(["build", bad, D, "-o", tmp_path / "o.json"], capsys)[0] == 1
    assert run(["build", G, bad, "-o", tmp_path / "o.json"], capsys)[0] == 1
    assert run(["build", tmp_path / "missing.json", D, "-o", tmp_path / "o.json"], capsys)[0] == 1


@pytest.mark.parametrize("flags", [["--r", "0"], ["--alpha", "1/2"], ["--r", "x"], ["--strategy", "nope"]])
def test_build_usage_errors(files, flags, tmp_path, capsys):
    _, G, D, _ = files
    assert run(["build", G, D, "-o", tmp_path / "o.json"] + flags, capsys)[0] == 64


def test_no_command_is_usage_error(capsys):
    assert run([], capsys)[0] == 64


def test_build_root_failure(files, tmp_path, capsys):
    _, G, D, _ = files
    code, _, err = run(["build", G, D, "-o", tmp_path / "o.json", "--m-cap", "2", "--max-retries", "1"], capsys)
    assert code == 2 and "root partition failed" in err


def test_query(files, capsys):
    _, _, _, S = files
    code, out, _ = run(["query", S, "1/4", "1/2"], capsys)
    assert code == 0 and out.startswith("faceA ") and "terminal=true" in out
    code, out, _ = run(["query", S, "5", "-3"], capsys)
    assert code == 0 and out.startswith("outer ") and "backup=true" in out
    code, out, _ = run(["query", S, "1/3", "2/7"], capsys)
    assert code == 0
    assert run(["query", S, "1/0", "0"], capsys)[0] == 64


def test_query_missing_structure(tmp_path, capsys):
    assert run(["query", tmp_path / "none.json", "0", "0"], capsys)[0] == 1


def test_verify_clean(files, capsys):
    code, out, _ = run(["verify", files[3]], capsys)
    assert code == 0 and out.startswith("ok:")


def test_verify_corrupted_leaf_label(files, tmp_path, capsys):
    d = json.loads(files[3].read_text())
    leaf = next(n for n in d["nodes"] if n["kind"] == "terminal")
    leaf["label"] = "faceB" if leaf["label"] != "faceB" else "faceA"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, out, _ = run(["verify", bad, "--skip-partitions"], capsys)
    assert code == 3
    lines = out.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("VIOLATION root/") and "terminal label" in lines[0]


def test_verify_perturbed_vertex(files, tmp_path, capsys):
    d = json.loads(files[3].read_text())
    kid = d["nodes"][d["nodes"][0]["children"][0]]
    x, y = kid["region"][0]
    kid["region"][0] = [str(Fraction(x) + Fraction(1, 2 ** 30)), y]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, out, _ = run(["verify", bad], capsys)
    assert code == 3 and "VIOLATION root: child areas do not tile the region" in out


def test_bench_and_determinism(files, tmp_path, capsys):
    _, G, D, _ = files
    outs = []
    for k in range(2):
        s = tmp_path / f"s{k}.json"
        assert main(["build", str(G), str(D), "-o", str(s), "--r", "4", "--m-cap", "3000", "--seed", "7"]) == 0
        code, _, _ = run(["bench", s, "--queries", "500", "--seed", "1", "--csv", tmp_path / f"b{k}.csv",
                          "--json", tmp_path / f"b{k}.json"], capsys)
        assert code == 0
        outs.append([(tmp_path / n).read_bytes() for n in (f"s{k}.json", f"b{k}.csv", f"b{k}.json")])
    # file stems differ ("s0" vs "s1") only in the fixture column; compare everything else
    assert outs[0][0] == outs[1][0]
    assert outs[0][1].replace(b"s0,", b"s1,") == outs[1][1]
    assert outs[0][2].replace(b'"s0"', b'"s1"') == outs[1][2]


def test_bench_one_row_per_structure(tmp_path, capsys):
    paths = []
    for n in (64, 256):
        assert main(["fixture", "islands", "--n", str(n), "--measure", "skewed", "--dir", str(tmp_path)]) == 0
        s = tmp_path / f"islands{n}.json"
        assert main(["build", str(tmp_path / f"islands{n}.subdivision.json"),
                     str(tmp_path / f"islands{n}.skewed.measure.json"), "-o", str(s), "--m-cap", "3000"]) == 0
        paths.append(s)
    capsys.readouterr()
    assert run(["bench", *paths, "--queries", "200", "--csv", tmp_path / "b.csv"], capsys)[0] == 0
    rows = (tmp_path / "b.csv").read_text().strip().splitlines()
    assert len(rows) == 3 and rows[1].startswith("islands64,64,")
    assert run(["bench", tmp_path / "nope.json"], capsys)[0] == 1
    assert run(["bench", paths[0], "--csv", tmp_path / "no" / "dir" / "b.csv"], capsys)[0] == 1


def test_render(files, tmp_path, capsys):
    out = tmp_path / "root.svg"
    assert run(["render", files[3], "--node", "0", "-o", out], capsys)[0] == 0
    root = ET.parse(out).getroot()
    layers = [g.get("id") for g in root.iter(SVG + "g") if g.get("class") == "layer"]
    assert layers == ["triangles", "tree", "arrangement", "triangulation"]
    assert all(len(g) > 0 for g in root.iter(SVG + "g"))
    assert [g.get("id") for g in root.iter(SVG + "g") if g.get("class") == "overlay"] == ["subdivision"]
    assert run(["render", files[3], "--node", "99999", "-o", tmp_path / "x.svg"], capsys)[0] == 1
    assert run(["render", files[3], "--node", "1", "-o", tmp_path / "leaf.svg"], capsys)[0] == 0


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "dsloc", "query", str(files[3]), "3/4", "1/2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("faceB ")
