import json

import pytest

from gridtoast import serialization
from gridtoast.cli import main
from gridtoast.render import to_ascii, to_svg


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def toast_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "toast.json"
    assert run_cli("toast", "build", "--d", "2", "--L", "256", "--k", "32",
                   "--N", "4", "--n", "8", "--seed", "0",
                   "-o", str(path)) == 0
    return path


@pytest.fixture(scope="module")
def layered_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "t784.json"
    assert run_cli("toast", "build", "--d", "2", "--L", "784", "--k", "16",
                   "--N", "1", "--n", "20", "--levels", "128", "--seed", "1",
                   "-o", str(path)) == 0
    return path


def test_toast_build_determinism(toast_file, tmp_path):
    again = tmp_path / "again.json"
    assert run_cli("toast", "build", "--d", "2", "--L", "256", "--k", "32",
                   "--N", "4", "--n", "8", "--seed", "0",
                   "-o", str(again)) == 0
    assert again.read_bytes() == toast_file.read_bytes()


def test_toast_build_rejects(tmp_path, capsys):
    out = tmp_path / "bad.json"
    assert run_cli("toast", "build", "--d", "2", "--L", "250", "--k", "32",
                   "--N", "4", "--n", "8", "-o", str(out)) == 2
    err = json.loads(capsys.readouterr().err)
    assert "multiple" in err["error"]


def test_run_verify_ham(toast_file, tmp_path, capsys):
    cert = tmp_path / "ham.json"
    assert run_cli("run", "ham", "--toast", str(toast_file), "--seed", "0",
                   "-o", str(cert)) == 0
    assert run_cli("verify", str(cert), "--boundary", "--toast",
                   str(toast_file)) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[-1]) == \
        {"ok": True}
    again = tmp_path / "ham2.json"
    assert run_cli("run", "ham", "--toast", str(toast_file), "--seed", "0",
                   "-o", str(again)) == 0
    assert again.read_bytes() == cert.read_bytes()


def test_run_verify_hom_edge(toast_file, tmp_path, capsys):
    hom = tmp_path / "hom.json"
    assert run_cli("run", "hom", "--toast", str(toast_file),
                   "-o", str(hom)) == 0
    assert run_cli("verify", str(hom), "--family", "hom", "--boundary",
                   "--toast", str(toast_file)) == 0
    edge = tmp_path / "edge.json"
    assert run_cli("run", "edge", "--toast", str(toast_file),
                   "-o", str(edge)) == 0
    assert run_cli("verify", str(edge)) == 0
    capsys.readouterr()
    assert run_cli("run", "edge", "--toast", str(toast_file), "--t", "3",
                   "-o", str(tmp_path / "no.json")) == 2
    err = json.loads(capsys.readouterr().err)
    assert "t >= 4" in err["error"]


def test_run_verify_rect(layered_file, tmp_path):
    cert = tmp_path / "rect.json"
    assert run_cli("run", "rect", "--toast", str(layered_file),
                   "-o", str(cert)) == 0
    assert run_cli("verify", str(cert), "--boundary", "--toast",
                   str(layered_file)) == 0


def test_verify_detects_corruption(toast_file, tmp_path, capsys):
    cert = tmp_path / "ham.json"
    run_cli("run", "ham", "--toast", str(toast_file), "-o", str(cert))
    obj = serialization.load(cert)
    obj["step"][5] = 0
    serialization.dump(obj, cert)
    assert run_cli("verify", str(cert)) == 1
    res = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert res["ok"] is False and res["constraint"] in ("code-range",
                                                        "in-degree")


def test_render_outputs(toast_file, tmp_path):
    cert = tmp_path / "ham.json"
    run_cli("run", "ham", "--toast", str(toast_file), "-o", str(cert))
    svg = tmp_path / "ham.svg"
    assert run_cli("render", str(cert), "-o", str(svg)) == 0
    text = svg.read_text()
    assert text.startswith("<svg") and "<line" in text
    obj = serialization.load(cert)
    with pytest.raises(ValueError, match="use .svg or .txt"):
        from gridtoast.render import render
        render(obj, str(tmp_path / "out.png"))


def test_render_families(toast_file, tmp_path):
    hom = tmp_path / "hom.json"
    run_cli("run", "hom", "--toast", str(toast_file), "-o", str(hom))
    assert "<rect" in to_svg(serialization.load(hom))
    edge = tmp_path / "edge.json"
    run_cli("run", "edge", "--toast", str(toast_file), "-o", str(edge))
    assert "<line" in to_svg(serialization.load(edge))
    txt = to_ascii(serialization.load(hom))
    lines = txt.splitlines()
    assert len(lines) == 256 and set(lines[0]) <= set("012")


def test_render_rect_and_slices(layered_file, tmp_path):
    cert = tmp_path / "rect.json"
    run_cli("run", "rect", "--toast", str(layered_file), "-o", str(cert))
    obj = serialization.load(cert)
    with pytest.raises(ValueError, match="render limit"):
        to_svg(obj)  # 784 > the SVG cell cap
    small = {"family": "rect", "torus": None,
             "tiles": {"boxes": [[1, 2], [2, 1]]},
             "placements": [[0, [0, 0]], [0, [1, 0]]]}
    text = to_svg(small)
    assert text.count("<rect") == 4


def test_markers_and_entropy_cli(tmp_path, capsys):
    mk = tmp_path / "mk.json"
    assert run_cli("markers", "build", "--family", "full:2",
                   "-o", str(mk)) == 0
    assert run_cli("markers", "check", str(mk)) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[-1]) == \
        {"ok": True}
    assert run_cli("entropy", "--family", "hom:3", "--n-max", "2") == 0
    out = capsys.readouterr().out
    assert "count=18" in out
    assert run_cli("entropy", "--family", "full:2", "--n-max", "3",
                   "--budget", "100") == 1
    assert "budget exceeded at n=3" in capsys.readouterr().out
