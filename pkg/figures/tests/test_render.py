import json
from pathlib import Path

import pytest

from figures import FigureSpec, SchemaError, render
from figures.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

TRIBES = sorted(FIXTURES.glob("tribes_n*.json"))
NOISE = sorted(FIXTURES.glob("noise_eps*.json"))
TAIL = [FIXTURES / "tail_ratio.json"]
SAMPLES = [FIXTURES / "tau_samples_n64.csv"]

GOLDEN = {
    "quantile-convergence": TRIBES,
    "bks-decay": TRIBES,
    "noise-vs-epsilon": NOISE,
    "tail-ratio": TAIL,
    "anticoncentration": SAMPLES,
}


@pytest.mark.parametrize("kind", sorted(GOLDEN))
@pytest.mark.parametrize("fmt", ["png", "svg"])
def test_render_golden_fixtures(tmp_path, kind, fmt):
    out = tmp_path / f"fig.{fmt}"
    render(FigureSpec(kind, tuple(GOLDEN[kind]), out, fmt))
    assert out.exists() and out.stat().st_size > 0
    sidecar = json.loads((tmp_path / f"fig.{fmt}.meta.json").read_text())
    assert sidecar["kind"] == kind
    assert [i["path"] for i in sidecar["inputs"]] \
        == [str(p) for p in GOLDEN[kind]]
    for inp in sidecar["inputs"]:
        assert inp["digest"].startswith("sha256:")


def test_cli_renders_and_exits_zero(tmp_path):
    out = tmp_path / "fig.png"
    code = main(["render", "--kind", "tail-ratio",
                 "--in", str(TAIL[0]), "--out", str(out), "--format", "png"])
    assert code == 0 and out.stat().st_size > 0


def test_single_epsilon_point_renders(tmp_path):
    out = tmp_path / "one.png"
    render(FigureSpec("noise-vs-epsilon", (NOISE[0],), out))
    assert out.stat().st_size > 0


def test_empty_estimates_fail_loudly(tmp_path):
    bad = tmp_path / "empty.json"
    bad.write_text(json.dumps({"schema_version": 1, "experiment": "noise",
                               "params": {"epsilon": 0.1}, "seed": 0,
                               "estimates": []}))
    out = tmp_path / "fig.png"
    with pytest.raises(SchemaError, match="estimates"):
        render(FigureSpec("noise-vs-epsilon", (bad,), out))
    assert not out.exists()


def test_schema_mismatch_names_missing_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    doc = json.loads(TRIBES[0].read_text())
    del doc["params"]["beta"]
    bad.write_text(json.dumps(doc))
    code = main(["render", "--kind", "quantile-convergence",
                 "--in", str(bad), "--out", str(tmp_path / "x.png")])
    assert code != 0
    assert "beta" in capsys.readouterr().err


def test_wrong_artifact_type_fails(tmp_path):
    with pytest.raises(SchemaError, match="sample_index"):
        render(FigureSpec("anticoncentration", (TRIBES[0],),
                          tmp_path / "x.png"))


def test_missing_estimate_named(tmp_path):
    doc = json.loads(NOISE[0].read_text())
    for est in doc["estimates"]:
        if est["name"] == "noise_covariance":
            est["name"] = "something_else"
    bad = tmp_path / "renamed.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="noise_covariance"):
        render(FigureSpec("noise-vs-epsilon", (bad,), tmp_path / "x.png"))


def test_unknown_kind_and_format_rejected(tmp_path):
    with pytest.raises(SchemaError):
        FigureSpec("pie-chart", (TAIL[0],), tmp_path / "x.png")
    with pytest.raises(SchemaError):
        FigureSpec("tail-ratio", (TAIL[0],), tmp_path / "x.png", "gif")
    with pytest.raises(SchemaError):
        FigureSpec("tail-ratio", (), tmp_path / "x.png")


def test_deterministic_output(tmp_path):
    outs = []
    for name in ("a.svg", "b.svg"):
        out = tmp_path / name
        render(FigureSpec("bks-decay", tuple(TRIBES), out, "svg"))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
