import json
import re
import subprocess
import sys

import pytest

from gradseries.cli import main
from gradseries.config import from_dict, from_file
from gradseries.errors import ConfigError
from gradseries.report import CSV_COLUMNS, Report, ReportRow
from gradseries.runner import run_compare, run_lemma_suite

BASE_CONFIG = {
    "function": "x1^3 + 0.5*x1*x2",
    "point": [1.0, -0.5],
    "sigma": [0.1, 0.5],
    "n": [500, 2000],
    "seed": 7,
    "truncation_l": 6,
    "coordinates": "all",
    "ball_radius": 1.0,
    "outputs": ["json"],
}


def strip_wall_time(text: str) -> str:
    return re.sub(r'^\s*"wall_time_s": .*$', "", text, flags=re.MULTILINE)


# ---------------------------------------------------------------------------
# config parsing


def test_config_roundtrip_and_defaults():
    cfg = from_dict({"function": "x1^2", "point": [1.0]})
    assert cfg.sigma == (0.025,) and not cfg.sigma_swept  # documented default point
    assert cfg.n == (50,) and not cfg.n_swept
    assert cfg.seed == 0
    assert cfg.truncation_l == 6
    assert cfg.coordinates is None
    assert cfg.coordinate_indices() == [0]
    assert cfg.as_dict()["sigma"] == 0.025

    full = from_dict(BASE_CONFIG)
    assert full.sigma_swept and full.n_swept
    assert full.as_dict() == BASE_CONFIG


@pytest.mark.parametrize(
    "patch",
    [
        {"bogus_key": 1},
        {"function": ""},
        {"function": 42},
        {"point": []},
        {"point": [1.0, "a"]},
        {"sigma": -0.1},
        {"sigma": []},
        {"sigma": [0.5, 0.1]},
        {"sigma": [0.1, 0.1]},
        {"n": 0},
        {"n": [100, 10]},
        {"n": 1.5},
        {"seed": -1},
        {"seed": True},
        {"truncation_l": 5},
        {"truncation_l": 0},
        {"coordinates": []},
        {"coordinates": [0]},
        {"coordinates": [3]},
        {"coordinates": [1, 1]},
        {"ball_radius": 0.0},
        {"outputs": []},
        {"outputs": ["yaml"]},
    ],
)
def test_config_validation_errors(patch):
    doc = dict(BASE_CONFIG)
    doc.update(patch)
    with pytest.raises(ConfigError):
        from_dict(doc)


def test_config_from_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(BASE_CONFIG))
    assert from_file(path).function == BASE_CONFIG["function"]
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        from_file(bad)


# ---------------------------------------------------------------------------
# report serialization


def test_report_serialization():
    row = ReportRow(coordinate="x1", sigma=0.1, n=10, method="saliency", value=1.5)
    report = Report(config={"seed": 0}, version="0.1.0", wall_time_s=0.5, rows=(row,))
    doc = json.loads(report.to_json())
    assert doc["rows"][0]["within_bound"] is None
    assert doc["metadata"]["version"] == "0.1.0"
    csv_text = report.to_csv()
    lines = csv_text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "x1,0.1,10,saliency,1.5,,,,,"
    assert report.passed
    with pytest.raises(ValueError):
        report.render("yaml")


# ---------------------------------------------------------------------------
# runner behaviour


def test_run_compare_deterministic_and_worker_independent():
    cfg = from_dict(BASE_CONFIG)
    texts = {w: run_compare(cfg, workers=w).to_json() for w in (1, 4)}
    again = run_compare(cfg, workers=1).to_json()
    assert strip_wall_time(texts[1]) == strip_wall_time(texts[4])
    assert strip_wall_time(texts[1]) == strip_wall_time(again)


def test_run_compare_row_structure():
    cfg = from_dict(BASE_CONFIG)
    report = run_compare(cfg)
    # 2 coordinates x 2 sigmas x 2 ns x 5 methods
    assert len(report.rows) == 2 * 2 * 2 * 5
    keys = [(row.coordinate, row.sigma, row.n) for row in report.rows]
    assert keys == sorted(keys)
    methods = [row.method for row in report.rows[:5]]
    assert methods == ["saliency", "smoothgrad_mc", "vargrad_mc", "smoothgrad_series", "vargrad_series"]
    for row in report.rows:
        if row.method.endswith("_mc"):
            assert row.discrepancy == abs(row.value - row.series_value)
            assert row.within_bound is not None
    assert report.passed


def test_run_compare_sigma_zero():
    cfg = from_dict({"function": "tanh(x1)*x1", "point": [0.4], "sigma": 0.0, "n": 10, "truncation_l": 4})
    report = run_compare(cfg)
    by_method = {row.method: row for row in report.rows}
    assert by_method["smoothgrad_mc"].value == by_method["saliency"].value
    assert by_method["vargrad_mc"].value == 0.0
    assert by_method["smoothgrad_series"].remainder_bound == 0.0
    assert by_method["vargrad_series"].remainder_bound == 0.0
    assert by_method["vargrad_series"].value == 0.0
    assert report.passed


def test_run_compare_paper_default_operating_point():
    # 50 samples of deviation-0.025 noise: runs and reports finite standard errors
    cfg = from_dict({"function": "x1^2*x2", "point": [0.7, -0.4], "sigma": 0.025, "n": 50, "seed": 1})
    report = run_compare(cfg)
    ses = [row.standard_error for row in report.rows if row.method == "smoothgrad_mc"]
    assert all(se is not None and 0 <= se < float("inf") for se in ses)


def test_ball_escape_flags_failure():
    # exp grows so fast that the ball-based bound underestimates the true
    # truncation error once the noise escapes the ball: the report must say so
    cfg = from_dict(
        {
            "function": "exp(3*x1)",
            "point": [0.0],
            "sigma": 1.0,
            "n": 1000000,
            "seed": 11,
            "truncation_l": 2,
            "ball_radius": 0.05,
        }
    )
    report = run_compare(cfg)
    sg_row = next(row for row in report.rows if row.method == "smoothgrad_mc")
    assert sg_row.within_bound is False
    assert not report.passed


def test_lemma_suite_tiny_n_odd_rows_still_pass():
    # the 5-SE criterion scales with the interval width, so odd-moment rows
    # pass even at n = 10 (heavy-tailed high-order rows may not, legitimately)
    for seed in (0, 1, 2):
        report = run_lemma_suite(seed=seed, n=10)
        odd = [row for row in report.rows if row.method.startswith("odd_moment")]
        assert odd and all(row.within_bound for row in odd)


def test_run_lemma_suite_passes_and_is_deterministic():
    a = run_lemma_suite(seed=3, n=50_000)
    b = run_lemma_suite(seed=3, n=50_000)
    assert a.passed
    assert strip_wall_time(a.to_json()) == strip_wall_time(b.to_json())
    methods = {row.method for row in a.rows}
    assert "variance_product_bound" in methods
    assert "covariance_cauchy_schwarz" in methods
    assert "jensen_bracket_nonnegative" in methods


# ---------------------------------------------------------------------------
# command line


def write_config(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_cli_compare_json_and_csv(tmp_path, capsys):
    cfg = dict(BASE_CONFIG, n=200)
    path = write_config(tmp_path, cfg)
    assert main(["compare", "--config", path]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["metadata"]["config"]["function"] == cfg["function"]

    out = tmp_path / "report.csv"
    assert main(["compare", "--config", path, "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)


def test_cli_error_exit_codes(tmp_path, capsys):
    bad_fn = write_config(tmp_path, dict(BASE_CONFIG, function="x1 +"))
    assert main(["compare", "--config", bad_fn]) == 1
    assert "error" in capsys.readouterr().err

    missing = str(tmp_path / "nope.json")
    with pytest.raises(OSError):
        main(["compare", "--config", missing])


def test_cli_sweep_requires_sweep_list(tmp_path, capsys):
    no_sweep = write_config(tmp_path, {"function": "x1^2", "point": [1.0], "sigma": 0.1, "n": 100})
    assert main(["sweep", "--config", no_sweep]) == 1
    assert "sweep" in capsys.readouterr().err

    swept = write_config(
        tmp_path, {"function": "x1^2", "point": [1.0], "sigma": [0.1, 0.2], "n": 100}
    )
    assert main(["sweep", "--config", swept]) == 0
    capsys.readouterr()


def test_cli_assertion_failure_exit_code(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "function": "exp(3*x1)",
            "point": [0.0],
            "sigma": 1.0,
            "n": 1000000,
            "seed": 11,
            "truncation_l": 2,
            "ball_radius": 0.05,
        },
    )
    assert main(["compare", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 2


def test_cli_lemmata(tmp_path, capsys):
    assert main(["lemmata", "--seed", "1", "--n", "20000", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith(",".join(CSV_COLUMNS))


def test_cli_subprocess_entry_point(tmp_path):
    path = write_config(tmp_path, {"function": "x1^3", "point": [1.0], "sigma": 0.5, "n": 1000, "truncation_l": 2})
    out = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "gradseries", "compare", "--config", path, "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    series = [r for r in doc["rows"] if r["method"] == "smoothgrad_series"]
    assert series[0]["value"] == pytest.approx(3.75, rel=1e-12)
