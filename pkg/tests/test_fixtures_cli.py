import json

from click.testing import CliRunner

from trendvote.cli import main
from trendvote.fixtures import FixtureSpec, generate_fixture
from trendvote.util import load_json


def test_fixture_generator_deterministic(tmp_path):
    m1 = generate_fixture(tmp_path / "a", FixtureSpec(seed=4))
    m2 = generate_fixture(tmp_path / "b", FixtureSpec(seed=4))
    assert m1["counts"] == m2["counts"]
    assert (tmp_path / "a" / "works.ndjson").read_bytes() == (
        tmp_path / "b" / "works.ndjson"
    ).read_bytes()
    m3 = generate_fixture(tmp_path / "c", FixtureSpec(seed=5))
    assert m3["counts"] != m1["counts"]


def test_fixture_scale_defaults(tmp_path):
    manifest = generate_fixture(tmp_path, FixtureSpec(seed=0))
    assert manifest["total_works"] == 1000
    assert sum(manifest["keywords_per_domain"].values()) == 200
    years = {int(k.split("/")[1]) for k in manifest["counts"]}
    assert 2024 in years and 2025 in years and min(years) >= 2015


def test_fixture_works_parse_as_ndjson(tmp_path):
    generate_fixture(tmp_path, FixtureSpec(seed=2, works_per_domain=10))
    lines = (tmp_path / "works.ndjson").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    for line in lines:
        obj = json.loads(line)
        assert {"work_id", "publication_year", "topics", "concepts"} <= set(obj)


def test_cli_fixture_gen_and_stages(tmp_path):
    runner = CliRunner()
    fixture_dir = tmp_path / "fx"
    result = runner.invoke(
        main, ["fixture", "gen", "--out", str(fixture_dir), "--works-per-domain", "40"]
    )
    assert result.exit_code == 0, result.output
    assert (fixture_dir / "config.toml").exists()
    assert (fixture_dir / "roster.json").exists()
    manifest = load_json(fixture_dir / "manifest.json")
    assert manifest["total_works"] == 200

    config_arg = ["--config", str(fixture_dir / "config.toml")]
    result = runner.invoke(main, config_arg + ["--domain", "Physics", "ingest"])
    assert result.exit_code == 0, result.output
    assert "ingest: done" in result.output

    result = runner.invoke(main, config_arg + ["--domain", "Physics", "ingest"])
    assert "up-to-date" in result.output

    result = runner.invoke(main, config_arg + ["--domain", "Physics", "graph"])
    assert result.exit_code == 0, result.output


def test_cli_dependency_error_is_clean(tmp_path):
    runner = CliRunner()
    fixture_dir = tmp_path / "fx"
    runner.invoke(main, ["fixture", "gen", "--out", str(fixture_dir), "--works-per-domain", "20"])
    result = runner.invoke(
        main, ["--config", str(fixture_dir / "config.toml"), "embed"]
    )
    assert result.exit_code != 0
    assert "run stage" in result.output


def test_cli_unknown_session_close(tmp_path):
    runner = CliRunner()
    fixture_dir = tmp_path / "fx"
    runner.invoke(main, ["fixture", "gen", "--out", str(fixture_dir), "--works-per-domain", "20"])
    result = runner.invoke(
        main, ["--config", str(fixture_dir / "config.toml"), "vote", "close", "nope"]
    )
    assert result.exit_code != 0
