"""The command line workflow end to end."""

import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from rdftuner.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def data_args(tmp_path):
    return ["--data-dir", str(tmp_path / "cli_data"), "--session", "demo"]


def write_fixture_files(tmp_path, fixture_texts):
    paths = {}
    for name, filename in (
        ("dataset", "D1.nt"),
        ("schema", "S1.nt"),
        ("workload", "workload.json"),
    ):
        path = tmp_path / filename
        path.write_text(fixture_texts[name])
        paths[name] = str(path)
    return paths


SCHEMA_FLAGS = [
    "--type-iri", "type",
    "--subclass-iri", "subClassOf",
    "--subproperty-iri", "subPropertyOf",
    "--domain-iri", "domain",
    "--range-iri", "range",
]


def invoke(runner, args, **kwargs):
    result = runner.invoke(main, args, catch_exceptions=False, **kwargs)
    return result


def test_workflow_end_to_end(runner, tmp_path, data_args, fixture_texts):
    paths = write_fixture_files(tmp_path, fixture_texts)

    loaded = invoke(runner, ["load", paths["dataset"], *data_args])
    assert loaded.exit_code == 0
    assert json.loads(loaded.stdout)["triples"] == 6

    schema = invoke(runner, ["schema", paths["schema"], *SCHEMA_FLAGS, *data_args])
    assert schema.exit_code == 0
    assert json.loads(schema.stdout)["subclass"] == 2

    workload = invoke(runner, ["workload", paths["workload"], *data_args])
    assert workload.exit_code == 0
    assert [q["name"] for q in json.loads(workload.stdout)["queries"]] == ["q1", "q2"]

    search = invoke(runner, ["search", *data_args])
    assert search.exit_code == 0
    result = json.loads(search.stdout)
    assert result["job"] == "job-1"
    assert result["outcome"] == "ok"
    assert result["best_cost"]["total"] == "43/2"

    mats = invoke(runner, ["materialize", *data_args])
    assert mats.exit_code == 0
    assert json.loads(mats.stdout)["views"] == {"v_q1_1": 2, "v_q2_c0o": 2}

    answer = invoke(runner, ["query", "--name", "q1", *data_args])
    assert answer.exit_code == 0
    doc = json.loads(answer.stdout)
    assert doc["match"] is True
    assert doc["rows"] == [["<a>", "<b>"], ["<c>", "<b>"]]

    sql = invoke(runner, ["export-sql", *data_args])
    assert sql.exit_code == 0
    assert sql.stdout.count("CREATE TABLE") == 2


def test_search_accepts_weight_and_budget_flags(
    runner, tmp_path, data_args, fixture_texts
):
    paths = write_fixture_files(tmp_path, fixture_texts)
    invoke(runner, ["load", paths["dataset"], *data_args])
    invoke(runner, ["workload", paths["workload"], *data_args])
    search = invoke(
        runner,
        [
            "search",
            "--strategy", "greedy",
            "--w-eval", "1",
            "--w-maint", "1/2",
            "--w-space", "2",
            "--budget", "20",
            "--max-states", "100",
            *data_args,
        ],
    )
    assert search.exit_code == 0
    result = json.loads(search.stdout)
    assert result["outcome"] == "ok"
    assert json.loads(
        invoke(runner, ["materialize", *data_args]).stdout
    )["job"] == "job-1"


def test_export_files_land_where_asked(runner, tmp_path, data_args, fixture_texts):
    paths = write_fixture_files(tmp_path, fixture_texts)
    invoke(runner, ["load", paths["dataset"], *data_args])
    invoke(runner, ["workload", paths["workload"], *data_args])
    script = tmp_path / "views.sql"
    terms = tmp_path / "terms.tsv"
    result = invoke(
        runner,
        ["export-sql", "-o", str(script), "--dictionary", str(terms), *data_args],
    )
    assert result.exit_code == 0
    assert result.stdout == ""
    assert script.read_text().count("CREATE TABLE") == 2  # no search yet
    assert "4\tiri\tadvisor" in terms.read_text()


def test_errors_print_one_line_and_exit_two(
    runner, tmp_path, data_args, fixture_texts
):
    bad = tmp_path / "broken.nt"
    bad.write_text("<a> <only-two-terms> .\n")
    result = runner.invoke(main, ["load", str(bad), *data_args])
    assert result.exit_code == 2
    assert result.stderr.startswith("error[ntriples-syntax]:")

    result = runner.invoke(main, ["materialize", *data_args])
    assert result.exit_code == 2
    assert result.stderr.startswith("error[not-materialized]:")

    paths = write_fixture_files(tmp_path, fixture_texts)
    invoke(runner, ["load", paths["dataset"], *data_args])
    invoke(runner, ["workload", paths["workload"], *data_args])
    result = runner.invoke(main, ["query", "--name", "q9", *data_args])
    assert result.exit_code == 2
    assert result.stderr.startswith("error[unknown-query]:")


def test_data_dir_can_come_from_the_environment(
    runner, tmp_path, fixture_texts
):
    paths = write_fixture_files(tmp_path, fixture_texts)
    env = {"RDFTUNER_DATA_DIR": str(tmp_path / "env_data")}
    result = invoke(
        runner, ["load", paths["dataset"], "--session", "demo"], env=env
    )
    assert result.exit_code == 0
    assert (tmp_path / "env_data" / "demo" / "dataset.nt").exists()


def test_unknown_strategy_is_a_usage_error(runner, data_args):
    result = runner.invoke(main, ["search", "--strategy", "annealing", *data_args])
    assert result.exit_code == 2
    assert "annealing" in result.stderr


def test_module_entry_point_runs():
    result = subprocess.run(
        [sys.executable, "-m", "rdftuner", "--help"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "Tune materialized views" in result.stdout
