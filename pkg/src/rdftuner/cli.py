"""Command line interface.

Every command operates on a named session inside a data directory
(flag --data-dir or env RDFTUNER_DATA_DIR), so the CLI and the HTTP
service can share sessions.  search runs synchronously and prints the
result document; serve starts the HTTP service (env RDFTUNER_ADDR or
--host/--port).  Tuner errors print one line to stderr and exit 2.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path
from typing import Callable, Optional

import click

from .errors import TunerError
from .search import STRATEGIES
from .sessions import SessionStore


def _store(data_dir: str, session: str) -> tuple[SessionStore, str]:
    store = SessionStore(Path(data_dir))
    return store, store.create_session(session)


def _session_options(f: Callable) -> Callable:
    f = click.option(
        "--session",
        "-s",
        default="default",
        show_default=True,
        help="Session name inside the data directory.",
    )(f)
    f = click.option(
        "--data-dir",
        "-d",
        envvar="RDFTUNER_DATA_DIR",
        default="rdftuner_data",
        show_default=True,
        help="Directory holding all sessions.",
    )(f)
    return f


def _reports_errors(f: Callable) -> Callable:
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except TunerError as exc:
            click.echo(f"error[{exc.code}]: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _emit(doc: dict) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


@click.group()
@click.version_option(package_name="rdftuner")
def main() -> None:
    """Tune materialized views for an RDF dataset and query workload."""


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@_session_options
@_reports_errors
def load(dataset: str, data_dir: str, session: str) -> None:
    """Load an N-Triples DATASET into the session."""
    store, sid = _store(data_dir, session)
    _emit(store.put_dataset(sid, Path(dataset).read_text()))


@main.command()
@click.argument("schema", type=click.Path(exists=True, dir_okay=False))
@click.option("--type-iri", default=None, help="IRI used for rdf:type statements.")
@click.option("--subclass-iri", default=None, help="IRI used for subclass statements.")
@click.option(
    "--subproperty-iri", default=None, help="IRI used for subproperty statements."
)
@click.option("--domain-iri", default=None, help="IRI used for domain statements.")
@click.option("--range-iri", default=None, help="IRI used for range statements.")
@_session_options
@_reports_errors
def schema(
    schema: str,
    type_iri: Optional[str],
    subclass_iri: Optional[str],
    subproperty_iri: Optional[str],
    domain_iri: Optional[str],
    range_iri: Optional[str],
    data_dir: str,
    session: str,
) -> None:
    """Load an RDFS SCHEMA (N-Triples) into the session."""
    store, sid = _store(data_dir, session)
    vocabulary = {
        "type": type_iri,
        "subclass": subclass_iri,
        "subproperty": subproperty_iri,
        "domain": domain_iri,
        "range": range_iri,
    }
    _emit(store.put_schema(sid, Path(schema).read_text(), vocabulary))


@main.command()
@click.argument("workload", type=click.Path(exists=True, dir_okay=False))
@_session_options
@_reports_errors
def workload(workload: str, data_dir: str, session: str) -> None:
    """Load a WORKLOAD (JSON list of named weighted queries)."""
    store, sid = _store(data_dir, session)
    _emit(store.put_workload(sid, Path(workload).read_text()))


@main.command()
@click.option(
    "--strategy",
    type=click.Choice(STRATEGIES),
    default="exhaustive-bfs",
    show_default=True,
)
@click.option("--w-eval", default="1", show_default=True, help="Evaluation weight.")
@click.option("--w-maint", default="1", show_default=True, help="Maintenance weight.")
@click.option("--w-space", default="1", show_default=True, help="Space weight.")
@click.option("--budget", default=None, help="Space budget; unlimited when omitted.")
@click.option("--max-states", type=int, default=10000, show_default=True)
@click.option("--timeout", type=float, default=300.0, show_default=True)
@click.option("--allow-property-cuts", is_flag=True, default=False)
@click.option("--branch-cap", type=int, default=1024, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_session_options
@_reports_errors
def search(
    strategy: str,
    w_eval: str,
    w_maint: str,
    w_space: str,
    budget: Optional[str],
    max_states: int,
    timeout: float,
    allow_property_cuts: bool,
    branch_cap: int,
    seed: int,
    data_dir: str,
    session: str,
) -> None:
    """Search view configurations and store the result as a job."""
    store, sid = _store(data_dir, session)
    config = {
        "strategy": strategy,
        "weights": {"eval": w_eval, "maintenance": w_maint, "space": w_space},
        "space_budget": budget,
        "max_states": max_states,
        "timeout": timeout,
        "allow_property_cuts": allow_property_cuts,
        "branch_cap": branch_cap,
        "seed": seed,
    }
    job = store.start_search(sid, config, background=False)
    _emit({"job": job, **store.read_result(sid, job)})


@main.command()
@click.option("--job", default=None, help="Job to materialize; latest when omitted.")
@_session_options
@_reports_errors
def materialize(job: Optional[str], data_dir: str, session: str) -> None:
    """Materialize the best state of a finished search job."""
    store, sid = _store(data_dir, session)
    _emit(store.materialize(sid, job))


@main.command()
@click.option("--name", required=True, help="Workload query to evaluate.")
@click.option(
    "--mode",
    type=click.Choice(("views", "baseline", "both")),
    default="both",
    show_default=True,
)
@_session_options
@_reports_errors
def query(name: str, mode: str, data_dir: str, session: str) -> None:
    """Evaluate one workload query over views, the base table, or both."""
    store, sid = _store(data_dir, session)
    _emit(store.query(sid, name, mode))


@main.command("export-sql")
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="File for the SQL script; stdout when omitted.",
)
@click.option(
    "--dictionary",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Also write the term dictionary as TSV to this file.",
)
@_session_options
@_reports_errors
def export_sql(
    output: Optional[str], dictionary: Optional[str], data_dir: str, session: str
) -> None:
    """Export the current best view configuration as SQL DDL."""
    store, sid = _store(data_dir, session)
    script = store.export_sql(sid)
    if output is None:
        click.echo(script, nl=False)
    else:
        Path(output).write_text(script)
    if dictionary is not None:
        Path(dictionary).write_text(store.export_dictionary(sid))


@main.command()
@click.option("--host", default=None, help="Bind address; overrides RDFTUNER_ADDR.")
@click.option("--port", type=int, default=None, help="Port; overrides RDFTUNER_ADDR.")
@click.option(
    "--data-dir",
    "-d",
    envvar="RDFTUNER_DATA_DIR",
    default="rdftuner_data",
    show_default=True,
)
@_reports_errors
def serve(host: Optional[str], port: Optional[int], data_dir: str) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    addr = os.environ.get("RDFTUNER_ADDR", "")
    if host is None:
        host = addr.rsplit(":", 1)[0] if ":" in addr else (addr or "127.0.0.1")
    if port is None:
        port = int(addr.rsplit(":", 1)[1]) if ":" in addr else 8000
    uvicorn.run(create_app(Path(data_dir)), host=host, port=port)


if __name__ == "__main__":
    main()
