"""On-disk sessions: uploads, background search jobs, and queries.

A session is one directory holding the raw uploads (dataset.nt,
schema.nt, workload.json) plus one subdirectory per search job with
its config, an append-only progress event log, and the final result.
Loaded artifacts are rebuilt from the files in a fixed order (dataset,
then schema, then workload), so dictionary ids are reproducible across
processes and restarts.  One mutating job runs per session at a time;
reads never block.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .cost import QualityWeights
from .errors import (
    EmptyWorkloadError,
    JobInProgressError,
    SessionError,
    TunerError,
    UnknownJobError,
    UnknownQueryError,
)
from .executor import (
    answer_query,
    decode_rows,
    evaluate_union,
    export_views_sql,
    materialize_state,
)
from .queries import Workload, load_workload, to_fraction
from .reasoner import (
    DEFAULT_BRANCH_CAP,
    RDFSchema,
    SchemaClosure,
    Vocabulary,
    compute_closure,
    parse_schema,
    reformulate_query,
    reformulate_workload,
)
from .search import SearchConfig, SearchResult, run_search
from .store import (
    DataStatistics,
    Dictionary,
    TripleTable,
    load_dataset,
    parse_ntriples,
)
from .views import State, export_state, initial_state, state_from_doc

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


@dataclass
class SessionData:
    """Artifacts rebuilt from one session directory."""

    dictionary: Optional[Dictionary] = None
    table: Optional[TripleTable] = None
    stats: Optional[DataStatistics] = None
    vocabulary: Vocabulary = Vocabulary()
    schema: Optional[RDFSchema] = None
    closure: Optional[SchemaClosure] = None
    workload: Optional[Workload] = None

    def require_dataset(self) -> None:
        if self.table is None:
            raise SessionError("missing-dataset", "load a dataset first")

    def require_workload(self) -> Workload:
        self.require_dataset()
        if self.workload is None:
            raise EmptyWorkloadError("load a workload first")
        return self.workload


def search_config_from_doc(doc: dict) -> SearchConfig:
    """Build a SearchConfig from a request document, with defaults."""
    try:
        weights_doc = doc.get("weights") or {}
        weights = QualityWeights(
            w_eval=to_fraction(weights_doc.get("eval", 1)),
            w_maint=to_fraction(weights_doc.get("maintenance", 1)),
            w_space=to_fraction(weights_doc.get("space", 1)),
        )
        budget = doc.get("space_budget")
        return SearchConfig(
            strategy=doc.get("strategy", "exhaustive-bfs"),
            weights=weights,
            space_budget=None if budget is None else to_fraction(budget),
            max_states=int(doc.get("max_states", 10000)),
            timeout=float(doc.get("timeout", 300.0)),
            allow_property_cuts=bool(doc.get("allow_property_cuts", False)),
            branch_cap=int(doc.get("branch_cap", DEFAULT_BRANCH_CAP)),
            seed=int(doc.get("seed", 0)),
        )
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise SessionError("invalid-config", str(exc)) from exc


class SessionStore:
    """All session state under one root directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._running: dict[str, str] = {}
        self._cache: dict[str, SessionData] = {}

    # -- directories and files --

    def create_session(self, session_id: Optional[str] = None) -> str:
        sid = session_id or uuid.uuid4().hex[:12]
        if not _SESSION_ID_RE.match(sid):
            raise SessionError(
                "invalid-session-id",
                "session ids use letters, digits, hyphen, underscore",
            )
        directory = self.root / sid
        directory.mkdir(parents=True, exist_ok=True)
        meta = directory / "meta.json"
        if not meta.exists():
            meta.write_text(json.dumps({"created_at": time.time()}))
        return sid

    def _dir(self, sid: str) -> Path:
        directory = self.root / sid
        if not directory.is_dir():
            raise SessionError("unknown-session", f"no session named {sid!r}")
        return directory

    def _jobs_dir(self, sid: str) -> Path:
        return self._dir(sid) / "jobs"

    def _job_dir(self, sid: str, job: str) -> Path:
        directory = self._jobs_dir(sid) / job
        if not directory.is_dir():
            raise UnknownJobError(f"no job named {job!r} in session {sid!r}")
        return directory

    def _invalidate(self, sid: str) -> None:
        with self._lock:
            self._cache.pop(sid, None)

    def _reject_if_busy(self, sid: str) -> None:
        with self._lock:
            job = self._running.get(sid)
        if job is not None:
            raise JobInProgressError(f"job {job} is still running on session {sid!r}")

    # -- artifact loading --

    def load(self, sid: str) -> SessionData:
        with self._lock:
            cached = self._cache.get(sid)
        if cached is not None:
            return cached
        directory = self._dir(sid)
        data = SessionData()
        dataset_file = directory / "dataset.nt"
        if dataset_file.exists():
            triples = parse_ntriples(dataset_file.read_text())
            data.dictionary, data.table, data.stats = load_dataset(triples)
        vocab_file = directory / "schema_vocab.json"
        if vocab_file.exists():
            data.vocabulary = Vocabulary(**json.loads(vocab_file.read_text()))
        schema_file = directory / "schema.nt"
        if schema_file.exists() and data.dictionary is not None:
            statements = parse_ntriples(schema_file.read_text())
            data.schema = parse_schema(statements, data.dictionary, data.vocabulary)
            data.closure = compute_closure(data.schema)
        workload_file = directory / "workload.json"
        if workload_file.exists() and data.dictionary is not None:
            data.workload = load_workload(workload_file.read_text(), data.dictionary)
        with self._lock:
            self._cache[sid] = data
        return data

    # -- uploads --

    def put_dataset(self, sid: str, text: str) -> dict:
        self._reject_if_busy(sid)
        directory = self._dir(sid)
        triples = parse_ntriples(text)
        directory.joinpath("dataset.nt").write_text(text)
        self._invalidate(sid)
        data = self.load(sid)
        return {
            "triples": len(data.table),
            "terms": len(data.dictionary),
            "properties": data.stats.distinct_properties,
            "parsed": len(triples),
        }

    def put_schema(
        self, sid: str, text: str, vocabulary: Optional[dict] = None
    ) -> dict:
        self._reject_if_busy(sid)
        directory = self._dir(sid)
        data = self.load(sid)
        data.require_dataset()
        vocab = Vocabulary(**{k: v for k, v in (vocabulary or {}).items() if v})
        statements = parse_ntriples(text)
        schema = parse_schema(statements, data.dictionary, vocab)
        directory.joinpath("schema.nt").write_text(text)
        directory.joinpath("schema_vocab.json").write_text(
            json.dumps(
                {
                    "type": vocab.type,
                    "subclass": vocab.subclass,
                    "subproperty": vocab.subproperty,
                    "domain": vocab.domain,
                    "range": vocab.range,
                }
            )
        )
        self._invalidate(sid)
        return {
            "subclass": len(schema.subclass_pairs),
            "subproperty": len(schema.subproperty_pairs),
            "domain": len(schema.domains),
            "range": len(schema.ranges),
            "ignored": schema.ignored,
        }

    def put_workload(self, sid: str, text: str) -> dict:
        self._reject_if_busy(sid)
        directory = self._dir(sid)
        data = self.load(sid)
        data.require_dataset()
        workload = load_workload(text, data.dictionary)
        directory.joinpath("workload.json").write_text(text)
        self._invalidate(sid)
        return {
            "queries": [
                {
                    "name": q.name,
                    "weight": str(q.weight),
                    "atoms": len(q.body),
                    "head": list(q.head),
                }
                for q in workload
            ]
        }

    # -- search jobs --

    def _next_job_id(self, sid: str) -> str:
        jobs = self._jobs_dir(sid)
        jobs.mkdir(exist_ok=True)
        highest = 0
        for entry in jobs.iterdir():
            match = re.fullmatch(r"job-(\d+)", entry.name)
            if match:
                highest = max(highest, int(match.group(1)))
        return f"job-{highest + 1}"

    def start_search(
        self, sid: str, config_doc: dict, background: bool = True
    ) -> str:
        data = self.load(sid)
        workload = data.require_workload()
        config = search_config_from_doc(config_doc)
        unions = reformulate_workload(
            workload, data.closure, data.schema or RDFSchema(), config.branch_cap
        )
        initial = initial_state(unions)

        with self._lock:
            if sid in self._running:
                raise JobInProgressError(
                    f"job {self._running[sid]} is still running on session {sid!r}"
                )
            job = self._next_job_id(sid)
            job_dir = self._jobs_dir(sid) / job
            job_dir.mkdir()
            self._running[sid] = job
        job_dir.joinpath("config.json").write_text(json.dumps(config_doc, indent=2))

        def work():
            try:
                self._run_job(sid, job_dir, initial, data, config, workload)
            finally:
                with self._lock:
                    self._running.pop(sid, None)

        if background:
            thread = threading.Thread(target=work, daemon=True)
            thread.start()
        else:
            work()
        return job

    def _run_job(
        self,
        sid: str,
        job_dir: Path,
        initial: State,
        data: SessionData,
        config: SearchConfig,
        workload: Workload,
    ) -> None:
        events_path = job_dir / "events.jsonl"
        result_doc: dict
        with events_path.open("w") as events:

            def progress(event: dict) -> None:
                events.write(json.dumps(event, sort_keys=True) + "\n")
                events.flush()

            try:
                result = run_search(
                    initial,
                    data.stats,
                    config,
                    query_weights=workload.weights(),
                    progress=progress,
                )
                job_dir.joinpath("trace.json").write_text(result.trace.to_json())
                result_doc = self._result_doc(result, data.dictionary)
            except TunerError as exc:
                result_doc = {
                    "outcome": "error",
                    "error": exc.code,
                    "message": str(exc),
                }
        tmp = job_dir / "result.json.tmp"
        tmp.write_text(json.dumps(result_doc, sort_keys=True, indent=2))
        os.replace(tmp, job_dir / "result.json")

    @staticmethod
    def _result_doc(result: SearchResult, dictionary: Dictionary) -> dict:
        doc = {
            "outcome": result.outcome,
            "terminated_by": result.terminated_by,
            "counters": result.trace.to_doc()["counters"],
            "best": None,
            "best_cost": None,
        }
        if result.best is not None:
            doc["best"] = export_state(result.best, dictionary)
            doc["best_cost"] = result.best_cost.to_doc()
        return doc

    def read_progress(self, sid: str, job: str, cursor: int = 0) -> dict:
        job_dir = self._job_dir(sid, job)
        events: list[dict] = []
        events_path = job_dir / "events.jsonl"
        if events_path.exists():
            lines = events_path.read_text().splitlines()
            events = [json.loads(line) for line in lines[cursor:] if line.strip()]
            end = len(lines)
        else:
            end = cursor
        result_path = job_dir / "result.json"
        done = result_path.exists()
        result = json.loads(result_path.read_text()) if done else None
        return {"events": events, "cursor": end, "done": done, "result": result}

    def read_result(self, sid: str, job: str) -> dict:
        result_path = self._job_dir(sid, job) / "result.json"
        if not result_path.exists():
            raise SessionError("not-finished", f"job {job} has not finished")
        return json.loads(result_path.read_text())

    def latest_finished_job(self, sid: str) -> Optional[str]:
        jobs = self._jobs_dir(sid)
        if not jobs.is_dir():
            return None
        finished = []
        for entry in jobs.iterdir():
            match = re.fullmatch(r"job-(\d+)", entry.name)
            if match and (entry / "result.json").exists():
                finished.append((int(match.group(1)), entry.name))
        if not finished:
            return None
        return max(finished)[1]

    # -- materialization and queries --

    def _best_state(self, sid: str, job: str) -> State:
        result = self.read_result(sid, job)
        if result.get("best") is None:
            raise SessionError(
                "no-feasible-state",
                f"job {job} finished without a feasible state",
            )
        data = self.load(sid)
        return state_from_doc(result["best"], data.dictionary)

    def materialize(self, sid: str, job: Optional[str] = None) -> dict:
        self._reject_if_busy(sid)
        job = job or self.latest_finished_job(sid)
        if job is None:
            raise SessionError("not-materialized", "no finished search to materialize")
        data = self.load(sid)
        data.require_dataset()
        state = self._best_state(sid, job)
        mats = materialize_state(state, data.table)
        doc = {
            "job": job,
            "views": {view_id: len(rel) for view_id, rel in mats.items()},
        }
        self._dir(sid).joinpath("materialized.json").write_text(
            json.dumps(doc, sort_keys=True, indent=2)
        )
        return doc

    def _materialized_job(self, sid: str) -> str:
        marker = self._dir(sid) / "materialized.json"
        if not marker.exists():
            raise SessionError(
                "not-materialized", "run materialize after a finished search"
            )
        return json.loads(marker.read_text())["job"]

    def query(self, sid: str, name: str, mode: str = "both") -> dict:
        if mode not in ("views", "baseline", "both"):
            raise SessionError("invalid-mode", "mode must be views, baseline, or both")
        data = self.load(sid)
        workload = data.require_workload()
        try:
            query = workload.by_name(name)
        except KeyError:
            raise UnknownQueryError(name) from None

        doc: dict = {"name": name, "mode": mode, "timings": {}}
        baseline_rows: Optional[list] = None
        views_rows: Optional[list] = None

        if mode in ("baseline", "both"):
            union = reformulate_query(query, data.closure, data.schema or RDFSchema())
            started = time.perf_counter()
            relation = evaluate_union(union, data.table)
            doc["timings"]["baseline"] = time.perf_counter() - started
            baseline_rows = decode_rows(relation.rows, data.dictionary)
            doc["columns"] = list(relation.columns)

        if mode in ("views", "both"):
            job = self._materialized_job(sid)
            state = self._best_state(sid, job)
            mats = materialize_state(state, data.table)
            columns, views_rows, elapsed = answer_query(
                name, state, mats, data.dictionary
            )
            doc["timings"]["views"] = elapsed
            doc["columns"] = list(columns)

        rows = views_rows if views_rows is not None else baseline_rows
        doc["rows"] = [list(row) for row in rows]
        if mode == "both":
            doc["match"] = baseline_rows == views_rows
        return doc

    def export_sql(self, sid: str) -> str:
        data = self.load(sid)
        data.require_dataset()
        marker = self._dir(sid) / "materialized.json"
        job: Optional[str] = None
        if marker.exists():
            job = json.loads(marker.read_text())["job"]
        else:
            job = self.latest_finished_job(sid)
        if job is not None:
            result = self.read_result(sid, job)
            if result.get("best") is not None:
                return export_views_sql(state_from_doc(result["best"], data.dictionary))
        workload = data.require_workload()
        unions = reformulate_workload(
            workload, data.closure, data.schema or RDFSchema(), DEFAULT_BRANCH_CAP
        )
        return export_views_sql(initial_state(unions))

    def export_dictionary(self, sid: str) -> str:
        data = self.load(sid)
        data.require_dataset()
        return data.dictionary.dump_tsv()

    def running_job(self, sid: str) -> Optional[str]:
        with self._lock:
            return self._running.get(sid)
