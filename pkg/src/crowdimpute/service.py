"""HTTP survey service: serves questionnaires, gates submissions through
constraint validation, and persists every judgment to an append-only log.

All writes funnel through one lock so a question can never collect more
than k accepted judgments no matter how many clients race; restarting the
service replays the log and lands in the identical state.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .crowd import Judgment
from .questionnaire import AnswerConstraint, Questionnaire, ValidationResult

JOB_FILE = "job.json"
QUESTIONNAIRE_DIR = "questionnaires"
LOG_FILE = "judgments.jsonl"


class ServiceError(ValueError):
    """Malformed submission or unknown resource."""

    def __init__(self, message: str, status_code: int = 400):
        super().__init__(message)
        self.status_code = status_code


@dataclass(frozen=True)
class Job:
    id: str
    questionnaire_ids: tuple[str, ...]
    k: int
    created: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "questionnaire_ids": list(self.questionnaire_ids),
            "k": self.k,
            "created": self.created,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "Job":
        return Job(
            id=d["id"],
            questionnaire_ids=tuple(d["questionnaire_ids"]),
            k=d["k"],
            created=d["created"],
        )


def init_data_dir(
    data_dir: str | Path,
    questionnaires: list[Questionnaire],
    job_id: str = "job-001",
    created: float | None = None,
) -> Job:
    """Lay out a fresh service directory: job.json plus one JSON file per
    questionnaire.  The judgment log starts empty (absent)."""
    root = Path(data_dir)
    (root / QUESTIONNAIRE_DIR).mkdir(parents=True, exist_ok=True)
    if not questionnaires:
        raise ServiceError("cannot initialize a job with no questionnaires")
    ks = {qn.k for qn in questionnaires}
    if len(ks) != 1:
        raise ServiceError(f"questionnaires disagree on k: {sorted(ks)}")
    job = Job(
        id=job_id,
        questionnaire_ids=tuple(qn.id for qn in questionnaires),
        k=ks.pop(),
        created=created if created is not None else time.time(),
    )
    (root / JOB_FILE).write_text(json.dumps(job.to_dict(), indent=2) + "\n")
    for qn in questionnaires:
        path = root / QUESTIONNAIRE_DIR / f"{qn.id}.json"
        path.write_text(json.dumps(qn.to_dict(), indent=2) + "\n")
    return job


class JudgmentStore:
    """Disk-backed judgment collection with a single serialized write path.

    In-memory state is rebuilt from the log on startup; only accepted
    judgments count toward filling a question.
    """

    def __init__(self, data_dir: str | Path, k_override: int | None = None):
        self.root = Path(data_dir)
        job_path = self.root / JOB_FILE
        if not job_path.exists():
            raise ServiceError(f"no {JOB_FILE} in {self.root}", status_code=404)
        self.job = Job.from_dict(json.loads(job_path.read_text()))
        if k_override is not None:
            if k_override < 1:
                raise ServiceError("k override must be >= 1")
            self.job = Job(self.job.id, self.job.questionnaire_ids, k_override, self.job.created)

        self.questionnaires: dict[str, Questionnaire] = {}
        self.question_to_questionnaire: dict[str, str] = {}
        for qn_id in self.job.questionnaire_ids:
            path = self.root / QUESTIONNAIRE_DIR / f"{qn_id}.json"
            qn = Questionnaire.from_dict(json.loads(path.read_text()))
            self.questionnaires[qn.id] = qn
            for q in qn.questions:
                self.question_to_questionnaire[q.id] = qn.id

        self._lock = threading.Lock()
        self._accepted_workers: dict[str, set[str]] = {
            qid: set() for qid in self.question_to_questionnaire
        }
        self._accepted_counts: dict[str, int] = {qid: 0 for qid in self.question_to_questionnaire}
        self._replay()

    @property
    def log_path(self) -> Path:
        return self.root / LOG_FILE

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec["accepted"] and rec["question_id"] in self._accepted_counts:
                    self._accepted_counts[rec["question_id"]] += 1
                    self._accepted_workers[rec["question_id"]].add(rec["worker_id"])

    def questionnaire(self, questionnaire_id: str) -> Questionnaire:
        qn = self.questionnaires.get(questionnaire_id)
        if qn is None:
            raise ServiceError(f"unknown questionnaire {questionnaire_id!r}", status_code=404)
        return qn

    def _append(self, questionnaire_id: str, judgment: Judgment) -> None:
        record = {**judgment.to_dict(), "questionnaire_id": questionnaire_id}
        with open(self.log_path, "a") as fh:
            fh.write(json.dumps(record) + "\n")

    def submit(self, questionnaire_id: str, worker_id: str, answers: Mapping[str, object]) -> list[dict]:
        """Validate and store one worker's answers; returns one outcome per
        question in questionnaire order.

        A rejected answer is logged too (accepted=false) so the log is a
        complete audit trail; only accepted ones count toward k.
        """
        qn = self.questionnaire(questionnaire_id)
        if not isinstance(worker_id, str) or not worker_id.strip():
            raise ServiceError("worker_id must be a non-empty string")
        worker_id = worker_id.strip()
        known = {q.id for q in qn.questions}
        unknown = set(answers) - known
        if unknown:
            raise ServiceError(f"answers reference unknown questions: {sorted(unknown)}")

        outcomes = []
        with self._lock:
            for q in qn.questions:
                if q.id not in answers:
                    continue
                raw = answers[q.id]
                if self._accepted_counts[q.id] >= self.job.k:
                    accepted, reason, value = False, "filled", raw
                elif worker_id in self._accepted_workers[q.id]:
                    accepted, reason, value = False, "duplicate worker", raw
                else:
                    result = self.validate(raw, q.constraint)
                    accepted, reason = result.ok, result.reason
                    value = result.value if result.ok else raw
                judgment = Judgment(
                    question_id=q.id,
                    worker_id=worker_id,
                    raw_answer=value if accepted else _jsonable(raw),
                    accepted=accepted,
                    timestamp=time.time(),
                    reason=reason,
                )
                self._append(questionnaire_id, judgment)
                if accepted:
                    self._accepted_counts[q.id] += 1
                    self._accepted_workers[q.id].add(worker_id)
                outcomes.append(
                    {"question_id": q.id, "status": "accepted" if accepted else "rejected", "reason": reason}
                )
        return outcomes

    @staticmethod
    def validate(raw: object, constraint: AnswerConstraint) -> ValidationResult:
        return constraint.check(raw)

    def job_status(self, job_id: str) -> dict:
        if job_id != self.job.id:
            raise ServiceError(f"unknown job {job_id!r}", status_code=404)
        with self._lock:
            counts = dict(self._accepted_counts)
        k = self.job.k
        questions = {
            qid: {"accepted": n, "status": "filled" if n >= k else "open"}
            for qid, n in sorted(counts.items())
        }
        total = sum(counts.values())
        capacity = k * len(counts)
        return {
            "job_id": self.job.id,
            "k": k,
            "questions": questions,
            "accepted_total": total,
            "progress": total / capacity if capacity else 0.0,
        }


def _jsonable(raw: object):
    if isinstance(raw, (str, int, float, bool)) or raw is None:
        return raw
    return str(raw)


# -- HTTP layer ----------------------------------------------------------------


def create_app(store: JudgmentStore, static_dir: str | Path | None = None) -> FastAPI:
    """FastAPI app over a JudgmentStore; optionally serves a static client
    bundle at the web root."""
    app = FastAPI(title="survey service", docs_url=None, redoc_url=None)

    @app.exception_handler(ServiceError)
    async def on_service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc)})

    @app.get("/api/questionnaires")
    def list_questionnaires():
        return {"job_id": store.job.id, "questionnaire_ids": list(store.questionnaires)}

    @app.get("/api/questionnaires/{questionnaire_id}")
    def get_questionnaire(questionnaire_id: str):
        return store.questionnaire(questionnaire_id).to_dict()

    @app.post("/api/questionnaires/{questionnaire_id}/submissions")
    async def post_submission(questionnaire_id: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ServiceError("request body must be JSON")
        if not isinstance(body, dict) or not isinstance(body.get("answers"), dict):
            raise ServiceError('body must be {"worker_id": str, "answers": {question_id: value}}')
        outcomes = store.submit(questionnaire_id, body.get("worker_id", ""), body["answers"])
        return {"outcomes": outcomes}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        return store.job_status(job_id)

    @app.get("/api/job")
    def get_default_job():
        return store.job_status(store.job.id)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")
    else:

        @app.get("/")
        def index():
            return JSONResponse(
                {
                    "job": store.job.id,
                    "questionnaires": list(store.questionnaires),
                    "note": "no static client bundle configured",
                }
            )

    return app


def serve(
    data_dir: str | Path,
    port: int = 8000,
    k_override: int | None = None,
    static_dir: str | Path | None = None,
    host: str = "127.0.0.1",
) -> None:
    import uvicorn

    store = JudgmentStore(data_dir, k_override=k_override)
    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
