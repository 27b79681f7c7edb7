"""Judgment collection service: k-gating, audit log, replay, HTTP endpoints."""

from __future__ import annotations

import json
import threading

import pytest
from fastapi.testclient import TestClient

from crowdimpute.dataset import CATEGORICAL, CONTINUOUS, ColumnSpec, Dataset, mask_cells
from crowdimpute.questionnaire import batch, render_question
from crowdimpute.service import (
    JudgmentStore,
    ServiceError,
    create_app,
    init_data_dir,
)


def _make_questionnaires(k=3):
    cols = (
        ColumnSpec("age", CONTINUOUS, valid_range=(3.0, 19.0), unit="years"),
        ColumnSpec("height", CONTINUOUS, valid_range=(45.0, 75.0)),
        ColumnSpec("gender", CATEGORICAL, categories=("Male", "Female")),
    )
    rows = [
        (None, 60.0, "Male"),
        (11.0, None, "Female"),
        (9.0, 55.0, None),
    ]
    mask = [(True, False, False), (False, True, False), (False, False, True)]
    d = Dataset(cols, rows, mask)
    qs = [render_question(d, cell) for cell in [(0, "age"), (1, "height"), (2, "gender")]]
    return batch(qs, "some intro", (), k=k)


@pytest.fixture
def store(tmp_path):
    qns = _make_questionnaires(k=3)
    init_data_dir(tmp_path, qns, job_id="job-test", created=0.0)
    return JudgmentStore(tmp_path)


def test_init_data_dir_layout(tmp_path):
    qns = _make_questionnaires(k=3)
    job = init_data_dir(tmp_path, qns, job_id="job-test", created=0.0)
    assert (tmp_path / "job.json").exists()
    assert (tmp_path / "questionnaires" / f"{qns[0].id}.json").exists()
    assert job.k == 3
    assert job.questionnaire_ids == tuple(qn.id for qn in qns)


def test_init_data_dir_requires_uniform_k(tmp_path):
    a = _make_questionnaires(k=3)[0]
    b = _make_questionnaires(k=5)[0]
    with pytest.raises(ServiceError):
        init_data_dir(tmp_path, [a, b])


def test_store_requires_job_file(tmp_path):
    with pytest.raises(ServiceError) as e:
        JudgmentStore(tmp_path)
    assert e.value.status_code == 404


def test_submit_accepts_valid_answers(store):
    qn_id = store.job.questionnaire_ids[0]
    qn = store.questionnaire(qn_id)
    answers = {qn.questions[0].id: "7", qn.questions[2].id: "Female"}
    outcomes = store.submit(qn_id, "w1", answers)
    assert [o["status"] for o in outcomes] == ["accepted", "accepted"]
    status = store.job_status("job-test")
    assert status["questions"][qn.questions[0].id]["accepted"] == 1
    assert status["questions"][qn.questions[1].id]["accepted"] == 0


def test_submit_rejects_constraint_violation_with_reason(store):
    qn_id = store.job.questionnaire_ids[0]
    qn = store.questionnaire(qn_id)
    age_q = qn.questions[0].id
    outcomes = store.submit(qn_id, "w1", {age_q: "25"})
    assert outcomes == [
        {"question_id": age_q, "status": "rejected", "reason": "out of range 3–19"}
    ]
    # rejected answers do not consume capacity
    assert store.job_status("job-test")["questions"][age_q]["accepted"] == 0


def test_submit_rejects_duplicate_worker(store):
    qn_id = store.job.questionnaire_ids[0]
    age_q = store.questionnaire(qn_id).questions[0].id
    assert store.submit(qn_id, "w1", {age_q: "7"})[0]["status"] == "accepted"
    outcome = store.submit(qn_id, "w1", {age_q: "8"})[0]
    assert outcome["status"] == "rejected"
    assert outcome["reason"] == "duplicate worker"


def test_submit_rejects_when_filled(store):
    qn_id = store.job.questionnaire_ids[0]
    age_q = store.questionnaire(qn_id).questions[0].id
    for i in range(3):
        assert store.submit(qn_id, f"w{i}", {age_q: "7"})[0]["status"] == "accepted"
    outcome = store.submit(qn_id, "w99", {age_q: "7"})[0]
    assert outcome == {"question_id": age_q, "status": "rejected", "reason": "filled"}


def test_submit_unknown_questionnaire_is_404(store):
    with pytest.raises(ServiceError) as e:
        store.submit("qn-zzz", "w1", {})
    assert e.value.status_code == 404


def test_submit_unknown_question_rejected(store):
    qn_id = store.job.questionnaire_ids[0]
    with pytest.raises(ServiceError) as e:
        store.submit(qn_id, "w1", {"q9999-zzz": "1"})
    assert e.value.status_code == 400


def test_submit_requires_worker_id(store):
    qn_id = store.job.questionnaire_ids[0]
    age_q = store.questionnaire(qn_id).questions[0].id
    with pytest.raises(ServiceError):
        store.submit(qn_id, "   ", {age_q: "7"})


def test_log_keeps_rejected_lines(store):
    qn_id = store.job.questionnaire_ids[0]
    age_q = store.questionnaire(qn_id).questions[0].id
    store.submit(qn_id, "w1", {age_q: "7"})
    store.submit(qn_id, "w2", {age_q: "25"})
    records = [json.loads(l) for l in store.log_path.read_text().splitlines()]
    assert len(records) == 2
    assert records[0]["accepted"] is True
    assert records[1]["accepted"] is False
    assert records[1]["reason"] == "out of range 3–19"
    assert all(r["questionnaire_id"] == qn_id for r in records)


def test_restart_replays_log_to_identical_state(tmp_path):
    qns = _make_questionnaires(k=3)
    init_data_dir(tmp_path, qns, job_id="job-test", created=0.0)
    store = JudgmentStore(tmp_path)
    qn_id = store.job.questionnaire_ids[0]
    qn = store.questionnaire(qn_id)
    age_q = qn.questions[0].id
    store.submit(qn_id, "w1", {age_q: "7"})
    store.submit(qn_id, "w2", {age_q: "200"})  # rejected
    store.submit(qn_id, "w3", {age_q: "9"})
    before = store.job_status("job-test")

    reloaded = JudgmentStore(tmp_path)
    after = reloaded.job_status("job-test")
    assert after == before
    # the duplicate-worker guard survives the restart too
    assert reloaded.submit(qn_id, "w1", {age_q: "8"})[0]["reason"] == "duplicate worker"


def test_job_status_shape(store):
    status = store.job_status("job-test")
    assert status["job_id"] == "job-test"
    assert status["k"] == 3
    assert status["accepted_total"] == 0
    assert status["progress"] == 0.0
    assert all(v["status"] == "open" for v in status["questions"].values())
    with pytest.raises(ServiceError) as e:
        store.job_status("job-zzz")
    assert e.value.status_code == 404


def test_progress_reaches_one_when_all_filled(store):
    for qn_id in store.job.questionnaire_ids:
        qn = store.questionnaire(qn_id)
        for i in range(3):
            answers = {}
            for q in qn.questions:
                if q.kind == CATEGORICAL:
                    answers[q.id] = q.constraint.choices[0]
                else:
                    answers[q.id] = str(q.constraint.lo + 1.0)
            store.submit(qn_id, f"w{i}", answers)
    status = store.job_status("job-test")
    assert status["progress"] == 1.0
    assert all(v["status"] == "filled" for v in status["questions"].values())


def test_k_override(tmp_path):
    qns = _make_questionnaires(k=3)
    init_data_dir(tmp_path, qns, job_id="job-test", created=0.0)
    store = JudgmentStore(tmp_path, k_override=1)
    assert store.job.k == 1
    qn_id = store.job.questionnaire_ids[0]
    age_q = store.questionnaire(qn_id).questions[0].id
    assert store.submit(qn_id, "w1", {age_q: "7"})[0]["status"] == "accepted"
    assert store.submit(qn_id, "w2", {age_q: "7"})[0]["reason"] == "filled"
    with pytest.raises(ServiceError):
        JudgmentStore(tmp_path, k_override=0)


def test_concurrent_submitters_never_exceed_k(tmp_path):
    qns = _make_questionnaires(k=5)
    init_data_dir(tmp_path, qns, job_id="job-test", created=0.0)
    store = JudgmentStore(tmp_path)
    qn_id = store.job.questionnaire_ids[0]
    age_q = store.questionnaire(qn_id).questions[0].id

    results: list[str] = []
    barrier = threading.Barrier(20)

    def worker(i: int) -> None:
        barrier.wait()
        out = store.submit(qn_id, f"w{i:03d}", {age_q: "7"})
        results.append(out[0]["status"])

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(20)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results.count("accepted") == 5
    assert store.job_status("job-test")["questions"][age_q]["accepted"] == 5


# -- HTTP endpoints -----------------------------------------------------------------


@pytest.fixture
def client(store):
    return TestClient(create_app(store))


def test_http_list_questionnaires(client, store):
    res = client.get("/api/questionnaires")
    assert res.status_code == 200
    body = res.json()
    assert body["job_id"] == store.job.id
    assert body["questionnaire_ids"] == list(store.job.questionnaire_ids)


def test_http_get_questionnaire(client, store):
    qn_id = store.job.questionnaire_ids[0]
    res = client.get(f"/api/questionnaires/{qn_id}")
    assert res.status_code == 200
    body = res.json()
    assert body["id"] == qn_id
    assert body["k"] == 3
    assert len(body["questions"]) == 3
    assert body["questions"][0]["constraint"]["kind"] == "numeric_range"
    res = client.get("/api/questionnaires/qn-zzz")
    assert res.status_code == 404
    assert "error" in res.json()


def test_http_submission_flow(client, store):
    qn_id = store.job.questionnaire_ids[0]
    qn = store.questionnaire(qn_id)
    age_q = qn.questions[0].id
    res = client.post(
        f"/api/questionnaires/{qn_id}/submissions",
        json={"worker_id": "web-1", "answers": {age_q: "7"}},
    )
    assert res.status_code == 200
    assert res.json()["outcomes"][0]["status"] == "accepted"

    res = client.post(
        f"/api/questionnaires/{qn_id}/submissions",
        json={"worker_id": "web-2", "answers": {age_q: "25"}},
    )
    assert res.json()["outcomes"][0] == {
        "question_id": age_q,
        "status": "rejected",
        "reason": "out of range 3–19",
    }


def test_http_submission_validates_body(client, store):
    qn_id = store.job.questionnaire_ids[0]
    res = client.post(f"/api/questionnaires/{qn_id}/submissions", json={"answers": []})
    assert res.status_code == 400
    res = client.post(
        f"/api/questionnaires/{qn_id}/submissions",
        content=b"not json",
        headers={"content-type": "application/json"},
    )
    assert res.status_code == 400


def test_http_job_endpoints(client, store):
    res = client.get("/api/jobs/job-test")
    assert res.status_code == 200
    assert res.json()["k"] == 3
    assert client.get("/api/jobs/nope").status_code == 404
    res = client.get("/api/job")
    assert res.json()["job_id"] == "job-test"


def test_http_root_without_static(client):
    res = client.get("/")
    assert res.status_code == 200
    assert "questionnaires" in res.json()


def test_http_root_with_static(tmp_path, store):
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html><body>survey client</body></html>")
    app = create_app(store, static_dir=static)
    client = TestClient(app)
    res = client.get("/")
    assert res.status_code == 200
    assert "survey client" in res.text
