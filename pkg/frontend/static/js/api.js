/** Thin fetch wrappers over the survey service's JSON API. */
export class ApiError extends Error {
    constructor(message, status) {
        super(message);
        this.status = status;
        this.name = "ApiError";
    }
}
async function requestJson(url, init) {
    const res = await fetch(url, init);
    let body = null;
    try {
        body = await res.json();
    }
    catch {
        body = null;
    }
    if (!res.ok) {
        const detail = body !== null && typeof body === "object" && "error" in body
            ? String(body.error)
            : `${res.status} ${res.statusText}`;
        throw new ApiError(detail, res.status);
    }
    return body;
}
function isRecord(v) {
    return typeof v === "object" && v !== null && !Array.isArray(v);
}
/** Structural guard over a fetched questionnaire; throws on malformed data. */
export function parseQuestionnaire(data) {
    if (!isRecord(data)) {
        throw new Error("malformed questionnaire payload: not an object");
    }
    if (typeof data.id !== "string" || typeof data.intro !== "string") {
        throw new Error("malformed questionnaire payload: missing id or intro");
    }
    if (!Array.isArray(data.questions) || data.questions.length === 0) {
        throw new Error("malformed questionnaire payload: no questions");
    }
    for (const q of data.questions) {
        if (!isRecord(q) || typeof q.id !== "string" || typeof q.prompt !== "string") {
            throw new Error("malformed questionnaire payload: bad question entry");
        }
        const c = q.constraint;
        if (!isRecord(c) || (c.kind !== "numeric_range" && c.kind !== "categorical_choice")) {
            throw new Error(`malformed questionnaire payload: bad constraint on ${q.id}`);
        }
    }
    const plots = data.plots ?? [];
    if (!Array.isArray(plots)) {
        throw new Error("malformed questionnaire payload: plots must be a list");
    }
    for (const p of plots) {
        if (!isRecord(p) || (p.kind !== "scatter" && p.kind !== "box")) {
            throw new Error("malformed questionnaire payload: bad plot entry");
        }
    }
    if (typeof data.k !== "number") {
        throw new Error("malformed questionnaire payload: missing k");
    }
    return data;
}
export async function fetchQuestionnaire(base, id) {
    const data = await requestJson(`${base}/api/questionnaires/${encodeURIComponent(id)}`);
    return parseQuestionnaire(data);
}
export async function fetchIndex(base) {
    const data = await requestJson(`${base}/api/questionnaires`);
    if (!isRecord(data) || !Array.isArray(data.questionnaire_ids)) {
        throw new Error("malformed questionnaire index");
    }
    return data;
}
export async function submitAnswers(base, questionnaireId, workerId, answers) {
    const data = await requestJson(`${base}/api/questionnaires/${encodeURIComponent(questionnaireId)}/submissions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ worker_id: workerId, answers }),
    });
    if (!isRecord(data) || !Array.isArray(data.outcomes)) {
        throw new Error("malformed submission response");
    }
    return data.outcomes;
}
export async function fetchJobStatus(base, jobId) {
    const url = jobId ? `${base}/api/jobs/${encodeURIComponent(jobId)}` : `${base}/api/job`;
    const data = await requestJson(url);
    if (!isRecord(data) || typeof data.job_id !== "string") {
        throw new Error("malformed job status");
    }
    return data;
}
