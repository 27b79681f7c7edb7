/** Client-side answer validation.
 *
 * The decisions here mirror the service's constraint checks exactly so that
 * any answer accepted locally is accepted by the server too (absent a
 * duplicate-worker or question-filled race). The client is allowed to be
 * stricter than the server, never looser.
 */
/** Bound formatting matching the service's range text ("3", "4.5"). */
export function fmtBound(v) {
    return String(v);
}
function checkNumeric(raw, lo, hi) {
    const trimmed = raw.trim();
    if (trimmed === "") {
        return { ok: false, message: "enter a number", value: null };
    }
    const v = Number(trimmed);
    if (!Number.isFinite(v)) {
        return { ok: false, message: "not a number", value: null };
    }
    if (v < lo || v > hi) {
        return {
            ok: false,
            message: `out of range ${fmtBound(lo)}–${fmtBound(hi)}`,
            value: null,
        };
    }
    return { ok: true, message: "", value: v };
}
function checkCategorical(raw, choices) {
    const label = raw.trim();
    if (label === "") {
        return { ok: false, message: "choose one option", value: null };
    }
    if (!choices.includes(label)) {
        return { ok: false, message: "not one of " + choices.join(", "), value: null };
    }
    return { ok: true, message: "", value: label };
}
/** Validate one raw input string against a question's constraint. */
export function checkAnswer(raw, constraint) {
    if (constraint.kind === "numeric_range") {
        if (constraint.lo === null || constraint.hi === null) {
            return { ok: false, message: "malformed constraint", value: null };
        }
        return checkNumeric(raw, constraint.lo, constraint.hi);
    }
    if (constraint.kind === "categorical_choice") {
        return checkCategorical(raw, constraint.choices ?? []);
    }
    return { ok: false, message: `unknown constraint kind ${constraint.kind}`, value: null };
}
export function checkQuestion(q, state) {
    return checkAnswer(state.answers[q.id] ?? "", q.constraint);
}
/** True when every question validates and a contributor ID is present. */
export function allValid(qn, state) {
    if (state.workerId.trim() === "") {
        return false;
    }
    return qn.questions.every((q) => checkQuestion(q, state).ok);
}
/** Canonical answers payload for a fully valid view. */
export function answersForSubmission(qn, state) {
    const out = {};
    for (const q of qn.questions) {
        const check = checkQuestion(q, state);
        if (!check.ok || check.value === null) {
            throw new Error(`answer for ${q.id} is not locally valid`);
        }
        out[q.id] = check.value;
    }
    return out;
}
