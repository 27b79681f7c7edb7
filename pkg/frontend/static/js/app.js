/** Browser entry point: fetch, render, and wire the questionnaire page.
 *
 * All markup comes from the pure renderers; this module owns only DOM
 * injection, event wiring, and the mutable UI state.
 */
import { ApiError, fetchIndex, fetchQuestionnaire, submitAnswers } from "./api.js";
import { renderErrorPage, renderIndex, renderPage } from "./render.js";
import { allValid, answersForSubmission } from "./validate.js";
import { initialState } from "./types.js";
const BASE = "";
function rerender(container, qn, state) {
    container.innerHTML = renderPage(qn, state);
}
function updateSubmitDisabled(container, qn, state) {
    const button = container.querySelector("button.submit");
    if (button) {
        button.disabled = !allValid(qn, state) || state.submitState === "submitting";
    }
}
function readField(target) {
    if (!(target instanceof HTMLInputElement) || !target.name) {
        return null;
    }
    return { name: target.name, value: target.value };
}
async function handleSubmit(container, qn, state) {
    if (!allValid(qn, state)) {
        for (const q of qn.questions) {
            state.touched[q.id] = true;
        }
        rerender(container, qn, state);
        return;
    }
    state.submitState = "submitting";
    state.networkError = null;
    rerender(container, qn, state);
    try {
        const outcomes = await submitAnswers(BASE, qn.id, state.workerId.trim(), answersForSubmission(qn, state));
        state.outcomes = {};
        for (const o of outcomes) {
            state.outcomes[o.question_id] = o;
        }
        state.submitState = "done";
    }
    catch (err) {
        state.submitState = "failed";
        state.networkError =
            err instanceof ApiError
                ? `The server rejected the submission: ${err.message}.`
                : "Could not reach the server; your answers are still here.";
    }
    rerender(container, qn, state);
}
function wire(container, qn, state) {
    container.addEventListener("input", (e) => {
        const field = readField(e.target);
        if (!field) {
            return;
        }
        if (field.name === "worker_id") {
            state.workerId = field.value;
        }
        else {
            state.answers[field.name] = field.value;
        }
        updateSubmitDisabled(container, qn, state);
    });
    container.addEventListener("change", (e) => {
        const field = readField(e.target);
        if (!field) {
            return;
        }
        state.touched[field.name] = true;
        rerender(container, qn, state);
    });
    container.addEventListener("submit", (e) => {
        e.preventDefault();
        void handleSubmit(container, qn, state);
    });
}
export async function boot(container) {
    const params = new URLSearchParams(window.location.search);
    const questionnaireId = params.get("questionnaire");
    try {
        if (!questionnaireId) {
            container.innerHTML = renderIndex(await fetchIndex(BASE));
            return;
        }
        const qn = await fetchQuestionnaire(BASE, questionnaireId);
        const state = initialState();
        rerender(container, qn, state);
        wire(container, qn, state);
    }
    catch (err) {
        container.innerHTML = renderErrorPage(err instanceof Error ? err.message : String(err));
    }
}
if (typeof document !== "undefined") {
    const start = () => {
        const container = document.getElementById("app");
        if (container) {
            void boot(container);
        }
    };
    if (document.readyState === "loading") {
        document.addEventListener("DOMContentLoaded", start);
    }
    else {
        start();
    }
}
