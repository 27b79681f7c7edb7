/** Pure HTML rendering: questionnaire JSON plus UI state in, markup out.
 *
 * No DOM access happens here, so every page state is snapshot-testable; the
 * browser entry point only injects these strings and wires events.
 */
import { allValid, checkQuestion } from "./validate.js";
import { escapeHtml } from "./escape.js";
import { plotSvg } from "./plots.js";
export { escapeHtml };
function renderIntro(qn) {
    const parts = [`<section class="intro"><p>${escapeHtml(qn.intro)}</p>`];
    if (qn.prior_blurb) {
        parts.push(`<p class="prior">${escapeHtml(qn.prior_blurb)}</p>`);
    }
    parts.push("</section>");
    return parts.join("");
}
/** Empty string when the questionnaire ships no plots. */
export function renderPlots(qn) {
    if (qn.plots.length === 0) {
        return "";
    }
    const figures = qn.plots
        .map((p) => `<figure class="plot">${plotSvg(p)}<figcaption>${escapeHtml(p.caption)}</figcaption></figure>`)
        .join("");
    return `<section class="plots">${figures}</section>`;
}
function renderNumericInput(q, state) {
    const raw = state.answers[q.id] ?? "";
    const c = q.constraint;
    return (`<input type="number" step="any" name="${escapeHtml(q.id)}" value="${escapeHtml(raw)}"` +
        (c.lo === null ? "" : ` min="${c.lo}"`) +
        (c.hi === null ? "" : ` max="${c.hi}"`) +
        ` aria-describedby="hint-${escapeHtml(q.id)}">` +
        ` <span class="hint" id="hint-${escapeHtml(q.id)}">${escapeHtml(c.hint_text)}</span>`);
}
function renderChoiceInput(q, state) {
    const raw = state.answers[q.id] ?? "";
    const items = (q.constraint.choices ?? []).map((choice) => {
        const checked = raw === choice ? " checked" : "";
        return (`<label class="choice"><input type="radio" name="${escapeHtml(q.id)}" ` +
            `value="${escapeHtml(choice)}"${checked}> ${escapeHtml(choice)}</label>`);
    });
    return `<span class="choices" role="radiogroup">${items.join("")}</span>`;
}
function renderOutcome(outcome) {
    if (outcome.status === "accepted") {
        return `<p class="outcome accepted">Answer recorded.</p>`;
    }
    const reason = outcome.reason ?? "rejected";
    if (reason === "duplicate worker") {
        return `<p class="outcome rejected">You already answered this question; your earlier answer stands.</p>`;
    }
    if (reason === "filled") {
        return `<p class="outcome rejected">This question already has all the answers it needs; yours was not counted.</p>`;
    }
    return `<p class="outcome rejected">Rejected: ${escapeHtml(reason)}.</p>`;
}
/** One list item: prompt, constrained input, local validity, server outcome. */
export function renderQuestion(q, state) {
    const input = q.constraint.kind === "categorical_choice"
        ? renderChoiceInput(q, state)
        : renderNumericInput(q, state);
    const check = checkQuestion(q, state);
    const showInvalid = !check.ok && state.touched[q.id];
    const invalid = showInvalid
        ? `<p class="invalid" role="alert">${escapeHtml(check.message)}</p>`
        : "";
    const outcome = state.outcomes[q.id] ? renderOutcome(state.outcomes[q.id]) : "";
    return (`<li class="question" id="question-${escapeHtml(q.id)}">` +
        `<p class="prompt">${escapeHtml(q.prompt)}</p>` +
        input +
        invalid +
        outcome +
        `</li>`);
}
function renderWorkerField(state) {
    return (`<p class="worker-field"><label>Contributor ID ` +
        `<input type="text" name="worker_id" value="${escapeHtml(state.workerId)}" required></label></p>`);
}
function renderSubmitRow(qn, state) {
    const enabled = allValid(qn, state) && state.submitState !== "submitting";
    const parts = [];
    if (state.networkError !== null) {
        parts.push(`<p class="network-error" role="alert">${escapeHtml(state.networkError)} ` +
            `<button type="submit" class="retry">Try again</button></p>`);
    }
    const label = state.submitState === "submitting" ? "Submitting…" : "Submit answers";
    parts.push(`<button type="submit" class="submit"${enabled ? "" : " disabled"}>${label}</button>`);
    return parts.join("");
}
function renderConfirmation(qn) {
    return (`<section class="confirmation"><h2>Thank you</h2>` +
        `<p>All ${qn.questions.length} of your answers were recorded.</p></section>`);
}
function allAccepted(qn, state) {
    return (qn.questions.length > 0 &&
        qn.questions.every((q) => state.outcomes[q.id]?.status === "accepted"));
}
/** The whole page for one questionnaire: intro first, then plots, then the
 * questions in order, with the contributor-ID field last. */
export function renderPage(qn, state) {
    if (state.submitState === "done" && allAccepted(qn, state)) {
        return (`<article class="questionnaire" data-questionnaire="${escapeHtml(qn.id)}">` +
            renderConfirmation(qn) +
            `</article>`);
    }
    const questions = qn.questions.map((q) => renderQuestion(q, state)).join("");
    return (`<article class="questionnaire" data-questionnaire="${escapeHtml(qn.id)}">` +
        renderIntro(qn) +
        renderPlots(qn) +
        `<form class="questions">` +
        `<ol>${questions}</ol>` +
        renderWorkerField(state) +
        renderSubmitRow(qn, state) +
        `</form>` +
        `</article>`);
}
/** Landing page: links to every questionnaire in the job. */
export function renderIndex(index) {
    const items = index.questionnaire_ids
        .map((id) => `<li><a href="?questionnaire=${encodeURIComponent(id)}">${escapeHtml(id)}</a></li>`)
        .join("");
    return (`<article class="index"><h1>Open questionnaires</h1>` +
        `<p>Job ${escapeHtml(index.job_id)}.</p><ul>${items}</ul></article>`);
}
/** Error page for malformed payloads or unreachable resources. */
export function renderErrorPage(message) {
    return (`<article class="error-page"><h1>Something went wrong</h1>` +
        `<p>${escapeHtml(message)}</p></article>`);
}
