import { describe, expect, it } from "vitest";

import { renderErrorPage, renderIndex, renderPage, renderQuestion } from "../src/render.js";
import { initialState, type Outcome, type UiState } from "../src/types.js";
import { ageQuestion, genderQuestion, makeQuestionnaire } from "./fixtures.js";

function filledState(): UiState {
  const state = initialState();
  state.workerId = "w-001";
  state.answers[ageQuestion.id] = "9";
  state.answers[genderQuestion.id] = "Female";
  return state;
}

function radioValues(html: string, name: string): string[] {
  const re = new RegExp(`<input type="radio" name="${name}" value="([^"]*)"`, "g");
  return [...html.matchAll(re)].map((m) => m[1]!);
}

describe("question rendering", () => {
  it("renders a categorical question as one radio button per choice", () => {
    const html = renderQuestion(genderQuestion, initialState());
    expect(radioValues(html, genderQuestion.id)).toEqual(["Male", "Female"]);
    expect(html.match(/type="radio"/g)).toHaveLength(2);
  });

  it("renders a numeric question as a number input with the range hint", () => {
    const html = renderQuestion(ageQuestion, initialState());
    expect(html).toContain('type="number"');
    expect(html).toContain('min="3"');
    expect(html).toContain('max="19"');
    expect(html).toContain("valid range 3–19");
  });

  it("keeps the checked radio in sync with the answer state", () => {
    const state = initialState();
    state.answers[genderQuestion.id] = "Female";
    const html = renderQuestion(genderQuestion, state);
    expect(html).toContain('value="Female" checked');
    expect(html).not.toContain('value="Male" checked');
  });

  it("shows a validation message only after the field was touched", () => {
    const state = initialState();
    state.answers[ageQuestion.id] = "25";
    expect(renderQuestion(ageQuestion, state)).not.toContain("out of range");
    state.touched[ageQuestion.id] = true;
    expect(renderQuestion(ageQuestion, state)).toContain("out of range 3–19");
  });

  it("escapes prompt text", () => {
    const nasty = { ...ageQuestion, prompt: 'Guess <script>alert("x")</script>' };
    const html = renderQuestion(nasty, initialState());
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("server outcomes", () => {
  function withOutcome(reason: string | null, status: Outcome["status"] = "rejected"): string {
    const state = initialState();
    state.answers[ageQuestion.id] = "25";
    state.outcomes[ageQuestion.id] = { question_id: ageQuestion.id, status, reason };
    return renderQuestion(ageQuestion, state);
  }

  it("confirms accepted answers", () => {
    expect(withOutcome(null, "accepted")).toContain("Answer recorded.");
  });

  it("displays the server's rejection reason verbatim", () => {
    expect(withOutcome("out of range 3–19")).toContain(
      "Rejected: out of range 3–19.",
    );
  });

  it("turns duplicate-worker rejections into an already-answered notice", () => {
    const html = withOutcome("duplicate worker");
    expect(html).toContain("already answered");
  });

  it("explains filled questions without dropping the typed answer", () => {
    const html = withOutcome("filled");
    expect(html).toContain("already has all the answers it needs");
    expect(html).toContain('value="25"');
  });
});

describe("page composition", () => {
  it("orders intro, plots, questions, contributor ID, submit", () => {
    const qn = makeQuestionnaire();
    const html = renderPage(qn, initialState());
    const positions = [
      html.indexOf('<section class="intro">'),
      html.indexOf('<section class="plots">'),
      html.indexOf('<form class="questions">'),
      html.indexOf(ageQuestion.id),
      html.indexOf(genderQuestion.id),
      html.indexOf('name="worker_id"'),
      html.indexOf('class="submit"'),
    ];
    for (let i = 1; i < positions.length; i++) {
      expect(positions[i]!).toBeGreaterThan(positions[i - 1]!);
    }
  });

  it("renders the intro narrative and the prior blurb when present", () => {
    const qn = makeQuestionnaire({ prior_blurb: "An earlier cohort skewed older." });
    const html = renderPage(qn, initialState());
    expect(html).toContain("The dataset records 48 children.");
    expect(html).toContain("An earlier cohort skewed older.");
  });

  it("omits the plot section when the questionnaire ships no plots", () => {
    const qn = makeQuestionnaire({ plots: [] });
    const html = renderPage(qn, initialState());
    expect(html).not.toContain('class="plots"');
    expect(html).not.toContain("<svg");
    expect(html).toContain('<form class="questions">');
  });

  it("disables submit until every answer is locally valid", () => {
    const qn = makeQuestionnaire();
    expect(renderPage(qn, initialState())).toContain("disabled");

    const ready = renderPage(qn, filledState());
    expect(ready).toContain('<button type="submit" class="submit">Submit answers</button>');
  });

  it("keeps the form, answers included, when some outcomes were rejected", () => {
    const qn = makeQuestionnaire();
    const state = filledState();
    state.submitState = "done";
    state.outcomes[ageQuestion.id] = {
      question_id: ageQuestion.id,
      status: "accepted",
      reason: null,
    };
    state.outcomes[genderQuestion.id] = {
      question_id: genderQuestion.id,
      status: "rejected",
      reason: "duplicate worker",
    };
    const html = renderPage(qn, state);
    expect(html).toContain('value="9"');
    expect(html).toContain("already answered");
    expect(html).not.toContain("Thank you");
  });

  it("shows a confirmation screen once every answer is accepted", () => {
    const qn = makeQuestionnaire();
    const state = filledState();
    state.submitState = "done";
    for (const q of qn.questions) {
      state.outcomes[q.id] = { question_id: q.id, status: "accepted", reason: null };
    }
    const html = renderPage(qn, state);
    expect(html).toContain("Thank you");
    expect(html).toContain("All 2 of your answers were recorded.");
    expect(html).not.toContain("<form");
  });

  it("offers a retry affordance after a network failure", () => {
    const qn = makeQuestionnaire();
    const state = filledState();
    state.submitState = "failed";
    state.networkError = "Could not reach the server; your answers are still here.";
    const html = renderPage(qn, state);
    expect(html).toContain("Could not reach the server");
    expect(html).toContain("Try again");
    expect(html).toContain('value="9"');
  });
});

describe("auxiliary pages", () => {
  it("lists questionnaire links on the landing page", () => {
    const html = renderIndex({
      job_id: "job-001",
      questionnaire_ids: ["qn-age-001", "qn-gender-001"],
    });
    expect(html).toContain('href="?questionnaire=qn-age-001"');
    expect(html).toContain('href="?questionnaire=qn-gender-001"');
  });

  it("renders an escaped error page", () => {
    const html = renderErrorPage("bad payload <oops>");
    expect(html).toContain("Something went wrong");
    expect(html).toContain("bad payload &lt;oops&gt;");
  });
});
