/** End-to-end round trip against a live survey service.
 *
 * Builds a small cohort with the backend CLI, serves it, and drives the
 * client's own fetch/validate/render functions through the full respondent
 * flow: radio choices, client-side blocking, forced server rejection with
 * the reason displayed, and accepted submissions moving job counts.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { fetchIndex, fetchJobStatus, fetchQuestionnaire, submitAnswers } from "../src/api.js";
import { renderPage } from "../src/render.js";
import { initialState, type QuestionnaireJson, type UiState } from "../src/types.js";
import { allValid, answersForSubmission, checkAnswer } from "../src/validate.js";

const repoRoot = path.resolve(fileURLToPath(new URL(".", import.meta.url)), "..", "..");
const staticDir = path.join(repoRoot, "frontend", "static");
const port = 8300 + (process.pid % 500);
const base = `http://127.0.0.1:${port}`;

let dataDir: string;
let server: ChildProcess;

function backend(args: string[]): void {
  execFileSync("python3", args, { cwd: repoRoot, stdio: "pipe" });
}

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const res = await fetch(`${base}/api/job`);
      if (res.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error(`service at ${base} never became ready`);
}

function applyOutcomes(
  state: UiState,
  outcomes: Awaited<ReturnType<typeof submitAnswers>>,
): UiState {
  state.outcomes = {};
  for (const o of outcomes) {
    state.outcomes[o.question_id] = o;
  }
  state.submitState = "done";
  return state;
}

beforeAll(async () => {
  dataDir = mkdtempSync(path.join(tmpdir(), "survey-e2e-"));
  backend(["scripts/make_demo_data.py", "--out", dataDir, "--n", "48", "--seed", "5"]);
  backend([
    "-m", "crowdimpute.cli", "ampute",
    "--dataset", path.join(dataDir, "cohort.csv"),
    "--schema", path.join(dataDir, "schema.json"),
    "--outdir", dataDir,
    "--seed", "3",
    "--target", "age", "--target", "gender",
    "--n", "2",
  ]);
  backend([
    "-m", "crowdimpute.cli", "gen-survey",
    "--schema", path.join(dataDir, "schema.json"),
    "--outdir", dataDir,
    "--target", "age", "--target", "gender",
    "--k", "3",
  ]);
  server = spawn(
    "python3",
    [
      "-m", "crowdimpute.cli", "serve",
      "--data-dir", dataDir,
      "--port", String(port),
      "--static-dir", staticDir,
    ],
    { cwd: repoRoot, stdio: "ignore" },
  );
  await waitForServer();
}, 120_000);

afterAll(() => {
  server?.kill();
  if (dataDir) {
    rmSync(dataDir, { recursive: true, force: true });
  }
});

describe("live service round trip", () => {
  let ageQn: QuestionnaireJson;
  let genderQn: QuestionnaireJson;

  it("serves the static client at the web root", async () => {
    const res = await fetch(`${base}/`);
    expect(res.status).toBe(200);
    const html = await res.text();
    expect(html).toContain('id="app"');
    expect(html).toContain("js/app.js");
  });

  it("lists both questionnaires in the index", async () => {
    const index = await fetchIndex(base);
    expect(index.questionnaire_ids).toContain("qn-age-001");
    expect(index.questionnaire_ids).toContain("qn-gender-001");
    ageQn = await fetchQuestionnaire(base, "qn-age-001");
    genderQn = await fetchQuestionnaire(base, "qn-gender-001");
    expect(ageQn.questions).toHaveLength(2);
    expect(genderQn.questions).toHaveLength(2);
  });

  it("renders the gender question with exactly the constraint's choices", () => {
    const html = renderPage(genderQn, initialState());
    const q = genderQn.questions[0]!;
    const re = new RegExp(`<input type="radio" name="${q.id}" value="([^"]*)"`, "g");
    const values = [...html.matchAll(re)].map((m) => m[1]);
    expect(values).toEqual(q.constraint.choices);
    expect(values).toEqual(["Male", "Female"]);
  });

  it("blocks an out-of-range age client-side", () => {
    const q = ageQn.questions[0]!;
    const state = initialState();
    state.workerId = "w-blocked";
    state.answers[q.id] = "25";
    state.touched[q.id] = true;

    expect(checkAnswer("25", q.constraint).ok).toBe(false);
    expect(allValid(ageQn, state)).toBe(false);

    const html = renderPage(ageQn, state);
    expect(html).toContain("out of range 3–19");
    expect(html).toMatch(/<button type="submit" class="submit" disabled>/);
  });

  it("rejects a forced out-of-range age server-side and displays the reason", async () => {
    const q = ageQn.questions[0]!;
    const before = await fetchJobStatus(base);

    const outcomes = await submitAnswers(base, ageQn.id, "w-tamperer", { [q.id]: 25 });
    expect(outcomes).toHaveLength(1);
    expect(outcomes[0]).toMatchObject({
      question_id: q.id,
      status: "rejected",
      reason: "out of range 3–19",
    });

    const state = applyOutcomes(initialState(), outcomes);
    state.answers[q.id] = "25";
    const html = renderPage(ageQn, state);
    expect(html).toContain("Rejected: out of range 3–19.");

    const after = await fetchJobStatus(base);
    expect(after.questions[q.id]!.accepted).toBe(before.questions[q.id]!.accepted);
  });

  it("moves each question's accepted count by exactly one on a valid submission", async () => {
    const before = await fetchJobStatus(base);

    const state = initialState();
    state.workerId = "w-alpha";
    state.answers[ageQn.questions[0]!.id] = "8";
    state.answers[ageQn.questions[1]!.id] = "12";
    expect(allValid(ageQn, state)).toBe(true);

    const outcomes = await submitAnswers(
      base,
      ageQn.id,
      state.workerId,
      answersForSubmission(ageQn, state),
    );
    expect(outcomes.map((o) => o.status)).toEqual(["accepted", "accepted"]);

    const after = await fetchJobStatus(base);
    for (const q of ageQn.questions) {
      expect(after.questions[q.id]!.accepted).toBe(before.questions[q.id]!.accepted + 1);
    }
    expect(after.accepted_total).toBe(before.accepted_total + 2);

    const html = renderPage(ageQn, applyOutcomes(state, outcomes));
    expect(html).toContain("Thank you");
  });

  it("accepts a categorical submission and advances its counts too", async () => {
    const before = await fetchJobStatus(base);
    const state = initialState();
    state.workerId = "w-alpha";
    for (const q of genderQn.questions) {
      state.answers[q.id] = q.constraint.choices![0]!;
    }
    const outcomes = await submitAnswers(
      base,
      genderQn.id,
      state.workerId,
      answersForSubmission(genderQn, state),
    );
    expect(outcomes.every((o) => o.status === "accepted")).toBe(true);

    const after = await fetchJobStatus(base);
    for (const q of genderQn.questions) {
      expect(after.questions[q.id]!.accepted).toBe(before.questions[q.id]!.accepted + 1);
    }
  });

  it("shows an already-answered notice for a duplicate contributor ID", async () => {
    const before = await fetchJobStatus(base);
    const state = initialState();
    state.workerId = "w-alpha";
    state.answers[ageQn.questions[0]!.id] = "9";
    state.answers[ageQn.questions[1]!.id] = "11";

    const outcomes = await submitAnswers(
      base,
      ageQn.id,
      state.workerId,
      answersForSubmission(ageQn, state),
    );
    expect(outcomes.every((o) => o.status === "rejected")).toBe(true);
    expect(outcomes.every((o) => o.reason === "duplicate worker")).toBe(true);

    const html = renderPage(ageQn, applyOutcomes(state, outcomes));
    expect(html).toContain("already answered");
    expect(html).toContain('value="9"');

    const after = await fetchJobStatus(base);
    expect(after.accepted_total).toBe(before.accepted_total);
  });
}, 30_000);
