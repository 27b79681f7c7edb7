/** Hand-built payloads shaped like the service's JSON for unit tests. */

import type { PlotJson, QuestionJson, QuestionnaireJson } from "../src/types.js";

export const ageQuestion: QuestionJson = {
  id: "q0003-age",
  row: 3,
  column: "age",
  kind: "continuous",
  prompt: "Guess the age of a child whose fev is 2.1 liters and height is 57 inches.",
  constraint: {
    kind: "numeric_range",
    lo: 3,
    hi: 19,
    choices: null,
    hint_text: "valid range 3–19",
  },
  context: [
    ["fev", 2.1],
    ["height", 57],
  ],
};

export const genderQuestion: QuestionJson = {
  id: "q0007-gender",
  row: 7,
  column: "gender",
  kind: "categorical",
  prompt: "Guess the gender of a child aged 11 years whose height is 60 inches.",
  constraint: {
    kind: "categorical_choice",
    lo: null,
    hi: null,
    choices: ["Male", "Female"],
    hint_text: "choose one of Male, Female",
  },
  context: [
    ["age", 11],
    ["height", 60],
  ],
};

export const scatterPlot: PlotJson = {
  kind: "scatter",
  x_column: "height",
  y_column: "age",
  caption: "age against height for the 46 children with both observed",
  points: [
    [50, 5],
    [55, 8],
    [60, 11],
    [64, 13],
    [70, 17],
  ],
  groups: null,
};

export const boxPlot: PlotJson = {
  kind: "box",
  x_column: "gender",
  y_column: "age",
  caption: "age by gender",
  points: null,
  groups: [
    { label: "Male", n: 21, min: 4, p25: 7, median: 10, p75: 13, max: 18 },
    { label: "Female", n: 25, min: 3, p25: 6, median: 9, p75: 12, max: 17 },
  ],
};

export function makeQuestionnaire(partial?: Partial<QuestionnaireJson>): QuestionnaireJson {
  return {
    id: "qn-age-001",
    intro: "The dataset records 48 children. Age runs from 3 to 19 years.",
    prior_blurb: null,
    plots: [scatterPlot, boxPlot],
    questions: [ageQuestion, genderQuestion],
    k: 3,
    ...partial,
  };
}
