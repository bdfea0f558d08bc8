// The client-side evaluator must agree with the primary engine on the whole
// shared 20-case suite (single source of truth: the package fixture file).
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { evaluateVisibility, type SchemaField } from "../src/condlogic.js";

const here = dirname(fileURLToPath(import.meta.url));
const suitePath = join(
  here,
  "..",
  "..",
  "src",
  "groundfill",
  "fixtures",
  "conditional_suite.json",
);

interface SuiteCase {
  name: string;
  schema: { fields: SchemaField[] };
  edits: Array<[string, string]>;
  expected_visibility: Record<string, string>;
  expected_required: Record<string, boolean>;
}

const suite = JSON.parse(readFileSync(suitePath, "utf-8")) as { cases: SuiteCase[] };

describe("shared conditional suite", () => {
  it("has the full 20 cases", () => {
    expect(suite.cases.length).toBe(20);
  });

  for (const testCase of suite.cases) {
    it(testCase.name, () => {
      const values: Record<string, string> = {};
      for (const [fieldId, value] of testCase.edits) {
        values[fieldId] = value;
      }
      const state = evaluateVisibility(testCase.schema.fields, values);
      for (const [fieldId, expected] of Object.entries(testCase.expected_visibility)) {
        expect(state.visibility[fieldId], `${testCase.name}:${fieldId}`).toBe(expected);
      }
      for (const [fieldId, expected] of Object.entries(testCase.expected_required)) {
        expect(state.required[fieldId], `${testCase.name}:${fieldId} required`).toBe(
          expected,
        );
      }
    });
  }
});

describe("citizenship truth table", () => {
  const fields: SchemaField[] = [
    { id: "citizenship" },
    {
      id: "ssn",
      conditions: [
        { controller_id: "citizenship", predicate: "Equals", values: ["No"], effect: "Hide" },
      ],
    },
    {
      id: "visa_type",
      conditions: [
        { controller_id: "citizenship", predicate: "Equals", values: ["No"], effect: "Show" },
      ],
    },
  ];

  it.each([
    [undefined, "Visible", "Hidden"],
    ["Yes", "Visible", "Hidden"],
    ["No", "Hidden", "Visible"],
    ["", "Visible", "Hidden"],
  ])("citizenship=%s", (value, ssn, visa) => {
    const values = value === undefined ? {} : { citizenship: value as string };
    const state = evaluateVisibility(fields, values);
    expect(state.visibility["ssn"]).toBe(ssn);
    expect(state.visibility["visa_type"]).toBe(visa);
  });

  it("hidden controller contributes no value", () => {
    const chained: SchemaField[] = [
      { id: "a" },
      {
        id: "b",
        conditions: [
          { controller_id: "a", predicate: "Equals", values: ["Yes"], effect: "Show" },
        ],
      },
      {
        id: "c",
        conditions: [
          { controller_id: "b", predicate: "Equals", values: ["Yes"], effect: "Show" },
        ],
      },
    ];
    // b holds a value but is hidden, so c stays hidden.
    expect(evaluateVisibility(chained, { b: "Yes" }).visibility["c"]).toBe("Hidden");
    // Revealing b activates its stored value.
    expect(evaluateVisibility(chained, { a: "Yes", b: "Yes" }).visibility["c"]).toBe(
      "Visible",
    );
  });

  it("cycles are rejected", () => {
    const cyclic: SchemaField[] = [
      {
        id: "a",
        conditions: [
          { controller_id: "b", predicate: "Equals", values: ["x"], effect: "Show" },
        ],
      },
      {
        id: "b",
        conditions: [
          { controller_id: "a", predicate: "Equals", values: ["x"], effect: "Show" },
        ],
      },
    ];
    expect(() => evaluateVisibility(cyclic, {})).toThrow(/cycle/);
  });
});
