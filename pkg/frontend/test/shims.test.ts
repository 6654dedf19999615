import { describe, it } from "node:test";
import assert from "node:assert/strict";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import {
  SynthauditError,
  attributeInference,
  auditWithConfig,
  dcrSummary,
  exposure,
  gowerDistance,
  klDivergence,
  ksTwoSample,
} from "../src/index.js";

const here = dirname(fileURLToPath(import.meta.url));
const FIXTURES = resolve(here, "..", "..", "..", "tests", "fixtures");

describe("single-metric shims return the engine's exact values", () => {
  it("ksTwoSample on identical arrays is (0.0, 1.0)", () => {
    const res = ksTwoSample([1, 2, 3, 4], [1, 2, 3, 4]);
    assert.equal(res.statistic, 0.0);
    assert.equal(res.pValue, 1.0);
  });

  it("gowerDistance of numeric 1 vs 3 is 0.5", () => {
    const value = gowerDistance(
      [{ name: "x", kind: "numeric" }],
      { x: 1.0 },
      { x: 3.0 },
    );
    assert.equal(value, 0.5);
  });

  it("exposure(1, 65536) is 16.0", () => {
    assert.equal(exposure(1, 65536), 16.0);
  });

  it("gowerDistance handles missing cells and weights", () => {
    const columns = [
      { name: "c", kind: "categorical" as const },
      { name: "x", kind: "numeric" as const },
    ];
    assert.equal(gowerDistance(columns, { c: "u", x: null },
      { c: "v", x: 4.0 }), 1.0);
    assert.equal(gowerDistance(columns, { c: "u", x: 1.0 },
      { c: "u", x: 1.0 }), 0.0);
    const weighted = gowerDistance(columns, { c: "u", x: 1.0 },
      { c: "v", x: 3.0 }, [3.0, 1.0]);
    assert.equal(weighted, (3.0 * 1.0 + 1.0 * 0.5) / 4.0);
  });

  it("klDivergence matches the identity and hand cases", () => {
    assert.equal(klDivergence({ a: 10, b: 5 }, { a: 10, b: 5 }), 0.0);
    const val = klDivergence({ a: 75, b: 25 }, { a: 50, b: 50 });
    const expected = 0.75 * Math.log(1.5) + 0.25 * Math.log(0.5);
    assert.ok(Math.abs(val - expected) < 1e-12);
  });

  it("dcrSummary shim equals the dcr block of the parsed report", () => {
    const shim = dcrSummary({
      schema: join(FIXTURES, "schema.toml"),
      real: join(FIXTURES, "real.csv"),
      synthetic: join(FIXTURES, "synthetic.csv"),
    });
    const report = auditWithConfig(join(FIXTURES, "audit.toml"));
    const block = report.privacy["dcr"] as Record<string, unknown>;
    assert.equal(shim.min_dcr, block["min_dcr"]);
    assert.equal(shim.high_risk_fraction, block["high_risk_fraction"]);
    assert.deepEqual(shim.syn_to_real, block["syn_to_real"]);
    assert.deepEqual(shim.real_to_real, block["real_to_real"]);
  });

  it("attributeInference shim equals the report's per-target risks", () => {
    const shim = attributeInference({
      schema: join(FIXTURES, "schema.toml"),
      real: join(FIXTURES, "real.csv"),
      synthetic: join(FIXTURES, "synthetic.csv"),
      quasi: ["age", "sex", "race"],
      target: "condition",
    });
    const report = auditWithConfig(join(FIXTURES, "audit.toml"));
    const attr = report.privacy["attribute_inference"] as {
      per_target: Record<string, { risks: Record<string, number> }>;
    };
    assert.deepEqual(shim.risks, attr.per_target["condition"].risks);
  });

  it("engine errors translate to SynthauditError with the message kept", () => {
    assert.throws(
      () => exposure(0, 16),
      (err: Error) =>
        err instanceof SynthauditError &&
        err.kind === "RankOutOfRange" &&
        err.message.includes("rank 0"),
    );
  });
});
