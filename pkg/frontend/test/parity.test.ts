import { describe, it } from "node:test";
import assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { audit, auditWithConfig, BoundReport } from "../src/index.js";

const here = dirname(fileURLToPath(import.meta.url));
const FIXTURES = resolve(here, "..", "..", "..", "tests", "fixtures");

function cliReport(configPath: string, extra: string[] = []): BoundReport {
  const work = mkdtempSync(join(tmpdir(), "synthaudit-cli-"));
  try {
    const out = join(work, "report.json");
    const proc = spawnSync(
      "python3",
      ["-m", "synthaudit.cli", "audit", "--config", configPath,
        "--out", out, ...extra],
      { encoding: "utf-8", maxBuffer: 256 * 1024 * 1024 },
    );
    assert.equal(proc.status, 0, proc.stderr);
    return JSON.parse(readFileSync(out, "utf-8")) as BoundReport;
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

describe("binding parity with the CLI report", () => {
  it("auditWithConfig equals the CLI JSON field for field", () => {
    const config = join(FIXTURES, "audit.toml");
    const bound = auditWithConfig(config);
    const direct = cliReport(config);
    assert.deepEqual(bound, direct);
    assert.equal(bound.report_version, "1");
    assert.ok(bound.verdicts.length >= 4);
  });

  it("audit() on a file triple equals the CLI run on the same inputs", () => {
    const bound = audit(
      join(FIXTURES, "real.csv"),
      join(FIXTURES, "synthetic.csv"),
      join(FIXTURES, "schema.toml"),
      { seed: 3 },
    );
    // same triple through the bundled config, but with every optional block
    // disabled to mirror the generated minimal config
    const direct = cliReport(join(FIXTURES, "audit.toml"), ["--seed", "3"]);
    assert.equal(bound.metadata["seed"], 3);
    // the generated config has no tstr/survival/rules/membership sections,
    // so only the always-on blocks must agree with the full run
    assert.deepEqual(bound.fidelity["marginals"], direct.fidelity["marginals"]);
    assert.deepEqual(bound.fidelity["population"], direct.fidelity["population"]);
    assert.deepEqual(bound.fidelity["correlation"], direct.fidelity["correlation"]);
    assert.deepEqual(bound.privacy["dcr"], direct.privacy["dcr"]);
    assert.deepEqual(
      bound.privacy["attribute_inference"],
      direct.privacy["attribute_inference"],
    );
  });

  it("seed overrides change only seeded blocks", () => {
    const config = join(FIXTURES, "audit.toml");
    const a = auditWithConfig(config, { seed: 7 });
    const b = auditWithConfig(config, { seed: 8 });
    assert.equal(a.metadata["seed"], 7);
    assert.equal(b.metadata["seed"], 8);
    // unseeded blocks are identical
    for (const key of ["population", "marginals", "correlation",
      "support_coverage", "rules", "survival"]) {
      assert.deepEqual(a.fidelity[key], b.fidelity[key], key);
    }
    assert.deepEqual(a.privacy["dcr"], b.privacy["dcr"]);
    assert.deepEqual(
      a.privacy["attribute_inference"], b.privacy["attribute_inference"]);
    // seeded model blocks differ
    assert.notDeepEqual(a.fidelity["discriminator"],
      b.fidelity["discriminator"]);
    assert.notDeepEqual(a.fidelity["tstr"], b.fidelity["tstr"]);
  });

  it("bad schema path raises an error naming the path", () => {
    assert.throws(
      () => audit(
        join(FIXTURES, "real.csv"),
        join(FIXTURES, "synthetic.csv"),
        join(FIXTURES, "no_such_schema.toml"),
      ),
      (err: Error) => err.message.includes("no_such_schema.toml"),
    );
  });
});
