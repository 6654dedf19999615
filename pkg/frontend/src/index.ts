/**
 * Bindings for the synthaudit engine.
 *
 * Everything here delegates to the `synthaudit` command line (no metric logic
 * lives in this layer): full audits go through `synthaudit audit` and return
 * the parsed JSON report; single-metric shims go through `synthaudit eval`,
 * a one-request JSON bridge, and return the engine's exact values.
 *
 * The command is resolved from the SYNTHAUDIT_CLI environment variable
 * (whitespace-split) and defaults to `python3 -m synthaudit.cli`.
 */
import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

export class SynthauditError extends Error {
  readonly kind: string;

  constructor(kind: string, message: string) {
    super(message);
    this.name = "SynthauditError";
    this.kind = kind;
  }
}

export interface Verdict {
  metric: string;
  value: number | null;
  threshold: number | null;
  comparison: string;
  verdict: "PASS" | "FAIL" | "SKIPPED";
}

/** Parsed audit report; mirrors the CLI's JSON field for field. */
export interface BoundReport {
  report_version: string;
  metadata: Record<string, unknown>;
  fidelity: Record<string, unknown>;
  privacy: Record<string, unknown>;
  verdicts: Verdict[];
  warnings: string[];
}

export interface AuditOverrides {
  seed?: number;
  jobs?: number;
}

export interface ColumnDecl {
  name: string;
  kind: "categorical" | "numeric" | "event_time";
  event_indicator?: string;
}

export interface KsResult {
  statistic: number;
  pValue: number;
}

export interface DcrShimResult {
  syn_to_real: Record<string, unknown>;
  real_to_real: Record<string, unknown>;
  min_dcr: number;
  r0_count: number;
  high_risk_count: number;
  high_risk_fraction: number;
  n_real: number;
}

export interface AttributeShimResult {
  risks: Record<string, number>;
  lambdas: Record<string, number>;
  match_rate: number;
}

function cliCommand(): string[] {
  const override = process.env.SYNTHAUDIT_CLI;
  if (override && override.trim().length > 0) {
    return override.trim().split(/\s+/);
  }
  return ["python3", "-m", "synthaudit.cli"];
}

interface CliRun {
  status: number;
  stdout: string;
  stderr: string;
}

function runCli(args: string[], input?: string): CliRun {
  const [cmd, ...prefix] = cliCommand();
  const proc = spawnSync(cmd, [...prefix, ...args], {
    input,
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) {
    throw new SynthauditError("SpawnError", proc.error.message);
  }
  return {
    status: proc.status ?? -1,
    stdout: proc.stdout ?? "",
    stderr: proc.stderr ?? "",
  };
}

function translateFailure(run: CliRun): never {
  const line = run.stderr
    .split("\n")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .pop();
  throw new SynthauditError("CliError", line ?? `exit status ${run.status}`);
}

function tomlValue(value: unknown): string {
  // JSON string/number syntax is valid TOML for these shapes
  return JSON.stringify(value);
}

/**
 * Run a full audit against an existing config file and return the report.
 * A non-zero "any verdict failed" exit still yields a report; engine errors
 * are translated to SynthauditError with the CLI's message preserved.
 */
export function auditWithConfig(
  configPath: string,
  overrides: AuditOverrides = {},
): BoundReport {
  const work = mkdtempSync(join(tmpdir(), "synthaudit-bindings-"));
  try {
    const out = join(work, "report.json");
    const args = ["audit", "--config", resolve(configPath), "--out", out];
    if (overrides.seed !== undefined) {
      args.push("--seed", String(overrides.seed));
    }
    if (overrides.jobs !== undefined) {
      args.push("--jobs", String(overrides.jobs));
    }
    const run = runCli(args);
    if (run.status !== 0 && run.status !== 1) {
      translateFailure(run);
    }
    return JSON.parse(readFileSync(out, "utf-8")) as BoundReport;
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

/** Audit a real/synthetic/schema file triple with a generated config. */
export function audit(
  realPath: string,
  syntheticPath: string,
  schemaPath: string,
  overrides: AuditOverrides = {},
): BoundReport {
  const work = mkdtempSync(join(tmpdir(), "synthaudit-bindings-"));
  try {
    const config = [
      `seed = ${overrides.seed ?? 0}`,
      `jobs = ${overrides.jobs ?? 1}`,
      "",
      "[data]",
      `schema = ${tomlValue(resolve(schemaPath))}`,
      `real = ${tomlValue(resolve(realPath))}`,
      `synthetic = ${tomlValue(resolve(syntheticPath))}`,
      "",
    ].join("\n");
    const configPath = join(work, "audit.toml");
    writeFileSync(configPath, config, "utf-8");
    return auditWithConfig(configPath);
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

interface EvalResponse {
  ok: boolean;
  result?: unknown;
  error?: { type: string; message: string };
}

function evalRequest(op: string, args: Record<string, unknown>): unknown {
  const run = runCli(
    ["eval", "--request", "-"],
    JSON.stringify({ op, args }),
  );
  let parsed: EvalResponse | undefined;
  try {
    parsed = JSON.parse(run.stdout) as EvalResponse;
  } catch {
    parsed = undefined;
  }
  if (parsed === undefined) {
    translateFailure(run);
  }
  if (!parsed.ok || parsed.result === undefined) {
    const err = parsed.error ?? { type: "CliError", message: "eval failed" };
    throw new SynthauditError(err.type, err.message);
  }
  return parsed.result;
}

/** Two-sample KS statistic and asymptotic p-value. */
export function ksTwoSample(real: number[], synthetic: number[]): KsResult {
  const result = evalRequest("ks_two_sample", {
    real,
    synthetic,
  }) as { statistic: number; p_value: number };
  return { statistic: result.statistic, pValue: result.p_value };
}

/** KL divergence (nats) between two categorical count tables. */
export function klDivergence(
  realCounts: Record<string, number>,
  synCounts: Record<string, number>,
): number {
  const result = evalRequest("kl_divergence", {
    real_counts: realCounts,
    syn_counts: synCounts,
  }) as { value: number };
  return result.value;
}

/**
 * Mixed-type record distance between two cell mappings (null marks a
 * missing cell) under the given column declarations.
 */
export function gowerDistance(
  columns: ColumnDecl[],
  a: Record<string, number | string | null>,
  b: Record<string, number | string | null>,
  weights?: number[],
): number {
  const args: Record<string, unknown> = { columns, a, b };
  if (weights !== undefined) {
    args.weights = weights;
  }
  const result = evalRequest("gower_distance", args) as { value: number };
  return result.value;
}

/** Memorization exposure of a canary ranked among all possible canaries. */
export function exposure(rank: number, canarySpaceSize: number): number {
  const result = evalRequest("exposure", {
    rank,
    canary_space_size: canarySpaceSize,
  }) as { value: number };
  return result.value;
}

/** Distance-to-closest-record summary over real/synthetic CSV files. */
export function dcrSummary(options: {
  schema: string;
  real: string;
  synthetic: string;
  distance?: "enhanced_gower" | "hamming_binned";
  bins?: number;
  quasi?: string[];
}): DcrShimResult {
  return evalRequest("dcr_summary", {
    schema: resolve(options.schema),
    real: resolve(options.real),
    synthetic: resolve(options.synthetic),
    distance: options.distance ?? "enhanced_gower",
    bins: options.bins ?? 10,
    quasi: options.quasi ?? [],
  }) as DcrShimResult;
}

/** Attribute-inference disclosure risk for one sensitive target column. */
export function attributeInference(options: {
  schema: string;
  real: string;
  synthetic: string;
  quasi: string[];
  target: string;
  mode?: "mode_median" | "model";
  match?: "exact" | "approximate";
  tolerance?: number;
  missingWeight?: number;
}): AttributeShimResult {
  return evalRequest("attribute_inference", {
    schema: resolve(options.schema),
    real: resolve(options.real),
    synthetic: resolve(options.synthetic),
    quasi: options.quasi,
    target: options.target,
    mode: options.mode ?? "mode_median",
    match: options.match ?? "exact",
    tolerance: options.tolerance ?? 1,
    missing_weight: options.missingWeight ?? 0.5,
  }) as AttributeShimResult;
}
