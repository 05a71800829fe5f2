import Papa from "papaparse";

export const RUNS_COLUMNS = [
  "sweep_param",
  "sweep_value",
  "policy",
  "run_index",
  "seed",
  "offered",
  "accepted",
  "acceptance_ratio",
  "carried_key_rate",
  "cpu_utilization",
  "skr_utilization",
  "mean_path_hops",
] as const;

export const METRIC_COLUMNS = [
  "offered",
  "accepted",
  "acceptance_ratio",
  "carried_key_rate",
  "cpu_utilization",
  "skr_utilization",
  "mean_path_hops",
] as const;

export type MetricName = (typeof METRIC_COLUMNS)[number];

export interface RunRow {
  sweep_param: string;
  sweep_value: string;
  policy: string;
  run_index: number;
  seed: number;
  offered: number;
  accepted: number;
  acceptance_ratio: number;
  carried_key_rate: number;
  cpu_utilization: number;
  skr_utilization: number;
  mean_path_hops: number;
}

/** A summary.csv row: per-cell means and sample standard deviations. */
export interface SummaryRow {
  sweep_param: string;
  sweep_value: string;
  policy: string;
  n_runs: number;
  means: Record<MetricName, number>;
  stds: Record<MetricName, number>;
}

export class CsvError extends Error {}

function parseTable(text: string, name: string): Record<string, string>[] {
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const fatal = parsed.errors.filter((e) => e.code !== "UndetectableDelimiter");
  if (fatal.length > 0) {
    throw new CsvError(`${name}: ${fatal[0].message} (row ${fatal[0].row})`);
  }
  return parsed.data;
}

function requireColumns(found: string[], wanted: readonly string[], name: string) {
  const missing = wanted.filter((c) => !found.includes(c));
  if (missing.length > 0) {
    throw new CsvError(`${name} missing column(s): ${missing.join(", ")}`);
  }
}

function toNumber(raw: string, column: string, name: string): number {
  const v = Number(raw);
  if (raw === "" || !Number.isFinite(v)) {
    throw new CsvError(`${name}: column ${column} has non-numeric value ${JSON.stringify(raw)}`);
  }
  return v;
}

/** Parse runs.csv text. Missing columns and empty tables are hard errors. */
export function parseRuns(text: string, name = "runs.csv"): RunRow[] {
  const header = text.split("\n", 1)[0]?.trim() ?? "";
  requireColumns(header.split(","), RUNS_COLUMNS, name);
  const records = parseTable(text, name);
  if (records.length === 0) {
    throw new CsvError(`${name}: no data rows`);
  }
  return records.map((r) => ({
    sweep_param: r.sweep_param ?? "",
    sweep_value: r.sweep_value ?? "",
    policy: r.policy,
    run_index: toNumber(r.run_index, "run_index", name),
    seed: toNumber(r.seed, "seed", name),
    offered: toNumber(r.offered, "offered", name),
    accepted: toNumber(r.accepted, "accepted", name),
    acceptance_ratio: toNumber(r.acceptance_ratio, "acceptance_ratio", name),
    carried_key_rate: toNumber(r.carried_key_rate, "carried_key_rate", name),
    cpu_utilization: toNumber(r.cpu_utilization, "cpu_utilization", name),
    skr_utilization: toNumber(r.skr_utilization, "skr_utilization", name),
    mean_path_hops: toNumber(r.mean_path_hops, "mean_path_hops", name),
  }));
}

/** Parse summary.csv text into per-cell mean/std records. */
export function parseSummary(text: string, name = "summary.csv"): SummaryRow[] {
  const wanted = [
    "sweep_param",
    "sweep_value",
    "policy",
    "n_runs",
    ...METRIC_COLUMNS.flatMap((m) => [`${m}_mean`, `${m}_std`]),
  ];
  const header = text.split("\n", 1)[0]?.trim() ?? "";
  requireColumns(header.split(","), wanted, name);
  return parseTable(text, name).map((r) => {
    const means = {} as Record<MetricName, number>;
    const stds = {} as Record<MetricName, number>;
    for (const m of METRIC_COLUMNS) {
      means[m] = toNumber(r[`${m}_mean`], `${m}_mean`, name);
      stds[m] = toNumber(r[`${m}_std`], `${m}_std`, name);
    }
    return {
      sweep_param: r.sweep_param ?? "",
      sweep_value: r.sweep_value ?? "",
      policy: r.policy,
      n_runs: toNumber(r.n_runs, "n_runs", name),
      means,
      stds,
    };
  });
}
