import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, test, vi } from "vitest";

import { cliMain } from "../src/cli.js";
import { parseSummary, type MetricName } from "../src/csv.js";

// end-to-end gate: figures rendered from runs.csv must agree with the
// published summary.csv means to within 1e-9

const FIXTURES = join(__dirname, "fixtures");
const SWEEP_RUNS = join(FIXTURES, "sweep/runs.csv");
const SWEEP_SUMMARY = join(FIXTURES, "sweep/summary.csv");
const TOLERANCE = 1e-9;

interface Marker {
  metric: string;
  policy: string;
  x: number;
  mean: number;
  std: number;
}

function report(name: string, ok: boolean, detail: string) {
  console.log(`[${ok ? "PASS" : "FAIL"}] ${name}: ${detail}`);
}

function renderTo(kind: string, out: string): Promise<number> {
  return cliMain(["render", "--input", SWEEP_RUNS, "--kind", kind, "--output", out]);
}

function markersIn(svg: string): Marker[] {
  const found: Marker[] = [];
  for (const m of svg.matchAll(/<circle [^>]*data-metric="([^"]+)"[^>]*>/g)) {
    const tag = m[0];
    const attr = (name: string) => {
      const hit = tag.match(new RegExp(`data-${name}="([^"]+)"`));
      if (hit === null) throw new Error(`marker without data-${name}: ${tag}`);
      return hit[1];
    };
    found.push({
      metric: m[1],
      policy: attr("policy"),
      x: Number(attr("x")),
      mean: Number(attr("mean")),
      std: Number(attr("std")),
    });
  }
  return found;
}

describe("figure acceptance", () => {
  test("plotted means match the published summary within 1e-9", async () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const dir = mkdtempSync(join(tmpdir(), "plots-accept-"));
    const accOut = join(dir, "acceptance.svg");
    const utilOut = join(dir, "utilization.svg");
    expect(await renderTo("ACCEPTANCE_VS_SWEEP", accOut)).toBe(0);
    expect(await renderTo("UTILIZATION_VS_SWEEP", utilOut)).toBe(0);

    const summary = parseSummary(readFileSync(SWEEP_SUMMARY, "utf8"), "summary.csv");
    const markers = [...markersIn(readFileSync(accOut, "utf8")), ...markersIn(readFileSync(utilOut, "utf8"))];
    vi.restoreAllMocks();

    // one marker per summary cell for acceptance, two (cpu + skr) for utilization
    expect(markers.filter((m) => m.metric === "acceptance_ratio")).toHaveLength(summary.length);
    expect(markers.filter((m) => m.metric === "cpu_utilization")).toHaveLength(summary.length);
    expect(markers.filter((m) => m.metric === "skr_utilization")).toHaveLength(summary.length);

    let worst = 0;
    let checked = 0;
    for (const marker of markers) {
      const cell = summary.find(
        (row) => row.policy === marker.policy && Number(row.sweep_value) === marker.x
      );
      expect(cell, `no summary cell for ${marker.policy} at ${marker.x}`).toBeDefined();
      const metric = marker.metric as MetricName;
      const meanGap = Math.abs(marker.mean - cell!.means[metric]);
      const stdGap = Math.abs(marker.std - cell!.stds[metric]);
      worst = Math.max(worst, meanGap, stdGap);
      checked += 1;
    }
    const ok = checked === summary.length * 3 && worst <= TOLERANCE;
    report(
      "figure_means_match_summary",
      ok,
      `${checked} plotted points vs ${summary.length} summary cells, worst gap ${worst.toExponential(2)} (tolerance ${TOLERANCE})`
    );
    expect(ok).toBe(true);
  });

  test("a two-policy three-value sweep renders in every figure kind", async () => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    const dir = mkdtempSync(join(tmpdir(), "plots-kinds-"));
    const kinds = ["ACCEPTANCE_VS_SWEEP", "UTILIZATION_VS_SWEEP", "PATH_HOPS_HIST"];
    const codes: number[] = [];
    for (const kind of kinds) {
      codes.push(await renderTo(kind, join(dir, `${kind.toLowerCase()}.svg`)));
    }
    const svg = readFileSync(join(dir, "acceptance_vs_sweep.svg"), "utf8");
    const policies = new Set([...svg.matchAll(/data-policy="([^"]+)"/g)].map((m) => m[1]));
    const xs = new Set(
      [...svg.matchAll(/data-x="([^"]+)"/g)].map((m) => Number(m[1]))
    );
    vi.restoreAllMocks();

    const ok = codes.every((c) => c === 0) && policies.size === 2 && xs.size === 3;
    report(
      "two_policy_three_value_sweep",
      ok,
      `exit codes [${codes.join(", ")}], ${policies.size} policies x ${xs.size} sweep values`
    );
    expect(ok).toBe(true);
  });
});
