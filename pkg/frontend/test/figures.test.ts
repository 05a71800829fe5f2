import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, test } from "vitest";

import { parseRuns } from "../src/csv.js";
import { buildFigure, parseKind } from "../src/figures.js";
import { groupCells } from "../src/stats.js";
import { niceTicks, padDomain } from "../src/svg.js";

const FIXTURES = join(__dirname, "fixtures");
const sweepRows = parseRuns(readFileSync(join(FIXTURES, "sweep/runs.csv"), "utf8"));
const singleRows = parseRuns(readFileSync(join(FIXTURES, "single/runs.csv"), "utf8"));
const nosweepRows = parseRuns(readFileSync(join(FIXTURES, "nosweep/runs.csv"), "utf8"));

describe("figure kinds", () => {
  test("kind parsing is case-insensitive and strict", () => {
    expect(parseKind("acceptance_vs_sweep")).toBe("ACCEPTANCE_VS_SWEEP");
    expect(parseKind("PATH_HOPS_HIST")).toBe("PATH_HOPS_HIST");
    expect(() => parseKind("PIE")).toThrow("unknown figure kind");
  });

  test("acceptance figure draws one series per policy", () => {
    const { svg, series } = buildFigure(sweepRows, "ACCEPTANCE_VS_SWEEP");
    expect(series).toHaveLength(2);
    for (const s of series) {
      expect(s.points.map((p) => p.x)).toEqual([2, 4, 8]);
      expect(s.metric).toBe("acceptance_ratio");
    }
    expect(svg.match(/<polyline /g)).toHaveLength(2);
    expect(svg.match(/data-mean="/g)).toHaveLength(6);
    expect(svg).toContain(">best_fit</text>");
    expect(svg).toContain(">random_fit</text>");
    expect(svg).toContain("Acceptance ratio vs arrival_rate");
    expect(svg).toContain(">arrival_rate</text>");
  });

  test("plotted means equal cell recomputation", () => {
    const { series } = buildFigure(sweepRows, "ACCEPTANCE_VS_SWEEP");
    const cells = groupCells(sweepRows);
    for (const s of series) {
      for (const p of s.points) {
        const cell = cells.find(
          (c) => c.policy === s.policy && Number(c.sweepValue) === p.x
        )!;
        expect(p.mean).toBe(cell.means.acceptance_ratio);
        expect(p.std).toBe(cell.stds.acceptance_ratio);
      }
    }
  });

  test("single-run cells render zero-length error bars", () => {
    const { svg, series } = buildFigure(singleRows, "ACCEPTANCE_VS_SWEEP");
    for (const s of series) {
      for (const p of s.points) expect(p.std).toBe(0);
    }
    expect(svg.match(/data-std="0"/g)).toHaveLength(6);
    // the error bar lines are still emitted, collapsed to a point
    const bars = [
      ...svg.matchAll(/<line x1="([\d.]+)" y1="([\d.-]+)" x2="\1" y2="([\d.-]+)" stroke="#[0-9a-f]{6}" stroke-width="1.5"/g),
    ];
    expect(bars.length).toBeGreaterThanOrEqual(6);
    for (const bar of bars) expect(bar[2]).toBe(bar[3]);
  });

  test("utilization figure has two panels and four series", () => {
    const { svg, series } = buildFigure(sweepRows, "UTILIZATION_VS_SWEEP");
    expect(series).toHaveLength(4);
    expect(new Set(series.map((s) => s.metric))).toEqual(
      new Set(["cpu_utilization", "skr_utilization"])
    );
    expect(svg).toContain('width="1120"');
    expect(svg).toContain("CPU utilization vs arrival_rate");
    expect(svg).toContain("Secret-key-rate utilization vs arrival_rate");
  });

  test("histogram bins every run exactly once per policy", () => {
    const { svg, series } = buildFigure(sweepRows, "PATH_HOPS_HIST");
    for (const s of series) {
      const total = s.points.reduce((acc, p) => acc + p.mean, 0);
      expect(total).toBe(12); // 3 sweep values x 4 runs
    }
    const counts = [...svg.matchAll(/data-count="(\d+)"/g)].map((m) => Number(m[1]));
    expect(counts.reduce((a, b) => a + b, 0)).toBe(24);
    expect(svg).toContain("Mean path hops per run");
  });

  test("histogram works without a sweep", () => {
    const { series } = buildFigure(nosweepRows, "PATH_HOPS_HIST");
    expect(series).toHaveLength(2);
    for (const s of series) {
      expect(s.points.reduce((acc, p) => acc + p.mean, 0)).toBe(6);
    }
  });

  test("sweep figures reject unswept input", () => {
    expect(() => buildFigure(nosweepRows, "ACCEPTANCE_VS_SWEEP")).toThrow(
      "no swept parameter"
    );
    expect(() => buildFigure(nosweepRows, "UTILIZATION_VS_SWEEP")).toThrow(
      "no swept parameter"
    );
  });
});

describe("axis helpers", () => {
  test("ticks land on round steps covering the domain", () => {
    expect(niceTicks(0, 1)).toEqual([0, 0.5, 1]);
    expect(niceTicks(0, 10)).toEqual([0, 5, 10]);
    const ticks = niceTicks(1.9, 8.1);
    expect(ticks[0]).toBeGreaterThanOrEqual(1.9);
    expect(ticks[ticks.length - 1]).toBeLessThanOrEqual(8.1 + 1e-9);
  });

  test("degenerate domains still pad", () => {
    const [lo, hi] = padDomain(3, 3);
    expect(lo).toBeLessThan(3);
    expect(hi).toBeGreaterThan(3);
  });
});
