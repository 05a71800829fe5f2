import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, test, vi } from "vitest";

import { cliMain } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");
const SWEEP = join(FIXTURES, "sweep/runs.csv");

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-cli-"));
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("render command", () => {
  test("writes an SVG and reports the self-check", async () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    const out = join(tmp(), "fig.svg");
    const code = await cliMain([
      "render",
      "--input",
      SWEEP,
      "--kind",
      "ACCEPTANCE_VS_SWEEP",
      "--output",
      out,
    ]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    const printed = log.mock.calls.map((c) => c.join(" ")).join("\n");
    expect(printed).toContain("self-check: recomputed means match summary.csv within 1e-9");
    expect(printed).toContain("ACCEPTANCE_VS_SWEEP, 2 series");
  });

  test("skips the self-check when no summary.csv is adjacent", async () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    const dir = tmp();
    const input = join(dir, "runs.csv");
    execFileSync("cp", [SWEEP, input]);
    const code = await cliMain([
      "render",
      "--input",
      input,
      "--kind",
      "path_hops_hist",
      "--output",
      join(dir, "hist.svg"),
    ]);
    expect(code).toBe(0);
    const printed = log.mock.calls.map((c) => c.join(" ")).join("\n");
    expect(printed).toContain("no summary.csv next to input, skipped");
  });

  test("schema mismatch exits nonzero naming the columns", async () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const code = await cliMain([
      "render",
      "--input",
      join(FIXTURES, "badschema/runs.csv"),
      "--kind",
      "ACCEPTANCE_VS_SWEEP",
      "--output",
      join(tmp(), "fig.svg"),
    ]);
    expect(code).toBe(1);
    const printed = err.mock.calls.map((c) => c.join(" ")).join("\n");
    expect(printed).toContain("missing column(s): policy, acceptance_ratio");
  });

  test("header-only input exits nonzero with no data rows", async () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const code = await cliMain([
      "render",
      "--input",
      join(FIXTURES, "headeronly/runs.csv"),
      "--kind",
      "PATH_HOPS_HIST",
      "--output",
      join(tmp(), "fig.svg"),
    ]);
    expect(code).toBe(1);
    expect(err.mock.calls.join("\n")).toContain("no data rows");
  });

  test("missing file and unknown kind are reported", async () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(
      await cliMain([
        "render",
        "--input",
        join(FIXTURES, "absent.csv"),
        "--kind",
        "PATH_HOPS_HIST",
        "--output",
        join(tmp(), "f.svg"),
      ])
    ).toBe(1);
    expect(
      await cliMain(["render", "--input", SWEEP, "--kind", "PIE", "--output", join(tmp(), "f.svg")])
    ).toBe(1);
    const printed = err.mock.calls.map((c) => c.join(" ")).join("\n");
    expect(printed).toContain("ENOENT");
    expect(printed).toContain("unknown figure kind");
  });

  test("bad invocations print usage and exit 2", async () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(await cliMain([])).toBe(2);
    expect(await cliMain(["plot", "--input", SWEEP])).toBe(2);
    expect(await cliMain(["render", "--input", SWEEP, "--kind", "PATH_HOPS_HIST"])).toBe(2);
    expect(await cliMain(["render", "--mystery", "1"])).toBe(2);
    expect(err.mock.calls.join("\n")).toContain("usage:");
  });

  test("the compiled bin renders end to end", () => {
    const out = join(tmp(), "fig.svg");
    const stdout = execFileSync(
      "node",
      [
        join(__dirname, "../dist/cli.js"),
        "render",
        "--input",
        SWEEP,
        "--kind",
        "UTILIZATION_VS_SWEEP",
        "--output",
        out,
      ],
      { encoding: "utf8" }
    );
    expect(stdout).toContain("wrote");
    expect(existsSync(out)).toBe(true);
  });

  test("--png produces a PNG when sharp is available", async () => {
    let hasSharp = true;
    try {
      await import("sharp");
    } catch {
      hasSharp = false;
    }
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    vi.spyOn(console, "log").mockImplementation(() => {});
    const out = join(tmp(), "fig.png");
    const code = await cliMain([
      "render",
      "--input",
      SWEEP,
      "--kind",
      "ACCEPTANCE_VS_SWEEP",
      "--output",
      out,
      "--png",
    ]);
    if (hasSharp) {
      expect(code).toBe(0);
      const magic = readFileSync(out).subarray(0, 8);
      expect([...magic]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    } else {
      expect(code).toBe(1);
      expect(err.mock.calls.join("\n")).toContain("sharp");
    }
  });
});
