#!/usr/bin/env node
import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { basename, dirname } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { CsvError, parseRuns } from "./csv.js";
import { FIGURE_KINDS, buildFigure, parseKind } from "./figures.js";
import { checkSiblingSummary } from "./selfcheck.js";

const USAGE = `usage: qkdadmit-plots render --input <runs.csv> --kind <kind> --output <path> [--png]
kinds: ${FIGURE_KINDS.join(" | ")}`;

async function writePng(svg: string, output: string): Promise<void> {
  let sharp;
  try {
    sharp = (await import("sharp")).default;
  } catch {
    throw new CsvError("--png needs the optional sharp package (npm install sharp)");
  }
  await sharp(Buffer.from(svg)).png().toFile(output);
}

export async function cliMain(argv: string[]): Promise<number> {
  let args;
  try {
    args = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        input: { type: "string" },
        kind: { type: "string" },
        output: { type: "string" },
        png: { type: "boolean", default: false },
      },
    });
  } catch (e) {
    console.error(`error: ${(e as Error).message}\n${USAGE}`);
    return 2;
  }
  const { input, kind: rawKind, output, png } = args.values;
  if (args.positionals[0] !== "render" || args.positionals.length !== 1 || !input || !rawKind || !output) {
    console.error(USAGE);
    return 2;
  }

  try {
    const kind = parseKind(rawKind);
    const text = readFileSync(input, "utf8");
    const rows = parseRuns(text, basename(input));
    if (checkSiblingSummary(input, rows)) {
      console.log("self-check: recomputed means match summary.csv within 1e-9");
    } else {
      console.log("self-check: no summary.csv next to input, skipped");
    }
    const figure = buildFigure(rows, kind);
    mkdirSync(dirname(output) || ".", { recursive: true });
    if (png) {
      await writePng(figure.svg, output);
    } else {
      writeFileSync(output, figure.svg);
    }
    console.log(`wrote ${output} (${kind}, ${figure.series.length} series)`);
    return 0;
  } catch (e) {
    if (e instanceof CsvError || (e as NodeJS.ErrnoException).code !== undefined) {
      console.error(`error: ${(e as Error).message}`);
      return 1;
    }
    throw e;
  }
}

if (import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(await cliMain(process.argv.slice(2)));
}
