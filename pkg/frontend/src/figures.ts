import { CsvError, MetricName, RunRow } from "./csv.js";
import { Cell, groupCells, policiesOf } from "./stats.js";
import {
  MARGIN,
  PALETTE,
  esc,
  legend,
  niceTicks,
  padDomain,
  panelChrome,
  svgDocument,
} from "./svg.js";

export const FIGURE_KINDS = [
  "ACCEPTANCE_VS_SWEEP",
  "UTILIZATION_VS_SWEEP",
  "PATH_HOPS_HIST",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export function parseKind(raw: string): FigureKind {
  const kind = raw.toUpperCase();
  if ((FIGURE_KINDS as readonly string[]).includes(kind)) return kind as FigureKind;
  throw new CsvError(`unknown figure kind ${JSON.stringify(raw)}; valid: ${FIGURE_KINDS.join(", ")}`);
}

export interface SeriesPoint {
  x: number;
  mean: number;
  std: number;
  nRuns: number;
}

/** The numbers a figure actually draws, one series per policy (and metric). */
export interface Series {
  policy: string;
  metric: MetricName;
  color: string;
  points: SeriesPoint[];
}

export interface Figure {
  svg: string;
  series: Series[];
}

const PANEL_W = 560;
const PANEL_H = 400;

const METRIC_TITLES: Partial<Record<MetricName, string>> = {
  acceptance_ratio: "Acceptance ratio",
  cpu_utilization: "CPU utilization",
  skr_utilization: "Secret-key-rate utilization",
};

function sweepSeries(rows: RunRow[], metric: MetricName): {
  series: Series[];
  param: string;
} {
  const cells = groupCells(rows);
  const param = cells.find((c) => c.sweepParam !== "")?.sweepParam ?? "";
  if (param === "" || cells.some((c) => c.sweepValue === "")) {
    throw new CsvError(
      "input has no swept parameter values; sweep figures need a sweep column"
    );
  }
  const policies = policiesOf(rows);
  const byPolicy = new Map<string, Cell[]>(policies.map((p) => [p, []]));
  for (const c of cells) byPolicy.get(c.policy)!.push(c);
  const series = policies.map((policy, i) => ({
    policy,
    metric,
    color: PALETTE[i % PALETTE.length],
    points: byPolicy
      .get(policy)!
      .map((c) => ({
        x: Number(c.sweepValue),
        mean: c.means[metric],
        std: c.stds[metric],
        nRuns: c.nRuns,
      }))
      .sort((a, b) => a.x - b.x),
  }));
  return { series, param };
}

function drawSeriesPanel(
  series: Series[],
  frameX0: number,
  title: string,
  xLabel: string,
  yLabel: string
): string[] {
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const lows = series.flatMap((s) => s.points.map((p) => p.mean - p.std));
  const highs = series.flatMap((s) => s.points.map((p) => p.mean + p.std));
  const { body, sx, sy } = panelChrome({
    x0: frameX0,
    width: PANEL_W,
    height: PANEL_H,
    title,
    xLabel,
    yLabel,
    xDomain: padDomain(Math.min(...xs), Math.max(...xs)),
    yDomain: padDomain(Math.min(...lows), Math.max(...highs)),
  });
  for (const s of series) {
    const line = s.points.map((p) => `${sx(p.x)},${sy(p.mean)}`).join(" ");
    body.push(`<polyline points="${line}" fill="none" stroke="${s.color}" stroke-width="2"/>`);
    for (const p of s.points) {
      const px = sx(p.x);
      const lo = sy(p.mean - p.std);
      const hi = sy(p.mean + p.std);
      body.push(
        `<line x1="${px}" y1="${lo}" x2="${px}" y2="${hi}" stroke="${s.color}" stroke-width="1.5"/>`,
        `<line x1="${px - 4}" y1="${hi}" x2="${px + 4}" y2="${hi}" stroke="${s.color}" stroke-width="1.5"/>`,
        `<line x1="${px - 4}" y1="${lo}" x2="${px + 4}" y2="${lo}" stroke="${s.color}" stroke-width="1.5"/>`,
        `<circle cx="${px}" cy="${sy(p.mean)}" r="3.2" fill="${s.color}" ` +
          `data-metric="${s.metric}" data-policy="${esc(s.policy)}" data-x="${p.x}" ` +
          `data-mean="${p.mean}" data-std="${p.std}"/>`
      );
    }
  }
  body.push(
    ...legend(
      frameX0 + PANEL_W - MARGIN.right - 170,
      MARGIN.top + 14,
      series.map((s) => ({ label: s.policy, color: s.color }))
    )
  );
  return body;
}

function acceptanceFigure(rows: RunRow[]): Figure {
  const { series, param } = sweepSeries(rows, "acceptance_ratio");
  const body = drawSeriesPanel(
    series,
    0,
    `${METRIC_TITLES.acceptance_ratio} vs ${param}`,
    param,
    "acceptance ratio"
  );
  return { svg: svgDocument(PANEL_W, PANEL_H, body), series };
}

function utilizationFigure(rows: RunRow[]): Figure {
  const cpu = sweepSeries(rows, "cpu_utilization");
  const skr = sweepSeries(rows, "skr_utilization");
  const body = [
    ...drawSeriesPanel(
      cpu.series,
      0,
      `${METRIC_TITLES.cpu_utilization} vs ${cpu.param}`,
      cpu.param,
      "utilization"
    ),
    ...drawSeriesPanel(
      skr.series,
      PANEL_W,
      `${METRIC_TITLES.skr_utilization} vs ${skr.param}`,
      skr.param,
      "utilization"
    ),
  ];
  return { svg: svgDocument(2 * PANEL_W, PANEL_H, body), series: [...cpu.series, ...skr.series] };
}

function histogramFigure(rows: RunRow[]): Figure {
  const policies = policiesOf(rows);
  const values = new Map(policies.map((p) => [p, [] as number[]]));
  for (const r of rows) values.get(r.policy)!.push(r.mean_path_hops);
  const all = rows.map((r) => r.mean_path_hops);
  let lo = Math.min(...all);
  let hi = Math.max(...all);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const nBins = Math.min(10, Math.max(4, Math.ceil(Math.sqrt(rows.length))));
  const width = (hi - lo) / nBins;
  const counts = new Map(
    policies.map((p) => {
      const c = new Array(nBins).fill(0);
      for (const v of values.get(p)!) {
        // top edge closes the last bin so the maximum lands inside
        const b = Math.min(nBins - 1, Math.floor((v - lo) / width));
        c[b] += 1;
      }
      return [p, c as number[]];
    })
  );
  const maxCount = Math.max(...[...counts.values()].flat());
  const { body, sx, sy } = panelChrome({
    x0: 0,
    width: PANEL_W,
    height: PANEL_H,
    title: "Mean path hops per run",
    xLabel: "mean_path_hops",
    yLabel: "runs",
    xDomain: padDomain(lo, hi),
    yDomain: [0, Math.max(1, Math.ceil(maxCount * 1.1))],
  });
  policies.forEach((policy, i) => {
    const color = PALETTE[i % PALETTE.length];
    counts.get(policy)!.forEach((count, b) => {
      if (count === 0) return;
      const x0 = sx(lo + b * width);
      const x1 = sx(lo + (b + 1) * width);
      const y = sy(count);
      body.push(
        `<rect x="${x0}" y="${y}" width="${x1 - x0}" height="${sy(0) - y}" ` +
          `fill="${color}" fill-opacity="0.45" stroke="${color}" ` +
          `data-policy="${esc(policy)}" data-bin-lo="${lo + b * width}" data-count="${count}"/>`
      );
    });
  });
  body.push(
    ...legend(
      PANEL_W - MARGIN.right - 170,
      MARGIN.top + 14,
      policies.map((p, i) => ({ label: p, color: PALETTE[i % PALETTE.length] }))
    )
  );
  // the histogram draws counts, not means; series carries the count points
  const series: Series[] = policies.map((policy, i) => ({
    policy,
    metric: "mean_path_hops",
    color: PALETTE[i % PALETTE.length],
    points: counts.get(policy)!.map((count, b) => ({
      x: lo + (b + 0.5) * width,
      mean: count,
      std: 0,
      nRuns: count,
    })),
  }));
  return { svg: svgDocument(PANEL_W, PANEL_H, body), series };
}

export function buildFigure(rows: RunRow[], kind: FigureKind): Figure {
  if (kind === "ACCEPTANCE_VS_SWEEP") return acceptanceFigure(rows);
  if (kind === "UTILIZATION_VS_SWEEP") return utilizationFigure(rows);
  return histogramFigure(rows);
}
