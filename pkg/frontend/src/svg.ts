export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export const MARGIN = { top: 42, right: 16, bottom: 52, left: 64 };

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function linearScale(
  domain: [number, number],
  range: [number, number]
): (x: number) => number {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (x) => r0 + ((x - d0) / span) * (r1 - r0);
}

/** Round tick positions covering [lo, hi] at a 1/2/5 step. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(1, count - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= rawStep) {
      step = mag * mult;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = start; t <= hi + step * 1e-9; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks.length > 0 ? ticks : [lo];
}

export function fmtTick(x: number): string {
  return String(Number(x.toPrecision(10)));
}

/** Pad a data domain by 5% each side; degenerate domains get a unit pad. */
export function padDomain(lo: number, hi: number): [number, number] {
  if (!(hi > lo)) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.1;
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * 0.05;
  return [lo - pad, hi + pad];
}

export interface PanelFrame {
  x0: number;
  width: number;
  height: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xDomain: [number, number];
  yDomain: [number, number];
}

/** Axes, tick marks, grid, title, and labels for one plot panel. */
export function panelChrome(f: PanelFrame): {
  body: string[];
  sx: (x: number) => number;
  sy: (y: number) => number;
} {
  const left = f.x0 + MARGIN.left;
  const right = f.x0 + f.width - MARGIN.right;
  const top = MARGIN.top;
  const bottom = f.height - MARGIN.bottom;
  const sx = linearScale(f.xDomain, [left, right]);
  const sy = linearScale(f.yDomain, [bottom, top]);
  const body: string[] = [];
  body.push(
    `<text x="${(left + right) / 2}" y="${top - 18}" text-anchor="middle" font-size="15" font-weight="bold">${esc(f.title)}</text>`
  );
  for (const t of niceTicks(f.xDomain[0], f.xDomain[1])) {
    const px = sx(t);
    body.push(
      `<line x1="${px}" y1="${top}" x2="${px}" y2="${bottom}" stroke="#ddd"/>`,
      `<line x1="${px}" y1="${bottom}" x2="${px}" y2="${bottom + 5}" stroke="#333"/>`,
      `<text x="${px}" y="${bottom + 19}" text-anchor="middle" font-size="11">${fmtTick(t)}</text>`
    );
  }
  for (const t of niceTicks(f.yDomain[0], f.yDomain[1])) {
    const py = sy(t);
    body.push(
      `<line x1="${left}" y1="${py}" x2="${right}" y2="${py}" stroke="#ddd"/>`,
      `<line x1="${left - 5}" y1="${py}" x2="${left}" y2="${py}" stroke="#333"/>`,
      `<text x="${left - 8}" y="${py + 4}" text-anchor="end" font-size="11">${fmtTick(t)}</text>`
    );
  }
  body.push(
    `<line x1="${left}" y1="${bottom}" x2="${right}" y2="${bottom}" stroke="#333"/>`,
    `<line x1="${left}" y1="${top}" x2="${left}" y2="${bottom}" stroke="#333"/>`,
    `<text x="${(left + right) / 2}" y="${f.height - 14}" text-anchor="middle" font-size="13">${esc(f.xLabel)}</text>`,
    `<text transform="translate(${f.x0 + 16},${(top + bottom) / 2}) rotate(-90)" text-anchor="middle" font-size="13">${esc(f.yLabel)}</text>`
  );
  return { body, sx, sy };
}

export function legend(
  x: number,
  y: number,
  entries: { label: string; color: string }[]
): string[] {
  const body: string[] = [];
  entries.forEach((e, i) => {
    const ey = y + i * 18;
    body.push(
      `<line x1="${x}" y1="${ey}" x2="${x + 22}" y2="${ey}" stroke="${e.color}" stroke-width="2"/>`,
      `<circle cx="${x + 11}" cy="${ey}" r="3" fill="${e.color}"/>`,
      `<text x="${x + 28}" y="${ey + 4}" font-size="12">${esc(e.label)}</text>`
    );
  });
  return body;
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
