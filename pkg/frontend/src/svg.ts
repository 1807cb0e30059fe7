/**
 * Deterministic hand-rolled SVG line plots.
 *
 * No DOM, no randomness, no timestamps: the same inputs always produce the
 * same bytes. Coordinates are emitted with fixed precision.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label?: string;
  width?: number;
  dash?: string;
}

export interface HLine {
  y: number;
  color: string;
  label?: string;
  dash?: string;
}

export interface Band {
  x0: number;
  x1: number;
  color: string;
  opacity: number;
}

export interface VTick {
  x: number;
  color: string;
}

export interface PanelSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  hlines?: HLine[];
  bands?: Band[];
  /** Vertical event markers drawn along the top of the plot area. */
  ticks?: VTick[];
  /** Extra annotation lines added under the legend. */
  notes?: string[];
  /** Force the y range to include these values. */
  yInclude?: number[];
}

const W = 860;
const PANEL_H = 300;
const MARGIN = { top: 34, right: 24, bottom: 46, left: 78 };

function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Tick label: compact scientific/decimal form, locale-independent. */
export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(2).replace(/\.?0+e/, "e");
  }
  const s = v.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const norm = step0 / mag;
  const step = (norm >= 5 ? 10 : norm >= 2 ? 5 : norm >= 1 ? 2 : 1) * mag;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function extent(values: number[], include: number[] = []): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  for (const v of include) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  const pad = (hi - lo) * 0.06;
  return [lo - pad, hi + pad];
}

/** One panel's SVG content, translated to (0, yOff) in the document. */
function panel(spec: PanelSpec, yOff: number): string {
  const iw = W - MARGIN.left - MARGIN.right;
  const ih = PANEL_H - MARGIN.top - MARGIN.bottom;
  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s) => s.y);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys, [
    ...(spec.yInclude ?? []),
    ...(spec.hlines ?? []).map((h) => h.y),
  ]);
  const sx = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0)) * iw;
  const sy = (v: number) => yOff + MARGIN.top + ih - ((v - y0) / (y1 - y0)) * ih;

  const parts: string[] = [];
  parts.push(
    `<rect x="${MARGIN.left}" y="${yOff + MARGIN.top}" width="${iw}" height="${ih}" fill="white" stroke="#444" stroke-width="1"/>`,
  );

  for (const b of spec.bands ?? []) {
    const bx0 = Math.max(x0, b.x0);
    const bx1 = Math.min(x1, b.x1);
    if (bx1 > bx0) {
      parts.push(
        `<rect x="${fmt(sx(bx0))}" y="${yOff + MARGIN.top}" width="${fmt(sx(bx1) - sx(bx0))}" height="${ih}" fill="${b.color}" opacity="${b.opacity}"/>`,
      );
    }
  }

  for (const tx of niceTicks(x0, x1, 8)) {
    const px = fmt(sx(tx));
    parts.push(
      `<line x1="${px}" y1="${yOff + MARGIN.top}" x2="${px}" y2="${yOff + MARGIN.top + ih}" stroke="#ddd" stroke-width="0.6"/>`,
      `<text x="${px}" y="${yOff + MARGIN.top + ih + 16}" font-size="11" text-anchor="middle" fill="#222">${tickLabel(tx)}</text>`,
    );
  }
  for (const ty of niceTicks(y0, y1, 6)) {
    const py = fmt(sy(ty));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + iw}" y2="${py}" stroke="#ddd" stroke-width="0.6"/>`,
      `<text x="${MARGIN.left - 6}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle" fill="#222">${tickLabel(ty)}</text>`,
    );
  }

  for (const h of spec.hlines ?? []) {
    const py = fmt(sy(h.y));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + iw}" y2="${py}" stroke="${h.color}" stroke-width="1.2" stroke-dasharray="${h.dash ?? "6 4"}"/>`,
    );
    if (h.label) {
      parts.push(
        `<text x="${MARGIN.left + iw - 4}" y="${fmt(sy(h.y) - 4)}" font-size="11" text-anchor="end" fill="${h.color}">${esc(h.label)}</text>`,
      );
    }
  }

  for (const s of spec.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      pts.push(`${fmt(sx(s.x[i]))},${fmt(sy(s.y[i]))}`);
    }
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="${s.width ?? 1.5}"${dash}/>`,
    );
  }

  for (const m of spec.ticks ?? []) {
    if (m.x < x0 || m.x > x1) continue;
    const px = fmt(sx(m.x));
    parts.push(
      `<line x1="${px}" y1="${yOff + MARGIN.top + 2}" x2="${px}" y2="${yOff + MARGIN.top + 14}" stroke="${m.color}" stroke-width="2"/>`,
    );
  }

  parts.push(
    `<text x="${MARGIN.left}" y="${yOff + 20}" font-size="14" font-weight="bold" fill="#111">${esc(spec.title)}</text>`,
    `<text x="${MARGIN.left + iw / 2}" y="${yOff + PANEL_H - 10}" font-size="12" text-anchor="middle" fill="#222">${esc(spec.xLabel)}</text>`,
    `<text transform="translate(16,${yOff + MARGIN.top + ih / 2}) rotate(-90)" font-size="12" text-anchor="middle" fill="#222">${esc(spec.yLabel)}</text>`,
  );

  // legend: labeled series swatches, then annotation notes
  let ly = yOff + MARGIN.top + 14;
  const lx = MARGIN.left + 10;
  for (const s of spec.series) {
    if (!s.label) continue;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""}/>`,
      `<text x="${lx + 28}" y="${ly}" font-size="11" fill="#111">${esc(s.label)}</text>`,
    );
    ly += 15;
  }
  for (const note of spec.notes ?? []) {
    parts.push(`<text x="${lx}" y="${ly}" font-size="11" fill="#111">${esc(note)}</text>`);
    ly += 15;
  }
  return parts.join("\n");
}

/** Full SVG document from stacked panels. */
export function render(panels: PanelSpec[]): string {
  const height = PANEL_H * panels.length;
  const body = panels.map((p, i) => panel(p, i * PANEL_H)).join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${height}" viewBox="0 0 ${W} ${height}">`,
    `<rect width="${W}" height="${height}" fill="white"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
