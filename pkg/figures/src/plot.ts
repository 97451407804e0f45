import { scaleLinear, type ScaleLinear } from "d3-scale";
import { el, fmt, text, type TextOptions } from "./svg.js";
import { classColor, type Style } from "./style.js";

/** One axes rectangle with data-to-pixel scales. */
export interface Panel {
  x0: number;
  y0: number;
  w: number;
  h: number;
  x: ScaleLinear<number, number>;
  y: ScaleLinear<number, number>;
}

/** Data extent over finite values, padded; degenerate inputs widen. */
export function finiteExtent(
  values: readonly number[],
  pad = 0.05,
  fallback: [number, number] = [0, 1],
): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) return fallback;
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export function panel(
  x0: number,
  y0: number,
  w: number,
  h: number,
  xDomain: [number, number],
  yDomain: [number, number],
): Panel {
  const x = scaleLinear().domain(xDomain).range([x0, x0 + w]);
  const y = scaleLinear().domain(yDomain).range([y0 + h, y0]);
  return { x0, y0, w, h, x, y };
}

function font(style: Style) {
  return {
    family: style.fontFamily,
    size: style.fontSize,
    color: style.colors.text,
  };
}

/** Tick label: plain decimal, shortest round-trip of the nice value. */
export function tickLabel(value: number): string {
  return String(Number(value.toPrecision(12)));
}

/** Frame, grid, ticks, axis labels, optional title. */
export function frameAxes(
  p: Panel,
  style: Style,
  xLabel: string,
  yLabel: string,
  title?: string,
): string {
  const parts: string[] = [];
  const f = font(style);
  for (const tx of p.x.ticks(5)) {
    const px = p.x(tx);
    parts.push(el("line", {
      x1: fmt(px), y1: fmt(p.y0), x2: fmt(px), y2: fmt(p.y0 + p.h),
      stroke: style.colors.grid, "stroke-width": "0.6",
    }));
    parts.push(el("line", {
      x1: fmt(px), y1: fmt(p.y0 + p.h), x2: fmt(px), y2: fmt(p.y0 + p.h + 4),
      stroke: style.colors.frame, "stroke-width": "1",
    }));
    parts.push(text(px, p.y0 + p.h + 15, tickLabel(tx), f, { anchor: "middle" }));
  }
  for (const ty of p.y.ticks(5)) {
    const py = p.y(ty);
    parts.push(el("line", {
      x1: fmt(p.x0), y1: fmt(py), x2: fmt(p.x0 + p.w), y2: fmt(py),
      stroke: style.colors.grid, "stroke-width": "0.6",
    }));
    parts.push(el("line", {
      x1: fmt(p.x0 - 4), y1: fmt(py), x2: fmt(p.x0), y2: fmt(py),
      stroke: style.colors.frame, "stroke-width": "1",
    }));
    parts.push(text(p.x0 - 6, py + 3.5, tickLabel(ty), f, { anchor: "end" }));
  }
  parts.push(el("rect", {
    x: fmt(p.x0), y: fmt(p.y0), width: fmt(p.w), height: fmt(p.h),
    fill: "none", stroke: style.colors.frame, "stroke-width": "1",
  }));
  parts.push(text(p.x0 + p.w / 2, p.y0 + p.h + 30, xLabel, f, { anchor: "middle" }));
  parts.push(text(p.x0 - 38, p.y0 + p.h / 2, yLabel, f, {
    anchor: "middle", rotate: -90,
  }));
  if (title !== undefined) {
    parts.push(text(p.x0 + p.w / 2, p.y0 - 8, title, f, {
      anchor: "middle", bold: true,
    }));
  }
  return parts.join("\n");
}

function scaledPoints(p: Panel, xs: readonly number[], ys: readonly number[]) {
  const segments: string[][] = [];
  let current: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      if (current.length > 0) segments.push(current);
      current = [];
      continue;
    }
    current.push(`${fmt(p.x(x))},${fmt(p.y(y))}`);
  }
  if (current.length > 0) segments.push(current);
  return segments;
}

export interface StrokeOptions {
  width?: number;
  dash?: string;
  opacity?: number;
}

/** Polyline through the data, split at non-finite samples. */
export function polylineIn(
  p: Panel,
  xs: readonly number[],
  ys: readonly number[],
  stroke: string,
  options: StrokeOptions = {},
): string {
  const parts: string[] = [];
  for (const segment of scaledPoints(p, xs, ys)) {
    if (segment.length < 2) continue;
    const attrs: Record<string, string> = {
      points: segment.join(" "),
      fill: "none",
      stroke,
      "stroke-width": fmt(options.width ?? 1.4),
    };
    if (options.dash) attrs["stroke-dasharray"] = options.dash;
    if (options.opacity !== undefined) attrs["stroke-opacity"] = fmt(options.opacity);
    parts.push(el("polyline", attrs));
  }
  return parts.join("\n");
}

/** Closed filled polygon (non-finite vertices are dropped). */
export function polygonIn(
  p: Panel,
  xs: readonly number[],
  ys: readonly number[],
  fill: string,
  opacity: number,
): string {
  const points: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    points.push(`${fmt(p.x(x))},${fmt(p.y(y))}`);
  }
  if (points.length < 3) return "";
  return el("polygon", {
    points: points.join(" "),
    fill,
    "fill-opacity": fmt(opacity),
    stroke: "none",
  });
}

/** Dots at the data points (non-finite points are skipped). */
export function dotsIn(
  p: Panel,
  xs: readonly number[],
  ys: readonly number[],
  radius: number,
  fill: string,
  opacity?: number,
): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    const attrs: Record<string, string> = {
      cx: fmt(p.x(x)), cy: fmt(p.y(y)), r: fmt(radius), fill,
    };
    if (opacity !== undefined) attrs["fill-opacity"] = fmt(opacity);
    parts.push(el("circle", attrs));
  }
  return parts.join("\n");
}

/** Histogram bars on [lo_i, hi_i) with the given counts. */
export function barsIn(
  p: Panel,
  lo: readonly number[],
  hi: readonly number[],
  counts: readonly number[],
  fill: string,
  opacity = 1.0,
): string {
  const parts: string[] = [];
  const base = p.y(Math.max(0, p.y.domain()[0]));
  for (let i = 0; i < counts.length; i++) {
    const l = lo[i];
    const h = hi[i];
    const c = counts[i];
    if (!Number.isFinite(l) || !Number.isFinite(h) || !Number.isFinite(c)) continue;
    const xl = p.x(l);
    const xr = p.x(h);
    const yt = p.y(c);
    if (base - yt <= 0) continue;
    parts.push(el("rect", {
      x: fmt(xl),
      y: fmt(yt),
      width: fmt(Math.max(0, xr - xl - 0.5)),
      height: fmt(base - yt),
      fill,
      "fill-opacity": fmt(opacity),
    }));
  }
  return parts.join("\n");
}

/** Piecewise-constant curve from epoch starts, durations, and levels. */
export function stepIn(
  p: Panel,
  starts: readonly number[],
  durations: readonly number[],
  levels: readonly number[],
  stroke: string,
  options: StrokeOptions = {},
): string {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < starts.length; i++) {
    const t0 = starts[i];
    const value = levels[i];
    xs.push(t0, t0 + durations[i]);
    ys.push(value, value);
  }
  return polylineIn(p, xs, ys, stroke, options);
}

/** Uniform-grid cells colored by class label. */
export function cellsIn(
  p: Panel,
  xs: readonly number[],
  ys: readonly number[],
  labels: readonly string[],
  style: Style,
): string {
  const dx = gridSpacing(xs);
  const dy = gridSpacing(ys);
  const parts: string[] = [];
  for (let i = 0; i < labels.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    const xl = p.x(x - dx / 2);
    const xr = p.x(x + dx / 2);
    const yt = p.y(y + dy / 2);
    const yb = p.y(y - dy / 2);
    parts.push(el("rect", {
      x: fmt(xl),
      y: fmt(yt),
      width: fmt(xr - xl),
      height: fmt(yb - yt),
      fill: classColor(style, labels[i]),
    }));
  }
  return parts.join("\n");
}

function gridSpacing(values: readonly number[]): number {
  const unique = Array.from(new Set(values.filter(Number.isFinite))).sort(
    (a, b) => a - b,
  );
  if (unique.length < 2) return 1;
  return (unique[unique.length - 1] - unique[0]) / (unique.length - 1);
}

/** Cell-map domain padded by half a cell so edge cells stay inside. */
export function cellDomain(values: readonly number[]): [number, number] {
  const half = gridSpacing(values) / 2;
  const [lo, hi] = finiteExtent(values, 0);
  return [lo - half, hi + half];
}

export interface LegendEntry {
  label: string;
  color: string;
}

/** Vertical swatch legend anchored at (x, y). */
export function legend(
  x: number,
  y: number,
  entries: readonly LegendEntry[],
  style: Style,
): string {
  const parts: string[] = [];
  const f = font(style);
  entries.forEach((entry, i) => {
    const rowY = y + i * 15;
    parts.push(el("rect", {
      x: fmt(x), y: fmt(rowY), width: "10", height: "10",
      fill: entry.color, stroke: style.colors.frame, "stroke-width": "0.5",
    }));
    parts.push(text(x + 14, rowY + 9, entry.label, f));
  });
  return parts.join("\n");
}

/** Centered note for an optional input that is absent. */
export function absentNote(p: Panel, style: Style, message: string): string {
  return text(p.x0 + p.w / 2, p.y0 + p.h / 2, message, font(style), {
    anchor: "middle",
  });
}

/** Multi-panel grid layout in figure pixels. */
export interface Layout {
  width: number;
  height: number;
  pos(index: number): { x0: number; y0: number };
}

export function gridLayout(cols: number, rows: number, style: Style): Layout {
  const { panelWidth, panelHeight, margin, gap } = style.figure;
  const cell = (k: number, size: number) => margin + k * (size + gap);
  return {
    width: 2 * margin + cols * panelWidth + (cols - 1) * gap,
    height: 2 * margin + rows * panelHeight + (rows - 1) * gap,
    pos(index: number) {
      const col = index % cols;
      const row = Math.floor(index / cols);
      return { x0: cell(col, panelWidth), y0: cell(row, panelHeight) };
    },
  };
}

export type { TextOptions };
