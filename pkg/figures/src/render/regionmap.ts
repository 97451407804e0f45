import { numbers, strings, type Table } from "../csv.js";
import {
  cellDomain, cellsIn, frameAxes, gridLayout, legend, panel,
  type LegendEntry,
} from "../plot.js";
import { document } from "../svg.js";
import { classColor, type Style } from "../style.js";

/** Fixed legend order across both map families. */
export const CLASS_ORDER = [
  "OscCoexistOrExtinction",
  "StatCoexistOrExtinction",
  "PreyOnlyOrExtinction",
  "ExtinctionOnly",
  "Undecided",
  "Stable",
  "Marginal",
  "Partial",
  "AlmostTotal",
  "Total",
  "NotApplicable",
];

export function classLegend(
  labels: readonly string[],
  style: Style,
): LegendEntry[] {
  const present = new Set(labels);
  const entries: LegendEntry[] = [];
  for (const label of CLASS_ORDER) {
    if (present.has(label)) {
      entries.push({ label, color: classColor(style, label) });
      present.delete(label);
    }
  }
  for (const label of [...present].sort()) {
    entries.push({ label, color: classColor(style, label) });
  }
  return entries;
}

/** Attractor census over a (r, second parameter) grid. */
export function renderRegionMap(
  grid: Table,
  secondName: string,
  style: Style,
): string {
  const rs = numbers(grid, "r");
  const seconds = numbers(grid, secondName);
  const labels = strings(grid, "class");

  const layout = gridLayout(1, 1, style);
  const { x0, y0 } = layout.pos(0);
  const p = panel(
    x0, y0, style.figure.panelWidth, style.figure.panelHeight,
    cellDomain(rs), cellDomain(seconds),
  );
  const body: string[] = [];
  body.push(cellsIn(p, rs, seconds, labels, style));
  body.push(frameAxes(p, style, "r (1/yr)", secondName, "attractor census"));
  body.push(legend(p.x0 + p.w + 8, p.y0, classLegend(labels, style), style));
  return document(layout.width + 180, layout.height, style.colors.background, body);
}
