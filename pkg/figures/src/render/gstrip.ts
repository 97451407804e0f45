import { numbers, strings, type Table } from "../csv.js";
import {
  dotsIn, finiteExtent, frameAxes, gridLayout, legend, panel,
  polylineIn, type Panel,
} from "../plot.js";
import { document } from "../svg.js";
import type { Style } from "../style.js";

/** Cycle-family strip between two climate levels: samples colored by
 * their side of the shared threshold (pink = outside the basin), the
 * threshold itself, and the recorded tipping states as black dots. */
export function renderGStrip(
  strip: Table,
  threshold: Table,
  records: Table | null,
  style: Style,
): string {
  const stripN = numbers(strip, "N");
  const stripP = numbers(strip, "P").map((v) => v * 1e3);
  const regions = strings(strip, "region");
  const thrN = numbers(threshold, "N");
  const thrP = numbers(threshold, "P").map((v) => v * 1e3);

  const tipN: number[] = [];
  const tipP: number[] = [];
  if (records !== null) {
    const kinds = strings(records, "kind");
    const nB = numbers(records, "N_b");
    const pB = numbers(records, "P_b");
    for (let i = 0; i < kinds.length; i++) {
      if (kinds[i] === "") continue;
      tipN.push(nB[i]);
      tipP.push(pB[i] * 1e3);
    }
  }

  const layout = gridLayout(1, 1, style);
  const { x0, y0 } = layout.pos(0);
  const p = panel(
    x0, y0,
    style.figure.panelWidth * 1.6, style.figure.panelHeight * 1.3,
    finiteExtent(stripN.concat(thrN, tipN)),
    finiteExtent(stripP.concat(thrP, tipP)),
  );

  const body: string[] = [];
  body.push(frameAxes(
    p, style, "N", "P (×10⁻³)", "cycle strip and threshold"));
  body.push(regionDots(p, stripN, stripP, regions, "stable",
    style.dotRadius * 0.7, style.colors.cycle));
  body.push(regionDots(p, stripN, stripP, regions, "indeterminate",
    style.dotRadius * 0.7, style.colors.indeterminate));
  body.push(regionDots(p, stripN, stripP, regions, "unstable",
    style.dotRadius * 0.7, style.colors.unstable));
  body.push(polylineIn(p, thrN, thrP, style.colors.threshold, {
    width: style.lineWidth,
  }));
  body.push(dotsIn(p, tipN, tipP, style.dotRadius, style.colors.tipping));
  body.push(legend(p.x0 + p.w + 8, p.y0, [
    { label: "strip (inside)", color: style.colors.cycle },
    { label: "strip (outside)", color: style.colors.unstable },
    { label: "indeterminate", color: style.colors.indeterminate },
    { label: "θ (threshold)", color: style.colors.threshold },
    { label: "tipping states", color: style.colors.tipping },
  ], style));
  const width = 2 * style.figure.margin + p.w + 160;
  const height = 2 * style.figure.margin + p.h;
  return document(width, height, style.colors.background, body);
}

function regionDots(
  p: Panel,
  xs: readonly number[],
  ys: readonly number[],
  regions: readonly string[],
  wanted: string,
  radius: number,
  color: string,
): string {
  const px: number[] = [];
  const py: number[] = [];
  for (let i = 0; i < regions.length; i++) {
    if (regions[i] !== wanted) continue;
    px.push(xs[i]);
    py.push(ys[i]);
  }
  return dotsIn(p, px, py, radius, color);
}
