import { numbers, strings, type Table } from "../csv.js";
import {
  absentNote, barsIn, dotsIn, finiteExtent, frameAxes, gridLayout, legend,
  panel, polylineIn, stepIn, type Panel,
} from "../plot.js";
import { document } from "../svg.js";
import type { Style } from "../style.js";

const TAU = 2 * Math.PI;

/** Six-panel Monte Carlo summary: the example climate path, the example
 * run, the pre/post scatter, the tipping states over the cycle and
 * threshold, the invariant measure, and the tipping-phase histogram. */
export function renderMonteCarlo(
  records: Table,
  histPhase: Table,
  examples: { signal: Table; run: Table },
  measure: { window: Table | null; bins: Table | null },
  overlay: { cycle: Table | null; threshold: Table | null },
  style: Style,
): string {
  const layout = gridLayout(3, 2, style);
  const w = style.figure.panelWidth;
  const h = style.figure.panelHeight;
  const body: string[] = [];
  const at = (i: number, xd: [number, number], yd: [number, number]) => {
    const { x0, y0 } = layout.pos(i);
    return panel(x0, y0, w, h, xd, yd);
  };

  // (a) climate path of the example run
  const starts = numbers(examples.signal, "start_yr");
  const durations = numbers(examples.signal, "duration_yr");
  const levels = numbers(examples.signal, "r_value");
  const runT = numbers(examples.run, "t_yr");
  const tEnd = runT.length > 0 ? runT[runT.length - 1] : 0;
  const visible: number[] = [];
  for (let i = 0; i < starts.length; i++) {
    if (starts[i] <= tEnd) visible.push(i);
  }
  const pa = at(0, finiteExtent([0, tEnd], 0.02), finiteExtent(levels));
  body.push(frameAxes(pa, style, "t (yr)", "r (1/yr)", "climate path"));
  body.push(stepIn(
    pa,
    visible.map((i) => starts[i]),
    visible.map((i) => Math.min(durations[i], tEnd - starts[i])),
    visible.map((i) => levels[i]),
    style.colors.signal,
    { width: style.lineWidth },
  ));

  // (b) example run
  const runN = numbers(examples.run, "N");
  const runP = numbers(examples.run, "P").map((v) => v * 1e3);
  const pb = at(1, finiteExtent(runT, 0.02), finiteExtent(runN.concat(runP)));
  body.push(frameAxes(pb, style, "t (yr)", "N, P (×10⁻³)", "example run"));
  body.push(polylineIn(pb, runT, runN, style.colors.prey, { width: 1.1 }));
  body.push(polylineIn(pb, runT, runP, style.colors.predator, { width: 1.1 }));
  body.push(legend(pb.x0 + 8, pb.y0 + 6, [
    { label: "N", color: style.colors.prey },
    { label: "P (×10⁻³)", color: style.colors.predator },
  ], style));

  // (c) tipping switch levels
  const kinds = strings(records, "kind");
  const rPre = numbers(records, "r_pre");
  const rPost = numbers(records, "r_post");
  const levelsDomain = finiteExtent(rPre.concat(rPost), 0.05, [0, 1]);
  const pc = at(2, levelsDomain, levelsDomain);
  body.push(frameAxes(pc, style, "r before switch", "r after switch", "tipping switches"));
  body.push(polylineIn(pc, levelsDomain, levelsDomain, style.colors.grid, {
    width: 1, dash: "3 3",
  }));
  body.push(kindDots(pc, rPre, rPost, kinds, "B", style.dotRadius, style.colors.tippingB));
  body.push(kindDots(pc, rPre, rPost, kinds, "P", style.dotRadius, style.colors.tipping));
  body.push(legend(pc.x0 + 8, pc.y0 + 6, [
    { label: "P-events", color: style.colors.tipping },
    { label: "B-events", color: style.colors.tippingB },
  ], style));

  // (d) tipping states over the cycle and the threshold
  const nB = numbers(records, "N_b");
  const pB = numbers(records, "P_b").map((v) => v * 1e3);
  const cycN = overlay.cycle ? numbers(overlay.cycle, "N") : [];
  const cycP = overlay.cycle
    ? numbers(overlay.cycle, "P").map((v) => v * 1e3)
    : [];
  const thrN = overlay.threshold ? numbers(overlay.threshold, "N") : [];
  const thrP = overlay.threshold
    ? numbers(overlay.threshold, "P").map((v) => v * 1e3)
    : [];
  const pd = at(
    3,
    finiteExtent(nB.concat(cycN, thrN)),
    finiteExtent(pB.concat(cycP, thrP)),
  );
  body.push(frameAxes(pd, style, "N", "P (×10⁻³)", "tipping states"));
  if (overlay.threshold) {
    body.push(polylineIn(pd, thrN, thrP, style.colors.threshold, {
      width: style.lineWidth,
    }));
  }
  if (overlay.cycle) {
    body.push(polylineIn(pd, closeLoop(cycN), closeLoop(cycP), style.colors.cycle, {
      width: style.lineWidth,
    }));
  }
  if (!overlay.cycle && !overlay.threshold) {
    body.push(absentNote(pd, style, "no overlay inputs"));
  }
  body.push(kindDots(pd, nB, pB, kinds, "B", style.dotRadius, style.colors.tippingB));
  body.push(kindDots(pd, nB, pB, kinds, "P", style.dotRadius, style.colors.tipping));

  // (e) invariant measure on the cycle
  const pe = at(
    4,
    [0, TAU],
    measure.window
      ? finiteExtent(numbers(measure.window, "mass"), 0.05, [0, 1])
      : [0, 1],
  );
  body.push(frameAxes(pe, style, "φ (rad)", "mass", "invariant measure"));
  if (measure.bins) {
    body.push(barsIn(
      pe,
      numbers(measure.bins, "bin_lo_rad"),
      numbers(measure.bins, "bin_hi_rad"),
      numbers(measure.bins, "mass"),
      style.colors.measureBins,
      0.8,
    ));
  }
  if (measure.window) {
    body.push(polylineIn(
      pe,
      numbers(measure.window, "phi_rad"),
      numbers(measure.window, "mass"),
      style.colors.measure,
      { width: style.lineWidth },
    ));
  } else {
    body.push(absentNote(pe, style, "no measure inputs"));
  }

  // (f) tipping-phase histogram
  const lo = numbers(histPhase, "bin_lo_rad");
  const hi = numbers(histPhase, "bin_hi_rad");
  const all = numbers(histPhase, "count_all");
  const bCounts = numbers(histPhase, "count_b");
  const pCounts = numbers(histPhase, "count_p");
  const pf = at(5, [0, TAU], finiteExtent(all.concat([0]), 0.05, [0, 1]));
  body.push(frameAxes(pf, style, "φ at switch (rad)", "count", "tipping phases"));
  body.push(barsIn(pf, lo, hi, all, style.colors.histAll));
  body.push(barsIn(pf, lo, hi, bCounts, style.colors.histB, 0.85));
  body.push(barsIn(pf, lo, hi, pCounts, style.colors.histP, 0.85));
  body.push(legend(pf.x0 + 8, pf.y0 + 6, [
    { label: "all", color: style.colors.histAll },
    { label: "B", color: style.colors.histB },
    { label: "P", color: style.colors.histP },
  ], style));

  return document(layout.width, layout.height, style.colors.background, body);
}

function closeLoop(values: readonly number[]): number[] {
  return values.length > 0 ? [...values, values[0]] : [];
}

function kindDots(
  p: Panel,
  xs: readonly number[],
  ys: readonly number[],
  kinds: readonly string[],
  wanted: string,
  radius: number,
  color: string,
): string {
  const px: number[] = [];
  const py: number[] = [];
  for (let i = 0; i < kinds.length; i++) {
    if (kinds[i] !== wanted) continue;
    px.push(xs[i]);
    py.push(ys[i]);
  }
  return dotsIn(p, px, py, radius, color);
}
