import { numbers, strings, type Table } from "../csv.js";
import {
  dotsIn, finiteExtent, frameAxes, gridLayout, legend, panel,
  polygonIn, polylineIn, type Panel,
} from "../plot.js";
import { document } from "../svg.js";
import type { Style } from "../style.js";

/** One-parameter bifurcation diagram: attractor extremes plus every
 * equilibrium branch against the prey growth rate r. */
export function renderScan(
  branch: Table,
  equilibria: Table,
  style: Style,
): string {
  const rs = numbers(branch, "r");
  const kinds = strings(branch, "kind");
  const nMin = numbers(branch, "n_min");
  const nMax = numbers(branch, "n_max");
  const pMin = numbers(branch, "p_min").map((v) => v * 1e3);
  const pMax = numbers(branch, "p_max").map((v) => v * 1e3);

  const eqR = numbers(equilibria, "r");
  const eqN = numbers(equilibria, "N");
  const eqP = numbers(equilibria, "P").map((v) => v * 1e3);
  const eqLabel = strings(equilibria, "label");
  const eqStability = strings(equilibria, "stability");

  const layout = gridLayout(1, 2, style);
  const xDomain = finiteExtent(rs.concat(eqR), 0.02);
  const top = panel(
    layout.pos(0).x0, layout.pos(0).y0,
    style.figure.panelWidth, style.figure.panelHeight,
    xDomain, finiteExtent(nMin.concat(nMax, eqN)),
  );
  const bottom = panel(
    layout.pos(1).x0, layout.pos(1).y0,
    style.figure.panelWidth, style.figure.panelHeight,
    xDomain, finiteExtent(pMin.concat(pMax, eqP)),
  );

  const body: string[] = [];
  body.push(frameAxes(top, style, "r (1/yr)", "N", "attractor and equilibria"));
  body.push(frameAxes(bottom, style, "r (1/yr)", "P (×10⁻³)"));
  body.push(envelope(top, rs, kinds, nMin, nMax, style));
  body.push(envelope(bottom, rs, kinds, pMin, pMax, style));
  body.push(branches(top, eqR, eqN, eqLabel, eqStability, style));
  body.push(branches(bottom, eqR, eqP, eqLabel, eqStability, style));
  body.push(legend(top.x0 + top.w + 8, top.y0, [
    { label: "cycle envelope", color: style.colors.cycle },
    { label: "stable equilibrium", color: style.colors.equilibriumStable },
    { label: "unstable equilibrium", color: style.colors.equilibriumUnstable },
  ], style));
  return document(layout.width + 150, layout.height, style.colors.background, body);
}

/** Min/max band over the grid points that hold a limit cycle. */
function envelope(
  p: Panel,
  rs: readonly number[],
  kinds: readonly string[],
  lo: readonly number[],
  hi: readonly number[],
  style: Style,
): string {
  const cx: number[] = [];
  const cLo: number[] = [];
  const cHi: number[] = [];
  for (let i = 0; i < rs.length; i++) {
    if (kinds[i] !== "cycle") continue;
    cx.push(rs[i]);
    cLo.push(lo[i]);
    cHi.push(hi[i]);
  }
  const bandX = cx.concat([...cx].reverse());
  const bandY = cHi.concat([...cLo].reverse());
  const parts = [
    polygonIn(p, bandX, bandY, style.colors.cycle, 0.2),
    polylineIn(p, cx, cLo, style.colors.cycle, { width: style.lineWidth }),
    polylineIn(p, cx, cHi, style.colors.cycle, { width: style.lineWidth }),
  ];
  if (cx.length === 1) {
    parts.push(dotsIn(p, cx, cLo, style.dotRadius, style.colors.cycle));
    parts.push(dotsIn(p, cx, cHi, style.dotRadius, style.colors.cycle));
  }
  return parts.join("\n");
}

/** Equilibrium branches, one polyline run per stability stretch. */
function branches(
  p: Panel,
  rs: readonly number[],
  values: readonly number[],
  labels: readonly string[],
  stability: readonly string[],
  style: Style,
): string {
  const parts: string[] = [];
  const seen: string[] = [];
  for (const label of labels) {
    if (!seen.includes(label)) seen.push(label);
  }
  for (const label of seen) {
    const index: number[] = [];
    for (let i = 0; i < labels.length; i++) {
      if (labels[i] === label) index.push(i);
    }
    let start = 0;
    while (start < index.length) {
      let stop = start + 1;
      const kind = stability[index[start]];
      while (stop < index.length && stability[index[stop]] === kind) stop++;
      // Include the first point of the next stretch so branches join.
      const run = index.slice(start, Math.min(stop + 1, index.length));
      const stable = kind === "stable";
      parts.push(polylineIn(
        p,
        run.map((i) => rs[i]),
        run.map((i) => values[i]),
        stable ? style.colors.equilibriumStable : style.colors.equilibriumUnstable,
        stable ? { width: 1.1 } : { width: 1.1, dash: "4 3" },
      ));
      start = stop;
    }
  }
  return parts.join("\n");
}
