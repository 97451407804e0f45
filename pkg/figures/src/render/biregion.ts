import * as path from "node:path";
import { numbers, readTable, strings, type Table } from "../csv.js";
import {
  absentNote, cellDomain, cellsIn, dotsIn, finiteExtent, frameAxes,
  gridLayout, legend, panel, polylineIn, type Panel,
} from "../plot.js";
import { document, el, fmt } from "../svg.js";
import type { Style } from "../style.js";
import { classLegend } from "./regionmap.js";

const TAU = 2 * Math.PI;

const PORTRAIT_CYCLE_COLUMNS = ["t_yr", "N", "P", "phi_rad", "membership"];
const PORTRAIT_THRESHOLD_COLUMNS = ["N", "P"];

interface Portrait {
  index: number;
  r2: string;
  className: string;
  cycle: Table;
  threshold: Table;
}

/** Load the portrait small-multiples listed in portraits.csv. */
function loadPortraits(portraits: Table | null, dir: string): Portrait[] {
  if (portraits === null) return [];
  const out: Portrait[] = [];
  const indices = strings(portraits, "index");
  const r2s = strings(portraits, "r2");
  const classes = strings(portraits, "class");
  for (let i = 0; i < indices.length; i++) {
    const k = indices[i];
    out.push({
      index: Number(k),
      r2: r2s[i],
      className: classes[i],
      cycle: readTable(
        path.join(dir, `portrait${k}_cycle.csv`), PORTRAIT_CYCLE_COLUMNS),
      threshold: readTable(
        path.join(dir, `portrait${k}_threshold.csv`), PORTRAIT_THRESHOLD_COLUMNS),
    });
  }
  return out;
}

/** Basin-instability region of a fixed cycle over (r2, second), the
 * unstable phase range along the shift path, and portrait insets. */
export function renderBiRegion(
  grid: Table,
  pathPhases: Table,
  portraitsIndex: Table | null,
  inputDir: string,
  secondName: string,
  style: Style,
): string {
  const portraits = loadPortraits(portraitsIndex, inputDir);
  const cols = Math.max(2, portraits.length);
  const layout = gridLayout(cols, 2, style);
  const w = style.figure.panelWidth;
  const h = style.figure.panelHeight;
  const body: string[] = [];

  // Top left: instability class of the fixed cycle per (r2, second).
  const rs = numbers(grid, "r2");
  const seconds = numbers(grid, secondName);
  const labels = strings(grid, "class");
  const pMap = panel(
    layout.pos(0).x0, layout.pos(0).y0, w, h,
    cellDomain(rs), cellDomain(seconds),
  );
  body.push(cellsIn(pMap, rs, seconds, labels, style));
  body.push(frameAxes(pMap, style, "r2 (1/yr)", secondName, "basin instability of Γ"));

  // Top right: unstable phase window against r2 along the path.
  const pathR2 = numbers(pathPhases, "r2");
  const phiLo = numbers(pathPhases, "phi_lo_rad");
  const phiHi = numbers(pathPhases, "phi_hi_rad");
  const pPath = panel(
    layout.pos(1).x0, layout.pos(1).y0, w, h,
    finiteExtent(pathR2, 0.02), [0, TAU],
  );
  body.push(frameAxes(
    pPath, style, "r2 (1/yr)", "φ (rad)", "unstable phase range"));
  body.push(phaseBand(pPath, pathR2, phiLo, phiHi, style));
  body.push(polylineIn(pPath, pathR2, phiLo, style.colors.unstable, {
    width: style.lineWidth,
  }));
  body.push(polylineIn(pPath, pathR2, phiHi, style.colors.unstable, {
    width: style.lineWidth,
  }));

  // Bottom row: phase portraits at selected r2 values.
  if (portraits.length === 0) {
    const pNote = panel(layout.pos(cols).x0, layout.pos(cols).y0, w, h, [0, 1], [0, 1]);
    body.push(frameAxes(pNote, style, "", "", "portraits"));
    body.push(absentNote(pNote, style, "no portrait inputs"));
  }
  portraits.forEach((portrait, j) => {
    const { x0, y0 } = layout.pos(cols + j);
    const cycN = numbers(portrait.cycle, "N");
    const cycP = numbers(portrait.cycle, "P").map((v) => v * 1e3);
    const membership = strings(portrait.cycle, "membership");
    const thrN = numbers(portrait.threshold, "N");
    const thrP = numbers(portrait.threshold, "P").map((v) => v * 1e3);
    const pk = panel(
      x0, y0, w, h,
      finiteExtent(cycN.concat(thrN)),
      finiteExtent(cycP.concat(thrP)),
    );
    body.push(frameAxes(
      pk, style, "N", j === 0 ? "P (×10⁻³)" : "",
      `r2=${portrait.r2} (${portrait.className})`,
    ));
    body.push(polylineIn(pk, thrN, thrP, style.colors.threshold, {
      width: style.lineWidth,
    }));
    const loopN = cycN.length > 0 ? [...cycN, cycN[0]] : [];
    const loopP = cycP.length > 0 ? [...cycP, cycP[0]] : [];
    body.push(polylineIn(pk, loopN, loopP, style.colors.cycle, {
      width: style.lineWidth,
    }));
    const outN: number[] = [];
    const outP: number[] = [];
    for (let i = 0; i < membership.length; i++) {
      if (membership[i] !== "outside") continue;
      outN.push(cycN[i]);
      outP.push(cycP[i]);
    }
    body.push(dotsIn(pk, outN, outP, style.dotRadius, style.colors.unstable));
  });

  body.push(legend(
    pMap.x0, layout.height - style.figure.margin + 14,
    classLegend(labels, style), style,
  ));
  return document(
    layout.width, layout.height + 120, style.colors.background, body);
}

/** Shaded band between phi_lo and phi_hi, split where rows carry NaN. */
function phaseBand(
  p: Panel,
  rs: readonly number[],
  lo: readonly number[],
  hi: readonly number[],
  style: Style,
): string {
  const parts: string[] = [];
  let run: number[] = [];
  const flush = () => {
    if (run.length >= 2) {
      const points: string[] = [];
      for (const i of run) points.push(`${fmt(p.x(rs[i]))},${fmt(p.y(lo[i]))}`);
      for (const i of [...run].reverse()) {
        points.push(`${fmt(p.x(rs[i]))},${fmt(p.y(hi[i]))}`);
      }
      parts.push(el("polygon", {
        points: points.join(" "),
        fill: style.colors.unstable,
        "fill-opacity": "0.25",
        stroke: "none",
      }));
    }
    run = [];
  };
  for (let i = 0; i < rs.length; i++) {
    if (Number.isFinite(rs[i]) && Number.isFinite(lo[i]) && Number.isFinite(hi[i])) {
      run.push(i);
    } else {
      flush();
    }
  }
  flush();
  return parts.join("\n");
}

export { PORTRAIT_CYCLE_COLUMNS, PORTRAIT_THRESHOLD_COLUMNS };
