import { booleans, numbers, strings, type Table } from "../csv.js";
import {
  dotsIn, finiteExtent, frameAxes, gridLayout, legend, panel, polylineIn,
} from "../plot.js";
import { document, text } from "../svg.js";
import type { Style } from "../style.js";

/** Phase portrait of one cycle against one boundary: Γ in green with
 * its outside-the-basin samples in pink, θ as a black curve, and the
 * equilibria as stability-coded dots. */
export function renderBasin(
  cycle: Table,
  threshold: Table,
  equilibria: Table,
  meta: Table,
  style: Style,
): string {
  const cycN = numbers(cycle, "N");
  const cycP = numbers(cycle, "P").map((v) => v * 1e3);
  const membership = strings(cycle, "membership");
  const thrN = numbers(threshold, "N");
  const thrP = numbers(threshold, "P").map((v) => v * 1e3);
  const eqN = numbers(equilibria, "N");
  const eqP = numbers(equilibria, "P").map((v) => v * 1e3);
  const eqLabel = strings(equilibria, "label");
  const eqStability = strings(equilibria, "stability");
  const eqEcological = booleans(equilibria, "ecological");

  const layout = gridLayout(1, 1, style);
  const { x0, y0 } = layout.pos(0);
  const p = panel(
    x0, y0, style.figure.panelWidth, style.figure.panelHeight,
    finiteExtent(cycN.concat(thrN, eqN)),
    finiteExtent(cycP.concat(thrP, eqP)),
  );

  const metaClass = strings(meta, "class")[0] ?? "";
  const fraction = strings(meta, "fraction_outside")[0] ?? "";
  const title = `${metaClass}, fraction outside ${shortNumber(fraction)}`;

  const body: string[] = [];
  body.push(frameAxes(p, style, "N", "P (×10⁻³)", title));
  body.push(polylineIn(p, thrN, thrP, style.colors.threshold, {
    width: style.lineWidth,
  }));
  body.push(polylineIn(
    p, close(cycN), close(cycP), style.colors.cycle,
    { width: style.lineWidth },
  ));
  body.push(pickDots(p, cycN, cycP, membership, "outside",
    style.dotRadius, style.colors.unstable));
  body.push(pickDots(p, cycN, cycP, membership, "indeterminate",
    style.dotRadius * 0.8, style.colors.indeterminate));
  const font = {
    family: style.fontFamily, size: style.fontSize, color: style.colors.text,
  };
  for (let i = 0; i < eqLabel.length; i++) {
    if (!Number.isFinite(eqN[i]) || !Number.isFinite(eqP[i])) continue;
    const stable = eqStability[i] === "stable";
    const color = stable
      ? style.colors.equilibriumStable
      : style.colors.equilibriumUnstable;
    body.push(dotsIn(p, [eqN[i]], [eqP[i]], style.dotRadius * 1.4, color,
      eqEcological[i] ? 1.0 : 0.45));
    body.push(text(p.x(eqN[i]) + 5, p.y(eqP[i]) - 4, eqLabel[i], font));
  }
  body.push(legend(p.x0 + p.w + 8, p.y0, [
    { label: "Γ (cycle)", color: style.colors.cycle },
    { label: "θ (threshold)", color: style.colors.threshold },
    { label: "outside basin", color: style.colors.unstable },
    { label: "indeterminate", color: style.colors.indeterminate },
  ], style));
  return document(layout.width + 150, layout.height, style.colors.background, body);
}

function close(values: readonly number[]): number[] {
  return values.length > 0 ? [...values, values[0]] : [];
}

function pickDots(
  p: ReturnType<typeof panel>,
  xs: readonly number[],
  ys: readonly number[],
  labels: readonly string[],
  wanted: string,
  radius: number,
  color: string,
): string {
  const px: number[] = [];
  const py: number[] = [];
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] !== wanted) continue;
    px.push(xs[i]);
    py.push(ys[i]);
  }
  return dotsIn(p, px, py, radius, color);
}

function shortNumber(raw: string): string {
  const value = Number(raw);
  return Number.isFinite(value) ? value.toFixed(3) : raw;
}
