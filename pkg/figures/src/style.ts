import * as fs from "node:fs";

/** Pinned rendering style.
 *
 * Every color, size, and font that affects the output lives here, so
 * one style file plus one set of input CSVs determines the SVG text
 * byte for byte.
 */
export interface Style {
  fontFamily: string;
  fontSize: number;
  figure: {
    panelWidth: number;
    panelHeight: number;
    margin: number;
    gap: number;
  };
  lineWidth: number;
  dotRadius: number;
  colors: {
    background: string;
    frame: string;
    grid: string;
    text: string;
    cycle: string;
    threshold: string;
    tipping: string;
    tippingB: string;
    unstable: string;
    indeterminate: string;
    prey: string;
    predator: string;
    signal: string;
    measure: string;
    measureBins: string;
    histAll: string;
    histB: string;
    histP: string;
    equilibriumStable: string;
    equilibriumUnstable: string;
    classes: Record<string, string>;
    classFallback: string;
  };
}

const REQUIRED_TOP = ["fontFamily", "fontSize", "figure", "lineWidth", "dotRadius", "colors"];

const REQUIRED_COLORS = [
  "background", "frame", "grid", "text",
  "cycle", "threshold", "tipping", "tippingB", "unstable", "indeterminate",
  "prey", "predator", "signal", "measure", "measureBins",
  "histAll", "histB", "histP",
  "equilibriumStable", "equilibriumUnstable",
  "classes", "classFallback",
];

/** Load and validate a style file; missing keys are named in the error. */
export function loadStyle(file: string): Style {
  const raw = JSON.parse(fs.readFileSync(file, "utf8")) as Record<string, unknown>;
  const missing = REQUIRED_TOP.filter((key) => !(key in raw));
  if (missing.length > 0) {
    throw new Error(`style file ${file}: missing keys [${missing.join(", ")}]`);
  }
  const colors = raw.colors as Record<string, unknown>;
  const missingColors = REQUIRED_COLORS.filter((key) => !(key in colors));
  if (missingColors.length > 0) {
    throw new Error(
      `style file ${file}: missing colors [${missingColors.join(", ")}]`,
    );
  }
  return raw as unknown as Style;
}

/** Color for a region/instability class label. */
export function classColor(style: Style, label: string): string {
  return style.colors.classes[label] ?? style.colors.classFallback;
}
