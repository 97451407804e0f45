import * as fs from "node:fs";
import * as path from "node:path";
import { readTable, type Table } from "./csv.js";
import { FIGURES, isFigureId, type FigureId, type InputSpec } from "./figures.js";
import { loadStyle } from "./style.js";

/** Everything one figure render needs: resolved input CSV paths, the
 * output image path, and the pinned style file. */
export interface FigureSpec {
  id: FigureId;
  inputDir: string;
  inputs: readonly InputSpec[];
  outputFile: string;
  styleFile: string;
}

export function figureSpec(
  id: string,
  inputDir: string,
  outputDir: string,
  styleFile: string,
): FigureSpec {
  if (!isFigureId(id)) {
    throw new Error(`unknown figure id '${id}'`);
  }
  return {
    id,
    inputDir,
    inputs: FIGURES[id].inputs,
    outputFile: path.join(outputDir, `${id}.svg`),
    styleFile,
  };
}

/** Render one figure to its SVG file and return the output path.
 *
 * Required inputs must exist and match the schema; optional inputs
 * may be absent (the renderer notes the gap in the panel) but must
 * match the schema when present.
 */
export function renderFigure(spec: FigureSpec): string {
  const style = loadStyle(spec.styleFile);
  const tables = new Map<string, Table | null>();
  for (const input of spec.inputs) {
    const file = path.join(spec.inputDir, input.file);
    if (input.optional && !fs.existsSync(file)) {
      tables.set(input.file, null);
      continue;
    }
    tables.set(input.file, readTable(file, input.columns));
  }
  const svg = FIGURES[spec.id].render(tables, spec.inputDir, style);
  fs.mkdirSync(path.dirname(spec.outputFile), { recursive: true });
  fs.writeFileSync(spec.outputFile, svg, "utf8");
  return spec.outputFile;
}
