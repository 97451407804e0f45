import * as fs from "node:fs";
import * as path from "node:path";
import * as url from "node:url";
import { parseArgs } from "node:util";
import { SchemaError } from "./csv.js";
import { FIGURE_IDS } from "./figures.js";
import { figureSpec, renderFigure } from "./render.js";

const USAGE = `usage: figures <figure-id|all> <input-dir> <output-dir> [--style FILE]

Renders SVG analogs of the simulation figures from the CLI's CSV
outputs.  <figure-id> is one of: ${FIGURE_IDS.join(", ")}.
With 'all', <input-dir> must hold one subdirectory per figure id and
every subdirectory that exists is rendered.
`;

function defaultStyleFile(): string {
  const here = path.dirname(url.fileURLToPath(import.meta.url));
  return path.join(here, "..", "style.json");
}

export function main(argv: readonly string[]): number {
  let positionals: string[];
  let styleFile: string;
  try {
    const parsed = parseArgs({
      args: [...argv],
      options: { style: { type: "string" } },
      allowPositionals: true,
    });
    positionals = parsed.positionals;
    styleFile = parsed.values.style ?? defaultStyleFile();
  } catch (err) {
    console.error(String(err));
    console.error(USAGE);
    return 2;
  }
  if (positionals.length !== 3) {
    console.error(USAGE);
    return 2;
  }
  const [id, inputDir, outputDir] = positionals;

  const jobs: { id: string; dir: string }[] = [];
  if (id === "all") {
    for (const figureId of FIGURE_IDS) {
      const dir = path.join(inputDir, figureId);
      if (fs.existsSync(dir)) jobs.push({ id: figureId, dir });
    }
    if (jobs.length === 0) {
      console.error(`no figure subdirectories found under ${inputDir}`);
      return 2;
    }
  } else {
    jobs.push({ id, dir: inputDir });
  }

  for (const job of jobs) {
    let spec;
    try {
      spec = figureSpec(job.id, job.dir, outputDir, styleFile);
    } catch (err) {
      console.error(err instanceof Error ? err.message : String(err));
      console.error(USAGE);
      return 2;
    }
    try {
      const out = renderFigure(spec);
      console.log(`${job.id}: wrote ${out}`);
    } catch (err) {
      const prefix = err instanceof SchemaError ? "schema mismatch: " : "";
      console.error(
        `${job.id}: ${prefix}${err instanceof Error ? err.message : String(err)}`,
      );
      return 1;
    }
  }
  return 0;
}

const entry = process.argv[1];
if (entry !== undefined &&
    url.pathToFileURL(entry).href === import.meta.url) {
  process.exit(main(process.argv.slice(2)));
}
