import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import * as url from "node:url";
import { afterAll, describe, expect, it } from "vitest";
import { SchemaError } from "../src/csv.js";
import { FIGURE_IDS } from "../src/figures.js";
import { figureSpec, renderFigure } from "../src/render.js";
import { main } from "../src/main.js";

const HERE = path.dirname(url.fileURLToPath(import.meta.url));
const FIXTURES = path.join(HERE, "fixtures");
const STYLE_FILE = path.join(HERE, "..", "style.json");

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "figures-render-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function out(name: string): string {
  const dir = path.join(tmp, name);
  fs.mkdirSync(dir, { recursive: true });
  return dir;
}

function render(id: string, inputDir: string, outDir: string): string {
  return renderFigure(figureSpec(id, inputDir, outDir, STYLE_FILE));
}

function copyFixture(id: string, name: string): string {
  const dest = path.join(tmp, name);
  fs.cpSync(path.join(FIXTURES, id), dest, { recursive: true });
  return dest;
}

describe("renderFigure", () => {
  for (const id of FIGURE_IDS) {
    it(`renders ${id} from pipeline fixtures`, () => {
      const file = render(id, path.join(FIXTURES, id), out("first"));
      const svg = fs.readFileSync(file, "utf8");
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
      expect(svg).toContain('xmlns="http://www.w3.org/2000/svg"');
      expect(svg).not.toMatch(/NaN/);
    });
  }

  it("re-renders byte-identically under the pinned style", () => {
    for (const id of FIGURE_IDS) {
      const a = render(id, path.join(FIXTURES, id), out("a"));
      const b = render(id, path.join(FIXTURES, id), out("b"));
      expect(fs.readFileSync(a).equals(fs.readFileSync(b)), id).toBe(true);
    }
  });

  it("draws the style conventions into the figures", () => {
    const basin = fs.readFileSync(
      render("fig2a", path.join(FIXTURES, "fig2a"), out("conv")), "utf8");
    expect(basin).toContain('stroke="#1a9641"'); // cycle in green
    expect(basin).toContain('stroke="#000000"'); // threshold curve
    const strip = fs.readFileSync(
      render("fig9a", path.join(FIXTURES, "fig9a"), out("conv")), "utf8");
    expect(strip).toContain('fill="#f06eaa"'); // unstable part in pink
    expect(strip).toContain('fill="#000000"'); // tipping states in black
    const census = fs.readFileSync(
      render("fig6a", path.join(FIXTURES, "fig6a"), out("conv")), "utf8");
    expect(census).toContain("OscCoexistOrExtinction");
  });

  it("keeps a run without tipping a valid figure", () => {
    const file = render("fig4", path.join(FIXTURES, "fig4_empty"), out("notip"));
    const svg = fs.readFileSync(file, "utf8");
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg).toContain("tipping phases");
    expect(svg).not.toMatch(/NaN/);
  });

  it("accepts a records file with a header and no rows", () => {
    const dir = copyFixture("fig4_empty", "headeronly");
    const records = path.join(dir, "records.csv");
    const header = fs.readFileSync(records, "utf8").split("\n")[0];
    fs.writeFileSync(records, header + "\n", "utf8");
    const file = render("fig4", dir, out("headeronly-out"));
    const svg = fs.readFileSync(file, "utf8");
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(svg).not.toMatch(/NaN/);
  });

  it("names expected vs found columns on a schema mismatch", () => {
    const dir = copyFixture("fig3", "badschema");
    const records = path.join(dir, "records.csv");
    const text = fs.readFileSync(records, "utf8");
    fs.writeFileSync(records, text.replace("r_post", "rpost"), "utf8");
    let message = "";
    try {
      render("fig3", dir, out("badschema-out"));
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      message = (err as Error).message;
    }
    expect(message).toContain("records.csv");
    expect(message).toContain("r_post");
    expect(message).toContain("rpost");
  });

  it("notes absent optional inputs instead of failing", () => {
    const dir = copyFixture("fig3", "nomeasure");
    for (const name of ["measure_window.csv", "measure_bins.csv",
                        "overlay_cycle.csv", "overlay_threshold.csv"]) {
      fs.rmSync(path.join(dir, name));
    }
    const svg = fs.readFileSync(render("fig3", dir, out("nomeasure-out")), "utf8");
    expect(svg).toContain("no measure inputs");
    expect(svg).toContain("no overlay inputs");
  });

  it("rejects an unknown figure id", () => {
    expect(() => figureSpec("fig10", FIXTURES, tmp, STYLE_FILE))
      .toThrowError("unknown figure id 'fig10'");
  });

  it("changes output when the style changes, and only then", () => {
    const pinned = fs.readFileSync(
      render("fig2a", path.join(FIXTURES, "fig2a"), out("style-a")), "utf8");
    const styleCopy = path.join(tmp, "style-alt.json");
    const style = JSON.parse(fs.readFileSync(STYLE_FILE, "utf8"));
    style.colors.cycle = "#00ff00";
    fs.writeFileSync(styleCopy, JSON.stringify(style), "utf8");
    const altered = fs.readFileSync(renderFigure(
      figureSpec("fig2a", path.join(FIXTURES, "fig2a"), out("style-b"), styleCopy),
    ), "utf8");
    expect(altered).not.toBe(pinned);
    expect(altered).toContain('stroke="#00ff00"');
    const again = fs.readFileSync(
      render("fig2a", path.join(FIXTURES, "fig2a"), out("style-c")), "utf8");
    expect(again).toBe(pinned);
  });
});

describe("main", () => {
  it("renders every figure subdirectory with 'all'", () => {
    const dir = out("cli-all");
    expect(main(["all", FIXTURES, dir])).toBe(0);
    for (const id of FIGURE_IDS) {
      expect(fs.existsSync(path.join(dir, `${id}.svg`)), id).toBe(true);
    }
  });

  it("renders a single figure id", () => {
    const dir = out("cli-one");
    expect(main(["fig5", path.join(FIXTURES, "fig5"), dir])).toBe(0);
    expect(fs.existsSync(path.join(dir, "fig5.svg"))).toBe(true);
  });

  it("exits 2 on bad usage and unknown ids", () => {
    expect(main([])).toBe(2);
    expect(main(["fig99", FIXTURES, out("cli-bad")])).toBe(2);
    expect(main(["--nosuch", "fig5", FIXTURES, out("cli-bad")])).toBe(2);
  });

  it("exits 1 on a schema mismatch", () => {
    const dir = copyFixture("fig5", "cli-badschema");
    const text = fs.readFileSync(path.join(dir, "records.csv"), "utf8");
    fs.writeFileSync(
      path.join(dir, "records.csv"), text.replace("phi_b", "phase"), "utf8");
    expect(main(["fig5", dir, out("cli-badschema-out")])).toBe(1);
  });
});
