import { describe, expect, it } from "vitest";
import {
  barsIn, cellDomain, finiteExtent, gridLayout, panel, polylineIn,
  tickLabel,
} from "../src/plot.js";
import { fmt } from "../src/svg.js";
import { loadStyle } from "../src/style.js";
import * as path from "node:path";
import * as url from "node:url";

const HERE = path.dirname(url.fileURLToPath(import.meta.url));
const STYLE = loadStyle(path.join(HERE, "..", "style.json"));

describe("fmt", () => {
  it("rounds to two decimals and normalizes negative zero", () => {
    expect(fmt(1.234)).toBe("1.23");
    expect(fmt(-0.0004)).toBe("0.00");
    expect(fmt(NaN)).toBe("0.00");
  });
});

describe("tickLabel", () => {
  it("prints nice tick values without float noise", () => {
    expect(tickLabel(0.30000000000000004)).toBe("0.3");
    expect(tickLabel(2)).toBe("2");
    expect(tickLabel(205)).toBe("205");
  });
});

describe("finiteExtent", () => {
  it("pads the data range", () => {
    const [lo, hi] = finiteExtent([0, 10], 0.1);
    expect(lo).toBeCloseTo(-1);
    expect(hi).toBeCloseTo(11);
  });

  it("ignores non-finite values", () => {
    expect(finiteExtent([NaN, 2, Infinity, 4], 0)).toEqual([2, 4]);
  });

  it("falls back on empty input and widens a constant", () => {
    expect(finiteExtent([], 0.05, [0, 1])).toEqual([0, 1]);
    expect(finiteExtent([3], 0.05)).toEqual([2.5, 3.5]);
  });
});

describe("cellDomain", () => {
  it("pads by half a grid cell", () => {
    expect(cellDomain([0, 1, 2, 3])).toEqual([-0.5, 3.5]);
  });
});

describe("polylineIn", () => {
  it("splits segments at non-finite samples", () => {
    const p = panel(0, 0, 100, 100, [0, 3], [0, 3]);
    const svg = polylineIn(p, [0, 1, NaN, 2, 3], [0, 1, NaN, 2, 3], "#000");
    expect(svg.match(/<polyline/g)?.length).toBe(2);
  });

  it("renders nothing for a single point", () => {
    const p = panel(0, 0, 100, 100, [0, 1], [0, 1]);
    expect(polylineIn(p, [0.5], [0.5], "#000")).toBe("");
  });
});

describe("barsIn", () => {
  it("skips zero-count bins", () => {
    const p = panel(0, 0, 100, 100, [0, 4], [0, 10]);
    const svg = barsIn(p, [0, 1, 2, 3], [1, 2, 3, 4], [5, 0, 2, 0], "#000");
    expect(svg.match(/<rect/g)?.length).toBe(2);
  });
});

describe("gridLayout", () => {
  it("positions panels on a margin/gap grid", () => {
    const layout = gridLayout(3, 2, STYLE);
    const { margin, gap, panelWidth, panelHeight } = STYLE.figure;
    expect(layout.pos(0)).toEqual({ x0: margin, y0: margin });
    expect(layout.pos(4)).toEqual({
      x0: margin + (panelWidth + gap),
      y0: margin + (panelHeight + gap),
    });
    expect(layout.width).toBe(2 * margin + 3 * panelWidth + 2 * gap);
    expect(layout.height).toBe(2 * margin + 2 * panelHeight + gap);
  });
});
