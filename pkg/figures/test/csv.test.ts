import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import * as url from "node:url";
import { afterAll, describe, expect, it } from "vitest";
import {
  booleans, numbers, readTable, SchemaError, strings,
} from "../src/csv.js";

const HERE = path.dirname(url.fileURLToPath(import.meta.url));
const FIXTURES = path.join(HERE, "fixtures");
const RECORDS_COLUMNS = [
  "run", "t1_yr", "r_pre", "r_post", "N_b", "P_b", "phi_b",
  "kind", "rescues", "converged_pre",
];

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "figures-csv-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function write(name: string, text: string): string {
  const file = path.join(tmp, name);
  fs.writeFileSync(file, text, "utf8");
  return file;
}

describe("readTable", () => {
  it("parses a pipeline records file", () => {
    const table = readTable(
      path.join(FIXTURES, "fig3", "records.csv"), RECORDS_COLUMNS);
    expect(table.columns).toEqual(RECORDS_COLUMNS);
    expect(table.rows.length).toBe(3);
    expect(strings(table, "kind").every((k) => ["B", "P", ""].includes(k)))
      .toBe(true);
  });

  it("names expected and found columns on a renamed header", () => {
    const file = write("renamed.csv", "a,b,c\n1,2,3\n");
    expect(() => readTable(file, ["a", "beta", "c"])).toThrowError(SchemaError);
    try {
      readTable(file, ["a", "beta", "c"]);
    } catch (err) {
      const message = (err as Error).message;
      expect(message).toContain("expected columns [a, beta, c]");
      expect(message).toContain("found [a, b, c]");
      expect(message).toContain("renamed.csv");
    }
  });

  it("rejects reordered columns", () => {
    const file = write("reordered.csv", "b,a\n1,2\n");
    expect(() => readTable(file, ["a", "b"])).toThrowError(SchemaError);
  });

  it("rejects missing or extra columns", () => {
    const file = write("short.csv", "a\n1\n");
    expect(() => readTable(file, ["a", "b"])).toThrowError(SchemaError);
    const wide = write("wide.csv", "a,b,c\n1,2,3\n");
    expect(() => readTable(wide, ["a", "b"])).toThrowError(SchemaError);
  });

  it("reports a missing file by path", () => {
    const missing = path.join(tmp, "nope.csv");
    expect(() => readTable(missing, ["a"])).toThrowError(missing);
  });

  it("accepts a header-only file as zero rows", () => {
    const file = write("empty.csv", "a,b\n");
    const table = readTable(file, ["a", "b"]);
    expect(table.rows.length).toBe(0);
  });
});

describe("column accessors", () => {
  it("parses numbers with nan and inf reprs", () => {
    const file = write("nums.csv", "x\n1.5\nnan\ninf\n-inf\n");
    const table = readTable(file, ["x"]);
    const values = numbers(table, "x");
    expect(values[0]).toBe(1.5);
    expect(Number.isNaN(values[1])).toBe(true);
    expect(values[2]).toBe(Infinity);
    expect(values[3]).toBe(-Infinity);
  });

  it("parses true/false flags", () => {
    const file = write("flags.csv", "ok\ntrue\nfalse\n");
    const table = readTable(file, ["ok"]);
    expect(booleans(table, "ok")).toEqual([true, false]);
  });
});
