import * as fs from "node:fs";
import * as path from "node:path";
import { csvParse } from "d3-dsv";

/** Interchange schema version implemented by this package.
 *
 * The version is defined by the per-file column lists in figures.ts;
 * a producer that renames, drops, or reorders a column is a different
 * schema version and is rejected by readTable.
 */
export const SCHEMA_VERSION = "v1";

/** An input CSV whose header did not match the documented schema. */
export class SchemaError extends Error {}

/** One parsed CSV file: header columns plus string-valued rows. */
export interface Table {
  readonly file: string;
  readonly columns: readonly string[];
  readonly rows: readonly Record<string, string>[];
}

function sameColumns(expected: readonly string[], found: readonly string[]): boolean {
  return (
    expected.length === found.length &&
    expected.every((name, i) => name === found[i])
  );
}

/** Read one CSV file and check its header against the schema.
 *
 * Column names and their order are both part of the schema; any
 * difference raises SchemaError naming the expected and the found
 * header so the producer/consumer version mismatch is identifiable
 * from the message alone.
 */
export function readTable(file: string, expected: readonly string[]): Table {
  let text: string;
  try {
    text = fs.readFileSync(file, "utf8");
  } catch (err) {
    throw new Error(`input CSV not found: ${file}`, { cause: err });
  }
  const parsed = csvParse(text);
  const found = parsed.columns;
  if (!sameColumns(expected, found)) {
    throw new SchemaError(
      `${path.basename(file)}: expected columns [${expected.join(", ")}], ` +
        `found [${found.join(", ")}]`,
    );
  }
  const rows = parsed.map((row) => row as Record<string, string>);
  return { file, columns: found, rows };
}

function cell(table: Table, row: Record<string, string>, column: string): string {
  const value = row[column];
  if (value === undefined) {
    throw new SchemaError(
      `${path.basename(table.file)}: row is missing column '${column}'`,
    );
  }
  return value;
}

function toNumber(raw: string): number {
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  return Number(raw === "nan" ? NaN : raw);
}

/** One column as numbers ("nan"/"inf"/"-inf" follow the producer's reprs). */
export function numbers(table: Table, column: string): number[] {
  return table.rows.map((row) => toNumber(cell(table, row, column)));
}

/** One column as raw strings. */
export function strings(table: Table, column: string): string[] {
  return table.rows.map((row) => cell(table, row, column));
}

/** One column of "true"/"false" flags as booleans. */
export function booleans(table: Table, column: string): boolean[] {
  return strings(table, column).map((value) => value === "true");
}
