/**
 * Minimal CSV reading for the simulator's trace/report outputs.
 *
 * The simulator writes comma-separated files with a header row, `.`
 * decimals and LF line endings; numeric columns are plain floats. Column
 * access is by name and a missing column is a hard, named error.
 */
import fs from "node:fs";

export interface Table {
  header: string[];
  rows: string[][];
  /** Numeric column by name; throws naming the column when absent. */
  column(name: string): number[];
  /** String column by name (e.g. neuron ids in fire event files). */
  text(name: string): string[];
}

export function readCsv(path: string): Table {
  const raw = fs.readFileSync(path, "utf8");
  const lines = raw.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`empty CSV: ${path}`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));

  const indexOf = (name: string): number => {
    const i = header.indexOf(name);
    if (i < 0) {
      throw new Error(`missing column '${name}' in ${path} (has: ${header.join(", ")})`);
    }
    return i;
  };

  return {
    header,
    rows,
    column(name: string): number[] {
      const i = indexOf(name);
      return rows.map((r) => {
        const v = Number(r[i]);
        if (!Number.isFinite(v)) {
          throw new Error(`non-numeric value '${r[i]}' in column '${name}' of ${path}`);
        }
        return v;
      });
    },
    text(name: string): string[] {
      const i = indexOf(name);
      return rows.map((r) => r[i]);
    },
  };
}

export function readJson<T>(path: string): T {
  return JSON.parse(fs.readFileSync(path, "utf8")) as T;
}
