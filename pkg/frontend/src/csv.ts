/**
 * CSV ingestion for simulator run directories.
 *
 * A run directory holds one `scalars_<solver>.csv` per solver plus
 * `dist_<solver>_t<T>.csv` snapshot files. Empty cells (metrology columns
 * outside snapshot rows) parse as NaN and are skipped by the plotters.
 */

import * as fs from "fs";
import * as path from "path";

export interface ScalarSeries {
  solver: string;
  columns: string[];
  /** column name -> values (NaN where the cell was empty) */
  data: Map<string, number[]>;
}

export interface Distribution {
  solver: string;
  time: number;
  n: number[];
  p: number[];
}

export interface RunData {
  scalars: Map<string, ScalarSeries>;
  /** solver -> snapshot time -> distribution */
  distributions: Map<string, Map<number, Distribution>>;
}

export function parseScalarCsv(text: string, solver: string): ScalarSeries {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length < 1) {
    throw new Error("empty scalar CSV");
  }
  const columns = lines[0].split(",");
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    columns.forEach((col, i) => {
      const cell = cells[i] ?? "";
      data.get(col)!.push(cell === "" ? NaN : Number(cell));
    });
  }
  return { solver, columns, data };
}

export function parseDistCsv(text: string, solver: string, time: number): Distribution {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  const n: number[] = [];
  const p: number[] = [];
  for (const line of lines.slice(1)) {
    const [ns, ps] = line.split(",");
    n.push(Number(ns));
    p.push(Number(ps));
  }
  return { solver, time, n, p };
}

const SCALAR_RE = /^scalars_(.+)\.csv$/;
const DIST_RE = /^dist_(.+)_t([0-9.eE+-]+)\.csv$/;

/** Load every solver series found in the given run directories. */
export function loadRuns(dirs: string[]): RunData {
  const scalars = new Map<string, ScalarSeries>();
  const distributions = new Map<string, Map<number, Distribution>>();
  for (const dir of dirs) {
    if (!fs.existsSync(dir)) {
      throw new Error(`run directory not found: ${dir}`);
    }
    for (const name of fs.readdirSync(dir).sort()) {
      const sm = SCALAR_RE.exec(name);
      if (sm) {
        const text = fs.readFileSync(path.join(dir, name), "utf-8");
        scalars.set(sm[1], parseScalarCsv(text, sm[1]));
        continue;
      }
      const dm = DIST_RE.exec(name);
      if (dm) {
        const solver = dm[1];
        const time = Number(dm[2]);
        const text = fs.readFileSync(path.join(dir, name), "utf-8");
        if (!distributions.has(solver)) {
          distributions.set(solver, new Map());
        }
        distributions.get(solver)!.set(time, parseDistCsv(text, solver, time));
      }
    }
  }
  return { scalars, distributions };
}

/** Snapshot times available in at least one solver, ascending. */
export function snapshotTimes(run: RunData): number[] {
  const times = new Set<number>();
  for (const byTime of run.distributions.values()) {
    for (const t of byTime.keys()) {
      times.add(t);
    }
  }
  return [...times].sort((a, b) => a - b);
}
