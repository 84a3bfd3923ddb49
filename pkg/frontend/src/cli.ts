#!/usr/bin/env node
/**
 * Figure renderer for simulator run directories.
 *
 * Usage:
 *   rabisim-render render --figure N --runs DIR[,DIR,DIR] --out FILE.(png|svg)
 *
 * Reads scalars_<solver>.csv and dist_<solver>_t<T>.csv from each run
 * directory and writes one deterministic 3x3 panel image. Panels whose
 * series are missing are drawn as visible placeholders and the process
 * exits nonzero.
 */

import * as fs from "fs";
import * as path from "path";

import { loadRuns } from "./csv";
import { sceneToPng } from "./png";
import { renderFigure } from "./render";
import { sceneToSvg } from "./svg";

interface Args {
  figure: number;
  runs: string[];
  out: string;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new Error("usage: rabisim-render render --figure N --runs DIR[,DIR,DIR] --out FILE.(png|svg)");
  }
  let figure: number | undefined;
  let runs: string[] | undefined;
  let out: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const val = argv[i + 1];
    if (val === undefined) throw new Error(`missing value for ${key}`);
    if (key === "--figure") figure = Number(val);
    else if (key === "--runs") runs = val.split(",").map((s) => s.trim()).filter(Boolean);
    else if (key === "--out") out = val;
    else throw new Error(`unknown option ${key}`);
  }
  if (figure === undefined || !Number.isInteger(figure)) {
    throw new Error("--figure N is required");
  }
  if (!runs || runs.length === 0) throw new Error("--runs DIR[,DIR,DIR] is required");
  if (!out) throw new Error("--out FILE.(png|svg) is required");
  const ext = path.extname(out).toLowerCase();
  if (ext !== ".svg" && ext !== ".png") {
    throw new Error(`unsupported output format ${ext || "(none)"}; use .svg or .png`);
  }
  return { figure, runs, out };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  let result;
  try {
    const data = loadRuns(args.runs);
    result = renderFigure(data, args.figure);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  const ext = path.extname(args.out).toLowerCase();
  const payload = ext === ".svg"
    ? Buffer.from(sceneToSvg(result.scene), "utf-8")
    : sceneToPng(result.scene);
  fs.writeFileSync(args.out, payload);
  if (result.missing.length > 0) {
    for (const m of result.missing) {
      console.error(`missing series: ${m}`);
    }
    console.error(`wrote ${args.out} with ${result.missing.length} placeholder panel(s)`);
    return 1;
  }
  console.log(`wrote ${args.out}`);
  return 0;
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
