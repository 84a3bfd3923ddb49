/**
 * 3x3 figure grid replicating the reference layout: panels a-f are
 * scalar time series, panels g-i are photon-number distributions at the
 * snapshot times, with the blue/black/red solver color convention.
 */

import { RunData, snapshotTimes } from "./csv";
import { fmtTick, Prim, Scene, solverColor, ticks } from "./scene";

export interface PanelSpec {
  id: string;
  title: string;
  source: "scalar" | "dist";
  column?: string;
  snapshotIndex?: number;
  log?: boolean;
}

const STANDARD_PANELS: Array<[string, string]> = [
  ["P_e", "qubit excitation"],
  ["n_mean", "mean photon number"],
  ["mandel_Q", "Mandel Q"],
  ["negativity", "negativity"],
  ["purity_qubit", "qubit purity"],
  ["purity_field", "field purity"],
];

// Modulated scenarios report the post-selected field state in panels b-f.
const POSTSELECTED_PANELS: Array<[string, string]> = [
  ["P_e", "qubit excitation"],
  ["n_mean_ps", "post-selected mean photons"],
  ["mandel_Q_ps", "post-selected Mandel Q"],
  ["F_ph", "phase QFI"],
  ["M_av", "avg displacement Fisher"],
  ["M_opt", "max displacement Fisher"],
];

export function figureLayout(figure: number): PanelSpec[] {
  const scalarCols = figure >= 17 ? POSTSELECTED_PANELS : STANDARD_PANELS;
  const ids = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];
  const panels: PanelSpec[] = scalarCols.map(([column, title], i) => ({
    id: ids[i],
    title,
    source: "scalar" as const,
    column,
  }));
  for (let k = 0; k < 3; k++) {
    panels.push({
      id: ids[6 + k],
      title: "photon distribution",
      source: "dist",
      snapshotIndex: k,
    });
  }
  return panels;
}

export interface RenderResult {
  scene: Scene;
  missing: string[];
}

const W = 1260;
const H = 1020;
const COLS = 3;
const ROWS = 3;
const MARGIN = { left: 72, right: 20, top: 48, bottom: 46 };
const GAP_X = 26;
const GAP_Y = 34;

interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

function panelBox(index: number): Box {
  const innerW = W - MARGIN.left - MARGIN.right - (COLS - 1) * GAP_X;
  const innerH = H - MARGIN.top - MARGIN.bottom - (ROWS - 1) * GAP_Y;
  const w = innerW / COLS;
  const h = innerH / ROWS;
  const col = index % COLS;
  const row = Math.floor(index / COLS);
  return {
    x: MARGIN.left + col * (w + GAP_X),
    y: MARGIN.top + row * (h + GAP_Y),
    w,
    h,
  };
}

function finiteRange(values: number[]): [number, number] | null {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (lo > hi) return null;
  if (lo === hi) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.1 : 1.0;
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * 0.05;
  return [lo - pad, hi + pad];
}

function drawAxes(prims: Prim[], box: Box, xr: [number, number], yr: [number, number],
                  title: string, panelId: string): (x: number, y: number) => [number, number] {
  prims.push({ kind: "frame", x: box.x, y: box.y, w: box.w, h: box.h, stroke: "#222222" });
  prims.push({
    kind: "text", x: box.x + 4, y: box.y - 6,
    text: `${panelId}) ${title}`, size: 13, anchor: "start", fill: "#000000",
  });
  const sx = (x: number) => box.x + ((x - xr[0]) / (xr[1] - xr[0])) * box.w;
  const sy = (y: number) => box.y + box.h - ((y - yr[0]) / (yr[1] - yr[0])) * box.h;
  for (const tx of ticks(xr[0], xr[1])) {
    const px = sx(tx);
    prims.push({ kind: "line", x1: px, y1: box.y + box.h, x2: px, y2: box.y + box.h + 4, stroke: "#222222" });
    prims.push({ kind: "text", x: px, y: box.y + box.h + 16, text: fmtTick(tx), size: 10, anchor: "middle", fill: "#333333" });
  }
  for (const ty of ticks(yr[0], yr[1])) {
    const py = sy(ty);
    prims.push({ kind: "line", x1: box.x - 4, y1: py, x2: box.x, y2: py, stroke: "#222222" });
    prims.push({ kind: "text", x: box.x - 7, y: py + 3, text: fmtTick(ty), size: 10, anchor: "end", fill: "#333333" });
  }
  return (x, y) => [sx(x), sy(y)];
}

function placeholder(prims: Prim[], box: Box, panelId: string, reason: string): void {
  prims.push({ kind: "frame", x: box.x, y: box.y, w: box.w, h: box.h, stroke: "#aa6666" });
  prims.push({
    kind: "text", x: box.x + box.w / 2, y: box.y + box.h / 2 - 6,
    text: `${panelId}) missing series`, size: 14, anchor: "middle", fill: "#aa3333",
  });
  prims.push({
    kind: "text", x: box.x + box.w / 2, y: box.y + box.h / 2 + 12,
    text: reason, size: 10, anchor: "middle", fill: "#aa3333",
  });
}

function drawScalarPanel(prims: Prim[], box: Box, run: RunData, spec: PanelSpec): string | null {
  const series: Array<{ solver: string; t: number[]; v: number[] }> = [];
  for (const [solver, sc] of run.scalars) {
    const t = sc.data.get("t");
    const v = sc.data.get(spec.column!);
    if (!t || !v) continue;
    if (!v.some((x) => Number.isFinite(x))) continue;
    series.push({ solver, t, v });
  }
  if (series.length === 0) {
    placeholder(prims, box, spec.id, `column ${spec.column}`);
    return `panel ${spec.id}: no series for column ${spec.column}`;
  }
  const xr = finiteRange(series.flatMap((s) => s.t))!;
  const yr = finiteRange(series.flatMap((s) => s.v))!;
  const proj = drawAxes(prims, box, xr, yr, spec.title, spec.id);
  for (const s of series) {
    const color = solverColor(s.solver);
    const pts: Array<[number, number]> = [];
    let n_finite = 0;
    for (let i = 0; i < s.t.length; i++) {
      if (Number.isFinite(s.v[i])) {
        pts.push(proj(s.t[i], s.v[i]));
        n_finite++;
      }
    }
    if (n_finite > 1) {
      prims.push({ kind: "poly", points: pts, stroke: color });
    }
    // sparse series (snapshot-only metrology) stay visible as markers
    if (n_finite <= 24) {
      for (const [px, py] of pts) {
        prims.push({ kind: "dot", x: px, y: py, r: 2.5, fill: color });
      }
    }
  }
  return null;
}

function drawDistPanel(prims: Prim[], box: Box, run: RunData, spec: PanelSpec): string | null {
  const times = snapshotTimes(run);
  const t = times[spec.snapshotIndex!];
  if (t === undefined) {
    placeholder(prims, box, spec.id, `no snapshot #${spec.snapshotIndex}`);
    return `panel ${spec.id}: snapshot index ${spec.snapshotIndex} unavailable`;
  }
  const dists = [];
  for (const [solver, byTime] of run.distributions) {
    const d = byTime.get(t);
    if (d) dists.push(d);
  }
  if (dists.length === 0) {
    placeholder(prims, box, spec.id, `no distributions at t=${t}`);
    return `panel ${spec.id}: no distributions at t=${t}`;
  }
  const nMax = Math.max(...dists.map((d) => d.n[d.n.length - 1]));
  const pMax = Math.max(...dists.flatMap((d) => d.p));
  const xr: [number, number] = [-0.5, nMax + 0.5];
  const yr: [number, number] = [0, pMax > 0 ? pMax * 1.05 : 1];
  const proj = drawAxes(prims, box, xr, yr, `${spec.title} (t=${fmtTick(t)})`, spec.id);
  const slot = box.w / (nMax + 1);
  const barW = Math.max(1, (slot * 0.8) / dists.length);
  dists.forEach((d, k) => {
    const color = solverColor(d.solver);
    for (let i = 0; i < d.n.length; i++) {
      if (d.p[i] <= 0) continue;
      const [cx] = proj(d.n[i], 0);
      const [, py] = proj(d.n[i], d.p[i]);
      const x0 = cx - (dists.length * barW) / 2 + k * barW;
      prims.push({
        kind: "rect", x: x0, y: py, w: barW,
        h: box.y + box.h - py, fill: color,
      });
    }
  });
  return null;
}

/** Build the full 3x3 scene; `missing` lists skipped panels. */
export function renderFigure(run: RunData, figure: number): RenderResult {
  const prims: Prim[] = [];
  prims.push({ kind: "rect", x: 0, y: 0, w: W, h: H, fill: "#ffffff" });
  prims.push({
    kind: "text", x: W / 2, y: 22, text: `figure ${figure}`,
    size: 16, anchor: "middle", fill: "#000000",
  });
  // legend: one entry per available solver series
  let lx = MARGIN.left;
  for (const solver of [...run.scalars.keys()].sort()) {
    const color = solverColor(solver);
    prims.push({ kind: "line", x1: lx, y1: 34, x2: lx + 22, y2: 34, stroke: color });
    prims.push({ kind: "text", x: lx + 26, y: 37, text: solver, size: 11, anchor: "start", fill: color });
    lx += 26 + 9 * solver.length + 22;
  }

  const missing: string[] = [];
  figureLayout(figure).forEach((spec, i) => {
    const box = panelBox(i);
    const err = spec.source === "scalar"
      ? drawScalarPanel(prims, box, run, spec)
      : drawDistPanel(prims, box, run, spec);
    if (err) missing.push(err);
  });
  return { scene: { width: W, height: H, prims }, missing };
}
