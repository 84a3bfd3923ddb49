/**
 * Backend-independent drawing primitives.
 *
 * The renderer builds a flat list of primitives; the SVG writer and the
 * PNG rasterizer each consume the same scene, which keeps both output
 * formats pixel-for-pixel reproducible run to run.
 */

export type Anchor = "start" | "middle" | "end";

export type Prim =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | { kind: "frame"; x: number; y: number; w: number; h: number; stroke: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string }
  | { kind: "poly"; points: Array<[number, number]>; stroke: string }
  | { kind: "dot"; x: number; y: number; r: number; fill: string }
  | {
      kind: "text";
      x: number;
      y: number;
      text: string;
      size: number;
      anchor: Anchor;
      fill: string;
    };

export interface Scene {
  width: number;
  height: number;
  prims: Prim[];
}

/** Fixed palette: blue = GKSL, black = white-noise DME, red = Ohmic DME. */
export function solverColor(label: string): string {
  if (label.includes("gksl")) return "#1144cc";
  if (label.includes("ohmic")) return "#cc2222";
  if (label.includes("white")) return "#111111";
  return "#555555";
}

/** Deterministic short number formatting for tick labels. */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e");
  }
  const s = v.toPrecision(3);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

/** Round tick positions covering [lo, hi] (1-2-5 ladder). */
export function ticks(lo: number, hi: number, target = 4): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  const out: number[] = [];
  let v = Math.ceil(lo / step) * step;
  for (; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}
