/**
 * Scene -> SVG text. All coordinates are emitted with fixed two-decimal
 * precision so identical inputs produce byte-identical files.
 */

import { Prim, Scene } from "./scene";

const fmt = (v: number): string => v.toFixed(2).replace(/\.00$/, "");

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function primToSvg(p: Prim): string {
  switch (p.kind) {
    case "rect":
      return `<rect x="${fmt(p.x)}" y="${fmt(p.y)}" width="${fmt(p.w)}" height="${fmt(p.h)}" fill="${p.fill}"/>`;
    case "frame":
      return `<rect x="${fmt(p.x)}" y="${fmt(p.y)}" width="${fmt(p.w)}" height="${fmt(p.h)}" fill="none" stroke="${p.stroke}" stroke-width="1"/>`;
    case "line":
      return `<line x1="${fmt(p.x1)}" y1="${fmt(p.y1)}" x2="${fmt(p.x2)}" y2="${fmt(p.y2)}" stroke="${p.stroke}" stroke-width="1"/>`;
    case "poly": {
      const pts = p.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      return `<polyline points="${pts}" fill="none" stroke="${p.stroke}" stroke-width="1.2"/>`;
    }
    case "dot":
      return `<circle cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="${fmt(p.r)}" fill="${p.fill}"/>`;
    case "text":
      return `<text x="${fmt(p.x)}" y="${fmt(p.y)}" font-size="${p.size}" font-family="sans-serif" text-anchor="${p.anchor}" fill="${p.fill}">${esc(p.text)}</text>`;
  }
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.prims.map(primToSvg).join("\n");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n${body}\n</svg>\n`;
}
