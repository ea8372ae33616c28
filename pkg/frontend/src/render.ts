/** Canvas painter: scene primitives -> pixels under the viewport transform. */

import type { Point } from "./layout.js";
import type { State, Transform } from "./model.js";
import type { Primitive } from "./scene.js";

export interface Viewport {
  width: number;
  height: number;
}

const MARGIN = 40;
const GLYPH_R = 4;

/** Layout coords ([0..maxX] x [0..1]) to screen, then the user transform. */
export function project(p: Point, maxX: number, view: Viewport, t: Transform): Point {
  const spanX = Math.max(maxX, 1);
  const x = MARGIN + (p.x / spanX) * (view.width - 2 * MARGIN);
  const y = MARGIN + p.y * (view.height - 2 * MARGIN);
  return { x: x * t.scale + t.tx, y: y * t.scale + t.ty };
}

/** Transform that centers one layout point at mid-viewport. */
export function transformCentering(
  p: Point,
  maxX: number,
  view: Viewport,
  scale: number,
): Transform {
  const base = project(p, maxX, view, { scale: 1, tx: 0, ty: 0 });
  return {
    scale,
    tx: view.width / 2 - base.x * scale,
    ty: view.height / 2 - base.y * scale,
  };
}

export interface Drawn {
  /** Screen positions of glyphs for hit testing, in draw order. */
  glyphs: Array<{ id: number; x: number; y: number }>;
}

export function paint(
  ctx: CanvasRenderingContext2D,
  scene: Primitive[],
  state: State,
  maxX: number,
  view: Viewport,
  thumbs: Map<string, HTMLImageElement>,
): Drawn {
  const t = state.transform;
  ctx.clearRect(0, 0, view.width, view.height);
  const glyphs: Drawn["glyphs"] = [];

  ctx.strokeStyle = "#666";
  ctx.lineWidth = 1;
  for (const prim of scene) {
    if (prim.kind !== "edge") continue;
    const a = project(prim.from, maxX, view, t);
    const b = project(prim.to, maxX, view, t);
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
  }

  for (const prim of scene) {
    switch (prim.kind) {
      case "glyph": {
        const p = project(prim.at, maxX, view, t);
        glyphs.push({ id: prim.id, x: p.x, y: p.y });
        ctx.beginPath();
        if (prim.shape === "branch") {
          ctx.moveTo(p.x, p.y - GLYPH_R);
          ctx.lineTo(p.x - GLYPH_R, p.y + GLYPH_R);
          ctx.lineTo(p.x + GLYPH_R, p.y + GLYPH_R);
          ctx.closePath();
          ctx.fillStyle = "#2a6fbb";
        } else {
          ctx.arc(p.x, p.y, GLYPH_R - 1, 0, 2 * Math.PI);
          ctx.fillStyle = "#444";
        }
        ctx.fill();
        if (prim.highlighted) {
          ctx.beginPath();
          ctx.arc(p.x, p.y, GLYPH_R + 4, 0, 2 * Math.PI);
          ctx.strokeStyle = "#d9480f";
          ctx.lineWidth = 2;
          ctx.stroke();
          ctx.strokeStyle = "#666";
          ctx.lineWidth = 1;
        }
        break;
      }
      case "label": {
        const p = project(prim.at, maxX, view, t);
        ctx.fillStyle = "#222";
        ctx.font = "12px sans-serif";
        ctx.save();
        ctx.translate(p.x + 2, p.y + 10);
        ctx.rotate(Math.PI / 4);
        ctx.fillText(prim.text, 0, 0);
        ctx.restore();
        break;
      }
      case "thumb": {
        const p = project(prim.at, maxX, view, t);
        const img = thumbs.get(prim.src);
        if (img && img.complete && img.naturalWidth > 0) {
          ctx.drawImage(img, p.x - 12, p.y + 6, 24, 24);
        } else {
          // placeholder until the thumbnail arrives
          ctx.strokeRect(p.x - 12, p.y + 6, 24, 24);
        }
        break;
      }
      case "notice": {
        ctx.fillStyle = "#a00";
        ctx.font = "13px sans-serif";
        ctx.fillText(prim.text, 12, view.height - 12);
        break;
      }
      default:
        break;
    }
  }
  return { glyphs };
}

export function hitTest(drawn: Drawn, x: number, y: number, radius = 8): number | null {
  let best: number | null = null;
  let bestD = radius * radius;
  for (const g of drawn.glyphs) {
    const d = (g.x - x) ** 2 + (g.y - y) ** 2;
    if (d <= bestD) {
      best = g.id;
      bestD = d;
    }
  }
  return best;
}
