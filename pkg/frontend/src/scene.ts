/** Scene graph: what to draw, independent of canvas and transform.
 *
 * The renderer paints primitives in order under the current viewport
 * transform. Keeping the scene free of the transform lets the tests
 * assert that zoom/pan and label switches change exactly what they
 * should and nothing else.
 */

import { layoutTree, type Point } from "./layout.js";
import { frontierIds, type State } from "./model.js";

export const FRONTIER_GLYPH_CAP = 500;

export type Primitive =
  | { kind: "edge"; from: Point; to: Point }
  | { kind: "glyph"; id: number; at: Point; shape: "leaf" | "branch"; highlighted: boolean }
  | { kind: "label"; id: number; at: Point; text: string; tooltip?: string }
  | { kind: "thumb"; id: number; at: Point; src: string; tooltip?: string }
  | { kind: "notice"; text: string };

export function buildScene(state: State, cap: number = FRONTIER_GLYPH_CAP): Primitive[] {
  const { positions } = layoutTree(state);
  const primitives: Primitive[] = [];

  // edges: elbow from each visible child up to its parent
  for (const [id, at] of positions) {
    const entry = state.cache.get(id);
    if (!entry || entry.parentId === null) continue;
    const parentAt = positions.get(entry.parentId);
    if (!parentAt) continue;
    primitives.push({ kind: "edge", from: { x: parentAt.x, y: parentAt.y }, to: { x: at.x, y: parentAt.y } });
    primitives.push({ kind: "edge", from: { x: at.x, y: parentAt.y }, to: { x: at.x, y: at.y } });
  }

  const frontier = frontierIds(state);
  const drawn = frontier.slice(0, cap);
  for (const id of drawn) {
    const entry = state.cache.get(id)!;
    const at = positions.get(id)!;
    primitives.push({
      kind: "glyph",
      id,
      at,
      shape: entry.hasChildren ? "branch" : "leaf",
      highlighted: state.highlight === id,
    });
    if (!entry.showLabel) continue;
    if (state.labelKind === "image") {
      primitives.push({
        kind: "thumb",
        id,
        at,
        src: `/assets/${entry.label}`,
        tooltip: entry.tooltip,
      });
    } else {
      primitives.push({ kind: "label", id, at, text: entry.label, tooltip: entry.tooltip });
    }
  }
  if (frontier.length > drawn.length) {
    primitives.push({
      kind: "notice",
      text: `showing ${drawn.length} of ${frontier.length} frontier nodes; expand a smaller branch or collapse others`,
    });
  }
  return primitives;
}
