/** Positions for the visible tree in abstract layout coordinates.
 *
 * x: frontier nodes (leaves and collapsed branches) take consecutive
 * integer slots in drawing order; an expanded node sits at the mean of
 * its children. y: 0 at the root height down to 1 at height zero,
 * via sqrt (default, tames heavy-tailed heights) or linear scaling.
 * Height inversions simply draw a child above its parent; nothing to
 * guard here.
 */

import type { ScaleMode, State } from "./model.js";

export interface Point {
  x: number;
  y: number;
}

export interface Layout {
  positions: Map<number, Point>;
  frontier: number[];
  /** Largest frontier slot, for viewport fitting. */
  maxX: number;
}

function yScale(mode: ScaleMode, height: number, rootHeight: number): number {
  const f = (h: number) => (mode === "sqrt" ? Math.sqrt(Math.max(h, 0)) : Math.max(h, 0));
  const top = f(rootHeight);
  if (top <= 0) return 1;
  return 1 - f(height) / top;
}

export function layoutTree(state: State): Layout {
  const positions = new Map<number, Point>();
  const frontier: number[] = [];
  if (state.rootId === null) return { positions, frontier, maxX: 0 };

  let slot = 0;
  // post-order walk so parents can average their children's x
  const place = (id: number): number => {
    const entry = state.cache.get(id);
    if (!entry) return slot;
    const y = yScale(state.scaleMode, entry.height, state.rootHeight);
    if (state.expanded.has(id) && entry.childIds && entry.childIds.length > 0) {
      let sum = 0;
      for (const child of entry.childIds) sum += place(child);
      const x = sum / entry.childIds.length;
      positions.set(id, { x, y });
      return x;
    }
    const x = slot++;
    frontier.push(id);
    positions.set(id, { x, y });
    return x;
  };
  place(state.rootId);
  return { positions, frontier, maxX: Math.max(slot - 1, 0) };
}
