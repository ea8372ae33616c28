/** Client view model: a pure reducer over immutable-ish state.
 *
 * All tree data lives in a node cache keyed by id; entries never change
 * once fetched except for label swaps (the server relabels without
 * touching topology). The expansion set always satisfies the ancestor
 * closure rule: a node may only be expanded while its whole parent
 * chain is expanded. Every transition below preserves that invariant,
 * which the test suite hammers with random action sequences.
 */

import type { LabelKind, NodePayload, SessionBody, TreeResponse } from "./types.js";

export interface NodeEntry {
  id: number;
  parentId: number | null;
  height: number;
  size: number;
  label: string;
  tooltip?: string;
  showLabel: boolean;
  hasChildren: boolean;
  /** null until the children have been fetched. */
  childIds: number[] | null;
}

export interface Transform {
  scale: number;
  tx: number;
  ty: number;
}

export type ScaleMode = "sqrt" | "linear";

export interface State {
  digest: string | null;
  n: number;
  rootId: number | null;
  rootHeight: number;
  labelSet: string;
  labelKind: LabelKind;
  cache: Map<number, NodeEntry>;
  expanded: Set<number>;
  inflight: Set<number>;
  transform: Transform;
  scaleMode: ScaleMode;
  highlight: number | null;
  notice: string | null;
}

export interface Relabel {
  label: string;
  tooltip?: string;
}

export type Action =
  | { type: "tree-loaded"; body: TreeResponse }
  | { type: "click"; id: number }
  | { type: "children-loaded"; id: number; payload: NodePayload }
  | { type: "fetch-failed"; id: number; message: string }
  | { type: "set-transform"; transform: Transform }
  | { type: "toggle-scale-mode" }
  | { type: "labels-changed"; labelSet: string; labelKind: LabelKind; relabels: Map<number, Relabel> }
  | { type: "session-loaded"; body: SessionBody }
  | { type: "highlight"; id: number | null }
  | { type: "notice"; message: string | null };

export function initialState(): State {
  return {
    digest: null,
    n: 0,
    rootId: null,
    rootHeight: 0,
    labelSet: "default",
    labelKind: "text",
    cache: new Map(),
    expanded: new Set(),
    inflight: new Set(),
    transform: { scale: 1, tx: 0, ty: 0 },
    scaleMode: "sqrt",
    highlight: null,
    notice: null,
  };
}

/** Fold a nested payload into the cache; returns the touched ids. */
function ingest(
  cache: Map<number, NodeEntry>,
  payload: NodePayload,
  parentId: number | null,
): number[] {
  const touched: number[] = [];
  const stack: Array<[NodePayload, number | null]> = [[payload, parentId]];
  while (stack.length > 0) {
    const [node, parent] = stack.pop()!;
    const previous = cache.get(node.id);
    cache.set(node.id, {
      id: node.id,
      parentId: parent ?? previous?.parentId ?? null,
      height: node.height,
      size: node.size,
      label: node.label,
      tooltip: node.tooltip,
      showLabel: node.show_label,
      hasChildren: node.has_children,
      childIds: node.children
        ? node.children.map((c) => c.id)
        : previous?.childIds ?? null,
    });
    touched.push(node.id);
    for (const child of node.children ?? []) stack.push([child, node.id]);
  }
  return touched;
}

/** True when every strict ancestor of `id` is expanded. */
export function isVisible(state: State, id: number): boolean {
  let entry = state.cache.get(id);
  if (!entry) return false;
  while (entry.parentId !== null) {
    if (!state.expanded.has(entry.parentId)) return false;
    entry = state.cache.get(entry.parentId);
    if (!entry) return false;
  }
  return true;
}

function descendantsIn(state: State, id: number, pool: Set<number>): number[] {
  const hit: number[] = [];
  const stack = [...(state.cache.get(id)?.childIds ?? [])];
  while (stack.length > 0) {
    const v = stack.pop()!;
    if (pool.has(v)) hit.push(v);
    for (const c of state.cache.get(v)?.childIds ?? []) stack.push(c);
  }
  return hit;
}

/** Expanded ids whose children are cached and whose parent chain holds. */
function normalizeExpanded(
  cache: Map<number, NodeEntry>,
  wanted: Iterable<number>,
): Set<number> {
  const requested = new Set(wanted);
  const ok = new Set<number>();
  const admissible = (id: number): boolean => {
    const entry = cache.get(id);
    if (!entry || entry.childIds === null) return false;
    return entry.parentId === null || ok.has(entry.parentId);
  };
  let grew = true;
  while (grew) {
    grew = false;
    for (const id of requested) {
      if (!ok.has(id) && admissible(id)) {
        ok.add(id);
        grew = true;
      }
    }
  }
  return ok;
}

export function reduce(state: State, action: Action): State {
  switch (action.type) {
    case "tree-loaded": {
      const body = action.body;
      const cache = new Map<number, NodeEntry>();
      ingest(cache, body.root, null);
      return {
        ...initialState(),
        digest: body.dendrogram_digest,
        n: body.n,
        rootId: body.root.id,
        rootHeight: body.root_height,
        labelSet: body.label_set,
        labelKind: body.label_kind,
        cache,
        expanded: normalizeExpanded(cache, body.expanded),
        scaleMode: state.scaleMode,
      };
    }

    case "click": {
      const entry = state.cache.get(action.id);
      if (!entry || !entry.hasChildren) return state;
      if (state.expanded.has(action.id)) {
        // collapse: prune the node and every expanded descendant, and
        // forget in-flight fetches underneath (their responses will
        // still be cached, just not acted on)
        const expanded = new Set(state.expanded);
        expanded.delete(action.id);
        for (const v of descendantsIn(state, action.id, state.expanded)) {
          expanded.delete(v);
        }
        const inflight = new Set(state.inflight);
        inflight.delete(action.id);
        for (const v of descendantsIn(state, action.id, state.inflight)) {
          inflight.delete(v);
        }
        const next = { ...state, expanded, inflight };
        if (state.highlight !== null && !isVisible(next, state.highlight)) {
          next.highlight = null;
        }
        return next;
      }
      if (!isVisible(state, action.id)) return state;
      if (entry.childIds !== null) {
        const expanded = new Set(state.expanded);
        expanded.add(action.id);
        return { ...state, expanded };
      }
      if (state.inflight.has(action.id)) return state; // dedup
      const inflight = new Set(state.inflight);
      inflight.add(action.id);
      return { ...state, inflight };
    }

    case "children-loaded": {
      const cache = new Map(state.cache);
      ingest(cache, action.payload, state.cache.get(action.id)?.parentId ?? null);
      const next = { ...state, cache };
      if (state.inflight.has(action.id)) {
        const inflight = new Set(state.inflight);
        inflight.delete(action.id);
        next.inflight = inflight;
        // a collapse upstream while the fetch was in flight cancels the
        // expansion; the data stays cached for the next click
        if (isVisible(next, action.id)) {
          const expanded = new Set(state.expanded);
          expanded.add(action.id);
          next.expanded = expanded;
        }
      }
      return next;
    }

    case "fetch-failed": {
      const inflight = new Set(state.inflight);
      inflight.delete(action.id);
      return { ...state, inflight, notice: action.message };
    }

    case "set-transform":
      return { ...state, transform: action.transform };

    case "toggle-scale-mode":
      return {
        ...state,
        scaleMode: state.scaleMode === "sqrt" ? "linear" : "sqrt",
      };

    case "labels-changed": {
      const cache = new Map(state.cache);
      for (const [id, change] of action.relabels) {
        const entry = cache.get(id);
        if (!entry) continue;
        cache.set(id, { ...entry, label: change.label, tooltip: change.tooltip });
      }
      return {
        ...state,
        cache,
        labelSet: action.labelSet,
        labelKind: action.labelKind,
      };
    }

    case "session-loaded": {
      if (state.digest !== null && action.body.dendrogram_digest !== state.digest) {
        return { ...state, notice: "session belongs to a different tree" };
      }
      return {
        ...state,
        expanded: normalizeExpanded(state.cache, action.body.expanded),
        highlight: null,
      };
    }

    case "highlight":
      if (action.id !== null && !isVisible(state, action.id)) return state;
      return { ...state, highlight: action.id };

    case "notice":
      return { ...state, notice: action.message };
  }
}

/** Visible nodes in drawing order (children only under expanded nodes). */
export function visibleIds(state: State): number[] {
  if (state.rootId === null) return [];
  const out: number[] = [];
  const stack = [state.rootId];
  while (stack.length > 0) {
    const id = stack.pop()!;
    const entry = state.cache.get(id);
    if (!entry) continue;
    out.push(id);
    if (state.expanded.has(id) && entry.childIds) {
      for (let i = entry.childIds.length - 1; i >= 0; i--) {
        stack.push(entry.childIds[i]!);
      }
    }
  }
  return out;
}

/** Visible nodes drawn at the frontier (leaves and collapsed branches). */
export function frontierIds(state: State): number[] {
  return visibleIds(state).filter((id) => !state.expanded.has(id));
}

/** Serializable view for POST /api/session. */
export function sessionBody(state: State, now: () => string = isoNow): SessionBody {
  const stamp = now();
  return {
    format_version: 1,
    dendrogram_digest: state.digest ?? "",
    expanded: [...state.expanded].sort((a, b) => a - b),
    active_label_set: state.labelSet,
    created: stamp,
    modified: stamp,
  };
}

function isoNow(): string {
  return new Date().toISOString().replace(/\.\d{3}Z$/, "+00:00");
}

/** Structural invariants; the property tests assert this stays empty. */
export function invariantViolations(state: State): string[] {
  const problems: string[] = [];
  for (const id of state.expanded) {
    const entry = state.cache.get(id);
    if (!entry) {
      problems.push(`expanded ${id} is not cached`);
      continue;
    }
    if (entry.childIds === null) {
      problems.push(`expanded ${id} has no fetched children`);
    }
    if (entry.parentId !== null && !state.expanded.has(entry.parentId)) {
      problems.push(`expanded ${id} has a collapsed parent ${entry.parentId}`);
    }
  }
  for (const id of state.inflight) {
    if (state.expanded.has(id)) {
      problems.push(`node ${id} both expanded and in flight`);
    }
  }
  for (const [id, entry] of state.cache) {
    if (entry.childIds) {
      for (const child of entry.childIds) {
        const childEntry = state.cache.get(child);
        if (childEntry && childEntry.parentId !== id) {
          problems.push(`child ${child} does not point back to ${id}`);
        }
      }
    }
  }
  return problems;
}
