/** Async orchestration between the API client and the reducer.
 *
 * Flows never mutate state themselves; they observe it through
 * `getState` and feed the reducer through `dispatch`, so everything
 * here is drivable from tests with a fake server.
 */

import { ApiError, type Api, type TreePolicy } from "./api.js";
import {
  isVisible,
  sessionBody,
  type Action,
  type Relabel,
  type State,
} from "./model.js";
import type { SessionBody } from "./types.js";

export interface Store {
  getState: () => State;
  dispatch: (action: Action) => void;
}

export async function loadInitial(api: Api, store: Store, policy: TreePolicy): Promise<void> {
  try {
    store.dispatch({ type: "tree-loaded", body: await api.tree(policy) });
  } catch (err) {
    store.dispatch({ type: "notice", message: describe(err) });
  }
}

/** Click handler: toggles, fetching children first when needed. */
export async function toggleNode(api: Api, store: Store, id: number): Promise<void> {
  const before = store.getState();
  store.dispatch({ type: "click", id });
  const after = store.getState();
  if (!after.inflight.has(id) || before.inflight.has(id)) return;
  try {
    const payload = await api.children(id);
    store.dispatch({ type: "children-loaded", id, payload });
  } catch (err) {
    store.dispatch({ type: "fetch-failed", id, message: describe(err) });
  }
}

/** Expand every ancestor on `path`, then highlight `node`. */
async function reveal(api: Api, store: Store, node: number, path: number[]): Promise<boolean> {
  for (const ancestor of path) {
    if (!store.getState().expanded.has(ancestor)) {
      await toggleNode(api, store, ancestor);
    }
    if (!store.getState().expanded.has(ancestor)) return false; // fetch failed
  }
  store.dispatch({ type: "highlight", id: node });
  return isVisible(store.getState(), node);
}

export async function runSearch(api: Api, store: Store, query: string): Promise<boolean> {
  let hit;
  try {
    hit = await api.searchExact(query);
  } catch (err) {
    store.dispatch({ type: "notice", message: describe(err) });
    return false;
  }
  if (hit.node === undefined || hit.path === undefined) {
    store.dispatch({ type: "notice", message: `no label matches "${query}"` });
    return false;
  }
  return reveal(api, store, hit.node, hit.path);
}

/** Activate a label set, then refresh labels in place: re-read every
 * cached parent's children (and the root) and apply the new labels
 * without touching expansion or topology. */
export async function switchLabelSet(api: Api, store: Store, id: string): Promise<boolean> {
  try {
    await api.activateLabelSet(id);
  } catch (err) {
    store.dispatch({ type: "notice", message: describe(err) });
    return false;
  }
  const state = store.getState();
  const relabels = new Map<number, Relabel>();
  try {
    const tree = await api.tree({ policy: "topk", k: 1, depth: 0 });
    relabels.set(tree.root.id, { label: tree.root.label, tooltip: tree.root.tooltip });
    for (const [nodeId, entry] of state.cache) {
      if (entry.childIds === null) continue;
      const payload = await api.children(nodeId);
      relabels.set(payload.id, { label: payload.label, tooltip: payload.tooltip });
      for (const child of payload.children ?? []) {
        relabels.set(child.id, { label: child.label, tooltip: child.tooltip });
      }
    }
    store.dispatch({
      type: "labels-changed",
      labelSet: id,
      labelKind: tree.label_kind,
      relabels,
    });
  } catch (err) {
    // keep the old labels on screen; later payload merges catch up
    store.dispatch({ type: "notice", message: describe(err) });
    return false;
  }
  return true;
}

export async function saveSession(api: Api, store: Store): Promise<string | null> {
  try {
    return await api.saveSession(sessionBody(store.getState()));
  } catch (err) {
    store.dispatch({ type: "notice", message: describe(err) });
    return null;
  }
}

/** Replay a saved session: fetch whatever subtrees the expansion needs,
 * then swap the expansion set in one step. */
export async function applySession(api: Api, store: Store, body: SessionBody): Promise<boolean> {
  const state = store.getState();
  if (state.digest !== null && body.dendrogram_digest !== state.digest) {
    store.dispatch({ type: "session-loaded", body }); // reducer posts the notice
    return false;
  }
  const wanted = new Set(body.expanded);
  // fetch in passes: each pass caches children one level deeper, so the
  // closure rule guarantees progress until everything needed is present
  for (let pass = 0; pass <= body.expanded.length; pass++) {
    let fetched = false;
    for (const id of wanted) {
      const entry = store.getState().cache.get(id);
      if (!entry || entry.childIds !== null) continue;
      try {
        const payload = await api.children(id);
        store.dispatch({ type: "children-loaded", id, payload });
        fetched = true;
      } catch (err) {
        store.dispatch({ type: "notice", message: describe(err) });
        return false;
      }
    }
    if (!fetched) break;
  }
  store.dispatch({ type: "session-loaded", body });
  return true;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `server error ${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
