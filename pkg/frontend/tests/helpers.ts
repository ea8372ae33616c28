/** Test fixtures: a seeded PRNG, random synthetic trees, and a fake
 * in-memory server that mirrors the real API's payload semantics
 * (depth budget, show_label from the real parent, digest-bound
 * sessions, label-set activation).
 */

import { ApiError, type Api, type TreePolicy } from "../src/api.js";
import type {
  LabelKind,
  LabelSetsResponse,
  NodePayload,
  PrefixResponse,
  SearchHit,
  SessionBody,
  TreeResponse,
} from "../src/types.js";

export type Rng = () => number;

/** mulberry32: small, fast, deterministic. */
export function makeRng(seed: number): Rng {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randInt(rng: Rng, lo: number, hi: number): number {
  return lo + Math.floor(rng() * (hi - lo + 1));
}

export function pick<T>(rng: Rng, items: readonly T[]): T {
  return items[Math.floor(rng() * items.length)]!;
}

export interface SyntheticTree {
  n: number;
  nNodes: number;
  rootId: number;
  parent: Int32Array; // -1 for the root
  childrenOf: Array<[number, number] | null>;
  height: Float64Array;
  prototype: Int32Array; // leaf id per node
  leafLabel: string[];
  digest: string;
}

/** Random full binary merge tree with increasing heights. */
export function generateTree(rng: Rng, n: number): SyntheticTree {
  const nNodes = 2 * n - 1;
  const parent = new Int32Array(nNodes).fill(-1);
  const childrenOf: Array<[number, number] | null> = new Array(nNodes).fill(null);
  const height = new Float64Array(nNodes);
  const prototype = new Int32Array(nNodes);
  for (let i = 0; i < n; i++) prototype[i] = i;

  const active: number[] = Array.from({ length: n }, (_, i) => i);
  let h = 0;
  for (let k = 0; k < n - 1; k++) {
    const i = Math.floor(rng() * active.length);
    const a = active.splice(i, 1)[0]!;
    const j = Math.floor(rng() * active.length);
    const b = active.splice(j, 1)[0]!;
    const node = n + k;
    const [left, right] = a < b ? [a, b] : [b, a];
    childrenOf[node] = [left, right];
    parent[left] = node;
    parent[right] = node;
    h += 0.1 + rng();
    height[node] = h;
    prototype[node] = rng() < 0.5 ? prototype[left]! : prototype[right]!;
    active.push(node);
  }
  const leafLabel = Array.from({ length: n }, (_, i) => `leaf-${i}`);
  return {
    n,
    nNodes,
    rootId: nNodes - 1,
    parent,
    childrenOf,
    height,
    prototype,
    leafLabel,
    digest: `fake-${n}-${Math.floor(rng() * 1e9)}`,
  };
}

export function ancestors(tree: SyntheticTree, id: number): number[] {
  const chain: number[] = [];
  let v = tree.parent[id]!;
  while (v >= 0) {
    chain.push(v);
    v = tree.parent[v]!;
  }
  return chain.reverse();
}

export function subtreeLeafCount(tree: SyntheticTree, id: number): number {
  if (id < tree.n) return 1;
  const [a, b] = tree.childrenOf[id]!;
  return subtreeLeafCount(tree, a) + subtreeLeafCount(tree, b);
}

interface LabelSetDef {
  kind: LabelKind;
  display: (leafLabel: string) => string;
  tooltip?: (leafLabel: string) => string;
}

/** In-memory Api implementation over one synthetic tree. */
export class FakeServer implements Api {
  active = "default";
  readonly sets: Map<string, LabelSetDef> = new Map([
    ["default", { kind: "text" as LabelKind, display: (l: string) => l }],
    [
      "alt",
      {
        kind: "text" as LabelKind,
        display: (l: string) => `ALT ${l}`,
        tooltip: (l: string) => `tip ${l}`,
      },
    ],
    ["img", { kind: "image" as LabelKind, display: (l: string) => `${l}.png` }],
  ]);
  private sessions = new Map<string, SessionBody>();
  /** When > 0, that many upcoming children() calls fail. */
  failures = 0;
  childrenCalls = 0;

  constructor(readonly data: SyntheticTree) {}

  private display(leaf: number): { label: string; tooltip?: string } {
    const set = this.sets.get(this.active)!;
    const raw = this.data.leafLabel[leaf]!;
    return { label: set.display(raw), tooltip: set.tooltip?.(raw) };
  }

  payload(id: number, expanded: Set<number>, depth: number): NodePayload {
    const t = this.data;
    const isLeaf = id < t.n;
    const parent = t.parent[id]!;
    const proto = t.prototype[id]!;
    const show = parent < 0 || t.prototype[parent]! !== proto;
    const { label, tooltip } = this.display(proto);
    const out: NodePayload = {
      id,
      height: t.height[id]!,
      size: subtreeLeafCount(t, id),
      label,
      show_label: show,
      collapsed: !isLeaf && !expanded.has(id),
      has_children: !isLeaf,
    };
    if (tooltip !== undefined) out.tooltip = tooltip;
    if (!isLeaf) {
      const budget = expanded.has(id) ? depth : depth - 1;
      if (expanded.has(id) || depth > 0) {
        out.children = t.childrenOf[id]!.map((c) => this.payload(c, expanded, budget));
      }
    }
    return out;
  }

  async tree(opts: TreePolicy): Promise<TreeResponse> {
    const t = this.data;
    const k = Math.min(opts.k ?? 10, t.n);
    // greedy top-k: repeatedly split the tallest frontier node
    const frontier = new Set([t.rootId]);
    while (frontier.size < k) {
      let best = -1;
      for (const v of frontier) {
        if (v < t.n) continue;
        if (best < 0 || t.height[v]! > t.height[best]! ||
            (t.height[v] === t.height[best] && v > best)) {
          best = v;
        }
      }
      if (best < 0) break;
      frontier.delete(best);
      for (const c of t.childrenOf[best]!) frontier.add(c);
    }
    const expanded = new Set<number>();
    for (const v of frontier) for (const a of ancestors(t, v)) expanded.add(a);
    return {
      format_version: 1,
      dendrogram_digest: t.digest,
      n: t.n,
      root_height: t.height[t.rootId]!,
      label_set: this.active,
      label_kind: this.sets.get(this.active)!.kind,
      policy: { policy: "topk", k },
      expanded: [...expanded].sort((a, b) => a - b),
      root: this.payload(t.rootId, expanded, opts.depth ?? 2),
    };
  }

  async children(id: number, depth = 1): Promise<NodePayload> {
    this.childrenCalls += 1;
    if (this.failures > 0) {
      this.failures -= 1;
      throw new ApiError(503, "synthetic outage");
    }
    if (id < 0 || id >= this.data.nNodes) throw new ApiError(404, `unknown node ${id}`);
    if (id < this.data.n) throw new ApiError(400, `node ${id} is a leaf`);
    return this.payload(id, new Set(), depth);
  }

  async searchExact(q: string): Promise<SearchHit> {
    const t = this.data;
    let leaf = -1;
    for (let i = 0; i < t.n; i++) {
      if (this.display(i).label === q) {
        leaf = i;
        break;
      }
    }
    if (leaf < 0) return {};
    // highest node whose prototype is this leaf: walk up while it stays
    let node = leaf;
    let v = t.parent[leaf]!;
    while (v >= 0) {
      if (t.prototype[v] === leaf) node = v;
      v = t.parent[v]!;
    }
    return { node, path: ancestors(t, node) };
  }

  async searchPrefix(q: string): Promise<PrefixResponse> {
    const seen = new Set<string>();
    for (let i = 0; i < this.data.n; i++) {
      const label = this.display(i).label;
      if (label.startsWith(q)) seen.add(label);
    }
    return { labels: [...seen].sort().slice(0, 20) };
  }

  async labelSets(): Promise<LabelSetsResponse> {
    return {
      active: this.active,
      label_sets: [...this.sets.entries()].map(([id, def]) => ({
        id,
        kind: def.kind,
        entries: this.data.n,
      })),
    };
  }

  async activateLabelSet(id: string): Promise<{ active: string }> {
    if (!this.sets.has(id)) throw new ApiError(404, `unknown label set ${id}`);
    this.active = id;
    return { active: id };
  }

  async saveSession(body: SessionBody): Promise<string> {
    if (body.dendrogram_digest !== this.data.digest) {
      throw new ApiError(409, "digest mismatch");
    }
    const key = JSON.stringify(body.expanded);
    let hash = 2166136261;
    for (let i = 0; i < key.length; i++) {
      hash = Math.imul(hash ^ key.charCodeAt(i), 16777619);
    }
    const id = (hash >>> 0).toString(16).padStart(8, "0");
    if (!this.sessions.has(id)) this.sessions.set(id, body);
    return id;
  }

  async loadSession(id: string): Promise<SessionBody> {
    const body = this.sessions.get(id);
    if (!body) throw new ApiError(404, `unknown session ${id}`);
    return body;
  }

  exportUrl(sessionId: string): string {
    return `/api/export?session=${sessionId}`;
  }

  assetUrl(path: string): string {
    return `/assets/${path}`;
  }
}
