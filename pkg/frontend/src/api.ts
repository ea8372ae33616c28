/** Thin fetch wrapper around the server API; fetch is injectable for tests. */

import type {
  LabelSetsResponse,
  NodePayload,
  PrefixResponse,
  SearchHit,
  SessionBody,
  TreeResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
      else if (body?.detail?.message) detail = body.detail.message;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export interface TreePolicy {
  policy: "topk" | "dynamic";
  k?: number;
  minSize?: number;
  depth?: number;
}

/** What the flows need from a server; ApiClient is the HTTP one and the
 * tests provide an in-memory fake. */
export interface Api {
  tree(opts: TreePolicy): Promise<TreeResponse>;
  children(id: number, depth?: number): Promise<NodePayload>;
  searchExact(q: string): Promise<SearchHit>;
  searchPrefix(q: string): Promise<PrefixResponse>;
  labelSets(): Promise<LabelSetsResponse>;
  activateLabelSet(id: string): Promise<{ active: string }>;
  saveSession(body: SessionBody): Promise<string>;
  loadSession(id: string): Promise<SessionBody>;
  exportUrl(sessionId: string): string;
  assetUrl(path: string): string;
}

export class ApiClient implements Api {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async tree(opts: TreePolicy): Promise<TreeResponse> {
    const params = new URLSearchParams({ policy: opts.policy });
    if (opts.k !== undefined) params.set("k", String(opts.k));
    if (opts.minSize !== undefined) params.set("min_size", String(opts.minSize));
    if (opts.depth !== undefined) params.set("depth", String(opts.depth));
    return asJson(await this.fetchFn(`${this.base}/api/tree?${params}`));
  }

  async children(id: number, depth = 1): Promise<NodePayload> {
    return asJson(
      await this.fetchFn(`${this.base}/api/node/${id}/children?depth=${depth}`),
    );
  }

  async searchExact(q: string): Promise<SearchHit> {
    const params = new URLSearchParams({ q, mode: "exact" });
    return asJson(await this.fetchFn(`${this.base}/api/search?${params}`));
  }

  async searchPrefix(q: string): Promise<PrefixResponse> {
    const params = new URLSearchParams({ q, mode: "prefix" });
    return asJson(await this.fetchFn(`${this.base}/api/search?${params}`));
  }

  async labelSets(): Promise<LabelSetsResponse> {
    return asJson(await this.fetchFn(`${this.base}/api/labelsets`));
  }

  async activateLabelSet(id: string): Promise<{ active: string }> {
    return asJson(
      await this.fetchFn(`${this.base}/api/labelsets/activate`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ id }),
      }),
    );
  }

  async saveSession(body: SessionBody): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/api/session`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body) + "\n",
    });
    return (await asJson<{ id: string }>(resp)).id;
  }

  async loadSession(id: string): Promise<SessionBody> {
    return asJson(await this.fetchFn(`${this.base}/api/session/${id}`));
  }

  exportUrl(sessionId: string): string {
    return `${this.base}/api/export?session=${encodeURIComponent(sessionId)}`;
  }

  assetUrl(path: string): string {
    return `${this.base}/assets/${path}`;
  }
}
