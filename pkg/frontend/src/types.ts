/** Wire types for the prototree JSON API (see docs/formats.md server table). */

export interface NodePayload {
  id: number;
  height: number;
  size: number;
  label: string;
  show_label: boolean;
  collapsed: boolean;
  has_children: boolean;
  children?: NodePayload[];
  tooltip?: string;
}

export type LabelKind = "text" | "image";

export interface TreeResponse {
  format_version: number;
  dendrogram_digest: string;
  n: number;
  root_height: number;
  label_set: string;
  label_kind: LabelKind;
  policy: Record<string, unknown>;
  expanded: number[];
  root: NodePayload;
}

export interface ChildrenResponse extends NodePayload {}

/** Exact search result; an empty object means no match. */
export interface SearchHit {
  node?: number;
  path?: number[];
}

export interface PrefixResponse {
  labels: string[];
}

export interface LabelSetInfo {
  id: string;
  kind: LabelKind;
  entries: number;
}

export interface LabelSetsResponse {
  active: string;
  label_sets: LabelSetInfo[];
}

export interface SessionBody {
  format_version: number;
  dendrogram_digest: string;
  expanded: number[];
  active_label_set: string;
  created: string;
  modified: string;
}
