/** Browser bootstrap: wires DOM events to flows and repaints on change. */

import { ApiClient } from "./api.js";
import {
  applySession,
  loadInitial,
  runSearch,
  saveSession,
  switchLabelSet,
  toggleNode,
  type Store,
} from "./flows.js";
import { layoutTree } from "./layout.js";
import {
  initialState,
  reduce,
  sessionBody,
  type Action,
  type State,
} from "./model.js";
import { hitTest, paint, project, transformCentering, type Drawn } from "./render.js";
import { buildScene } from "./scene.js";
import type { SessionBody } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function start(): void {
  const api = new ApiClient("");
  const canvas = el<HTMLCanvasElement>("tree");
  const ctx = canvas.getContext("2d")!;
  const thumbs = new Map<string, HTMLImageElement>();
  let state: State = initialState();
  let drawn: Drawn = { glyphs: [] };

  const store: Store = {
    getState: () => state,
    dispatch: (action: Action) => {
      state = reduce(state, action);
      repaint();
    },
  };

  function viewport() {
    return { width: canvas.width, height: canvas.height };
  }

  function repaint(): void {
    const scene = buildScene(state);
    const { maxX } = layoutTree(state);
    for (const prim of scene) {
      if (prim.kind === "thumb" && !thumbs.has(prim.src)) {
        const img = new Image();
        img.onload = repaint;
        img.src = prim.src;
        thumbs.set(prim.src, img);
      }
    }
    drawn = paint(ctx, scene, state, maxX, viewport(), thumbs);
    el<HTMLElement>("notice").textContent = state.notice ?? "";
  }

  function resize(): void {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    repaint();
  }
  window.addEventListener("resize", resize);

  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const id = hitTest(drawn, ev.clientX - rect.left, ev.clientY - rect.top);
    if (id !== null) void toggleNode(api, store, id);
  });

  canvas.addEventListener("mousemove", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const id = hitTest(drawn, ev.clientX - rect.left, ev.clientY - rect.top);
    let tip = "";
    if (id !== null) {
      const entry = state.cache.get(id);
      tip = entry?.tooltip ?? "";
    }
    canvas.title = tip;
  });

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const t = state.transform;
    const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
    const scale = Math.min(Math.max(t.scale * factor, 0.2), 40);
    const rect = canvas.getBoundingClientRect();
    const cx = ev.clientX - rect.left;
    const cy = ev.clientY - rect.top;
    store.dispatch({
      type: "set-transform",
      transform: {
        scale,
        tx: cx - ((cx - t.tx) / t.scale) * scale,
        ty: cy - ((cy - t.ty) / t.scale) * scale,
      },
    });
  });

  let dragging: { x: number; y: number } | null = null;
  canvas.addEventListener("mousedown", (ev) => {
    dragging = { x: ev.clientX, y: ev.clientY };
  });
  window.addEventListener("mouseup", () => {
    dragging = null;
  });
  window.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    const t = state.transform;
    store.dispatch({
      type: "set-transform",
      transform: {
        scale: t.scale,
        tx: t.tx + ev.clientX - dragging.x,
        ty: t.ty + ev.clientY - dragging.y,
      },
    });
    dragging = { x: ev.clientX, y: ev.clientY };
  });

  const searchBox = el<HTMLInputElement>("search");
  const suggestions = el<HTMLDataListElement>("suggestions");
  searchBox.addEventListener("input", () => {
    const q = searchBox.value;
    if (!q) return;
    void api.searchPrefix(q).then((resp) => {
      suggestions.replaceChildren(
        ...resp.labels.map((label) => {
          const opt = document.createElement("option");
          opt.value = label;
          return opt;
        }),
      );
    });
  });
  searchBox.addEventListener("change", () => {
    const q = searchBox.value;
    if (!q) return;
    void runSearch(api, store, q).then((found) => {
      if (!found || state.highlight === null) return;
      const { positions, maxX } = layoutTree(state);
      const at = positions.get(state.highlight);
      if (at) {
        store.dispatch({
          type: "set-transform",
          transform: transformCentering(at, maxX, viewport(), Math.max(state.transform.scale, 2)),
        });
      }
    });
  });

  const labelSelect = el<HTMLSelectElement>("labelset");
  void api.labelSets().then((resp) => {
    labelSelect.replaceChildren(
      ...resp.label_sets.map((ls) => {
        const opt = document.createElement("option");
        opt.value = ls.id;
        opt.textContent = `${ls.id} (${ls.kind})`;
        opt.selected = ls.id === resp.active;
        return opt;
      }),
    );
  });
  labelSelect.addEventListener("change", () => {
    void switchLabelSet(api, store, labelSelect.value);
  });

  el<HTMLButtonElement>("save").addEventListener("click", () => {
    void saveSession(api, store).then((id) => {
      if (id === null) return;
      store.dispatch({ type: "notice", message: `session saved: ${id.slice(0, 12)}…` });
      const blob = new Blob([JSON.stringify(sessionBody(state)) + "\n"], {
        type: "application/json",
      });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = `session-${id.slice(0, 12)}.json`;
      a.click();
      URL.revokeObjectURL(a.href);
      el<HTMLAnchorElement>("export").href = api.exportUrl(id);
    });
  });

  el<HTMLInputElement>("load").addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    void file.text().then((text) => {
      const body = JSON.parse(text) as SessionBody;
      void applySession(api, store, body);
    });
  });

  el<HTMLButtonElement>("scale-toggle").addEventListener("click", () => {
    store.dispatch({ type: "toggle-scale-mode" });
  });

  el<HTMLAnchorElement>("export").addEventListener("click", (ev) => {
    const anchor = ev.currentTarget as HTMLAnchorElement;
    if (anchor.getAttribute("href") === "#") {
      ev.preventDefault();
      // export needs a saved session to name the view
      void saveSession(api, store).then((id) => {
        if (id !== null) window.open(api.exportUrl(id), "_blank");
      });
    }
  });

  resize();
  void loadInitial(api, store, { policy: "topk", k: 10, depth: 2 });
}

document.addEventListener("DOMContentLoaded", start);
export { project }; // keep the module shape stable for tooling
