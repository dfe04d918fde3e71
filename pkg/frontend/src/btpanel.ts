// Behavior-tree panel: a pure flattener from the snapshot's tree view to
// display rows, plus a DOM renderer with per-node override controls.

import type { BtView } from "./protocol";

export type BtRow = {
  id: number;
  depth: number;
  name: string;
  kindLabel: string;
  status: string | null;
  forced: string | null;
};

export function kindLabel(node: BtView): string {
  switch (node.kind) {
    case "Sequence":
    case "Fallback":
      return node.memory ? `${node.kind}(mem)` : node.kind;
    case "Parallel":
      return `Parallel(${node.threshold})`;
    case "Repeat":
    case "Retry":
      return `${node.kind}(${node.limit})`;
    default:
      return node.kind;
  }
}

export function flattenTree(node: BtView, depth = 0): BtRow[] {
  const row: BtRow = {
    id: node.id,
    depth,
    name: node.name,
    kindLabel: kindLabel(node),
    status: node.status,
    forced: node.forced,
  };
  return [row, ...node.children.flatMap((c) => flattenTree(c, depth + 1))];
}

export type OverrideRequest = {
  nodeId: number;
  forced: "Success" | "Failure" | null;
};

export function renderBtPanel(
  container: HTMLElement,
  tree: BtView | null,
  selected: number | null,
  onSelect: (id: number) => void,
  onOverride: (req: OverrideRequest) => void,
): void {
  container.textContent = "";
  if (!tree) {
    const empty = document.createElement("div");
    empty.className = "bt-empty";
    empty.textContent = "no active mission";
    container.appendChild(empty);
    return;
  }
  for (const row of flattenTree(tree)) {
    const el = document.createElement("div");
    el.className = `bt-row status-${(row.status ?? "none").toLowerCase()}`;
    el.style.paddingLeft = `${row.depth * 14 + 4}px`;
    const label = document.createElement("span");
    label.textContent = `${row.name} [${row.kindLabel}]`;
    el.appendChild(label);
    if (row.status) {
      const badge = document.createElement("span");
      badge.className = "bt-status";
      badge.textContent = row.status;
      el.appendChild(badge);
    }
    if (row.forced) {
      const badge = document.createElement("span");
      badge.className = "bt-forced";
      badge.textContent = `forced:${row.forced}`;
      el.appendChild(badge);
    }
    el.addEventListener("click", () => onSelect(row.id));
    if (selected === row.id) {
      el.classList.add("selected");
      const controls = document.createElement("span");
      controls.className = "bt-controls";
      for (const [text, forced] of [
        ["force-S", "Success"],
        ["force-F", "Failure"],
        ["clear", null],
      ] as const) {
        const btn = document.createElement("button");
        btn.textContent = text;
        btn.addEventListener("click", (ev) => {
          ev.stopPropagation();
          onOverride({ nodeId: row.id, forced });
        });
        controls.appendChild(btn);
      }
      el.appendChild(controls);
    }
    container.appendChild(el);
  }
}
