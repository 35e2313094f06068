/**
 * DOM layer: renders the session store and wires control events back into it.
 * No engine state lives here; everything flows through SessionStore.
 */
import { ResultPanel, SessionStore } from "./state";
import { ExplanationTree } from "./tree";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function renderApp(store: SessionStore, root: HTMLElement): void {
  root.replaceChildren();
  if (!store.summary) {
    root.append(el("p", {}, ["loading model..."]));
    return;
  }
  root.append(renderHeader(store));
  if (store.banner) {
    root.append(el("div", { class: "banner", role: "status" }, [store.banner]));
  }
  if (store.lastError) {
    root.append(el("div", { class: "error", role: "alert" }, [store.lastError]));
  }
  root.append(renderTaskForm(store, root));
  root.append(renderPanels(store, root));
  root.append(renderEditor(store, root));
}

function renderHeader(store: SessionStore): HTMLElement {
  const summary = store.summary!;
  return el("header", {}, [
    el("h1", {}, ["know-how session"]),
    el("p", { class: "model-hash" }, [
      `model ${summary.modelHash} · ${summary.scales.length} scales · `
      + `${summary.symbols.length} level-1 symbols`,
    ]),
  ]);
}

function renderTaskForm(store: SessionStore, root: HTMLElement): HTMLElement {
  const summary = store.summary!;
  const form = el("section", { class: "task-form" }, [el("h2", {}, ["task"])]);

  for (const symbol of summary.symbols) {
    const values = store.scaleValuesFor(symbol.name);
    const select = el("select", { "data-input": symbol.name }) as HTMLSelectElement;
    select.append(el("option", { value: "" }, ["(not an input)"]));
    for (const value of values) {
      select.append(el("option", { value }, [value]));
    }
    select.value = store.inputs[symbol.name] ?? "";
    select.addEventListener("change", () => {
      if (select.value === "") {
        store.clearInput(symbol.name);
      } else {
        store.setInput(symbol.name, select.value);
      }
      renderApp(store, root);
    });

    const output = el("input", {
      type: "checkbox",
      "data-output": symbol.name,
    }) as HTMLInputElement;
    output.checked = store.outputs.has(symbol.name);
    output.addEventListener("change", () => {
      store.toggleOutput(symbol.name);
      renderApp(store, root);
    });

    form.append(el("div", { class: "symbol-row" }, [
      el("label", {}, [symbol.name]),
      select,
      el("label", { class: "as-output" }, [output, "output"]),
    ]));
  }

  const criterion = el("div", { class: "criterion" });
  for (const kind of ["none", "maximize", "minimize"] as const) {
    const radio = el("input", {
      type: "radio",
      name: "criterion",
      value: kind,
      "data-criterion": kind,
    }) as HTMLInputElement;
    radio.checked = store.criterion.kind === kind;
    radio.addEventListener("change", () => {
      store.setCriterion(
        kind === "none"
          ? { kind }
          : { kind, objective: store.criterion.objective ?? store.numericSymbols()[0] },
      );
      renderApp(store, root);
    });
    criterion.append(el("label", {}, [radio, kind]));
  }
  const objective = el("select", { "data-role": "objective" }) as HTMLSelectElement;
  for (const name of store.numericSymbols()) {
    objective.append(el("option", { value: name }, [name]));
  }
  if (store.criterion.objective) objective.value = store.criterion.objective;
  objective.disabled = store.criterion.kind === "none";
  objective.addEventListener("change", () => {
    if (store.criterion.kind !== "none") {
      store.setCriterion({ ...store.criterion, objective: objective.value });
    }
  });
  criterion.append(objective);
  form.append(criterion);

  const run = el("button", { "data-role": "run" }, ["run what-if"]) as HTMLButtonElement;
  run.disabled = !store.canSubmit();
  run.addEventListener("click", () => {
    void store
      .runWhatIf(`${store.criterion.kind} ${store.criterion.objective ?? ""}`.trim())
      .then(() => renderApp(store, root))
      .catch(() => renderApp(store, root));
  });
  form.append(run);
  return form;
}

function renderPanels(store: SessionStore, root: HTMLElement): HTMLElement {
  const section = el("section", { class: "panels" }, [el("h2", {}, ["what-if results"])]);
  const row = el("div", { class: "panel-row" });
  for (const panel of store.panels) {
    row.append(renderPanel(store, panel, root));
  }
  section.append(row);
  return section;
}

function renderPanel(store: SessionStore, panel: ResultPanel, root: HTMLElement): HTMLElement {
  const body = el("div", {
    class: "panel" + (panel.stale ? " stale" : ""),
    "data-panel": String(panel.id),
  });
  body.append(el("h3", {}, [panel.label]));
  if (panel.stale) {
    body.append(el("p", { class: "stale-note" }, ["model changed since this run"]));
  }
  if (panel.response.solutions.length === 0) {
    const note = panel.response.diagnostics.map((d) => d.message).join("; ");
    body.append(el("p", { class: "no-solution" }, [note || "no solution"]));
    return body;
  }
  for (const solution of panel.response.solutions) {
    const table = el("table", { class: "values" });
    for (const [name, value] of Object.entries(solution.values)) {
      table.append(el("tr", {}, [el("td", {}, [name]), el("td", {}, [value])]));
    }
    const explainButton = el(
      "button",
      { "data-explain": solution.id },
      ["explain"],
    ) as HTMLButtonElement;
    explainButton.addEventListener("click", () => {
      void store.openExplanation(solution.id).then(() => renderApp(store, root));
    });
    body.append(table, explainButton);
    if (store.expiredExplanations.has(solution.id)) {
      body.append(el("p", { class: "expired" }, ["explanation expired"]));
    }
    const tree = store.trees.get(solution.id);
    if (tree) body.append(renderTree(store, tree, root));
  }
  return body;
}

function renderTree(store: SessionStore, tree: ExplanationTree, root: HTMLElement): HTMLElement {
  const list = el("ul", { class: "explanation" });
  for (const row of tree.rows()) {
    const item = el("li", {
      class: `tree-${row.kind}` + (tree.selectedKey === row.key ? " selected" : ""),
      style: `margin-left:${row.depth}em`,
      "data-tree-key": row.key,
    });
    if (row.expandable) {
      const toggle = el("button", { class: "toggle" }, [row.expanded ? "−" : "+"]);
      toggle.addEventListener("click", (event) => {
        event.stopPropagation();
        tree.toggle(row.key);
        renderApp(store, root);
      });
      item.append(toggle);
    }
    item.append(el("span", {}, [row.label]));
    if (row.note) {
      const details = el("details", {}, [el("summary", {}, ["know-how"]), row.note]);
      item.append(details);
    }
    item.addEventListener("click", () => {
      tree.select(row.key);
      renderApp(store, root);
    });
    list.append(item);
  }
  return list;
}

function renderEditor(store: SessionStore, root: HTMLElement): HTMLElement {
  const section = el("section", { class: "editor" }, [el("h2", {}, ["know-how editor"])]);
  const { editor } = store;
  if (editor.columns.length === 0) {
    section.append(el("p", {}, ["no draft table open"]));
    return section;
  }
  const issues = store.draftIssues();
  const grid = el("table", { class: "draft" });
  grid.append(el("tr", {}, editor.columns.map(
    (c) => el("th", {}, [`${c.name} : ${c.scale}`]),
  )));
  editor.rows.forEach((rowValues, rowIndex) => {
    const tr = el("tr", {});
    editor.columns.forEach((column, colIndex) => {
      const issue = issues.find(
        (i) => i.row === rowIndex && i.column === column.name && i.code === "E-SCALE",
      );
      const cell = el("td", { class: issue ? "cell-error" : "" });
      const input = el("input", {
        value: rowValues[colIndex] ?? "",
        "data-cell": `${rowIndex}:${colIndex}`,
      }) as HTMLInputElement;
      input.addEventListener("change", () => {
        store.setDraftCell(rowIndex, colIndex, input.value);
        renderApp(store, root);
      });
      cell.append(input);
      if (issue) cell.append(el("span", { class: "issue" }, [`${issue.code} ${issue.message}`]));
      tr.append(cell);
    });
    grid.append(tr);
  });
  section.append(grid);
  const duplicates = issues.filter((i) => i.code === "W-DUPLICATE-KEY");
  for (const dup of duplicates) {
    section.append(el("p", { class: "warning" }, [`row ${dup.row + 1}: ${dup.message}`]));
  }
  const submit = el("button", { "data-role": "submit-knowhow" }, ["add to fact base"]);
  submit.addEventListener("click", () => {
    void store.submitDraft().then(() => renderApp(store, root)).catch(() => {
      renderApp(store, root);
    });
  });
  section.append(submit);
  return section;
}
