import { DiffRow, getCompareDiff, getCompareRuns } from "../api.js";
import { clear, el } from "../dom.js";
import { routeHash } from "../router.js";
import { renderErrorBanner } from "./entity.js";

export interface CompareSelection {
  run?: string;
  a?: string;
  b?: string;
  entity?: string;
}

function verdictCell(objectText: string | null, verdict: string | null): HTMLTableCellElement {
  if (objectText === null) {
    return el("td", { class: "diff-empty" }, ["—"]);
  }
  const cell = el("td", { class: `verdict-${verdict ?? "none"}` }, [objectText]);
  if (verdict) {
    cell.append(el("span", { class: "flag" }, [` [${verdict}]`]));
  }
  return cell;
}

function diffTable(rows: DiffRow[]): HTMLTableElement {
  const body = rows.map((row) =>
    el("tr", { class: "diff-row" }, [
      el("td", { class: "predicate" }, [row.predicate]),
      verdictCell(row.object_a, row.verdict_a),
      verdictCell(row.object_b, row.verdict_b),
    ]),
  );
  return el("table", { id: "diff-rows" }, [el("tbody", {}, body)]);
}

export async function renderCompare(
  container: HTMLElement,
  selection: CompareSelection,
): Promise<void> {
  clear(container);
  container.append(el("h1", {}, ["Compare models"]));
  let index;
  try {
    index = await getCompareRuns();
  } catch (err) {
    renderErrorBanner(container, err, () => renderCompare(container, selection));
    return;
  }
  const run = index.runs.find((r) => r.name === selection.run) ?? index.runs[0];
  if (!run) {
    container.append(el("p", {}, ["No compare runs are loaded."]));
    return;
  }
  const pickers = el("div", { id: "compare-pickers" });
  const makePicker = (
    id: string,
    options: string[],
    selected: string | undefined,
    onChange: (value: string) => CompareSelection,
  ) => {
    const select = el("select", { id });
    for (const option of options) {
      const node = el("option", { value: option }, [option]);
      if (option === selected) {
        node.setAttribute("selected", "selected");
      }
      select.append(node);
    }
    select.addEventListener("change", () => {
      window.location.hash = routeHash({ view: "compare", ...onChange(select.value) });
    });
    pickers.append(el("label", {}, [`${id.replace("pick-", "")}: `, select]));
    return select;
  };
  const current: CompareSelection = {
    run: run.name,
    a: selection.a ?? run.models[0],
    b: selection.b ?? run.models[1] ?? run.models[0],
    entity: selection.entity ?? run.entities[0],
  };
  makePicker("pick-run", index.runs.map((r) => r.name), current.run, (v) => ({ ...current, run: v }));
  makePicker("pick-a", run.models, current.a, (v) => ({ ...current, a: v }));
  makePicker("pick-b", run.models, current.b, (v) => ({ ...current, b: v }));
  makePicker("pick-entity", run.entities, current.entity, (v) => ({ ...current, entity: v }));
  container.append(pickers);
  let diff;
  try {
    diff = await getCompareDiff(current.run!, current.a!, current.b!, current.entity!);
  } catch (err) {
    // unknown combinations reset to the pickers without a table
    container.append(el("p", { id: "compare-missing" }, ["selection not in this run"]));
    return;
  }
  const totals = el("div", { id: "totals" });
  for (const model of [diff.model_a, diff.model_b]) {
    const t = diff.totals[model];
    totals.append(
      el("div", { class: "totals-model", "data-model": model }, [
        el("strong", {}, [model]),
        ` ${t["triples"]} triples: ${t["True"]} true, ${t["Plausible"]} plausible, ${t["False"]} false`,
      ]),
    );
  }
  container.append(
    totals,
    el("p", { class: "legend" }, [
      "flags: [True] verified, [Plausible] partial support, [False] unsupported",
    ]),
    diffTable(diff.rows),
  );
}
