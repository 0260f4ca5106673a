import { ApiError, QueryResponse, QueryTerm, runQuery } from "../api.js";
import { CANNED_QUERIES } from "../canned.js";
import { clear, el } from "../dom.js";

// superseded submissions are discarded: only the newest sequence renders
let querySeq = 0;

function termText(term: QueryTerm | undefined): string {
  if (!term) {
    return "";
  }
  if (term.type === "uri") {
    const value = term.value;
    const entityBase = "https://gptkb.org/entity/";
    const propBase = "https://gptkb.org/prop/";
    if (value.startsWith(entityBase)) return `gptkb:${value.slice(entityBase.length)}`;
    if (value.startsWith(propBase)) return `gptkbp:${value.slice(propBase.length)}`;
    return value;
  }
  return term.value;
}

function renderResult(panel: HTMLElement, response: QueryResponse): void {
  clear(panel);
  const vars = response.head.vars;
  const header = el("tr", {}, vars.map((v) => el("th", {}, [v])));
  const rows = response.results.bindings.map((binding) =>
    el("tr", {}, vars.map((v) => el("td", {}, [termText(binding[v])]))),
  );
  panel.append(
    el("p", { id: "query-meta" }, [
      `${response.results.bindings.length} rows in ${response.elapsed_ms} ms`,
    ]),
    el("table", { id: "results" }, [el("thead", {}, [header]), el("tbody", {}, rows)]),
  );
}

function renderQueryError(panel: HTMLElement, err: unknown): void {
  clear(panel);
  if (err instanceof ApiError && err.status === 408) {
    panel.append(
      el("div", { id: "query-timeout", class: "error-panel" }, [
        `query timed out after the ${err.body.timeout_seconds}s window (${err.body.elapsed_ms} ms elapsed)`,
      ]),
    );
    return;
  }
  if (err instanceof ApiError && err.status === 400) {
    const where =
      err.body.line !== undefined ? ` (line ${err.body.line}, column ${err.body.col})` : "";
    panel.append(
      el("div", { id: "query-error", class: "error-panel" }, [`${err.body.error}${where}`]),
    );
    return;
  }
  panel.append(
    el("div", { id: "query-error", class: "error-panel" }, [
      `request failed: ${err instanceof Error ? err.message : String(err)}`,
    ]),
  );
}

export async function submitQuery(panel: HTMLElement, text: string): Promise<void> {
  const seq = ++querySeq;
  clear(panel).append(el("p", { class: "running" }, ["running..."]));
  try {
    const response = await runQuery(text);
    if (seq === querySeq) {
      renderResult(panel, response);
    }
  } catch (err) {
    if (seq === querySeq) {
      renderQueryError(panel, err);
    }
  }
}

export function renderConsole(container: HTMLElement, initialText?: string): Promise<void> {
  clear(container);
  container.append(el("h1", {}, ["Query console"]));
  const picker = el("select", { id: "canned-queries" });
  picker.append(el("option", { value: "" }, ["Example queries..."]));
  for (const canned of CANNED_QUERIES) {
    picker.append(el("option", { value: canned.text }, [canned.name]));
  }
  const editor = el("textarea", { id: "query-editor", rows: "12", spellcheck: "false" });
  editor.value = initialText ?? CANNED_QUERIES[0].text;
  picker.addEventListener("change", () => {
    if (picker.value) {
      editor.value = picker.value;
    }
  });
  const button = el("button", { id: "run-query" }, ["Run"]);
  const panel = el("div", { id: "query-panel" });
  button.addEventListener("click", () => {
    const target = `#/query?q=${encodeURIComponent(editor.value)}`;
    if (window.location.hash === target) {
      void submitQuery(panel, editor.value); // re-run in place
    } else {
      window.location.hash = target; // the router re-renders and submits
    }
  });
  container.append(picker, editor, button, panel);
  if (initialText) {
    return submitQuery(panel, initialText);
  }
  return Promise.resolve();
}
