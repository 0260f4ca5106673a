import { ApiError, encodeEntityIri, getEntity, Statement } from "../api.js";
import { clear, el } from "../dom.js";

const META_PREDICATES = new Set(["bfsLayer", "bfsParent"]);

function entityLink(label: string): HTMLAnchorElement {
  return el(
    "a",
    { class: "entity-link", href: `#/entity/${encodeEntityIri(label)}` },
    [label],
  );
}

function statementRow(statement: Statement): HTMLTableRowElement {
  const value =
    statement.o_kind === "entity"
      ? entityLink(statement.o)
      : el("span", { class: "literal" }, [statement.o]);
  return el("tr", { class: "statement" }, [
    el("td", { class: "predicate" }, [statement.p]),
    el("td", {}, [value]),
  ]);
}

export async function renderEntity(container: HTMLElement, iriLocal: string): Promise<void> {
  clear(container);
  let page;
  try {
    page = await getEntity(iriLocal);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      container.append(
        el("h1", {}, ["Unknown entity"]),
        el("p", {}, [err.body.error ?? "not found"]),
        el(
          "ul",
          { id: "suggestions" },
          (err.body.suggestions ?? []).map((s) =>
            el("li", {}, [
              el("a", { class: "entity-link", href: `#/entity/${s.iri_local}` }, [s.label]),
            ]),
          ),
        ),
      );
      return;
    }
    renderErrorBanner(container, err, () => renderEntity(container, iriLocal));
    return;
  }
  const header = el("div", { class: "entity-header" }, [
    el("h1", { class: "entity-label" }, [page.label]),
  ]);
  if (page.bfsLayer !== undefined) {
    header.append(el("span", { id: "layer-badge", class: "badge" }, [`layer ${page.bfsLayer}`]));
  }
  container.append(header);
  if (page.bfsParents && page.bfsParents.length > 0) {
    container.append(
      el("div", { id: "parents" }, [
        el("span", { class: "parents-label" }, ["discovered from: "]),
        ...page.bfsParents.map((parent) =>
          el(
            "a",
            { class: "parent-chip", href: `#/entity/${encodeEntityIri(parent)}` },
            [parent],
          ),
        ),
      ]),
    );
  }
  const content = page.statements.filter((s) => !META_PREDICATES.has(s.p));
  container.append(
    el("p", { class: "entity-meta" }, [
      `${content.length} statements, referenced by ${page.incoming_count}`,
    ]),
    el("table", { id: "statements" }, [el("tbody", {}, content.map(statementRow))]),
  );
}

export function renderErrorBanner(
  container: HTMLElement,
  err: unknown,
  retry: () => void,
): void {
  const banner = el("div", { class: "error-banner" }, [
    el("span", {}, [`backend error: ${err instanceof Error ? err.message : String(err)}`]),
  ]);
  const button = el("button", { id: "retry" }, ["retry"]);
  button.addEventListener("click", retry);
  banner.append(button);
  container.append(banner);
}
