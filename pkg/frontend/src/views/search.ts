import { searchEntities } from "../api.js";
import { clear, el } from "../dom.js";
import { renderErrorBanner } from "./entity.js";

export async function renderSearch(container: HTMLElement, q: string): Promise<void> {
  clear(container);
  container.append(el("h1", {}, [`Search: ${q}`]));
  if (!q.trim()) {
    container.append(el("p", {}, ["Type a keyword into the search box above."]));
    return;
  }
  let response;
  try {
    response = await searchEntities(q);
  } catch (err) {
    renderErrorBanner(container, err, () => renderSearch(container, q));
    return;
  }
  container.append(el("p", { id: "search-total" }, [`${response.total} results`]));
  container.append(
    el(
      "ul",
      { id: "search-results" },
      response.results.map((hit) =>
        el("li", {}, [
          el("a", { class: "entity-link", href: `#/entity/${hit.iri_local}` }, [hit.label]),
        ]),
      ),
    ),
  );
}
