import { clear, el } from "./dom.js";
import { parseHash, Route, routeHash } from "./router.js";
import { renderCompare } from "./views/compare.js";
import { renderConsole } from "./views/console.js";
import { renderEntity } from "./views/entity.js";
import { renderSearch } from "./views/search.js";

function renderHome(container: HTMLElement): void {
  clear(container).append(
    el("h1", {}, ["Knowledge base explorer"]),
    el("p", {}, [
      "Search entities, follow links through the graph, run structured queries, ",
      "and compare what different models know.",
    ]),
    el("ul", {}, [
      el("li", {}, [el("a", { href: "#/entity/Vannevar_Bush" }, ["Vannevar Bush"])]),
      el("li", {}, [el("a", { href: "#/entity/Suzhou" }, ["Suzhou"])]),
      el("li", {}, [el("a", { href: "#/query" }, ["Query console"])]),
      el("li", {}, [el("a", { href: "#/compare" }, ["Compare models"])]),
    ]),
  );
}

/** Render one route into the container; the view is a function of the URL alone. */
export async function renderRoute(container: HTMLElement, route: Route): Promise<void> {
  switch (route.view) {
    case "home":
      renderHome(container);
      return;
    case "search":
      return renderSearch(container, route.q);
    case "entity":
      return renderEntity(container, route.iri);
    case "query":
      return renderConsole(container, route.text);
    case "compare":
      return renderCompare(container, route);
  }
}

export function installApp(root: HTMLElement): void {
  const nav = el("nav", {}, [
    el("a", { href: "#/", class: "brand" }, ["kb explorer"]),
    el("a", { href: "#/query" }, ["query"]),
    el("a", { href: "#/compare" }, ["compare"]),
  ]);
  const box = el("input", {
    id: "search-box",
    type: "search",
    placeholder: "search entities...",
  });
  box.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && box.value.trim()) {
      window.location.hash = routeHash({ view: "search", q: box.value.trim() });
    }
  });
  nav.append(box);
  const main = el("main", { id: "view" });
  root.append(nav, main);
  const rerender = () => void renderRoute(main, parseHash(window.location.hash));
  window.addEventListener("hashchange", rerender);
  rerender();
}
