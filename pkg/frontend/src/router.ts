/** Hash routing: the URL fragment carries the complete view state. */

export type Route =
  | { view: "home" }
  | { view: "search"; q: string }
  | { view: "entity"; iri: string }
  | { view: "query"; text?: string }
  | { view: "compare"; run?: string; a?: string; b?: string; entity?: string };

export function parseHash(hash: string): Route {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  const [path, queryString] = raw.split("?", 2);
  const params = new URLSearchParams(queryString ?? "");
  const parts = path.split("/").filter((p) => p.length > 0);
  if (parts.length === 0) {
    return { view: "home" };
  }
  switch (parts[0]) {
    case "search":
      return { view: "search", q: params.get("q") ?? "" };
    case "entity":
      return { view: "entity", iri: parts.slice(1).join("/") };
    case "query":
      return { view: "query", text: params.get("q") ?? undefined };
    case "compare":
      return {
        view: "compare",
        run: params.get("run") ?? undefined,
        a: params.get("a") ?? undefined,
        b: params.get("b") ?? undefined,
        entity: params.get("entity") ?? undefined,
      };
    default:
      return { view: "home" };
  }
}

export function routeHash(route: Route): string {
  switch (route.view) {
    case "home":
      return "#/";
    case "search":
      return `#/search?q=${encodeURIComponent(route.q)}`;
    case "entity":
      return `#/entity/${route.iri}`;
    case "query":
      return route.text ? `#/query?q=${encodeURIComponent(route.text)}` : "#/query";
    case "compare": {
      const params = new URLSearchParams();
      if (route.run) params.set("run", route.run);
      if (route.a) params.set("a", route.a);
      if (route.b) params.set("b", route.b);
      if (route.entity) params.set("entity", route.entity);
      const qs = params.toString();
      return qs ? `#/compare?${qs}` : "#/compare";
    }
  }
}
