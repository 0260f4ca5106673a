import { describe, expect, it } from "vitest";

import { parseHash, Route, routeHash } from "../src/router.js";

describe("hash router", () => {
  const cases: [string, Route][] = [
    ["#/", { view: "home" }],
    ["", { view: "home" }],
    ["#/search?q=suzhou%20metro", { view: "search", q: "suzhou metro" }],
    ["#/entity/Suzhou_Metro", { view: "entity", iri: "Suzhou_Metro" }],
    ["#/query", { view: "query", text: undefined }],
    ["#/query?q=SELECT%20%3Fs", { view: "query", text: "SELECT ?s" }],
    [
      "#/compare?run=demo&a=gpt-x&b=llama-y&entity=Suzhou",
      { view: "compare", run: "demo", a: "gpt-x", b: "llama-y", entity: "Suzhou" },
    ],
  ];

  it.each(cases)("parses %s", (hash, route) => {
    expect(parseHash(hash)).toEqual(route);
  });

  it("round-trips every route through its hash", () => {
    for (const [, route] of cases) {
      expect(parseHash(routeHash(route))).toEqual(route);
    }
  });

  it("unknown paths fall back to home", () => {
    expect(parseHash("#/bogus/route")).toEqual({ view: "home" });
  });
});
