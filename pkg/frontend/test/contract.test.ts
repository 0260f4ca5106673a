/** The client may only call endpoints documented in the backend's
 * OpenAPI description. */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { describe, expect, it } from "vitest";

import { encodeEntityIri, endpoints } from "../src/api.js";

function openapiPaths(): Set<string> {
  const path = resolve(process.cwd(), "..", "docs", "openapi.json");
  const doc = JSON.parse(readFileSync(path, "utf-8"));
  return new Set(Object.keys(doc.paths));
}

function toTemplate(path: string): string {
  // replace concrete segments with their documented parameter shapes
  return path
    .split("?")[0]
    .replace(/^\/entity\/.+$/, "/entity/{iri_local}")
    .replace(/^\/compare\/runs$/, "/compare/runs")
    .replace(
      /^\/compare\/[^/]+\/[^/]+\/[^/]+\/.+$/,
      "/compare/{run_name}/{model_a}/{model_b}/{entity_iri}",
    );
}

describe("API contract", () => {
  it("every client endpoint exists in the OpenAPI description", () => {
    const documented = openapiPaths();
    const used = [
      endpoints.search("suzhou"),
      endpoints.entity("Suzhou_Metro"),
      endpoints.query(),
      endpoints.compareRuns(),
      endpoints.compareDiff("demo", "a", "b", "Suzhou"),
    ];
    for (const path of used) {
      expect(documented.has(toTemplate(path)), `${path} undocumented`).toBe(true);
    }
  });

  it("entity IRI encoding matches the backend scheme", () => {
    expect(encodeEntityIri("Vannevar Bush")).toBe("Vannevar_Bush");
    expect(encodeEntityIri("A_B C")).toBe("A%5FB_C");
    expect(encodeEntityIri("Suzhou")).toBe("Suzhou");
    expect(encodeEntityIri("Café")).toBe("Caf%C3%A9");
  });
});
