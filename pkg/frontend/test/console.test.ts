import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { CANNED_QUERIES } from "../src/canned.js";
import { renderConsole, submitQuery } from "../src/views/console.js";
import { goldenBackend, until } from "./backend.js";

const GENDER = CANNED_QUERIES.find((c) => c.name === "Gender distribution")!;

describe("query console", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    container = document.getElementById("app")!;
    vi.stubGlobal("fetch", goldenBackend().fetch);
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("preloads the five canned queries", async () => {
    await renderConsole(container);
    const options = container.querySelectorAll("#canned-queries option");
    expect(options.length).toBe(1 + 5);
    const editor = container.querySelector("#query-editor") as HTMLTextAreaElement;
    expect(editor.value).toContain("instanceOf");
  });

  it("runs the canned gender query and renders two rows", async () => {
    await renderConsole(container, GENDER.text);
    await until(() => container.querySelector("#results") !== null);
    const rows = container.querySelectorAll("#results tbody tr");
    expect(rows.length).toBe(2);
    const first = Array.from(rows[0].querySelectorAll("td")).map((td) => td.textContent);
    expect(first).toEqual(["female", "3"]);
    expect(container.querySelector("#query-meta")!.textContent).toMatch(/^2 rows in \d+ ms$/);
  });

  it("shows syntax errors with their location", async () => {
    await renderConsole(container, "SELECT ?s WHERE {");
    await until(() => container.querySelector("#query-error") !== null);
    expect(container.querySelector("#query-error")!.textContent).toMatch(/line \d+, column \d+/);
  });

  it("shows the timeout notice with the configured window", async () => {
    await renderConsole(container, "timeout-probe");
    await until(() => container.querySelector("#query-timeout") !== null);
    expect(container.querySelector("#query-timeout")!.textContent).toContain("1s window");
  });

  it("discards stale responses when a newer query is running", async () => {
    const panel = document.createElement("div");
    let resolveSlow: (value: unknown) => void = () => undefined;
    const slow = new Promise((resolve) => {
      resolveSlow = resolve;
    });
    const backend = goldenBackend().fetch;
    vi.stubGlobal(
      "fetch",
      vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
        const text = String(init?.body ?? "");
        if (text === "slow-query") {
          await slow;
          return {
            ok: true,
            status: 200,
            json: async () => ({
              head: { vars: ["stale"] },
              results: { bindings: [{ stale: { type: "literal", value: "yes" } }] },
              elapsed_ms: 999,
            }),
          } as Response;
        }
        return backend(input, init);
      }),
    );
    const first = submitQuery(panel, "slow-query");
    const second = submitQuery(panel, GENDER.text);
    await second;
    resolveSlow(null);
    await first;
    expect(panel.querySelector("#results tbody tr")).toBeTruthy();
    expect(panel.textContent).not.toContain("stale");
    expect(panel.textContent).toContain("female");
  });
});
