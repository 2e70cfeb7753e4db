import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/main";
import { ApiClient } from "../src/api";
import {
  corporaPayload,
  recordPayload,
  searchPayload,
  stubFetch,
  StubController,
} from "./stub";

let root: HTMLElement;
let stub: StubController;

function makeApp(routes: Parameters<typeof stubFetch>[0]): App {
  stub = stubFetch({
    "/corpora/moma/records/": (url) => ({
      status: 200,
      body: recordPayload(decodeURIComponent(url.pathname.split("/records/")[1])),
    }),
    ...routes,
    "/corpora": () => ({ status: 200, body: corporaPayload() }),
  });
  root = document.createElement("div");
  document.body.replaceChildren(root);
  return new App(root, new ApiClient(), 0);
}

async function settle() {
  for (let i = 0; i < 8; i++) await Promise.resolve();
  await new Promise((resolve) => setTimeout(resolve, 0));
}

afterEach(() => stub?.restore());
beforeEach(() => vi.useRealTimers());

describe("search view", () => {
  it("renders the thumbnail grid in rank order", async () => {
    const app = makeApp({
      "/corpora/moma/search": () => ({ status: 200, body: searchPayload(12) }),
    });
    await app.start();
    await settle();

    const input = root.querySelector<HTMLInputElement>(".prompt-input")!;
    input.value = "rhythm";
    input.dispatchEvent(new Event("input"));
    await settle();

    const ids = app.searchView.renderedIds();
    expect(ids).toHaveLength(12);
    expect(ids).toEqual(
      Array.from({ length: 12 }, (_, i) => `img-${String(i).padStart(4, "0")}.png`),
    );
    const captions = Array.from(
      root.querySelectorAll(".thumb-item figcaption"),
    ).map((el) => el.textContent ?? "");
    expect(captions[0]).toMatch(/^#1 /);
    expect(captions[11]).toMatch(/^#12 /);
  });

  it("thumbnails point at the service thumb endpoint", async () => {
    const app = makeApp({
      "/corpora/moma/search": () => ({ status: 200, body: searchPayload(2) }),
    });
    await app.start();
    await settle();
    const input = root.querySelector<HTMLInputElement>(".prompt-input")!;
    input.value = "red";
    input.dispatchEvent(new Event("input"));
    await settle();

    const img = root.querySelector<HTMLImageElement>(".thumb-item img")!;
    expect(img.getAttribute("src")).toBe("/corpora/moma/thumbs/img-0000.png");
  });

  it("clicking a result opens the full image with metadata", async () => {
    const app = makeApp({
      "/corpora/moma/search": () => ({ status: 200, body: searchPayload(3) }),
    });
    await app.start();
    await settle();
    const input = root.querySelector<HTMLInputElement>(".prompt-input")!;
    input.value = "red";
    input.dispatchEvent(new Event("input"));
    await settle();

    root.querySelector<HTMLElement>(".thumb-item")!.click();
    await settle();

    const overlay = root.querySelector<HTMLElement>(".detail-overlay")!;
    expect(overlay.hidden).toBe(false);
    expect(
      overlay.querySelector<HTMLImageElement>(".detail-image")!.getAttribute("src"),
    ).toBe("/corpora/moma/images/img-0000.png");
    expect(overlay.textContent).toContain("Title of img-0000.png");
    expect(app.state.selection).toEqual({ kind: "image", id: "img-0000.png" });
  });

  it("empty prompt: validation message, no request", async () => {
    const app = makeApp({
      "/corpora/moma/search": () => ({ status: 200, body: searchPayload(1) }),
    });
    await app.start();
    await settle();
    const before = stub.calls.filter((c) => c.includes("/search")).length;

    const input = root.querySelector<HTMLInputElement>(".prompt-input")!;
    input.value = "   ";
    input.dispatchEvent(new Event("input"));
    await settle();

    expect(stub.calls.filter((c) => c.includes("/search")).length).toBe(before);
    expect(app.banner.visibleMessage).toMatch(/concept/i);
  });

  it("service failure raises a visible banner whose retry refetches", async () => {
    let failures = 1;
    const app = makeApp({
      "/corpora/moma/search": () => {
        if (failures > 0) {
          failures -= 1;
          return {
            status: 500,
            body: { error: "BackendError", message: "encoder exploded" },
          };
        }
        return { status: 200, body: searchPayload(2) };
      },
    });
    await app.start();
    await settle();
    const input = root.querySelector<HTMLInputElement>(".prompt-input")!;
    input.value = "red";
    input.dispatchEvent(new Event("input"));
    await settle();

    expect(app.banner.visibleMessage).toContain("BackendError");
    root.querySelector<HTMLButtonElement>(".error-retry")!.click();
    await settle();
    expect(app.banner.visibleMessage).toBeNull();
    expect(app.searchView.renderedIds()).toHaveLength(2);
  });

  it("service down (network reject) is surfaced, never silent", async () => {
    stub = stubFetch({});
    vi.stubGlobal(
      "fetch",
      vi.fn(() => Promise.reject(new TypeError("connection refused"))),
    );
    root = document.createElement("div");
    document.body.replaceChildren(root);
    const app = new App(root, new ApiClient(), 0);
    await app.start();
    await settle();
    expect(app.banner.visibleMessage).toMatch(/unreachable|connection/i);
  });
});
