import { describe, expect, it } from "vitest";

import {
  checkInvariants,
  initialState,
  promptArity,
  select,
  setMode,
  setPrompt,
  swapPrompts,
} from "../src/state";

describe("view state", () => {
  it("search and map take one prompt, scatter two", () => {
    expect(promptArity("search")).toBe(1);
    expect(promptArity("map")).toBe(1);
    expect(promptArity("scatter")).toBe(2);
  });

  it("mode transitions keep prompt arity consistent", () => {
    let state = initialState();
    checkInvariants(state);
    state = setMode(state, "scatter");
    expect(state.prompts).toHaveLength(2);
    checkInvariants(state);
    state = setPrompt(state, 0, "naked");
    state = setPrompt(state, 1, "nude");
    state = setMode(state, "search");
    expect(state.prompts).toEqual(["naked"]);
    checkInvariants(state);
  });

  it("rejects out-of-arity prompt writes", () => {
    const state = initialState();
    expect(() => setPrompt(state, 1, "nude")).toThrow(/out of range/);
  });

  it("swap exchanges the two prompts", () => {
    let state = setMode(initialState(), "scatter");
    state = setPrompt(state, 0, "naked");
    state = setPrompt(state, 1, "nude");
    state = swapPrompts(state);
    expect(state.prompts).toEqual(["nude", "naked"]);
  });

  it("mode switches clear the selection", () => {
    let state = select(initialState(), { kind: "image", id: "a.png" });
    state = setMode(state, "map");
    expect(state.selection).toBeNull();
  });
});
