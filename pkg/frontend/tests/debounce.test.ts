import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce";

beforeEach(() => vi.useFakeTimers());
afterEach(() => vi.useRealTimers());

describe("debounce", () => {
  it("fires once, 300 ms after the last call by default", () => {
    const calls: string[] = [];
    const fn = debounce((text: string) => calls.push(text));
    fn("p");
    vi.advanceTimersByTime(100);
    fn("pa");
    vi.advanceTimersByTime(100);
    fn("paris");
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(299);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual(["paris"]);
  });

  it("separate quiet periods fire separately", () => {
    const calls: number[] = [];
    const fn = debounce((n: number) => calls.push(n), 50);
    fn(1);
    vi.advanceTimersByTime(60);
    fn(2);
    vi.advanceTimersByTime(60);
    expect(calls).toEqual([1, 2]);
  });
});
