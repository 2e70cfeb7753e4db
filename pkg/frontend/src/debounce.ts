/** Trailing-edge debounce; 300 ms default keeps typing from spamming the service. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs = 300,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}
