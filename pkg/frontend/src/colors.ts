/** Heat color ramp and the [0, 1] legend. Presentation only. */

/** Map heat in [0, 1] to a cold-to-hot CSS color; null means no data. */
export function heatColor(heat: number | null): string {
  if (heat === null) return "rgb(225,225,225)";
  const t = Math.max(0, Math.min(1, heat));
  // dark blue -> yellow -> red
  const r = Math.round(t < 0.5 ? 40 + 430 * t : 255);
  const g = Math.round(t < 0.5 ? 60 + 380 * t : 250 - 380 * (t - 0.5));
  const b = Math.round(t < 0.5 ? 160 - 220 * t : 50 - 80 * (t - 0.5));
  return `rgb(${clamp8(r)},${clamp8(g)},${clamp8(b)})`;
}

function clamp8(v: number): number {
  return Math.max(0, Math.min(255, v));
}

/** Gradient bar labeled 0 to 1: the service normalizes heat to that range. */
export function buildLegend(): HTMLElement {
  const legend = document.createElement("div");
  legend.className = "map-legend";

  const low = document.createElement("span");
  low.className = "legend-min";
  low.textContent = "0";

  const bar = document.createElement("div");
  bar.className = "legend-bar";
  const stops: string[] = [];
  for (let i = 0; i <= 10; i++) {
    stops.push(heatColor(i / 10));
  }
  bar.style.background = `linear-gradient(to right, ${stops.join(",")})`;

  const high = document.createElement("span");
  high.className = "legend-max";
  high.textContent = "1";

  legend.append(low, bar, high);
  return legend;
}
