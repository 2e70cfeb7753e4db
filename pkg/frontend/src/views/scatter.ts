/**
 * Scatter view: the corpus on two concept axes with the y = x diagonal.
 *
 * Both axes share one scale domain, so swapping the axes mirrors every
 * point across the rendered diagonal exactly. Point positions are
 * presentation scaling of service-provided numbers; no scoring happens
 * here. Axis swap replots the payload it already has, x and y exchanged,
 * without a refetch or reload.
 */

import { ApiClient, ScatterPayload, ScatterPoint } from "../api";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 640;
const MARGIN = 40;

export interface ScatterCallbacks {
  onSelect(id: string): void;
  onSwapAxes(): void;
}

interface Domain {
  lo: number;
  hi: number;
}

export class ScatterView {
  readonly el: HTMLElement;
  private svg: SVGSVGElement;
  private abovePanel: HTMLElement;
  private belowPanel: HTMLElement;
  private hoverCard: HTMLElement;
  private lastPayload: ScatterPayload | null = null;
  private lastCorpus: string | null = null;
  private swapped = false;

  constructor(
    private client: ApiClient,
    private callbacks: ScatterCallbacks,
  ) {
    this.el = document.createElement("section");
    this.el.className = "scatter-view";

    const controls = document.createElement("div");
    controls.className = "scatter-controls";
    const swapBtn = document.createElement("button");
    swapBtn.className = "swap-axes";
    swapBtn.textContent = "Swap axes";
    swapBtn.addEventListener("click", () => this.callbacks.onSwapAxes());
    controls.append(swapBtn);

    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${SIZE} ${SIZE}`);
    this.svg.setAttribute("class", "scatter-svg");

    this.abovePanel = document.createElement("aside");
    this.abovePanel.className = "extremes-above";
    this.belowPanel = document.createElement("aside");
    this.belowPanel.className = "extremes-below";

    this.hoverCard = document.createElement("div");
    this.hoverCard.className = "hover-card";
    this.hoverCard.hidden = true;

    this.el.append(controls, this.svg, this.abovePanel, this.belowPanel, this.hoverCard);
  }

  /** Replot the kept payload with axes exchanged; no network, no reload. */
  swapLocally(): void {
    if (this.lastPayload === null || this.lastCorpus === null) return;
    this.swapped = !this.swapped;
    this.plot();
  }

  render(corpus: string, payload: ScatterPayload): void {
    this.lastPayload = payload;
    this.lastCorpus = corpus;
    this.swapped = false;
    this.plot();
  }

  private displayed(): { points: ScatterPoint[]; above: string[]; below: string[] } {
    const payload = this.lastPayload!;
    if (!this.swapped) {
      return {
        points: payload.points,
        above: payload.extremes.above,
        below: payload.extremes.below,
      };
    }
    return {
      points: payload.points.map((p) => ({
        id: p.id,
        x: p.y,
        y: p.x,
        residual: -p.residual,
      })),
      above: payload.extremes.below,
      below: payload.extremes.above,
    };
  }

  private domain(points: ScatterPoint[]): Domain {
    let lo = Infinity;
    let hi = -Infinity;
    for (const p of points) {
      lo = Math.min(lo, p.x, p.y);
      hi = Math.max(hi, p.x, p.y);
    }
    if (!isFinite(lo) || !isFinite(hi)) return { lo: 0, hi: 1 };
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const pad = (hi - lo) * 0.05;
    return { lo: lo - pad, hi: hi + pad };
  }

  private plot(): void {
    const corpus = this.lastCorpus!;
    const { points, above, below } = this.displayed();
    const dom = this.domain(points);
    const scale = (v: number) =>
      MARGIN + ((v - dom.lo) / (dom.hi - dom.lo)) * (SIZE - 2 * MARGIN);
    const px = (v: number) => scale(v);
    const py = (v: number) => SIZE - scale(v);

    this.svg.replaceChildren();

    const diagonal = document.createElementNS(SVG_NS, "line");
    diagonal.setAttribute("class", "diagonal");
    diagonal.setAttribute("x1", String(px(dom.lo)));
    diagonal.setAttribute("y1", String(py(dom.lo)));
    diagonal.setAttribute("x2", String(px(dom.hi)));
    diagonal.setAttribute("y2", String(py(dom.hi)));
    diagonal.setAttribute("stroke", "#999");
    diagonal.setAttribute("stroke-dasharray", "4 4");
    this.svg.append(diagonal);

    for (const point of points) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("class", "point");
      dot.setAttribute("data-id", point.id);
      dot.setAttribute("cx", String(px(point.x)));
      dot.setAttribute("cy", String(py(point.y)));
      dot.setAttribute("r", "3");
      dot.setAttribute(
        "fill",
        point.residual > 0 ? "#4466cc" : point.residual < 0 ? "#cc6644" : "#888888",
      );
      dot.addEventListener("mouseenter", () => this.showHover(corpus, point));
      dot.addEventListener("mouseleave", () => {
        this.hoverCard.hidden = true;
      });
      dot.addEventListener("click", () => this.callbacks.onSelect(point.id));
      this.svg.append(dot);
    }

    this.renderExtremes(corpus, above, below);
  }

  private showHover(corpus: string, point: ScatterPoint): void {
    this.hoverCard.replaceChildren();
    const img = document.createElement("img");
    img.src = this.client.thumbUrl(corpus, point.id);
    img.alt = point.id;
    const label = document.createElement("div");
    label.textContent =
      `${point.id}  x=${point.x.toFixed(4)} y=${point.y.toFixed(4)} ` +
      `residual=${point.residual.toFixed(4)}`;
    this.hoverCard.append(img, label);
    this.hoverCard.hidden = false;
  }

  private renderExtremes(corpus: string, above: string[], below: string[]): void {
    const fill = (panel: HTMLElement, title: string, ids: string[]) => {
      panel.replaceChildren();
      const heading = document.createElement("h3");
      heading.textContent = title;
      panel.append(heading);
      const list = document.createElement("ul");
      for (const id of ids) {
        const item = document.createElement("li");
        const img = document.createElement("img");
        img.src = this.client.thumbUrl(corpus, id);
        img.alt = id;
        const span = document.createElement("span");
        span.textContent = id;
        item.append(img, span);
        item.addEventListener("click", () => this.callbacks.onSelect(id));
        list.append(item);
      }
      panel.append(list);
    };
    const meta = this.lastPayload!.meta as { x_prompt?: string; y_prompt?: string };
    const xName = this.swapped ? meta.y_prompt : meta.x_prompt;
    const yName = this.swapped ? meta.x_prompt : meta.y_prompt;
    fill(this.abovePanel, `most “${yName ?? "y"}”`, above);
    fill(this.belowPanel, `most “${xName ?? "x"}”`, below);
  }

  /** (cx, cy) pairs keyed by point id, for tests and selection sync. */
  pointPositions(): Map<string, { cx: number; cy: number }> {
    const out = new Map<string, { cx: number; cy: number }>();
    for (const dot of Array.from(
      this.svg.querySelectorAll<SVGCircleElement>("circle.point"),
    )) {
      out.set(dot.getAttribute("data-id") ?? "", {
        cx: Number(dot.getAttribute("cx")),
        cy: Number(dot.getAttribute("cy")),
      });
    }
    return out;
  }
}
