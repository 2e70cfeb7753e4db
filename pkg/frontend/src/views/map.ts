/**
 * Map view: heat cells over a plain lat/lon canvas with a [0, 1] legend.
 *
 * Cells come in as GeoJSON polygons (lon-lat coordinate order); they are
 * drawn in an equirectangular frame. Clicking a cell lists its member
 * images with their service-computed scores. No tiles: the overlay is
 * self-contained so the client works offline against any service.
 */

import { ApiClient, MapFeature, MapPayload } from "../api";
import { buildLegend, heatColor } from "../colors";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 720;
const HEIGHT = 540;

export interface MapCallbacks {
  onSelectCell(row: number, col: number): void;
  onSelectImage(id: string): void;
}

export class MapView {
  readonly el: HTMLElement;
  private svg: SVGSVGElement;
  private legendHost: HTMLElement;
  private memberPanel: HTMLElement;
  private extremesPanel: HTMLElement;

  constructor(
    private client: ApiClient,
    private callbacks: MapCallbacks,
  ) {
    this.el = document.createElement("section");
    this.el.className = "map-view";
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.setAttribute("class", "map-svg");
    this.legendHost = document.createElement("div");
    this.legendHost.className = "legend-host";
    this.memberPanel = document.createElement("aside");
    this.memberPanel.className = "cell-members";
    this.extremesPanel = document.createElement("aside");
    this.extremesPanel.className = "map-extremes";
    this.el.append(this.svg, this.legendHost, this.extremesPanel, this.memberPanel);
  }

  render(corpus: string, payload: MapPayload): void {
    this.svg.replaceChildren();
    this.memberPanel.replaceChildren();
    const [lonMin, latMin, lonMax, latMax] = payload.bbox;
    const px = (lon: number) => ((lon - lonMin) / (lonMax - lonMin)) * WIDTH;
    const py = (lat: number) => HEIGHT - ((lat - latMin) / (latMax - latMin)) * HEIGHT;

    for (const feature of payload.features) {
      const ring = feature.geometry.coordinates[0];
      const [lon0, lat0] = ring[0];
      const [lon1, lat1] = ring[2];
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("class", "cell");
      rect.setAttribute("data-row", String(feature.properties.row));
      rect.setAttribute("data-col", String(feature.properties.col));
      rect.setAttribute("data-heat", String(feature.properties.heat));
      rect.setAttribute("x", String(Math.min(px(lon0), px(lon1))));
      rect.setAttribute("y", String(Math.min(py(lat0), py(lat1))));
      rect.setAttribute("width", String(Math.abs(px(lon1) - px(lon0))));
      rect.setAttribute("height", String(Math.abs(py(lat1) - py(lat0))));
      rect.setAttribute("fill", heatColor(feature.properties.heat));
      rect.setAttribute("stroke", "rgba(0,0,0,0.08)");
      rect.addEventListener("click", () => {
        this.showMembers(corpus, feature);
        this.callbacks.onSelectCell(
          feature.properties.row,
          feature.properties.col,
        );
      });
      this.svg.append(rect);
    }

    this.legendHost.replaceChildren(buildLegend());
    this.renderExtremes(corpus, payload);
  }

  private showMembers(corpus: string, feature: MapFeature): void {
    this.memberPanel.replaceChildren();
    const heading = document.createElement("h3");
    const { row, col, count } = feature.properties;
    heading.textContent = `cell (${row}, ${col}): ${count} images`;
    this.memberPanel.append(heading);
    const list = document.createElement("ul");
    for (const member of feature.properties.members) {
      const item = document.createElement("li");
      const img = document.createElement("img");
      img.src = this.client.thumbUrl(corpus, member.id);
      img.alt = member.id;
      const label = document.createElement("span");
      label.textContent = `${member.id} (${member.score.toFixed(4)})`;
      item.append(img, label);
      item.addEventListener("click", () => this.callbacks.onSelectImage(member.id));
      list.append(item);
    }
    this.memberPanel.append(list);
  }

  private renderExtremes(corpus: string, payload: MapPayload): void {
    this.extremesPanel.replaceChildren();
    const meta = payload.meta as {
      prompt?: string;
      extremes?: {
        top: { id: string; score: number }[];
        bottom: { id: string; score: number }[];
      };
    };
    if (!meta.extremes) return;
    const prompt = meta.prompt ?? "prompt";
    const fill = (title: string, entries: { id: string; score: number }[]) => {
      const heading = document.createElement("h3");
      heading.textContent = title;
      this.extremesPanel.append(heading);
      const list = document.createElement("ul");
      for (const entry of entries) {
        const item = document.createElement("li");
        const img = document.createElement("img");
        img.src = this.client.thumbUrl(corpus, entry.id);
        img.alt = entry.id;
        const label = document.createElement("span");
        label.textContent = `${entry.id} (${entry.score.toFixed(4)})`;
        item.append(img, label);
        item.addEventListener("click", () => this.callbacks.onSelectImage(entry.id));
        list.append(item);
      }
      this.extremesPanel.append(list);
    };
    fill(`most “${prompt}”`, meta.extremes.top);
    fill(`least “${prompt}”`, meta.extremes.bottom);
  }

  legendLabels(): { min: string | null; max: string | null } {
    return {
      min: this.legendHost.querySelector(".legend-min")?.textContent ?? null,
      max: this.legendHost.querySelector(".legend-max")?.textContent ?? null,
    };
  }

  cellFills(): Map<string, string> {
    const out = new Map<string, string>();
    for (const rect of Array.from(
      this.svg.querySelectorAll<SVGRectElement>("rect.cell"),
    )) {
      const key = `${rect.getAttribute("data-row")},${rect.getAttribute("data-col")}`;
      out.set(key, rect.getAttribute("fill") ?? "");
    }
    return out;
  }
}
