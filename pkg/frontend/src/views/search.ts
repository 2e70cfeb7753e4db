/**
 * Search view: rank-ordered thumbnail grid for one prompt.
 *
 * Rendering is a pure function of the last payload: the grid is rebuilt
 * from scratch on every render, so re-rendering the same payload yields
 * the same DOM.
 */

import { ApiClient, SearchPayload } from "../api";

export interface SearchCallbacks {
  onSelect(id: string): void;
}

export class SearchView {
  readonly el: HTMLElement;
  private grid: HTMLElement;

  constructor(
    private client: ApiClient,
    private callbacks: SearchCallbacks,
  ) {
    this.el = document.createElement("section");
    this.el.className = "search-view";
    this.grid = document.createElement("div");
    this.grid.className = "thumb-grid";
    this.el.append(this.grid);
  }

  clear(): void {
    this.grid.replaceChildren();
  }

  render(corpus: string, payload: SearchPayload): void {
    this.grid.replaceChildren();
    for (const hit of payload.hits) {
      const item = document.createElement("figure");
      item.className = "thumb-item";
      item.dataset.id = hit.id;
      item.dataset.rank = String(hit.rank);

      const img = document.createElement("img");
      img.src = this.client.thumbUrl(corpus, hit.id);
      img.alt = hit.id;
      img.loading = "lazy";

      const caption = document.createElement("figcaption");
      caption.textContent = `#${hit.rank} ${hit.id} (${hit.score.toFixed(4)})`;

      item.append(img, caption);
      item.addEventListener("click", () => this.callbacks.onSelect(hit.id));
      this.grid.append(item);
    }
  }

  /** Rendered ids in DOM order (rank order by construction). */
  renderedIds(): string[] {
    return Array.from(this.grid.querySelectorAll<HTMLElement>(".thumb-item")).map(
      (el) => el.dataset.id ?? "",
    );
  }
}
