/**
 * App wiring: one ViewState, three views, a shared error banner.
 *
 * Prompt inputs are debounced 300 ms; every fetch goes through the
 * ApiClient which cancels the view's previous in-flight request, so a
 * burst of typing settles into exactly one current response.
 */

import { ApiClient, ApiError, isAbort } from "./api";
import { ErrorBanner } from "./banner";
import { debounce } from "./debounce";
import {
  Mode,
  ViewState,
  initialState,
  promptArity,
  select,
  setCorpus,
  setMode,
  setPrompt,
  swapPrompts,
} from "./state";
import { MapView } from "./views/map";
import { ScatterView } from "./views/scatter";
import { SearchView } from "./views/search";

const MODES: Mode[] = ["search", "scatter", "map"];

export class App {
  state: ViewState = initialState();
  readonly banner = new ErrorBanner();
  readonly searchView: SearchView;
  readonly scatterView: ScatterView;
  readonly mapView: MapView;

  private corpusSelect: HTMLSelectElement;
  private tabBar: HTMLElement;
  private promptBar: HTMLElement;
  private promptInputs: HTMLInputElement[] = [];
  private detail: HTMLElement;
  private viewHost: HTMLElement;
  private contrastToggle: HTMLInputElement;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
    private debounceMs = 300,
  ) {
    this.searchView = new SearchView(client, {
      onSelect: (id) => this.openDetail(id),
    });
    this.scatterView = new ScatterView(client, {
      onSelect: (id) => this.openDetail(id),
      onSwapAxes: () => this.swapAxes(),
    });
    this.mapView = new MapView(client, {
      onSelectCell: (row, col) => {
        this.state = select(this.state, { kind: "cell", row, col });
      },
      onSelectImage: (id) => this.openDetail(id),
    });

    this.corpusSelect = document.createElement("select");
    this.corpusSelect.className = "corpus-select";
    this.corpusSelect.addEventListener("change", () => {
      this.state = setCorpus(this.state, this.corpusSelect.value);
      this.refresh();
    });

    this.tabBar = document.createElement("nav");
    this.tabBar.className = "tab-bar";
    for (const mode of MODES) {
      const tab = document.createElement("button");
      tab.className = `tab tab-${mode}`;
      tab.textContent = mode;
      tab.addEventListener("click", () => this.switchMode(mode));
      this.tabBar.append(tab);
    }

    this.promptBar = document.createElement("div");
    this.promptBar.className = "prompt-bar";
    this.contrastToggle = document.createElement("input");
    this.contrastToggle.type = "checkbox";
    this.contrastToggle.className = "contrast-toggle";
    this.contrastToggle.addEventListener("change", () => this.switchMode("map"));

    this.detail = document.createElement("div");
    this.detail.className = "detail-overlay";
    this.detail.hidden = true;

    this.viewHost = document.createElement("main");
    this.viewHost.className = "view-host";

    this.root.append(
      this.banner.el,
      this.corpusSelect,
      this.tabBar,
      this.promptBar,
      this.viewHost,
      this.detail,
    );
    this.switchMode("search");
  }

  async start(): Promise<void> {
    try {
      const { corpora } = await this.client.listCorpora();
      this.corpusSelect.replaceChildren(
        ...corpora.map((c) => {
          const option = document.createElement("option");
          option.value = c.name;
          option.textContent = `${c.name} (${c.count} images)`;
          return option;
        }),
      );
      if (corpora.length > 0) {
        this.state = setCorpus(this.state, corpora[0].name);
      }
    } catch (err) {
      this.surface(err, () => void this.start());
    }
  }

  switchMode(mode: Mode): void {
    this.state = setMode(this.state, mode);
    this.rebuildPromptBar();
    this.viewHost.replaceChildren(this.currentView().el);
    this.refresh();
  }

  private currentView(): { el: HTMLElement } {
    switch (this.state.mode) {
      case "search":
        return this.searchView;
      case "scatter":
        return this.scatterView;
      case "map":
        return this.mapView;
    }
  }

  private rebuildPromptBar(): void {
    this.promptBar.replaceChildren();
    this.promptInputs = [];
    const arity =
      this.state.mode === "map" && this.contrastToggle.checked
        ? 2
        : promptArity(this.state.mode);
    const labels =
      this.state.mode === "scatter"
        ? ["x concept", "y concept"]
        : this.state.mode === "map" && arity === 2
          ? ["concept a", "concept b"]
          : ["concept"];
    for (let i = 0; i < arity; i++) {
      const input = document.createElement("input");
      input.type = "text";
      input.className = `prompt-input prompt-${i}`;
      input.placeholder = labels[i];
      input.value = this.state.prompts[i] ?? "";
      const trigger = debounce((text: string) => {
        if (this.state.mode === "map" && this.contrastToggle.checked) {
          // contrast prompts live outside the 1-prompt map ViewState
          this.refresh();
          return;
        }
        this.state = setPrompt(this.state, i, text);
        this.refresh();
      }, this.debounceMs);
      input.addEventListener("input", () => trigger(input.value));
      this.promptBar.append(input);
      this.promptInputs.push(input);
    }
    if (this.state.mode === "map") {
      const label = document.createElement("label");
      label.className = "contrast-label";
      label.append(this.contrastToggle, document.createTextNode(" contrast"));
      this.promptBar.append(label);
    }
  }

  /** Mirror the scatter plot locally; no request, no reload. */
  swapAxes(): void {
    this.state = swapPrompts(this.state);
    this.promptInputs[0].value = this.state.prompts[0] ?? "";
    this.promptInputs[1].value = this.state.prompts[1] ?? "";
    this.scatterView.swapLocally();
  }

  async refresh(): Promise<void> {
    const { corpus, mode } = this.state;
    if (corpus === null) return;
    this.banner.hide();
    try {
      if (mode === "search") {
        const prompt = this.promptValue(0);
        if (prompt === null) return;
        const payload = await this.client.search(corpus, prompt);
        this.searchView.render(corpus, payload);
      } else if (mode === "scatter") {
        const x = this.promptValue(0);
        const y = this.promptValue(1);
        if (x === null || y === null) return;
        const payload = await this.client.scatter(
          corpus, x, y, this.state.normalization,
        );
        this.scatterView.render(corpus, payload);
      } else {
        const prompt = this.promptValue(0);
        if (prompt === null) return;
        if (this.contrastToggle.checked) {
          const other = this.promptValue(1);
          if (other === null) return;
          const payload = await this.client.contrast(corpus, prompt, other);
          this.mapView.render(corpus, payload);
        } else {
          const payload = await this.client.map(corpus, prompt);
          this.mapView.render(corpus, payload);
        }
      }
    } catch (err) {
      this.surface(err, () => void this.refresh());
    }
  }

  /** Validated prompt text, or null (with a message) when not fetchable. */
  private promptValue(index: number): string | null {
    const raw = this.promptInputs[index]?.value ?? this.state.prompts[index] ?? "";
    const text = raw.trim();
    if (text === "") {
      this.banner.show(
        index === 0 ? "Type a concept to explore." : "Both concepts are needed.",
      );
      return null;
    }
    return text;
  }

  private async openDetail(id: string): Promise<void> {
    const corpus = this.state.corpus;
    if (corpus === null) return;
    this.state = select(this.state, { kind: "image", id });
    try {
      const record = await this.client.record(corpus, id);
      this.detail.replaceChildren();
      const img = document.createElement("img");
      img.className = "detail-image";
      img.src = this.client.imageUrl(corpus, id);
      img.alt = id;
      const metaList = document.createElement("dl");
      metaList.className = "detail-metadata";
      const entries: [string, string][] = [
        ["id", record.id],
        ...(record.geo
          ? ([["location", `${record.geo[0]}, ${record.geo[1]}`]] as [
              string,
              string,
            ][])
          : []),
        ...Object.entries(record.metadata),
      ];
      for (const [key, value] of entries) {
        const dt = document.createElement("dt");
        dt.textContent = key;
        const dd = document.createElement("dd");
        dd.textContent = value;
        metaList.append(dt, dd);
      }
      const close = document.createElement("button");
      close.className = "detail-close";
      close.textContent = "Close";
      close.addEventListener("click", () => {
        this.detail.hidden = true;
        this.state = select(this.state, null);
      });
      this.detail.append(close, img, metaList);
      this.detail.hidden = false;
    } catch (err) {
      this.surface(err, () => void this.openDetail(id));
    }
  }

  private surface(err: unknown, retry: () => void): void {
    if (isAbort(err)) return; // superseded request, nothing to report
    if (err instanceof ApiError) {
      this.banner.show(`${err.errorName}: ${this.explain(err)}`, retry);
    } else {
      this.banner.show(`Service unreachable: ${String(err)}`, retry);
    }
  }

  private explain(err: ApiError): string {
    if (err.errorName === "EmptyRegion") {
      return "no geo-tagged images fall inside the map area; check that " +
        "the corpus has coordinates and the bbox matches them";
    }
    if (err.errorName === "DegenerateScores") {
      return "the scores have no spread under this normalization; try " +
        "normalization 'none' or different prompts";
    }
    return err.message;
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
