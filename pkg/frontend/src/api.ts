/**
 * Typed client for the catlas analysis service.
 *
 * The UI is a thin client: every number it shows comes from these
 * payloads, never from local computation. Each view keeps at most one
 * request in flight; issuing a new one aborts its predecessor.
 */

export interface SearchHit {
  id: string;
  score: number;
  rank: number;
}

export interface SearchPayload {
  hits: SearchHit[];
  meta: Record<string, unknown>;
}

export interface ScatterPoint {
  id: string;
  x: number;
  y: number;
  residual: number;
}

export interface ScatterPayload {
  points: ScatterPoint[];
  extremes: { above: string[]; below: string[] };
  meta: Record<string, unknown>;
}

export interface CellMember {
  id: string;
  score: number;
}

export interface CellProperties {
  row: number;
  col: number;
  count: number;
  aggregate: number | null;
  heat: number | null;
  members: CellMember[];
}

export interface MapFeature {
  type: "Feature";
  geometry: { type: "Polygon"; coordinates: number[][][] };
  properties: CellProperties;
}

export interface MapPayload {
  type: "FeatureCollection";
  bbox: [number, number, number, number];
  features: MapFeature[];
  meta: Record<string, unknown>;
}

export interface CorpusInfo {
  name: string;
  count: number;
  dimensionality: number;
  backend: string;
  geo_count: number;
}

export interface RecordDetail {
  id: string;
  uri: string;
  geo: [number, number] | null;
  metadata: Record<string, string>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    message: string,
  ) {
    super(message);
  }
}

/** Thrown-away requests (superseded by newer ones in the same view). */
export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

type Params = Record<string, string | number | undefined>;

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(private baseUrl: string = "") {}

  private async get<T>(view: string, path: string, params: Params): Promise<T> {
    this.inflight.get(view)?.abort();
    const controller = new AbortController();
    this.inflight.set(view, controller);

    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) query.set(key, String(value));
    }
    const qs = query.toString();
    const url = `${this.baseUrl}${path}${qs ? `?${qs}` : ""}`;
    const response = await fetch(url, { signal: controller.signal });
    if (this.inflight.get(view) === controller) this.inflight.delete(view);
    if (!response.ok) {
      let errorName = `HTTP ${response.status}`;
      let message = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") errorName = body.error;
        if (body && typeof body.message === "string") message = body.message;
      } catch {
        // non-JSON error body; keep the HTTP status text
      }
      throw new ApiError(response.status, errorName, message);
    }
    return (await response.json()) as T;
  }

  listCorpora(): Promise<{ corpora: CorpusInfo[] }> {
    return this.get("corpora", "/corpora", {});
  }

  search(corpus: string, q: string, k = 24): Promise<SearchPayload> {
    return this.get("search", `/corpora/${encodeURIComponent(corpus)}/search`, {
      q,
      k,
    });
  }

  scatter(
    corpus: string,
    x: string,
    y: string,
    norm: string = "none",
    sample?: number,
    seed?: number,
  ): Promise<ScatterPayload> {
    return this.get("scatter", `/corpora/${encodeURIComponent(corpus)}/scatter`, {
      x,
      y,
      norm,
      sample,
      seed,
    });
  }

  map(
    corpus: string,
    prompt: string,
    opts: { rows?: number; cols?: number; stat?: string; min_count?: number } = {},
  ): Promise<MapPayload> {
    return this.get("map", `/corpora/${encodeURIComponent(corpus)}/map`, {
      prompt,
      ...opts,
    });
  }

  contrast(
    corpus: string,
    a: string,
    b: string,
    opts: { rows?: number; cols?: number } = {},
  ): Promise<MapPayload> {
    return this.get("map", `/corpora/${encodeURIComponent(corpus)}/contrast`, {
      a,
      b,
      ...opts,
    });
  }

  record(corpus: string, id: string): Promise<RecordDetail> {
    return this.get(
      "record",
      `/corpora/${encodeURIComponent(corpus)}/records/${encodeImageId(id)}`,
      {},
    );
  }

  imageUrl(corpus: string, id: string): string {
    return `${this.baseUrl}/corpora/${encodeURIComponent(corpus)}/images/${encodeImageId(id)}`;
  }

  thumbUrl(corpus: string, id: string): string {
    return `${this.baseUrl}/corpora/${encodeURIComponent(corpus)}/thumbs/${encodeImageId(id)}`;
  }
}

/** Image ids are relative paths; keep their slashes, escape the rest. */
export function encodeImageId(id: string): string {
  return id.split("/").map(encodeURIComponent).join("/");
}
