/**
 * Typed client for the inspath session API. Pure fetch wrapper: no state,
 * no DOM, so it runs unchanged in the browser and under vitest.
 */

export interface ClusterSummary {
  id: number;
  count: number;
  centroid: [number, number, number];
  aabb: { min: [number, number, number]; max: [number, number, number] };
}

export interface ClustersPayload {
  summaries: ClusterSummary[];
  points: [number, number, number][];
  labels: number[];
  colors: [number, number, number][] | null;
  total_points: number;
  thinned: boolean;
}

export interface SessionDoc {
  id: string;
  state: "rendering" | "awaiting_selection" | "planned" | "error";
  selected_ids: number[] | null;
  slice: SliceSpec | null;
  plan_versions: string[];
  counts: Record<string, number>;
}

export interface SliceSpec {
  mode: "auto" | "direction" | "segment";
  direction?: [number, number, number] | null;
  segment?: { min: [number, number, number]; max: [number, number, number] } | null;
  band_width?: number | null;
  row_count?: number;
  min_step?: number | null;
}

export interface PlanTarget {
  row: number;
  seq: number;
  position: [number, number, number];
  quaternion: [number, number, number, number]; // w, x, y, z
}

export interface Plan {
  targets: PlanTarget[];
  dropped: Record<string, number[]>;
  params: Record<string, unknown>;
}

export interface SelectionResponse {
  plan: string;
  version: number;
  state: string;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionApi {
  constructor(
    private baseUrl: string,
    private sessionId: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(suffix = ""): string {
    return `${this.baseUrl}/api/session/${this.sessionId}${suffix}`;
  }

  private async request<T>(suffix: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.url(suffix), init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getSession(): Promise<SessionDoc> {
    return this.request<SessionDoc>("");
  }

  getClusters(): Promise<ClustersPayload> {
    return this.request<ClustersPayload>("/clusters");
  }

  postSelection(ids: number[], slice?: SliceSpec | null): Promise<SelectionResponse> {
    return this.request<SelectionResponse>("/selection", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ids, slice: slice ?? null }),
    });
  }

  getPlan(version?: number): Promise<Plan> {
    const query = version === undefined ? "" : `?version=${version}`;
    return this.request<Plan>(`/plan${query}`);
  }

  /** Raw plan bytes, for byte-level comparison with the on-disk file. */
  async getPlanText(): Promise<string> {
    const response = await this.fetchImpl(this.url("/plan"));
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }
}
