/** Typed client for the pestcast HTTP API. Read-only: every call is a GET. */

export interface MonthStats {
  month: number;
  endangered: number;
  safe: number;
  mean_certainty_endangered: number | null;
  mean_certainty_safe: number | null;
  stddev_certainty: number;
}

export interface CellSummary {
  i: number;
  j: number;
  vineyard_count: number;
  member_area_ids: string[];
  months: MonthStats[];
}

export interface GridResponse {
  cell_size_m: number;
  cells: CellSummary[];
}

export interface CellDetail extends CellSummary {
  cell_size_m: number;
}

export interface CompareProfile {
  i: number;
  j: number;
  vineyard_count: number;
  height_m: number;
  landuse: number[];
}

export interface CompareResponse {
  cell_size_m: number;
  categories: string[];
  display_names: string[];
  cells: CompareProfile[];
}

export interface Meta {
  model_fingerprint: string;
  catalog_fingerprint: string;
  n_areas: number;
  skipped_areas: number;
  cell_size_min_m: number;
  cell_size_max_m: number;
  default_cell_size_m: number;
  glyph_radius_min_px: number;
  glyph_radius_max_px: number;
  region_bbox: [number, number, number, number];
}

export type CellIndex = { i: number; j: number };

export type FetchLike = (url: string) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly url: string, detail: string) {
    super(`${status} ${url}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const url = this.baseUrl + path;
    const response = await this.fetchFn(url);
    if (!response.ok) {
      throw new ApiError(response.status, url, await response.text());
    }
    return (await response.json()) as T;
  }

  getMeta(): Promise<Meta> {
    return this.getJson<Meta>("/api/meta");
  }

  getGrid(cellSizeM: number, bbox: [number, number, number, number]): Promise<GridResponse> {
    return this.getJson<GridResponse>(
      `/api/grid?cell_size_m=${cellSizeM}&bbox=${bbox.join(",")}`,
    );
  }

  getCell(i: number, j: number, cellSizeM: number): Promise<CellDetail> {
    return this.getJson<CellDetail>(`/api/cell/${i}/${j}?cell_size_m=${cellSizeM}`);
  }

  getCompare(cells: CellIndex[], cellSizeM: number): Promise<CompareResponse> {
    const spec = cells.map((c) => `${c.i},${c.j}`).join(";");
    return this.getJson<CompareResponse>(
      `/api/compare?cells=${spec}&cell_size_m=${cellSizeM}`,
    );
  }

  /** Server-rendered glyph, used verbatim: the client never redraws glyphs. */
  async getGlyphSvg(i: number, j: number, cellSizeM: number, radiusPx: number): Promise<string> {
    const url =
      `${this.baseUrl}/api/glyph/${i}/${j}.svg?cell_size_m=${cellSizeM}&radius_px=${radiusPx}`;
    const response = await this.fetchFn(url);
    if (!response.ok) {
      throw new ApiError(response.status, url, await response.text());
    }
    return response.text();
  }
}
