/** View state: viewport, the factor-2 cell-size ladder, slider override,
 * and the color-linked cell selection (at most 4 cells).
 *
 * State transitions are pure functions returning new state objects, so
 * every interaction rule is unit-testable without a DOM.
 */

import type { CellIndex, Meta } from "./api.js";
import {
  lonLatToMercator,
  mercatorToLonLat,
  type LonLat,
  type MercatorXY,
} from "./mercator.js";

/** Highlight colors: deliberately far from the glyph's red/blue outcome hues. */
export const HIGHLIGHT_PALETTE = ["#2ca02c", "#ff7f0e", "#9467bd", "#17becf"] as const;

export const MAX_SELECTED = 4;

export interface SelectedCell extends CellIndex {
  color: string;
}

export interface ViewState {
  center: LonLat;
  /** Integer semantic-zoom level; +1 halves the grid cell size. */
  zoom: number;
  /** Slider override of the ladder-derived cell size, null = follow zoom. */
  sliderCellSizeM: number | null;
  selected: SelectedCell[];
  hover: CellIndex | null;
}

export function initialView(meta: Meta): ViewState {
  const [lonMin, latMin, lonMax, latMax] = meta.region_bbox;
  return {
    center: { lon: (lonMin + lonMax) / 2, lat: (latMin + latMax) / 2 },
    zoom: 0,
    sliderCellSizeM: null,
    selected: [],
    hover: null,
  };
}

/** Ladder rule: zoom 0 is the coarsest cell, each step halves the size. */
export function cellSizeForZoom(zoom: number, meta: Meta): number {
  const size = meta.cell_size_max_m / 2 ** zoom;
  return Math.min(Math.max(size, meta.cell_size_min_m), meta.cell_size_max_m);
}

export function activeCellSize(view: ViewState, meta: Meta): number {
  return view.sliderCellSizeM ?? cellSizeForZoom(view.zoom, meta);
}

/** Screen resolution (meters per pixel) for the tile-less map pane. */
export function resolutionForZoom(zoom: number): number {
  return 400 / 2 ** zoom;
}

export function zoomBy(view: ViewState, delta: number): ViewState {
  const zoom = Math.min(Math.max(view.zoom + delta, 0), 9);
  if (zoom === view.zoom) return view;
  // cell identity changes with the ladder step, so selections cannot carry over
  return { ...view, zoom, selected: [], hover: null };
}

export interface SelectionResult {
  view: ViewState;
  /** true when the click was ignored because 4 cells are already selected */
  rejected: boolean;
}

/** Toggle a cell in the selection, assigning the lowest free palette color. */
export function selectCell(view: ViewState, cell: CellIndex): SelectionResult {
  const existing = view.selected.findIndex((s) => s.i === cell.i && s.j === cell.j);
  if (existing >= 0) {
    const selected = view.selected.filter((_, k) => k !== existing);
    return { view: { ...view, selected }, rejected: false };
  }
  if (view.selected.length >= MAX_SELECTED) {
    return { view, rejected: true };
  }
  const used = new Set(view.selected.map((s) => s.color));
  const color = HIGHLIGHT_PALETTE.find((c) => !used.has(c))!;
  return {
    view: { ...view, selected: [...view.selected, { ...cell, color }] },
    rejected: false,
  };
}

export function clearSelection(view: ViewState): ViewState {
  return view.selected.length === 0 ? view : { ...view, selected: [] };
}

export interface SliderResult {
  view: ViewState;
  /** false when the value equals the current size: no new request needed */
  refetch: boolean;
}

/** Slider override: clamped to the configured range; a changed size clears
 * the selection because cell identity depends on the size. */
export function sliderResize(view: ViewState, cellSizeM: number, meta: Meta): SliderResult {
  const clamped = Math.min(Math.max(cellSizeM, meta.cell_size_min_m), meta.cell_size_max_m);
  if (clamped === activeCellSize(view, meta)) {
    return { view, refetch: false };
  }
  return {
    view: { ...view, sliderCellSizeM: clamped, selected: [], hover: null },
    refetch: true,
  };
}

export interface Viewport {
  widthPx: number;
  heightPx: number;
}

/** Lon/lat bounding box currently visible in the pane. */
export function viewportBbox(view: ViewState, vp: Viewport): [number, number, number, number] {
  const res = resolutionForZoom(view.zoom);
  const c = lonLatToMercator(view.center);
  const half = { x: (vp.widthPx / 2) * res, y: (vp.heightPx / 2) * res };
  const lonLatMin = mercInverse({ x: c.x - half.x, y: c.y - half.y });
  const lonLatMax = mercInverse({ x: c.x + half.x, y: c.y + half.y });
  return [lonLatMin.lon, lonLatMin.lat, lonLatMax.lon, lonLatMax.lat];
}

function mercInverse(p: MercatorXY): LonLat {
  const lon = (p.x / 6378137) * 180 / Math.PI;
  const lat = (2 * Math.atan(Math.exp(p.y / 6378137)) - Math.PI / 2) * 180 / Math.PI;
  return { lon, lat };
}

/** Screen position of a projected point for the current viewport. */
export function toScreen(p: MercatorXY, view: ViewState, vp: Viewport): { x: number; y: number } {
  const res = resolutionForZoom(view.zoom);
  const c = lonLatToMercator(view.center);
  return {
    x: vp.widthPx / 2 + (p.x - c.x) / res,
    y: vp.heightPx / 2 - (p.y - c.y) / res,
  };
}
