/** Web-Mercator math shared with the backend grid (EPSG:3857, meters). */

export const EARTH_RADIUS_M = 6378137;

export interface LonLat {
  lon: number;
  lat: number;
}

export interface MercatorXY {
  x: number;
  y: number;
}

export function lonLatToMercator(p: LonLat): MercatorXY {
  const x = (p.lon * Math.PI / 180) * EARTH_RADIUS_M;
  const y = EARTH_RADIUS_M * Math.log(Math.tan(Math.PI / 4 + (p.lat * Math.PI / 180) / 2));
  return { x, y };
}

export function mercatorToLonLat(p: MercatorXY): LonLat {
  const lon = (p.x / EARTH_RADIUS_M) * 180 / Math.PI;
  const lat = (2 * Math.atan(Math.exp(p.y / EARTH_RADIUS_M)) - Math.PI / 2) * 180 / Math.PI;
  return { lon, lat };
}

/** Grid cell of a projected point: floor convention, boundary to the higher cell. */
export function cellIndexAt(p: MercatorXY, cellSizeM: number): { i: number; j: number } {
  return { i: Math.floor(p.x / cellSizeM), j: Math.floor(p.y / cellSizeM) };
}

export function cellCenter(i: number, j: number, cellSizeM: number): MercatorXY {
  return { x: (i + 0.5) * cellSizeM, y: (j + 0.5) * cellSizeM };
}
