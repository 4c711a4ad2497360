"""Parsers and writers for the four input data families.

Formats are deliberately plain: observations as CSV, land use and areas as
GeoJSON FeatureCollections, elevation as an ESRI-style ASCII grid. Every
parser validates type invariants up front and every format round-trips
through its paired writer.
"""

import csv
import datetime
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .geo import vertex_mean_centroid

OBSERVATION_HEADER = ["station_id", "lon", "lat", "date", "trap_count", "berry_pct", "egg_pct"]

REQUIRED_CATEGORY_COUNT = 83


class ParseError(Exception):
    """Input file violates its documented format or a type invariant.

    ``rejections`` holds (line_number, column, value, reason) tuples for
    row-level failures; format-level failures leave it empty.
    """

    def __init__(self, message, rejections=None):
        super().__init__(message)
        self.rejections = rejections or []


@dataclass(frozen=True)
class StationObservation:
    """One dated measurement at a station."""

    station_id: str
    lon: float
    lat: float
    date: datetime.date
    trap_count: float
    berry_infestation: float
    egg_rate: float


@dataclass(frozen=True)
class LandUsePolygon:
    ring: tuple
    category: str


@dataclass
class LandUseMap:
    polygons: list
    categories: list
    # lazily built spatial index, see features.landuse_fractions
    _index: object = field(default=None, repr=False, compare=False)


@dataclass
class ElevationGrid:
    """Regular lon/lat raster. ``values`` is (nrows, ncols), north row first."""

    xllcorner: float
    yllcorner: float
    cell_size_deg: float
    ncols: int
    nrows: int
    values: np.ndarray
    nodata: float = -9999.0

    def __eq__(self, other):
        if not isinstance(other, ElevationGrid):
            return NotImplemented
        return (
            self.xllcorner == other.xllcorner
            and self.yllcorner == other.yllcorner
            and self.cell_size_deg == other.cell_size_deg
            and self.ncols == other.ncols
            and self.nrows == other.nrows
            and self.nodata == other.nodata
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class AreaPolygon:
    area_id: str
    ring: tuple
    centroid: tuple

    @classmethod
    def from_ring(cls, area_id, ring):
        return cls(area_id=area_id, ring=tuple(tuple(v) for v in ring),
                   centroid=vertex_mean_centroid(ring))


def _check_ring(ring, context):
    if len(ring) < 4:
        raise ParseError(f"{context}: ring has {len(ring)} vertices, need at least 4")
    if tuple(ring[0]) != tuple(ring[-1]):
        raise ParseError(f"{context}: ring is not closed (first vertex != last vertex)")


# ---------------------------------------------------------------------------
# observations CSV


def parse_observations(path, bbox=None):
    """Parse the observations CSV into StationObservation records.

    ``bbox`` is an optional (lon_min, lat_min, lon_max, lat_max) region;
    when given, locations outside it are rejected. All invalid rows are
    collected and reported together in one ParseError.
    """
    if not os.path.exists(path):
        raise ParseError(f"observations file not found: {path}")
    records = []
    rejections = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header "
                             + ",".join(OBSERVATION_HEADER)) from None
        if header != OBSERVATION_HEADER:
            raise ParseError(f"{path}: malformed header {header!r}, expected "
                             + ",".join(OBSERVATION_HEADER))
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(OBSERVATION_HEADER):
                rejections.append((line_no, "<row>", ",".join(row),
                                   f"expected {len(OBSERVATION_HEADER)} fields, got {len(row)}"))
                continue
            rec = _parse_observation_row(row, line_no, bbox, rejections)
            if rec is not None:
                records.append(rec)
    if rejections:
        lines = "; ".join(f"line {r[0]}, column {r[1]}, value {r[2]!r}: {r[3]}"
                          for r in rejections[:20])
        more = "" if len(rejections) <= 20 else f" (+{len(rejections) - 20} more)"
        raise ParseError(f"{path}: {len(rejections)} invalid row(s): {lines}{more}",
                         rejections=rejections)
    return records


def _parse_observation_row(row, line_no, bbox, rejections):
    station_id, lon_s, lat_s, date_s, trap_s, berry_s, egg_s = row
    bad = False

    def reject(column, value, reason):
        nonlocal bad
        rejections.append((line_no, column, value, reason))
        bad = True

    def _float(column, value):
        try:
            return float(value)
        except ValueError:
            reject(column, value, "not a number")
            return None

    lon = _float("lon", lon_s)
    lat = _float("lat", lat_s)
    try:
        date = datetime.date.fromisoformat(date_s)
    except ValueError:
        reject("date", date_s, "not an ISO date (YYYY-MM-DD)")
        date = None
    trap = _float("trap_count", trap_s)
    berry = _float("berry_pct", berry_s)
    egg = _float("egg_pct", egg_s)

    if trap is not None and trap < 0:
        reject("trap_count", trap_s, "must be >= 0")
    if berry is not None and not (0.0 <= berry <= 100.0):
        reject("berry_pct", berry_s, "must be in [0, 100]")
    if egg is not None and egg < 0:
        reject("egg_pct", egg_s, "must be >= 0")
    if bbox is not None and lon is not None and lat is not None:
        lon_min, lat_min, lon_max, lat_max = bbox
        if not (lon_min <= lon <= lon_max and lat_min <= lat <= lat_max):
            reject("lon", f"{lon_s},{lat_s}", "location outside region bounding box")
    if bad:
        return None
    return StationObservation(station_id=station_id, lon=lon, lat=lat, date=date,
                              trap_count=trap, berry_infestation=berry, egg_rate=egg)


def _num(x):
    """Format a float compactly but losslessly (round-trips through float())."""
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_observations(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OBSERVATION_HEADER)
        for r in records:
            writer.writerow([r.station_id, _num(r.lon), _num(r.lat), r.date.isoformat(),
                             _num(r.trap_count), _num(r.berry_infestation), _num(r.egg_rate)])


# ---------------------------------------------------------------------------
# category manifest and land-use GeoJSON


def load_manifest(path):
    """Load the land-use category manifest: one code per line, exactly 83 codes."""
    with open(path, encoding="utf-8") as fh:
        codes = [line.strip() for line in fh if line.strip()]
    if len(codes) != REQUIRED_CATEGORY_COUNT:
        raise ParseError(f"{path}: category manifest has {len(codes)} codes, "
                         f"exactly {REQUIRED_CATEGORY_COUNT} required")
    if len(set(codes)) != len(codes):
        dupes = sorted({c for c in codes if codes.count(c) > 1})
        raise ParseError(f"{path}: duplicate category codes: {dupes}")
    return codes


def write_manifest(codes, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(codes) + "\n")


def parse_landuse(path, categories):
    """Parse the land-use GeoJSON against a loaded category manifest."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")
    known = set(categories)
    polygons = []
    for idx, feature in enumerate(doc.get("features", [])):
        geom = feature.get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise ParseError(f"{path}: feature {idx}: geometry type "
                             f"{geom.get('type')!r}, only Polygon is supported")
        rings = geom.get("coordinates") or []
        if len(rings) != 1:
            raise ParseError(f"{path}: feature {idx}: holes are not supported")
        ring = [tuple(map(float, v)) for v in rings[0]]
        _check_ring(ring, f"{path}: feature {idx}")
        category = (feature.get("properties") or {}).get("category")
        if category not in known:
            raise ParseError(f"{path}: feature {idx}: unknown category code {category!r}")
        polygons.append(LandUsePolygon(ring=tuple(ring), category=category))
    return LandUseMap(polygons=polygons, categories=list(categories))


def write_landuse(landuse, path):
    features = [
        {
            "type": "Feature",
            "properties": {"category": p.category},
            "geometry": {"type": "Polygon",
                         "coordinates": [[list(v) for v in p.ring]]},
        }
        for p in landuse.polygons
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)


# ---------------------------------------------------------------------------
# area polygons GeoJSON


def parse_areas(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")
    areas = []
    seen = set()
    for idx, feature in enumerate(doc.get("features", [])):
        geom = feature.get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise ParseError(f"{path}: feature {idx}: geometry type "
                             f"{geom.get('type')!r}, only Polygon is supported")
        rings = geom.get("coordinates") or []
        if len(rings) != 1:
            raise ParseError(f"{path}: feature {idx}: holes are not supported")
        ring = [tuple(map(float, v)) for v in rings[0]]
        _check_ring(ring, f"{path}: feature {idx}")
        area_id = (feature.get("properties") or {}).get("area_id")
        if not area_id:
            raise ParseError(f"{path}: feature {idx}: missing area_id property")
        if area_id in seen:
            raise ParseError(f"{path}: feature {idx}: duplicate area_id {area_id!r}")
        seen.add(area_id)
        areas.append(AreaPolygon.from_ring(area_id, ring))
    return areas


def write_areas(areas, path):
    features = [
        {
            "type": "Feature",
            "properties": {"area_id": a.area_id},
            "geometry": {"type": "Polygon",
                         "coordinates": [[list(v) for v in a.ring]]},
        }
        for a in areas
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)


# ---------------------------------------------------------------------------
# elevation ASCII grid

_ASC_HEADER_KEYS = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value"]


def parse_elevation(path):
    """Parse an ASCII elevation grid (header block, then north-first rows)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = {}
    for i, key in enumerate(_ASC_HEADER_KEYS):
        if i >= len(lines):
            raise ParseError(f"{path}: missing header line {key!r}")
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"{path}: malformed header line {lines[i]!r}, expected {key!r}")
        header[key] = parts[1]
    try:
        ncols = int(header["ncols"])
        nrows = int(header["nrows"])
        xll = float(header["xllcorner"])
        yll = float(header["yllcorner"])
        cell = float(header["cellsize"])
        nodata = float(header["NODATA_value"])
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric header value: {exc}") from None
    if ncols <= 0 or nrows <= 0:
        raise ParseError(f"{path}: ncols and nrows must be positive")
    if cell <= 0:
        raise ParseError(f"{path}: cellsize must be positive")

    data_lines = lines[len(_ASC_HEADER_KEYS):]
    if len(data_lines) != nrows:
        raise ParseError(f"{path}: expected {nrows} data rows, found {len(data_lines)}")
    values = np.empty((nrows, ncols), dtype=np.float64)
    for r, line in enumerate(data_lines):
        cells = line.split()
        if len(cells) != ncols:
            raise ParseError(f"{path}: data row {r + 1} has {len(cells)} values, "
                             f"expected {ncols}")
        for c, token in enumerate(cells):
            try:
                values[r, c] = float(token)
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell at row {r + 1}, "
                                 f"column {c + 1}: {token!r}") from None
    return ElevationGrid(xllcorner=xll, yllcorner=yll, cell_size_deg=cell,
                         ncols=ncols, nrows=nrows, values=values, nodata=nodata)


def write_elevation(grid, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"ncols {grid.ncols}\n")
        fh.write(f"nrows {grid.nrows}\n")
        fh.write(f"xllcorner {_num(grid.xllcorner)}\n")
        fh.write(f"yllcorner {_num(grid.yllcorner)}\n")
        fh.write(f"cellsize {_num(grid.cell_size_deg)}\n")
        fh.write(f"NODATA_value {_num(grid.nodata)}\n")
        for row in grid.values:
            fh.write(" ".join(_num(float(v)) for v in row) + "\n")
