"""Reproducible synthetic datasets with planted spatio-temporal effects.

The generated world mirrors the structure of the real inputs: sparsely and
irregularly reporting stations, a land-use mosaic with contiguous forest
blobs, a smooth elevation field, and clustered small area polygons. Two
effects are planted and individually switchable:

* a seasonal surge of observations from August through December, and
* an earlier (June/July) surge at stations whose surrounding woodland
  fraction exceeds a threshold, scaled by how far above it they sit.

Both effect strengths at 0 leave monthly observation means flat.
"""

import datetime
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .features import landuse_fractions
from .ingest import (AreaPolygon, ElevationGrid, LandUseMap, LandUsePolygon,
                     StationObservation)

CATEGORY_CODES = [
    "FOREST",
    # agriculture
    "VINEYARD", "ORCHARD_INTENSIVE", "ORCHARD_EXTENSIVE", "BERRY_PLANTATION",
    "HOP_FIELD", "ARABLE_CEREAL", "ARABLE_ROOT_CROP", "ARABLE_MAIZE",
    "MEADOW", "PASTURE", "FALLOW_LAND", "TREE_NURSERY",
    # open and semi-natural land
    "GRASSLAND_DRY", "GRASSLAND_WET", "HEATHLAND", "SCRUBLAND", "HEDGEROW",
    "ORCHARD_MEADOW", "REED_BED", "MOORLAND",
    # settlement
    "RESIDENTIAL_DENSE", "RESIDENTIAL_OPEN", "VILLAGE_CORE", "COMMERCIAL_AREA",
    "INDUSTRIAL_AREA", "MIXED_USE_AREA", "CONSTRUCTION_SITE", "ALLOTMENT_GARDENS",
    "URBAN_PARK", "CEMETERY", "SPORTS_FACILITY", "CAMPGROUND", "FAIRGROUND",
    "MILITARY_AREA",
    # transport
    "ROAD_MOTORWAY", "ROAD_PRIMARY", "ROAD_SECONDARY", "ROAD_LOCAL",
    "RAILWAY_LINE", "RAILWAY_YARD", "AIRFIELD", "HELIPORT", "PARKING_AREA",
    "SERVICE_STATION",
    # water
    "RIVER", "STREAM", "CANAL", "LAKE", "POND", "RESERVOIR", "WETLAND",
    "MARSH", "FLOODPLAIN", "SPRING_ZONE",
    # extraction and bare ground
    "QUARRY", "GRAVEL_PIT", "OPEN_CAST_MINE", "LANDFILL", "SPOIL_HEAP",
    "BARE_ROCK", "SCREE_SLOPE", "SAND_AREA",
    # infrastructure
    "SOLAR_FARM", "WIND_FARM", "POWER_SUBSTATION", "SEWAGE_WORKS",
    "WATER_TREATMENT", "PUMPING_STATION", "STORAGE_DEPOT", "GREENHOUSE_COMPLEX",
    # miscellaneous
    "ORCHARD_ABANDONED", "CLEARFELL_AREA", "WINDBREAK_STRIP", "RIPARIAN_STRIP",
    "DITCH_NETWORK", "EMBANKMENT", "RUDERAL_AREA", "GARDEN_CENTRE",
    "PLANT_NURSERY", "COMPOST_SITE", "PICNIC_AREA", "VIEWPOINT_CLEARING",
]
assert len(CATEGORY_CODES) == 83

# month -> relative surge intensity of the main (late-year) ramp
SEASON_RAMP = {8: 0.25, 9: 0.61, 10: 1.0, 11: 0.8, 12: 0.4}
# month -> relative surge intensity of the early (woodland-driven) ramp,
# starting two months before the main ramp
EARLY_RAMP = {6: 0.7, 7: 1.0}


@dataclass(frozen=True)
class SynthConfig:
    station_count: int = 867
    area_count: int = 1700
    bbox: tuple = (7.4, 47.45, 8.8, 48.45)  # lon_min, lat_min, lon_max, lat_max
    date_start: datetime.date = datetime.date(2014, 1, 1)
    date_end: datetime.date = datetime.date(2017, 12, 31)
    # planted effect strengths (0 disables the effect)
    season_strength: float = 6.0
    wood_strength: float = 6.0
    # month-independent susceptibility modifier by altitude (does not
    # affect the flat-months contract)
    altitude_strength: float = 0.25
    wood_threshold: float = 0.25
    # woodland fraction at which the early surge reaches full strength
    wood_saturation: float = 0.55
    wood_category: str = "FOREST"
    # lognormal sigma of the per-station susceptibility multiplier; station
    # micro-siting noise the feature vector cannot explain
    susceptibility_sigma: float = 0.09
    # observation magnitudes
    base_trap: float = 16.0
    base_berry: float = 30.0
    base_egg: float = 40.0
    berry_noise: float = 4.0
    egg_noise: float = 6.0
    # land-use mosaic
    patch_size_deg: float = 0.04
    forest_blob_count: int = 9
    # placement
    cluster_count: int = 24
    cluster_sigma_m: float = 6000.0
    edge_inset_m: float = 5000.0
    # share of stations (resp. area clusters) planted near forest blobs
    station_forest_share: float = 0.25
    area_forest_share: float = 1.0 / 3.0
    # feature-extraction geometry (kept with the generator so planted
    # effects and extracted features use the same definition)
    landuse_radius_m: float = 5000.0
    step_divisor: int = 64

    def validate(self):
        if self.station_count <= 0 or self.area_count <= 0:
            raise ValueError("station_count and area_count must be positive")
        lon_min, lat_min, lon_max, lat_max = self.bbox
        if not (lon_min < lon_max and lat_min < lat_max):
            raise ValueError(f"inverted bbox: {self.bbox}")
        if self.date_start > self.date_end:
            raise ValueError("date_start after date_end")


class SyntheticData(NamedTuple):
    observations: list
    landuse: LandUseMap
    elevation: ElevationGrid
    areas: list


@dataclass
class StationParams:
    station_id: str
    lon: float
    lat: float
    height_m: float
    wood_fraction: float
    wood_gate: float       # 0 below wood_threshold, 1 from wood_saturation up
    altitude_factor: float
    susceptibility: float  # station-level multiplier, not in the features


def _streams(seed):
    ss = np.random.SeedSequence(seed)
    names = ["landuse", "stations", "areas", "observations"]
    return dict(zip(names, (np.random.default_rng(s) for s in ss.spawn(len(names)))))


def _make_elevation(config):
    lon_min, lat_min, lon_max, lat_max = config.bbox
    cell = 0.01
    ncols = int(math.ceil((lon_max - lon_min) / cell))
    nrows = int(math.ceil((lat_max - lat_min) / cell))
    cols = lon_min + (np.arange(ncols) + 0.5) * cell
    rows_north_first = lat_min + (np.arange(nrows)[::-1] + 0.5) * cell
    lon_g, lat_g = np.meshgrid(cols, rows_north_first)
    ridges = 0.5 * (1.0 + np.sin(4.5 * (lon_g - lon_min)) * np.cos(3.8 * (lat_g - lat_min)))
    northward = (lat_g - lat_min) / (lat_max - lat_min)
    values = np.round(160.0 + 360.0 * ridges + 240.0 * northward, 1)
    return ElevationGrid(xllcorner=lon_min, yllcorner=lat_min, cell_size_deg=cell,
                         ncols=ncols, nrows=nrows, values=values, nodata=-9999.0)


def _make_landuse(config, rng):
    """Patch mosaic: contiguous forest blobs, everything else random filler."""
    lon_min, lat_min, lon_max, lat_max = config.bbox
    p = config.patch_size_deg
    ncols = int(math.ceil((lon_max - lon_min) / p))
    nrows = int(math.ceil((lat_max - lat_min) / p))

    seeds = np.column_stack([rng.uniform(1.5, ncols - 1.5, config.forest_blob_count),
                             rng.uniform(1.5, nrows - 1.5, config.forest_blob_count)])
    radii = rng.uniform(1.5, 3.5, config.forest_blob_count)

    other = [c for c in CATEGORY_CODES if c != config.wood_category]
    polygons = []
    for r in range(nrows):
        for c in range(ncols):
            center = np.array([c + 0.5, r + 0.5])
            d = np.sqrt(((seeds - center) ** 2).sum(axis=1))
            if (d <= radii).any():
                category = config.wood_category
            else:
                category = other[int(rng.integers(0, len(other)))]
            x0 = lon_min + c * p
            y0 = lat_min + r * p
            ring = ((x0, y0), (x0 + p, y0), (x0 + p, y0 + p), (x0, y0 + p), (x0, y0))
            polygons.append(LandUsePolygon(ring=ring, category=category))
    landuse = LandUseMap(polygons=polygons, categories=list(CATEGORY_CODES))
    forest_centers = [(lon_min + sx * p, lat_min + sy * p) for sx, sy in seeds]
    return landuse, forest_centers


def _inset_bbox(config):
    lon_min, lat_min, lon_max, lat_max = config.bbox
    dlat = config.edge_inset_m / 110574.0
    dlon = config.edge_inset_m / (111320.0 * math.cos(math.radians((lat_min + lat_max) / 2)))
    return lon_min + dlon, lat_min + dlat, lon_max - dlon, lat_max - dlat


def _scatter_points(count, rng, config, forest_centers, near_forest_share, sigma_m):
    """Mix of forest-adjacent and uniformly placed points inside the inset box."""
    lon_min, lat_min, lon_max, lat_max = _inset_bbox(config)
    m_lat = 110574.0
    m_lon = 111320.0 * math.cos(math.radians((lat_min + lat_max) / 2))
    pts = []
    for _ in range(count):
        if rng.random() < near_forest_share and forest_centers:
            cx, cy = forest_centers[int(rng.integers(0, len(forest_centers)))]
            lon = cx + rng.normal(0.0, sigma_m) / m_lon
            lat = cy + rng.normal(0.0, sigma_m) / m_lat
        else:
            lon = rng.uniform(lon_min, lon_max)
            lat = rng.uniform(lat_min, lat_max)
        pts.append((float(min(max(lon, lon_min), lon_max)),
                    float(min(max(lat, lat_min), lat_max))))
    return pts


def _height_lookup(elevation, lon, lat):
    col = int((lon - elevation.xllcorner) / elevation.cell_size_deg)
    row = int((lat - elevation.yllcorner) / elevation.cell_size_deg)
    col = min(max(col, 0), elevation.ncols - 1)
    row = min(max(row, 0), elevation.nrows - 1)
    return float(elevation.values[elevation.nrows - 1 - row, col])


def _build_stations(config, rng, landuse, elevation, forest_centers):
    locations = _scatter_points(config.station_count, rng, config, forest_centers,
                                near_forest_share=config.station_forest_share,
                                sigma_m=3000.0)
    hmin = float(elevation.values.min())
    hmax = float(elevation.values.max())
    wood_idx = landuse.categories.index(config.wood_category)
    stations = []
    for i, (lon, lat) in enumerate(locations):
        fractions = landuse_fractions((lon, lat), config.landuse_radius_m, landuse,
                                      config.step_divisor)
        wood = float(fractions[wood_idx])
        gate = min(max(0.0, wood - config.wood_threshold)
                   / (config.wood_saturation - config.wood_threshold), 1.0)
        height = _height_lookup(elevation, lon, lat)
        altnorm = (height - hmin) / (hmax - hmin) if hmax > hmin else 0.0
        stations.append(StationParams(
            station_id=f"S{i + 1:04d}", lon=lon, lat=lat, height_m=height,
            wood_fraction=wood, wood_gate=gate,
            altitude_factor=1.0 + config.altitude_strength * (1.0 - altnorm),
            susceptibility=float(np.exp(rng.normal(0.0, config.susceptibility_sigma)))))
    return stations


def _build_areas(config, rng, forest_centers):
    lon_min, lat_min, lon_max, lat_max = _inset_bbox(config)
    n_clusters = config.cluster_count
    centers = _scatter_points(n_clusters, rng, config, forest_centers,
                              near_forest_share=config.area_forest_share,
                              sigma_m=2000.0)
    m_lat = 110574.0
    m_lon = 111320.0 * math.cos(math.radians((lat_min + lat_max) / 2))
    half = 120.0  # half-diagonal of the diamond-shaped area polygon, meters
    areas = []
    for i in range(config.area_count):
        cx, cy = centers[int(rng.integers(0, n_clusters))]
        lon = cx + rng.normal(0.0, config.cluster_sigma_m) / m_lon
        lat = cy + rng.normal(0.0, config.cluster_sigma_m) / m_lat
        lon = float(min(max(lon, lon_min), lon_max))
        lat = float(min(max(lat, lat_min), lat_max))
        dx = half / m_lon
        dy = half / m_lat
        ring = ((lon - dx, lat), (lon, lat - dy), (lon + dx, lat), (lon, lat + dy),
                (lon - dx, lat))
        areas.append(AreaPolygon.from_ring(f"A{i + 1:04d}", ring))
    return areas


def intensity(config, station, month):
    """Relative observation intensity for a station-month (1.0 = baseline)."""
    surge = (1.0
             + config.season_strength * SEASON_RAMP.get(month, 0.0)
             + config.wood_strength * station.wood_gate * EARLY_RAMP.get(month, 0.0))
    return surge * station.altitude_factor * station.susceptibility


def _month_span(config):
    months = []
    y, m = config.date_start.year, config.date_start.month
    while (y, m) <= (config.date_end.year, config.date_end.month):
        months.append((y, m))
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return months


def _days_in_month(year, month):
    nxt = datetime.date(year + (month == 12), month % 12 + 1, 1)
    return (nxt - datetime.date(year, month, 1)).days


def _build_observations(config, rng, stations):
    months = _month_span(config)
    records = []
    for st in stations:
        u = rng.random()
        if u < 0.35:
            active = [months[int(rng.integers(0, len(months)))]]
        elif u < 0.80:
            length = int(rng.integers(2, 6))
            start = int(rng.integers(0, len(months)))
            active = months[start:start + length]
        else:
            length = int(rng.integers(8, 19))
            start = int(rng.integers(0, len(months)))
            active = months[start:start + length]
        for (year, month) in active:
            lam = intensity(config, st, month)
            n_rec = int(rng.integers(2, 7))
            days = rng.choice(_days_in_month(year, month), size=n_rec, replace=False)
            for day in sorted(int(d) for d in days):
                trap = float(rng.poisson(config.base_trap * lam))
                berry = float(np.clip(rng.normal(config.base_berry * lam,
                                                 config.berry_noise), 0.0, 100.0))
                egg = float(max(rng.normal(config.base_egg * lam, config.egg_noise), 0.0))
                records.append(StationObservation(
                    station_id=st.station_id, lon=st.lon, lat=st.lat,
                    date=datetime.date(year, month, day + 1),
                    trap_count=trap, berry_infestation=round(berry, 2),
                    egg_rate=round(egg, 2)))
    return records


def build_world(config, seed):
    """Deterministic full world build; returns internals for diagnostics."""
    config.validate()
    rngs = _streams(seed)
    elevation = _make_elevation(config)
    landuse, forest_centers = _make_landuse(config, rngs["landuse"])
    stations = _build_stations(config, rngs["stations"], landuse, elevation, forest_centers)
    areas = _build_areas(config, rngs["areas"], forest_centers)
    observations = _build_observations(config, rngs["observations"], stations)
    return observations, landuse, elevation, areas, stations


def generate_synthetic(config, seed):
    """Generate (observations, landuse, elevation, areas) for (config, seed)."""
    observations, landuse, elevation, areas, _ = build_world(config, seed)
    return SyntheticData(observations, landuse, elevation, areas)


def analytic_monthly_trap_mean(config, seed):
    """Expected per-month mean trap count implied by the generator's own
    intensity model, evaluated over the actually generated records.

    Serves as the oracle for the flat-months contract when both effect
    strengths are 0 (the expectation is then month-independent up to the
    station mix actually sampled per month).
    """
    observations, _, _, _, stations = build_world(config, seed)
    by_id = {st.station_id: st for st in stations}
    sums = np.zeros(13)
    counts = np.zeros(13)
    for rec in observations:
        st = by_id[rec.station_id]
        sums[rec.date.month] += config.base_trap * intensity(config, st, rec.date.month)
        counts[rec.date.month] += 1
    with np.errstate(invalid="ignore"):
        return {m: sums[m] / counts[m] for m in range(1, 13) if counts[m] > 0}


def disable_effects(config):
    return replace(config, season_strength=0.0, wood_strength=0.0)
