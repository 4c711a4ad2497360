"""Planar geometry helpers shared across the pipeline.

All geographic inputs are WGS84 lon/lat degrees. Projection onto the map
plane uses spherical Web Mercator (EPSG:3857) so grid cells line up with
slippy-map tiles.
"""

import math

import numpy as np

EARTH_RADIUS_M = 6378137.0

# Meters per degree of a local equirectangular approximation, used for
# small-radius neighborhoods (the 5 km land-use disk).
M_PER_DEG_LAT = 110574.0


def mercator_xy(lon, lat):
    """Project lon/lat degrees to Web Mercator meters. Accepts scalars or arrays."""
    lon = np.asarray(lon, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    x = np.radians(lon) * EARTH_RADIUS_M
    y = EARTH_RADIUS_M * np.log(np.tan(np.pi / 4.0 + np.radians(lat) / 2.0))
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def mercator_lonlat(x, y):
    """Inverse of :func:`mercator_xy`."""
    lon = math.degrees(x / EARTH_RADIUS_M)
    lat = math.degrees(2.0 * math.atan(math.exp(y / EARTH_RADIUS_M)) - math.pi / 2.0)
    return lon, lat


def meters_per_degree_lon(lat_deg):
    return M_PER_DEG_LAT * math.cos(math.radians(lat_deg))


def local_offsets_to_lonlat(center, dx_m, dy_m):
    """Translate meter offsets around ``center`` into lon/lat coordinates.

    Equirectangular approximation; adequate for radii of a few kilometers.
    """
    lon0, lat0 = center
    lon = lon0 + np.asarray(dx_m) / meters_per_degree_lon(lat0)
    lat = lat0 + np.asarray(dy_m) / M_PER_DEG_LAT
    return lon, lat


def points_in_ring(xs, ys, ring):
    """Even-odd ray-cast test of many points against one polygon ring.

    ``ring`` is a sequence of (x, y) vertices, closed (first == last).
    Returns a boolean array aligned with ``xs``/``ys``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inside = np.zeros(xs.shape, dtype=bool)
    n = len(ring)
    x1, y1 = ring[0]
    for k in range(1, n):
        x2, y2 = ring[k]
        if y1 != y2:
            crosses = (ys >= min(y1, y2)) & (ys < max(y1, y2))
            if crosses.any():
                xinters = (ys - y1) * (x2 - x1) / (y2 - y1) + x1
                inside ^= crosses & (xs < xinters)
        x1, y1 = x2, y2
    return inside


def point_in_ring(x, y, ring):
    return bool(points_in_ring(np.array([x]), np.array([y]), ring)[0])


def ring_bbox(ring):
    xs = [v[0] for v in ring]
    ys = [v[1] for v in ring]
    return min(xs), min(ys), max(xs), max(ys)


def vertex_mean_centroid(ring):
    """Arithmetic mean of the ring's distinct vertices.

    The closing vertex (and any exact repeats) count once. This is the
    documented area-center convention for cell assignment; it is not the
    polygon's area centroid.
    """
    seen = []
    seen_set = set()
    for v in ring:
        key = (float(v[0]), float(v[1]))
        if key not in seen_set:
            seen_set.add(key)
            seen.append(key)
    n = len(seen)
    lon = sum(v[0] for v in seen) / n
    lat = sum(v[1] for v in seen) / n
    return lon, lat
