"""Feature engineering: monthly observation scores, labels, and the
85-dimensional feature vector (month, height, 83 land-use fractions).
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geo import local_offsets_to_lonlat, points_in_ring, ring_bbox
from .ingest import REQUIRED_CATEGORY_COUNT

FEATURE_DIM = 1 + 1 + REQUIRED_CATEGORY_COUNT  # month, height, land use

INSTANCE_HEADER = (["station_id", "year", "month", "score", "label", "height_m"]
                   + [f"lu_{i}" for i in range(1, REQUIRED_CATEGORY_COUNT + 1)])


class OutsideExtentError(ValueError):
    """Location falls outside the elevation raster."""


class NodataError(ValueError):
    """Raster cell at the location holds the nodata sentinel."""


@dataclass(frozen=True)
class LabeledInstance:
    station_id: str
    year: int
    month: int
    score: float
    label: int  # 1 = severely infested (positive), 0 = weakly/non-infested
    features: np.ndarray  # shape (85,): [month, height_m, lu_1..lu_83]

    def __eq__(self, other):
        if not isinstance(other, LabeledInstance):
            return NotImplemented
        return (self.station_id == other.station_id and self.year == other.year
                and self.month == other.month and self.score == other.score
                and self.label == other.label
                and np.array_equal(self.features, other.features))


@dataclass(frozen=True)
class LabelingSummary:
    threshold_value: float
    n_total: int
    n_positive: int
    n_negative: int


def combine_observations(records):
    """Collapse raw records into per-(station, year, month) scores.

    Each of the three measures is min-max normalized over the whole record
    set (a constant measure maps to 0), the per-record score is the sum of
    the three normalized values, and the monthly score is the mean of the
    station-month's record scores.
    """
    if not records:
        raise ValueError("combine_observations: empty record list")
    trap = np.array([r.trap_count for r in records], dtype=np.float64)
    berry = np.array([r.berry_infestation for r in records], dtype=np.float64)
    egg = np.array([r.egg_rate for r in records], dtype=np.float64)

    def norm(v):
        lo, hi = v.min(), v.max()
        if hi == lo:
            return np.zeros_like(v)
        return (v - lo) / (hi - lo)

    scores = norm(trap) + norm(berry) + norm(egg)
    sums = {}
    counts = {}
    for rec, s in zip(records, scores):
        key = (rec.station_id, rec.date.year, rec.date.month)
        sums[key] = sums.get(key, 0.0) + float(s)
        counts[key] = counts.get(key, 0) + 1
    return {key: sums[key] / counts[key] for key in sums}


def percentile_threshold(values, percentile):
    """Nearest-rank percentile: the value at 1-based index ceil(p * n)."""
    n = len(values)
    r = percentile * n
    # snap exact integer ranks that drifted by float rounding
    rank = int(round(r)) if abs(r - round(r)) < 1e-9 else math.ceil(r)
    rank = min(max(rank, 1), n)
    return sorted(values)[rank - 1]


def label_instances(monthly_scores, percentile=0.8):
    """Assign binary labels by comparing scores against the nearest-rank
    percentile threshold (strictly greater means positive)."""
    if not monthly_scores:
        raise ValueError("label_instances: empty input")
    if not (0.0 < percentile < 1.0):
        raise ValueError(f"label_instances: percentile {percentile} outside (0, 1)")
    threshold = percentile_threshold(list(monthly_scores.values()), percentile)
    labeled = {key: (score, 1 if score > threshold else 0)
               for key, score in monthly_scores.items()}
    n_pos = sum(lbl for _, lbl in labeled.values())
    summary = LabelingSummary(threshold_value=threshold, n_total=len(labeled),
                              n_positive=n_pos, n_negative=len(labeled) - n_pos)
    return labeled, summary


# ---------------------------------------------------------------------------
# land-use fractions


class _LandUseIndex:
    """Uniform bucket index over polygon bounding boxes for fast candidate lookup."""

    def __init__(self, landuse):
        self.category_of = {code: i for i, code in enumerate(landuse.categories)}
        self.bboxes = [ring_bbox(p.ring) for p in landuse.polygons]
        if self.bboxes:
            widths = sorted(b[2] - b[0] for b in self.bboxes)
            self.bucket = max(widths[len(widths) // 2], 1e-3)
        else:
            self.bucket = 1.0
        self.buckets = {}
        for idx, (x0, y0, x1, y1) in enumerate(self.bboxes):
            for bx in range(int(math.floor(x0 / self.bucket)), int(math.floor(x1 / self.bucket)) + 1):
                for by in range(int(math.floor(y0 / self.bucket)), int(math.floor(y1 / self.bucket)) + 1):
                    self.buckets.setdefault((bx, by), []).append(idx)

    def candidates(self, x0, y0, x1, y1):
        found = set()
        for bx in range(int(math.floor(x0 / self.bucket)), int(math.floor(x1 / self.bucket)) + 1):
            for by in range(int(math.floor(y0 / self.bucket)), int(math.floor(y1 / self.bucket)) + 1):
                found.update(self.buckets.get((bx, by), ()))
        return sorted(found)  # ascending file order, first-match resolution


def _index_for(landuse):
    if landuse._index is None:
        landuse._index = _LandUseIndex(landuse)
    return landuse._index


_lattice_cache = {}


def _disk_lattice(divisor):
    """Unit-disk square lattice of step 1/divisor, cached per divisor."""
    if divisor not in _lattice_cache:
        ticks = np.arange(-divisor, divisor + 1, dtype=np.float64) / divisor
        gx, gy = np.meshgrid(ticks, ticks)
        keep = gx * gx + gy * gy <= 1.0
        _lattice_cache[divisor] = (gx[keep].copy(), gy[keep].copy())
    return _lattice_cache[divisor]


def landuse_fractions(center, radius_m, landuse, step_divisor=64):
    """Fraction of the disk around ``center`` covered by each category.

    Sampled on a deterministic square lattice of step ``radius_m /
    step_divisor`` clipped to the disk; point-in-polygon by the even-odd
    rule; overlapping polygons resolved by first match in file order.
    """
    if radius_m <= 0:
        raise ValueError("landuse_fractions: radius_m must be positive")
    fractions = np.zeros(len(landuse.categories), dtype=np.float64)
    ux, uy = _disk_lattice(step_divisor)
    n_points = ux.shape[0]
    if not landuse.polygons:
        return fractions
    xs, ys = local_offsets_to_lonlat(center, ux * radius_m, uy * radius_m)

    index = _index_for(landuse)
    cands = index.candidates(xs.min(), ys.min(), xs.max(), ys.max())
    unassigned = np.ones(n_points, dtype=bool)
    for poly_idx in cands:
        if not unassigned.any():
            break
        x0, y0, x1, y1 = index.bboxes[poly_idx]
        box = unassigned & (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
        if not box.any():
            continue
        hit = points_in_ring(xs[box], ys[box], landuse.polygons[poly_idx].ring)
        if hit.any():
            sel = np.flatnonzero(box)[hit]
            cat = index.category_of[landuse.polygons[poly_idx].category]
            fractions[cat] += sel.shape[0]
            unassigned[sel] = False
    return fractions / n_points


# ---------------------------------------------------------------------------
# elevation lookup


def height_at(location, grid):
    """Height of the raster cell containing ``location`` (no interpolation).

    Cell membership is floor-based along both axes; a point on a shared
    edge belongs to the cell whose lower-left corner touches it.
    """
    lon, lat = location
    col = math.floor((lon - grid.xllcorner) / grid.cell_size_deg)
    row_from_bottom = math.floor((lat - grid.yllcorner) / grid.cell_size_deg)
    if not (0 <= col < grid.ncols and 0 <= row_from_bottom < grid.nrows):
        raise OutsideExtentError(
            f"location ({lon}, {lat}) outside elevation extent")
    value = float(grid.values[grid.nrows - 1 - row_from_bottom, col])
    if value == grid.nodata:
        raise NodataError(f"elevation nodata at ({lon}, {lat})")
    return value


# ---------------------------------------------------------------------------
# instance assembly


def make_feature_vector(month, height_m, fractions):
    fv = np.empty(FEATURE_DIM, dtype=np.float64)
    fv[0] = month
    fv[1] = height_m
    fv[2:] = fractions
    return fv


def build_instances(observations, landuse, elevation, percentile=0.8,
                    radius_m=5000.0, step_divisor=64):
    """Build one labeled instance per (station, year, month) with observations."""
    monthly = combine_observations(observations)
    labeled, summary = label_instances(monthly, percentile)

    station_loc = {}
    for rec in observations:
        station_loc.setdefault(rec.station_id, (rec.lon, rec.lat))

    env_cache = {}
    instances = []
    for (station_id, year, month) in sorted(labeled):
        score, label = labeled[(station_id, year, month)]
        if station_id not in env_cache:
            loc = station_loc[station_id]
            height = height_at(loc, elevation)
            fractions = landuse_fractions(loc, radius_m, landuse, step_divisor)
            env_cache[station_id] = (height, fractions)
        height, fractions = env_cache[station_id]
        instances.append(LabeledInstance(
            station_id=station_id, year=year, month=month, score=score, label=label,
            features=make_feature_vector(month, height, fractions)))
    return instances, summary


def write_instances(instances, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INSTANCE_HEADER)
        for inst in instances:
            writer.writerow([inst.station_id, inst.year, inst.month, repr(inst.score),
                             inst.label, repr(float(inst.features[1]))]
                            + [repr(float(v)) for v in inst.features[2:]])


def read_instances(path):
    instances = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != INSTANCE_HEADER:
            raise ValueError(f"{path}: unexpected instance CSV header")
        for row in reader:
            station_id, year, month, score, label, height = row[:6]
            fractions = np.array([float(v) for v in row[6:]], dtype=np.float64)
            instances.append(LabeledInstance(
                station_id=station_id, year=int(year), month=int(month),
                score=float(score), label=int(label),
                features=make_feature_vector(int(month), float(height), fractions)))
    return instances
