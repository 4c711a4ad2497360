"""Stable Web-Mercator grid aggregation of catalog predictions.

Cell boundaries depend only on the projection origin and the cell size,
never on the viewport, so a cell's summary is identical no matter which
query produced it. Areas are assigned to cells by their projected
centroid with a floor convention: a point exactly on a boundary belongs
to the higher-index cell.
"""

import math
from dataclasses import dataclass

from .geo import mercator_xy

DEFAULT_BASE_SIZE_M = 200000.0
MIN_CELL_SIZE_M = 500.0
MAX_CELL_SIZE_M = 200000.0


@dataclass(frozen=True)
class GridSpec:
    """Regular grid in Web-Mercator meters anchored at the projection origin.

    cell_size_m = base_size_m / 2**level, so semantic-zoom splits halve
    the cell edge exactly.
    """

    base_size_m: float = DEFAULT_BASE_SIZE_M
    level: int = 0

    def __post_init__(self):
        if self.base_size_m <= 0:
            raise ValueError("base_size_m must be positive")
        if self.level < 0:
            raise ValueError("level must be >= 0")

    @property
    def cell_size_m(self):
        return self.base_size_m / (2 ** self.level)

    def cell_index(self, x_m, y_m):
        s = self.cell_size_m
        return (math.floor(x_m / s), math.floor(y_m / s))

    def cell_bounds(self, i, j):
        s = self.cell_size_m
        return (i * s, j * s, (i + 1) * s, (j + 1) * s)

    def cell_center_lonlat(self, i, j):
        from .geo import mercator_lonlat
        s = self.cell_size_m
        return mercator_lonlat((i + 0.5) * s, (j + 0.5) * s)


@dataclass(frozen=True)
class MonthStats:
    month: int
    endangered_count: int
    safe_count: int
    mean_certainty_endangered: float
    mean_certainty_safe: float
    stddev_certainty: float


@dataclass(frozen=True)
class CellSummary:
    cell_index: tuple
    vineyard_count: int
    months: tuple  # 12 MonthStats, January first
    member_area_ids: tuple


def assign_points(spec, points):
    """Assign (area_id, lon, lat) points to cells; returns cell -> sorted ids."""
    cells = {}
    for area_id, lon, lat in points:
        x, y = mercator_xy(lon, lat)
        cells.setdefault(spec.cell_index(x, y), []).append(area_id)
    return {cell: sorted(ids) for cell, ids in cells.items()}


def assign_areas(spec, areas):
    """Assign area polygons to cells by their centroid."""
    return assign_points(spec, ((a.area_id, a.centroid[0], a.centroid[1])
                                for a in areas))


def assign_catalog(spec, catalog):
    return assign_points(spec, ((area_id, f.centroid[0], f.centroid[1])
                                for area_id, f in catalog.feature_store.items()))


def summarize_cell(cell, member_ids, catalog):
    months = []
    n = len(member_ids)
    for month in range(1, 13):
        certs_e = []
        certs_s = []
        for area_id in member_ids:
            try:
                pred = catalog.predictions[(area_id, month)]
            except KeyError:
                raise ValueError(
                    f"integrity error: area {area_id!r} month {month} missing "
                    f"from catalog") from None
            (certs_e if pred.endangered else certs_s).append(pred.certainty)
        all_certs = certs_e + certs_s
        mean_all = sum(all_certs) / n
        stddev = math.sqrt(sum((c - mean_all) ** 2 for c in all_certs) / n)
        months.append(MonthStats(
            month=month,
            endangered_count=len(certs_e),
            safe_count=len(certs_s),
            mean_certainty_endangered=(sum(certs_e) / len(certs_e)) if certs_e else None,
            mean_certainty_safe=(sum(certs_s) / len(certs_s)) if certs_s else None,
            stddev_certainty=stddev))
    return CellSummary(cell_index=cell, vineyard_count=n, months=tuple(months),
                       member_area_ids=tuple(member_ids))


def summarize(spec, assignment, catalog):
    """CellSummary per non-empty cell, ordered by cell index."""
    return [summarize_cell(cell, assignment[cell], catalog)
            for cell in sorted(assignment)]


def split(spec, min_cell_size_m=MIN_CELL_SIZE_M):
    """Halve the cell size (semantic zoom in)."""
    new = GridSpec(base_size_m=spec.base_size_m, level=spec.level + 1)
    if new.cell_size_m < min_cell_size_m:
        raise ValueError(f"cell size {new.cell_size_m} m underflows the "
                         f"minimum {min_cell_size_m} m")
    return new


def resize(spec, cell_size_m, min_cell_size_m=MIN_CELL_SIZE_M,
           max_cell_size_m=MAX_CELL_SIZE_M):
    """Retile from the same origin at an arbitrary in-range cell size."""
    if not (min_cell_size_m <= cell_size_m <= max_cell_size_m):
        raise ValueError(f"cell size {cell_size_m} m outside "
                         f"[{min_cell_size_m}, {max_cell_size_m}]")
    return GridSpec(base_size_m=cell_size_m, level=0)


def _fmt(value):
    return "" if value is None else repr(float(value))


def write_summaries(summaries, spec, path):
    """Newline-delimited export: i,j,cell_size_m,month,endangered,safe,mean_ce,mean_cs,stddev."""
    s = spec.cell_size_m
    with open(path, "w", encoding="utf-8") as fh:
        for summary in summaries:
            i, j = summary.cell_index
            for ms in summary.months:
                fh.write(f"{i},{j},{_fmt(s)},{ms.month},{ms.endangered_count},"
                         f"{ms.safe_count},{_fmt(ms.mean_certainty_endangered)},"
                         f"{_fmt(ms.mean_certainty_safe)},{_fmt(ms.stddev_certainty)}\n")
