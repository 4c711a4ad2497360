"""Read-only HTTP API over a loaded prediction catalog.

All endpoints derive from one cached CellSummary computation per cell
size, so the grid, cell-detail, and glyph views can never drift apart.
The session is immutable once loaded; concurrent readers are safe.
"""

import threading

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import grid as gridmod
from .glyph import render_glyph

MAX_COMPARE_CELLS = 4
MERCATOR_MAX_LAT = 85.05112878


def display_name(code):
    return code.replace("_", " ").title()


class ApiSession:
    """Immutable serving state: catalog, categories, config, summary cache."""

    def __init__(self, catalog, categories, config):
        self.catalog = catalog
        self.categories = list(categories)
        self.config = config
        self.model_fingerprint = catalog.model_fingerprint
        self.catalog_fingerprint = catalog.fingerprint()
        self._cache = {}
        self._lock = threading.Lock()

    def summaries_for(self, cell_size_m):
        """cell_index -> CellSummary at the given size, computed once."""
        key = float(cell_size_m)
        with self._lock:
            cached = self._cache.get(key)
            if cached is None:
                spec = gridmod.GridSpec(base_size_m=key, level=0)
                assignment = gridmod.assign_catalog(spec, self.catalog)
                cached = {s.cell_index: s
                          for s in gridmod.summarize(spec, assignment, self.catalog)}
                self._cache[key] = cached
            return cached


def _month_json(ms):
    return {
        "month": ms.month,
        "endangered": ms.endangered_count,
        "safe": ms.safe_count,
        "mean_certainty_endangered": ms.mean_certainty_endangered,
        "mean_certainty_safe": ms.mean_certainty_safe,
        "stddev_certainty": ms.stddev_certainty,
    }


def _summary_json(summary):
    i, j = summary.cell_index
    return {
        "i": i,
        "j": j,
        "vineyard_count": summary.vineyard_count,
        "member_area_ids": list(summary.member_area_ids),
        "months": [_month_json(ms) for ms in summary.months],
    }


def create_app(session):
    app = FastAPI(title="pestcast", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _bad_params(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    def check_cell_size(cell_size_m):
        cfg = session.config
        if not (cfg.cell_size_min_m <= cell_size_m <= cfg.cell_size_max_m):
            return JSONResponse(status_code=400, content={
                "detail": f"cell_size_m {cell_size_m} outside "
                          f"[{cfg.cell_size_min_m}, {cfg.cell_size_max_m}]"})
        return None

    @app.get("/api/meta")
    def meta():
        cfg = session.config
        return {
            "model_fingerprint": session.model_fingerprint,
            "catalog_fingerprint": session.catalog_fingerprint,
            "n_areas": len(session.catalog.feature_store),
            "skipped_areas": len(session.catalog.skipped),
            "cell_size_min_m": cfg.cell_size_min_m,
            "cell_size_max_m": cfg.cell_size_max_m,
            "default_cell_size_m": cfg.default_cell_size_m,
            "glyph_radius_min_px": cfg.glyph_radius_min_px,
            "glyph_radius_max_px": cfg.glyph_radius_max_px,
            "region_bbox": [cfg.lon_min, cfg.lat_min, cfg.lon_max, cfg.lat_max],
        }

    @app.get("/api/grid")
    def grid_query(cell_size_m: float = Query(...), bbox: str = Query(...)):
        err = check_cell_size(cell_size_m)
        if err is not None:
            return err
        parts = bbox.split(",")
        if len(parts) != 4:
            return JSONResponse(status_code=400,
                                content={"detail": "bbox must be lonmin,latmin,lonmax,latmax"})
        try:
            lon_min, lat_min, lon_max, lat_max = (float(p) for p in parts)
        except ValueError:
            return JSONResponse(status_code=400, content={"detail": "bbox values must be numbers"})
        if not (lon_min < lon_max and lat_min < lat_max
                and -180.0 <= lon_min and lon_max <= 180.0
                and -MERCATOR_MAX_LAT < lat_min and lat_max < MERCATOR_MAX_LAT):
            return JSONResponse(status_code=400, content={"detail": f"invalid bbox {bbox!r}"})

        from .geo import mercator_xy
        x0, y0 = mercator_xy(lon_min, lat_min)
        x1, y1 = mercator_xy(lon_max, lat_max)
        spec = gridmod.GridSpec(base_size_m=float(cell_size_m), level=0)
        i0, j0 = spec.cell_index(x0, y0)
        i1, j1 = spec.cell_index(x1, y1)
        summaries = session.summaries_for(cell_size_m)
        cells = [_summary_json(s) for (i, j), s in sorted(summaries.items())
                 if i0 <= i <= i1 and j0 <= j <= j1]
        return {"cell_size_m": cell_size_m, "cells": cells}

    @app.get("/api/cell/{i}/{j}")
    def cell_detail(i: int, j: int, cell_size_m: float = Query(...)):
        err = check_cell_size(cell_size_m)
        if err is not None:
            return err
        summary = session.summaries_for(cell_size_m).get((i, j))
        if summary is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"cell ({i}, {j}) is empty"})
        payload = _summary_json(summary)
        payload["cell_size_m"] = cell_size_m
        return payload

    @app.get("/api/compare")
    def compare(cells: str = Query(...), cell_size_m: float = Query(...)):
        err = check_cell_size(cell_size_m)
        if err is not None:
            return err
        try:
            wanted = []
            for token in cells.split(";"):
                i_s, j_s = token.split(",")
                wanted.append((int(i_s), int(j_s)))
        except ValueError:
            return JSONResponse(status_code=400,
                                content={"detail": "cells must be i1,j1;i2,j2;..."})
        if not 1 <= len(wanted) <= MAX_COMPARE_CELLS:
            return JSONResponse(status_code=400,
                                content={"detail": f"compare takes 1..{MAX_COMPARE_CELLS} cells"})
        summaries = session.summaries_for(cell_size_m)
        profiles = []
        for (i, j) in wanted:
            summary = summaries.get((i, j))
            if summary is None:
                return JSONResponse(status_code=404,
                                    content={"detail": f"cell ({i}, {j}) is empty"})
            store = session.catalog.feature_store
            members = [store[a] for a in summary.member_area_ids]
            n = len(members)
            height = sum(m.height_m for m in members) / n
            landuse = [sum(float(m.fractions[c]) for m in members) / n
                       for c in range(len(session.categories))]
            profiles.append({"i": i, "j": j, "vineyard_count": n,
                             "height_m": height, "landuse": landuse})
        return {
            "cell_size_m": cell_size_m,
            "categories": session.categories,
            "display_names": [display_name(c) for c in session.categories],
            "cells": profiles,
        }

    @app.get("/api/glyph/{i}/{j}.svg")
    def glyph_svg(i: int, j: int, cell_size_m: float = Query(...),
                  radius_px: float = Query(...)):
        err = check_cell_size(cell_size_m)
        if err is not None:
            return err
        cfg = session.config
        if not (cfg.glyph_radius_min_px <= radius_px <= cfg.glyph_radius_max_px):
            return JSONResponse(status_code=400, content={
                "detail": f"radius_px {radius_px} outside "
                          f"[{cfg.glyph_radius_min_px}, {cfg.glyph_radius_max_px}]"})
        summary = session.summaries_for(cell_size_m).get((i, j))
        if summary is None:
            return JSONResponse(status_code=404,
                                content={"detail": f"cell ({i}, {j}) is empty"})
        svg = render_glyph(summary, radius_px, cell_size_m=cell_size_m)
        return Response(content=svg, media_type="image/svg+xml")

    return app
