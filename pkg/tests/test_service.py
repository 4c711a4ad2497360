import concurrent.futures

import numpy as np
import pytest
from fastapi.testclient import TestClient

from pestcast.config import AppConfig
from pestcast.glyph import render_glyph
from pestcast.service import ApiSession, create_app
from pestcast.synth import CATEGORY_CODES

REGION_BBOX = "7.4,47.45,8.8,48.45"


@pytest.fixture(scope="module")
def client(small_catalog):
    session = ApiSession(small_catalog, CATEGORY_CODES, AppConfig())
    return TestClient(create_app(session)), session


class TestGrid:
    def test_empty_bbox_gives_empty_list(self, client):
        c, _ = client
        r = c.get("/api/grid", params={"cell_size_m": 12500, "bbox": "0.1,0.1,0.2,0.2"})
        assert r.status_code == 200
        assert r.json()["cells"] == []

    def test_whole_region_at_max_size_is_single_overview_cell(self, client, small_catalog):
        c, _ = client
        r = c.get("/api/grid", params={"cell_size_m": 200000, "bbox": REGION_BBOX})
        cells = r.json()["cells"]
        assert len(cells) == 1
        assert cells[0]["vineyard_count"] == len(small_catalog.feature_store)

    def test_overlapping_bboxes_return_identical_shared_cells(self, client):
        c, _ = client
        r1 = c.get("/api/grid", params={"cell_size_m": 12500, "bbox": "7.4,47.45,8.4,48.2"})
        r2 = c.get("/api/grid", params={"cell_size_m": 12500, "bbox": "7.6,47.6,8.8,48.45"})
        cells1 = {(cell["i"], cell["j"]): cell for cell in r1.json()["cells"]}
        cells2 = {(cell["i"], cell["j"]): cell for cell in r2.json()["cells"]}
        shared = set(cells1) & set(cells2)
        assert shared
        for key in shared:
            assert cells1[key] == cells2[key]

    def test_counts_sum_to_vineyard_count_every_month(self, client):
        c, _ = client
        r = c.get("/api/grid", params={"cell_size_m": 12500, "bbox": REGION_BBOX})
        for cell in r.json()["cells"]:
            assert len(cell["months"]) == 12
            for ms in cell["months"]:
                assert ms["endangered"] + ms["safe"] == cell["vineyard_count"]

    @pytest.mark.parametrize("params", [
        {"cell_size_m": 12500, "bbox": "8.0,48.0,7.5,48.2"},   # inverted lon
        {"cell_size_m": 12500, "bbox": "7.5,48.0,8.0"},        # wrong arity
        {"cell_size_m": 12500, "bbox": "a,b,c,d"},             # not numbers
        {"cell_size_m": 100, "bbox": REGION_BBOX},             # size under min
        {"cell_size_m": 300000, "bbox": REGION_BBOX},          # size over max
        {"bbox": REGION_BBOX},                                 # missing size
        {"cell_size_m": "abc", "bbox": REGION_BBOX},           # non-numeric size
    ])
    def test_bad_params_give_400(self, client, params):
        c, _ = client
        assert c.get("/api/grid", params=params).status_code == 400


class TestCellDetail:
    def test_detail_matches_grid_summary(self, client):
        c, _ = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        for cell in grid[:5]:
            detail = c.get(f"/api/cell/{cell['i']}/{cell['j']}",
                           params={"cell_size_m": 12500}).json()
            assert detail["months"] == cell["months"]
            assert detail["member_area_ids"] == cell["member_area_ids"]
            assert detail["vineyard_count"] == cell["vineyard_count"]

    def test_stddev_present_and_nonnegative(self, client):
        c, _ = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        detail = c.get(f"/api/cell/{grid[0]['i']}/{grid[0]['j']}",
                       params={"cell_size_m": 12500}).json()
        for ms in detail["months"]:
            assert ms["stddev_certainty"] >= 0.0

    def test_empty_cell_404(self, client):
        c, _ = client
        r = c.get("/api/cell/9999/9999", params={"cell_size_m": 12500})
        assert r.status_code == 404


class TestCompare:
    def test_cell_compared_with_itself_is_identical(self, client):
        c, _ = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        i, j = grid[0]["i"], grid[0]["j"]
        r = c.get("/api/compare", params={"cells": f"{i},{j};{i},{j}",
                                          "cell_size_m": 12500})
        cells = r.json()["cells"]
        assert cells[0] == cells[1]

    def test_profile_has_83_landuse_plus_height(self, client):
        c, _ = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        i, j = grid[0]["i"], grid[0]["j"]
        r = c.get("/api/compare", params={"cells": f"{i},{j}", "cell_size_m": 12500}).json()
        assert len(r["categories"]) == 83
        assert len(r["display_names"]) == 83
        assert r["display_names"][r["categories"].index("FOREST")] == "Forest"
        profile = r["cells"][0]
        assert len(profile["landuse"]) == 83
        assert "height_m" in profile

    def test_profile_means_match_feature_store_oracle(self, client, small_catalog):
        c, _ = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        cell = grid[0]
        r = c.get("/api/compare", params={"cells": f"{cell['i']},{cell['j']}",
                                          "cell_size_m": 12500}).json()
        members = [small_catalog.feature_store[a] for a in cell["member_area_ids"]]
        expected = np.mean([m.fractions for m in members], axis=0)
        assert r["cells"][0]["landuse"] == pytest.approx(expected.tolist())
        assert r["cells"][0]["height_m"] == pytest.approx(
            np.mean([m.height_m for m in members]))

    def test_limits_and_errors(self, client):
        c, _ = client
        five = ";".join(f"{k},0" for k in range(5))
        assert c.get("/api/compare", params={"cells": five,
                                             "cell_size_m": 12500}).status_code == 400
        assert c.get("/api/compare", params={"cells": "not-cells",
                                             "cell_size_m": 12500}).status_code == 400
        assert c.get("/api/compare", params={"cells": "9999,9999",
                                             "cell_size_m": 12500}).status_code == 404


class TestGlyphEndpoint:
    def test_body_equals_renderer_output(self, client):
        c, session = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        cell = grid[0]
        r = c.get(f"/api/glyph/{cell['i']}/{cell['j']}.svg",
                  params={"cell_size_m": 12500, "radius_px": 48})
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("image/svg+xml")
        summary = session.summaries_for(12500)[(cell["i"], cell["j"])]
        assert r.text == render_glyph(summary, 48, cell_size_m=12500.0)
        assert f'data-cell-i="{cell["i"]}"' in r.text

    def test_radius_bounds(self, client):
        c, _ = client
        grid = c.get("/api/grid", params={"cell_size_m": 12500,
                                          "bbox": REGION_BBOX}).json()["cells"]
        cell = grid[0]
        for radius in (8, 1000):
            r = c.get(f"/api/glyph/{cell['i']}/{cell['j']}.svg",
                      params={"cell_size_m": 12500, "radius_px": radius})
            assert r.status_code == 400
        assert c.get("/api/glyph/9999/9999.svg",
                     params={"cell_size_m": 12500, "radius_px": 48}).status_code == 404


class TestConsistencyUnderConcurrency:
    def test_32_workers_identical_to_serial(self, client):
        c, _ = client
        meta_before = c.get("/api/meta").json()
        requests = []
        for k in range(64):
            size = [200000, 12500, 6250][k % 3]
            requests.append(("/api/grid", {"cell_size_m": size, "bbox": REGION_BBOX}))
        serial = [c.get(path, params=p).text for path, p in requests]

        def fetch(args):
            path, p = args
            return c.get(path, params=p).text

        with concurrent.futures.ThreadPoolExecutor(max_workers=32) as pool:
            concurrent_results = list(pool.map(fetch, requests))
        assert concurrent_results == serial
        assert c.get("/api/meta").json() == meta_before

    def test_meta_content(self, client, small_catalog):
        c, _ = client
        meta = c.get("/api/meta").json()
        assert meta["model_fingerprint"] == small_catalog.model_fingerprint
        assert meta["n_areas"] == len(small_catalog.feature_store)
        assert meta["cell_size_min_m"] == 500.0
        assert meta["glyph_radius_max_px"] == 128.0
