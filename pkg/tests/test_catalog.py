import numpy as np
import pytest

from pestcast.catalog import build_catalog, read_catalog, write_catalog
from pestcast.ensemble import predict_ensemble
from pestcast.features import make_feature_vector
from pestcast.ingest import AreaPolygon, ElevationGrid


def test_one_area_gives_twelve_predictions(small_world, small_model):
    cfg, data = small_world
    catalog = build_catalog(small_model, data.areas[:1], data.landuse, data.elevation)
    assert len(catalog.predictions) == 12
    area_id = data.areas[0].area_id
    assert sorted(catalog.predictions) == [(area_id, m) for m in range(1, 13)]


def test_catalog_matches_direct_prediction(small_world, small_model, small_catalog):
    cfg, data = small_world
    area = sorted(data.areas, key=lambda a: a.area_id)[3]
    feats = small_catalog.feature_store[area.area_id]
    for month in (1, 6, 10):
        fv = make_feature_vector(month, feats.height_m, feats.fractions)
        direct = predict_ensemble(small_model, fv)
        stored = small_catalog.get(area.area_id, month)
        assert stored.endangered == direct.endangered
        # batched and single-row BLAS paths may differ in the last ulp
        assert stored.certainty == pytest.approx(direct.certainty, rel=1e-12)


def test_completeness_and_certainty_range(small_world, small_catalog):
    cfg, data = small_world
    expected_keys = {(a.area_id, m) for a in data.areas for m in range(1, 13)}
    assert set(small_catalog.predictions) == expected_keys
    for pred in small_catalog.predictions.values():
        assert 0.5 <= pred.certainty <= 1.0


def test_feature_vectors_differ_only_in_month(small_catalog):
    # the stored per-area features are month-invariant by construction
    for area_id, feats in small_catalog.feature_store.items():
        assert feats.fractions.shape == (83,)
        assert np.isfinite(feats.height_m)


def test_skip_and_warn_on_elevation_gaps(small_world, small_model):
    cfg, data = small_world
    inside = data.areas[0]
    ring = ((20.0, 10.0), (20.001, 10.0), (20.001, 10.001), (20.0, 10.001), (20.0, 10.0))
    outside = AreaPolygon.from_ring("A_OUT", ring)
    # area whose centroid sits on a nodata hole
    hole_grid = ElevationGrid(
        xllcorner=data.elevation.xllcorner, yllcorner=data.elevation.yllcorner,
        cell_size_deg=data.elevation.cell_size_deg, ncols=data.elevation.ncols,
        nrows=data.elevation.nrows, values=data.elevation.values.copy(),
        nodata=data.elevation.nodata)
    lon, lat = inside.centroid
    col = int((lon - hole_grid.xllcorner) / hole_grid.cell_size_deg)
    row = int((lat - hole_grid.yllcorner) / hole_grid.cell_size_deg)
    hole_grid.values[hole_grid.nrows - 1 - row, col] = hole_grid.nodata

    catalog = build_catalog(small_model, [inside, outside], data.landuse, hole_grid)
    assert len(catalog.feature_store) == 0
    reasons = dict(catalog.skipped)
    assert "A_OUT" in reasons and "outside" in reasons["A_OUT"]
    assert inside.area_id in reasons and "nodata" in reasons[inside.area_id]


def test_rebuild_is_referentially_transparent(small_world, small_model, small_catalog):
    cfg, data = small_world
    again = build_catalog(small_model, data.areas, data.landuse, data.elevation)
    assert again.predictions == small_catalog.predictions
    assert again.fingerprint() == small_catalog.fingerprint()


def test_catalog_round_trip(tmp_path, small_catalog):
    paths = [str(tmp_path / n) for n in
             ("catalog.csv", "features.csv", "warnings.txt", "meta.txt")]
    write_catalog(small_catalog, *paths)
    loaded = read_catalog(*paths)
    assert loaded.predictions == small_catalog.predictions
    assert loaded.model_fingerprint == small_catalog.model_fingerprint
    assert set(loaded.feature_store) == set(small_catalog.feature_store)
    for area_id, feats in small_catalog.feature_store.items():
        got = loaded.feature_store[area_id]
        assert got.centroid == feats.centroid
        assert got.height_m == feats.height_m
        assert np.array_equal(got.fractions, feats.fractions)
    assert loaded.fingerprint() == small_catalog.fingerprint()


def test_catalog_is_immutable(small_catalog):
    with pytest.raises(TypeError):
        small_catalog.predictions[("X", 1)] = None
