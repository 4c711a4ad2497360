import numpy as np
import pytest

from pestcast.features import LabeledInstance
from pestcast.ingest import LandUseMap, LandUsePolygon
from pestcast.synth import CATEGORY_CODES


def make_instances(X, y):
    """Wrap plain arrays as LabeledInstance records for learn-level APIs."""
    out = []
    for i, (row, label) in enumerate(zip(X, y)):
        out.append(LabeledInstance(
            station_id=f"T{i:04d}", year=2016, month=int(row[0]) if 1 <= row[0] <= 12 else 1,
            score=float(label), label=int(label), features=np.asarray(row, dtype=np.float64)))
    return out


def square_ring(lon0, lat0, size):
    return ((lon0, lat0), (lon0 + size, lat0), (lon0 + size, lat0 + size),
            (lon0, lat0 + size), (lon0, lat0))


def landuse_of(polys):
    return LandUseMap(polygons=[LandUsePolygon(ring=r, category=c) for r, c in polys],
                      categories=list(CATEGORY_CODES))


@pytest.fixture(scope="session")
def small_world():
    """Small but complete synthetic world shared by pipeline-level tests."""
    from pestcast.synth import SynthConfig, generate_synthetic
    cfg = SynthConfig(station_count=120, area_count=90, cluster_count=12)
    return cfg, generate_synthetic(cfg, 11)


@pytest.fixture(scope="session")
def small_instances(small_world):
    from pestcast.features import build_instances
    cfg, data = small_world
    instances, summary = build_instances(data.observations, data.landuse, data.elevation)
    return instances, summary


@pytest.fixture(scope="session")
def small_model(small_instances):
    from pestcast.ensemble import train_stacked_ensemble
    instances, _ = small_instances
    return train_stacked_ensemble(instances, None, seed=3)


@pytest.fixture(scope="session")
def small_catalog(small_world, small_model):
    from pestcast.catalog import build_catalog
    cfg, data = small_world
    return build_catalog(small_model, data.areas, data.landuse, data.elevation)
