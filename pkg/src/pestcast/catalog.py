"""Immutable per-(area, month) prediction catalog.

Each area's environment features (height, land-use fractions) are
computed once; only the month component varies across its 12 vectors.
Areas whose centroid falls outside the elevation raster or on a nodata
cell are skipped and listed in a warnings manifest instead of failing
the whole catalog.
"""

import csv
import hashlib
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .ensemble import predict_ensemble_batch
from .features import (FEATURE_DIM, NodataError, OutsideExtentError,
                       height_at, landuse_fractions, make_feature_vector)
from .ingest import REQUIRED_CATEGORY_COUNT

CATALOG_HEADER = ["area_id", "month", "endangered", "certainty"]
FEATURE_STORE_HEADER = (["area_id", "lon", "lat", "height_m"]
                        + [f"lu_{i}" for i in range(1, REQUIRED_CATEGORY_COUNT + 1)])


@dataclass(frozen=True)
class Prediction:
    area_id: str
    month: int
    endangered: bool
    certainty: float


@dataclass(frozen=True)
class AreaFeatures:
    centroid: tuple
    height_m: float
    fractions: np.ndarray


class PredictionCatalog:
    """Read-only map (area_id, month) -> Prediction plus per-area features."""

    def __init__(self, predictions, feature_store, model_fingerprint, skipped):
        self._predictions = MappingProxyType(dict(predictions))
        self._features = MappingProxyType(dict(feature_store))
        self.model_fingerprint = model_fingerprint
        self.skipped = tuple(skipped)

    @property
    def predictions(self):
        return self._predictions

    @property
    def feature_store(self):
        return self._features

    def area_ids(self):
        return sorted(self._features)

    def get(self, area_id, month):
        return self._predictions[(area_id, month)]

    def fingerprint(self):
        h = hashlib.sha256()
        for (area_id, month) in sorted(self._predictions):
            p = self._predictions[(area_id, month)]
            h.update(f"{area_id},{month},{int(p.endangered)},{p.certainty!r}".encode())
        h.update(self.model_fingerprint.encode())
        return h.hexdigest()


def build_catalog(model, areas, landuse, elevation, radius_m=5000.0, step_divisor=64):
    """Predict all 12 months for every area; skip-and-warn on elevation gaps."""
    usable = []
    feature_store = {}
    skipped = []
    for area in sorted(areas, key=lambda a: a.area_id):
        try:
            height = height_at(area.centroid, elevation)
        except OutsideExtentError:
            skipped.append((area.area_id, "centroid outside elevation extent"))
            continue
        except NodataError:
            skipped.append((area.area_id, "elevation nodata at centroid"))
            continue
        fractions = landuse_fractions(area.centroid, radius_m, landuse, step_divisor)
        feature_store[area.area_id] = AreaFeatures(
            centroid=area.centroid, height_m=height, fractions=fractions)
        usable.append(area.area_id)

    predictions = {}
    if usable:
        X = np.empty((len(usable) * 12, FEATURE_DIM), dtype=np.float64)
        keys = []
        row = 0
        for area_id in usable:
            feats = feature_store[area_id]
            for month in range(1, 13):
                X[row] = make_feature_vector(month, feats.height_m, feats.fractions)
                keys.append((area_id, month))
                row += 1
        endangered, prob = predict_ensemble_batch(model, X)
        certainty = np.where(endangered, prob, 1.0 - prob)
        for (area_id, month), e, c in zip(keys, endangered, certainty):
            predictions[(area_id, month)] = Prediction(
                area_id=area_id, month=month, endangered=bool(e), certainty=float(c))

    return PredictionCatalog(predictions=predictions, feature_store=feature_store,
                             model_fingerprint=model.fingerprint(), skipped=skipped)


def write_catalog(catalog, csv_path, features_path, warnings_path, meta_path=None):
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CATALOG_HEADER)
        for key in sorted(catalog.predictions):
            p = catalog.predictions[key]
            writer.writerow([p.area_id, p.month, int(p.endangered), repr(p.certainty)])
    with open(features_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURE_STORE_HEADER)
        for area_id in catalog.area_ids():
            f = catalog.feature_store[area_id]
            writer.writerow([area_id, repr(f.centroid[0]), repr(f.centroid[1]),
                             repr(f.height_m)] + [repr(float(v)) for v in f.fractions])
    with open(warnings_path, "w", encoding="utf-8") as fh:
        for area_id, reason in catalog.skipped:
            fh.write(f"{area_id}\t{reason}\n")
    if meta_path is not None:
        with open(meta_path, "w", encoding="utf-8") as fh:
            fh.write(f"model_fingerprint {catalog.model_fingerprint}\n")


def read_catalog(csv_path, features_path, warnings_path=None, meta_path=None):
    feature_store = {}
    with open(features_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != FEATURE_STORE_HEADER:
            raise ValueError(f"{features_path}: unexpected feature store header")
        for row in reader:
            area_id, lon, lat, height = row[:4]
            feature_store[area_id] = AreaFeatures(
                centroid=(float(lon), float(lat)), height_m=float(height),
                fractions=np.array([float(v) for v in row[4:]], dtype=np.float64))

    predictions = {}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CATALOG_HEADER:
            raise ValueError(f"{csv_path}: unexpected catalog header")
        for area_id, month, endangered, certainty in reader:
            predictions[(area_id, int(month))] = Prediction(
                area_id=area_id, month=int(month),
                endangered=endangered == "1", certainty=float(certainty))

    skipped = []
    if warnings_path is not None:
        try:
            with open(warnings_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        area_id, _, reason = line.rstrip("\n").partition("\t")
                        skipped.append((area_id, reason))
        except FileNotFoundError:
            pass

    fingerprint = ""
    if meta_path is not None:
        try:
            with open(meta_path, encoding="utf-8") as fh:
                for line in fh:
                    key, _, value = line.strip().partition(" ")
                    if key == "model_fingerprint":
                        fingerprint = value
        except FileNotFoundError:
            pass
    return PredictionCatalog(predictions=predictions, feature_store=feature_store,
                             model_fingerprint=fingerprint, skipped=skipped)
