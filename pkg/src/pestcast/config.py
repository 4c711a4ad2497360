"""Application configuration: a flat key=value text file over defaults."""

import datetime
from dataclasses import dataclass, fields

from .synth import SynthConfig


@dataclass
class AppConfig:
    # region
    lon_min: float = 7.4
    lat_min: float = 47.45
    lon_max: float = 8.8
    lat_max: float = 48.45
    # grid
    cell_size_min_m: float = 500.0
    cell_size_max_m: float = 200000.0
    default_cell_size_m: float = 12500.0
    # glyph
    glyph_radius_min_px: float = 16.0
    glyph_radius_max_px: float = 128.0
    # category manifest (synth writes one next to its outputs)
    manifest_path: str = ""
    # labeling and learning
    percentile: float = 0.8
    smote_k: int = 5
    cv_folds: int = 10
    # synthetic generator
    station_count: int = 867
    area_count: int = 1700
    season_strength: float = 6.0
    wood_strength: float = 6.0
    altitude_strength: float = 0.5
    wood_threshold: float = 0.25
    date_start: str = "2014-01-01"
    date_end: str = "2017-12-31"
    landuse_radius_m: float = 5000.0
    step_divisor: int = 64

    @property
    def bbox(self):
        return (self.lon_min, self.lat_min, self.lon_max, self.lat_max)

    def synth_config(self):
        return SynthConfig(
            station_count=self.station_count,
            area_count=self.area_count,
            bbox=self.bbox,
            date_start=datetime.date.fromisoformat(self.date_start),
            date_end=datetime.date.fromisoformat(self.date_end),
            season_strength=self.season_strength,
            wood_strength=self.wood_strength,
            altitude_strength=self.altitude_strength,
            wood_threshold=self.wood_threshold,
            landuse_radius_m=self.landuse_radius_m,
            step_divisor=self.step_divisor,
        )


def load_config(path=None):
    """Defaults, optionally overridden by ``key = value`` lines."""
    cfg = AppConfig()
    if path is None:
        return cfg
    types = {f.name: f.type for f in fields(AppConfig)}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or key not in types:
                raise ValueError(f"{path}:{line_no}: unknown config line {raw.strip()!r}")
            try:
                setattr(cfg, key, types[key](value))
            except ValueError:
                raise ValueError(f"{path}:{line_no}: bad value for {key}: {value!r}") from None
    return cfg
