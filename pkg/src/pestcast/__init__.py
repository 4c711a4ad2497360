"""pestcast: spatio-temporal infestation risk prediction and map glyphs.

Pipeline: ingest (or synthesize) observations, land use, and elevation;
build labeled monthly instances; balance with SMOTE; train a stacked
ensemble; predict per-area-per-month risk; aggregate onto a stable map
grid; render clock glyphs; serve everything over HTTP.
"""

__version__ = "0.1.0"
