"""Command-line pipeline driver.

Subcommands: synth, build-instances, train, evaluate, predict, render,
serve. Exit codes: 0 success, 2 validation error (bad inputs or
arguments), 1 internal error.
"""

import argparse
import json
import os
import sys

from . import catalog as catmod
from . import ensemble, features, grid, ingest, synth
from .config import load_config
from .glyph import render_glyph


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="key=value config file")


def build_parser():
    parser = argparse.ArgumentParser(prog="pestcast")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the four synthetic input files")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)

    p = sub.add_parser("build-instances", help="labeled monthly instances from raw inputs")
    p.add_argument("--observations", required=True)
    p.add_argument("--landuse", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--elevation", required=True)
    p.add_argument("--out", required=True, help="instances CSV path")
    p.add_argument("--summary-out", default=None, help="labeling summary JSON path")
    _add_common(p)

    p = sub.add_parser("train", help="train the stacked ensemble")
    p.add_argument("--instances", required=True)
    p.add_argument("--out", required=True, help="model container path")
    _add_common(p)

    p = sub.add_parser("evaluate", help="cross-validated kappa report")
    p.add_argument("--instances", required=True)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-text", required=True)
    _add_common(p)

    p = sub.add_parser("predict", help="build the (area, month) prediction catalog")
    p.add_argument("--model", required=True)
    p.add_argument("--areas", required=True)
    p.add_argument("--landuse", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--elevation", required=True)
    p.add_argument("--out-dir", required=True)
    _add_common(p)

    p = sub.add_parser("render", help="render one glyph SVG per non-empty cell")
    p.add_argument("--catalog-dir", required=True)
    p.add_argument("--cell-size-m", type=float, required=True)
    p.add_argument("--radius-px", type=float, default=64.0)
    p.add_argument("--out-dir", required=True)
    _add_common(p)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--catalog-dir", required=True)
    _add_common(p)
    return parser


def cmd_synth(args, cfg):
    os.makedirs(args.out, exist_ok=True)
    data = synth.generate_synthetic(cfg.synth_config(), args.seed)
    ingest.write_observations(data.observations, os.path.join(args.out, "observations.csv"))
    ingest.write_landuse(data.landuse, os.path.join(args.out, "landuse.geojson"))
    ingest.write_elevation(data.elevation, os.path.join(args.out, "elevation.asc"))
    ingest.write_areas(data.areas, os.path.join(args.out, "areas.geojson"))
    ingest.write_manifest(data.landuse.categories, os.path.join(args.out, "manifest.txt"))
    print(f"wrote {len(data.observations)} observations, "
          f"{len(data.landuse.polygons)} land-use polygons, "
          f"{len(data.areas)} areas to {args.out}")
    return 0


def cmd_build_instances(args, cfg):
    categories = ingest.load_manifest(args.manifest)
    observations = ingest.parse_observations(args.observations)
    landuse = ingest.parse_landuse(args.landuse, categories)
    elevation = ingest.parse_elevation(args.elevation)
    instances, summary = features.build_instances(
        observations, landuse, elevation, percentile=cfg.percentile,
        radius_m=cfg.landuse_radius_m, step_divisor=cfg.step_divisor)
    features.write_instances(instances, args.out)
    if args.summary_out:
        with open(args.summary_out, "w", encoding="utf-8") as fh:
            json.dump({"threshold_value": summary.threshold_value,
                       "n_total": summary.n_total,
                       "n_positive": summary.n_positive,
                       "n_negative": summary.n_negative}, fh, indent=2)
    print(f"wrote {summary.n_total} instances "
          f"({summary.n_positive} positive / {summary.n_negative} negative) to {args.out}")
    return 0


def cmd_train(args, cfg):
    instances = features.read_instances(args.instances)
    model = ensemble.train_stacked_ensemble(instances, None, seed=args.seed)
    ensemble.save_model(model, args.out)
    print(f"trained on {len(instances)} instances, model {model.fingerprint()[:12]} "
          f"-> {args.out}")
    return 0


def cmd_evaluate(args, cfg):
    instances = features.read_instances(args.instances)
    folds = args.folds if args.folds is not None else cfg.cv_folds
    report = ensemble.cross_validate(instances, folds=folds, seed=args.seed)
    with open(args.out_csv, "w", encoding="utf-8") as fh:
        fh.write("classifier,mean_kappa\n")
        for name in report.ranking:
            fh.write(f"{name},{report.mean_kappa[name]:.6f}\n")
    width = max(len(n) for n in report.ranking) + 2
    lines = ["Classifier".ljust(width) + "Cohen's kappa",
             "-" * (width + 13)]
    for name in report.ranking:
        lines.append(name.ljust(width) + f"{report.mean_kappa[name]:.3f}")
    text = "\n".join(lines) + "\n"
    with open(args.out_text, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(text, end="")
    return 0


def cmd_predict(args, cfg):
    model = ensemble.load_model(args.model)
    categories = ingest.load_manifest(args.manifest)
    areas = ingest.parse_areas(args.areas)
    landuse = ingest.parse_landuse(args.landuse, categories)
    elevation = ingest.parse_elevation(args.elevation)
    catalog = catmod.build_catalog(model, areas, landuse, elevation,
                                   radius_m=cfg.landuse_radius_m,
                                   step_divisor=cfg.step_divisor)
    os.makedirs(args.out_dir, exist_ok=True)
    catmod.write_catalog(catalog,
                         os.path.join(args.out_dir, "catalog.csv"),
                         os.path.join(args.out_dir, "features.csv"),
                         os.path.join(args.out_dir, "warnings.txt"),
                         os.path.join(args.out_dir, "catalog_meta.txt"))
    ingest.write_manifest(categories, os.path.join(args.out_dir, "manifest.txt"))
    print(f"catalog: {len(catalog.predictions)} predictions over "
          f"{len(catalog.feature_store)} areas ({len(catalog.skipped)} skipped) "
          f"-> {args.out_dir}")
    return 0


def load_catalog_dir(catalog_dir):
    catalog = catmod.read_catalog(
        os.path.join(catalog_dir, "catalog.csv"),
        os.path.join(catalog_dir, "features.csv"),
        os.path.join(catalog_dir, "warnings.txt"),
        os.path.join(catalog_dir, "catalog_meta.txt"))
    categories = ingest.load_manifest(os.path.join(catalog_dir, "manifest.txt"))
    return catalog, categories


def cmd_render(args, cfg):
    catalog, _ = load_catalog_dir(args.catalog_dir)
    if not (cfg.cell_size_min_m <= args.cell_size_m <= cfg.cell_size_max_m):
        raise ValueError(f"cell size {args.cell_size_m} outside "
                         f"[{cfg.cell_size_min_m}, {cfg.cell_size_max_m}]")
    if not (cfg.glyph_radius_min_px <= args.radius_px <= cfg.glyph_radius_max_px):
        raise ValueError(f"radius {args.radius_px} outside "
                         f"[{cfg.glyph_radius_min_px}, {cfg.glyph_radius_max_px}]")
    spec = grid.GridSpec(base_size_m=args.cell_size_m, level=0)
    assignment = grid.assign_catalog(spec, catalog)
    summaries = grid.summarize(spec, assignment, catalog)
    os.makedirs(args.out_dir, exist_ok=True)
    for summary in summaries:
        i, j = summary.cell_index
        svg = render_glyph(summary, args.radius_px, cell_size_m=spec.cell_size_m)
        with open(os.path.join(args.out_dir, f"glyph_{i}_{j}.svg"), "w",
                  encoding="utf-8") as fh:
            fh.write(svg)
    grid.write_summaries(summaries, spec, os.path.join(args.out_dir, "summaries.csv"))
    print(f"rendered {len(summaries)} glyphs at {spec.cell_size_m} m -> {args.out_dir}")
    return 0


def cmd_serve(args, cfg):
    import uvicorn

    from .service import ApiSession, create_app

    catalog, categories = load_catalog_dir(args.catalog_dir)
    session = ApiSession(catalog, categories, cfg)
    app = create_app(session)
    listen = os.environ.get("PESTCAST_LISTEN", "127.0.0.1:8000")
    host, _, port = listen.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "build-instances": cmd_build_instances,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "render": cmd_render,
    "serve": cmd_serve,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ingest.ParseError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
