"""Command-line harness: compress/decompress single files and sweep pipeline
variants over an image directory into CSV/JSON reports."""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor

from .container import deserialize, serialize
from .errors import AiotcError
from .images import load_image_file, serialize_pgm
from .metrics import RunMetrics, format_ratio, rmse, sample_resources, timed
from .pipelines import PipelineConfig, decompress, run

IMAGE_SUFFIXES = (".pgm", ".png", ".jpg", ".jpeg")

CSV_COLUMNS = [
    "image", "variant", "params", "original_bytes",
    "compressed_payload_bytes", "compressed_total_bytes", "ratio",
    "time_s", "iterations", "rmse", "cpu_percent", "mem_mb", "error",
]


def _config_from_args(args) -> PipelineConfig:
    kwargs = {"variant": args.variant, "backend": args.backend}
    if args.decimals is not None:
        kwargs["decimals"] = args.decimals
    if args.levels is not None:
        kwargs["levels"] = args.levels
    if args.group_size is not None:
        kwargs["group_size"] = args.group_size
    if args.retain is not None:
        kwargs["retain"] = args.retain
    return PipelineConfig(**kwargs)


def _measure(img, cfg, with_resources: bool):
    """Run a pipeline on an in-memory image; file I/O stays outside the clock."""
    if with_resources:
        (result, wall), cpu, mem, samples = sample_resources(
            lambda: timed(lambda: run(img, cfg))
        )
    else:
        result, wall = timed(lambda: run(img, cfg))
        cpu = mem = None
        samples = []
    artifact, recon, trace = result
    blob = serialize(artifact)
    metrics = RunMetrics(
        original_bytes=img.width * img.height,
        compressed_bytes=len(artifact.payload.data),
        compressed_bytes_total=len(blob),
        wall_time_s=wall,
        iterations=trace.iterations,
        rmse=rmse(img, recon),
        cpu_percent=cpu,
        mem_mb=mem,
        samples=samples,
    )
    return artifact, blob, metrics


def cmd_compress(args) -> int:
    try:
        img = load_image_file(args.input)
        cfg = _config_from_args(args)
        artifact, blob, metrics = _measure(img, cfg, with_resources=True)
        with open(args.output, "wb") as fh:
            fh.write(blob)
    except (AiotcError, OSError, ValueError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1
    out = {"input": args.input, "output": args.output,
           "variant": cfg.variant, "backend": cfg.backend}
    out.update(metrics.to_dict())
    print(json.dumps(out, indent=2))
    return 0


def cmd_decompress(args) -> int:
    try:
        with open(args.input, "rb") as fh:
            artifact = deserialize(fh.read())
        img = decompress(artifact)
        with open(args.output, "wb") as fh:
            fh.write(serialize_pgm(img))
    except (AiotcError, OSError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1
    print(json.dumps({"output": args.output, "width": img.width,
                      "height": img.height, "variant": artifact.variant}))
    return 0


def _bench_cell(path: str, cfg_kwargs: dict, with_resources: bool) -> dict:
    """One (image, variant, params) bench row; errors become error rows."""
    cfg = PipelineConfig(**cfg_kwargs)
    params = _params_label(cfg)
    row = {c: "" for c in CSV_COLUMNS}
    row.update(image=os.path.basename(path), variant=cfg.variant, params=params)
    try:
        img = load_image_file(path)
        _, blob, metrics = _measure(img, cfg, with_resources)
        row.update(
            original_bytes=metrics.original_bytes,
            compressed_payload_bytes=metrics.compressed_bytes,
            compressed_total_bytes=metrics.compressed_bytes_total,
            ratio=format_ratio(metrics.ratio),
            time_s=round(metrics.wall_time_s, 6),
            iterations=metrics.iterations,
            rmse=round(metrics.rmse, 6),
            cpu_percent="" if metrics.cpu_percent is None else round(metrics.cpu_percent, 2),
            mem_mb="" if metrics.mem_mb is None else round(metrics.mem_mb, 3),
        )
    except (AiotcError, OSError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _params_label(cfg: PipelineConfig) -> str:
    if cfg.variant == "optimized":
        return f"n={cfg.decimals},group_size={cfg.group_size}"
    if cfg.variant == "cardinality":
        return f"levels={cfg.levels}"
    if cfg.variant == "pca":
        return f"retain={cfg.retain}"
    return ""


def cmd_bench(args) -> int:
    images = sorted(
        os.path.join(args.dataset, name)
        for name in os.listdir(args.dataset)
        if name.lower().endswith(IMAGE_SUFFIXES)
    )
    if not images:
        print(f"no images found under {args.dataset}", file=sys.stderr)
        return 1

    cells: list[tuple[str, dict]] = []
    for path in images:
        for variant in args.variants:
            base = {"variant": variant, "backend": args.backend}
            if variant == "optimized":
                for n in args.thresholds:
                    cells.append((path, {**base, "decimals": n,
                                         "group_size": args.group_size}))
            elif variant == "cardinality":
                cells.append((path, {**base, "levels": args.levels}))
            elif variant == "pca":
                cells.append((path, {**base, "retain": args.retain}))
            else:
                cells.append((path, base))

    # Per-row CPU/memory readings are only meaningful without concurrent
    # runs in the same process tree, so resource columns require jobs=1.
    with_resources = args.jobs == 1
    if args.jobs > 1:
        print(f"jobs={args.jobs}: cpu/mem columns are skipped", file=sys.stderr)
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(
                _bench_cell,
                [c[0] for c in cells],
                [c[1] for c in cells],
                [False] * len(cells),
            ))
    else:
        rows = [_bench_cell(path, kw, with_resources) for path, kw in cells]

    rows.sort(key=lambda r: (r["image"], r["variant"], r["params"]))
    aggregate = _aggregate(rows)
    report = {
        "environment": {
            "python": platform.python_version(),
            "machine": platform.machine(),
            "system": platform.system(),
            "cpus": os.cpu_count(),
        },
        "config": {
            "dataset": args.dataset,
            "variants": args.variants,
            "thresholds": args.thresholds,
            "levels": args.levels,
            "retain": args.retain,
            "group_size": args.group_size,
            "backend": args.backend,
            "jobs": args.jobs,
        },
        "aggregate": aggregate,
    }

    if args.format == "json":
        report["rows"] = rows
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2)
    else:
        with open(args.report, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
        agg_path = os.path.splitext(args.report)[0] + ".json"
        with open(agg_path, "w") as fh:
            json.dump(report, fh, indent=2)

    ok = sum(1 for r in rows if not r["error"])
    failed = len(rows) - ok
    print(f"{ok} runs succeeded, {failed} failed; report at {args.report}")
    return 0 if ok else 1


def _aggregate(rows) -> dict:
    agg: dict[str, dict] = {}
    for variant in sorted({r["variant"] for r in rows}):
        good = [r for r in rows if r["variant"] == variant and not r["error"]]
        if not good:
            agg[variant] = {"runs": 0, "failures":
                            sum(1 for r in rows if r["variant"] == variant)}
            continue
        ratios = [r["original_bytes"] / r["compressed_payload_bytes"] for r in good]
        times = [r["time_s"] for r in good]
        rmses = [r["rmse"] for r in good]
        agg[variant] = {
            "runs": len(good),
            "failures": sum(1 for r in rows if r["variant"] == variant) - len(good),
            "mean_ratio": round(statistics.mean(ratios), 3),
            "median_ratio": round(statistics.median(ratios), 3),
            "mean_time_s": round(statistics.mean(times), 6),
            "median_time_s": round(statistics.median(times), 6),
            "mean_rmse": round(statistics.mean(rmses), 4),
            "median_rmse": round(statistics.median(rmses), 4),
        }
    return agg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aiotc",
        description="Arithmetic-coding compression toolkit for grayscale images",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--variant", default="standard",
                       choices=["standard", "pca", "cardinality", "optimized"])
        p.add_argument("--decimals", type=int, default=None,
                       help="probability rounding decimals, 3..6 (optimized)")
        p.add_argument("--levels", type=int, default=None,
                       help="intensity levels (cardinality)")
        p.add_argument("--group-size", dest="group_size", type=int, default=None,
                       help="max symbols per probability group (optimized)")
        p.add_argument("--retain", type=float, default=None,
                       help="fraction of components kept (pca)")
        p.add_argument("--backend", default="renorm64",
                       choices=["exact", "renorm64"])

    p_c = sub.add_parser("compress", help="compress one image to .aiot")
    p_c.add_argument("input")
    p_c.add_argument("output")
    add_pipeline_flags(p_c)
    p_c.set_defaults(func=cmd_compress)

    p_d = sub.add_parser("decompress", help="decode an .aiot file to PGM")
    p_d.add_argument("input")
    p_d.add_argument("output")
    p_d.set_defaults(func=cmd_decompress)

    p_b = sub.add_parser("bench", help="sweep pipelines over an image directory")
    p_b.add_argument("dataset")
    p_b.add_argument("--report", required=True, help="output report path")
    p_b.add_argument("--variants", nargs="+",
                     default=["standard", "pca", "cardinality", "optimized"],
                     choices=["standard", "pca", "cardinality", "optimized"])
    p_b.add_argument("--thresholds", nargs="+", type=int, default=[3],
                     help="decimals sweep for the optimized variant")
    p_b.add_argument("--levels", type=int, default=32)
    p_b.add_argument("--retain", type=float, default=0.5)
    p_b.add_argument("--group-size", dest="group_size", type=int, default=6)
    p_b.add_argument("--backend", default="renorm64",
                     choices=["exact", "renorm64"])
    p_b.add_argument("--jobs", type=int, default=1,
                     help="parallel workers; >1 disables cpu/mem columns")
    p_b.add_argument("--format", default="csv", choices=["csv", "json"])
    p_b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "variant", None):
        # flag combinations that violate a variant's parameter set are usage
        # errors, reported through argparse (exit code 2)
        try:
            _config_from_args(args)
        except ValueError as exc:
            parser.error(str(exc))
    if args.command == "bench":
        for n in args.thresholds:
            if not 3 <= n <= 6:
                parser.error(f"thresholds must be in [3, 6], got {n}")
        if args.jobs < 1:
            parser.error("jobs must be >= 1")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
