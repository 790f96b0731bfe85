"""Command-line entry point: eval, bench, pipeline, index, judge, lint, render."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from .errors import PosterError
from .metrics import ThresholdProfile, evaluate
from .model import MetricReport
from .report import BenchRow, render_bench_figures, write_bench_csv


def _load_vector(path: str) -> list[float]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict) and "embedding" in raw:
        raw = raw["embedding"]
    return [float(x) for x in raw]


def _write_json(path: str | Path, payload: dict) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8"
    )


def cmd_eval(args) -> int:
    embeddings = None
    if args.embedding_a and args.embedding_b:
        embeddings = (_load_vector(args.embedding_a), _load_vector(args.embedding_b))
    report = evaluate(
        html_path=args.html,
        geometry_source=args.geometry,
        screenshot_path=args.screenshot,
        profile=ThresholdProfile.named(args.profile),
        embeddings=embeddings,
        alignment_mode=args.alignment_mode,
    )
    _write_json(args.out, report.to_dict())
    print(_summary_line(Path(args.html).stem, report))
    return 0


def _summary_line(design_id: str, report: MetricReport) -> str:
    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    return (
        f"{design_id}: val={report.validity.score:.4f} "
        f"ali={fmt(report.alignment)} rea={fmt(report.readability)} "
        f"clip={fmt(report.similarity)}"
    )


def _evaluate_design(html: Path, profile_name: str, alignment_mode: str) -> BenchRow:
    def sibling(ext: str) -> Path:
        return html.with_name(html.stem + ext)

    geometry = sibling(".geometry.json")
    screenshot = sibling(".png")
    embeddings_file = sibling(".embeddings.json")
    subjective_file = sibling(".subjective.json")

    embeddings = None
    if embeddings_file.exists():
        raw = json.loads(embeddings_file.read_text(encoding="utf-8"))
        embeddings = (
            [float(x) for x in raw["candidate"]],
            [float(x) for x in raw["reference"]],
        )
    subjective = None
    if subjective_file.exists():
        raw = json.loads(subjective_file.read_text(encoding="utf-8"))
        dims = raw.get("dimensions", raw)
        subjective = {}
        for name, entry in dims.items():
            scaled = entry.get("scaled") if isinstance(entry, dict) else float(entry)
            if scaled is not None:
                subjective[name] = scaled
    report = evaluate(
        html_path=html,
        geometry_source=geometry if geometry.exists() else "resolve",
        screenshot_path=screenshot if screenshot.exists() else None,
        profile=ThresholdProfile.named(profile_name),
        embeddings=embeddings,
        alignment_mode=alignment_mode,
        subjective=subjective,
    )
    return BenchRow.from_report(html.stem, report)


def cmd_bench(args) -> int:
    root = Path(args.dir)
    designs = sorted(root.glob("*.html"), key=lambda p: p.stem)
    if not designs:
        raise PosterError(f"no *.html designs under {root}")
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(
                pool.map(
                    lambda p: _evaluate_design(p, args.profile, args.alignment_mode),
                    designs,
                )
            )
    else:
        rows = [_evaluate_design(p, args.profile, args.alignment_mode) for p in designs]
    rows.sort(key=lambda r: r.id)
    write_bench_csv(rows, args.out)
    print(f"wrote {len(rows)} design rows + mean to {args.out}")
    if args.plot:
        written = render_bench_figures(rows, args.plot)
        for path in written:
            print(f"wrote figure {path}")
    return 0


def cmd_pipeline_run(args) -> int:
    from .pipeline import load_config, run_pipeline

    config = load_config(args.config)
    if args.iterations is not None:
        from dataclasses import replace

        config = replace(config, iterations=args.iterations)
    state = run_pipeline(
        args.prompt, config, job_dir=args.job_dir, job_id=args.job_id
    )
    print(f"job {state.job_id}: {len(state.records)} iterations, "
          f"final html {len(state.final_html)} bytes")
    return 0


def cmd_pipeline_resume(args) -> int:
    from .pipeline import load_config, resume_pipeline

    config = load_config(args.config)
    state = resume_pipeline(args.job, config)
    print(f"job {state.job_id} resumed: {len(state.records)} iterations")
    return 0


def cmd_index_build(args) -> int:
    from .assets import build_index

    index = build_index(args.manifest)
    print(f"index ok: {len(index)} assets, dimension {index.dimension}")
    if args.out:
        _write_json(args.out, {
            "dimension": index.dimension,
            "records": [r.to_dict() for r in index.records],
        })
    return 0


def cmd_index_query(args) -> int:
    from .assets import build_index

    index = build_index(args.manifest)
    hits = index.query(_load_vector(args.embedding_file), k=args.k)
    for rank, (asset_id, similarity) in enumerate(hits, start=1):
        print(f"{rank}\t{asset_id}\t{similarity:.6f}")
    if args.out:
        _write_json(args.out, {
            "hits": [
                {"rank": i + 1, "asset_id": a, "similarity": s}
                for i, (a, s) in enumerate(hits)
            ]
        })
    return 0


def cmd_judge(args) -> int:
    from .pipeline import judge, load_config

    config = load_config(args.config)
    backend = config.backends["judge"].build()
    scores = judge(
        args.image, args.rubric, backend, scale_factor=config.scale_factor
    )
    _write_json(args.out, scores.to_dict())
    parts = []
    for name, dim in scores.dimensions.items():
        parts.append(f"{name}={dim.scaled if dim.scaled is not None else 'unscored'}")
    print("judge: " + " ".join(parts))
    return 0


def cmd_lint(args) -> int:
    from .poster import lint_poster, parse_design

    doc = parse_design(Path(args.html).read_text(encoding="utf-8"))
    report = lint_poster(doc)
    for finding in report.findings:
        print(f"{finding.severity}\t{finding.code}\t{finding.path}\t{finding.message}")
    if not report.findings:
        print("clean: no findings")
    if args.out:
        _write_json(args.out, report.to_dict())
    return 0


def cmd_render(args) -> int:
    from .pipeline import load_config, run_renderer

    config = load_config(args.config)
    if config.renderer is None:
        raise PosterError("config declares no renderer command")
    run_renderer(
        config.renderer, Path(args.html), Path(args.png), Path(args.geometry)
    )
    print(f"rendered {args.html} -> {args.png}, {args.geometry}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posterml",
        description="Poster design parsing, quality metrics, and generation loop",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="compute objective metrics for one design")
    p.add_argument("--html", required=True)
    p.add_argument("--geometry", default="resolve",
                   help="geometry dump path, or 'resolve' to derive from HTML")
    p.add_argument("--screenshot", default=None)
    p.add_argument("--profile", choices=("standard", "broad"), default="standard")
    p.add_argument("--alignment-mode", choices=("literal", "same_axis"), default="literal")
    p.add_argument("--embedding-a", default=None)
    p.add_argument("--embedding-b", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="evaluate a directory of designs into a CSV")
    p.add_argument("--dir", required=True)
    p.add_argument("--profile", choices=("standard", "broad"), default="standard")
    p.add_argument("--alignment-mode", choices=("literal", "same_axis"), default="literal")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", default=None, help="directory for summary figures")
    p.set_defaults(func=cmd_bench)

    pipe = sub.add_parser("pipeline", help="run or resume a generation job")
    pipe_sub = pipe.add_subparsers(dest="pipeline_command", required=True)
    p = pipe_sub.add_parser("run")
    p.add_argument("--prompt", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--job-dir", default="jobs")
    p.add_argument("--job-id", default=None)
    p.set_defaults(func=cmd_pipeline_run)
    p = pipe_sub.add_parser("resume")
    p.add_argument("--job", required=True, help="existing job directory")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline_resume)

    idx = sub.add_parser("index", help="build or query the asset index")
    idx_sub = idx.add_subparsers(dest="index_command", required=True)
    p = idx_sub.add_parser("build")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_index_build)
    p = idx_sub.add_parser("query")
    p.add_argument("--manifest", required=True)
    p.add_argument("--embedding-file", required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_index_query)

    p = sub.add_parser("judge", help="score a rendering with the judge backend")
    p.add_argument("--image", required=True)
    p.add_argument("--rubric", choices=("standard", "broad"), default="standard")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("lint", help="check poster container discipline")
    p.add_argument("--html", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("render", help="run the configured renderer command")
    p.add_argument("--html", required=True)
    p.add_argument("--png", required=True)
    p.add_argument("--geometry", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def dispatch(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PosterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
