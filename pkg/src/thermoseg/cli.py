"""Command-line entry point.

Subcommands: simulate, preprocess, enhance, segment, eval, split, serve.
Every run is reproducible from its arguments plus the store contents;
the resolved configuration is echoed into the output directory.  Exit
codes: 0 success, 1 invalid data or state (one-line diagnostic on
stderr), 2 usage errors (argparse).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import benchmark_scenes
from .dataset import (DEFAULT_RESIZE, DEFAULT_SKIP_HEAD, DEFAULT_SKIP_TAIL,
                      DEFAULT_STRIDE, SamplingConfig, SequenceStore,
                      build_plan, prepare_stack, sample_frames)
from .enhance import ppt_transform, sequence_pca, tsr_fit
from .errors import ThermosegError
from .metrics import DEFAULT_MATCH_IOU
from .physics import load_scene_file, scene_to_config
from .pipeline import (PipelineParams, evaluate_store, prepared_frames,
                       segment_prompts_on_sequence, simulate_into_store)
from .promptseg import SegParams, parse_prompts, segment_with_prompts
from .dataset.store import write_pgm


def _echo_config(out_dir: Path, args: argparse.Namespace) -> None:
    """Write the resolved run configuration next to the outputs."""
    skip = {"func"}
    lines = [f"{k} = {v}" for k, v in sorted(vars(args).items())
             if k not in skip]
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sampling_from_args(args: argparse.Namespace) -> SamplingConfig:
    return SamplingConfig(skip_head=args.skip_head, skip_tail=args.skip_tail,
                          stride=args.stride, resize_to=args.resize)


def _cmd_simulate(args: argparse.Namespace) -> int:
    store = SequenceStore(args.store, create=True)
    if args.suite:
        scenes = benchmark_scenes()
    else:
        if not args.scene:
            print("simulate: a scene file or --suite is required", file=sys.stderr)
            return 1
        scenes = [load_scene_file(args.scene)]
    ids = simulate_into_store(scenes, store, threads=args.threads,
                              overwrite=args.overwrite)
    for scene, sid in zip(scenes, ids):
        (store.path(sid) / "scene.cfg").write_text(
            scene_to_config(scene), encoding="utf-8")
        print(sid)
    return 0


def _cmd_preprocess(args: argparse.Namespace) -> int:
    store = SequenceStore(args.store)
    seq = store.read(args.id)
    config = _sampling_from_args(args)
    frames = prepare_stack(seq.frames.astype(np.float64), config)
    kept = sample_frames(seq.frames.shape[2], config)
    times = (kept + 1.0) / seq.frame_rate
    out = SequenceStore(args.out, create=True)
    out.write_stack(f"{args.id}-prep", frames.astype(np.float32),
                    labels=list(times), method="preprocessed",
                    extra={"origin": args.id}, overwrite=args.overwrite)
    _echo_config(Path(args.out), args)
    print(f"{args.id}-prep")
    return 0


def _cmd_enhance(args: argparse.Namespace) -> int:
    store = SequenceStore(args.store)
    seq = store.read(args.id)
    config = SamplingConfig(skip_head=args.skip_head, skip_tail=args.skip_tail,
                            stride=args.stride, resize_to=None)
    frames = prepare_stack(seq.frames.astype(np.float64), config)
    kept = sample_frames(seq.frames.shape[2], config)
    times = (kept + 1.0) / seq.frame_rate

    if args.method == "pca":
        k = args.components or min(8, frames.shape[2])
        stacks = [sequence_pca(frames, k, source_id=args.id)]
    elif args.method == "ppt":
        stacks = list(ppt_transform(frames, source_id=args.id))
    else:
        stacks = list(tsr_fit(frames, times, degree=args.degree,
                              source_id=args.id))
    out = SequenceStore(args.out, create=True)
    for stack in stacks:
        out.write_stack(f"{args.id}-{stack.method}",
                        stack.images.astype(np.float32), labels=stack.labels,
                        method=stack.method, extra={"origin": args.id},
                        overwrite=args.overwrite)
        print(f"{args.id}-{stack.method}")
    _echo_config(Path(args.out), args)
    return 0


def _cmd_segment(args: argparse.Namespace) -> int:
    store = SequenceStore(args.store)
    seq = store.read(args.id)
    prompts = parse_prompts(Path(args.prompts).read_text(encoding="utf-8"))
    for p in prompts:
        p.validate_in(seq.frames.shape[:2])
    params = PipelineParams(expand_margin=args.margin,
                            normalize_gain=not args.raw_gain,
                            corrected=not args.raw)
    frames = prepared_frames(seq, params)
    if args.frame is None:
        result, frames_used = segment_prompts_on_sequence(frames, prompts, params)
    else:
        from .enhance import contrast_map
        surface = contrast_map(frames, args.frame)
        result = segment_with_prompts(
            surface, prompts, SegParams(expand_margin=args.margin,
                                        threshold_override=args.threshold))
        frames_used = [args.frame] * len(prompts)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_pgm(out_dir / "semantic.pgm", result.semantic_mask)
    for pid, mask in zip(result.prompt_ids, result.instance_masks):
        write_pgm(out_dir / f"mask-{pid}.pgm", mask)
    (out_dir / "summary.txt").write_text(result.summary_text(), encoding="utf-8")
    _echo_config(out_dir, args)
    for pid, status, k in zip(result.prompt_ids, result.statuses, frames_used):
        print(f"{pid} {status} frame={k}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    store = SequenceStore(args.store)
    fold_of: dict[str, int] = {}
    if args.ids:
        ids = args.ids.split(",")
    elif args.split:
        from .dataset import SplitPlan
        plan = SplitPlan.load(args.split)
        if args.fold is not None:
            ids = plan.fold_ids(args.fold, held_out=True)
            fold_of = {sid: args.fold for sid in ids}
        else:
            ids = plan.ids(args.split_name)
    else:
        ids = [sid for sid in store.ids()
               if (store.path(sid) / "gt.pgm").is_file()]
        if not ids:
            print("eval: store holds no sequences with ground truth",
                  file=sys.stderr)
            return 1
    params = PipelineParams(dilation=args.dilation, expand_margin=args.margin,
                            match_iou=args.match_iou,
                            normalize_gain=not args.raw_gain,
                            corrected=not args.raw)
    report = evaluate_store(store, ids, params, fold_of=fold_of,
                            threads=args.threads)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    _echo_config(out_dir, args)
    totals = report.detection_totals()
    agg = report.aggregates()
    print(f"images={len(report.scores)} mean_iou={agg['iou'][0]:.4f} "
          f"detection_recall={totals['recall']:.4f} "
          f"mean_defect_iou={totals['mean_defect_iou']:.4f}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    store = SequenceStore(args.store)
    ids = store.ids()
    if not ids:
        print("split: store is empty", file=sys.stderr)
        return 1
    ratios = tuple(float(x) for x in args.ratios.split(","))
    if len(ratios) != 3:
        print("split: --ratios needs three comma-separated numbers",
              file=sys.stderr)
        return 1
    plan = build_plan(ids, seed=args.seed, ratios=ratios, n_folds=args.k)
    plan.save(args.out)
    print(args.out)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.store, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoseg",
        description="Pulsed-thermography inspection workbench")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_sampling_flags(p: argparse.ArgumentParser, with_resize: bool) -> None:
        p.add_argument("--skip-head", type=int, default=DEFAULT_SKIP_HEAD)
        p.add_argument("--skip-tail", type=int, default=DEFAULT_SKIP_TAIL)
        p.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
        if with_resize:
            p.add_argument("--resize", type=int, default=None,
                           help=f"square output size (e.g. {DEFAULT_RESIZE})")

    p = sub.add_parser("simulate", help="run a scene file or the benchmark suite")
    p.add_argument("scene", nargs="?", help="scene config file")
    p.add_argument("--suite", action="store_true",
                   help="simulate the 20-scene benchmark instead of a file")
    p.add_argument("--store", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("preprocess", help="correct, subsample, resize a sequence")
    p.add_argument("--store", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    add_sampling_flags(p, with_resize=True)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("enhance", help="derive feature stacks from a sequence")
    p.add_argument("--method", choices=("pca", "ppt", "tsr"), required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--components", type=int, default=None,
                   help="pca: number of components")
    p.add_argument("--degree", type=int, default=4, help="tsr: fit degree")
    p.add_argument("--overwrite", action="store_true")
    add_sampling_flags(p, with_resize=False)
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("segment", help="box-prompt segmentation of a sequence")
    p.add_argument("--store", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--prompts", required=True,
                   help="file of `id row0 col0 row1 col1` lines")
    p.add_argument("--out", required=True)
    p.add_argument("--frame", type=int, default=None,
                   help="fixed frame index (default: per-prompt strongest)")
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=None,
                   help="override the automatic threshold (fixed frame only)")
    p.add_argument("--raw", action="store_true",
                   help="skip residual-heat correction")
    p.add_argument("--raw-gain", action="store_true",
                   help="skip illumination flattening")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("eval", help="score segmentation against ground truth")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ids", default=None, help="comma-separated sequence ids")
    p.add_argument("--split", default=None, help="split plan TSV")
    p.add_argument("--split-name", default="test",
                   choices=("train", "val", "test"))
    p.add_argument("--fold", type=int, default=None,
                   help="evaluate one held-out training fold")
    p.add_argument("--dilation", type=float, default=0.1)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--match-iou", type=float, default=DEFAULT_MATCH_IOU)
    p.add_argument("--raw", action="store_true")
    p.add_argument("--raw-gain", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("split", help="build a train/val/test + fold plan")
    p.add_argument("--store", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", default=None, help="static UI directory to mount")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ThermosegError as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
