"""``signscan`` command-line front end.

Exit codes: 0 ok, 2 I/O or usage error, 3 malformed model file,
4 detections naming images absent from the ground truth.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import __version__
from .evaluation import (
    ImageIdMismatch, check_image_ids, format_detection, format_ground_truth, match_detections,
    pr_curve, precision_recall, read_detections, read_ground_truth, write_lines, write_pr_csv,
)
from .features import read_feature_csv, write_feature_csv
from .imagecore import connected_components, read_image, write_image, write_mask
from .learn import ModelFormatError, fit_classifier, load_model, save_model
from .pipeline import (
    PipelineConfig, find_candidates, label_candidates, map_ordered, score_candidates,
    train_on_scenes,
)
from .rht import RhtConfig
from .segmentation import Channel, SegmentationConfig, segment_mask
from .synth import SceneConfig, benchmark_configs, synth_scene

EXIT_IO, EXIT_MODEL, EXIT_MISMATCH = 2, 3, 4
IMAGE_SUFFIXES = (".png", ".ppm", ".pnm", ".jpg", ".jpeg", ".bmp")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_IO):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# flag plumbing


def _add_dataclass_flags(group, cls, skip=()):
    for f in dataclasses.fields(cls):
        if f.name in skip:
            continue
        kind = type(f.default) if f.default is not None else int
        group.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind,
                           default=f.default, metavar=kind.__name__.upper(),
                           help=f"default {f.default}")


def _build(cls, args, **extra):
    kw = {f.name: getattr(args, f.name) for f in dataclasses.fields(cls) if hasattr(args, f.name)}
    kw.update(extra)
    try:
        return cls(**kw)
    except ValueError as exc:
        raise CliError(f"invalid {cls.__name__}: {exc}") from exc


def _channels(name: str) -> tuple[Channel, ...]:
    return (Channel.RED, Channel.BLUE) if name == "both" else (Channel(name),)


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        segmentation=_build(SegmentationConfig, args),
        rht=_build(RhtConfig, args, rng_seed=args.seed),
        channels=_channels(args.channel),
        threshold=args.threshold,
        suppress_nested=not args.keep_nested,
    )


def read_config_file(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys may use - or _."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, sub: argparse.ArgumentParser,
                  argv, values: dict[str, str]):
    """Config values become defaults, so explicit flags still win."""
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("command", "config", "help"):
            raise CliError(f"unknown config key {key!r}")
        if action.type is not None:
            try:
                defaults[key] = action.type(value)
            except ValueError as exc:
                raise CliError(f"config key {key}: {exc}") from exc
        elif isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _image_paths(inputs) -> list[Path]:
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths += sorted(q for q in p.iterdir() if q.suffix.lower() in IMAGE_SUFFIXES)
        else:
            paths.append(p)
    return paths


def _load_image(path: Path) -> np.ndarray:
    try:
        return read_image(path)
    except OSError as exc:
        raise CliError(f"cannot read image {path}: {exc}") from exc


def _load_model(path):
    try:
        return load_model(path)
    except ModelFormatError as exc:
        raise CliError(str(exc), EXIT_MODEL) from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read model {path}: {exc}") from exc


def _read_records(reader, path, what):
    try:
        return reader(path)
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"malformed {what} file {path}: {exc}") from exc


def _emit(lines, output):
    if output:
        try:
            write_lines(output, lines)
        except OSError as exc:
            raise CliError(f"cannot write {output}: {exc}") from exc
    else:
        for line in lines:
            print(line)


def annotate(img: np.ndarray, ellipses, color=(0, 255, 0), samples: int = 90) -> np.ndarray:
    """Copy of ``img`` with each ellipse outline drawn as a closed polyline."""
    canvas = Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8))
    draw = ImageDraw.Draw(canvas)
    t = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    for e in ellipses:
        ct, st = math.cos(e.theta), math.sin(e.theta)
        xs = e.cx + e.a * np.cos(t) * ct - e.b * np.sin(t) * st
        ys = e.cy + e.a * np.cos(t) * st + e.b * np.sin(t) * ct
        pts = list(zip(xs.tolist(), ys.tolist()))
        draw.line(pts + pts[:1], fill=color, width=2)
    return np.asarray(canvas)


# --------------------------------------------------------------------------
# subcommands


def cmd_segment(args) -> int:
    img = _load_image(Path(args.image))
    cfg = _build(SegmentationConfig, args)
    mask = segment_mask(img, Channel(args.channel), cfg)
    if args.mask:
        try:
            write_mask(args.mask, mask)
        except OSError as exc:
            raise CliError(f"cannot write {args.mask}: {exc}") from exc
    for b in connected_components(mask, cfg.min_area):
        x0, y0, x1, y1 = b.bbox
        print(f"{x0} {y0} {x1} {y1} {b.area}")
    return 0


def _detect_one(path: Path, cfg: PipelineConfig, classifier):
    img = _load_image(path)
    recs = score_candidates(find_candidates(img, cfg), path.stem, classifier, cfg.threshold)
    return img, recs


def cmd_detect(args) -> int:
    if args.no_classifier == bool(args.model):
        raise CliError("detect needs exactly one of --model or --no-classifier")
    paths = _image_paths(args.inputs)
    if args.annotate and len(paths) != 1:
        raise CliError("--annotate needs a single input image")
    cfg = _pipeline_config(args)
    classifier = None if args.no_classifier else _load_model(args.model)
    results = map_ordered(lambda p: _detect_one(p, cfg, classifier), paths, args.workers)
    _emit([format_detection(r) for _, recs in results for r in recs], args.output)
    if args.annotate:
        img, recs = results[0]
        out = annotate(img, [r.ellipse for r in recs if r.accepted])
        try:
            write_image(args.annotate, out)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot write {args.annotate}: {exc}") from exc
    return 0


def cmd_features(args) -> int:
    paths = _image_paths(args.inputs)
    cfg = _pipeline_config(args)
    gts = _read_records(read_ground_truth, args.gt, "ground truth") if args.gt else None
    cands = map_ordered(lambda p: find_candidates(_load_image(p), cfg), paths, args.workers)
    vectors, labels = [], []
    for path, cs in zip(paths, cands):
        vectors += [c.features for c in cs]
        if gts is not None:
            labels += label_candidates(cs, [g for g in gts if g.image_id == path.stem]).tolist()
    try:
        write_feature_csv(args.output, vectors, labels if gts is not None else None)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}") from exc
    return 0


def cmd_train(args) -> int:
    if bool(args.features) == bool(args.scenes):
        raise CliError("train needs exactly one of --features or --scenes")
    kw = dict(c_param=args.c_param, epochs=args.epochs,
              variance_keep=args.variance_keep, seed=args.seed)
    try:
        if args.features:
            x, y = _read_records(read_feature_csv, args.features, "feature")
            if y is None:
                raise CliError(f"{args.features} has no label column")
            model = fit_classifier(x, y, **kw)
        else:
            scenes = benchmark_configs(
                range(args.seed, args.seed + args.scenes),
                **{f.name: getattr(args, f.name) for f in dataclasses.fields(SceneConfig)
                   if f.name != "seed"})
            model = train_on_scenes(scenes, _pipeline_config(args), workers=args.workers, **kw)
    except CliError:
        raise
    except ValueError as exc:
        raise CliError(f"training failed: {exc}") from exc
    try:
        save_model(args.output, model)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}") from exc
    return 0


def _dets_and_gts(args):
    dets = _read_records(read_detections, args.detections, "detection")
    gts = _read_records(read_ground_truth, args.gt, "ground truth")
    try:
        check_image_ids(dets, gts)
    except ImageIdMismatch as exc:
        raise CliError(str(exc), EXIT_MISMATCH) from exc
    return dets, gts


def cmd_eval(args) -> int:
    dets, gts = _dets_and_gts(args)
    c = match_detections(dets, gts, accepted_only=not args.all)
    p, r = precision_recall(c)
    print(f"{c.tp} {c.fp} {c.fn} {p!r} {r!r}")
    return 0


def cmd_pr_curve(args) -> int:
    dets, gts = _dets_and_gts(args)
    try:
        write_pr_csv(args.output, pr_curve(dets, gts))
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}") from exc
    return 0


def cmd_synth(args) -> int:
    out = Path(args.outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc}") from exc
    scene_kw = {f.name: getattr(args, f.name) for f in dataclasses.fields(SceneConfig)
                if f.name != "seed"}
    gt_lines = []
    for s in range(args.seed, args.seed + args.n):
        img, gts = synth_scene(_build(SceneConfig, args, **scene_kw, seed=s))
        try:
            write_image(out / f"scene_{s:05d}.png", img)
        except OSError as exc:
            raise CliError(f"cannot write scene {s}: {exc}") from exc
        gt_lines += [format_ground_truth(g) for g in gts]
    _emit(gt_lines, out / "ground_truth.tsv")
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signscan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"signscan {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; entries replace flag defaults")
    common.add_argument("--seed", type=int, default=0, help="root seed (default 0)")

    seg = argparse.ArgumentParser(add_help=False)
    _add_dataclass_flags(seg.add_argument_group("segmentation"), SegmentationConfig)

    pipe = argparse.ArgumentParser(add_help=False, parents=[seg])
    g = pipe.add_argument_group("detection")
    _add_dataclass_flags(g, RhtConfig, skip=("rng_seed",))
    g.add_argument("--channel", choices=("red", "blue", "both"), default="both")
    g.add_argument("--threshold", type=float, default=0.0, help="acceptance score (default 0)")
    g.add_argument("--keep-nested", action="store_true",
                   help="keep ellipses nested inside a larger one of the same blob")
    g.add_argument("--workers", type=int, default=1, help="threads (output order is fixed)")

    scene = argparse.ArgumentParser(add_help=False)
    _add_dataclass_flags(scene.add_argument_group("scenes"), SceneConfig, skip=("seed",))

    p = subs.add_parser("segment", parents=[common, seg], help="colour mask and blob list")
    p.add_argument("image")
    p.add_argument("--channel", choices=("red", "blue"), default="red")
    p.add_argument("--mask", help="write the binary mask here (PNG)")
    p.set_defaults(func=cmd_segment)

    p = subs.add_parser("detect", parents=[common, pipe], help="detection records")
    p.add_argument("inputs", nargs="+", help="images or directories")
    p.add_argument("--model")
    p.add_argument("--no-classifier", action="store_true", help="RHT-only baseline")
    p.add_argument("--annotate", help="draw accepted ellipses into this image")
    p.add_argument("--output", help="record file (default standard output)")
    p.set_defaults(func=cmd_detect)

    p = subs.add_parser("features", parents=[common, pipe], help="candidate feature CSV")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--gt", help="ground truth used to label candidates")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_features)

    p = subs.add_parser("train", parents=[common, pipe, scene], help="fit a model file")
    p.add_argument("--features", help="labelled feature CSV")
    p.add_argument("--scenes", type=int, help="train on this many synthetic scenes from --seed")
    p.add_argument("--c-param", type=float, default=10.0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--variance-keep", type=float, default=0.95)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train)

    for name, func, hint in (("eval", cmd_eval, "print tp fp fn precision recall"),
                             ("pr-curve", cmd_pr_curve, "threshold sweep CSV")):
        p = subs.add_parser(name, parents=[common], help=hint)
        p.add_argument("--detections", required=True)
        p.add_argument("--gt", required=True)
        if name == "eval":
            p.add_argument("--all", action="store_true", help="ignore the accepted flag")
        else:
            p.add_argument("--output", required=True)
        p.set_defaults(func=func)

    p = subs.add_parser("synth", parents=[common, scene], help="write synthetic scenes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            args = _apply_config(parser, sub, argv, read_config_file(args.config))
        return args.func(args)
    except CliError as exc:
        print(f"signscan: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
