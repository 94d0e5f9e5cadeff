"""Command-line entry points.

Commands: gen-data, train, eval, infer-stream, bench, ablate, serve.
Common flags: --config <json>, --seed <int>, --out <dir>, --force.
Exit codes: 0 success, 2 validation error, 3 I/O error.
"""

import argparse
import base64
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .baselines import (
    VariantId,
    build_variant,
    naive_mean_predictor,
    variant_spec,
)
from .data.io import load_dataset, load_manifest, save_dataset
from .data.ops import split_dataset
from .data.synthetic import generate_corpus
from .data.types import DatasetSplit, VideoSequence
from .errors import DatasetIOError, ValidationError
from .evaluation.metrics import ensemble_average
from .evaluation.report import MetricsReport, ReportConfig, build_report, write_report
from .evaluation.speed import measure_inference_speed
from .evaluation.tracks import PredictionTrack, track_from_outputs
from .model.checkpoint import load_checkpoint, save_checkpoint
from .model.config import ModelConfig, desk_model_config
from .model.network import NetworkOutputs, SurgeryNet
from .phases import ExperienceLevel
from .plots import render_video_figure, write_plot_data
from .streaming import stream_video
from .training.loop import FoldData, LabelUsage, run_full_training, train_stage, write_stage_logs
from .training.schedule import TrainingSchedule, desk_schedule


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _ensure_out_dir(path: Path, force: bool) -> Path:
    if path.exists() and any(path.iterdir()) and not force:
        raise ValidationError(
            f"output directory {path} is not empty; pass --force to overwrite"
        )
    path.mkdir(parents=True, exist_ok=True)
    return path


def _read_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise DatasetIOError(f"config file not found: {p}")
    with open(p) as fh:
        return json.load(fh)


def _content_hash(parts: List[bytes]) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(part)
    return digest.hexdigest()


def _write_run_manifest(
    out_dir: Path, command: str, args: argparse.Namespace, outputs: List[str]
) -> None:
    parts = [json.dumps({k: str(v) for k, v in sorted(vars(args).items()) if k != "handler"}).encode()]
    for attr in ("config", "data"):
        value = getattr(args, attr, None)
        if value:
            candidate = Path(value)
            if candidate.is_file():
                parts.append(candidate.read_bytes())
            elif (candidate / "manifest.json").exists():
                parts.append((candidate / "manifest.json").read_bytes())
    manifest = {
        "command": command,
        "config": getattr(args, "config", None),
        "seed": getattr(args, "seed", None),
        "input_hash": _content_hash(parts),
        "created_at": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    with open(out_dir / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def _base_configs(args, seed: int) -> Tuple[ModelConfig, TrainingSchedule]:
    config = _read_config(getattr(args, "config", None))
    model_cfg = desk_model_config()
    if "model" in config:
        model_cfg = ModelConfig.from_dict({**model_cfg.to_dict(), **config["model"]})
    schedule = desk_schedule(seed=seed)
    if "schedule" in config:
        schedule = TrainingSchedule.from_dict(
            {**schedule.to_dict(), **config["schedule"], "seed": seed}
        )
    return model_cfg, schedule


def _fill_from_config(args, keys: Tuple[str, ...]) -> None:
    """Config-file values back absent CLI flags (flags win when given)."""
    config = _read_config(getattr(args, "config", None))
    for key in keys:
        if getattr(args, key, None) is None and key in config:
            setattr(args, key, config[key])
    missing = [k for k in ("data", "out") if k in keys and getattr(args, k, None) is None]
    if missing:
        raise ValidationError(
            f"missing {'/'.join('--' + m for m in missing)} (flag or config-file key)"
        )
    if getattr(args, "seed", None) is None:
        args.seed = config.get("seed", 0)


def _load_corpus(data_dir: str) -> Tuple[List[VideoSequence], str]:
    videos = load_dataset(data_dir)
    if not videos:
        raise ValidationError(f"dataset at {data_dir} holds no videos")
    unit = load_manifest(data_dir).get("time_unit", "s")
    return videos, unit


def _save_split(split: DatasetSplit, path: Path) -> None:
    payload = {
        "train_ids": split.train_ids,
        "test_ids": split.test_ids,
        "folds": [{"train": t, "val": v} for t, v in split.folds],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def _load_split(path: Path) -> DatasetSplit:
    if not path.exists():
        raise DatasetIOError(f"split file not found: {path}")
    with open(path) as fh:
        payload = json.load(fh)
    return DatasetSplit(
        train_ids=payload["train_ids"],
        test_ids=payload["test_ids"],
        folds=[(f["train"], f["val"]) for f in payload["folds"]],
    )


# ---------------------------------------------------------------------------
# gen-data
# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> None:
    _fill_from_config(args, ())
    out = _ensure_out_dir(Path(args.out), args.force)
    videos = generate_corpus(
        n_videos=args.n_videos,
        seed=args.seed,
        senior_total_mean_s=args.senior_mean,
        assistant_total_mean_s=args.assistant_mean,
        surgeons_per_level=args.surgeons_per_level,
        frame_size=(args.frame_size, args.frame_size),
        fps=args.fps,
        noise_level=args.noise,
        rel_std=args.rel_std,
    )
    save_dataset(videos, out, time_unit=args.unit)
    _write_run_manifest(out, "gen-data", args, ["manifest.json"])

    by_level = {level: [] for level in ExperienceLevel}
    for video in videos:
        by_level[video.experience].append(video.total_duration_s)
    print(f"wrote {len(videos)} videos to {out} (unit: {args.unit})")
    for level, durations in by_level.items():
        if durations:
            print(
                f"  {level.label}: {len(durations)} videos, "
                f"mean duration {np.mean(durations):.2f} {args.unit}"
            )


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def _train_fresh(args, videos, split, unit, out: Path) -> None:
    variant = VariantId.parse(args.variant)
    if not variant_spec(variant).trains_network:
        raise ValidationError("the naive baseline has no network to train; use eval or ablate")
    base_model, base_schedule = _base_configs(args, args.seed)
    model_cfg, schedule = build_variant(variant, base_model, base_schedule)
    runs = run_full_training(videos, split, model_cfg, schedule)
    for run in runs:
        save_checkpoint(
            out / f"fold{run.fold_id}",
            run.model,
            seed=schedule.seed,
            variant=variant.value,
            fold_id=run.fold_id,
            time_unit=unit,
            schedule=schedule.to_dict(),
            label_usage=run.label_usage.counts,
            trained_on=run.trained_on,
        )
        write_stage_logs(run.logs, out / f"fold{run.fold_id}_stages.csv")
        print(
            f"fold {run.fold_id}: best val loss {run.best_val_loss:.4f}, "
            f"checkpoint fold{run.fold_id}.pt"
        )


def _train_resume(args, videos, split, unit, out: Path) -> None:
    by_id = {v.video_id: v for v in videos}
    for fold_id, (fold_train, fold_val) in enumerate(split.folds):
        ckpt = out / f"fold{fold_id}.pt"
        if not ckpt.exists():
            raise DatasetIOError(
                f"cannot resume at stage {args.stage}: missing checkpoint {ckpt}"
            )
        model, sidecar = load_checkpoint(ckpt)
        schedule = TrainingSchedule.from_dict(sidecar["schedule"])
        override = _read_config(getattr(args, "config", None))
        if "schedule" in override:
            schedule = TrainingSchedule.from_dict(
                {**schedule.to_dict(), **override["schedule"], "seed": schedule.seed}
            )
        data = FoldData([by_id[i] for i in fold_train], [by_id[i] for i in fold_val])
        usage = LabelUsage()
        if sidecar.get("label_usage"):
            usage.counts.update(sidecar["label_usage"])
        logs = []
        for stage in schedule.stages:
            if stage.stage_id < args.stage:
                continue
            model, log = train_stage(model, data, stage, schedule, usage)
            logs.append(log)
        if not logs:
            raise ValidationError(f"schedule has no stages >= {args.stage}")
        save_checkpoint(
            out / f"fold{fold_id}",
            model,
            seed=schedule.seed,
            variant=sidecar.get("variant", "catanet"),
            fold_id=fold_id,
            time_unit=unit,
            schedule=schedule.to_dict(),
            label_usage=usage.counts,
            trained_on=list(fold_train),
        )
        write_stage_logs(logs, out / f"fold{fold_id}_stages_resume{args.stage}.csv")
        print(f"fold {fold_id}: resumed from stage {args.stage}, now at stage {model.stage_reached}")


def cmd_train(args) -> None:
    _fill_from_config(args, ("data", "out"))
    videos, unit = _load_corpus(args.data)
    out = Path(args.out)
    if args.stage > 1:
        if not out.exists():
            raise DatasetIOError(f"resume requested but {out} does not exist")
        split = _load_split(out / "split.json")
        _train_resume(args, videos, split, unit, out)
    else:
        _ensure_out_dir(out, args.force)
        split = split_dataset(videos, args.n_test_per_surgeon, args.folds, args.seed)
        _save_split(split, out / "split.json")
        _train_fresh(args, videos, split, unit, out)
    _write_run_manifest(out, "train", args, sorted(p.name for p in out.glob("fold*.pt")))


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def _resolve_checkpoints(paths: List[str]) -> List[Path]:
    resolved: List[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(p.glob("fold*.pt"))
            if not found:
                found = sorted(p.glob("fold*.json"))
            if not found:
                raise DatasetIOError(f"no checkpoints under {p}")
            resolved.extend(found)
        else:
            resolved.append(p)
    return resolved


def _check_fold_configs(sidecars: List[dict]) -> None:
    configs = [s.get("model_config") for s in sidecars if s.get("model_config")]
    for other in configs[1:]:
        if other != configs[0]:
            raise ValidationError("fold checkpoints carry differing model configs")


def _select_videos(videos, split: Optional[DatasetSplit], which: str):
    if which == "all" or split is None:
        return videos
    wanted = set(split.test_ids if which == "test" else split.train_ids)
    return [v for v in videos if v.video_id in wanted]


def evaluate_checkpoints(
    models: List,
    videos: List[VideoSequence],
    unit: str,
    speed_stats=None,
) -> Tuple[MetricsReport, List[PredictionTrack]]:
    tracks = []
    for video in videos:
        fold_outputs = [m.predict_video(video) for m in models]
        tracks.append(track_from_outputs(video, ensemble_average(fold_outputs)))
    report = build_report(tracks, speed_stats, ReportConfig(unit=unit))
    return report, tracks


def cmd_eval(args) -> None:
    _fill_from_config(args, ())
    videos, unit = _load_corpus(args.data)
    ckpt_paths = _resolve_checkpoints(args.checkpoints)
    loaded = [load_checkpoint(p) for p in ckpt_paths]
    models = [m for m, _ in loaded]
    _check_fold_configs([s for _, s in loaded])

    split = None
    split_path = Path(args.split) if args.split else ckpt_paths[0].parent / "split.json"
    if split_path.exists():
        split = _load_split(split_path)
    chosen = _select_videos(videos, split, args.videos)
    if not chosen:
        raise ValidationError(f"no videos selected for --videos {args.videos}")

    out = _ensure_out_dir(Path(args.out), args.force)
    speed_stats = None
    if args.with_speed:
        net = next((m for m in models if isinstance(m, SurgeryNet)), None)
        if net is not None:
            speed_stats = measure_inference_speed(
                net, n_warmup=args.speed_warmup, n_measure=args.speed_measure
            )
    report, tracks = evaluate_checkpoints(models, chosen, unit, speed_stats)
    payload = write_report(report, out / "report.json", out / "report.csv")

    plots_dir = out / "plots"
    plots_dir.mkdir(exist_ok=True)
    for track in tracks:
        csv_path = plots_dir / f"{track.video_id}.csv"
        write_plot_data(track, csv_path)
        render_video_figure(csv_path, plots_dir / f"{track.video_id}.png", unit=unit)

    _write_run_manifest(out, "eval", args, ["report.json", "report.csv", "plots/"])
    mae_all = payload["groups"]["all"]["mae"]
    print(
        f"evaluated {len(tracks)} videos ({args.videos}); "
        f"MAE {mae_all['mean']:.3f} ± {mae_all['std']:.3f} {unit}; "
        f"phase acc {payload['phase']['acc']['mean']:.3f}; "
        f"experience acc {payload['experience_acc']['mean']:.3f}"
    )


# ---------------------------------------------------------------------------
# infer-stream
# ---------------------------------------------------------------------------


def _load_single_video(data_dir: str, video_id: str) -> VideoSequence:
    videos, _ = _load_corpus(data_dir)
    for video in videos:
        if video.video_id == video_id:
            return video
    raise ValidationError(f"video {video_id} not found in {data_dir}")


class _RemoteSession:
    """Thin HTTP client against the inference service."""

    def __init__(self, base_url: str, fps: float, video_id: Optional[str] = None):
        import urllib.request

        self._urllib = urllib.request
        self.base_url = base_url.rstrip("/")
        payload = {"fps": fps, "video_id": video_id}
        response = self._post("/sessions", payload)
        self.session_id = response["session_id"]

    def _post(self, route: str, payload: dict) -> dict:
        request = self._urllib.Request(
            self.base_url + route,
            data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        with self._urllib.urlopen(request) as response:
            return json.loads(response.read())

    def step(self, frame: np.ndarray, elapsed_s: float) -> NetworkOutputs:
        from PIL import Image

        u8 = np.clip(np.round(frame * 255.0), 0, 255).astype(np.uint8)
        buffer = io.BytesIO()
        Image.fromarray(u8, mode="RGB").save(buffer, format="PNG")
        payload = {
            "frame_png_base64": base64.b64encode(buffer.getvalue()).decode(),
            "elapsed_s": elapsed_s,
        }
        response = self._post(f"/sessions/{self.session_id}/frames", payload)
        probs = np.asarray(response["phase_probs"])
        p_senior = response["p_senior"]
        return NetworkOutputs(
            phase_probs=probs,
            experience_probs=np.array([p_senior, 1.0 - p_senior]),
            rsd=response["rsd_pred"],
            frame_descriptor=np.zeros(1),
            video_descriptor=np.zeros(1),
        )


def cmd_infer_stream(args) -> None:
    _fill_from_config(args, ())
    video = _load_single_video(args.data, args.video_id)
    if args.url:
        session = _RemoteSession(args.url, fps=video.fps, video_id=video.video_id)
        step_fn = session.step
    elif not args.checkpoint:
        raise ValidationError("infer-stream needs --checkpoint or --url")
    else:
        model, sidecar = load_checkpoint(args.checkpoint)
        if not isinstance(model, SurgeryNet):
            raise ValidationError("streaming needs a trained network checkpoint")
        if tuple(model.config.frame_size) != video.frames.shape[1:3]:
            # session preprocessing resizes, but a mismatch usually means the
            # wrong checkpoint; surface it
            raise ValidationError(
                f"checkpoint expects {model.config.frame_size} frames, video is "
                f"{video.frames.shape[1:3]}"
            )
        step_fn = model.start_session().step

    sink_handle = open(args.out, "w") if args.out else sys.stdout
    try:
        def sink(line):
            print(line.format(), file=sink_handle)

        _, summary = stream_video(
            step_fn,
            video,
            realtime=args.realtime,
            budget_ms=args.budget_ms,
            sink=sink,
        )
    finally:
        if args.out:
            sink_handle.close()
    if args.out:
        _write_run_manifest(Path(args.out).parent, "infer-stream", args, [Path(args.out).name])
    if summary is not None:
        print(
            f"# realtime fps={summary.fps} budget_ms={summary.budget_ms:.1f} "
            f"max_latency_ms={summary.max_latency_ms:.1f} "
            f"mean_latency_ms={summary.mean_latency_ms:.1f} status={summary.status}",
            file=sys.stderr,
        )


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def cmd_bench(args) -> None:
    _fill_from_config(args, ())
    model, _ = load_checkpoint(args.checkpoint)
    if not isinstance(model, SurgeryNet):
        raise ValidationError("bench needs a trained network checkpoint")
    print(f"warmup={args.warmup} measured={args.measure}")
    stats = measure_inference_speed(model, n_warmup=args.warmup, n_measure=args.measure)
    print(f"per-frame: {stats.mean_ms:.2f} ± {stats.std_ms:.2f} ms  ({stats.fps:.2f} fps)")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "speed.json", "w") as fh:
            json.dump(stats.to_dict(), fh, indent=2)
        _write_run_manifest(out, "bench", args, ["speed.json"])


# ---------------------------------------------------------------------------
# ablate
# ---------------------------------------------------------------------------

_MATRIX_METRICS = ["mae_hyd", "mae5", "mae2", "mae"]
_MATRIX_GROUPS = ["all", "senior", "assistant"]


def _naive_report(train_videos, test_videos, unit: str) -> MetricsReport:
    predictor = naive_mean_predictor(train_videos)
    tracks = []
    for video in test_videos:
        preds = np.array([predictor(a.elapsed_s) for a in video.annotations])
        tracks.append(
            PredictionTrack(
                video_id=video.video_id,
                rsd_pred=preds,
                phase_pred=np.zeros(len(video), dtype=np.int64),
                exp_probs_pred=np.tile([0.5, 0.5], (len(video), 1)),
                fps=video.fps,
                annotations=list(video.annotations),
            )
        )
    return build_report(tracks, None, ReportConfig(unit=unit))


def cmd_ablate(args) -> None:
    _fill_from_config(args, ("data", "out"))
    videos, unit = _load_corpus(args.data)
    out = _ensure_out_dir(Path(args.out), args.force)
    variants = [VariantId.parse(v) for v in args.variants.split(",") if v.strip()]
    if not variants:
        raise ValidationError("no variants requested")
    split = split_dataset(videos, args.n_test_per_surgeon, args.folds, args.seed)
    _save_split(split, out / "split.json")
    by_id = {v.video_id: v for v in videos}
    train_videos = [by_id[i] for i in split.train_ids]
    test_videos = [by_id[i] for i in split.test_ids]

    payloads = {}
    for variant in variants:
        vdir = out / f"variant_{variant.value}"
        vdir.mkdir(exist_ok=True)
        if variant_spec(variant).trains_network:
            base_model, base_schedule = _base_configs(args, args.seed)
            model_cfg, schedule = build_variant(variant, base_model, base_schedule)
            runs = run_full_training(videos, split, model_cfg, schedule)
            for run in runs:
                save_checkpoint(
                    vdir / f"fold{run.fold_id}",
                    run.model,
                    seed=schedule.seed,
                    variant=variant.value,
                    fold_id=run.fold_id,
                    time_unit=unit,
                    schedule=schedule.to_dict(),
                    label_usage=run.label_usage.counts,
                    trained_on=run.trained_on,
                )
                write_stage_logs(run.logs, vdir / f"fold{run.fold_id}_stages.csv")
            report, _ = evaluate_checkpoints([r.model for r in runs], test_videos, unit)
        else:
            report = _naive_report(train_videos, test_videos, unit)
        payloads[variant.value] = write_report(
            report, vdir / "report.json", vdir / "report.csv"
        )
        print(f"variant {variant.value}: MAE {payloads[variant.value]['groups']['all']['mae']['mean']:.3f} {unit}")

    matrix_path = out / "ablation_matrix.csv"
    with open(matrix_path, "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["metric", "group"] + [v.value for v in variants])
        for metric in _MATRIX_METRICS:
            for group in _MATRIX_GROUPS:
                row = [metric, group]
                for variant in variants:
                    block = payloads[variant.value]["groups"][group]
                    if block.get("omitted") or block[metric]["mean"] is None:
                        row.append("n/a")
                    else:
                        row.append(f"{block[metric]['mean']!r}±{block[metric]['std']!r}")
                writer.writerow(row)
    _write_run_manifest(out, "ablate", args, ["ablation_matrix.csv", "split.json"])
    print(f"ablation matrix written to {matrix_path}")


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def cmd_serve(args) -> None:
    import uvicorn

    from .service.app import create_app

    app = create_app(checkpoint=args.checkpoint)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surgdur", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON config file with model/schedule overrides")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--force", action="store_true", help="overwrite non-empty output dirs")

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--n-videos", type=int, default=50)
    p.add_argument("--senior-mean", type=float, default=60.0)
    p.add_argument("--assistant-mean", type=float, default=120.0)
    p.add_argument("--rel-std", type=float, default=None)
    p.add_argument("--fps", type=float, default=2.5)
    p.add_argument("--frame-size", type=int, default=64)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--surgeons-per-level", type=int, default=1)
    p.add_argument("--unit", default="s")
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="run the staged training over folds")
    common(p)
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--variant", default="catanet")
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--n-test-per-surgeon", type=int, default=5)
    p.add_argument("--stage", type=int, default=1, help="resume from this stage (>1 needs checkpoints)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="ensemble fold checkpoints and write a report")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoints", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", help="split.json (default: alongside the checkpoints)")
    p.add_argument("--videos", choices=["test", "train", "all"], default="test")
    p.add_argument("--with-speed", action="store_true")
    p.add_argument("--speed-warmup", type=int, default=10)
    p.add_argument("--speed-measure", type=int, default=50)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("infer-stream", help="stream per-frame predictions for one video")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--video-id", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--url", help="run against a serving instance instead of a local checkpoint")
    p.add_argument("--out", help="write lines to this file instead of stdout")
    p.add_argument("--realtime", action="store_true")
    p.add_argument("--budget-ms", type=float, default=None)
    p.set_defaults(handler=cmd_infer_stream)

    p = sub.add_parser("bench", help="measure inference throughput")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--warmup", type=int, default=100)
    p.add_argument("--measure", type=int, default=1000)
    p.add_argument("--out", help="directory for speed.json and the run manifest")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("ablate", help="train and evaluate a list of variants on shared folds")
    common(p)
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--variants", default="catanet,iii,iv,naive")
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--n-test-per-surgeon", type=int, default=5)
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("serve", help="run the FastAPI inference service")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 2
    try:
        args.handler(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (DatasetIOError, OSError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
