import csv
import json
from pathlib import Path

import numpy as np
import pytest

from surgdur.cli import main
from surgdur.data import load_dataset
from surgdur.evaluation import load_report
from surgdur.model.checkpoint import save_oracle_checkpoint

MICRO_CONFIG = {
    "model": {
        "frame_size": [16, 16],
        "encoder_channels": [8],
        "frame_descriptor_dim": 8,
        "video_descriptor_dim": 8,
        "recurrent_layers": 1,
        "t_max_s": 30.0,
    },
    "schedule": {
        "stages": [
            {"stage_id": 1, "epochs": 1, "learning_rate": 3e-4, "frozen": [], "loss": "cnn_loss",
             "early_stopping": {"patience": 2, "eval_interval": 0.5}},
            {"stage_id": 2, "epochs": 2, "learning_rate": 1e-3, "frozen": ["ENCODER"], "loss": "rnn_loss",
             "early_stopping": {"patience": 5, "eval_interval": 1.0}},
            {"stage_id": 3, "epochs": 1, "learning_rate": 2e-5, "frozen": [], "loss": "rnn_loss",
             "early_stopping": {"patience": 5, "eval_interval": 1.0}},
            {"stage_id": 4, "epochs": 1, "learning_rate": 5e-4, "frozen": ["ENCODER"], "loss": "rnn_loss",
             "early_stopping": {"patience": 5, "eval_interval": 1.0}},
        ],
        "n_per_phase": 8,
        "batch_size_stage1": 16,
        "tbptt_window": 16,
    },
}

GEN_FLAGS = [
    "--n-videos", "6",
    "--senior-mean", "8",
    "--assistant-mean", "12",
    "--frame-size", "16",
    "--noise", "0.03",
]


@pytest.fixture(scope="module")
def micro_config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "micro.json"
    path.write_text(json.dumps(MICRO_CONFIG))
    return str(path)


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "ds"
    assert main(["gen-data", "--out", str(out), "--seed", "5"] + GEN_FLAGS) == 0
    return str(out)


@pytest.fixture(scope="module")
def trained_dir(tmp_path_factory, dataset_dir, micro_config_file):
    out = tmp_path_factory.mktemp("runs") / "train"
    code = main(
        [
            "train", "--data", dataset_dir, "--out", str(out),
            "--variant", "catanet", "--folds", "2", "--n-test-per-surgeon", "1",
            "--seed", "3", "--config", micro_config_file,
        ]
    )
    assert code == 0
    return str(out)


class TestGenData:
    def test_deterministic_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["gen-data", "--out", str(out), "--seed", "9"] + GEN_FLAGS) == 0
        for name in ("manifest.json",):
            assert (a / name).read_text() == (b / name).read_text()
        ann_a = sorted(a.glob("*/annotations.csv"))
        ann_b = sorted(b.glob("*/annotations.csv"))
        assert len(ann_a) == 6
        for pa, pb in zip(ann_a, ann_b):
            assert pa.read_text() == pb.read_text()

    def test_refuses_non_empty_without_force(self, tmp_path):
        out = tmp_path / "ds"
        assert main(["gen-data", "--out", str(out), "--seed", "1"] + GEN_FLAGS) == 0
        assert main(["gen-data", "--out", str(out), "--seed", "1"] + GEN_FLAGS) == 2
        assert main(["gen-data", "--out", str(out), "--seed", "1", "--force"] + GEN_FLAGS) == 0

    def test_zero_videos_is_validation_error(self, tmp_path):
        assert main(["gen-data", "--out", str(tmp_path / "x"), "--n-videos", "0"]) == 2

    def test_run_manifest_written(self, tmp_path):
        out = tmp_path / "ds"
        main(["gen-data", "--out", str(out), "--seed", "2"] + GEN_FLAGS)
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["command"] == "gen-data"
        assert manifest["seed"] == 2
        assert manifest["input_hash"]

    @pytest.mark.slow
    def test_summary_means_match_requested_totals(self, tmp_path, capsys):
        # published per-level mean totals, checked over 200 generated videos
        out = tmp_path / "mc"
        code = main(
            [
                "gen-data", "--out", str(out), "--seed", "4", "--n-videos", "200",
                "--senior-mean", "5.6", "--assistant-mean", "11.8",
                "--frame-size", "8", "--unit", "min",
            ]
        )
        assert code == 0
        summary = capsys.readouterr().out
        means = {}
        for line in summary.splitlines():
            parts = line.split()
            if parts and parts[0] in ("senior:", "assistant:"):
                means[parts[0].rstrip(":")] = float(parts[-2])
        assert abs(means["senior"] - 5.6) / 5.6 < 0.05
        assert abs(means["assistant"] - 11.8) / 11.8 < 0.05


class TestTrain:
    def test_checkpoints_and_logs_written(self, trained_dir):
        out = Path(trained_dir)
        assert (out / "fold0.pt").exists() and (out / "fold1.pt").exists()
        assert (out / "fold0.json").exists()
        assert (out / "split.json").exists()
        with open(out / "fold0_stages.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["stage"] for r in rows} == {"1", "2", "3", "4"}
        assert {r["split"] for r in rows} == {"train", "val"}

    def test_sidecar_records_variant_config(self, tmp_path, dataset_dir, micro_config_file):
        out = tmp_path / "iv"
        code = main(
            [
                "train", "--data", dataset_dir, "--out", str(out),
                "--variant", "iv", "--folds", "2", "--n-test-per-surgeon", "1",
                "--seed", "3", "--config", micro_config_file,
            ]
        )
        assert code == 0
        sidecar = json.loads((out / "fold0.json").read_text())
        assert sidecar["variant"] == "iv"
        assert sidecar["model_config"]["elapsed_mode"] == "after_rnn"
        assert sidecar["label_usage"]["phase"] == 0
        assert sidecar["label_usage"]["exp"] == 0

    def test_resume_stage_without_checkpoint_fails(self, tmp_path, dataset_dir, micro_config_file):
        out = tmp_path / "resume"
        code = main(
            [
                "train", "--data", dataset_dir, "--out", str(out),
                "--stage", "2", "--config", micro_config_file,
            ]
        )
        assert code == 3

    def test_resume_from_stage(self, tmp_path, dataset_dir, micro_config_file, trained_dir):
        # a stage-4 model cannot redo stage 4
        code = main(
            [
                "train", "--data", dataset_dir, "--out", trained_dir,
                "--stage", "4", "--config", micro_config_file,
            ]
        )
        assert code == 2

    def test_naive_variant_rejected(self, tmp_path, dataset_dir):
        code = main(
            ["train", "--data", dataset_dir, "--out", str(tmp_path / "x"), "--variant", "naive"]
        )
        assert code == 2


class TestEval:
    def test_oracle_checkpoint_gives_perfect_report(self, tmp_path, dataset_dir):
        ckpt = save_oracle_checkpoint(tmp_path / "oracle")
        out = tmp_path / "report"
        code = main(
            [
                "eval", "--data", dataset_dir, "--checkpoints", str(ckpt),
                "--out", str(out), "--videos", "all",
            ]
        )
        assert code == 0
        payload = load_report(out / "report.json")
        assert payload["groups"]["all"]["mae"]["mean"] == 0.0
        assert payload["phase"]["acc"]["mean"] == 1.0
        assert payload["experience_acc"]["mean"] == 1.0
        assert payload["speed"] is None

    def test_single_vs_duplicated_fold_identical(self, tmp_path, dataset_dir, trained_dir):
        ckpt = str(Path(trained_dir) / "fold0.pt")
        out1, out2 = tmp_path / "one", tmp_path / "two"
        assert main(["eval", "--data", dataset_dir, "--checkpoints", ckpt, "--out", str(out1)]) == 0
        assert (
            main(["eval", "--data", dataset_dir, "--checkpoints", ckpt, ckpt, "--out", str(out2)])
            == 0
        )
        assert (out1 / "report.json").read_text() == (out2 / "report.json").read_text()

    def test_plot_data_row_count_matches_frames(self, tmp_path, dataset_dir, trained_dir):
        out = tmp_path / "rep"
        assert main(["eval", "--data", dataset_dir, "--checkpoints", trained_dir, "--out", str(out)]) == 0
        split = json.loads((Path(trained_dir) / "split.json").read_text())
        videos = {v.video_id: v for v in load_dataset(dataset_dir)}
        for vid in split["test_ids"]:
            with open(out / "plots" / f"{vid}.csv", newline="") as fh:
                rows = list(csv.DictReader(fh))
            assert len(rows) == len(videos[vid])
            assert (out / "plots" / f"{vid}.png").exists()

    def test_config_mismatch_rejected(self, tmp_path, dataset_dir, trained_dir, micro_config_file):
        other_cfg = dict(MICRO_CONFIG)
        other_cfg["model"] = dict(MICRO_CONFIG["model"], frame_descriptor_dim=12)
        cfg_path = tmp_path / "other.json"
        cfg_path.write_text(json.dumps(other_cfg))
        other_train = tmp_path / "other_train"
        assert main(
            [
                "train", "--data", dataset_dir, "--out", str(other_train),
                "--folds", "2", "--n-test-per-surgeon", "1", "--seed", "3",
                "--config", str(cfg_path),
            ]
        ) == 0
        code = main(
            [
                "eval", "--data", dataset_dir,
                "--checkpoints", str(Path(trained_dir) / "fold0.pt"),
                str(other_train / "fold0.pt"),
                "--out", str(tmp_path / "mix"),
            ]
        )
        assert code == 2


class TestInferStream:
    def test_stream_line_count_and_batch_agreement(self, tmp_path, dataset_dir, trained_dir):
        split = json.loads((Path(trained_dir) / "split.json").read_text())
        vid = split["test_ids"][0]
        stream_out = tmp_path / "stream.csv"
        code = main(
            [
                "infer-stream", "--data", dataset_dir, "--video-id", vid,
                "--checkpoint", str(Path(trained_dir) / "fold0.pt"),
                "--out", str(stream_out),
            ]
        )
        assert code == 0
        lines = stream_out.read_text().splitlines()
        videos = {v.video_id: v for v in load_dataset(dataset_dir)}
        assert len(lines) == len(videos[vid])

        eval_out = tmp_path / "eval"
        assert main(
            [
                "eval", "--data", dataset_dir,
                "--checkpoints", str(Path(trained_dir) / "fold0.pt"),
                "--out", str(eval_out),
            ]
        ) == 0
        with open(eval_out / "plots" / f"{vid}.csv", newline="") as fh:
            batch_rows = list(csv.DictReader(fh))
        for line, row in zip(lines, batch_rows):
            parts = line.split(",")
            assert float(parts[2]) == pytest.approx(float(row["rsd_pred"]), abs=1e-5)
            assert int(parts[3]) == int(float(row["phase_pred"]))
            assert float(parts[4]) == pytest.approx(float(row["p_senior"]), abs=1e-5)

    def test_realtime_status_reported(self, capsys, dataset_dir, trained_dir):
        split = json.loads((Path(trained_dir) / "split.json").read_text())
        vid = split["test_ids"][0]
        code = main(
            [
                "infer-stream", "--data", dataset_dir, "--video-id", vid,
                "--checkpoint", str(Path(trained_dir) / "fold0.pt"), "--realtime",
            ]
        )
        assert code == 0
        captured = capsys.readouterr()
        assert "status=" in captured.err
        videos = {v.video_id for v in load_dataset(dataset_dir)}

    def test_missing_checkpoint_and_url(self, dataset_dir):
        assert main(["infer-stream", "--data", dataset_dir, "--video-id", "v000"]) == 2

    def test_unknown_video(self, dataset_dir, trained_dir):
        code = main(
            [
                "infer-stream", "--data", dataset_dir, "--video-id", "nope",
                "--checkpoint", str(Path(trained_dir) / "fold0.pt"),
            ]
        )
        assert code == 2


class TestBench:
    def test_header_and_fps_arithmetic(self, capsys, trained_dir):
        code = main(
            [
                "bench", "--checkpoint", str(Path(trained_dir) / "fold0.pt"),
                "--warmup", "3", "--measure", "10",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "warmup=3 measured=10" in out
        for line in out.splitlines():
            if line.startswith("per-frame:"):
                mean_ms = float(line.split()[1])
                fps = float(line.split("(")[1].split()[0])
                assert fps == pytest.approx(1000.0 / mean_ms, rel=0.02)

    def test_default_header_values(self, capsys, trained_dir, monkeypatch):
        import surgdur.cli as cli_mod

        def fake_measure(model, n_warmup, n_measure):
            from surgdur.evaluation import SpeedStats

            return SpeedStats(1.0, 0.0, 1000.0, n_warmup, n_measure)

        monkeypatch.setattr(cli_mod, "measure_inference_speed", fake_measure)
        assert main(["bench", "--checkpoint", str(Path(trained_dir) / "fold0.pt")]) == 0
        assert "warmup=100 measured=1000" in capsys.readouterr().out

    def test_out_dir_gets_speed_json_and_manifest(self, tmp_path, trained_dir):
        out = tmp_path / "bench"
        code = main(
            [
                "bench", "--checkpoint", str(Path(trained_dir) / "fold0.pt"),
                "--warmup", "2", "--measure", "5", "--out", str(out),
            ]
        )
        assert code == 0
        speed = json.loads((out / "speed.json").read_text())
        assert speed["n_warmup"] == 2 and speed["n_measure"] == 5
        assert (out / "run_manifest.json").exists()


@pytest.fixture(scope="module")
def ablation_dir(tmp_path_factory, dataset_dir, micro_config_file):
    out = tmp_path_factory.mktemp("abl") / "run"
    code = main(
        [
            "ablate", "--data", dataset_dir, "--out", str(out),
            "--variants", "catanet,iii,naive", "--folds", "2",
            "--n-test-per-surgeon", "1", "--seed", "3",
            "--config", micro_config_file,
        ]
    )
    assert code == 0
    return out


class TestAblate:
    def test_matrix_has_requested_columns(self, ablation_dir):
        with open(ablation_dir / "ablation_matrix.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["metric", "group", "catanet", "iii", "naive"]
        assert len(rows) == 1 + 4 * 3  # four metrics x three groups

    def test_naive_needs_no_training_logs(self, ablation_dir):
        naive_dir = ablation_dir / "variant_naive"
        assert (naive_dir / "report.json").exists()
        assert not list(naive_dir.glob("*_stages.csv"))
        assert not list(naive_dir.glob("*.pt"))

    def test_matrix_cells_recompute_from_reports(self, ablation_dir):
        with open(ablation_dir / "ablation_matrix.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        for row in rows[1:]:
            metric, group = row[0], row[1]
            for variant, cell in zip(header[2:], row[2:]):
                payload = load_report(ablation_dir / f"variant_{variant}" / "report.json")
                block = payload["groups"][group]
                if cell == "n/a":
                    assert block.get("omitted") or block[metric]["mean"] is None
                else:
                    mean, std = cell.split("±")
                    assert float(mean) == block[metric]["mean"]
                    assert float(std) == block[metric]["std"]


class TestConfigFile:
    def test_train_reads_paths_and_seed_from_config(self, tmp_path, dataset_dir):
        cfg = {**MICRO_CONFIG, "data": dataset_dir, "out": str(tmp_path / "from_cfg"), "seed": 3}
        cfg_path = tmp_path / "train.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(
            ["train", "--config", str(cfg_path), "--folds", "2", "--n-test-per-surgeon", "1"]
        )
        assert code == 0
        sidecar = json.loads((tmp_path / "from_cfg" / "fold0.json").read_text())
        assert sidecar["seed"] == 3

    def test_flags_override_config_paths(self, tmp_path, dataset_dir):
        cfg = {**MICRO_CONFIG, "data": "/nonexistent", "out": str(tmp_path / "cfg_out")}
        cfg_path = tmp_path / "train.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(
            [
                "train", "--config", str(cfg_path), "--data", dataset_dir,
                "--out", str(tmp_path / "flag_out"), "--folds", "2",
                "--n-test-per-surgeon", "1", "--seed", "3",
            ]
        )
        assert code == 0
        assert (tmp_path / "flag_out" / "fold0.pt").exists()

    def test_missing_paths_everywhere_is_validation_error(self, tmp_path):
        assert main(["train"]) == 2

    def test_resume_continues_partial_schedule(self, tmp_path, dataset_dir):
        partial = {
            "model": MICRO_CONFIG["model"],
            "schedule": {**MICRO_CONFIG["schedule"], "stages": MICRO_CONFIG["schedule"]["stages"][:2]},
        }
        full = MICRO_CONFIG
        partial_path = tmp_path / "partial.json"
        partial_path.write_text(json.dumps(partial))
        full_path = tmp_path / "full.json"
        full_path.write_text(json.dumps(full))
        out = tmp_path / "resume_run"
        assert main(
            [
                "train", "--data", dataset_dir, "--out", str(out), "--folds", "2",
                "--n-test-per-surgeon", "1", "--seed", "3", "--config", str(partial_path),
            ]
        ) == 0
        assert json.loads((out / "fold0.json").read_text())["stage_reached"] == 2
        assert main(
            [
                "train", "--data", dataset_dir, "--out", str(out), "--stage", "3",
                "--config", str(full_path),
            ]
        ) == 0
        assert json.loads((out / "fold0.json").read_text())["stage_reached"] == 4
        assert (out / "fold0_stages_resume3.csv").exists()


class TestExitCodes:
    def test_missing_dataset_is_io_error(self, tmp_path):
        assert main(["train", "--data", str(tmp_path / "none"), "--out", str(tmp_path / "o")]) == 3

    def test_unknown_variant_is_validation_error(self, dataset_dir, tmp_path):
        code = main(
            ["train", "--data", dataset_dir, "--out", str(tmp_path / "o"), "--variant", "vgg"]
        )
        assert code == 2

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().out.lower()
