import csv
import json

import numpy as np
import pytest

from surgdur.evaluation import (
    ReportConfig,
    SpeedStats,
    build_report,
    default_windows,
    load_report,
    report_to_dict,
    write_report,
)
from surgdur.errors import ValidationError
from surgdur.phases import ExperienceLevel

from test_metrics import make_track, random_track


def two_level_tracks():
    rsd_gt = [60.0, 40.0, 20.0]
    senior = make_track(
        [62.0, 41.0, 20.0], rsd_gt, phase_gt=[2, 3, 4], experience=ExperienceLevel.SENIOR,
        video_id="sen0",
    )
    assistant = make_track(
        [55.0, 39.0, 21.0], rsd_gt, phase_gt=[2, 3, 4], experience=ExperienceLevel.ASSISTANT,
        video_id="asst0",
    )
    return [senior, assistant]


class TestBuildReport:
    def test_all_group_aggregates_recompute_from_videos(self):
        report = build_report(two_level_tracks())
        payload = report_to_dict(report)
        maes = [v.mae for v in report.videos]
        assert payload["groups"]["all"]["mae"]["mean"] == pytest.approx(np.mean(maes))
        assert payload["groups"]["all"]["mae"]["std"] == pytest.approx(np.std(maes))
        assert payload["groups"]["all"]["mae"]["n"] == 2
        sen = [v.mae for v in report.videos if v.experience == "senior"]
        assert payload["groups"]["senior"]["mae"]["mean"] == pytest.approx(np.mean(sen))

    def test_group_with_no_videos_is_marked_omitted(self):
        report = build_report([two_level_tracks()[0]])  # senior only
        payload = report_to_dict(report)
        assert payload["groups"]["assistant"] == {"omitted": True, "n_videos": 0}
        assert "mae" in payload["groups"]["senior"]

    def test_mae_hyd_exclusions_listed(self):
        tracks = two_level_tracks()
        no_hyd = make_track(
            [10.0, 5.0], [10.0, 5.0], phase_gt=[0, 1], video_id="nohyd",
            experience=ExperienceLevel.SENIOR,
        )
        payload = report_to_dict(build_report(tracks + [no_hyd]))
        assert payload["groups"]["all"]["mae_hyd"]["excluded_ids"] == ["nohyd"]
        assert payload["groups"]["all"]["mae_hyd"]["n"] == 2

    def test_short_video_window_flag(self):
        report = build_report(two_level_tracks(), config=ReportConfig(unit="s"))
        assert all(v.mae5_all_frames for v in report.videos)  # 60 s < 300 s window

    def test_speed_embedded_when_given(self):
        stats = SpeedStats(mean_ms=10.0, std_ms=1.0, fps=100.0, n_warmup=5, n_measure=10)
        payload = report_to_dict(build_report(two_level_tracks(), speed_stats=stats))
        assert payload["speed"]["fps"] == 100.0

    def test_empty_tracks_rejected(self):
        with pytest.raises(ValidationError):
            build_report([])

    def test_default_windows_by_unit(self):
        assert default_windows("min") == {"mae5": 5.0, "mae2": 2.0}
        assert default_windows("s") == {"mae5": 300.0, "mae2": 120.0}


class TestWriteReport:
    def test_json_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        tracks = [random_track(rng, video_id=f"v{i}") for i in range(4)]
        report = build_report(tracks)
        payload = write_report(report, tmp_path / "report.json")
        loaded = load_report(tmp_path / "report.json")
        assert loaded == json.loads(json.dumps(payload))
        assert loaded["groups"]["all"]["mae"]["mean"] == payload["groups"]["all"]["mae"]["mean"]

    def test_csv_rows_recompute_to_json_aggregates(self, tmp_path):
        rng = np.random.default_rng(6)
        tracks = [random_track(rng, video_id=f"v{i}") for i in range(6)]
        report = build_report(tracks)
        payload = write_report(report, tmp_path / "report.json", tmp_path / "report.csv")
        with open(tmp_path / "report.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 6
        maes = [float(r["mae"]) for r in rows]
        assert np.mean(maes) == pytest.approx(payload["groups"]["all"]["mae"]["mean"], abs=0)
        assert np.std(maes) == pytest.approx(payload["groups"]["all"]["mae"]["std"], abs=0)
        accs = [float(r["acc"]) for r in rows]
        assert np.mean(accs) == pytest.approx(payload["phase"]["acc"]["mean"], abs=0)

    def test_unit_and_notes_in_header(self, tmp_path):
        report = build_report(two_level_tracks(), config=ReportConfig(unit="s"))
        payload = write_report(report, tmp_path / "report.json")
        assert payload["unit"] == "s"
        assert payload["notes"]["window_anchoring"] == "ground_truth_rsd"
        assert payload["speed"] is None
