import json
import math

import numpy as np
import pytest

from birdseye.calibration import BodyModel
from birdseye.errors import DomainError
from birdseye.pipeline import PosePipeline, body_orientation
from birdseye.simulator import (
    Actor,
    generate,
    pose_frame_to_json_dict,
    render_frame,
    run,
    skeleton_at,
    truth_to_json_dict,
)

from simfix import (
    ROBOT_PROFILE,
    calibrate_views,
    make_camera,
    make_scenario,
    make_views,
    stationary,
    walker,
)


class TestSkeleton:
    def test_shoulder_placement_matches_band_model(self):
        actor = walker("a", [(0.0, 0.0), (10.0, 0.0)], speed=1.0)
        skel = skeleton_at(actor, 0.0)
        np.testing.assert_allclose(skel["left_shoulder"], (0.0, 0.20, 1.435),
                                   atol=1e-12)
        np.testing.assert_allclose(skel["right_shoulder"], (0.0, -0.20, 1.435),
                                   atol=1e-12)
        np.testing.assert_allclose(skel["left_ankle"], (0.0, 0.125, 0.0),
                                   atol=1e-12)
        np.testing.assert_allclose(skel["left_hip"], (0.0, 0.15, 0.9275),
                                   atol=1e-12)

    def test_shoulder_midpoint_is_actor_position(self):
        actor = walker("a", [(1.0, 2.0), (4.0, 5.0)], speed=1.3)
        for t in np.linspace(0, 2.0, 7):
            skel = skeleton_at(actor, float(t))
            mid = (np.array(skel["left_shoulder"]) +
                   np.array(skel["right_shoulder"])) / 2
            from birdseye.simulator import actor_pose_at
            pos, _ = actor_pose_at(actor, float(t))
            np.testing.assert_allclose(mid[:2], pos, atol=1e-12)

    def test_outside_span_absent(self):
        actor = walker("a", [(0.0, 0.0), (1.0, 0.0)], speed=1.0, start_t=1.0)
        assert skeleton_at(actor, 0.5) is None
        assert skeleton_at(actor, 2.5) is None

    def test_heading_carries_through_pause(self):
        actor = Actor("a", "human", waypoints=(
            (0.0, (0.0, 0.0)), (1.0, (1.0, 0.0)),  # move east
            (3.0, (1.0, 0.0)),                     # pause
        ))
        from birdseye.simulator import actor_pose_at
        _, heading = actor_pose_at(actor, 2.0)
        np.testing.assert_allclose(heading, (1.0, 0.0), atol=1e-12)

    def test_robot_keypoints_stacked_at_position(self):
        actor = stationary("bot", (2.0, 1.0), 5.0, cls="robot")
        skel = skeleton_at(actor, 1.0)
        assert set(skel) == {"base", "mast_top"}
        np.testing.assert_allclose(skel["base"], (2.0, 1.0, 0.15), atol=1e-12)

    def test_orientation_loop_closes_with_pipeline(self):
        """Projected noiseless shoulders give back the scripted heading."""
        cam = make_camera()
        views = make_views()
        calibs = calibrate_views(cam, views)
        actor = walker("a", [(0.0, 1.5), (2.0, 3.5)], speed=1.2)
        scenario = make_scenario([actor], duration=2.0, camera=cam, views=views)
        from birdseye.simulator import actor_pose_at
        checked = 0
        for frames, truth in generate(scenario, seed=0):
            _, heading = actor_pose_at(actor, truth.t_s)
            for frame in frames:
                for det in frame.detections:
                    facing = body_orientation(det, calibs[frame.view_id],
                                              BodyModel())
                    if facing is None:
                        continue
                    angle = math.atan2(facing[1], facing[0]) - \
                        math.atan2(heading[1], heading[0])
                    angle = (angle + math.pi) % (2 * math.pi) - math.pi
                    assert abs(angle) < 1e-6
                    checked += 1
        assert checked > 50


class TestRenderFrame:
    def test_actor_outside_frusta_truth_still_recorded(self):
        # directly under the camera: below every tilted view's footprint
        actor = stationary("a", (0.0, 0.0), 5.0)
        scenario = make_scenario([actor], views=make_views(tilt=-0.3))
        frames, truth = render_frame(scenario, 1.0, None)
        assert all(not f.detections for f in frames)
        assert len(truth.actors) == 1
        np.testing.assert_allclose(truth.actors[0].position_m, (0.0, 0.0))

    def test_keypoint_visibility_independent_of_noise(self):
        actor = walker("a", [(0.5, 1.0), (0.5, 6.0)], speed=1.5)
        names = []
        for noise in (0.0, 1.0, 4.0):
            scenario = make_scenario([actor], duration=3.0, noise=noise)
            seen = []
            for frames, _ in generate(scenario, seed=3):
                for f in frames:
                    for d in f.detections:
                        seen.append((f.t_s, f.view_id, tuple(sorted(d.keypoints))))
            names.append(seen)
        assert names[0] == names[1] == names[2]

    def test_occlusion_window_drops_keypoints(self):
        actor = stationary("a", (0.0, 2.0), 4.0)
        occ = ("a", ("left_ankle", "right_ankle"), 1.0, 2.0)
        scenario = make_scenario([actor], duration=4.0, occlusions=[occ])
        for frames, truth in generate(scenario, seed=0):
            present = set()
            for f in frames:
                for d in f.detections:
                    present |= set(d.keypoints)
            if 1.0 <= truth.t_s <= 2.0:
                assert "left_ankle" not in present
                assert "right_ankle" not in present
            elif present:
                assert "left_ankle" in present

    def test_confidence_model(self):
        actor = stationary("a", (0.0, 2.0), 1.0)
        clean = make_scenario([actor], duration=1.0, noise=0.0)
        noisy = make_scenario([actor], duration=1.0, noise=2.0)
        f0, _ = render_frame(clean, 0.5, None)
        f2, _ = render_frame(noisy, 0.5, np.random.default_rng(0))
        conf0 = {c for f in f0 for d in f.detections
                 for _, _, c in d.keypoints.values()}
        conf2 = {c for f in f2 for d in f.detections
                 for _, _, c in d.keypoints.values()}
        assert conf0 == {0.95}
        assert conf2 == {0.95 - 0.2}

    def test_out_of_duration_rejected(self):
        scenario = make_scenario([stationary("a", (0, 2), 1.0)], duration=1.0)
        with pytest.raises(DomainError):
            render_frame(scenario, 2.0, None)


class TestRun:
    def test_frame_count_and_empty_scenario(self, tmp_path):
        scenario = make_scenario([], duration=10.0, fps=30.0)
        n = run(scenario, tmp_path / "poses.ndjson", tmp_path / "truth.ndjson")
        assert n == 300
        lines = (tmp_path / "poses.ndjson").read_text().splitlines()
        assert len(lines) == 300 * len(scenario.views)
        rec = json.loads(lines[0])
        assert rec["detections"] == []
        truth_lines = (tmp_path / "truth.ndjson").read_text().splitlines()
        assert len(truth_lines) == 300

    def test_same_seed_byte_identical(self, tmp_path):
        actor = walker("a", [(0.5, 1.0), (0.5, 5.0)], speed=1.5)
        scenario = make_scenario([actor], duration=2.0, noise=1.5)
        run(scenario, tmp_path / "a.ndjson", tmp_path / "at.ndjson", seed=7)
        run(scenario, tmp_path / "b.ndjson", tmp_path / "bt.ndjson", seed=7)
        assert (tmp_path / "a.ndjson").read_bytes() == \
            (tmp_path / "b.ndjson").read_bytes()
        assert (tmp_path / "at.ndjson").read_bytes() == \
            (tmp_path / "bt.ndjson").read_bytes()

    def test_different_seed_differs(self, tmp_path):
        actor = walker("a", [(0.5, 1.0), (0.5, 5.0)], speed=1.5)
        scenario = make_scenario([actor], duration=2.0, noise=1.5)
        run(scenario, tmp_path / "a.ndjson", seed=7)
        run(scenario, tmp_path / "b.ndjson", seed=8)
        assert (tmp_path / "a.ndjson").read_bytes() != \
            (tmp_path / "b.ndjson").read_bytes()


class TestEndToEnd:
    def test_noiseless_lifting_round_trip(self):
        """Simulate -> calibrate from markers -> lift: < 1e-6 m per keypoint."""
        cam = make_camera()
        views = make_views()
        calibs = calibrate_views(cam, views)
        body = BodyModel()
        actor = walker("a", [(0.0, 1.2), (1.5, 4.0), (-1.0, 4.5)], speed=1.2)
        scenario = make_scenario([actor], duration=4.0, camera=cam, views=views)
        from birdseye.calibration import keypoint_height, lift_at_height
        from birdseye.simulator import skeleton_at
        checked = 0
        for frames, truth in generate(scenario, seed=0):
            skel = skeleton_at(actor, truth.t_s)
            for frame in frames:
                for det in frame.detections:
                    for name, (u, v, _) in det.keypoints.items():
                        h = keypoint_height(body, name)
                        lifted = lift_at_height(calibs[frame.view_id], (u, v), h)
                        np.testing.assert_allclose(lifted, skel[name][:2],
                                                   atol=1e-6)
                        checked += 1
        assert checked > 500

    def test_noiseless_pipeline_tracks_stationary_truth(self):
        cam = make_camera()
        views = make_views()
        calibs = calibrate_views(cam, views)
        actor = stationary("a", (0.8, 2.2), 2.0)
        scenario = make_scenario([actor], duration=2.0, camera=cam, views=views)
        pipe = PosePipeline(calibs, BodyModel())
        for frames, truth in generate(scenario, seed=0):
            entities, _ = pipe.process(list(frames))
            assert len(entities) == 1
            assert math.dist(entities[0].position_m, (0.8, 2.2)) < 1e-5
