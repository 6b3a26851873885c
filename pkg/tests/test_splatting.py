import numpy as np
import pytest

from splatflow.numerics import SeedStream, Tensor, max_relative_error, parameter
from splatflow.splatting import (
    BodyPose,
    Camera,
    SkinnedRig,
    SplatBatch,
    humanoid_rig,
    lbs_apply,
    lbs_transform,
    load_splats,
    look_at,
    project_splat,
    quat_from_axis_angle,
    rasterize,
    save_splats,
)


def random_splats(stream: SeedStream, count: int, spread=0.5, depth_jitter=0.4) -> SplatBatch:
    quats = stream.normal((count, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    return SplatBatch(
        positions=np.stack(
            [
                stream.uniform(-spread, spread, (count,)),
                stream.uniform(-spread, spread, (count,)),
                stream.uniform(-depth_jitter, depth_jitter, (count,)),
            ],
            axis=1,
        ),
        log_scales=stream.uniform(-3.5, -2.2, (count, 3)),
        rotations=quats,
        opacity_logits=stream.uniform(-1.0, 2.0, (count,)),
        colors=stream.uniform(0.05, 0.95, (count, 3)),
    )


def frontal_camera(width=32, height=32, distance=3.0, fov=30.0) -> Camera:
    return look_at((0.0, 0.0, -distance), (0.0, 0.0, 0.0), width, height, fov_y_deg=fov)


def single_joint_rig() -> SkinnedRig:
    return SkinnedRig(
        parents=np.array([-1]),
        local_offsets=np.zeros((1, 3)),
        bone_tips=np.array([[0.0, 1.0, 0.0]]),
        joint_names=["root"],
    )


class TestLBS:
    def test_identity_pose_is_bitwise_identity(self):
        stream = SeedStream(1)
        rig = humanoid_rig()
        splats = random_splats(stream.child("s"), 16)
        weights = rig.skin_weights(stream.child("p").uniform(-0.5, 0.5, (2, 3)))
        posed = lbs_transform(splats, rig, BodyPose.identity(rig.n_joints), weights)
        assert np.array_equal(posed.positions, splats.positions)
        assert np.array_equal(posed.rotations, splats.rotations / np.linalg.norm(splats.rotations, axis=1, keepdims=True))

    def test_single_joint_right_angle(self):
        rig = single_joint_rig()
        splats = random_splats(SeedStream(2).child("s"), 8)
        splats.positions[:] = [1.0, 0.0, 0.0]
        pose = BodyPose(quat_from_axis_angle([0, 0, 1], np.pi / 2)[None, :], np.zeros(3))
        posed = lbs_transform(splats, rig, pose, np.ones((1, 1)))
        assert np.abs(posed.positions - [0.0, 1.0, 0.0]).max() < 1e-9

    def test_half_weight_translation_blend(self):
        # Joint A identity, joint B a pure translation by (2, 0, 0): the
        # blended displacement at weights (0.5, 0.5) is (1, 0, 0).
        splats = random_splats(SeedStream(3).child("s"), 8)
        rest = np.array([[0.0, 0.0, 0.0], [0.3, 0.1, 0.0]])
        rots = np.stack([np.eye(3), np.eye(3)])
        trans = np.stack([rest[0], rest[1] + [2.0, 0.0, 0.0]])
        quats = np.array([[1.0, 0, 0, 0], [1.0, 0, 0, 0]])
        posed = lbs_apply(splats, np.array([[0.5, 0.5]]), rots, trans, quats, rest)
        assert np.allclose(posed.positions - splats.positions, [1.0, 0.0, 0.0])

    def test_bad_weight_rows_rejected(self):
        rig = humanoid_rig()
        splats = random_splats(SeedStream(4).child("s"), 8)
        weights = np.full((1, 8), 0.25)
        with pytest.raises(ValueError):
            lbs_transform(splats, rig, BodyPose.identity(8), weights)

    def test_scales_unchanged(self):
        stream = SeedStream(5)
        rig = humanoid_rig()
        splats = random_splats(stream.child("s"), 8)
        weights = rig.skin_weights(np.zeros((1, 3)))
        pose = BodyPose.random(stream.child("pose"), rig.n_joints)
        posed = lbs_transform(splats, rig, pose, weights)
        assert np.array_equal(posed.log_scales, splats.log_scales)


class TestProjection:
    def test_isotropic_on_axis_covariance(self):
        cam = frontal_camera()
        sigma = 0.05
        depth = 3.0  # camera sits at distance 3 from the origin
        splats = SplatBatch(
            positions=np.zeros((1, 3)),
            log_scales=np.full((1, 3), np.log(sigma)),
            rotations=np.array([[1.0, 0, 0, 0]]),
            opacity_logits=np.zeros(1),
            colors=np.full((1, 3), 0.5),
        )
        mean, cov = project_splat(splats, 0, cam)
        expected = (cam.fx / depth) ** 2 * sigma**2 * np.eye(2)
        assert np.allclose(cov, expected, rtol=1e-6)
        assert np.allclose(mean, [cam.cx, cam.cy])

    def test_doubling_depth_quarters_covariance(self):
        cam = frontal_camera(distance=2.0)
        base = SplatBatch(
            positions=np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 2.0]]),
            log_scales=np.full((2, 3), np.log(0.05)),
            rotations=np.array([[1.0, 0, 0, 0]] * 2),
            opacity_logits=np.zeros(2),
            colors=np.full((2, 3), 0.5),
        )
        _, cov_near = project_splat(base, 0, cam)
        _, cov_far = project_splat(base, 1, cam)
        assert np.allclose(cov_far, cov_near / 4.0, rtol=1e-6)

    def test_zero_depth_culled(self):
        cam = frontal_camera(distance=1.0)
        splats = SplatBatch(
            positions=np.array([[0.0, 0.0, -1.0]]),  # at the camera origin
            log_scales=np.full((1, 3), -3.0),
            rotations=np.array([[1.0, 0, 0, 0]]),
            opacity_logits=np.zeros(1),
            colors=np.full((1, 3), 0.5),
        )
        assert project_splat(splats, 0, cam) is None


class TestRasterize:
    def test_empty_scene(self):
        res = rasterize(SplatBatch.empty(), frontal_camera())
        assert res.image.data.shape == (32, 32, 4)
        assert np.all(res.image.data == 0.0)
        assert res.contributions.data.shape == (0,)

    def test_single_opaque_splat_center_color(self):
        # Center the splat exactly on a pixel center so the closed-form
        # compositing value at that pixel is opacity * color.
        w = h = 33
        cam = look_at((0.0, 0.0, -3.0), (0.0, 0.0, 0.0), w, h, fov_y_deg=30.0)
        sigma_px = 4.5  # ~9 px footprint
        sigma_world = sigma_px * 3.0 / cam.fx
        color = np.array([0.8, 0.3, 0.6])
        splats = SplatBatch(
            positions=np.zeros((1, 3)),
            log_scales=np.full((1, 3), np.log(sigma_world)),
            rotations=np.array([[1.0, 0, 0, 0]]),
            opacity_logits=np.array([8.0]),
            colors=color[None, :],
        )
        res = rasterize(splats, cam)
        center = res.image.data[h // 2, w // 2]
        opacity = 1.0 / (1.0 + np.exp(-8.0))
        assert np.abs(center[:3] - opacity * color).max() < 2e-2
        assert float(res.contributions.data[0]) > 0.0

    def test_occluded_far_splat_contribution(self):
        # The far splat's footprint lies inside the near splat's high-alpha
        # core, so its transmittance is ~= 1 - 0.995 everywhere it has mass.
        cam = frontal_camera()
        near_logit = np.log(0.995 / 0.005)
        splats = SplatBatch(
            positions=np.array([[0.0, 0.0, -0.5], [0.0, 0.0, 0.5]]),
            log_scales=np.concatenate(
                [np.full((1, 3), np.log(0.20)), np.full((1, 3), np.log(0.05))]
            ),
            rotations=np.array([[1.0, 0, 0, 0]] * 2),
            opacity_logits=np.array([near_logit, near_logit]),
            colors=np.full((2, 3), 0.5),
        )
        res = rasterize(splats, cam)
        near, far = res.contributions.data
        assert far < 0.01 * near

    def test_alpha_in_unit_interval(self):
        stream = SeedStream(7)
        splats = random_splats(stream.child("s"), 64)
        res = rasterize(splats, frontal_camera())
        alpha = res.image.data[..., 3]
        assert alpha.min() >= 0.0 and alpha.max() <= 1.0 + 1e-12

    def test_input_order_invariance(self):
        stream = SeedStream(8)
        splats = random_splats(stream.child("s"), 48)
        cam = frontal_camera()
        perm = stream.child("perm").permutation(48)
        res_a = rasterize(splats, cam)
        res_b = rasterize(splats.take(perm), cam)
        assert np.array_equal(res_a.image.data, res_b.image.data)
        assert np.array_equal(res_a.contributions.data[perm], res_b.contributions.data)

    def test_contribution_monotone_in_opacity(self):
        stream = SeedStream(9)
        splats = random_splats(stream.child("s"), 24)
        cam = frontal_camera()
        base = rasterize(splats, cam).contributions.data.copy()
        for bump in (0.5, 1.5):
            boosted = splats.copy()
            boosted.opacity_logits[5] += bump
            res = rasterize(boosted, cam).contributions.data
            assert res[5] >= base[5] - 1e-12

    def test_gradients_match_finite_differences(self):
        # Opacity and color gradients on a small scene (<= 20 splats, 32x32).
        stream = SeedStream(10)
        splats = random_splats(stream.child("s"), 12)
        splats.opacity_logits = np.clip(splats.opacity_logits, -1.0, 1.5)
        cam = frontal_camera()
        opac = parameter(splats.opacity_logits.copy())
        colors = parameter(splats.colors.copy())
        weight_img = stream.child("w").normal((32, 32, 4))
        weight_c = stream.child("wc").normal((12,))

        def f():
            scene = SplatBatch(splats.positions, splats.log_scales, splats.rotations, opac, colors)
            res = rasterize(scene, cam)
            from splatflow.numerics import ops

            return ops.add(
                ops.sum(ops.mul(res.image, Tensor(weight_img))),
                ops.sum(ops.mul(res.contributions, Tensor(weight_c))),
            )

        assert max_relative_error(f, [opac, colors], h=1e-5) < 1e-3

    def test_geometry_gradients_match_finite_differences(self):
        stream = SeedStream(11)
        splats = random_splats(stream.child("s"), 6)
        cam = frontal_camera()
        pos = parameter(splats.positions.copy())
        scales = parameter(splats.log_scales.copy())
        weight_img = stream.child("w").normal((32, 32, 4))

        def f():
            scene = SplatBatch(pos, scales, splats.rotations, splats.opacity_logits, splats.colors)
            from splatflow.numerics import ops

            return ops.sum(ops.mul(rasterize(scene, cam).image, Tensor(weight_img)))

        assert max_relative_error(f, [pos, scales], h=1e-6) < 1e-3


class TestSceneDump:
    def test_round_trip(self, tmp_path):
        stream = SeedStream(12)
        splats = random_splats(stream.child("s"), 10)
        path = tmp_path / "scene.splats"
        save_splats(path, splats)
        loaded = load_splats(path)
        assert len(loaded) == 10
        assert np.allclose(loaded.positions, splats.positions, atol=1e-6)
        assert np.allclose(loaded.colors, splats.colors, atol=1e-7)

    def test_byte_determinism(self, tmp_path):
        splats = random_splats(SeedStream(13).child("s"), 5)
        p1, p2 = tmp_path / "a.splats", tmp_path / "b.splats"
        save_splats(p1, splats)
        save_splats(p2, splats)
        assert p1.read_bytes() == p2.read_bytes()
