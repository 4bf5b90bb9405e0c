import math

import numpy as np
import pytest

from rfmap.encoder import (
    ChannelLabel,
    FEATURE_LEN,
    RayImageTensor,
    combine_max_per_bs,
    combined_labels,
    encode_link_features,
    encode_pair,
    encode_scene_pair_tensor,
    encode_scene_tensor,
    mask_channels,
    pair_labels,
    rasterize_path_ray,
    ray_value,
    subsample_links,
)
from rfmap.errors import LabelMismatchError
from rfmap.geometry import Point2, TWO_PI
from rfmap.grids import GridSpec
from rfmap.raytracer import C_LIGHT, PathDescriptor, RadioLink, trace_scene
from rfmap.scene import GenParams, generate_scene

GRID = GridSpec(100, 100, 200.0)  # 2 m per pixel


def los_link(ue, bs, extra_paths=()):
    d = ue.dist(bs)
    los = PathDescriptor(
        aoa=math.atan2(ue.y - bs.y, ue.x - bs.x),
        aod=math.atan2(bs.y - ue.y, bs.x - ue.x),
        delay=d / C_LIGHT,
    )
    paths = tuple(sorted((los,) + tuple(extra_paths), key=lambda p: p.delay))
    return RadioLink(ue_index=0, bs_index=0, paths=paths)


# --- rasterize_path_ray -----------------------------------------------------


def test_axis_aligned_ray_marks_row_to_edge():
    ch = np.zeros((100, 100), np.float32)
    origin = Point2(1.0, 2 * 7 + 1.0)  # center of pixel (row 7, col 0)
    rasterize_path_ray(origin, 0.0, 0.5, GRID, ch)
    assert np.all(ch[7, :] == np.float32(0.5))
    ch[7, :] = 0.0
    assert np.all(ch == 0.0)


def test_zero_value_leaves_channel_unchanged():
    ch = np.zeros((100, 100), np.float32)
    rasterize_path_ray(Point2(50.0, 50.0), 1.0, 0.0, GRID, ch)
    assert np.all(ch == 0.0)


def test_max_semantics_on_crossing_rays():
    ch = np.zeros((100, 100), np.float32)
    rasterize_path_ray(Point2(1.0, 21.0), 0.0, 0.3, GRID, ch)  # row 10 east
    rasterize_path_ray(Point2(21.0, 1.0), math.pi / 2.0, 0.7, GRID, ch)  # col 10 north
    assert ch[10, 10] == np.float32(0.7)
    assert ch[10, 50] == np.float32(0.3)
    assert ch[50, 10] == np.float32(0.7)


def test_origin_pixel_keeps_at_least_its_value():
    rng = np.random.default_rng(3)
    for _ in range(50):
        ch = np.zeros((100, 100), np.float32)
        origin = Point2(*rng.uniform(0, 200, 2))
        angle = float(rng.uniform(0, TWO_PI))
        value = float(rng.uniform(0.1, 1.0))
        rasterize_path_ray(origin, angle, value, GRID, ch)
        r = min(99, int(origin.y / 2.0))
        c = min(99, int(origin.x / 2.0))
        assert ch[r, c] == np.float32(value)


def test_ray_hits_match_capsule_oracle():
    """Marked pixels are exactly those whose center is within half a pixel
    of the origin-to-boundary segment, plus the origin's own pixel."""
    rng = np.random.default_rng(17)
    grid = GridSpec(32, 32, 64.0)
    mpp = grid.meters_per_px
    for _ in range(60):
        ch = np.zeros((32, 32), np.float32)
        origin = Point2(*rng.uniform(0, 64, 2))
        angle = float(rng.uniform(0, TWO_PI))
        rasterize_path_ray(origin, angle, 1.0, grid, ch)
        dx, dy = math.cos(angle), math.sin(angle)
        u_exit = math.inf
        for o, d in ((origin.x, dx), (origin.y, dy)):
            if d > 1e-300:
                u_exit = min(u_exit, (64.0 - o) / d)
            elif d < -1e-300:
                u_exit = min(u_exit, -o / d)
        bx, by = origin.x + u_exit * dx, origin.y + u_exit * dy
        ex, ey = bx - origin.x, by - origin.y
        dd = ex * ex + ey * ey
        orow, ocol = min(31, int(origin.y / mpp)), min(31, int(origin.x / mpp))
        for r in range(32):
            for c in range(32):
                px, py = (c + 0.5) * mpp, (r + 0.5) * mpp
                t = 0.0 if dd == 0 else min(1.0, max(0.0, ((px - origin.x) * ex + (py - origin.y) * ey) / dd))
                dist = math.hypot(px - (origin.x + t * ex), py - (origin.y + t * ey))
                want = dist <= 0.5 * mpp or (r, c) == (orow, ocol)
                assert (ch[r, c] > 0) == want, (r, c)


def test_ray_value_clamps():
    assert ray_value(100.0 / C_LIGHT, 200.0) == pytest.approx(0.5)
    assert ray_value(3.0 * 200.0 / C_LIGHT, 200.0) == 1.0


def test_rasterize_validates_inputs():
    ch = np.zeros((100, 100), np.float32)
    with pytest.raises(ValueError):
        rasterize_path_ray(Point2(1.0, 1.0), 0.0, 1.5, GRID, ch)
    with pytest.raises(ValueError):
        rasterize_path_ray(Point2(-5.0, 1.0), 0.0, 0.5, GRID, ch)


# --- encode_pair -------------------------------------------------------------


def test_encode_pair_los_example():
    ue, bs = Point2(0.0, 0.0), Point2(100.0, 0.0)
    link = los_link(ue, bs)
    aoa_ch, aod_ch = encode_pair(200.0, link, ue, bs, GRID)
    # AoD: value-0.5 ray from the ue at angle 0 -> bottom row to the east edge
    assert np.all(aod_ch[0, :] == np.float32(0.5))
    assert np.all(aod_ch[1:, :] == 0.0)
    # AoA: value-0.5 ray from the bs at angle pi -> bottom row back to x=0
    # (column 50 holds the bs itself: the origin pixel always carries the value)
    assert np.all(aoa_ch[0, :51] == np.float32(0.5))
    assert np.all(aoa_ch[0, 51:] == 0.0)
    assert np.all(aoa_ch[1:, :] == 0.0)


def test_encode_pair_empty_link_gives_zero_channels():
    link = RadioLink(ue_index=0, bs_index=0, paths=())
    aoa_ch, aod_ch = encode_pair(200.0, link, Point2(1, 1), Point2(2, 2), GRID)
    assert not aoa_ch.any() and not aod_ch.any()


def test_encode_pair_clamps_long_paths():
    ue, bs = Point2(10.0, 10.0), Point2(11.0, 10.0)
    long_path = PathDescriptor(aoa=1.0, aod=2.0, delay=3.0 * 200.0 / C_LIGHT)
    link = RadioLink(ue_index=0, bs_index=0, paths=(long_path,))
    aoa_ch, aod_ch = encode_pair(200.0, link, ue, bs, GRID)
    assert aoa_ch.max() == 1.0 and aod_ch.max() == 1.0


# --- combine_max_per_bs ------------------------------------------------------


def test_combine_single_bs_is_reorder():
    rng = np.random.default_rng(5)
    data = rng.uniform(0, 1, (4, 16, 16)).astype(np.float32)
    t = RayImageTensor(data=data, labels=pair_labels(2, 1), grid=GridSpec(16, 16, 32.0))
    out = combine_max_per_bs(t, 2, 1)
    assert out.labels == combined_labels(2)
    np.testing.assert_array_equal(out.data, data)


def test_combine_elementwise_max():
    grid = GridSpec(16, 16, 32.0)
    a = np.zeros((16, 16), np.float32)
    b = np.zeros((16, 16), np.float32)
    a[0, 0], a[0, 1], a[1, 0] = 0.0, 1.0, 0.2
    b[0, 0], b[0, 1], b[1, 0] = 0.5, 0.0, 0.1
    data = np.zeros((4, 16, 16), np.float32)
    labels = pair_labels(1, 2)  # (aoa,0,0), (aod,0,0), (aoa,0,1), (aod,0,1)
    data[0], data[2] = a, b
    t = RayImageTensor(data=data, labels=labels, grid=grid)
    out = combine_max_per_bs(t, 1, 2)
    assert out.data.shape == (2, 16, 16)
    np.testing.assert_array_equal(out.data[0], np.maximum(a, b))
    assert not out.data[1].any()


def test_combine_rejects_label_mismatch():
    grid = GridSpec(16, 16, 32.0)
    data = np.zeros((2, 16, 16), np.float32)
    t = RayImageTensor(data=data, labels=combined_labels(1), grid=grid)
    with pytest.raises(LabelMismatchError):
        combine_max_per_bs(t, 1, 1)


def test_scene_tensor_equals_combined_pair_tensor():
    sc = generate_scene(GenParams(seed=8, n_ues=3, n_bss=2))
    links = trace_scene(sc)
    grid = GridSpec(64, 64, 200.0)
    direct = encode_scene_tensor(sc, links, grid)
    combined = combine_max_per_bs(encode_scene_pair_tensor(sc, links, grid), 3, 2)
    np.testing.assert_array_equal(direct.data, combined.data)
    assert direct.labels == combined.labels


# --- feature vectors ---------------------------------------------------------


def test_features_empty_link_is_all_zero():
    link = RadioLink(ue_index=0, bs_index=0, paths=())
    v = encode_link_features(link, Point2(1, 2), Point2(3, 4), 200.0)
    assert v.shape == (FEATURE_LEN,)
    assert not v.any()


def test_features_single_los_hand_normalized():
    ue, bs = Point2(10.0, 20.0), Point2(50.0, 60.0)
    link = los_link(ue, bs)
    v = encode_link_features(link, ue, bs, 200.0)
    assert v[:7] == pytest.approx(
        [0.05, 0.10, 0.25, 0.30, 0.625, 0.125, 0.2828427124746190], abs=1e-12
    )
    assert not v[7:].any()


def test_features_truncate_to_five_shortest():
    ue, bs = Point2(10.0, 10.0), Point2(20.0, 10.0)
    extras = [
        PathDescriptor(aoa=0.1 * k, aod=0.2 * k, delay=(20.0 + k) / C_LIGHT)
        for k in range(1, 7)
    ]
    link = los_link(ue, bs, extras)
    assert link.n_paths == 7
    v = encode_link_features(link, ue, bs, 200.0)
    lengths = v.reshape(5, 7)[:, 6] * 200.0
    assert lengths == pytest.approx([10.0, 21.0, 22.0, 23.0, 24.0])


def test_features_invariant_to_input_path_order():
    ue, bs = Point2(10.0, 10.0), Point2(20.0, 10.0)
    extras = [
        PathDescriptor(aoa=0.3, aod=0.4, delay=25.0 / C_LIGHT),
        PathDescriptor(aoa=0.5, aod=0.6, delay=22.0 / C_LIGHT),
    ]
    a = los_link(ue, bs, extras)
    b = los_link(ue, bs, tuple(reversed(extras)))
    np.testing.assert_array_equal(
        encode_link_features(a, ue, bs, 200.0), encode_link_features(b, ue, bs, 200.0)
    )


# --- subsampling -------------------------------------------------------------


def test_subsample_deterministic_in_seed():
    sc = generate_scene(GenParams(seed=4, n_ues=6, n_bss=3))
    links = trace_scene(sc)
    a = subsample_links(links, 6, 3, np.random.default_rng(123))
    b = subsample_links(links, 6, 3, np.random.default_rng(123))
    np.testing.assert_array_equal(a.ue_keep, b.ue_keep)
    np.testing.assert_array_equal(a.bs_keep, b.bs_keep)
    assert a.links == b.links


def test_subsample_single_bs_always_kept():
    links = [RadioLink(ue_index=i, bs_index=0, paths=()) for i in range(2)]
    for seed in range(50):
        res = subsample_links(links, 2, 1, np.random.default_rng(seed))
        assert res.bs_keep.tolist() == [True]


def test_subsample_counts_stay_in_range():
    rng = np.random.default_rng(0)
    links = [RadioLink(ue_index=i, bs_index=j, paths=()) for i in range(30) for j in range(5)]
    for _ in range(1000):
        res = subsample_links(links, 30, 5, rng)
        n_ue = int(res.ue_keep.sum())
        n_bs = int(res.bs_keep.sum())
        assert 15 <= n_ue <= 30
        assert 3 <= n_bs <= 5
        for l in res.links:
            assert res.ue_keep[l.ue_index] and res.bs_keep[l.bs_index]


def test_mask_channels_zeroes_dropped_entities():
    grid = GridSpec(16, 16, 32.0)
    data = np.ones((8, 16, 16), np.float32)
    t = RayImageTensor(data=data, labels=pair_labels(2, 2), grid=grid)
    ue_keep = np.array([True, False])
    bs_keep = np.array([False, True])
    out = mask_channels(t, ue_keep, bs_keep)
    for ch, lab in enumerate(out.labels):
        expect_zero = (lab.ue == 1) or (lab.bs == 0)
        assert (not out.data[ch].any()) == expect_zero
    assert t.data.any()  # input untouched


def test_tensor_validates_value_range_and_labels():
    grid = GridSpec(16, 16, 32.0)
    with pytest.raises(ValueError):
        RayImageTensor(
            data=np.full((2, 16, 16), 1.5, np.float32),
            labels=combined_labels(1),
            grid=grid,
        )
    with pytest.raises(LabelMismatchError):
        RayImageTensor(
            data=np.zeros((3, 16, 16), np.float32),
            labels=combined_labels(1),
            grid=grid,
        )
    with pytest.raises(ValueError):
        ChannelLabel(role="phase", ue=0)
