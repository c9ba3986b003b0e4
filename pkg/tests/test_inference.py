import numpy as np
import pytest

from conftest import random_bbox
from oracles import decode_head_scalar, detect_scalar
from woundlocal.augment import RasterImage
from woundlocal.evaluation import format_detection_line
from woundlocal.geometry import BBox, iou
from woundlocal.inference import (
    BackendError,
    ConfigError,
    DecodeError,
    Detection,
    HeadTensor,
    ModelConfig,
    ReplayBackend,
    TensorFormatError,
    builtin_models,
    decode_head,
    detect,
    letterbox,
    nms,
    read_tensor,
    tiny_yolov3,
    write_tensor,
    yolov3_416,
)

TEST_ANCHORS = {8: ((10, 13),), 16: ((30, 61), (62, 45)), 32: ((116, 90),)}


def small_config(net=128, strides=(8, 16, 32), conf=0.2, nms_iou=0.5, **kw):
    return ModelConfig(
        name="test-net",
        strides=tuple(strides),
        anchors={s: TEST_ANCHORS[s] for s in strides},
        net_w=net,
        net_h=net,
        conf_threshold=conf,
        nms_iou_threshold=nms_iou,
        **kw,
    )


class TestLetterbox:
    def test_identity_for_square_input(self):
        img = RasterImage(np.zeros((416, 416, 3), np.uint8))
        canvas, lb = letterbox(img, 416, 416)
        assert (lb.scale, lb.pad_x, lb.pad_y) == (1.0, 0.0, 0.0)
        assert np.array_equal(canvas.pixels, img.pixels)

    def test_wide_input_pads_vertically(self):
        img = RasterImage(np.zeros((416, 832, 3), np.uint8))
        canvas, lb = letterbox(img, 416, 416)
        assert (lb.scale, lb.pad_x, lb.pad_y) == (0.5, 0.0, 104.0)
        assert np.all(canvas.pixels[:104] == 128)
        assert np.all(canvas.pixels[104:312] == 0)

    def test_point_round_trip(self):
        img = RasterImage(np.zeros((64, 96, 3), np.uint8))
        _, lb = letterbox(img, 416, 416)
        rng = np.random.default_rng(0)
        for _ in range(100):
            x, y = rng.uniform(0, 96), rng.uniform(0, 64)
            bx, by = lb.to_original(*lb.to_canvas(x, y))
            assert bx == pytest.approx(x, abs=1e-9)
            assert by == pytest.approx(y, abs=1e-9)

    def test_rejects_non_multiple_of_32(self):
        img = RasterImage(np.zeros((10, 10, 3), np.uint8))
        with pytest.raises(ConfigError):
            letterbox(img, 100, 416)


class TestTensorFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        values = rng.standard_normal((3, 4, 2, 6)).astype(np.float32)
        path = tmp_path / "t.wlt1"
        write_tensor(path, values)
        back = read_tensor(path)
        assert back.dtype == np.float32
        assert np.array_equal(back.view(np.uint32), values.view(np.uint32))

    def test_zero_tensor_round_trip(self, tmp_path):
        path = tmp_path / "z.wlt1"
        write_tensor(path, np.zeros((2, 2, 1, 6), np.float32))
        assert np.array_equal(read_tensor(path), np.zeros((2, 2, 1, 6), np.float32))

    def test_header_layout(self, tmp_path):
        path = tmp_path / "h.wlt1"
        write_tensor(path, np.zeros((2, 3), np.float32))
        data = path.read_bytes()
        assert data[:4] == b"WLT1"
        assert data[4:8] == (2).to_bytes(4, "little")
        assert data[8:16] == (2).to_bytes(4, "little") + (3).to_bytes(4, "little")
        assert len(data) == 16 + 2 * 3 * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.wlt1"
        path.write_bytes(b"NOPE" + b"\0" * 16)
        with pytest.raises(TensorFormatError):
            read_tensor(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.wlt1"
        write_tensor(path, np.zeros((4, 4), np.float32))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(TensorFormatError):
            read_tensor(path)


class TestModelConfig:
    def test_builtin_grid_shapes(self):
        assert yolov3_416().grid_shapes == [(52, 52), (26, 26), (13, 13)]
        assert tiny_yolov3().grid_shapes == [(26, 26), (13, 13)]

    def test_head_count_invariants(self):
        with pytest.raises(ConfigError):
            ModelConfig(name="yolov3-416", strides=(16, 32), anchors=TEST_ANCHORS)
        with pytest.raises(ConfigError):
            ModelConfig(name="tiny-yolov3", strides=(8, 16, 32), anchors=TEST_ANCHORS)

    def test_from_toml(self, tmp_path):
        path = tmp_path / "model.toml"
        path.write_text(
            'name = "custom"\n'
            "strides = [16, 32]\n"
            "net_w = 128\nnet_h = 128\n"
            "conf_threshold = 0.3\n"
            "nms_iou_threshold = 0.45\n"
            "[anchors]\n"
            '16 = [[30, 61]]\n'
            '32 = [[116, 90]]\n'
        )
        cfg = ModelConfig.from_toml(path)
        assert cfg.name == "custom"
        assert cfg.anchors[32] == ((116.0, 90.0),)
        assert cfg.conf_threshold == 0.3

    def test_bad_toml_rejected(self, tmp_path):
        path = tmp_path / "model.toml"
        path.write_text("name = \n")
        with pytest.raises(ConfigError):
            ModelConfig.from_toml(path)


class TestDecode:
    def test_all_suppressed(self):
        cfg = small_config()
        values = np.full((16, 16, 1, 6), -20.0, np.float32)
        head = HeadTensor(8, TEST_ANCHORS[8], values)
        assert decode_head(head, cfg) == []

    def test_single_active_cell_example(self):
        cfg = ModelConfig(name="single", strides=(32,), anchors={32: ((116, 90),)}, net_w=416, net_h=416)
        values = np.full((13, 13, 1, 6), -20.0, np.float32)
        values[6, 6, 0] = [0, 0, 0, 0, 10, 10]
        dets = decode_head(HeadTensor(32, ((116, 90),), values), cfg)
        assert len(dets) == 1
        d = dets[0]
        assert d.bbox.cx == pytest.approx(0.5, abs=1e-6)
        assert d.bbox.cy == pytest.approx(0.5, abs=1e-6)
        assert d.bbox.w == pytest.approx(116 / 416, abs=1e-6)
        assert d.bbox.h == pytest.approx(90 / 416, abs=1e-6)
        sigma10 = 1 / (1 + np.exp(-10.0))
        assert d.score == pytest.approx(sigma10**2, abs=1e-6)
        assert d.score == pytest.approx(0.99991, abs=1e-5)

    def test_dim_mismatch_rejected(self):
        cfg = small_config()
        values = np.zeros((10, 16, 1, 6), np.float32)
        with pytest.raises(DecodeError):
            decode_head(HeadTensor(8, TEST_ANCHORS[8], values), cfg)
        with pytest.raises(DecodeError):
            decode_head(HeadTensor(8, TEST_ANCHORS[8], np.zeros((16, 16, 1, 7), np.float32)), cfg)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(21)
        for trial in range(100):
            stride = int(rng.choice([8, 16, 32]))
            net = int(rng.choice([64, 96, 128]))
            anchors = TEST_ANCHORS[stride]
            cfg = ModelConfig(name="t", strides=(stride,), anchors={stride: anchors}, net_w=net, net_h=net)
            g = net // stride
            values = rng.normal(0, 3, (g, g, len(anchors), 6)).astype(np.float32)
            got = decode_head(HeadTensor(stride, anchors, values), cfg)
            want = decode_head_scalar(values, stride, anchors, net, net, cfg.conf_threshold)
            assert len(got) == len(want)
            for d, ref in zip(got, want):
                assert d.class_id == ref["class_id"]
                assert d.score == pytest.approx(ref["score"], abs=1e-5)
                for attr in ("cx", "cy", "w", "h"):
                    assert getattr(d.bbox, attr) == pytest.approx(ref[attr], abs=1e-5)

    def test_output_bounded_and_above_threshold(self):
        rng = np.random.default_rng(22)
        cfg = small_config(net=64, strides=(16,))
        values = rng.normal(0, 2, (4, 4, 2, 6)).astype(np.float32)
        dets = decode_head(HeadTensor(16, TEST_ANCHORS[16], values), cfg)
        assert len(dets) <= 4 * 4 * 2
        assert all(d.score >= cfg.conf_threshold for d in dets)

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(23)
        values = rng.normal(0, 2, (8, 8, 2, 6)).astype(np.float32)
        counts = []
        for conf in (0.0, 0.2, 0.5, 0.9):
            cfg = small_config(net=128, strides=(16,), conf=conf)
            counts.append(len(decode_head(HeadTensor(16, TEST_ANCHORS[16], values), cfg)))
        assert counts == sorted(counts, reverse=True)

    def test_scale_consistency_across_strides(self):
        # Equivalent cell/offset encodings on different heads give the same center.
        cfg = small_config(net=128, strides=(8, 32))
        v8 = np.full((16, 16, 1, 6), -20.0, np.float32)
        v32 = np.full((4, 4, 1, 6), -20.0, np.float32)
        v8[8, 4, 0] = [0, 0, 0, 0, 10, 10]   # center (4.5*8, 8.5*8) = (36, 68)
        v32[2, 1, 0] = [0, 0, 0, 0, 10, 10]  # center (1.125*32, 2.125*32) -> need sigmoid...
        d8 = decode_head(HeadTensor(8, TEST_ANCHORS[8], v8), cfg)[0]
        # (cell + 0.5) * 8 for stride 8 equals ((cell/4 - 0.5) + ...) on stride 32 only
        # for aligned cells; check the arithmetic directly instead.
        assert d8.bbox.cx * 128 == pytest.approx(4.5 * 8, abs=1e-4)
        assert d8.bbox.cy * 128 == pytest.approx(8.5 * 8, abs=1e-4)


class TestNms:
    def _det(self, cx, cy, w, h, score, class_id=0):
        return Detection(BBox(cx, cy, w, h), class_id, score)

    def test_duplicate_elimination(self):
        a = self._det(0.5, 0.5, 0.2, 0.2, 0.9)
        b = self._det(0.5, 0.5, 0.2, 0.2, 0.8)
        assert nms([b, a], 0.45) == [a]

    def test_disjoint_kept(self):
        a = self._det(0.2, 0.2, 0.1, 0.1, 0.9)
        b = self._det(0.8, 0.8, 0.1, 0.1, 0.8)
        assert nms([a, b], 0.45) == [a, b]

    def test_threshold_one_suppresses_nothing(self):
        rng = np.random.default_rng(31)
        dets = [self._det(*_rand_box(rng), float(rng.uniform(0.1, 1))) for _ in range(50)]
        assert sorted(nms(dets, 1.0), key=id) == sorted(dets, key=id)

    def test_different_classes_not_suppressed(self):
        a = self._det(0.5, 0.5, 0.2, 0.2, 0.9, class_id=0)
        b = self._det(0.5, 0.5, 0.2, 0.2, 0.8, class_id=1)
        assert nms([a, b], 0.45) == [a, b]

    def test_idempotence_subset_pairwise(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            dets = [self._det(*_rand_box(rng), float(rng.uniform()), int(rng.integers(0, 2)))
                    for _ in range(int(rng.integers(0, 30)))]
            t = float(rng.uniform())
            kept = nms(dets, t)
            assert nms(kept, t) == kept
            assert all(d in dets for d in kept)
            for i, a in enumerate(kept):
                for b in kept[i + 1:]:
                    if a.class_id == b.class_id:
                        assert iou(a.bbox, b.bbox) <= t

    def test_output_sorted_by_score(self):
        rng = np.random.default_rng(33)
        dets = [self._det(*_rand_box(rng), float(rng.uniform())) for _ in range(20)]
        kept = nms(dets, 0.5)
        assert [d.score for d in kept] == sorted((d.score for d in kept), reverse=True)

    def test_tie_break_by_input_index(self):
        a = self._det(0.2, 0.2, 0.1, 0.1, 0.5)
        b = self._det(0.8, 0.8, 0.1, 0.1, 0.5)
        assert nms([a, b], 0.5) == [a, b]
        assert nms([b, a], 0.5) == [b, a]

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            nms([], 1.5)


class TestReplayBackendAndDetect:
    def test_missing_id_names_it(self, tmp_path):
        backend = ReplayBackend(tmp_path)
        img = RasterImage(np.zeros((32, 32, 3), np.uint8))
        with pytest.raises(BackendError, match="ghost"):
            backend.run(img, "ghost")

    def test_missing_dir_rejected(self, tmp_path):
        with pytest.raises(BackendError):
            ReplayBackend(tmp_path / "nope")

    def test_all_suppressed_gives_empty(self, tmp_path):
        cfg = small_config(net=64, strides=(16, 32))
        for stride in cfg.strides:
            g = 64 // stride
            write_tensor(tmp_path / f"img.stride{stride}.wlt1", np.full((g, g, len(TEST_ANCHORS[stride]), 6), -20.0, np.float32))
        img = RasterImage(np.zeros((48, 64, 3), np.uint8))
        assert detect(img, ReplayBackend(tmp_path), cfg, "img") == []

    def test_missing_stride_rejected(self, tmp_path):
        cfg = small_config(net=64, strides=(16, 32))
        write_tensor(tmp_path / "img.stride16.wlt1", np.full((4, 4, 2, 6), -20.0, np.float32))
        img = RasterImage(np.zeros((48, 64, 3), np.uint8))
        with pytest.raises(DecodeError, match="32"):
            detect(img, ReplayBackend(tmp_path), cfg, "img")

    def test_golden_fixture_matches_committed(self, fixtures_dir):
        golden = fixtures_dir / "golden"
        img = RasterImage.from_file(golden / "wound01.png")
        dets = detect(img, ReplayBackend(golden), tiny_yolov3(), "wound01")
        got = "".join(format_detection_line("wound01", d) for d in dets)
        assert got == (golden / "expected_detections.jsonl").read_text(encoding="utf-8")

    def test_golden_fixture_matches_scalar_pipeline(self, fixtures_dir):
        golden = fixtures_dir / "golden"
        cfg = tiny_yolov3()
        tensors = {s: read_tensor(golden / f"wound01.stride{s}.wlt1") for s in cfg.strides}
        img = RasterImage.from_file(golden / "wound01.png")
        got = detect(img, ReplayBackend(golden), cfg, "wound01")
        want = detect_scalar(
            tensors, cfg.anchors,
            {"net_w": cfg.net_w, "net_h": cfg.net_h,
             "conf_threshold": cfg.conf_threshold, "nms_iou_threshold": cfg.nms_iou_threshold},
            img.width, img.height,
        )
        assert len(got) == len(want)
        for d, ref in zip(got, want):
            assert d.score == pytest.approx(ref["score"], abs=1e-5)
            for attr in ("cx", "cy", "w", "h"):
                assert getattr(d.bbox, attr) == pytest.approx(ref[attr], abs=1e-5)

    def test_detect_deterministic_across_runs(self, fixtures_dir):
        golden = fixtures_dir / "golden"
        img = RasterImage.from_file(golden / "wound01.png")
        runs = [detect(img, ReplayBackend(golden), tiny_yolov3(), "wound01") for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]

    def test_raising_conf_never_adds_detections(self, fixtures_dir):
        golden = fixtures_dir / "golden"
        img = RasterImage.from_file(golden / "wound01.png")
        backend = ReplayBackend(golden)
        prev = None
        for conf in (0.05, 0.2, 0.5, 0.95):
            n = len(detect(img, backend, tiny_yolov3().with_thresholds(conf=conf), "wound01"))
            if prev is not None:
                assert n <= prev
            prev = n


def _rand_box(rng):
    b = random_bbox(rng, min_size=0.05)
    return b.cx, b.cy, b.w, b.h
