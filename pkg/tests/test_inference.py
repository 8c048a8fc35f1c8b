import json

import numpy as np
import pytest

from bodyshape.coco import NUM_KEYPOINTS
from bodyshape.errors import BackendFailure, LowConfidencePose
from bodyshape.inference import (
    BoundingBox,
    KeypointSet,
    LabelMap,
    OnnxBackend,
    ReplayBackend,
    StaticBackend,
    estimate_keypoints,
    file_sha256,
    save_fixture,
    segment,
)
from bodyshape.inference.base import VOC_PERSON
from bodyshape.inference.onnx_backend import (
    KP_INPUT_HEIGHT,
    KP_INPUT_WIDTH,
    SEG_LONG_SIDE,
    expand_and_pad_box,
    normalize_image,
)
from bodyshape.ingest import RgbImage

from conftest import image_from_mask, random_blob_mask


def _image(tmp_path, name="subject.png", h=96, w=80):
    rng = np.random.default_rng(5)
    arr = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    from PIL import Image

    path = tmp_path / name
    Image.fromarray(arr).save(path)
    return RgbImage(arr, source=path)


def _fixture_payload(h=96, w=80):
    rng = np.random.default_rng(6)
    labels = np.zeros((h, w), dtype=np.uint8)
    labels[10:80, 20:60] = VOC_PERSON
    xy = rng.uniform(0, min(h, w) - 1, size=(NUM_KEYPOINTS, 2))
    conf = rng.uniform(0.4, 1.0, size=NUM_KEYPOINTS)
    return LabelMap(labels), KeypointSet(xy, conf)


class TestReplayBackend:
    def test_round_trip_bit_exact(self, tmp_path):
        image = _image(tmp_path)
        label_map, keypoints = _fixture_payload()
        save_fixture(tmp_path / "fixtures" / "subject", label_map, keypoints)
        backend = ReplayBackend(tmp_path / "fixtures")
        got_lm = backend.segment(image)
        assert np.array_equal(got_lm.labels, label_map.labels)
        got_kp = backend.estimate_keypoints(image, BoundingBox(0, 0, 10, 10))
        assert np.array_equal(got_kp.xy, keypoints.xy)
        assert np.array_equal(got_kp.conf, keypoints.conf)

    def test_deterministic_across_instances(self, tmp_path):
        image = _image(tmp_path)
        save_fixture(tmp_path / "fixtures" / "subject", *_fixture_payload())
        a = ReplayBackend(tmp_path / "fixtures").segment(image)
        b = ReplayBackend(tmp_path / "fixtures").segment(image)
        assert np.array_equal(a.labels, b.labels)

    def test_single_fixture_dir_mode(self, tmp_path):
        image = _image(tmp_path)
        fixture_dir = save_fixture(tmp_path / "only", *_fixture_payload())
        backend = ReplayBackend(fixture_dir)
        assert backend.segment(image).labels.shape == (96, 80)

    def test_missing_fixture(self, tmp_path):
        image = _image(tmp_path)
        (tmp_path / "fixtures").mkdir()
        backend = ReplayBackend(tmp_path / "fixtures")
        with pytest.raises(BackendFailure):
            backend.segment(image)

    def test_dimension_mismatch(self, tmp_path):
        image = _image(tmp_path, h=128, w=128)
        save_fixture(tmp_path / "fixtures" / "subject", *_fixture_payload())
        backend = ReplayBackend(tmp_path / "fixtures")
        with pytest.raises(BackendFailure):
            backend.segment(image)

    def test_sourceless_image_rejected_in_multi_mode(self, tmp_path):
        save_fixture(tmp_path / "fixtures" / "x", *_fixture_payload())
        backend = ReplayBackend(tmp_path / "fixtures")
        image = RgbImage(np.zeros((96, 80, 3), dtype=np.uint8))
        with pytest.raises(BackendFailure):
            backend.segment(image)


class TestWrappers:
    def test_segment_enforces_resolution(self, tmp_path):
        image = _image(tmp_path, h=128, w=100)
        label_map, keypoints = _fixture_payload()  # 96x80, wrong size
        with pytest.raises(BackendFailure):
            segment(image, StaticBackend(label_map, keypoints))

    def test_low_confidence_pose(self, tmp_path):
        image = _image(tmp_path)
        label_map, keypoints = _fixture_payload()
        conf = keypoints.conf.copy()
        conf[11] = 0.1  # occluded hip
        weak = KeypointSet(keypoints.xy, conf)
        with pytest.raises(LowConfidencePose):
            estimate_keypoints(image, BoundingBox(0, 0, 10, 10),
                               StaticBackend(label_map, weak), tau_kp=0.3)

    def test_coordinates_clamped(self, tmp_path):
        image = _image(tmp_path)
        label_map, keypoints = _fixture_payload()
        xy = keypoints.xy.copy()
        xy[0] = (-10.0, 1e6)
        kp = estimate_keypoints(image, BoundingBox(0, 0, 10, 10),
                                StaticBackend(label_map, KeypointSet(xy, keypoints.conf)))
        assert kp.xy[0, 0] == 0.0
        assert kp.xy[0, 1] == image.height - 1

    def test_generic_exception_becomes_backend_failure(self, tmp_path):
        image = _image(tmp_path)

        class Exploding(StaticBackend):
            def segment(self, image):
                raise RuntimeError("boom")

        backend = Exploding(*_fixture_payload())
        with pytest.raises(BackendFailure):
            segment(image, backend)


class FakeSegSession:
    """Emits (1, 21, h, w) logits with a person blob in the middle."""

    def get_inputs(self):
        class I:
            name = "input"
        return [I()]

    def run(self, names, feeds):
        batch = feeds["input"]
        _, _, h, w = batch.shape
        logits = np.zeros((1, 21, h, w), dtype=np.float32)
        logits[0, 0] = 1.0
        logits[0, VOC_PERSON, h // 4 : 3 * h // 4, w // 4 : 3 * w // 4] = 5.0
        return [logits]


class FakeKpSession:
    """Emits (1, 17, 96, 72) heatmaps with one planted peak per channel."""

    def get_inputs(self):
        class I:
            name = "input"
        return [I()]

    def run(self, names, feeds):
        maps = np.zeros((1, NUM_KEYPOINTS, 96, 72), dtype=np.float32)
        for k in range(NUM_KEYPOINTS):
            maps[0, k, 10 + 4 * (k % 8), 12 + 3 * (k % 6)] = 0.9
        return [maps]


def _write_models(tmp_path):
    seg = tmp_path / "segmentation.onnx"
    kp = tmp_path / "keypoints.onnx"
    seg.write_bytes(b"fake segmentation model")
    kp.write_bytes(b"fake keypoint model")
    manifest = tmp_path / "models.json"
    manifest.write_text(json.dumps({
        "segmentation": {"path": "segmentation.onnx", "sha256": file_sha256(seg)},
        "keypoints": {"path": "keypoints.onnx", "sha256": file_sha256(kp)},
    }))
    return manifest


def _fake_factory(path):
    return FakeSegSession() if "segmentation" in path.name else FakeKpSession()


class TestOnnxBackend:
    def test_checksum_mismatch_rejected(self, tmp_path):
        manifest = _write_models(tmp_path)
        (tmp_path / "segmentation.onnx").write_bytes(b"tampered")
        with pytest.raises(BackendFailure, match="checksum"):
            OnnxBackend(manifest, session_factory=_fake_factory)

    def test_missing_model_file(self, tmp_path):
        manifest = _write_models(tmp_path)
        (tmp_path / "keypoints.onnx").unlink()
        with pytest.raises(BackendFailure, match="missing"):
            OnnxBackend(manifest, session_factory=_fake_factory)

    def test_bad_manifest(self, tmp_path):
        path = tmp_path / "models.json"
        path.write_text(json.dumps({"segmentation": {"path": "x"}}))
        with pytest.raises(BackendFailure):
            OnnxBackend(path, session_factory=_fake_factory)

    def test_segment_shape_and_resize(self, tmp_path):
        manifest = _write_models(tmp_path)
        backend = OnnxBackend(manifest, session_factory=_fake_factory)
        image = _image(tmp_path, h=200, w=150)
        lm = backend.segment(image)
        assert lm.labels.shape == (200, 150)
        assert (lm.labels == VOC_PERSON).any()
        # The blob sits centrally, upsampled by nearest neighbour.
        assert lm.labels[100, 75] == VOC_PERSON
        assert lm.labels[2, 2] == 0

    def test_keypoints_land_inside_crop(self, tmp_path):
        manifest = _write_models(tmp_path)
        backend = OnnxBackend(manifest, session_factory=_fake_factory)
        image = _image(tmp_path, h=300, w=200)
        box = BoundingBox(60, 40, 140, 260)
        kp = backend.estimate_keypoints(image, box)
        left, top, w, h = expand_and_pad_box(box, image.width, image.height)
        assert (kp.xy[:, 0] >= left - 1).all()
        assert (kp.xy[:, 0] <= left + w + 1).all()
        assert (kp.xy[:, 1] >= top - 1).all()
        assert (kp.xy[:, 1] <= top + h + 1).all()
        assert np.all(kp.conf == pytest.approx(0.9))

    def test_checksums_exposed(self, tmp_path):
        manifest = _write_models(tmp_path)
        backend = OnnxBackend(manifest, session_factory=_fake_factory)
        assert set(backend.checksums) == {"segmentation", "keypoints"}

    def test_default_factory_without_runtime(self, tmp_path):
        manifest = _write_models(tmp_path)
        backend = OnnxBackend(manifest)
        image = _image(tmp_path)
        # Either onnxruntime is absent (clean failure) or it is present and
        # chokes on the fake bytes; both must surface as BackendFailure.
        with pytest.raises(BackendFailure):
            backend.segment(image)


class TestPreprocessing:
    def test_normalize_image(self):
        arr = np.full((4, 6, 3), 124, dtype=np.uint8)
        out = normalize_image(arr)
        assert out.shape == (1, 3, 4, 6)
        expected_r = (124 / 255.0 - 0.485) / 0.229
        assert out[0, 0, 0, 0] == pytest.approx(expected_r, abs=1e-6)

    def test_expand_and_pad_box_aspect(self):
        box = BoundingBox(100, 100, 199, 299)  # 100 wide, 200 tall
        left, top, w, h = expand_and_pad_box(box, 1000, 1000)
        assert w / h == pytest.approx(KP_INPUT_WIDTH / KP_INPUT_HEIGHT)
        assert h == pytest.approx(200 * 1.5)  # expanded 25% per side
        assert w >= 100 * 1.5
        # Still centred on the box
        assert left + w / 2 == pytest.approx((100 + 200) / 2)  # x: cols 100..199
        assert top + h / 2 == pytest.approx((100 + 300) / 2)   # y: rows 100..299

    def test_seg_resize_target(self, tmp_path):
        sizes = {}

        class Probe(FakeSegSession):
            def run(self, names, feeds):
                sizes["shape"] = feeds["input"].shape
                return super().run(names, feeds)

        manifest = _write_models(tmp_path)
        backend = OnnxBackend(manifest, session_factory=lambda p: Probe()
                              if "segmentation" in p.name else FakeKpSession())
        backend.segment(_image(tmp_path, h=400, w=300))
        n, c, h, w = sizes["shape"]
        assert max(h, w) == SEG_LONG_SIDE
        assert h / w == pytest.approx(400 / 300, rel=0.01)
