"""Golden cross-path tests: the bindings against the engine's own paths.

``bind_mask_to_pi`` is compared bit for bit with the .pir files the CLI
writes, and ``bind_metrics`` with direct metrics-module calls, on ten
fixture masks.  The rest covers the admission boundary, statelessness,
and concurrency.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

import curvtopo
from curvtopo import training
from curvtopo.cli import main as cli_main
from curvtopo.mask_io import load_raster, save_mask
from curvtopo.metrics import evaluate_masks
from curvtopo.synthetic import make_ring_mask, make_vessel_mask

import curvtopo_bindings as ctb
from curvtopo_bindings import BoundArray, BoundArrayError, bind_mask_to_pi, bind_metrics

PI_CONFIG = {"n_max": 150, "seed": 3, "grid": (32, 32)}
PI_FLAGS = ["--n-max", "150", "--seed", "3", "--grid", "32", "32"]


@pytest.fixture(scope="module")
def fixtures() -> dict[str, np.ndarray]:
    masks = {}
    for seed in range(5):
        masks[f"vessel_{seed}"] = make_vessel_mask(64, 64, seed=seed)
    for k in range(5):
        masks[f"ring_{k}"] = make_ring_mask(
            64, 64, center=(28.0 + k, 34.0 - k), r_outer=10.0 + 2 * k
        )
    assert len(masks) == 10
    assert all(m.any() for m in masks.values())
    return masks


@pytest.fixture(scope="module")
def cli_rasters(fixtures, tmp_path_factory) -> dict[str, np.ndarray]:
    """One pi-gen run over all ten fixtures, results loaded back from disk."""
    mask_dir = tmp_path_factory.mktemp("golden_masks")
    out_dir = tmp_path_factory.mktemp("golden_out")
    for stem, mask in fixtures.items():
        save_mask(mask, mask_dir / f"{stem}.png")
    rc = cli_main(["pi-gen", str(mask_dir), str(out_dir), *PI_FLAGS])
    assert rc == 0
    return {stem: load_raster(out_dir / f"{stem}.pir") for stem in fixtures}


class TestVersion:
    def test_version_matches_engine(self):
        assert ctb.__version__ == curvtopo.__version__


class TestBindMaskToPi:
    def test_golden_bit_exact_against_cli(self, fixtures, cli_rasters):
        for stem, mask in fixtures.items():
            got = bind_mask_to_pi(mask, PI_CONFIG)
            ref = cli_rasters[stem]
            assert got.dtype == np.float32
            assert got.shape == ref.shape
            assert got.tobytes() == ref.tobytes(), stem

    def test_golden_with_resize_and_both_dims(self, fixtures, tmp_path):
        mask_dir = tmp_path / "m"
        out_dir = tmp_path / "o"
        mask_dir.mkdir()
        stems = ["vessel_0", "ring_0"]
        for stem in stems:
            save_mask(fixtures[stem], mask_dir / f"{stem}.png")
        rc = cli_main(
            ["pi-gen", str(mask_dir), str(out_dir), *PI_FLAGS,
             "--dims", "01", "--sigma", "0.8", "--resize-to-input"]
        )
        assert rc == 0
        cfg = dict(PI_CONFIG, dims="01", sigma=0.8, resize_to_input=True)
        for stem in stems:
            got = bind_mask_to_pi(fixtures[stem], cfg)
            ref = load_raster(out_dir / f"{stem}.pir")
            assert got.shape == fixtures[stem].shape
            assert got.tobytes() == ref.tobytes(), stem

    def test_empty_mask_is_zero_image(self):
        img = bind_mask_to_pi(np.zeros((16, 16), dtype=np.uint8))
        assert img.shape == (64, 64)
        assert img.dtype == np.float32
        assert not img.any()

    def test_dims_sequence_equals_dims_string(self, fixtures):
        a = bind_mask_to_pi(fixtures["ring_0"], dict(PI_CONFIG, dims="01"))
        b = bind_mask_to_pi(fixtures["ring_0"], dict(PI_CONFIG, dims=(0, 1)))
        assert a.tobytes() == b.tobytes()

    def test_default_config_equals_empty_mapping(self, fixtures):
        a = bind_mask_to_pi(fixtures["ring_1"], None)
        b = bind_mask_to_pi(fixtures["ring_1"], {})
        assert a.tobytes() == b.tobytes()

    def test_wrong_rank_is_typed_error(self):
        with pytest.raises(BoundArrayError, match="2-D"):
            bind_mask_to_pi(np.zeros((4, 4, 3), dtype=np.uint8))

    def test_non_binary_keeps_engine_message(self):
        bad = np.full((8, 8), 7, dtype=np.uint8)
        with pytest.raises(ValueError, match=r"\{0,1\}"):
            bind_mask_to_pi(bad)

    def test_non_finite_rejected_at_boundary(self):
        bad = np.zeros((8, 8))
        bad[3, 3] = np.nan
        with pytest.raises(BoundArrayError, match="non-finite"):
            bind_mask_to_pi(bad)

    def test_unknown_config_key_rejected(self, fixtures):
        with pytest.raises(ValueError, match="unknown config keys"):
            bind_mask_to_pi(fixtures["ring_0"], {"nmax": 5})

    def test_readonly_input_untouched(self, fixtures):
        mask = fixtures["vessel_1"].copy()
        before = mask.tobytes()
        mask.setflags(write=False)
        bind_mask_to_pi(mask, PI_CONFIG)
        assert mask.tobytes() == before

    def test_repeat_calls_are_byte_identical(self, fixtures):
        a = bind_mask_to_pi(fixtures["vessel_2"], PI_CONFIG)
        b = bind_mask_to_pi(fixtures["vessel_2"], PI_CONFIG)
        assert a.tobytes() == b.tobytes()


def _pairs(fixtures) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """Ten deterministic prediction/ground-truth pairs, none identical."""
    out = []
    for idx, (stem, mask) in enumerate(sorted(fixtures.items())):
        gt = mask.copy()
        r = 4 * (idx % 3) + 6
        gt[r : r + 4, r : r + 4] ^= 1
        out.append((stem, mask, gt))
    return out


class TestBindMetrics:
    def test_golden_equals_direct_metrics_calls(self, fixtures):
        for stem, pred, gt in _pairs(fixtures):
            assert bind_metrics(pred, gt) == evaluate_masks(pred, gt), stem

    def test_tile_mode_matches_engine(self, fixtures):
        pred, gt = fixtures["vessel_0"], fixtures["vessel_3"]
        assert bind_metrics(pred, gt, tile=8) == evaluate_masks(pred, gt, tile=8)

    def test_identical_masks_scores(self, fixtures):
        got = bind_metrics(fixtures["ring_2"], fixtures["ring_2"])
        assert got == {
            "dice": 1.0, "cl_dice": 1.0, "miou": 1.0,
            "beta0_err": 0.0, "beta1_err": 0.0,
        }

    def test_shape_mismatch_keeps_engine_message(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            bind_metrics(np.zeros((3, 3), np.uint8), np.zeros((4, 4), np.uint8))

    def test_non_binary_keeps_engine_message(self):
        good = np.zeros((4, 4), np.uint8)
        with pytest.raises(ValueError, match=r"\{0,1\}"):
            bind_metrics(good, np.full((4, 4), 3, np.uint8))

    def test_wrong_rank_is_typed_error(self):
        with pytest.raises(BoundArrayError, match="pred"):
            bind_metrics(np.zeros(5, np.uint8), np.zeros(5, np.uint8))


class TestBoundArray:
    def test_contiguous_input_shares_memory(self):
        arr = np.zeros((6, 7), dtype=np.uint8)
        bound = BoundArray.wrap(arr)
        assert np.shares_memory(bound.data, arr)
        assert bound.shape == (6, 7)

    def test_strided_view_is_materialized(self):
        arr = np.zeros((6, 7), dtype=np.uint8).T
        bound = BoundArray.wrap(arr)
        assert bound.data.flags.c_contiguous
        assert bound.shape == (7, 6)

    def test_nested_lists_accepted(self):
        bound = BoundArray.wrap([[0, 1], [1, 0]])
        assert bound.shape == (2, 2)

    def test_non_numeric_dtype_rejected(self):
        with pytest.raises(BoundArrayError, match="numeric"):
            BoundArray.wrap(np.array([["a", "b"]]))

    def test_rank_list_respected(self):
        BoundArray.wrap(np.zeros((2, 2, 2, 2)), ranks=(2, 4))
        with pytest.raises(BoundArrayError, match="2-D or 4-D"):
            BoundArray.wrap(np.zeros((2, 2, 2)), ranks=(2, 4))

    def test_validate_flags_inconsistent_metadata(self):
        bound = BoundArray(data=np.zeros((2, 3)), shape=(3, 3))
        with pytest.raises(BoundArrayError, match="inconsistent"):
            bound.validate()


class TestReexports:
    def test_losses_and_fusion_are_engine_functions(self):
        assert ctb.dice_loss is training.dice_loss
        assert ctb.ce_loss is training.ce_loss
        assert ctb.combined_loss is training.combined_loss
        assert ctb.mse_loss is training.mse_loss
        assert ctb.resize_pi is training.resize_pi
        assert ctb.fuse_input is training.fuse_input

    def test_fuse_input_roundtrip(self, fixtures):
        img = bind_mask_to_pi(fixtures["ring_0"], PI_CONFIG)
        batch = np.random.default_rng(0).random((2, 16, 16, 3))
        fused = ctb.fuse_input(batch, img)
        assert fused.shape == (2, 16, 16, 6)
        assert np.array_equal(fused[..., :3], batch)


class TestConcurrency:
    def test_concurrent_metric_calls_match_sequential(self, fixtures):
        pairs = _pairs(fixtures)
        sequential = [bind_metrics(p, g) for _, p, g in pairs]
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = list(pool.map(lambda t: bind_metrics(t[1], t[2]), pairs))
        assert threaded == sequential

    def test_concurrent_pi_calls_match_sequential(self, fixtures):
        masks = [fixtures[s] for s in ("vessel_0", "ring_0", "vessel_3", "ring_4")]
        sequential = [bind_mask_to_pi(m, PI_CONFIG).tobytes() for m in masks]
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = [
                img.tobytes()
                for img in pool.map(lambda m: bind_mask_to_pi(m, PI_CONFIG), masks)
            ]
        assert threaded == sequential
