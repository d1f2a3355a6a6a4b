import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from aiotc.coder import BACKENDS, Codeword, encode, initial_state
from aiotc.container import deserialize, serialize
from aiotc.errors import CorruptCodeword, UnsupportedVersion
from aiotc.images import GrayImage, SymbolSequence, flatten
from aiotc.metrics import rmse
from aiotc.models import build_model
from aiotc.pipelines import (
    IterationTrace,
    PipelineConfig,
    check_stop,
    decompress,
    run,
    run_cardinality,
    run_optimized,
    run_pca,
    run_standard,
)

from conftest import ramp_image, random_image, smooth_image


def constant_image(w, h, value):
    return GrayImage(width=w, height=h, pixels=bytes([value]) * (w * h))


class TestPipelineConfig:
    def test_defaults_fill_in(self):
        cfg = PipelineConfig(variant="optimized")
        assert (cfg.decimals, cfg.group_size) == (3, 6)
        assert PipelineConfig(variant="cardinality").levels == 32
        assert PipelineConfig(variant="pca").retain == 0.5

    def test_irrelevant_parameter_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(variant="standard", levels=32)
        with pytest.raises(ValueError):
            PipelineConfig(variant="cardinality", decimals=3)
        with pytest.raises(ValueError):
            PipelineConfig(variant="pca", group_size=6)

    def test_decimals_range(self):
        for bad in (2, 7):
            with pytest.raises(ValueError):
                PipelineConfig(variant="optimized", decimals=bad)

    def test_unknown_variant_and_backend(self):
        with pytest.raises(ValueError):
            PipelineConfig(variant="huffman")
        with pytest.raises(ValueError):
            PipelineConfig(variant="standard", backend="float")

    def test_dispatch_total(self):
        img = random_image(6, 6, seed=0)
        for variant in ("standard", "pca", "cardinality", "optimized"):
            artifact, recon, trace = run(img, PipelineConfig(variant=variant))
            assert artifact.variant == variant
            assert (recon.width, recon.height) == (img.width, img.height)
            assert trace.iterations >= 1


class TestRunStandard:
    def test_one_pixel(self):
        img = constant_image(1, 1, 42)
        artifact, recon, trace = run_standard(img, PipelineConfig(variant="standard"))
        assert trace.iterations == 1
        assert recon == img

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_lossless(self, backend):
        img = random_image(15, 11, seed=1)
        cfg = PipelineConfig(variant="standard", backend=backend)
        artifact, recon, trace = run_standard(img, cfg)
        assert recon == img
        assert rmse(img, recon) == 0.0

    def test_iterations_equal_pixel_count(self):
        img = smooth_image(18, 25, seed=2)
        _, _, trace = run_standard(img, PipelineConfig(variant="standard"))
        assert trace.iterations == 18 * 25


class TestRunCardinality:
    def test_levels_256_lossless(self):
        img = random_image(9, 9, seed=4)
        cfg = PipelineConfig(variant="cardinality", levels=256)
        _, recon, _ = run_cardinality(img, cfg)
        assert recon == img

    def test_rmse_bound_at_32(self):
        for seed in range(3):
            img = random_image(20, 20, seed=seed)
            _, recon, _ = run_cardinality(img, PipelineConfig(variant="cardinality"))
            assert rmse(img, recon) <= 4.0

    def test_two_levels_smaller_than_32(self):
        img = smooth_image(32, 32, seed=5)
        _, recon2, _ = art2 = run_cardinality(
            img, PipelineConfig(variant="cardinality", levels=2)
        )
        _, recon32, _ = art32 = run_cardinality(
            img, PipelineConfig(variant="cardinality", levels=32)
        )
        assert rmse(img, recon2) <= 64.0
        assert len(art2[0].payload.data) < len(art32[0].payload.data)

    def test_midpoint_codomain(self):
        img = random_image(8, 8, seed=6)
        _, recon, _ = run_cardinality(img, PipelineConfig(variant="cardinality"))
        midpoints = {q * 8 + 4 for q in range(32)}
        assert set(recon.pixels) <= midpoints

    def test_iterations_equal_pixel_count(self):
        img = random_image(7, 9, seed=7)
        _, _, trace = run_cardinality(img, PipelineConfig(variant="cardinality"))
        assert trace.iterations == 63


class TestRunPca:
    def test_constant_image_near_exact(self):
        img = constant_image(8, 6, 120)
        _, recon, _ = run_pca(img, PipelineConfig(variant="pca"))
        assert rmse(img, recon) <= 0.5

    def test_full_retain_tight_rmse(self):
        img = random_image(12, 12, seed=8)
        _, recon, _ = run_pca(img, PipelineConfig(variant="pca", retain=1.0))
        assert rmse(img, recon) <= 0.51

    def test_iterations_are_coded_scores(self):
        img = random_image(10, 14, seed=9)  # h=10, w=14, k=ceil(0.5*10)=5
        _, _, trace = run_pca(img, PipelineConfig(variant="pca"))
        assert trace.iterations == 10 * 5

    def test_smooth_image_rmse_plausible(self):
        img = smooth_image(40, 40, seed=10)
        _, recon, _ = run_pca(img, PipelineConfig(variant="pca"))
        assert rmse(img, recon) <= 30.0


class TestRunOptimized:
    def test_single_group_image_converges(self):
        img = constant_image(16, 16, 200)
        artifact, recon, trace = run_optimized(img, PipelineConfig(variant="optimized"))
        assert trace.iterations == 1
        assert trace.converged_by_threshold
        assert artifact.payload.bit_length <= 1
        assert recon == img

    def test_two_close_symbols_group_to_weighted_mean(self):
        img = GrayImage(width=2, height=1, pixels=bytes([10, 20]))
        artifact, recon, trace = run_optimized(img, PipelineConfig(variant="optimized"))
        # equal probabilities 0.5/0.5 differ by 0 <= 10^-3: one group, rep 15
        assert set(recon.pixels) == {15}
        assert trace.converged_by_threshold
        assert trace.iterations == 1

    def test_multi_group_never_skips(self):
        img = smooth_image(20, 20, seed=11)
        _, _, trace = run_optimized(img, PipelineConfig(variant="optimized"))
        assert trace.iterations == 400
        assert not trace.converged_by_threshold

    def test_iterations_never_exceed_standard(self):
        images = [
            constant_image(9, 9, 3),
            random_image(13, 8, seed=12),
            smooth_image(16, 12, seed=13),
            ramp_image(),
        ]
        for img in images:
            _, _, t_std = run_standard(img, PipelineConfig(variant="standard"))
            for n in (3, 6):
                _, _, t_opt = run_optimized(
                    img, PipelineConfig(variant="optimized", decimals=n)
                )
                assert t_opt.iterations <= t_std.iterations

    def test_vanished_symbols_still_encode(self):
        # one dominant intensity plus a rare one whose probability rounds to 0
        pixels = bytes([100] * 4000 + [101] * 4000 + [255] * 1)
        img = GrayImage(width=8001, height=1, pixels=pixels)
        cfg = PipelineConfig(variant="optimized", decimals=3)
        artifact, recon, trace = run_optimized(img, cfg)
        assert (recon.width, recon.height) == (img.width, img.height)
        # the rare 255 pixel was absorbed into a surviving group
        assert set(recon.pixels) <= {100, 101, 150, 151}

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_backends_agree_on_reconstruction(self, backend):
        img = smooth_image(14, 14, seed=14)
        cfg = PipelineConfig(variant="optimized", backend=backend)
        _, recon, _ = run_optimized(img, cfg)
        _, recon_other, _ = run_optimized(
            img, PipelineConfig(variant="optimized", backend="exact")
        )
        assert recon == recon_other


class TestCheckStop:
    def test_certain_symbol_skippable(self):
        seq = SymbolSequence((5, 5, 5), 6)
        model = build_model(seq)
        state = initial_state(model, "exact")
        assert check_stop(state, 3, Fraction(1)) is True

    def test_two_group_model_never_skips(self):
        for p in (Fraction(1, 2), Fraction(999, 1000), Fraction(1, 1000)):
            seq = SymbolSequence((0, 1), 2)
            state = initial_state(build_model(seq), "exact")
            assert check_stop(state, 3, p) is False


class TestDecompress:
    @pytest.mark.parametrize("variant", ["standard", "pca", "cardinality", "optimized"])
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_matches_pipeline_reconstruction(self, variant, backend):
        img = smooth_image(10, 12, seed=15)
        artifact, recon, _ = run(img, PipelineConfig(variant=variant, backend=backend))
        assert decompress(artifact) == recon
        assert decompress(deserialize(serialize(artifact))) == recon

    def test_standard_roundtrip_is_identity(self):
        img = random_image(9, 7, seed=16)
        artifact, _, _ = run_standard(img, PipelineConfig(variant="standard"))
        assert decompress(artifact) == img

    def test_truncated_payload_raises_corrupt(self):
        img = random_image(8, 8, seed=17)
        cfg = PipelineConfig(variant="standard", backend="exact")
        artifact, _, _ = run_standard(img, cfg)
        bits = artifact.payload.bits()
        assert len(bits) > 8
        with pytest.raises(CorruptCodeword):
            truncated = dataclasses.replace(
                artifact, payload=Codeword.from_bits(bits[:-8])
            )
            decompress(truncated)

    def test_truncated_payload_bytes_raise_corrupt(self):
        img = random_image(8, 8, seed=18)
        artifact, _, _ = run_standard(img, PipelineConfig(variant="standard"))
        with pytest.raises(CorruptCodeword):
            Codeword(
                data=artifact.payload.data[:-1],
                bit_length=artifact.payload.bit_length,
            )

    def test_wrong_symbol_count_raises_corrupt(self):
        img = random_image(4, 4, seed=19)
        artifact, _, _ = run_standard(img, PipelineConfig(variant="standard"))
        with pytest.raises(CorruptCodeword):
            decompress(dataclasses.replace(artifact, n_symbols=17))

    def test_unsupported_version_comes_from_deserialize(self):
        img = random_image(4, 4, seed=20)
        artifact, _, _ = run_standard(img, PipelineConfig(variant="standard"))
        blob = bytearray(serialize(artifact))
        blob[4] = 255
        with pytest.raises(UnsupportedVersion):
            deserialize(bytes(blob))


class TestDeterminism:
    @pytest.mark.parametrize("variant", ["standard", "pca", "cardinality", "optimized"])
    def test_bit_identical_artifacts(self, variant):
        img = smooth_image(12, 10, seed=21)
        cfg = PipelineConfig(variant=variant)
        blob1 = serialize(run(img, cfg)[0])
        blob2 = serialize(run(img, cfg)[0])
        assert blob1 == blob2


class TestLossyBounds:
    def test_rmse_finite_and_bounded(self):
        img = random_image(10, 10, seed=22)
        for variant in ("pca", "cardinality", "optimized"):
            _, recon, _ = run(img, PipelineConfig(variant=variant))
            err = rmse(img, recon)
            assert 0.0 <= err <= 255.0

    def test_reconstruction_dimensions(self):
        img = random_image(5, 23, seed=23)
        for variant in ("standard", "pca", "cardinality", "optimized"):
            _, recon, _ = run(img, PipelineConfig(variant=variant))
            assert (recon.width, recon.height) == (23, 5)
