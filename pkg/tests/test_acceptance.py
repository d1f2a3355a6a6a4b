"""Acceptance criteria, one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see per-criterion
output. Criteria 1 and 2 share one randomized corpus and together form the
honest substitute for unreproducible headline compression figures: the
coder must be lossless everywhere and within one bit of the entropy floor.
"""

import math
import os
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from aiotc.coder import BACKEND_EXACT, BACKEND_RENORM64, decode, encode
from aiotc.container import deserialize, serialize
from aiotc.errors import CorruptCodeword
from aiotc.images import GrayImage, SymbolSequence, load_pgm
from aiotc.metrics import (
    compression_ratio,
    format_ratio,
    rmse,
    sample_resources,
    timed,
)
from aiotc.models import build_model
from aiotc.pca import fit_project, reconstruct
from aiotc.pipelines import (
    PipelineConfig,
    decompress,
    run_cardinality,
    run_optimized,
    run_pca,
    run_standard,
)

from conftest import ramp_image, random_image, smooth_image

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "goldens")


def _pass(n: int, detail: str) -> None:
    print(f"\nACCEPTANCE {n:02d} PASS - {detail}")


def _random_corpus(n_cases: int = 10000, seed: int = 20240612):
    """Randomized sequences spanning lengths 1..10^4 and alphabets 2..256.

    Mostly short cases for breadth, a tail of long ones for depth, plus the
    pinned extremes (length 1 on a binary alphabet, length 10^4 on the full
    byte alphabet).
    """
    rng = random.Random(seed)
    yield SymbolSequence((0,), 2)
    yield SymbolSequence(tuple(rng.randrange(256) for _ in range(10000)), 256)
    for case in range(n_cases - 2):
        if case % 100 == 99:
            length = rng.randint(2001, 9999)
        elif case % 10 == 9:
            length = rng.randint(201, 2000)
        else:
            length = rng.randint(1, 200)
        alphabet = rng.randint(2, 256)
        symbols = tuple(rng.randrange(alphabet) for _ in range(length))
        yield SymbolSequence(symbols, alphabet)


class TestCriterion01And02:
    def test_lossless_roundtrip_and_entropy_bound(self):
        """#1 decode(encode(x)) == x on both backends for >= 10,000 cases;
        #2 exact codeword length <= ceil(-log2 prod P) + 1 on every case."""
        started = time.perf_counter()
        n_cases = 0
        worst_slack = -(10**9)
        for seq in _random_corpus():
            n_cases += 1
            model = build_model(seq)
            cw_exact, iters = encode(seq, model, BACKEND_EXACT)
            assert iters == len(seq)
            back = decode(cw_exact, model, len(seq), BACKEND_EXACT)
            assert back.symbols == seq.symbols

            cw_renorm, _ = encode(seq, model, BACKEND_RENORM64)
            back = decode(cw_renorm, model, len(seq), BACKEND_RENORM64)
            assert back.symbols == seq.symbols

            # entropy bound, exact integer arithmetic: smallest B with
            # prod_counts * 2^B >= total^len equals ceil(-log2 prod P)
            index = {s: i for i, s in enumerate(model.symbols)}
            prod = math.prod(model.counts[index[s]] for s in seq.symbols)
            den = model.total ** len(seq)
            bound = max(0, den.bit_length() - prod.bit_length() - 1)
            while (prod << bound) < den:
                bound += 1
            assert cw_exact.bit_length <= bound + 1
            worst_slack = max(worst_slack, cw_exact.bit_length - bound)
        elapsed = time.perf_counter() - started
        assert n_cases >= 10000
        assert elapsed < 120.0
        _pass(1, f"{n_cases} sequences roundtrip exactly on both backends "
                 f"in {elapsed:.1f}s")
        _pass(2, f"every exact codeword within {max(worst_slack, 0)} bit(s) "
                 f"of the entropy ceiling")


class TestCriterion03:
    def test_cardinality_error_bounds(self):
        cfg = PipelineConfig(variant="cardinality", levels=32)
        rng = np.random.default_rng(99)
        for trial in range(100):
            h, w = int(rng.integers(4, 40)), int(rng.integers(4, 40))
            img = GrayImage.from_array(
                rng.integers(0, 256, size=(h, w), dtype=np.uint8)
            )
            _, recon, _ = run_cardinality(img, cfg)
            assert rmse(img, recon) <= 4.0
        _, recon, _ = run_cardinality(ramp_image(), cfg)
        assert rmse(ramp_image(), recon) <= 4.0

        big = GrayImage.from_array(
            rng.integers(0, 256, size=(256, 256), dtype=np.uint8)
        )
        _, recon, _ = run_cardinality(big, cfg)
        err = rmse(big, recon)
        # brute-force oracle over the 8 residues of step-8 midpoints:
        # mean squared error 44/8, so rmse -> sqrt(5.5) = 2.345
        assert abs(err - math.sqrt(44 / 8)) <= 0.10
        _pass(3, f"101 images within the 4.0 bound; uniform 256x256 rmse "
                 f"{err:.4f} vs sqrt(44/8) = {math.sqrt(5.5):.4f}")


class TestCriterion04:
    def test_pca_identity_and_monotonicity(self):
        img = random_image(24, 24, seed=41)
        _, recon, _ = run_pca(img, PipelineConfig(variant="pca", retain=1.0))
        full_err = rmse(img, recon)
        assert full_err <= 0.51

        rng = np.random.default_rng(17)
        for trial in range(50):
            h, w = int(rng.integers(6, 20)), int(rng.integers(6, 20))
            img = GrayImage.from_array(
                rng.integers(0, 256, size=(h, w), dtype=np.uint8)
            )
            basis, block = fit_project(img, 1.0)
            x = img.as_array().astype(np.float64)
            prev = None
            for k in range(1, basis.k + 1):
                approx = block.scores[:, :k] @ basis.components[:k] + basis.mean
                err = float(np.sqrt(np.mean((approx - x) ** 2)))
                if prev is not None:
                    assert err <= prev + 1e-9
                prev = err
            assert prev <= 1e-6  # k = min(h, w) reconstructs exactly
        _pass(4, f"retain=1.0 pipeline rmse {full_err:.4f} <= 0.51; "
                 f"rmse non-increasing in k on 50 random matrices")


class TestCriterion05:
    def test_iteration_accounting(self):
        img = random_image(408, 612, seed=42)
        _, _, trace = run_standard(img, PipelineConfig(variant="standard"))
        assert trace.iterations == 612 * 408 == 249696

        images = [
            GrayImage(width=20, height=20, pixels=bytes([7]) * 400),
            random_image(30, 17, seed=43),
            smooth_image(25, 25, seed=44),
            ramp_image(),
        ]
        for test_img in images:
            _, _, t_std = run_standard(test_img, PipelineConfig(variant="standard"))
            assert t_std.iterations == test_img.width * test_img.height
            for n in (3, 4, 5, 6):
                _, _, t_opt = run_optimized(
                    test_img, PipelineConfig(variant="optimized", decimals=n)
                )
                assert t_opt.iterations <= t_std.iterations
        _pass(5, "standard iterations == pixel count (612x408 -> 249,696); "
                 "optimized <= standard on every image and threshold")


class TestCriterion06:
    def test_threshold_sweep_stability(self):
        # fixed image with dyadic intensity probabilities 1/2, 1/4, 1/8,
        # 1/8: rounding at any n in 3..6 leaves the model unchanged, so the
        # sweep isolates the threshold parameter itself
        px = bytes([40] * 32768 + [120] * 16384 + [200] * 8192 + [250] * 8192)
        img = GrayImage(width=256, height=256, pixels=px)
        sizes = []
        for n in (3, 4, 5, 6):
            artifact, _, _ = run_optimized(
                img, PipelineConfig(variant="optimized", decimals=n)
            )
            sizes.append(len(artifact.payload.data))
        assert max(sizes) <= min(sizes) * 1.01
        _pass(6, f"optimized payload bytes across n=3..6: {sizes} "
                 f"(spread {(max(sizes) / min(sizes) - 1) * 100:.2f}% <= 1%)")


class TestCriterion07:
    def test_desk_scale_performance(self):
        img = random_image(408, 612, seed=45)
        cfg = PipelineConfig(variant="standard")
        run_standard(img, cfg)  # warm-up outside the measured run

        (result, wall), cpu, mem_mb, _ = sample_resources(
            lambda: timed(lambda: run_standard(img, cfg))
        )
        _, recon, _ = result
        assert recon == img
        assert wall < 1.0
        assert mem_mb is not None and mem_mb < 50.0
        _pass(7, f"612x408 standard pipeline: {wall:.3f}s wall (< 1.0), "
                 f"{mem_mb:.1f} MB peak delta (< 50)")


class TestCriterion08:
    def test_ratio_arithmetic(self):
        r1 = compression_ratio(77296, 95)
        r2 = compression_ratio(65536, 22)
        assert format_ratio(r1) == "814:1"
        assert format_ratio(r2) == "2979:1"
        assert r1 == Fraction(77296, 95)
        assert r2 == Fraction(65536, 22)
        _pass(8, "77296/95 displays 814:1 and 65536/22 displays 2979:1, "
                 "exact rationals retained")


class TestCriterion09:
    def test_container_goldens(self):
        sizes = {}
        for name in ("standard_1x1", "cardinality_4x4", "optimized_8x8"):
            path = os.path.join(GOLDEN_DIR, f"{name}.aiot")
            with open(path, "rb") as fh:
                blob = fh.read()
            artifact = deserialize(blob)
            assert serialize(artifact) == blob
            img = decompress(artifact)
            with open(os.path.join(GOLDEN_DIR, f"{name}.recon.pgm"), "rb") as fh:
                assert img == load_pgm(fh.read())
            assert os.path.getsize(path) == len(blob)
            sizes[name] = len(blob)
        _pass(9, f"three goldens roundtrip byte-exactly, file sizes {sizes}")


class TestCriterion10:
    def test_single_bit_error_sensitivity(self):
        img = random_image(8, 8, seed=46)
        cfg = PipelineConfig(variant="standard", backend=BACKEND_EXACT)
        artifact, _, _ = run_standard(img, cfg)
        payload = artifact.payload
        assert payload.bit_length >= 64
        model = build_model(SymbolSequence(tuple(img.pixels), 256))
        corrupted = decoded_differently = 0
        for i in range(payload.bit_length):
            flipped = payload.with_bit_flipped(i)
            try:
                out = decode(flipped, model, 64, BACKEND_EXACT)
            except CorruptCodeword:
                corrupted += 1
                continue
            assert out.symbols != tuple(img.pixels)
            decoded_differently += 1
        assert corrupted + decoded_differently == payload.bit_length
        _pass(10, f"all {payload.bit_length} single-bit flips detected: "
                  f"{corrupted} corrupt, {decoded_differently} decode differently")
