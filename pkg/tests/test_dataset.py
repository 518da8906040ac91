import os

import numpy as np
import pytest

import foamlab as fl
from foamlab.dataset import (
    PAPER_LABEL_RANGE,
    cells_for_density,
    load_manifest,
    sample_rve_config,
)
from foamlab.errors import DatasetBuildError, InvalidConfigError


def fast_config(out_dir, count=6, seed=1, **kw):
    """Thick walls keep the cell counts tiny so unit tests stay quick."""
    defaults = dict(
        count=count,
        out_dir=str(out_dir),
        t_fixed=0.5,
        mu_range=(0.07, 0.20),
        px=128,
        master_seed=seed,
    )
    defaults.update(kw)
    return fl.DatasetConfig(**defaults)


class TestSplitAssign:
    def test_paper_sizes(self):
        tags = fl.split_assign(2051, (0.7, 0.2, 0.1), master_seed=0)
        assert tags.count("train") == 1435
        assert tags.count("val") == 410
        assert tags.count("test") == 206

    def test_small_sizes(self):
        tags = fl.split_assign(10, (0.7, 0.2, 0.1), master_seed=3)
        assert (tags.count("train"), tags.count("val"), tags.count("test")) == (7, 2, 1)

    def test_single_sample_goes_to_remainder(self):
        # floor cuts leave the lone sample in the remainder split
        assert fl.split_assign(1, (0.7, 0.2, 0.1), master_seed=0) == ["test"]

    def test_deterministic(self):
        a = fl.split_assign(100, master_seed=7)
        b = fl.split_assign(100, master_seed=7)
        assert a == b

    def test_seed_changes_assignment(self):
        assert fl.split_assign(100, master_seed=1) != fl.split_assign(100, master_seed=2)

    def test_partition(self):
        tags = fl.split_assign(37, master_seed=5)
        assert len(tags) == 37
        assert all(t in ("train", "val", "test") for t in tags)

    def test_bad_fractions(self):
        with pytest.raises(InvalidConfigError):
            fl.split_assign(10, (0.5, 0.2, 0.1))


class TestSampleConfig:
    def test_deterministic(self):
        cfg = fast_config("unused")
        assert sample_rve_config(cfg, 3) == sample_rve_config(cfg, 3)
        assert sample_rve_config(cfg, 3) != sample_rve_config(cfg, 4)

    def test_retry_changes_seed(self):
        cfg = fast_config("unused")
        assert sample_rve_config(cfg, 3, attempt=1).rng_seed != sample_rve_config(cfg, 3).rng_seed

    def test_morphology_mix_frequencies(self):
        cfg = fast_config("unused", morphology_mix=(0.5, 0.3, 0.2))
        morphs = [sample_rve_config(cfg, i).morphology for i in range(400)]
        frac_convex = morphs.count("random-convex") / 400
        frac_concave = morphs.count("concave-perturbed") / 400
        assert abs(frac_convex - 0.5) < 0.08
        assert abs(frac_concave - 0.3) < 0.08

    def test_cells_for_density(self):
        # L ~ 2 H sqrt(n) inverted at mu = t * L / H^2
        assert cells_for_density(0.0852, 30.0, 0.1142) == 125
        assert cells_for_density(0.01, 30.0, 0.5) == 4   # clamped at the minimum

    def test_config_validation(self):
        with pytest.raises(InvalidConfigError):
            fast_config("x", count=0).validate()
        with pytest.raises(InvalidConfigError):
            fast_config("x", split=(0.5, 0.5, 0.5)).validate()
        with pytest.raises(InvalidConfigError):
            fast_config("x", mu_range=(0.3, 0.2)).validate()
        with pytest.raises(InvalidConfigError):
            fast_config("x", px=32).validate()


class TestBuild:
    def test_build_and_manifest(self, tmp_path):
        cfg = fast_config(tmp_path / "d1", count=6)
        manifest = fl.build_dataset(cfg)
        assert len(manifest.records) == 6
        assert [r.id for r in manifest.records] == list(range(6))
        for r in manifest.records:
            assert os.path.exists(os.path.join(cfg.out_dir, r.image))
            assert r.label_mpa > 0
            assert r.split in ("train", "val", "test")
            assert r.image == f"rve_{r.id:06d}.png"
        assert manifest.checksum == manifest.compute_checksum()

    def test_rebuild_identical(self, tmp_path):
        m1 = fl.build_dataset(fast_config(tmp_path / "a", count=5, seed=9))
        m2 = fl.build_dataset(fast_config(tmp_path / "b", count=5, seed=9))
        assert m1.checksum == m2.checksum
        assert m1.to_csv() == m2.to_csv()

    def test_worker_count_invariance(self, tmp_path):
        m1 = fl.build_dataset(fast_config(tmp_path / "w1", count=5, seed=4), workers=1)
        m2 = fl.build_dataset(fast_config(tmp_path / "w2", count=5, seed=4), workers=2)
        assert m1.checksum == m2.checksum

    def test_master_seed_changes_output(self, tmp_path):
        m1 = fl.build_dataset(fast_config(tmp_path / "s1", count=4, seed=1))
        m2 = fl.build_dataset(fast_config(tmp_path / "s2", count=4, seed=2))
        assert m1.checksum != m2.checksum

    def test_manifest_roundtrip(self, tmp_path):
        cfg = fast_config(tmp_path / "rt", count=4)
        m1 = fl.build_dataset(cfg)
        m2 = load_manifest(cfg.out_dir)
        assert m2.checksum == m1.checksum
        assert m2.to_csv() == m1.to_csv()
        assert m2.compute_checksum() == m1.checksum

    def test_label_geometry_consistency(self, tmp_path):
        cfg = fast_config(tmp_path / "lg", count=3)
        manifest = fl.build_dataset(cfg)
        material = fl.WallMaterial(E0=cfg.E0, nu0=cfg.nu0)
        for r in manifest.records[:2]:
            rc = fl.RveConfig(
                H=cfg.H, n_cells=r.n_cells, t_fixed=cfg.t_fixed,
                min_sep_factor=cfg.min_sep_factor, morphology=r.morphology,
                concavity_count=1, rng_seed=r.seed,
            )
            geom = fl.generate_rve(rc)
            again = fl.homogenized_modulus(geom, material)
            assert abs(again - r.label_mpa) <= 1e-9 * r.label_mpa
            assert geom.mu_realized == pytest.approx(r.mu, rel=1e-9)

    def test_monotone_density_trend(self, tmp_path):
        cfg = fast_config(tmp_path / "mt", count=10, seed=12)
        manifest = fl.build_dataset(cfg, workers=2)
        mus = np.array([r.mu for r in manifest.records])
        labels = np.array([r.label_mpa for r in manifest.records])
        lo = labels[mus <= np.median(mus)]
        hi = labels[mus > np.median(mus)]
        assert hi.mean() > lo.mean()

    def test_failure_after_retries_lists_ids(self, tmp_path):
        cfg = fast_config(tmp_path / "bad", count=2, min_sep_factor=0.9,
                          mu_range=(0.10, 0.15))
        with pytest.raises(DatasetBuildError) as err:
            fl.build_dataset(cfg)
        assert err.value.failed_ids == [0, 1]


class TestEnvelopeCheck:
    def test_report_fields(self, tmp_path):
        cfg = fast_config(tmp_path / "env", count=4)
        report = fl.label_envelope_check(fl.build_dataset(cfg))
        assert report["n"] == 4
        assert report["min_mpa"] <= report["mean_mpa"] <= report["max_mpa"]
        assert report["envelope_mpa"] == list(PAPER_LABEL_RANGE)
        assert 0.0 <= report["frac_below"] <= 1.0
        assert 0.0 <= report["frac_above"] <= 1.0

    def test_empty_manifest(self):
        m = fl.DatasetManifest(records=[], config=fast_config("x"))
        assert fl.label_envelope_check(m) == {"error": "no samples"}

    def test_validation_density_sample_label(self):
        # one paper-settings sample near mu = 8.52 % lands in the validated band
        cfg = fl.DatasetConfig(count=1, out_dir="unused")
        rc = fl.RveConfig(H=30.0, n_cells=cells_for_density(0.0852, 30.0, 0.1142),
                          t_fixed=0.1142, rng_seed=21)
        geom = fl.generate_rve(rc)
        label = fl.homogenized_modulus(geom, fl.WallMaterial(E0=cfg.E0, nu0=cfg.nu0))
        assert 900.0 <= label <= 1300.0
