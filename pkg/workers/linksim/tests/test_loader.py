"""Tests for the key = value config loader and LinkConfig validation."""
from pathlib import Path

import pytest

from linksim.errors import ConfigError
from linksim.io.loader import build_config, load_config, parse_config_text
from linksim.io.schema import LinkConfig
from linksim.policy.kinds import DetectorKind, PrecoderKind

EXPERIMENTS = Path(__file__).resolve().parents[3] / "experiments"


class TestParse:
    def test_sample_file(self, config_file):
        cfg = load_config(config_file)
        assert cfg.precoder is PrecoderKind.SWH
        assert cfg.detector is DetectorKind.SWH_MAXLOG
        assert (cfg.n, cfg.q, cfg.order, cfg.n_tau) == (16, 4, 4, 2)
        assert cfg.ebn0_db == [0.0, 2.0, 4.0]

    def test_explicit_list(self):
        values = parse_config_text("ebn0_db = 1, 2.5 ,4\n")
        assert values["ebn0_db"] == [1.0, 2.5, 4.0]

    def test_fractional_range_includes_stop(self):
        values = parse_config_text("ebn0_db = 0:0.5:2")
        assert values["ebn0_db"] == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_comments_and_blank_lines(self):
        values = parse_config_text("\n# header\n\nq = 8   # trailing\n")
        assert values == {"q": "8"}

    @pytest.mark.parametrize("text", [
        "q = 4\nq = 8",
        "precoder swh",
        "= 4",
        "ebn0_db = 4:1:0",
        "ebn0_db = 0:1",
        "ebn0_db = a, b",
    ])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)


class TestBuild:
    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="colour"):
            build_config({"colour": "blue"})

    def test_bad_enum(self):
        with pytest.raises(ConfigError):
            build_config({"precoder": "wavelet"})

    def test_map_needs_swh(self):
        with pytest.raises(ConfigError):
            build_config({"precoder": "sdft", "detector": "swh-log"})

    def test_dft_forces_full_spreading(self):
        cfg = build_config({"precoder": "dft", "detector": "epic", "n": "64", "q": "4"})
        assert (cfg.q, cfg.p) == (64, 1)

    @pytest.mark.parametrize("values", [{"n": "100"}, {"order": "8"}, {"q": "512"}])
    def test_bad_geometry(self, values):
        with pytest.raises(ConfigError):
            build_config(values)

    def test_config_error_is_value_error(self):
        with pytest.raises(ValueError):
            build_config({"n_tau": "-1"})


class TestLoad:
    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.cfg")

    def test_defaults_without_file(self):
        cfg = load_config(None)
        assert cfg == LinkConfig()
        assert cfg.n_coded == 512

    def test_overrides_win_and_none_is_skipped(self, config_file):
        cfg = load_config(config_file, {"seed": 99, "ebn0_db": None})
        assert cfg.seed == 99
        assert cfg.ebn0_db == [0.0, 2.0, 4.0]

    def test_schedule_from_order(self, config_file):
        s = load_config(config_file).schedule
        assert (s.n_turbo, s.n_self, s.beta0) == (2, 2, 0.7)

    @pytest.mark.parametrize("path", sorted(EXPERIMENTS.glob("*.cfg")), ids=lambda p: p.stem)
    def test_bundled_experiments(self, path):
        cfg = load_config(path)
        assert cfg.n == 256
        assert cfg.seed == 1
