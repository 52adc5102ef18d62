import logging
from pathlib import Path

from src.rough_forms.config import DEFAULT_CONFIG, load_config, section
from src.rough_forms.integrals import ZustOptions
from src.rough_forms.sew import SewOptions


def test_defaults_are_a_copy():
    config = load_config(None)
    assert config == DEFAULT_CONFIG
    config["sewing"]["abs_tol"] = 1.0
    assert DEFAULT_CONFIG["sewing"]["abs_tol"] == 1e-10


def test_file_values_override_the_defaults(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text('[sewing]\nvariant = "dya_dagger"\nmax_level_2 = 7\n\n[zust]\nouter_max_level = 4\n')
    config = load_config(str(path))
    assert config["sewing"]["variant"] == "dya_dagger"
    assert config["sewing"]["abs_tol"] == 1e-10
    assert config["sampling"]["n_random"] == 10_000
    opts = SewOptions.from_config(config)
    assert opts.variant == "dya_dagger"
    assert opts.level_cap(2) == 7
    assert ZustOptions.from_config(config).outer_max_level == 4


def test_repository_config_matches_the_defaults():
    assert load_config(str(Path(__file__).resolve().parent.parent / "config.toml")) == DEFAULT_CONFIG


def test_missing_or_malformed_files_are_logged(tmp_path, caplog):
    with caplog.at_level(logging.ERROR):
        assert load_config(str(tmp_path / "absent.toml")) is None
    assert "Error loading config file" in caplog.text
    bad = tmp_path / "bad.toml"
    bad.write_text("[sewing\nabs_tol = ")
    assert load_config(str(bad)) is None


def test_section_falls_back_to_defaults():
    assert section(None, "quadrature")["limit"] == 200
    assert section({"quadrature": {"limit": 50}}, "quadrature") == {"tol": 1e-10, "limit": 50,
                                                                    "derivative_step": 1e-5}
    assert section({}, "certify")["cut_t"] == 0.3
