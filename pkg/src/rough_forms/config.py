"""Configuration utilities for the rough forms toolkit."""
import copy
import logging

import tomli

logger = logging.getLogger(__name__)

# Built-in defaults; config.toml only needs to list what it changes.
DEFAULT_CONFIG = {
    "sewing": {
        "max_level_1": 14,
        "max_level_2": 10,
        "abs_tol": 1e-10,
        "rel_tol": 1e-8,
        "variant": "dya",
        "extrapolate": False,
        "extrapolation": "observed",
        "romberg_columns": 3,
        "divergence_ratio": 0.95,
        "rate_window": 8,
        "compensated": False,
        "threads": 1,
        "chunk_size": 1 << 20,
    },
    "zust": {
        "outer_max_level": 6,
        "inner_max_level": 12,
        "inner_extrapolation": "romberg",
        "inner_romberg_columns": 3,
        "cache_decimals": 12,
    },
    "compensator": {
        "max_depth": 24,
        "abs_tol": 1e-10,
        "extrapolate": False,
        "min_depth": 2,
    },
    "sampling": {
        "box_lo": 0.0,
        "box_hi": 1.0,
        "n_random": 10_000,
        "dyadic_depth": 8,
        "n_scales": 20,
        "n_multiscale": 64,
        "seed": 0,
    },
    "quadrature": {
        "tol": 1e-10,
        "limit": 200,
        "derivative_step": 1e-5,
    },
    "certify": {
        "n_probes": 6,
        "tol": 1e-7,
        "cut_t": 0.3,
        "seed": 0,
    },
    "logging": {
        "level": "WARNING",
    },
}


def _merge(base, override):
    """Recursively merge ``override`` into a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_file="config.toml"):
    """
    Load configuration from a TOML file on top of the built-in defaults.

    Args:
        config_file: Path to the TOML configuration file, or None for defaults only

    Returns:
        Dictionary containing the configuration or None if loading fails
    """
    if config_file is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(config_file, "rb") as f:
            return _merge(DEFAULT_CONFIG, tomli.load(f))
    except (OSError, tomli.TOMLDecodeError) as e:
        logger.error("Error loading config file %s: %s", config_file, e)
        return None


def section(config, name):
    """Return one config section, falling back to the defaults when absent."""
    if config is None:
        return dict(DEFAULT_CONFIG[name])
    return {**DEFAULT_CONFIG.get(name, {}), **config.get(name, {})}
