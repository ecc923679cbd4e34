"""Monte Carlo simulator of continuous fuzzy measurement."""

import json
import os

from . import _core
from ._core import (
    Error,
    IoError,
    ValidationError,
    coherence_decay,
    criterion_count,
    preset_names,
    survival_prob,
    theta_cdf,
    theta_mode,
    theta_pdf,
    zeno_ratio,
    zeno_ratio_asymptote,
)

__all__ = [
    "Error", "IoError", "ValidationError",
    "load_config", "parse_config", "derive", "run", "write_artifacts",
    "preset_names", "run_preset", "run_criterion", "criterion_count",
    "theta_pdf", "theta_cdf", "theta_mode", "coherence_decay", "survival_prob",
    "zeno_ratio", "zeno_ratio_asymptote",
]


def _text(config):
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        return _core.load_config(os.fspath(config))
    if isinstance(config, str):
        return config
    return json.dumps(config)


def load_config(path):
    """Validated canonical config from a JSON file, as a dict."""
    return json.loads(_core.load_config(os.fspath(path)))


def parse_config(config):
    """Validate a dict or JSON text and return its canonical form."""
    return json.loads(_core.canonical_config(_text(config)))


def derive(config):
    return json.loads(_core.derive(_text(config)))


def run(config, workers=1):
    """Run the ensemble. Per-run series and stored traces come back as numpy arrays."""
    r = _core.run(_text(config), workers)
    r["summary"] = json.loads(r["summary"])
    r["derived"] = json.loads(r["derived"])
    return r


def write_artifacts(config, out, workers=1):
    return _core.write_artifacts(_text(config), os.fspath(out), workers)


def run_preset(name, scale=None, seed=None, out="out", workers=1):
    return _core.run_preset(name, scale, seed, os.fspath(out), workers)


def run_criterion(id, workers=1, seed=None):
    if seed is None:
        return _core.run_criterion(id, workers)
    return _core.run_criterion(id, workers, seed)
