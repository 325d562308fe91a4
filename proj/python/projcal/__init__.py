"""Camera-projector extrinsic auto-correction."""

import json

from ._projcal import (  # noqa: F401
    ConfigError,
    CorruptFileError,
    IoError,
    NotFoundError,
    OffsetEstimate,
    PolicyWeights,
    ProjcalError,
    RunConfig,
    ShapeMismatchError,
    SplitError,
    __version__,
    analytic_estimate,
    generate_dataset,
    predict,
    preprocess,
    render,
    train,
)
from . import _projcal


def run_episode(config, injected, weights=None, dump_dir=None):
    """One correction episode; returns the trace as a dict."""
    return json.loads(_projcal.run_episode(config, injected, weights, dump_dir))


def evaluate(config, weights=None):
    """Closed-loop trials; returns the report as a dict."""
    return json.loads(_projcal.evaluate(config, weights))
