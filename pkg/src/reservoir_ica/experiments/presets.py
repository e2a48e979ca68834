"""Named experiment presets, one per published comparison."""

from reservoir_ica.errors import ConfigurationError
from reservoir_ica.experiments.config import ExperimentSpec

ONLINE_PAIR = ["reoica_base", "vanilla"]
SCALING_BRANCHES = [
    "reoica_base",
    "reoica_sqrt",
    "reoica_rsi_unguarded",
    "reoica_rsi_guarded",
]


def _regimes() -> ExperimentSpec:
    return ExperimentSpec(
        regimes=["static", "time_varying", "nonlinear"],
        methods=["reoica_base", "vanilla", "fastica"],
        reference="vanilla",
    )


def _scaling() -> ExperimentSpec:
    return ExperimentSpec(regimes=["nonlinear"], methods=SCALING_BRANCHES, reference="reoica_base")


def _supergaussian() -> ExperimentSpec:
    return ExperimentSpec(
        regimes=["static"],
        methods=ONLINE_PAIR,
        sources="super_gaussian",
        T=30_000,
    )


def _supergaussian_mild() -> ExperimentSpec:
    return ExperimentSpec(
        regimes=["nonlinear"],
        methods=ONLINE_PAIR,
        sources="super_gaussian",
        T=30_000,
        overrides={"gamma": 0.5, "snr_db": 20.0},
    )


def _nsweep() -> ExperimentSpec:
    return ExperimentSpec(
        regimes=["nonlinear"],
        methods=["reoica_base", "reoica_sqrt", "reoica_rsi_guarded"],
        sweep={"N": [100, 250, 500, 1000]},
        reference="reoica_base",
    )


def _architecture() -> ExperimentSpec:
    return ExperimentSpec(
        regimes=["time_varying"],
        methods=ONLINE_PAIR,
        sweep={"arch": ["esn", "random_features"]},
    )


def _drift() -> ExperimentSpec:
    return ExperimentSpec(
        regimes=["time_varying"],
        methods=ONLINE_PAIR,
        sweep={"eps": [0.1, 0.3, 0.8]},
    )


def _convergence() -> ExperimentSpec:
    return ExperimentSpec(regimes=["time_varying"], methods=["reoica_base", "vanilla", "fastica"])


PRESETS = {
    "regimes": _regimes,
    "scaling": _scaling,
    "supergaussian": _supergaussian,
    "supergaussian_mild": _supergaussian_mild,
    "nsweep": _nsweep,
    "architecture": _architecture,
    "drift": _drift,
    "convergence": _convergence,
}


def get_preset(name: str) -> ExperimentSpec:
    """
    Build a preset spec.

    Raises:
        ConfigurationError: If the preset name is unknown
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigurationError(f"Unknown preset '{name}'. Available: {sorted(PRESETS)}") from None
