#!/usr/bin/env python3
"""Check the install by running one short separation.

    python verify_setup.py
"""

import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

DEPENDENCIES = ["numpy", "scipy", "pandas", "polars", "pyarrow", "statsmodels", "python-dotenv"]

logger = logging.getLogger("verify_setup")


def missing_dependencies() -> list[str]:
    missing = []
    for name in DEPENDENCIES:
        try:
            logger.info("%s %s", name, version(name))
        except PackageNotFoundError:
            missing.append(name)
    return missing


def smoke_run() -> float:
    """Static mixture through reoica_base at desk scale; returns SI-SDR_sc in dB."""
    sys.path.insert(0, str(Path(__file__).parent / "src"))
    from reservoir_ica.analysis.metrics import evaluate_separation
    from reservoir_ica.experiments.runner import generate_inputs
    from reservoir_ica.online.pipeline import RunConfig, run_method

    config = RunConfig(
        method="reoica_base", regime="static", T=3000, N=50, d=10, warmup=500, ramp=500
    )
    S, X = generate_inputs(config, ["lorenz", "mackey_glass", "chirp"])
    trace = run_method(config, S, X)
    report = evaluate_separation(S.data, trace.Y, window=1000, max_lag=50)
    return report.si_sdr_sc_mean


def main() -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    if sys.version_info < (3, 12):
        logger.error("Python 3.12+ required, found %s", sys.version.split()[0])
        return 1

    missing = missing_dependencies()
    if missing:
        logger.error("Missing packages %s; run: pdm install", missing)
        return 1

    score = smoke_run()
    logger.info("Smoke run finished, SI-SDR_sc %.2f dB", score)
    logger.info("Setup OK. Next: pdm run bench --preset regimes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
