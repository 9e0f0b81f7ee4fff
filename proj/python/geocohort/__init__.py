"""Home-location inference for social-media users and cohort topic analysis."""

from ._core import (
    COMMANDS,
    Gazetteer,
    GeocohortError,
    accuracy,
    auc,
    dbscan,
    default_config,
    normalize,
    ols,
    run,
    write_synthetic,
)

__all__ = [
    "COMMANDS",
    "Gazetteer",
    "GeocohortError",
    "accuracy",
    "auc",
    "dbscan",
    "default_config",
    "normalize",
    "ols",
    "run",
    "run_all",
    "write_synthetic",
]


def run_all(config=None):
    """Run every pipeline stage in order and stop at the first failure.

    Returns the list of (command, exit_code, log, stderr) tuples that ran.
    """
    results = []
    for command in COMMANDS:
        code, log, err = run(command, config)
        results.append((command, code, log, err))
        if code != 0:
            break
    return results
