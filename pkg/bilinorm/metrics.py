"""Prometheus metrics for verification runs and ascent solvers."""

from prometheus_client import (
    CONTENT_TYPE_LATEST,
    Counter,
    Histogram,
    generate_latest,
)

# Verification suite metrics
checks_total = Counter(
    "bilinorm_checks_total",
    "Total number of invariant checks evaluated",
    ["suite", "verdict"],  # verdict: holds, fails, inconclusive
)

suite_duration_seconds = Histogram(
    "bilinorm_suite_duration_seconds",
    "Time spent running a verification suite",
    ["suite"],
    buckets=[0.1, 0.5, 1, 5, 10, 30, 60, 120],
)

# Multi-start ascent metrics
#
# One start is one seeded run of the supporting-functional ascent; the
# iteration histogram shows how far from the tolerance the starts converge.
#
# Labels:
#   method: "linear" | "alternating"
ascent_starts_total = Counter(
    "bilinorm_ascent_starts_total",
    "Total number of multi-start ascent runs",
    ["method"],
)

ascent_iterations = Histogram(
    "bilinorm_ascent_iterations",
    "Iterations until an ascent start converged",
    buckets=[1, 5, 10, 50, 100, 500, 1000, 5000],
)


def get_metrics() -> tuple[bytes, str]:
    """Generate Prometheus metrics in text format.

    Returns:
        Tuple of (metrics_bytes, content_type)
    """
    return generate_latest(), CONTENT_TYPE_LATEST
