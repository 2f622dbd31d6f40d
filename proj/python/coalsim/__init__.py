"""Λ-coalescent rates, simulation, limit laws and seeded Monte Carlo experiments."""

import json

from ._coalsim import (
    DEFAULT_SEED,
    DomainError,
    Measure,
    ParseError,
    QuadratureError,
    Rates,
    RegimeError,
    Simulator,
    cox_max_cdf_integral,
    frechet_cdf,
    gumbel_cdf,
    ks_statistic,
    logistic_cdf,
    moehle_factorial_moment,
    order_stat_density,
    parse_measure,
    poisson_intensity_density,
    poisson_intensity_tail,
    resolve_level,
    run_experiment_json,
    sample_cox_extremes,
    t_c_sequence,
    t_sequence,
    typical_cdf,
    typical_density,
    typical_tail,
)

__version__ = "0.1.0"


def run_experiment(theorem, measure="kingman", n=1000, replications=1000, seed=DEFAULT_SEED,
                   threads=1, n_grid=(), t_grid=(), r_rule="", c=2.0, ell=1, k=2,
                   params=None, tolerances=None):
    """Run one experiment and return its report as a dict.

    The dict has the JSON report's keys plus ``runtime_ms``.
    """
    text, runtime_ms = run_experiment_json(
        theorem, measure, int(n), int(replications), int(seed), int(threads),
        [int(v) for v in n_grid], [float(v) for v in t_grid], r_rule, float(c),
        int(ell), int(k), dict(params or {}), dict(tolerances or {}))
    report = json.loads(text)
    report["runtime_ms"] = runtime_ms
    return report
