"""Moment-matching aggregation for discounted Markov chains and MDPs."""

from ._core import (
    ConfigError,
    DomainError,
    Mrp,
    NumericalError,
    ResourceError,
    StateLattice,
    evaluate,
    exact_value,
    first_moment_gap,
    format_double,
    grid_axes,
    meta_count_bound,
    reflecting_rw,
    set_thread_count,
    simple_rw,
    two_point_chain,
    verify_mstep_identity,
)
from ._core import run as _run


def run(config=None, **sections):
    """Run one experiment.

    `config` maps "section.key" to values; keyword arguments of the form
    problem={"name": "simple_rw"} are flattened the same way. Returns
    (exit_code, summary dict).
    """
    flat = {k: str(v) for k, v in (config or {}).items()}
    for section, values in sections.items():
        for key, value in values.items():
            flat[f"{section}.{key}"] = _text(value)
    return _run(flat)


def _text(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


__all__ = [
    "ConfigError",
    "DomainError",
    "Mrp",
    "NumericalError",
    "ResourceError",
    "StateLattice",
    "evaluate",
    "exact_value",
    "first_moment_gap",
    "format_double",
    "grid_axes",
    "meta_count_bound",
    "reflecting_rw",
    "run",
    "set_thread_count",
    "simple_rw",
    "two_point_chain",
    "verify_mstep_identity",
]
