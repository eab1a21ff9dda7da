"""Level-2 rough paths, fast-slow homogenization and Monte-Carlo estimators."""

from ._core import (
    BlowUpError,
    RoughPathGrid,
    RunConfig,
    brownian_rough_path,
    estimate_batch,
    fast_slow,
    group_inv,
    group_mul,
    holder_norm,
    ks_test_normal,
    ks_two_sample,
    lift,
    limit_sde,
    p_var_homog,
    p_var_inhomog,
    path_p_variation,
    run,
)

__all__ = [
    "BlowUpError",
    "RoughPathGrid",
    "RunConfig",
    "brownian_rough_path",
    "config",
    "estimate_batch",
    "fast_slow",
    "group_inv",
    "group_mul",
    "holder_norm",
    "ks_test_normal",
    "ks_two_sample",
    "lift",
    "limit_sde",
    "p_var_homog",
    "p_var_inhomog",
    "path_p_variation",
    "run",
]


def config(subcommand: str = "estimate", **fields) -> RunConfig:
    """RunConfig with the given fields set; unknown names raise AttributeError."""
    cfg = RunConfig()
    cfg.subcommand = subcommand
    for name, value in fields.items():
        if not hasattr(cfg, name):
            raise AttributeError(f"RunConfig has no field {name!r}")
        setattr(cfg, name, value)
    return cfg
