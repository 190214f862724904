import hashlib
import json
import os

from regretbench import log
from regretbench.errors import ConfigError

__version__ = "0.3.0"

logger = log.create_logger("regretbench",
                           file_path=os.getenv("REGRETBENCH_LOG_FILE"),
                           level=os.getenv("REGRETBENCH_LOG_LEVEL", "DEBUG"))

# Cycle counts grow like 3, 6, 19, 179, 30176, ~2.2e9: d=6 is out of reach
max_cycle_depth = int(os.getenv("REGRETBENCH_MAX_DEPTH", "5"))

random_expert_bound = 0.9

# simplex
lp_pivot_tol = 1e-9
lp_optimality_tol = 1e-8
lp_max_iterations = 20000

# pde
quadrature_order = 64
root_tol = 1e-12
truncation_sigmas = 8.0
truncation_warning_sigmas = 6.0

# game
golden_section_tol = 1e-10
grid_margin = 0.1
max_lattice_nodes = 2_000_000
brute_force_budget = 50_000_000

# play
gamma_safety_factor = 1.1
sharp_cutoff = 1e-14
bound_slack = 1.05

DEFAULTS = {
    "C": 1.0,
    "T": 1.0,
    "t0": 0.0,
    "d": 1,
    "epsilon": "1/16",
    "epsilons": ["1/16", "1/32", "1/64"],
    "experts": None,
    "final": "classic",
    "side": "both",
    "closed_form": False,
    "quadrature_order": quadrature_order,
    "y_grid": None,
    "xi_grid": None,
    "tolerances": {"root": root_tol,
                   "golden_section": golden_section_tol,
                   "lp_optimality": lp_optimality_tol},
    "start": {"m": 0, "xi": 0.0, "eta": 0.0},
    "investor": "pde",
    "market": "forcing",
    "fixed_bid": 0.0,
    "markets": 1,
    "mode": "value",
    "general": False,
    "keep_levels": False,
    "seed": 0,
    "threads": 1,
}


def load_run_config(path=None, overrides=None):
    """Build a run configuration: defaults, then the JSON file, then the
    non-None command-line overrides.

    :param path: path of a JSON config file, or None
    :param overrides: dict of values taken from command-line flags
    """
    cfg = json.loads(json.dumps(DEFAULTS))
    if path:
        try:
            with open(path, 'r') as f:
                file_cfg = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        unknown = sorted(set(file_cfg) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {unknown}")
        cfg.update(file_cfg)
        logger.debug(f"Loaded config {path}")
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key}")
        if value is not None:
            cfg[key] = value
    return cfg


def config_digest(cfg):
    """SHA-256 of the canonical JSON form of a configuration"""
    canonical = json.dumps(cfg, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
