"""Hyperparameter distributions and per-dataset prior sampling.

A PriorConfig declares the distribution over every generator
hyperparameter; sample_prior draws one concrete PriorSample per dataset
seed. Defaults and the derived-quantity formulas (omega construction,
degree-budget split) are documented in docs/prior.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .rng import MASK64, stream
from .scm import ScmParams
from .structure import BaParams, DcsbmParams

ACTIVATIONS = ("identity", "tanh", "relu", "sine", "abs")

# raw degree propensities are clipped here before per-block normalization,
# bounding how much edge mass a single hub can absorb
THETA_CAP = 1e4


@dataclass(frozen=True)
class Task:
    kind: str  # "regression" | "classification"
    n_classes: int = 0

    @property
    def is_classification(self) -> bool:
        return self.kind == "classification"


@dataclass(frozen=True)
class PriorConfig:
    """Distributions over all prior hyperparameters. Immutable."""

    node_count_range: tuple[int, int] = (1_000, 20_000)  # log-uniform
    max_edges: int = 194_425
    first_level_count_range: tuple[int, int] = (1, 5)
    blocks_per_sbm_range: tuple[int, int] = (2, 20)
    mean_degree_range: tuple[float, float] = (2.0, 30.0)  # log-uniform
    degree_exponent_range: tuple[float, float] = (2.0, 3.5)
    ba_fraction_range: tuple[float, float] = (0.0, 0.4)
    ba_degree_zipf_range: tuple[float, float] = (1.5, 3.0)
    ba_degree_cap: int = 32
    scm_layers_range: tuple[int, int] = (2, 8)
    scm_hidden_range: tuple[int, int] = (16, 96)
    scm_activation_set: tuple[str, ...] = ACTIVATIONS
    mixing_grid: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(11))
    lappe_probability: float = 0.5
    lappe_k_range: tuple[int, int] = (2, 16)
    feature_count_range: tuple[int, int] = (4, 48)
    class_count_range: tuple[int, int] = (2, 10)
    regression_probability: float = 0.5
    context_fraction_range: tuple[float, float] = (0.05, 0.5)
    mgm_fraction: float = 0.1
    noise_scale_range: tuple[float, float] = (1e-3, 0.3)  # log-uniform
    # derived-quantity distributions (see docs/prior.md)
    sbm_strength_range: tuple[float, float] = (0.3, 0.95)
    level_split_range: tuple[float, float] = (0.3, 0.7)
    scm_input_dim_range: tuple[int, int] = (2, 12)
    scm_weight_scale_range: tuple[float, float] = (0.5, 2.0)  # log-uniform

    def validate(self) -> None:
        for name in (
            "node_count_range", "first_level_count_range", "blocks_per_sbm_range",
            "mean_degree_range", "degree_exponent_range", "ba_fraction_range",
            "ba_degree_zipf_range", "scm_layers_range", "scm_hidden_range",
            "lappe_k_range", "feature_count_range", "class_count_range",
            "context_fraction_range", "noise_scale_range", "sbm_strength_range",
            "level_split_range", "scm_input_dim_range", "scm_weight_scale_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name}: min {lo} > max {hi}")
        for name, lo_ok in (
            ("node_count_range", 1), ("first_level_count_range", 1),
            ("blocks_per_sbm_range", 1), ("scm_layers_range", 1),
            ("scm_hidden_range", 2), ("lappe_k_range", 1),
            ("feature_count_range", 1), ("scm_input_dim_range", 1),
        ):
            if getattr(self, name)[0] < lo_ok:
                raise ConfigError(f"{name} must start at >= {lo_ok}")
        if self.max_edges < 1:
            raise ConfigError("max_edges must be positive")
        if self.ba_degree_cap < 1:
            raise ConfigError("ba_degree_cap must be positive")
        for name in ("lappe_probability", "regression_probability", "mgm_fraction"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name}={p} outside [0,1]")
        if not 0.0 < self.mgm_fraction < 1.0:
            raise ConfigError("mgm_fraction must lie in (0,1)")
        if self.mean_degree_range[0] <= 0:
            raise ConfigError("mean degrees must be positive")
        if self.degree_exponent_range[0] <= 1.0:
            raise ConfigError("degree exponents must exceed 1")
        if self.ba_degree_zipf_range[0] <= 1.0:
            raise ConfigError("Zipf exponents must exceed 1")
        if not self.mixing_grid:
            raise ConfigError("mixing_grid is empty")
        if any(not 0.0 <= p <= 1.0 for p in self.mixing_grid):
            raise ConfigError("mixing_grid values must lie in [0,1]")
        if not (2 <= self.class_count_range[0] and self.class_count_range[1] <= 10):
            raise ConfigError("class_count_range must be within [2,10]")
        lo, hi = self.context_fraction_range
        if not (0.0 < lo and hi < 1.0):
            raise ConfigError("context_fraction_range must be within (0,1)")
        if self.noise_scale_range[0] < 0:
            raise ConfigError("noise scales must be non-negative")
        unknown = set(self.scm_activation_set) - set(ACTIVATIONS)
        if unknown:
            raise ConfigError(f"unknown activations {sorted(unknown)}")
        if not self.scm_activation_set:
            raise ConfigError("scm_activation_set is empty")


@dataclass(frozen=True)
class PriorSample:
    """One concrete draw of all generator hyperparameters."""

    seed: int
    n_total: int
    max_edges: int
    first_level_sizes: tuple[int, ...]
    second_level_params: DcsbmParams
    first_level_params: tuple[DcsbmParams, ...]
    ba_params: BaParams
    scm_params: ScmParams
    mixing_p: float
    use_lappe: bool
    lappe_k: int
    n_features: int
    task: Task
    context_fraction: float
    mgm_fraction: float
    noise_scale: float


_INT_RANGE_KEYS = {
    "node_count_range", "first_level_count_range", "blocks_per_sbm_range",
    "scm_layers_range", "scm_hidden_range", "lappe_k_range",
    "feature_count_range", "class_count_range", "scm_input_dim_range",
}
_FLOAT_RANGE_KEYS = {
    "mean_degree_range", "degree_exponent_range", "ba_fraction_range",
    "ba_degree_zipf_range", "context_fraction_range", "noise_scale_range",
    "sbm_strength_range", "level_split_range", "scm_weight_scale_range",
}
_INT_KEYS = {"max_edges", "ba_degree_cap"}
_FLOAT_KEYS = {"lappe_probability", "regression_probability", "mgm_fraction"}
_LIST_KEYS = {"mixing_grid", "scm_activation_set"}


def load_config(path: str | Path | None = None) -> PriorConfig:
    """Parse a flat key/value config file; absent keys take defaults.

    Lines are ``key = value``; ranges use ``key.min`` / ``key.max``;
    list-valued keys take comma-separated values. ``#`` starts a comment.
    ``path=None`` returns the all-defaults config.
    """
    cfg = PriorConfig()
    if path is None:
        cfg.validate()
        return cfg
    text = Path(path).read_text(encoding="utf-8")
    overrides: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            _apply_key(overrides, key, value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    cfg = replace(cfg, **_finalize(overrides))
    cfg.validate()
    return cfg


def _apply_key(overrides: dict, key: str, value: str) -> None:
    base, _, bound = key.partition(".")
    if bound:
        if bound not in ("min", "max"):
            raise ConfigError(f"unknown range bound {bound!r} in {key!r}")
        if base in _INT_RANGE_KEYS:
            overrides.setdefault(base, {})[bound] = int(value)
        elif base in _FLOAT_RANGE_KEYS:
            overrides.setdefault(base, {})[bound] = float(value)
        else:
            raise ConfigError(f"unknown range key {base!r}")
        return
    if base in _INT_KEYS:
        overrides[base] = int(value)
    elif base in _FLOAT_KEYS:
        overrides[base] = float(value)
    elif base == "mixing_grid":
        overrides[base] = tuple(float(v) for v in value.split(","))
    elif base == "scm_activation_set":
        overrides[base] = tuple(v.strip() for v in value.split(","))
    elif base in _INT_RANGE_KEYS or base in _FLOAT_RANGE_KEYS:
        raise ConfigError(f"{base!r} needs .min/.max bounds")
    else:
        raise ConfigError(f"unknown config key {base!r}")


def _finalize(overrides: dict) -> dict:
    defaults = PriorConfig()
    out = {}
    for key, value in overrides.items():
        if isinstance(value, dict):  # partial range override
            lo, hi = getattr(defaults, key)
            out[key] = (value.get("min", lo), value.get("max", hi))
        else:
            out[key] = value
    return out


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _int_uniform(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def _composition(rng: np.random.Generator, total: int, parts: int) -> np.ndarray:
    """Random composition of `total` into `parts` positive integers."""
    if parts == 1:
        return np.array([total], dtype=np.int64)
    weights = rng.dirichlet(np.full(parts, 2.0))
    sizes = np.ones(parts, dtype=np.int64)
    sizes += rng.multinomial(total - parts, weights)
    return sizes


def _sample_dcsbm_params(
    rng: np.random.Generator, config: PriorConfig, n: int, mean_degree: float
) -> DcsbmParams:
    """Blocks, planted-partition omega, and power-law theta for one SBM."""
    b = min(_int_uniform(rng, config.blocks_per_sbm_range), n)
    sizes = _composition(rng, n, b)
    gamma = rng.uniform(*config.degree_exponent_range)
    strength = rng.uniform(*config.sbm_strength_range)

    # classical Pareto with tail exponent gamma-1 => density ~ theta^-gamma
    theta = 1.0 + rng.pareto(gamma - 1.0, size=n)
    np.minimum(theta, THETA_CAP, out=theta)
    starts = np.zeros(b + 1, dtype=np.int64)
    np.cumsum(sizes, out=starts[1:])
    for r in range(b):
        block = theta[starts[r] : starts[r + 1]]
        theta[starts[r] : starts[r + 1]] = block / block.sum()

    pi = sizes / n
    m_total = n * mean_degree / 2.0
    omega = 2.0 * m_total * (1.0 - strength) * np.outer(pi, pi)
    omega[np.diag_indices(b)] += 2.0 * m_total * strength * pi
    return DcsbmParams(n=n, block_sizes=sizes, omega=omega, theta=theta)


def sample_prior(config: PriorConfig, seed: int) -> PriorSample:
    """Draw one PriorSample. Pure function of (config, seed)."""
    seed = int(seed) & MASK64
    rng = stream(seed, "prior")

    lo, hi = config.node_count_range
    n_total = int(round(_log_uniform(rng, lo, hi)))
    n_total = min(max(n_total, lo), hi)

    mean_degree = _log_uniform(rng, *config.mean_degree_range)
    k_first = _int_uniform(rng, config.first_level_count_range)

    ba_fraction = rng.uniform(*config.ba_fraction_range)
    # keep at least 2 nodes for the SBM stage
    ba_added = max(0, min(int(round(ba_fraction * n_total)), n_total - 2))
    n_sbm = n_total - ba_added
    k_first = min(k_first, n_sbm)

    first_sizes = _composition(rng, n_sbm, k_first)
    level_split = rng.uniform(*config.level_split_range)
    d_second = level_split * mean_degree
    d_first = (1.0 - level_split) * mean_degree

    first_params = tuple(
        _sample_dcsbm_params(rng, config, int(sz), d_first) for sz in first_sizes
    )
    second_params = _sample_dcsbm_params(rng, config, n_sbm, d_second)

    ba_params = BaParams(
        n_new=ba_added,
        zipf_a=float(rng.uniform(*config.ba_degree_zipf_range)),
        d_max=config.ba_degree_cap,
    )

    n_layers = _int_uniform(rng, config.scm_layers_range)
    hidden = _int_uniform(rng, config.scm_hidden_range)
    activations = tuple(
        config.scm_activation_set[i]
        for i in rng.integers(0, len(config.scm_activation_set), size=n_layers)
    )
    input_dim = _int_uniform(rng, config.scm_input_dim_range)
    weight_scale = _log_uniform(rng, *config.scm_weight_scale_range)
    mixing_p = float(config.mixing_grid[int(rng.integers(len(config.mixing_grid)))])
    use_lappe = bool(rng.random() < config.lappe_probability)
    lappe_k = _int_uniform(rng, config.lappe_k_range)
    noise_scale = _log_uniform(rng, *config.noise_scale_range)

    n_features = _int_uniform(rng, config.feature_count_range)
    n_features = min(n_features, n_layers * hidden - 1)

    if rng.random() < config.regression_probability:
        task = Task(kind="regression")
    else:
        n_classes = _int_uniform(rng, config.class_count_range)
        task = Task(kind="classification", n_classes=min(n_classes, n_total))

    context_fraction = float(rng.uniform(*config.context_fraction_range))

    scm_params = ScmParams(
        n_layers=n_layers,
        hidden_width=hidden,
        activations=activations,
        input_dim=input_dim,
        weight_scale=weight_scale,
        mixing_p=mixing_p,
        use_lappe=use_lappe,
        lappe_k=lappe_k,
        noise_scale=noise_scale,
    )
    return PriorSample(
        seed=seed,
        n_total=n_total,
        max_edges=config.max_edges,
        first_level_sizes=tuple(int(s) for s in first_sizes),
        second_level_params=second_params,
        first_level_params=first_params,
        ba_params=ba_params,
        scm_params=scm_params,
        mixing_p=mixing_p,
        use_lappe=use_lappe,
        lappe_k=lappe_k,
        n_features=n_features,
        task=task,
        context_fraction=context_fraction,
        mgm_fraction=config.mgm_fraction,
        noise_scale=noise_scale,
    )
