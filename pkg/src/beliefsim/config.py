"""Engine configuration.

Every tunable of the belief engine lives in one frozen dataclass so that a
scenario file (or a test) can override any subset and the rest of the code
never reaches for module-level globals.  Instances are immutable; use
``replace()`` to derive variants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from dataclasses import replace as dc_replace
from typing import Any, Mapping

# Function families available for the anchor-dependent decay modulator f(a).
DECAY_MODULATORS = ("inverse_anchor", "constant")

# Sector tags are open strings; these are the ones the engine and fixtures
# use by convention (perception, planning, narrative, reflection, affect,
# language, task, memory).
KNOWN_SECTORS = ("perc", "plan", "narr", "refl", "affect", "lang", "task", "mem")


@dataclass(frozen=True)
class ParameterConfig:
    """All engine parameters, with desk-scale defaults."""

    # --- decay / pruning -------------------------------------------------
    delta: float = 0.1            # persistence prune threshold, in (0, 1)
    lambda0: float = 0.02         # base decay rate per tick, > 0
    decay_modulator: str = "inverse_anchor"   # f(a) = 1/(1+a) | f(a) = 1

    # --- embedding -------------------------------------------------------
    embed_dim: int = 64           # token-hash cells, >= 8

    # --- memory cycle ----------------------------------------------------
    tau_retrieval: float = 0.3    # relevance score threshold, in [0, 1]
    reanchor_min: float = 5.0     # integration raises a surviving twin's anchor to at least this
    goal_marker: str = "goal:"    # prefix marking goal fragments (case-insensitive)

    # --- abstraction tower -----------------------------------------------
    eps_fix: float = 1e-6         # fixed-point tolerance for tower convergence

    # --- determinism -----------------------------------------------------
    seed: int = 0                 # drives the drift sampler

    # --- cognitive load --------------------------------------------------
    sector_costs: Mapping[str, float] = field(default_factory=dict)  # missing sector -> 1.0
    load_coeffs: tuple[float, float, float] = (0.01, 1.0, 0.1)       # (complexity, sector, rate)
    window: int = 10              # operator-rate window, ticks

    # --- effort ----------------------------------------------------------
    effort_total: float = 10.0    # per-tick budget

    # --- regulation thresholds -------------------------------------------
    tau_theta: float = 0.8        # angular deviation trigger, radians
    tau_r: float = 0.8            # residual offset trigger
    kappa_crit: float = 0.8       # coherence floor
    l_max: float = 10.0           # load ceiling
    a_core: float = 5.0           # identity-signature anchor floor

    # --- regulation policy -----------------------------------------------
    patience: int = 3             # consecutive breached ticks before escalation
    nullify_boost: float = 5.0    # extra decay span applied by accelerated nullification
    sector_priority: tuple[str, ...] = (
        "task", "plan", "refl", "narr", "mem", "lang", "affect", "perc",
    )                             # highest priority first

    # --- meta recursion --------------------------------------------------
    meta_depth_max: int = 3

    # ----------------------------------------------------------------------

    def validate(self) -> None:
        """Raise ValueError on any out-of-range parameter."""
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.lambda0 <= 0.0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0}")
        if self.decay_modulator not in DECAY_MODULATORS:
            raise ValueError(
                f"decay_modulator must be one of {DECAY_MODULATORS}, got {self.decay_modulator!r}"
            )
        if self.embed_dim < 8:
            raise ValueError(f"embed_dim must be >= 8, got {self.embed_dim}")
        if not (0.0 <= self.tau_retrieval <= 1.0):
            raise ValueError(f"tau_retrieval must lie in [0, 1], got {self.tau_retrieval}")
        if self.eps_fix <= 0.0:
            raise ValueError(f"eps_fix must be positive, got {self.eps_fix}")
        if len(self.load_coeffs) != 3:
            raise ValueError("load_coeffs must have exactly three components")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.effort_total <= 0.0:
            raise ValueError(f"effort_total must be positive, got {self.effort_total}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.nullify_boost <= 0.0:
            raise ValueError(f"nullify_boost must be positive, got {self.nullify_boost}")
        if self.meta_depth_max < 1:
            raise ValueError(f"meta_depth_max must be >= 1, got {self.meta_depth_max}")
        if not self.goal_marker:
            raise ValueError("goal_marker must be non-empty")
        for name in ("tau_theta", "tau_r", "kappa_crit", "l_max", "a_core",
                     "reanchor_min", "effort_total"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        for sector, cost in self.sector_costs.items():
            if cost < 0:
                raise ValueError(f"sector cost for {sector!r} must be >= 0, got {cost}")

    def cost(self, sector: str) -> float:
        """Per-sector activation cost; sectors without an entry cost 1.0."""
        return float(self.sector_costs.get(sector, 1.0))

    def decay_rate(self, anchor: float) -> float:
        """Effective decay rate lambda_i = lambda0 * f(anchor)."""
        if self.decay_modulator == "inverse_anchor":
            return self.lambda0 / (1.0 + anchor)
        return self.lambda0

    def replace(self, **overrides: Any) -> "ParameterConfig":
        cfg = dc_replace(self, **overrides)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["sector_costs"] = dict(self.sector_costs)
        d["load_coeffs"] = list(self.load_coeffs)
        d["sector_priority"] = list(self.sector_priority)
        return d


def default_config() -> ParameterConfig:
    cfg = ParameterConfig()
    cfg.validate()
    return cfg


def config_from_dict(data: Mapping[str, Any]) -> ParameterConfig:
    """Build a config from a plain mapping (e.g. a scenario's config block).

    Unknown keys raise ValueError so typos in scenario files fail loudly.
    """
    known = {f.name for f in ParameterConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = dict(data)
    if "load_coeffs" in kwargs:
        kwargs["load_coeffs"] = tuple(float(c) for c in kwargs["load_coeffs"])
    if "sector_priority" in kwargs:
        kwargs["sector_priority"] = tuple(str(s) for s in kwargs["sector_priority"])
    if "sector_costs" in kwargs:
        kwargs["sector_costs"] = {str(k): float(v) for k, v in kwargs["sector_costs"].items()}
    cfg = ParameterConfig(**kwargs)
    cfg.validate()
    return cfg


__all__ = [
    "DECAY_MODULATORS",
    "KNOWN_SECTORS",
    "ParameterConfig",
    "config_from_dict",
    "default_config",
]
