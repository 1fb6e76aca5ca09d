"""Experiment configuration: world hyperparameters, algorithm parameters, seeds.

Distribution parameters follow the Normal(mean, variance) convention, so
e.g. ``var_g = 10`` means a genre standard deviation of sqrt(10) ~ 3.162.

Config files are flat ``key = value`` text (``#`` comments, blank lines
allowed).  Keys are the field names below in lower_snake_case; unspecified
keys keep their defaults.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import ConfigError

#: Number of decimal significant digits used everywhere floats are serialized.
#: 17 digits round-trip IEEE doubles exactly, keeping outputs byte-auditable.
FLOAT_DIGITS = 17


def fmt_float(x: float) -> str:
    """Serialize a float with full round-trip precision (nan stays 'nan')."""
    return f"{x:.{FLOAT_DIGITS}g}"


@dataclass
class ExperimentConfig:
    """All knobs for one experiment.

    Defaults are the full-scale values; ``desk_config()`` returns the smaller
    profile used by the acceptance sweep.
    """

    m: int = 1000                 # number of users
    k_init: int = 10              # items present at round 0
    k_new: int = 5                # items spawned each round
    T: int = 100                  # number of rounds
    k_train: int = 10             # parallel training worlds
    mu_q: float = 100.0           # quality distribution mean
    var_q: float = 10.0           # quality distribution variance
    var_g: float = 10.0           # item genre variance (mean 0)
    var_u: float = 10.0           # user preference variance (mean 0)
    var_ps: float = 10.0          # private quality-signal noise variance
    var_gs: float = 10.0          # private genre-signal noise variance
    delta_skew: float = 1.0       # skew exponent for the top-pick recommender
    k_top_pct: float = 25.0       # top fraction (percent) for the top-pick recommender
    genre_bin_width: float = 1.0  # genre discretization width for the binned recommender
    svd_rank: int = 16            # truncated-SVD rank (clamped to matrix rank)
    n_runs: int = 15              # seeds per algorithm
    master_seed: int = 12345      # root of all randomness

    @property
    def n_items(self) -> int:
        """Total items existing after the final round."""
        return self.k_init + self.T * self.k_new

    def validate(self) -> "ExperimentConfig":
        """Raise ConfigError naming the offending field if any invariant fails."""
        def check(ok: bool, field: str, msg: str) -> None:
            if not ok:
                raise ConfigError(msg, field=field)

        check(self.m >= 1, "m", f"user count must be >= 1, got {self.m}")
        check(self.k_init >= 1, "k_init", f"initial item count must be >= 1, got {self.k_init}")
        check(self.k_new >= 0, "k_new", f"items per round must be >= 0, got {self.k_new}")
        check(self.T >= 1, "t", f"round count must be >= 1, got {self.T}")
        check(self.k_train >= 1, "k_train", f"training world count must be >= 1, got {self.k_train}")
        check(
            self.n_items >= self.T,
            "k_init",
            f"k_init + T*k_new = {self.n_items} < T = {self.T}: "
            "users would run out of fresh items",
        )
        for field in ("var_q", "var_g", "var_u", "var_ps", "var_gs"):
            v = getattr(self, field)
            check(v > 0, field, f"variance must be > 0, got {v}")
        check(0 < self.k_top_pct <= 100, "k_top_pct",
              f"top-pick percentage must be in (0, 100], got {self.k_top_pct}")
        check(self.genre_bin_width > 0, "genre_bin_width",
              f"bin width must be > 0, got {self.genre_bin_width}")
        check(self.svd_rank >= 1, "svd_rank", f"rank must be >= 1, got {self.svd_rank}")
        check(self.n_runs >= 1, "n_runs", f"run count must be >= 1, got {self.n_runs}")
        check(0 <= self.master_seed < 2**64, "master_seed",
              f"seed must fit in 64 bits, got {self.master_seed}")
        for field in ("mu_q", "delta_skew"):
            check(math.isfinite(getattr(self, field)), field, "must be finite")
        return self


def default_config() -> ExperimentConfig:
    """Full-scale defaults (m=1000, T=100, 15 runs)."""
    return ExperimentConfig()


def desk_config() -> ExperimentConfig:
    """Reduced profile sized so the whole acceptance sweep runs in minutes."""
    return ExperimentConfig(m=300, T=60, k_init=10, k_new=5, k_train=5, n_runs=8)


# Config-file keys are the field names in lower_snake_case; the round-count
# field T therefore maps to the key "t".
_KEY_TO_FIELD = {
    ("t" if f.name == "T" else f.name): f.name
    for f in dataclasses.fields(ExperimentConfig)
}
_INT_FIELDS = {
    f.name for f in dataclasses.fields(ExperimentConfig) if f.type == "int"
}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse ``key = value`` lines into a config; unknown keys are errors."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"unknown key {key!r}", field=key, line=lineno)
        field = _KEY_TO_FIELD[key]
        if field in values:
            raise ConfigError("duplicate key", field=key, line=lineno)
        try:
            if field in _INT_FIELDS:
                values[field] = int(val)
            else:
                values[field] = float(val)
        except ValueError:
            raise ConfigError(f"cannot parse value {val!r}", field=key, line=lineno) from None
    return ExperimentConfig(**values).validate()


def parse_config(path) -> ExperimentConfig:
    """Read a config file; unspecified keys take the full-scale defaults."""
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


def serialize_config(config: ExperimentConfig) -> str:
    """Render a config as parseable ``key = value`` text (full precision)."""
    lines = []
    for f in dataclasses.fields(ExperimentConfig):
        key = "t" if f.name == "T" else f.name
        val = getattr(config, f.name)
        lines.append(f"{key} = {val if f.name in _INT_FIELDS else fmt_float(val)}")
    return "\n".join(lines) + "\n"


def config_to_dict(config: ExperimentConfig) -> dict:
    """Plain dict snapshot (for the run manifest)."""
    return dataclasses.asdict(config)
