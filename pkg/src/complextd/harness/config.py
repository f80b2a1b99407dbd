"""Experiment configuration in a ``key = value`` text format.

Lines starting with ``#`` are comments.  Keys left out take the defaults of
the chosen experiment, which reproduce the two published setups:

=====================  ===========  ===========  =========
key                    checkered    wavy         custom
=====================  ===========  ===========  =========
frequencies            114          64           64
amplitude              1.0          0.9          0.9
step_size              0.05         0.1 (*)      0.05
episodes               250          0            0
steps                  0            15000        10000
runs                   100          1            1
=====================  ===========  ===========  =========

(*) for ``wavy`` the step size is divided by the number of active features.

Shared keys: ``seed`` (0), ``parity`` (odd), ``bump_reward`` (own),
``reconstruction_length`` (38), ``max_episode_steps`` (10000),
``tile_offset_shift`` (0.0), ``start_state`` (0, custom only),
``model_file`` (custom only), ``output_dir`` (results).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

EXPERIMENTS = ("checkered", "wavy", "custom")

_PER_EXPERIMENT = {
    "checkered": dict(frequencies=114, amplitude=1.0, step_size=0.05, episodes=250, steps=0, runs=100),
    "wavy": dict(frequencies=64, amplitude=0.9, step_size=0.1, episodes=0, steps=15000, runs=1),
    "custom": dict(frequencies=64, amplitude=0.9, step_size=0.05, episodes=0, steps=10000, runs=1),
}


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{k}: {msg}" for k, msg in self.problems))

    @property
    def fields(self):
        return [k for k, _ in self.problems]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "checkered"
    frequencies: int = 114
    amplitude: float = 1.0
    step_size: float = 0.05
    episodes: int = 250
    steps: int = 0
    runs: int = 100
    seed: int = 0
    parity: str = "odd"
    bump_reward: str = "own"
    reconstruction_length: int = 38
    max_episode_steps: int = 10_000
    tile_offset_shift: float = 0.0
    start_state: int = 0
    model_file: str = ""
    output_dir: str = "results"

    @classmethod
    def defaults(cls, experiment: str) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError([("experiment", f"must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}")])
        return cls(experiment=experiment, **_PER_EXPERIMENT[experiment])

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "ExperimentConfig":
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(("experiment", f"must be one of {', '.join(EXPERIMENTS)}"))
        if self.frequencies < 1:
            problems.append(("frequencies", "must be at least 1"))
        if not 0.0 <= self.amplitude <= 1.0:
            problems.append(("amplitude", "must lie in [0, 1]"))
        if self.experiment == "wavy" and self.amplitude >= 1.0:
            problems.append(("amplitude", "continuing task needs amplitude < 1"))
        if not 0.0 < self.step_size <= 1.0:
            problems.append(("step_size", "must lie in (0, 1]"))
        for key in ("episodes", "steps", "seed"):
            if getattr(self, key) < 0:
                problems.append((key, "must be nonnegative"))
        if self.runs < 1:
            problems.append(("runs", "must be at least 1"))
        if self.parity not in ("even", "odd"):
            problems.append(("parity", "must be 'even' or 'odd'"))
        if self.bump_reward not in ("own", "zero"):
            problems.append(("bump_reward", "must be 'own' or 'zero'"))
        if self.max_episode_steps < 1:
            problems.append(("max_episode_steps", "must be at least 1"))
        if self.experiment == "checkered":
            n = self.reconstruction_length
            if n < 1 or self.frequencies % n:
                problems.append(("reconstruction_length", f"must divide frequencies ({self.frequencies})"))
        if self.experiment == "custom" and not self.model_file:
            problems.append(("model_file", "required for the custom experiment"))
        if problems:
            raise ConfigError(problems)
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {value!r}" if isinstance(value, float) else f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key, raw):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError([(key, f"cannot parse {raw!r} as {kind}")]) from None
    return raw


def parse_assignments(lines, source="<config>") -> dict:
    values = {}
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError([(f"{source}:{lineno}", f"expected 'key = value', got {line.strip()!r}")])
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in _TYPES:
            raise ConfigError([(key, "unknown key")])
        values[key] = raw
    return values


def build_config(values: dict, experiment=None) -> ExperimentConfig:
    """Config for ``experiment`` (or ``values['experiment']``) with ``values`` applied."""
    experiment = experiment or values.get("experiment", "checkered")
    if "experiment" in values and values["experiment"] != experiment:
        raise ConfigError([("experiment", f"file says {values['experiment']!r}, command needs {experiment!r}")])
    base = ExperimentConfig.defaults(experiment)
    changes = {k: _coerce(k, v) for k, v in values.items() if k != "experiment"}
    return base.replace(**changes).validate()


def parse_config(text: str, experiment=None) -> ExperimentConfig:
    return build_config(parse_assignments(text.splitlines()), experiment)


def load_config(path, experiment=None) -> ExperimentConfig:
    with open(path) as fh:
        return build_config(parse_assignments(fh, str(path)), experiment)
