"""Experiment configuration: dataclass, file loading (TOML or JSON), and
flag overrides.  Every report embeds the full resolved config so any row can
be reproduced in isolation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import ConfigurationError

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


@dataclass
class ExperimentConfig:
    # grid
    L: int = 4
    r: int = 10
    # exponent / weight catalog descriptors
    p: str = "step:2:3:0:1"
    w: str = "exp:1"
    # wavelet system
    N: int = 3
    J: int = 0
    j_max: Optional[int] = None  # default r - 2
    r_c: int = 12
    # corpus
    seed: int = 0
    corpus_size: int = 20
    # outputs
    out: str = "out"
    plots: bool = True
    # experiment-specific knobs
    j_star: int = 0
    t_values: tuple[float, ...] = (1.0, 4.0, 16.0, 64.0, 256.0)
    kernel: str = "hilbert-cut:1"
    q: str = "2"  # "2" or "inf"
    family_size: int = 8
    trials: int = 20
    maximal_Ls: tuple[int, ...] = (4, 6, 8)
    aploc_stride: int = 1
    f: str = "gauss:1:0"  # function descriptor for the norm subcommand
    check_refinement: bool = False

    def resolved_j_max(self) -> int:
        return self.r - 2 if self.j_max is None else self.j_max

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["t_values"] = list(self.t_values)
        d["maximal_Ls"] = list(self.maximal_Ls)
        return d


def load_config(path: Optional[str] = None, **overrides) -> ExperimentConfig:
    """Config from an optional TOML/JSON file plus keyword overrides
    (higher precedence).  Unknown file keys are rejected."""
    data: dict = {}
    if path is not None:
        text = Path(path).read_bytes()
        if path.endswith(".json"):
            data = json.loads(text)
        else:
            data = tomllib.loads(text.decode())
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    bad = set(data) - known
    if bad:
        raise ConfigurationError(f"unknown config keys: {sorted(bad)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("t_values", "maximal_Ls"):
        if key in data and not isinstance(data[key], tuple):
            data[key] = tuple(data[key])
    return ExperimentConfig(**data)
