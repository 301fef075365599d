"""
FermiBalance – Scenario files
==============================
Loads a JSON scenario, validates it, and builds the Fock space, entangled
state and mixture dynamics it describes.

Example::

    {
      "lattice": [1, 2, 3, 4],
      "I": [1, 2],
      "iota": {"1": 3, "2": 4},
      "probs": {"": "0.25", "1": "0.25", "2": "0.25", "1,2": "0.25"},
      "basis_cycle": [[], [1], [1, 2], [2]],
      "lambda": 0.5
    }
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Mapping, Optional, Tuple

from core.dynamics import (
    LatticePermutation,
    MixtureDynamics,
    Semigroup,
    basis_cycle_unitary,
    make_permutation,
    mix_map,
    permutation_unitary,
)
from core.fock import FockSpace, make_lattice
from core.states import EntangledState, entangled_vector, make_config, make_probability_table

log = logging.getLogger(__name__)

_REQUIRED = ("lattice", "I", "iota", "probs", "lambda")
_OPTIONAL = ("sigma", "basis_cycle", "t_grid", "tolerance", "duality", "name")

Subset = Tuple[int, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    lattice: Tuple[int, ...]
    support: Subset
    iota: Dict[int, int]
    probs: Dict[Subset, float]
    weight: float
    sigma: Optional[Tuple[Subset, ...]] = None
    basis_cycle: Optional[Tuple[Subset, ...]] = None
    t_grid: Tuple[float, ...] = ()
    tolerance: Optional[float] = None
    duality: bool = False
    name: str = ""

    def echo(self) -> Dict[str, Any]:
        """JSON-ready copy of the scenario, in a fixed key and subset order."""
        data: Dict[str, Any] = {
            "name": self.name,
            "lattice": list(self.lattice),
            "I": list(self.support),
            "iota": {str(k): v for k, v in sorted(self.iota.items())},
            "probs": [[list(m), p] for m, p in sorted(self.probs.items(), key=lambda kv: (len(kv[0]), kv[0]))],
            "lambda": self.weight,
            "t_grid": list(self.t_grid),
            "duality": self.duality,
        }
        if self.sigma is not None:
            data["sigma"] = [list(c) for c in self.sigma]
        if self.basis_cycle is not None:
            data["basis_cycle"] = [list(s) for s in self.basis_cycle]
        if self.tolerance is not None:
            data["tolerance"] = self.tolerance
        return data


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _labels(value: Any, what: str) -> Tuple[int, ...]:
    if not isinstance(value, (list, tuple)):
        raise ValueError(f"{what} must be a list of integer labels, got {value!r}")
    labels = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, int):
            raise ValueError(f"{what} contains a non-integer label: {item!r}")
        labels.append(item)
    return tuple(labels)


def _probability(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ValueError(f"Probability must be a number or decimal string, got {value!r}")
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"Probability {value!r} is not a decimal number") from None


def _parse_iota(value: Any) -> Dict[int, int]:
    if isinstance(value, Mapping):
        pairs = []
        for key, target in value.items():
            try:
                pairs.append((int(key), target))
            except ValueError:
                raise ValueError(f"iota key {key!r} is not an integer label") from None
    elif isinstance(value, list):
        pairs = []
        for pair in value:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValueError(f"iota entries must be [from, to] pairs, got {pair!r}")
            pairs.append(tuple(pair))
    else:
        raise ValueError(f"iota must be an object or a list of pairs, got {value!r}")
    mapping: Dict[int, int] = {}
    for source, target in pairs:
        (source,) = _labels([source], "iota")
        (target,) = _labels([target], "iota")
        if source in mapping:
            raise ValueError(f"iota assigns label {source} twice")
        mapping[source] = target
    return mapping


def _parse_probs(value: Any) -> Dict[Subset, float]:
    if isinstance(value, Mapping):
        entries = []
        for key, p in value.items():
            parts = [part.strip() for part in str(key).split(",") if part.strip()]
            try:
                entries.append((tuple(int(part) for part in parts), p))
            except ValueError:
                raise ValueError(f"probs key {key!r} is not a comma-separated label list") from None
    elif isinstance(value, list):
        entries = []
        for entry in value:
            if not isinstance(entry, list) or len(entry) != 2:
                raise ValueError(f"probs entries must be [subset, probability] pairs, got {entry!r}")
            entries.append((_labels(entry[0], "probs subset"), entry[1]))
    else:
        raise ValueError(f"probs must be an object or a list of pairs, got {value!r}")
    probs: Dict[Subset, float] = {}
    for subset, p in entries:
        key = tuple(sorted(subset))
        if key in probs:
            raise ValueError(f"probs lists subset {list(key)} twice")
        probs[key] = _probability(p)
    return probs


def _parse_cycles(value: Any, what: str) -> Tuple[Subset, ...]:
    if not isinstance(value, list) or not value:
        raise ValueError(f"{what} must be a non-empty list")
    return tuple(_labels(item, what) for item in value)


def parse_scenario(data: Any, *, name: str = "") -> ScenarioConfig:
    """Validate the structure of a decoded scenario document.

    Raises
    ------
    ValueError
        Missing or unknown keys, malformed values, or both / neither of
        ``sigma`` and ``basis_cycle``.
    """
    if not isinstance(data, Mapping):
        raise ValueError("Scenario must be a JSON object")
    missing = [key for key in _REQUIRED if key not in data]
    if missing:
        raise ValueError(f"Scenario is missing required keys: {missing}")
    unknown = sorted(set(data) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise ValueError(f"Scenario has unknown keys: {unknown}")
    if ("sigma" in data) == ("basis_cycle" in data):
        raise ValueError("Scenario needs exactly one of 'sigma' or 'basis_cycle'")

    weight = data["lambda"]
    if isinstance(weight, bool) or not isinstance(weight, (int, float)):
        raise ValueError(f"lambda must be a number, got {weight!r}")

    t_grid = data.get("t_grid", [])
    if not isinstance(t_grid, list) or any(isinstance(t, bool) or not isinstance(t, (int, float)) for t in t_grid):
        raise ValueError(f"t_grid must be a list of numbers, got {t_grid!r}")
    if any(t < 0 for t in t_grid):
        raise ValueError(f"t_grid must be non-negative, got {t_grid}")

    tolerance = data.get("tolerance")
    if tolerance is not None and (isinstance(tolerance, bool) or not isinstance(tolerance, (int, float)) or tolerance <= 0):
        raise ValueError(f"tolerance must be a positive number, got {tolerance!r}")

    duality = data.get("duality", False)
    if not isinstance(duality, bool):
        raise ValueError(f"duality must be true or false, got {duality!r}")

    return ScenarioConfig(
        lattice=_labels(data["lattice"], "lattice"),
        support=_labels(data["I"], "I"),
        iota=_parse_iota(data["iota"]),
        probs=_parse_probs(data["probs"]),
        weight=float(weight),
        sigma=_parse_cycles(data["sigma"], "sigma") if "sigma" in data else None,
        basis_cycle=_parse_cycles(data["basis_cycle"], "basis_cycle") if "basis_cycle" in data else None,
        t_grid=tuple(float(t) for t in t_grid),
        tolerance=None if tolerance is None else float(tolerance),
        duality=duality,
        name=str(data.get("name", name)),
    )


def load_scenario(path: str) -> ScenarioConfig:
    """Read and validate a scenario file.

    Raises
    ------
    FileNotFoundError
        *path* does not exist.
    ValueError
        The file is not valid JSON or fails validation.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Scenario file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    name = os.path.splitext(os.path.basename(path))[0]
    log.info("Loaded scenario %s from %s", name, path)
    return parse_scenario(data, name=name)


# ---------------------------------------------------------------------------
# Building
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scenario:
    config: ScenarioConfig
    space: FockSpace
    state: EntangledState
    dynamics: MixtureDynamics
    sigma: Optional[LatticePermutation] = None

    @cached_property
    def semigroup(self) -> Semigroup:
        return Semigroup.from_map(self.dynamics.as_map)


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Construct every object the scenario describes; raises ``ValueError`` on inconsistencies."""
    space = FockSpace(make_lattice(config.lattice))
    table = make_probability_table(config.support, config.probs)
    state = entangled_vector(make_config(space, config.support, config.iota, table))
    algebra = state.config.algebra

    sigma: Optional[LatticePermutation] = None
    if config.sigma is not None:
        sigma = make_permutation(space.lattice, config.support, config.sigma)
        unitary = permutation_unitary(space, sigma)
    else:
        unitary = basis_cycle_unitary(algebra, config.basis_cycle)
    dynamics = mix_map(algebra, unitary, config.weight)
    return Scenario(config, space, state, dynamics, sigma)

