"""Experiment configuration documents (strict JSON schema).

Keys: function, point, sigma, n, seed, truncation_l, coordinates,
ball_radius, outputs.  sigma and n accept either a single value or a
non-empty strictly increasing sweep list; coordinates is "all" or a list of
1-based coordinate numbers; outputs lists report formats.  Unknown keys are
an error, so a config that parses is fully understood.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

_KNOWN_KEYS = {
    "function",
    "point",
    "sigma",
    "n",
    "seed",
    "truncation_l",
    "coordinates",
    "ball_radius",
    "outputs",
}

_FORMATS = ("json", "csv")
_MAX_SEED = 1 << 64

#: documented default operating point: 50 samples of deviation-0.025 noise
DEFAULT_SIGMA = 0.025
DEFAULT_N = 50


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


@dataclass(frozen=True)
class ExperimentConfig:
    function: str
    point: tuple[float, ...]
    sigma: tuple[float, ...]
    n: tuple[int, ...]
    seed: int
    truncation_l: int
    coordinates: tuple[int, ...] | None  # 1-based; None means all
    ball_radius: float
    outputs: tuple[str, ...]
    sigma_swept: bool
    n_swept: bool

    @property
    def dimension(self) -> int:
        return len(self.point)

    def coordinate_indices(self) -> list[int]:
        """Resolved 0-based coordinate indices."""
        if self.coordinates is None:
            return list(range(self.dimension))
        return [c - 1 for c in self.coordinates]

    def as_dict(self) -> dict:
        """Canonical echo of the configuration (embedded in every report)."""
        return {
            "function": self.function,
            "point": list(self.point),
            "sigma": list(self.sigma) if self.sigma_swept else self.sigma[0],
            "n": list(self.n) if self.n_swept else self.n[0],
            "seed": self.seed,
            "truncation_l": self.truncation_l,
            "coordinates": "all" if self.coordinates is None else list(self.coordinates),
            "ball_radius": self.ball_radius,
            "outputs": list(self.outputs),
        }


def _sweepable(raw, name, validate, kind) -> tuple[tuple, bool]:
    if isinstance(raw, list):
        if not raw:
            raise ConfigError(f"{name} sweep list must be non-empty")
        values = tuple(validate(v, name) for v in raw)
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError(f"{name} sweep list must be strictly increasing")
        return values, True
    return (validate(raw, name),), False


def _validate_sigma(v, name) -> float:
    if not _is_number(v) or v < 0:
        raise ConfigError(f"{name} must be a finite number >= 0, got {v!r}")
    return float(v)


def _validate_n(v, name) -> int:
    if not _is_int(v) or v < 1:
        raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
    return v


def from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    if "function" not in doc or not isinstance(doc["function"], str) or not doc["function"].strip():
        raise ConfigError("config requires a non-empty 'function' string")
    if "point" not in doc:
        raise ConfigError("config requires a 'point' array")
    point_raw = doc["point"]
    if not isinstance(point_raw, list) or not point_raw or not all(_is_number(v) for v in point_raw):
        raise ConfigError("'point' must be a non-empty array of finite numbers")
    point = tuple(float(v) for v in point_raw)

    sigma, sigma_swept = _sweepable(doc.get("sigma", DEFAULT_SIGMA), "sigma", _validate_sigma, float)
    n, n_swept = _sweepable(doc.get("n", DEFAULT_N), "n", _validate_n, int)

    seed = doc.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed < _MAX_SEED:
        raise ConfigError(f"'seed' must be a 64-bit unsigned integer, got {seed!r}")

    truncation_l = doc.get("truncation_l", 6)
    if not _is_int(truncation_l) or truncation_l < 2 or truncation_l % 2:
        raise ConfigError(f"'truncation_l' must be an even integer >= 2, got {truncation_l!r}")

    coords_raw = doc.get("coordinates", "all")
    if coords_raw == "all":
        coordinates = None
    elif isinstance(coords_raw, list) and coords_raw:
        if not all(_is_int(c) and 1 <= c <= len(point) for c in coords_raw):
            raise ConfigError(
                f"'coordinates' entries must be integers in [1, {len(point)}], got {coords_raw!r}"
            )
        if len(set(coords_raw)) != len(coords_raw):
            raise ConfigError("'coordinates' entries must be distinct")
        coordinates = tuple(coords_raw)
    else:
        raise ConfigError(f"'coordinates' must be \"all\" or a non-empty array, got {coords_raw!r}")

    ball_radius = doc.get("ball_radius", 1.0)
    if not _is_number(ball_radius) or ball_radius <= 0:
        raise ConfigError(f"'ball_radius' must be a positive number, got {ball_radius!r}")

    outputs_raw = doc.get("outputs", ["json"])
    if (
        not isinstance(outputs_raw, list)
        or not outputs_raw
        or not all(isinstance(o, str) and o in _FORMATS for o in outputs_raw)
    ):
        raise ConfigError(f"'outputs' must be a non-empty array drawn from {_FORMATS}")

    return ExperimentConfig(
        function=doc["function"],
        point=point,
        sigma=sigma,
        n=n,
        seed=seed,
        truncation_l=truncation_l,
        coordinates=coordinates,
        ball_radius=float(ball_radius),
        outputs=tuple(outputs_raw),
        sigma_swept=sigma_swept,
        n_swept=n_swept,
    )


def from_file(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return from_dict(doc)
