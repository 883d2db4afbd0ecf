"""Hyperparameter search-space definition, unit-cube coding, and features.

A space is an ordered list of parameter definitions.  Three codings are
used throughout the package:

* **unit coordinates** — one float in [0, 1] per parameter, the coding the
  Sobol sampler produces;
* **values** — a name -> native value mapping (float, int, or category);
* **features** — the model-facing vector: numeric parameters as their unit
  coordinate, categorical parameters expanded one-hot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .sobol import sobol_points

__all__ = ["ParamDef", "SearchSpace"]

_KINDS = ("continuous", "discrete", "categorical")
_SCALES = ("linear", "log")


@dataclass(frozen=True)
class ParamDef:
    """One tunable parameter.

    Numeric kinds carry ``bounds==(lo, hi)``; categorical carries the
    ``values`` tuple.  ``scale="log"`` is accepted for continuous
    parameters with lo > 0 only: the decode contract defines no
    discrete-log mapping.
    """

    name: str
    kind: str
    bounds: tuple[float, float] | None = None
    values: tuple[Any, ...] | None = None
    scale: str = "linear"

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("parameter name must be non-empty")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown parameter kind {self.kind!r}")
        if self.scale not in _SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.kind == "categorical":
            if not self.values:
                raise ValueError(f"{self.name}: categorical needs a non-empty value list")
            object.__setattr__(self, "values", tuple(self.values))
            if len(set(self.values)) != len(self.values):
                raise ValueError(f"{self.name}: categorical values must be unique")
            if self.bounds is not None:
                raise ValueError(f"{self.name}: categorical takes values, not bounds")
            if self.scale != "linear":
                raise ValueError(f"{self.name}: scale does not apply to categorical")
            return
        if self.bounds is None:
            raise ValueError(f"{self.name}: numeric parameter needs bounds")
        lo, hi = self.bounds
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"{self.name}: bounds must be finite")
        if not lo < hi:
            raise ValueError(f"{self.name}: bounds must satisfy lo < hi, got {self.bounds}")
        if self.kind == "discrete":
            if int(lo) != lo or int(hi) != hi:
                raise ValueError(f"{self.name}: discrete bounds must be integers")
            if self.scale == "log":
                raise ValueError(f"{self.name}: log scale is only supported for continuous")
            object.__setattr__(self, "bounds", (int(lo), int(hi)))
        else:
            object.__setattr__(self, "bounds", (float(lo), float(hi)))
        if self.scale == "log" and lo <= 0:
            raise ValueError(f"{self.name}: log scale requires lo > 0")

    # number of feature slots this parameter occupies
    @property
    def width(self) -> int:
        return len(self.values) if self.kind == "categorical" else 1

    def decode(self, u: float) -> Any:
        """Native value for unit coordinate ``u`` in [0, 1]."""
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"{self.name}: unit coordinate {u} outside [0, 1]")
        if self.kind == "continuous":
            lo, hi = self.bounds
            if self.scale == "log":
                v = math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))
            else:
                v = lo + u * (hi - lo)
            # exp/log round trips can overshoot a bound by one ulp
            return min(max(v, lo), hi)
        if self.kind == "discrete":
            lo, hi = self.bounds
            return min(int(lo + math.floor(u * (hi - lo + 1))), hi)
        idx = min(int(math.floor(u * len(self.values))), len(self.values) - 1)
        return self.values[idx]

    def to_unit(self, value: Any) -> float:
        """Unit coordinate for a native value (inverse of :meth:`decode`).

        Discrete and categorical values map to their bucket midpoint so the
        round trip through :meth:`decode` is exact.
        """
        if self.kind == "continuous":
            lo, hi = self.bounds
            v = float(value)
            if not lo <= v <= hi:
                raise ValueError(f"{self.name}: value {value} outside bounds {self.bounds}")
            if self.scale == "log":
                return (math.log(v) - math.log(lo)) / (math.log(hi) - math.log(lo))
            return (v - lo) / (hi - lo)
        if self.kind == "discrete":
            lo, hi = self.bounds
            v = int(value)
            if v != value or not lo <= v <= hi:
                raise ValueError(f"{self.name}: value {value} outside bounds {self.bounds}")
            return (v - lo + 0.5) / (hi - lo + 1)
        try:
            idx = self.values.index(value)
        except ValueError:
            raise ValueError(f"{self.name}: {value!r} not among categories {self.values}") from None
        return (idx + 0.5) / len(self.values)

    def to_json_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind == "categorical":
            d["values"] = list(self.values)
        else:
            d["range"] = list(self.bounds)
            d["scale"] = self.scale
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping[str, Any]) -> "ParamDef":
        if "values" in d:
            return cls(name=d["name"], kind=d.get("kind", "categorical"), values=tuple(d["values"]))
        lo, hi = d["range"]
        return cls(
            name=d["name"],
            kind=d.get("kind", "continuous"),
            bounds=(lo, hi),
            scale=d.get("scale", "linear"),
        )


class SearchSpace:
    """Ordered collection of :class:`ParamDef` with the three codings."""

    def __init__(self, params: Iterable[ParamDef]):
        self.params: tuple[ParamDef, ...] = tuple(params)
        if not self.params:
            raise ValueError("search space needs at least one parameter")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names in space")

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def feature_dim(self) -> int:
        return sum(p.width for p in self.params)

    def decode(self, u: Sequence[float]) -> dict[str, Any]:
        """Native values for one unit-coordinate vector."""
        if len(u) != self.dim:
            raise ValueError(f"expected {self.dim} unit coordinates, got {len(u)}")
        return {p.name: p.decode(float(ui)) for p, ui in zip(self.params, u)}

    def to_unit(self, values: Mapping[str, Any]) -> np.ndarray:
        """Unit-coordinate vector for a value mapping."""
        self._check_names(values)
        return np.array([p.to_unit(values[p.name]) for p in self.params])

    def encode(self, values: Mapping[str, Any]) -> np.ndarray:
        """Model-facing feature vector: unit coords, categoricals one-hot."""
        self._check_names(values)
        out = np.zeros(self.feature_dim)
        pos = 0
        for p in self.params:
            if p.kind == "categorical":
                out[pos + p.values.index(values[p.name])] = 1.0
                pos += p.width
            else:
                out[pos] = p.to_unit(values[p.name])
                pos += 1
        return out

    def sobol_unit(self, n: int, skip: int = 1) -> np.ndarray:
        """(n, dim) unit-coordinate design from the Sobol sequence."""
        return sobol_points(self.dim, n, skip=skip)

    def sobol_configs(self, n: int, skip: int = 1) -> list[dict[str, Any]]:
        """Decoded Sobol design, one value mapping per row."""
        return [self.decode(row) for row in self.sobol_unit(n, skip=skip)]

    def to_json_list(self) -> list[dict]:
        return [p.to_json_dict() for p in self.params]

    @classmethod
    def from_json_list(cls, items: Sequence[Mapping[str, Any]]) -> "SearchSpace":
        return cls(ParamDef.from_json_dict(d) for d in items)

    def _check_names(self, values: Mapping[str, Any]) -> None:
        expected = {p.name for p in self.params}
        got = set(values)
        if got != expected:
            missing = expected - got
            unknown = got - expected
            parts = []
            if missing:
                parts.append(f"missing {sorted(missing)}")
            if unknown:
                parts.append(f"unknown {sorted(unknown)}")
            raise ValueError("value mapping does not match space: " + ", ".join(parts))

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        inner = ", ".join(p.name for p in self.params)
        return f"SearchSpace({inner})"
