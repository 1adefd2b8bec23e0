"""Electrical conductivity models with certified bounds.

Every model maps temperature to conductivity and carries a certified
triple ``(c1, c2, L)``: positive lower and upper bounds and a Lipschitz
constant, fixed by construction of the family rather than estimated.
Negative inputs are evaluated as ``f(max(u, 0))``: physically the
temperature is nonnegative, and iterates only dip below zero by rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConductivityModel",
    "Constant",
    "ClampedAffine",
    "BoundedRational",
    "Table",
    "eval_f",
    "model_from_json",
]


@dataclass(frozen=True)
class ConductivityModel:
    """Base interface; families subclass and certify their constants."""

    def constants(self) -> tuple[float, float, float]:
        """Certified ``(c1, c2, L)``: bounds and Lipschitz constant."""
        raise NotImplementedError

    def _eval(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, u) -> np.ndarray:
        """Vectorized evaluation with the nonnegative clamp applied."""
        arr = np.maximum(np.asarray(u, dtype=float), 0.0)
        return self._eval(arr)

    def __call__(self, u: float) -> float:
        return float(self.apply(u))

    def to_json(self) -> dict:
        raise NotImplementedError


def eval_f(model: ConductivityModel, u: float) -> float:
    """Scalar conductivity at temperature ``u`` (clamped below at zero)."""
    return model(u)


@dataclass(frozen=True)
class Constant(ConductivityModel):
    """Temperature-independent conductivity."""

    c: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError("conductivity constant must be positive")

    def constants(self) -> tuple[float, float, float]:
        return (self.c, self.c, 0.0)

    def _eval(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(u, float(self.c))

    def to_json(self) -> dict:
        return {"family": "constant", "c": self.c}


@dataclass(frozen=True)
class ClampedAffine(ConductivityModel):
    """Affine response clamped into a positive band [lo, hi]."""

    base: float
    slope: float
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not 0 < self.lo <= self.hi:
            raise ValueError("clamp band must satisfy 0 < lo <= hi")

    def constants(self) -> tuple[float, float, float]:
        return (self.lo, self.hi, abs(self.slope))

    def _eval(self, u: np.ndarray) -> np.ndarray:
        return np.clip(self.base + self.slope * u, self.lo, self.hi)

    def to_json(self) -> dict:
        return {
            "family": "clamped_affine",
            "base": self.base,
            "slope": self.slope,
            "lo": self.lo,
            "hi": self.hi,
        }


@dataclass(frozen=True)
class BoundedRational(ConductivityModel):
    """Smooth monotone decay from ``c2`` at zero toward ``c1``.

    ``f(u) = c1 + (c2 - c1) / (1 + u / scale)``, so the bounds are the
    asymptotes and the Lipschitz constant is the slope at zero,
    ``(c2 - c1) / scale``.
    """

    c1: float
    c2: float
    scale: float

    def __post_init__(self) -> None:
        if not 0 < self.c1 <= self.c2:
            raise ValueError("bounds must satisfy 0 < c1 <= c2")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def constants(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, (self.c2 - self.c1) / self.scale)

    def _eval(self, u: np.ndarray) -> np.ndarray:
        return self.c1 + (self.c2 - self.c1) / (1.0 + u / self.scale)

    def to_json(self) -> dict:
        return {
            "family": "bounded_rational",
            "c1": self.c1,
            "c2": self.c2,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class Table(ConductivityModel):
    """Piecewise-linear interpolation of tabulated measurements.

    Inside the table the response is linear between breakpoints; beyond
    either end it continues with the boundary value, so the certified
    bounds are the extreme table values and the Lipschitz constant the
    steepest segment slope.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) != len(vals) or not bps:
            raise ValueError("table needs equally many breakpoints and values")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise ValueError("table breakpoints must be strictly increasing")
        if any(not np.isfinite(v) or v <= 0 for v in vals):
            raise ValueError("table values must be finite and positive")

    def constants(self) -> tuple[float, float, float]:
        vals = self.values
        if len(vals) == 1:
            return (vals[0], vals[0], 0.0)
        slopes = [
            abs((v1 - v0) / (b1 - b0))
            for b0, b1, v0, v1 in zip(
                self.breakpoints, self.breakpoints[1:], vals, vals[1:]
            )
        ]
        return (min(vals), max(vals), max(slopes))

    def _eval(self, u: np.ndarray) -> np.ndarray:
        return np.interp(u, self.breakpoints, self.values)

    def to_json(self) -> dict:
        return {
            "family": "table",
            "breakpoints": list(self.breakpoints),
            "values": list(self.values),
        }


def _field(data: dict, key: str, family: str):
    if key not in data:
        raise ValueError(f"conductivity field '{key}' is required for family '{family}'")
    return data[key]


_FAMILIES = {
    "constant": lambda d: Constant(c=float(_field(d, "c", "constant"))),
    "clamped_affine": lambda d: ClampedAffine(
        base=float(_field(d, "base", "clamped_affine")),
        slope=float(_field(d, "slope", "clamped_affine")),
        lo=float(_field(d, "lo", "clamped_affine")),
        hi=float(_field(d, "hi", "clamped_affine")),
    ),
    "bounded_rational": lambda d: BoundedRational(
        c1=float(_field(d, "c1", "bounded_rational")),
        c2=float(_field(d, "c2", "bounded_rational")),
        scale=float(_field(d, "scale", "bounded_rational")),
    ),
    "table": lambda d: Table(
        breakpoints=tuple(_field(d, "breakpoints", "table")),
        values=tuple(_field(d, "values", "table")),
    ),
}


def model_from_json(data: dict) -> ConductivityModel:
    """Rebuild a model from its ``to_json`` form."""
    if not isinstance(data, dict) or "family" not in data:
        raise ValueError("conductivity JSON must be an object with a 'family' field")
    family = data["family"]
    if family not in _FAMILIES:
        known = ", ".join(sorted(_FAMILIES))
        raise ValueError(f"unknown conductivity family '{family}' (known: {known})")
    try:
        return _FAMILIES[family](data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValueError) and str(exc):
            raise
        raise ValueError(f"invalid parameters for conductivity family '{family}'") from exc
