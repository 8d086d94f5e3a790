"""Value types shared across the package: Verblunsky sequences, arcs on the
unit circle and gauge transforms.

All objects are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

# Coefficients closer than this to the unit circle are rejected.
ALPHA_LIMIT = 1.0 - 1e-12
UNIMODULAR_TOL = 1e-14
# angles this close to an arc end are treated as the end itself
ENDPOINT_TOL = 1e-12


class CMVError(Exception):
    """Base class for errors raised by cmvkit."""


class DomainError(CMVError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OutOfRangeError(CMVError, IndexError):
    """A coefficient was requested outside the stored range of a sequence."""


class NumericalError(CMVError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


def canonical_angle(theta):
    """Reduce angles to [0, 2*pi)."""
    t = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    t = np.where(t >= TWO_PI, 0.0, t)
    return float(t) if t.ndim == 0 else t


def rho(alpha):
    """sqrt(1 - |alpha|^2), written to keep accuracy when |alpha| is near 1."""
    a = np.abs(alpha)
    return np.sqrt(np.maximum((1.0 - a) * (1.0 + a), 0.0))


def _as_unimodular(value, name):
    value = complex(value)
    if abs(abs(value) - 1.0) > UNIMODULAR_TOL:
        raise DomainError(f"{name} must be unimodular, got |{name}| = {abs(value)!r}")
    return value / abs(value)


def _check_disk(values, what="coefficient"):
    values = np.asarray(values, dtype=complex)
    if values.size and np.max(np.abs(values)) >= ALPHA_LIMIT:
        raise DomainError(f"{what} must satisfy |alpha| < 1 - 1e-12")
    return values


def _unit_power(g: complex, ks: np.ndarray) -> np.ndarray:
    # exp(i k arg g) avoids error accumulation of repeated products
    return np.exp(1j * np.angle(g) * ks)


class VerblunskySequence:
    """A doubly infinite (or windowed) sequence of Verblunsky coefficients.

    Subclasses implement ``_values`` for an integer array of indices.
    """

    kind = "abstract"

    def _values(self, ks: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def window(self, k_lo: int, k_hi: int) -> np.ndarray:
        """Coefficients alpha_k for k in [k_lo, k_hi] (inclusive)."""
        if k_lo > k_hi:
            raise DomainError(f"empty window [{k_lo}, {k_hi}]")
        return self._values(np.arange(k_lo, k_hi + 1))

    def at(self, ks) -> np.ndarray:
        """Coefficients at an arbitrary array of indices."""
        return self._values(np.asarray(ks, dtype=np.int64))

    def alpha(self, k: int) -> complex:
        return complex(self._values(np.array([k]))[0])

    def rho(self, k: int) -> float:
        return float(rho(self.alpha(k)))

    def a(self, k: int) -> complex:
        return 1.0 + self.alpha(k)

    def b(self, k: int) -> complex:
        return 1.0 - self.alpha(k)

    @property
    def index_range(self) -> tuple[float, float]:
        """Inclusive range of indices at which the sequence is defined."""
        return (-math.inf, math.inf)

    def to_json(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


def _cpair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _from_cpair(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise DomainError(f"complex numbers are encoded as [re, im], got {v!r}")


@dataclass(frozen=True, eq=False)
class Explicit(VerblunskySequence):
    """A finite window of coefficients; ``values[0]`` sits at index ``offset``."""

    values: np.ndarray
    offset: int = 0
    kind = "explicit"

    def __post_init__(self):
        vals = np.array(_check_disk(self.values), copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def index_range(self):
        return (self.offset, self.offset + len(self.values) - 1)

    def _values(self, ks):
        lo, hi = self.index_range
        if ks.size and (ks.min() < lo or ks.max() > hi):
            raise OutOfRangeError(
                f"indices [{ks.min()}, {ks.max()}] outside stored range [{lo}, {hi}]")
        return self.values[ks - self.offset].copy()

    def to_json(self):
        return {"type": "explicit", "offset": self.offset,
                "values": [_cpair(v) for v in self.values]}


@dataclass(frozen=True, eq=False)
class Periodic(VerblunskySequence):
    """alpha_k = cycle[k mod period]."""

    cycle: np.ndarray
    kind = "periodic"

    def __post_init__(self):
        cyc = _check_disk(self.cycle)
        if cyc.ndim != 1 or cyc.size == 0:
            raise DomainError("periodic cycle must be a non-empty 1-d sequence")
        cyc.setflags(write=False)
        object.__setattr__(self, "cycle", cyc)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def _values(self, ks):
        return self.cycle[np.mod(ks, self.period)].copy()

    def to_json(self):
        return {"type": "periodic", "cycle": [_cpair(v) for v in self.cycle]}


@dataclass(frozen=True, eq=False)
class Geometric(VerblunskySequence):
    """alpha_k = alpha0 * g**k with |g| = 1."""

    alpha0: complex
    g: complex
    kind = "geometric"

    def __post_init__(self):
        a0 = complex(self.alpha0)
        _check_disk([a0])
        object.__setattr__(self, "alpha0", a0)
        object.__setattr__(self, "g", _as_unimodular(self.g, "g"))

    def _values(self, ks):
        return self.alpha0 * _unit_power(self.g, ks)

    def to_json(self):
        return {"type": "geometric", "alpha0": _cpair(self.alpha0), "g": _cpair(self.g)}


@dataclass(frozen=True, eq=False)
class Gauged(VerblunskySequence):
    """alpha_k = gamma0 * gamma1**k * base_k.

    Produced by :func:`apply_gauge` when the base class cannot absorb the
    gauge (a periodic base with gamma1 not a root of unity of its period).
    """

    base: VerblunskySequence
    gamma0: complex
    gamma1: complex
    kind = "gauged"

    def __post_init__(self):
        object.__setattr__(self, "gamma0", _as_unimodular(self.gamma0, "gamma0"))
        object.__setattr__(self, "gamma1", _as_unimodular(self.gamma1, "gamma1"))

    @property
    def index_range(self):
        return self.base.index_range

    def _values(self, ks):
        return self.gamma0 * _unit_power(self.gamma1, ks) * self.base._values(ks)

    def to_json(self):
        return {"type": "gauged", "base": self.base.to_json(),
                "gamma0": _cpair(self.gamma0), "gamma1": _cpair(self.gamma1)}


def sequence_from_json(spec: dict) -> VerblunskySequence:
    """Build a generator from its JSON description.

    ``{"type": "explicit", "values": [[re, im], ...], "offset": 0}``,
    ``{"type": "periodic", "cycle": [...]}`` or
    ``{"type": "geometric", "alpha0": [re, im], "g": [re, im]}``.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise DomainError("generator must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "explicit":
            return Explicit(np.array([_from_cpair(v) for v in spec["values"]]),
                            int(spec.get("offset", 0)))
        if kind == "periodic":
            return Periodic(np.array([_from_cpair(v) for v in spec["cycle"]]))
        if kind == "geometric":
            return Geometric(_from_cpair(spec["alpha0"]), _from_cpair(spec["g"]))
        if kind == "gauged":
            return Gauged(sequence_from_json(spec["base"]),
                          _from_cpair(spec["gamma0"]), _from_cpair(spec["gamma1"]))
    except KeyError as exc:
        raise DomainError(f"generator of type {kind!r} is missing field {exc}") from None
    raise DomainError(f"unknown generator type {kind!r}")


@dataclass(frozen=True)
class GaugeTransform:
    """The map alpha_k -> gamma0 * gamma1**k * alpha_k."""

    gamma0: complex = 1.0
    gamma1: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma0", _as_unimodular(self.gamma0, "gamma0"))
        object.__setattr__(self, "gamma1", _as_unimodular(self.gamma1, "gamma1"))

    def factor(self, k):
        return self.gamma0 * _unit_power(self.gamma1, np.asarray(k))

    def compose(self, other: "GaugeTransform") -> "GaugeTransform":
        return GaugeTransform(self.gamma0 * other.gamma0, self.gamma1 * other.gamma1)

    def inverse(self) -> "GaugeTransform":
        return GaugeTransform(self.gamma0.conjugate(), self.gamma1.conjugate())


def apply_gauge(seq: VerblunskySequence, t: GaugeTransform) -> VerblunskySequence:
    """Return the sequence beta_k = gamma0 * gamma1**k * alpha_k.

    The generator class is kept whenever it can represent the result.
    """
    g0, g1 = t.gamma0, t.gamma1
    if isinstance(seq, Geometric):
        return Geometric(g0 * seq.alpha0, g1 * seq.g)
    if isinstance(seq, Explicit):
        lo, hi = seq.index_range
        ks = np.arange(lo, hi + 1)
        return Explicit(seq.values * g0 * _unit_power(g1, ks), seq.offset)
    if isinstance(seq, Periodic):
        if abs(g1 ** seq.period - 1.0) < UNIMODULAR_TOL:
            ks = np.arange(seq.period)
            return Periodic(seq.cycle * g0 * _unit_power(g1, ks))
        return Gauged(seq, g0, g1)
    if isinstance(seq, Gauged):
        inner = GaugeTransform(seq.gamma0 * g0, seq.gamma1 * g1)
        if abs(inner.gamma0 - 1) < UNIMODULAR_TOL and abs(inner.gamma1 - 1) < UNIMODULAR_TOL:
            return seq.base
        return apply_gauge(seq.base, inner)
    raise DomainError(f"cannot gauge generator of type {type(seq).__name__}")


def gauge_reduction(seq: VerblunskySequence):
    """Split a gauge-type sequence into (base, gauge) with seq = gauge(base).

    Geometric sequences reduce to the constant sequence alpha0; ``Gauged``
    sequences reduce to their base. Returns ``None`` for other generators.
    """
    if isinstance(seq, Geometric):
        return Periodic(np.array([seq.alpha0])), GaugeTransform(1.0, seq.g)
    if isinstance(seq, Gauged):
        return seq.base, GaugeTransform(seq.gamma0, seq.gamma1)
    return None


def _angle_dist(a: float, b: float) -> float:
    d = math.fmod(abs(a - b), TWO_PI)
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class Arc:
    """An arc {e^{i theta} : theta0 <(=) theta <(=) theta1} of the unit circle.

    theta0 is kept in [0, 2*pi) and theta0 < theta1 <= theta0 + 2*pi, so
    arcs through angle 0 are represented without ambiguity.
    """

    theta0: float
    theta1: float
    closed0: bool = True
    closed1: bool = True
    closed_gaps: tuple = field(default=(), compare=False)

    def __post_init__(self):
        t0, t1 = float(self.theta0), float(self.theta1)
        if not (math.isfinite(t0) and math.isfinite(t1)):
            raise DomainError("arc endpoints must be finite")
        shift = canonical_angle(t0) - t0
        t0, t1 = t0 + shift, t1 + shift
        if not t0 < t1 <= t0 + TWO_PI + 1e-12:
            raise DomainError(f"arc endpoints must satisfy theta0 < theta1 <= theta0 + 2pi "
                              f"(got {self.theta0!r}, {self.theta1!r})")
        object.__setattr__(self, "theta0", t0)
        object.__setattr__(self, "theta1", min(t1, t0 + TWO_PI))

    @property
    def width(self) -> float:
        return self.theta1 - self.theta0

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.theta0 + self.theta1)

    @property
    def is_full(self) -> bool:
        return self.theta1 >= self.theta0 + TWO_PI - 1e-12

    def contains(self, theta) -> bool:
        """Membership of e^{i theta}; queries within ENDPOINT_TOL of an end snap to it."""
        if self.is_full:
            return True
        theta = float(theta)
        if _angle_dist(theta, self.theta0) <= ENDPOINT_TOL:
            return self.closed0
        if _angle_dist(theta, self.theta1) <= ENDPOINT_TOL:
            return self.closed1
        t = self.theta0 + canonical_angle(theta - self.theta0)
        return t < self.theta1

    def interior_grid(self, n: int, margin: float = 0.0) -> np.ndarray:
        """n equispaced angles in the interior, keeping ``margin`` from the ends."""
        if self.is_full:
            return self.theta0 + TWO_PI * (np.arange(n) + 0.5) / n
        lo, hi = self.theta0 + margin, self.theta1 - margin
        if not lo < hi:
            raise DomainError("arc interior is empty after excluding the edge margin")
        return lo + (hi - lo) * (np.arange(n) + 0.5) / n

    def to_json(self) -> dict:
        return {"theta0": self.theta0, "theta1": self.theta1}


def arc_from_endpoints(theta0: float, theta1: float, closed: bool = True) -> Arc:
    return Arc(theta0, theta1, closed, closed)


def arc_contains(arc: Arc, theta: float) -> bool:
    return arc.contains(theta)


def full_circle() -> Arc:
    return Arc(0.0, TWO_PI)


def window(seq: VerblunskySequence, k_lo: int, k_hi: int) -> np.ndarray:
    return seq.window(k_lo, k_hi)


def as_sequence(values: Sequence[complex] | VerblunskySequence) -> VerblunskySequence:
    if isinstance(values, VerblunskySequence):
        return values
    return Explicit(np.asarray(values, dtype=complex))
