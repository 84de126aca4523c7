"""Domains (interval, rectangle, disk, space-time box) and their distance
factors: polynomial fields that vanish exactly on the Dirichlet boundary and
are strictly positive inside."""

from __future__ import annotations

from dataclasses import dataclass
from math import pi
from typing import Union

import numpy as np

from . import jets
from .jets import TaylorJet, seed_point


@dataclass(frozen=True)
class Interval:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")

    @property
    def dim(self) -> int:
        return 1

    @property
    def measure(self) -> float:
        return self.b - self.a

    @property
    def boundary_measure(self) -> float:
        # counting measure on the two endpoints
        return 2.0

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])

    def contains(self, x, tol=1e-12) -> bool:
        return self.a - tol <= float(np.asarray(x).reshape(())) <= self.b + tol


@dataclass(frozen=True)
class Rectangle:
    lo: tuple[float, float] = (0.0, 0.0)
    hi: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if len(self.lo) != 2 or len(self.hi) != 2:
            raise ValueError("rectangle needs two coordinates per corner")
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty rectangle lo={self.lo} hi={self.hi}")

    @property
    def dim(self) -> int:
        return 2

    @property
    def measure(self) -> float:
        return (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])

    @property
    def boundary_measure(self) -> float:
        return 2.0 * ((self.hi[0] - self.lo[0]) + (self.hi[1] - self.lo[1]))

    def bounding_box(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    def contains(self, x, tol=1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= np.asarray(self.lo) - tol) and np.all(x <= np.asarray(self.hi) + tol)
        )


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return 2

    @property
    def measure(self) -> float:
        return pi * self.radius**2

    @property
    def boundary_measure(self) -> float:
        return 2.0 * pi * self.radius

    def bounding_box(self):
        c = np.asarray(self.center, dtype=float)
        r = self.radius
        return c - r, c + r

    def contains(self, x, tol=1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return float(np.sum((x - np.asarray(self.center)) ** 2)) <= (self.radius + tol) ** 2


@dataclass(frozen=True)
class SpaceTimeBox:
    """Cylinder (0, horizon) x spatial domain; nodes are laid out (t, x...)."""

    horizon: float
    spatial: Union[Interval, Rectangle, Disk]

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"time horizon must be positive, got {self.horizon}")
        if isinstance(self.spatial, SpaceTimeBox):
            raise ValueError("spatial part of a space-time box must be a spatial domain")
        if self.spatial.dim + 1 > 3:
            raise ValueError("space-time jets support at most two spatial dimensions")

    @property
    def dim(self) -> int:
        return 1 + self.spatial.dim

    @property
    def measure(self) -> float:
        return self.horizon * self.spatial.measure

    def bounding_box(self):
        lo, hi = self.spatial.bounding_box()
        return np.concatenate(([0.0], lo)), np.concatenate(([self.horizon], hi))

    def contains(self, x, tol=1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return -tol <= x[0] <= self.horizon + tol and self.spatial.contains(x[1:], tol)


Domain = Union[Interval, Rectangle, Disk, SpaceTimeBox]

SPATIAL_KINDS = (Interval, Rectangle, Disk)


def distance_factor(domain: Domain, x) -> float:
    """Boundary distance factor L(x): zero exactly on the boundary, positive inside."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(domain, Interval):
        return float((x[0] - domain.a) * (domain.b - x[0]))
    if isinstance(domain, Rectangle):
        out = 1.0
        for i in range(2):
            out *= (x[i] - domain.lo[i]) * (domain.hi[i] - x[i])
        return out
    if isinstance(domain, Disk):
        c = np.asarray(domain.center)
        return float(domain.radius**2 - np.sum((x - c) ** 2))
    raise TypeError(f"no distance factor for domain {type(domain).__name__}")


def distance_jet(domain: Domain, x, order: int) -> TaylorJet:
    """Jet of the distance factor, built from coordinate seeds so the
    polynomial structure (and its exact boundary zeros) is preserved."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    seeds = seed_point(x, order)
    if isinstance(domain, Interval):
        return (seeds[0] - domain.a) * (domain.b - seeds[0])
    if isinstance(domain, Rectangle):
        out = (seeds[0] - domain.lo[0]) * (domain.hi[0] - seeds[0])
        return out * ((seeds[1] - domain.lo[1]) * (domain.hi[1] - seeds[1]))
    if isinstance(domain, Disk):
        acc = jets.seed_constant(domain.radius**2, order, 2)
        for i in range(2):
            di = seeds[i] - domain.center[i]
            acc = acc - di * di
        return acc
    raise TypeError(f"no distance factor for domain {type(domain).__name__}")


def distance_jets(domain: Domain, X, order: int) -> np.ndarray:
    """Packed distance-factor jets for a batch of points, shape (N, C)."""
    X = np.asarray(X, dtype=float)
    out = np.empty((X.shape[0], jets.coeff_layout(domain.dim, order).size))
    for n in range(X.shape[0]):
        out[n] = distance_jet(domain, X[n], order).coeffs
    return out


def spatial_part(domain: Domain):
    return domain.spatial if isinstance(domain, SpaceTimeBox) else domain
