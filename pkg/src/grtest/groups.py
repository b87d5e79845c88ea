"""Randomization groups acting per observation: rotations, mirrors, pair exchange.

Each observation receives its own independent uniform group element; the test
engine owns the vector of elements and this module owns sampling, application,
composition, and enumeration of the three shipped groups:

- ``ROTATION``: all rotations of an (x, y) pair around the origin,
- ``MIRROR``: the four sign flips (x, y) -> (+-x, +-y),
- ``EXCHANGE``: the two-element group swapping the components of a censored
  paired observation (x1, x2, d1, d2) -> (x2, x1, d2, d1).

Element vectors are represented as plain arrays for batch work: rotation
angles with shape (B, n), mirror signs with shape (B, n, 2), exchange flags
with shape (B, n).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "GroupKind",
    "NotFiniteGroupError",
    "PairedObservation",
    "CensoredPairedObservation",
    "Rotation",
    "Mirror",
    "Exchange",
    "identity",
    "compose",
    "sample_element",
    "sample_matrix",
    "apply",
    "apply_matrix",
    "enumerate_elements",
    "enumerate_matrix",
    "orbit_size",
]

TWO_PI = 2.0 * math.pi


class GroupKind(enum.Enum):
    ROTATION = "rotation"
    MIRROR = "mirror"
    EXCHANGE = "exchange"


class NotFiniteGroupError(ValueError):
    """Raised when a finite enumeration is requested for an infinite group."""


class PairedObservation(NamedTuple):
    x: float
    y: float


class CensoredPairedObservation(NamedTuple):
    x1: float
    x2: float
    d1: int
    d2: int


@dataclass(frozen=True)
class Rotation:
    theta: float  # radians in [0, 2*pi)


@dataclass(frozen=True)
class Mirror:
    sign_x: int  # +1 or -1
    sign_y: int


@dataclass(frozen=True)
class Exchange:
    swap: bool


GroupElement = Union[Rotation, Mirror, Exchange]


def identity(kind: GroupKind) -> GroupElement:
    if kind is GroupKind.ROTATION:
        return Rotation(0.0)
    if kind is GroupKind.MIRROR:
        return Mirror(1, 1)
    return Exchange(False)


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group composition a * b (apply b first, then a)."""
    if isinstance(a, Rotation) and isinstance(b, Rotation):
        return Rotation((a.theta + b.theta) % TWO_PI)
    if isinstance(a, Mirror) and isinstance(b, Mirror):
        return Mirror(a.sign_x * b.sign_x, a.sign_y * b.sign_y)
    if isinstance(a, Exchange) and isinstance(b, Exchange):
        return Exchange(a.swap ^ b.swap)
    raise TypeError(f"cannot compose {type(a).__name__} with {type(b).__name__}")


def sample_element(kind: GroupKind, rng: np.random.Generator) -> GroupElement:
    """Draw one element uniformly from the group."""
    if kind is GroupKind.ROTATION:
        return Rotation(float(rng.uniform(0.0, TWO_PI)))
    if kind is GroupKind.MIRROR:
        sx, sy = 2 * rng.integers(0, 2, size=2) - 1
        return Mirror(int(sx), int(sy))
    return Exchange(bool(rng.integers(0, 2)))


def sample_matrix(kind: GroupKind, replicates: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a (replicates, n) array of independent uniform group elements.

    Rotation: float angles (B, n). Mirror: int8 signs (B, n, 2).
    Exchange: bool flags (B, n).
    """
    if kind is GroupKind.ROTATION:
        return rng.uniform(0.0, TWO_PI, size=(replicates, n))
    if kind is GroupKind.MIRROR:
        return (2 * rng.integers(0, 2, size=(replicates, n, 2)) - 1).astype(np.int8)
    return rng.integers(0, 2, size=(replicates, n)).astype(bool)


def apply(element: GroupElement, obs):
    """Apply one group element to one observation.

    Rotations and mirrors act on (x, y) pairs; exchanges act on censored
    4-tuples (x1, x2, d1, d2).
    """
    if isinstance(element, Rotation):
        x, y = obs
        c, s = math.cos(element.theta), math.sin(element.theta)
        return PairedObservation(x * c - y * s, x * s + y * c)
    if isinstance(element, Mirror):
        x, y = obs
        return PairedObservation(element.sign_x * x, element.sign_y * y)
    if isinstance(element, Exchange):
        x1, x2, d1, d2 = obs
        if element.swap:
            return CensoredPairedObservation(x2, x1, d2, d1)
        return CensoredPairedObservation(x1, x2, d1, d2)
    raise TypeError(f"unsupported group element {type(element).__name__}")


def apply_matrix(kind: GroupKind, params: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Apply element vectors to a dataset, broadcasting over replicates.

    ``data`` has shape (n, 2) for rotation/mirror or (n, 4) for exchange;
    ``params`` is a sample_matrix array of shape (B, n, ...). Returns the
    transformed data with shape (B, n, 2) or (B, n, 4).
    """
    data = np.asarray(data, dtype=float)
    if kind is GroupKind.ROTATION:
        c, s = np.cos(params), np.sin(params)
        x, y = data[:, 0], data[:, 1]
        return np.stack([x * c - y * s, x * s + y * c], axis=-1)
    if kind is GroupKind.MIRROR:
        return data[np.newaxis, :, :] * params.astype(float)
    swap = params[..., np.newaxis]
    swapped = data[:, [1, 0, 3, 2]]
    return np.where(swap, swapped[np.newaxis, :, :], data[np.newaxis, :, :])


def enumerate_elements(kind: GroupKind) -> list:
    """All elements of a finite group; rotations raise NotFiniteGroupError."""
    if kind is GroupKind.ROTATION:
        raise NotFiniteGroupError("the rotation group has infinitely many elements")
    if kind is GroupKind.MIRROR:
        return [Mirror(sx, sy) for sx in (1, -1) for sy in (1, -1)]
    return [Exchange(False), Exchange(True)]


def orbit_size(kind: GroupKind, n: int) -> int:
    """Number of element vectors |G|^n for a finite group."""
    return len(enumerate_elements(kind)) ** n


def enumerate_matrix(kind: GroupKind, n: int) -> np.ndarray:
    """All |G|^n element vectors as a sample_matrix-shaped array.

    Row 0 is the all-identity vector. Intended for exact enumeration; callers
    enforce the orbit budget.
    """
    elements = enumerate_elements(kind)
    m = len(elements)
    total = m**n
    codes = (np.arange(total)[:, np.newaxis] // m ** np.arange(n)[np.newaxis, :]) % m
    if kind is GroupKind.EXCHANGE:
        return codes.astype(bool)
    signs = np.array([[e.sign_x, e.sign_y] for e in elements], dtype=np.int8)
    return signs[codes]
