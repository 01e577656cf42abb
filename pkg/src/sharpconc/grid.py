"""Regular grids over a cube window and indicator sets living on them.

A :class:`GridSet` stores one boolean per cell (a cell is inside when its
center is) together with an *outside policy*: the region the set coincides
with beyond the window, or ``None`` when the set is empty out there. The
policy is what lets a half-space, which no bounded window can hold, be
measured and enlarged exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import GridSpecError, InvalidArgumentError, WindowOverflowError
from .regions import (Difference, Intersection, Region, SymmetricDifference,
                      Union, region_from_dict)


@dataclass(frozen=True)
class GridSpec:
    """Window ``[-R, R]^n`` split into ``m`` cells per axis."""

    n: int
    R: float
    m: int

    def __post_init__(self):
        if self.n not in (2, 3):
            raise GridSpecError(f"only n = 2 or 3 is supported, got {self.n}")
        if not (math.isfinite(self.R) and self.R > 0):
            raise GridSpecError(f"window half-width must be positive, got {self.R!r}")
        if self.m < 16 or self.m % 2:
            raise GridSpecError(f"cells per axis must be even and >= 16, got {self.m}")
        object.__setattr__(self, "R", float(self.R))

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.m

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.n

    def axis_centers(self, pad: int = 0) -> np.ndarray:
        k = np.arange(-pad, self.m + pad, dtype=float)
        return -self.R + (k + 0.5) * self.h

    def axis_edges(self, pad: int = 0) -> np.ndarray:
        k = np.arange(-pad, self.m + pad + 1, dtype=float)
        return -self.R + k * self.h

    def points(self, pad: int = 0) -> np.ndarray:
        """Cell centers as an array of shape ``(m + 2 pad,)*n + (n,)``."""
        return _points(self, pad)

    def to_dict(self) -> dict:
        return {"n": self.n, "R": self.R, "m": self.m}


@lru_cache(maxsize=8)
def _points(spec: GridSpec, pad: int) -> np.ndarray:
    c = spec.axis_centers(pad)
    grids = np.meshgrid(*([c] * spec.n), indexing="ij")
    pts = np.stack(grids, axis=-1)
    pts.flags.writeable = False
    return pts


def _frozen(mask: np.ndarray) -> np.ndarray:
    out = np.array(mask, dtype=bool, copy=True)
    out.flags.writeable = False
    return out


def policy_raster(outside: Region | None, spec: GridSpec, pad: int = 0) -> np.ndarray:
    """Cell-center raster of an outside policy over the (padded) grid."""
    shape = (spec.m + 2 * pad,) * spec.n
    if outside is None:
        return np.zeros(shape, dtype=bool)
    return np.asarray(outside.contains(spec.points(pad)), dtype=bool)


def interface(mask: np.ndarray, outside: Region | None, spec: GridSpec) -> np.ndarray:
    """Cells with at least one face neighbor of the opposite state.

    Neighbors across the window edge are taken from the outside policy.
    """
    padded = policy_raster(outside, spec, pad=1)
    inner = (slice(1, -1),) * spec.n
    padded[inner] = mask
    out = np.zeros(padded.shape, dtype=bool)
    for ax in range(spec.n):
        lo = [slice(None)] * spec.n
        hi = [slice(None)] * spec.n
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        diff = padded[tuple(lo)] != padded[tuple(hi)]
        out[tuple(lo)] |= diff
        out[tuple(hi)] |= diff
    return out[inner]


def _combine(a: Region | None, b: Region | None, op: str) -> Region | None:
    if op == "or":
        return b if a is None else a if b is None else Union(a, b)
    if op == "and":
        return None if a is None or b is None else Intersection(a, b)
    if op == "sub":
        return None if a is None else a if b is None else Difference(a, b)
    return b if a is None else a if b is None else SymmetricDifference(a, b)


@dataclass(frozen=True, eq=False)
class GridSet:
    """Indicator of a set on a grid plus its description beyond the window.

    ``uncertain`` marks cells whose state may disagree with the continuous
    set being represented; when absent it defaults to the set's own
    interface layer. Boolean operations carry the union of their operands'
    uncertain cells, because the interface of a combination can hide the
    interfaces of its parts (the symmetric difference of two nearly equal
    sets is the usual example).
    """

    spec: GridSpec
    mask: np.ndarray
    outside: Region | None = None
    uncertain: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        mask = np.asarray(self.mask)
        if mask.shape != self.spec.shape:
            raise GridSpecError(f"mask shape {mask.shape} does not match grid {self.spec.shape}")
        object.__setattr__(self, "mask", _frozen(mask))
        if self.uncertain is not None:
            if np.shape(self.uncertain) != self.spec.shape:
                raise GridSpecError("uncertain-cell mask has the wrong shape")
            object.__setattr__(self, "uncertain", _frozen(self.uncertain))
        if self.outside is not None and self.outside.n != self.spec.n:
            raise GridSpecError("outside policy dimension does not match the grid")

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def is_empty(self) -> bool:
        return self.outside is None and not self.mask.any()

    def layer(self) -> np.ndarray:
        """Own interface layer (window edges resolved by the policy)."""
        return interface(self.mask, self.outside, self.spec)

    def uncertain_cells(self) -> np.ndarray:
        return self.layer() if self.uncertain is None else self.uncertain

    def padded(self, pad: int) -> np.ndarray:
        """Mask extended by ``pad`` cells per side, the ring filled from the policy."""
        out = policy_raster(self.outside, self.spec, pad)
        out[(slice(pad, pad + self.spec.m),) * self.spec.n] = self.mask
        return out

    def equals(self, other: "GridSet") -> bool:
        """Same grid and bit-identical indicator."""
        return self.spec == other.spec and np.array_equal(self.mask, other.mask)

    def _binary(self, other: "GridSet", op: str) -> "GridSet":
        if not isinstance(other, GridSet):
            return NotImplemented
        if self.spec != other.spec:
            raise GridSpecError("grid sets live on different grids")
        fn = {"or": np.logical_or, "and": np.logical_and,
              "sub": lambda p, q: p & ~q, "xor": np.logical_xor}[op]
        unc = self.uncertain_cells() | other.uncertain_cells()
        return GridSet(self.spec, fn(self.mask, other.mask),
                       _combine(self.outside, other.outside, op), unc)

    def __or__(self, other):
        return self._binary(other, "or")

    def __and__(self, other):
        return self._binary(other, "and")

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __xor__(self, other):
        return self._binary(other, "xor")


def rasterize(region: Region, spec: GridSpec) -> GridSet:
    """Cell-center raster of ``region``.

    Bounded regions must fit inside the window. Unbounded regions keep
    themselves as the outside policy.
    """
    if region.n != spec.n:
        raise GridSpecError(f"region lives in R^{region.n}, grid in R^{spec.n}")
    mask = np.asarray(region.contains(spec.points()), dtype=bool)
    if region.bounded:
        lo, hi = region.bbox()
        if np.any(lo < -spec.R) or np.any(hi > spec.R):
            raise WindowOverflowError(
                f"bounded region with bbox [{lo}, {hi}] does not fit in [-{spec.R}, {spec.R}]^{spec.n}")
        return GridSet(spec, mask, None)
    return GridSet(spec, mask, region)


def full_window(spec: GridSpec) -> GridSet:
    return GridSet(spec, np.ones(spec.shape, dtype=bool), None)


# serialization ---------------------------------------------------------------

def _rle(flat: np.ndarray) -> tuple[int, list[int]]:
    flat = flat.astype(np.int8)
    change = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    return int(flat[0]) if flat.size else 0, np.diff(bounds).tolist()


def _unrle(first: int, runs: list[int], size: int) -> np.ndarray:
    if sum(runs) != size:
        raise GridSpecError("run lengths do not add up to the grid size")
    values = (np.arange(len(runs)) + first) % 2
    return np.repeat(values.astype(bool), runs)


def gridset_to_json(E: GridSet) -> str:
    first, runs = _rle(E.mask.ravel())
    doc = {
        "format": "gridset/1",
        "spec": E.spec.to_dict(),
        "outside": None if E.outside is None else E.outside.to_dict(),
        "first": first,
        "runs": runs,
    }
    return json.dumps(doc, separators=(",", ":"))


def gridset_from_json(text: str) -> GridSet:
    try:
        doc = json.loads(text)
        spec = GridSpec(int(doc["spec"]["n"]), float(doc["spec"]["R"]), int(doc["spec"]["m"]))
        size = spec.m ** spec.n
        mask = _unrle(int(doc["first"]), [int(v) for v in doc["runs"]], size).reshape(spec.shape)
        outside = None if doc["outside"] is None else region_from_dict(doc["outside"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"malformed grid set document: {exc}") from exc
    return GridSet(spec, mask, outside)
