"""Continuous regions: half-spaces, slabs, convex bodies and their combinations.

Every region answers point-membership queries on arrays of shape
``(..., n)``. Unbounded regions (half-spaces, slabs and their unions) also
know their own enlargement by a ball, which is what lets a grid set carry an
exact description of itself beyond the window. Regions that depend on a
single coordinate axis expose that structure as a list of open intervals so
Gaussian masses outside the window can be computed in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import gamma as _gamma

from .errors import InvalidArgumentError

Interval = tuple[float, float]
AxisIntervals = tuple[int, tuple[Interval, ...]]


class Region:
    """Base class; subclasses implement :meth:`contains`."""

    n: int

    def contains(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def bounded(self) -> bool:
        return False

    def enlarged(self, r: float) -> "Region":
        """The region ``self + B_r`` for the open ball of radius ``r``."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form enlargement")

    def axis_intervals(self) -> AxisIntervals | None:
        """``(k, intervals)`` if membership depends only on ``x_k``, else None."""
        return None

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError(f"{type(self).__name__} is unbounded")

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def __or__(self, other: "Region") -> "Region":
        return Union(self, other)

    def __and__(self, other: "Region") -> "Region":
        return Intersection(self, other)

    def __sub__(self, other: "Region") -> "Region":
        return Difference(self, other)

    def __xor__(self, other: "Region") -> "Region":
        return SymmetricDifference(self, other)


def _unit(omega) -> tuple[float, ...]:
    w = np.asarray(omega, dtype=float).ravel()
    if w.size not in (2, 3) or not np.all(np.isfinite(w)):
        raise InvalidArgumentError(f"direction must be a finite 2- or 3-vector, got {omega!r}")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > 1e-12:
        raise InvalidArgumentError(f"direction must be a unit vector (|w| = {norm!r})")
    return tuple(float(v) for v in w)


def _axis_of(omega: tuple[float, ...]) -> tuple[int, float] | None:
    nz = [i for i, v in enumerate(omega) if v != 0.0]
    if len(nz) == 1 and abs(omega[nz[0]]) == 1.0:
        return nz[0], omega[nz[0]]
    return None


def unit_vector(n: int, angle: float = 0.0) -> tuple[float, ...]:
    """``(cos a, sin a, 0, ...)``; exact ``e1`` for ``angle == 0``."""
    if angle == 0.0:
        return (1.0,) + (0.0,) * (n - 1)
    return (math.cos(angle), math.sin(angle)) + (0.0,) * (n - 2)


@dataclass(frozen=True)
class HalfSpace(Region):
    """The open half-space ``{x : <x, omega> < s}``."""

    omega: tuple[float, ...]
    s: float

    def __post_init__(self):
        object.__setattr__(self, "omega", _unit(self.omega))
        if not math.isfinite(self.s):
            raise InvalidArgumentError(f"half-space offset must be finite, got {self.s!r}")
        object.__setattr__(self, "s", float(self.s))

    @property
    def n(self) -> int:
        return len(self.omega)

    def contains(self, x):
        return np.asarray(x) @ np.asarray(self.omega) < self.s

    def enlarged(self, r):
        return HalfSpace(self.omega, self.s + r)

    def axis_intervals(self):
        ax = _axis_of(self.omega)
        if ax is None:
            return None
        k, sign = ax
        return (k, ((-math.inf, self.s),)) if sign > 0 else (k, ((-self.s, math.inf),))

    def to_dict(self):
        return {"type": "halfspace", "omega": list(self.omega), "s": self.s}


@dataclass(frozen=True)
class Slab(Region):
    """``{x : lo < <x, omega> < hi}``."""

    omega: tuple[float, ...]
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "omega", _unit(self.omega))
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))

    @property
    def n(self) -> int:
        return len(self.omega)

    def contains(self, x):
        t = np.asarray(x) @ np.asarray(self.omega)
        return (self.lo < t) & (t < self.hi)

    def enlarged(self, r):
        if self.hi <= self.lo:
            return self
        return Slab(self.omega, self.lo - r, self.hi + r)

    def axis_intervals(self):
        ax = _axis_of(self.omega)
        if ax is None:
            return None
        k, sign = ax
        if self.hi <= self.lo:
            return (k, ())
        return (k, ((self.lo, self.hi),)) if sign > 0 else (k, ((-self.hi, -self.lo),))

    def to_dict(self):
        return {"type": "slab", "omega": list(self.omega), "lo": self.lo, "hi": self.hi}


def _interval_op(a: tuple[Interval, ...], b: tuple[Interval, ...], op) -> tuple[Interval, ...]:
    pts = sorted({p for iv in a + b for p in iv if math.isfinite(p)})
    if not pts:
        probes = [0.0]
        cells = [(-math.inf, math.inf)]
    else:
        cells = [(-math.inf, pts[0])] + list(zip(pts[:-1], pts[1:])) + [(pts[-1], math.inf)]
        probes = [pts[0] - 1.0] + [0.5 * (u + v) for u, v in zip(pts[:-1], pts[1:])] + [pts[-1] + 1.0]

    def inside(ivs, t):
        return any(lo < t < hi for lo, hi in ivs)

    out: list[list[float]] = []
    for (lo, hi), t in zip(cells, probes):
        if op(inside(a, t), inside(b, t)):
            if out and out[-1][1] == lo:
                out[-1][1] = hi
            else:
                out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


@dataclass(frozen=True)
class _Binary(Region):
    a: Region
    b: Region

    _op = staticmethod(lambda p, q: False)
    _name = ""

    def __post_init__(self):
        if self.a.n != self.b.n:
            raise InvalidArgumentError("cannot combine regions of different dimension")

    @property
    def n(self) -> int:
        return self.a.n

    def contains(self, x):
        return self._op(self.a.contains(x), self.b.contains(x))

    def axis_intervals(self):
        ia, ib = self.a.axis_intervals(), self.b.axis_intervals()
        if ia is None or ib is None:
            return None
        if ia[0] != ib[0]:
            # an empty side is compatible with any axis
            if not ia[1]:
                ia = (ib[0], ())
            elif not ib[1]:
                ib = (ia[0], ())
            else:
                return None
        return ia[0], _interval_op(ia[1], ib[1], self._op)

    def to_dict(self):
        return {"type": self._name, "a": self.a.to_dict(), "b": self.b.to_dict()}


class Union(_Binary):
    _op = staticmethod(lambda p, q: p | q)
    _name = "union"

    @property
    def bounded(self):
        return self.a.bounded and self.b.bounded

    def enlarged(self, r):
        return Union(self.a.enlarged(r), self.b.enlarged(r))

    def bbox(self):
        la, ua = self.a.bbox()
        lb, ub = self.b.bbox()
        return np.minimum(la, lb), np.maximum(ua, ub)


class Intersection(_Binary):
    _op = staticmethod(lambda p, q: p & q)
    _name = "intersection"

    @property
    def bounded(self):
        return self.a.bounded or self.b.bounded

    def bbox(self):
        if self.a.bounded and self.b.bounded:
            la, ua = self.a.bbox()
            lb, ub = self.b.bbox()
            return np.maximum(la, lb), np.minimum(ua, ub)
        return self.a.bbox() if self.a.bounded else self.b.bbox()


class Difference(_Binary):
    _op = staticmethod(lambda p, q: p & ~q)
    _name = "difference"

    @property
    def bounded(self):
        return self.a.bounded

    def bbox(self):
        return self.a.bbox()


class SymmetricDifference(_Binary):
    _op = staticmethod(lambda p, q: p ^ q)
    _name = "symdiff"

    @property
    def bounded(self):
        return self.a.bounded and self.b.bounded

    def bbox(self):
        return Union(self.a, self.b).bbox()


@dataclass(frozen=True, eq=False)
class ConvexBody(Region):
    """Open, bounded, convex body containing the origin in its interior.

    Three kinds are supported: ``ball`` (``params = (radius,)``), ``box``
    (``params`` = half-extents) and ``polytope`` (``params`` = flattened
    vertex list). Use the :meth:`ball`, :meth:`box` and :meth:`polytope`
    constructors.
    """

    kind: str
    n: int
    params: tuple[float, ...]

    def __post_init__(self):
        if self.n not in (2, 3):
            raise InvalidArgumentError(f"convex bodies live in R^2 or R^3, got n={self.n}")
        p = np.asarray(self.params, dtype=float)
        if not np.all(np.isfinite(p)):
            raise InvalidArgumentError("convex body parameters must be finite")
        if self.kind == "ball":
            if p.size != 1 or p[0] <= 0:
                raise InvalidArgumentError("ball needs one positive radius")
        elif self.kind == "box":
            if p.size != self.n or np.any(p <= 0):
                raise InvalidArgumentError("box needs n positive half-extents")
        elif self.kind == "polytope":
            if p.size == 0 or p.size % self.n:
                raise InvalidArgumentError("polytope needs a nonempty vertex list")
            self._facets  # validates hull and interior origin
        else:
            raise InvalidArgumentError(f"unknown convex body kind {self.kind!r}")

    # constructors -------------------------------------------------------
    @classmethod
    def ball(cls, n: int, radius: float = 1.0) -> "ConvexBody":
        return cls("ball", n, (float(radius),))

    @classmethod
    def box(cls, half_extents) -> "ConvexBody":
        a = tuple(float(v) for v in half_extents)
        return cls("box", len(a), a)

    @classmethod
    def cube(cls, n: int, side: float = 1.0) -> "ConvexBody":
        return cls.box((0.5 * side,) * n)

    @classmethod
    def polytope(cls, vertices) -> "ConvexBody":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2:
            raise InvalidArgumentError("vertices must be an (N, n) array")
        return cls("polytope", v.shape[1], tuple(v.ravel()))

    @classmethod
    def regular_polygon(cls, k: int, circumradius: float = 1.0, phase: float = 0.0) -> "ConvexBody":
        t = phase + 2.0 * np.pi * np.arange(k) / k
        return cls.polytope(circumradius * np.column_stack([np.cos(t), np.sin(t)]))

    # geometry ----------------------------------------------------------
    def __eq__(self, other):
        return (isinstance(other, ConvexBody) and self.kind == other.kind
                and self.n == other.n and self.params == other.params)

    def __hash__(self):
        return hash((self.kind, self.n, self.params))

    @property
    def vertices(self) -> np.ndarray:
        return np.asarray(self.params, dtype=float).reshape(-1, self.n)

    @cached_property
    def _facets(self) -> tuple[np.ndarray, np.ndarray]:
        try:
            hull = ConvexHull(self.vertices)
        except (QhullError, ValueError) as exc:
            raise InvalidArgumentError(f"polytope hull is degenerate: {exc}") from exc
        normals = hull.equations[:, :-1]
        offsets = -hull.equations[:, -1]  # normal . x <= offset on the body
        if np.any(offsets <= 1e-12):
            raise InvalidArgumentError("polytope must contain the origin in its interior")
        return normals, offsets

    @property
    def bounded(self) -> bool:
        return True

    def gauge(self, x) -> np.ndarray:
        """Minkowski functional ``inf{t > 0 : x in tK}``, vectorized over ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.sqrt(np.sum(x * x, axis=-1)) / self.params[0]
        if self.kind == "box":
            return np.max(np.abs(x) / np.asarray(self.params), axis=-1)
        normals, offsets = self._facets
        return np.maximum(np.max(x @ (normals / offsets[:, None]).T, axis=-1), 0.0)

    def support(self, nu) -> float | np.ndarray:
        """Support function ``sup_{x in K} <x, nu>``."""
        nu = np.asarray(nu, dtype=float)
        if self.kind == "ball":
            out = self.params[0] * np.sqrt(np.sum(nu * nu, axis=-1))
        elif self.kind == "box":
            out = np.sum(np.abs(nu) * np.asarray(self.params), axis=-1)
        else:
            out = np.max(nu @ self.vertices.T, axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def contains(self, x):
        return self.gauge(x) < 1.0

    @cached_property
    def volume(self) -> float:
        if self.kind == "ball":
            n, rho = self.n, self.params[0]
            return math.pi ** (n / 2) / float(_gamma(n / 2 + 1)) * rho ** n
        if self.kind == "box":
            return float(np.prod(2.0 * np.asarray(self.params)))
        return float(ConvexHull(self.vertices).volume)

    def scaled(self, t: float) -> "ConvexBody":
        if not t > 0:
            raise InvalidArgumentError(f"scale factor must be positive, got {t!r}")
        if self.kind == "ball":
            return ConvexBody("ball", self.n, (self.params[0] * t,))
        return ConvexBody(self.kind, self.n, tuple(v * t for v in self.params))

    def bbox(self):
        eye = np.eye(self.n)
        hi = np.array([self.support(e) for e in eye])
        lo = -np.array([self.support(-e) for e in eye])
        return lo, hi

    def half_cell(self, h: float) -> float:
        """Half a grid cell measured in the gauge: ``min_i gauge(+-(h/2) e_i)``."""
        eye = np.eye(self.n) * (0.5 * h)
        return float(np.min(self.gauge(np.vstack([eye, -eye]))))

    def to_dict(self):
        return {"type": "convex", "kind": self.kind, "n": self.n, "params": list(self.params)}


@dataclass(frozen=True)
class Translated(Region):
    """``region + t``."""

    region: Region
    t: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))

    @property
    def n(self):
        return self.region.n

    @property
    def bounded(self):
        return self.region.bounded

    def contains(self, x):
        return self.region.contains(np.asarray(x) - np.asarray(self.t))

    def bbox(self):
        lo, hi = self.region.bbox()
        return lo + np.asarray(self.t), hi + np.asarray(self.t)

    def to_dict(self):
        return {"type": "translated", "region": self.region.to_dict(), "t": list(self.t)}


@dataclass(frozen=True)
class Stretched(Region):
    """Image of ``region`` under the diagonal map ``x -> factors * x``."""

    region: Region
    factors: tuple[float, ...] = field(default=())

    def __post_init__(self):
        f = tuple(float(v) for v in self.factors)
        if len(f) != self.region.n or any(v <= 0 for v in f):
            raise InvalidArgumentError("stretch needs n positive factors")
        object.__setattr__(self, "factors", f)

    @property
    def n(self):
        return self.region.n

    @property
    def bounded(self):
        return self.region.bounded

    @property
    def volume(self) -> float:
        return float(np.prod(self.factors)) * self.region.volume

    def contains(self, x):
        return self.region.contains(np.asarray(x) / np.asarray(self.factors))

    def bbox(self):
        lo, hi = self.region.bbox()
        f = np.asarray(self.factors)
        return lo * f, hi * f

    def to_dict(self):
        return {"type": "stretched", "region": self.region.to_dict(), "factors": list(self.factors)}


_BINARY = {"union": Union, "intersection": Intersection,
           "difference": Difference, "symdiff": SymmetricDifference}


def region_from_dict(d: dict[str, Any]) -> Region:
    kind = d.get("type")
    if kind == "halfspace":
        return HalfSpace(tuple(d["omega"]), d["s"])
    if kind == "slab":
        return Slab(tuple(d["omega"]), d["lo"], d["hi"])
    if kind in _BINARY:
        return _BINARY[kind](region_from_dict(d["a"]), region_from_dict(d["b"]))
    if kind == "convex":
        return ConvexBody(d["kind"], int(d["n"]), tuple(d["params"]))
    if kind == "translated":
        return Translated(region_from_dict(d["region"]), tuple(d["t"]))
    if kind == "stretched":
        return Stretched(region_from_dict(d["region"]), tuple(d["factors"]))
    raise InvalidArgumentError(f"unknown region type {kind!r}")
