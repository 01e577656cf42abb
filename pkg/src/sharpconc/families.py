"""Scenario corpus: parametrized test sets with closed-form metadata.

Gaussian families (``mass`` is the target Gaussian measure):

* ``tilted-halfspace``: ``H_{w,s}`` with ``w`` rotated by the angle ``eps``.
  Always extremal, so every deficit and asymmetry vanishes.
* ``shifted-slab-halfspace``: ``{x1 < a} u {s < x1 < b}``, a slab of mass
  ``eps`` cut from below ``s`` and moved above it. Depends on ``x1`` only.
  Its symmetric difference with ``H_{e1,s}`` is ``2 eps``, but tilted
  half-spaces do better, so its asymmetry is smaller.
* ``two-halfspace-union``: ``H_{w+,t} u H_{w-,t}`` with
  ``w+- = (cos eps, +-sin eps)``, a half-space bent by the angle ``eps``.
* ``centered-ball``: a centered ellipse/ellipsoid of axis ratio ``1 + eps``.

Euclidean families (``volume`` is the target Lebesgue measure, by default
``|K|``): ``box``, ``perturbed-K`` (the body ``K`` stretched by ``1 + eps``
along ``x1`` with volume preserved) and ``centered-ball``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar
from scipy.special import ellipe
from scipy.stats import chi

from .errors import GenerationError, InvalidArgumentError
from .gauss1d import density, phi, phi_inv
from .grid import GridSet, GridSpec, rasterize
from .regions import ConvexBody, HalfSpace, Region, Slab, Stretched, Union, unit_vector

GAUSS_FAMILIES = ("tilted-halfspace", "shifted-slab-halfspace", "two-halfspace-union", "centered-ball")
EUCLID_FAMILIES = ("box", "perturbed-K", "centered-ball")
ALL_FAMILIES = ("tilted-halfspace", "shifted-slab-halfspace", "centered-ball", "box",
                "two-halfspace-union", "perturbed-K")
WINDOW_MARGIN = 6.0
_QUAD = dict(epsabs=1e-14, epsrel=1e-12, limit=200)


@dataclass(frozen=True)
class ScenarioFamily:
    """One member of a family: identifier, perturbation and mass/volume target.

    A family is Euclidean when ``volume`` is given or the family only exists
    in the Euclidean setting (``box``, ``perturbed-K``).
    """

    family_id: str
    eps: float = 0.0
    n: int = 2
    mass: float = 0.5
    volume: float | None = None
    K: ConvexBody | None = None

    def __post_init__(self):
        if self.family_id not in ALL_FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family_id!r}")
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise InvalidArgumentError(f"perturbation must be finite and >= 0, got {self.eps!r}")
        if self.n not in (2, 3):
            raise InvalidArgumentError(f"families exist for n = 2, 3, got {self.n}")
        if not 0.0 < self.mass < 1.0:
            raise InvalidArgumentError(f"mass target must lie in (0, 1), got {self.mass!r}")
        if self.volume is not None and not self.volume > 0:
            raise InvalidArgumentError(f"volume target must be positive, got {self.volume!r}")
        if self.K is not None and self.K.n != self.n:
            raise InvalidArgumentError("body dimension differs from the family dimension")

    @property
    def euclidean(self) -> bool:
        return self.family_id in ("box", "perturbed-K") or self.volume is not None

    @property
    def body(self) -> ConvexBody:
        """Reference body ``K`` for Euclidean families."""
        if self.K is not None:
            return self.K
        if self.family_id == "perturbed-K":
            return ConvexBody.ball(self.n, (1.0 / _unit_ball_volume(self.n)) ** (1.0 / self.n))
        return ConvexBody.cube(self.n)

    @property
    def target_volume(self) -> float:
        return self.body.volume if self.volume is None else float(self.volume)

    @property
    def label(self) -> str:
        kind = "euclid" if self.euclidean else "gauss"
        return f"{self.family_id}:{kind}:n{self.n}:eps{self.eps!r}"


@dataclass(frozen=True)
class Scenario:
    """A generated set together with whatever closed forms its family has."""

    family: ScenarioFamily
    region: Region
    E: GridSet
    s: float | None = None
    params: dict = field(default_factory=dict, compare=False)

    @property
    def spec(self) -> GridSpec:
        return self.E.spec

    def exact_mass(self) -> float | None:
        return _dispatch("mass", self)

    def exact_alpha(self) -> float | None:
        return _dispatch("alpha", self)

    def exact_deficit(self, r: float) -> float | None:
        """Closed-form concentration deficit at radius ``r``, when known."""
        return _dispatch("deficit", self, r)

    def exact_enlarged_mass(self, r: float) -> float | None:
        return _dispatch("grown", self, r)


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


# Gaussian constructions -----------------------------------------------------

def _bent_mass(t: float, theta: float) -> float:
    """gamma(H_{w+,t} u H_{w-,t}) with w+- = (cos theta, +-sin theta)."""
    c, sn = math.cos(theta), math.sin(theta)
    val, _ = quad(lambda y: density(y) * phi((t + y * sn) / c), 0.0, np.inf, **_QUAD)
    return 2.0 * val


def _bent_alpha(t: float, theta: float, s: float) -> float:
    c, sn = math.cos(theta), math.sin(theta)
    ps = phi(s)

    def f(y):
        return density(y) * abs(phi((t + y * sn) / c) - ps)

    ystar = (s * c - t) / sn
    pts = [ystar] if ystar > 0 else None
    if pts:
        a, _ = quad(f, 0.0, ystar, **_QUAD)
        b, _ = quad(f, ystar, np.inf, **_QUAD)
        return 2.0 * (a + b)
    val, _ = quad(f, 0.0, np.inf, **_QUAD)
    return 2.0 * val


def _slab_sym_diff(theta: float, a: float, b: float, s: float) -> float:
    """gamma(E xor H_{w,s}) for E = {x1 < a} u {s < x1 < b}, w = (cos theta, sin theta)."""
    c, sn = math.cos(theta), math.sin(theta)
    mass_e = phi(a) + phi(b) - phi(s)

    def f(y):
        cut = (s - y * sn) / c
        common = phi(min(a, cut)) + max(0.0, phi(min(b, cut)) - phi(s))
        return density(y) * (mass_e + phi(cut) - 2.0 * common)

    if sn == 0.0:
        return mass_e + phi(s) - 2.0 * phi(a)
    # kinks where the cut crosses a, s and b
    kinks = sorted((s - v * c) / sn for v in (a, s, b))
    val, _ = quad(f, -np.inf, kinks[0], **_QUAD)
    for lo, hi in zip(kinks[:-1], kinks[1:]):
        val += quad(f, lo, hi, **_QUAD)[0]
    val += quad(f, kinks[-1], np.inf, **_QUAD)[0]
    return val


def _slab_alpha(a: float, b: float, s: float) -> float:
    """Minimum of :func:`_slab_sym_diff` over the tilt angle.

    Tilting pays off: the minimum sits at an angle of roughly 0.2 rad for
    moderate slabs, and is about 0.76 of the axis-aligned value ``2 eps``.
    """
    grid = np.linspace(0.0, 1.5, 61)
    vals = [_slab_sym_diff(t, a, b, s) for t in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda t: _slab_sym_diff(t, a, b, s), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-9})
    return float(min(res.fun, vals[k]))


def _ellipse_gauss_mass(rho: float, eps: float, n: int) -> float:
    a = rho * (1.0 + eps)
    if n == 2:
        b = rho / (1.0 + eps)
        inner = lambda x: 2.0 * phi(b * math.sqrt(max(1.0 - (x / a) ** 2, 0.0))) - 1.0
    else:
        b = rho / math.sqrt(1.0 + eps)
        inner = lambda x: -math.expm1(-0.5 * b * b * max(1.0 - (x / a) ** 2, 0.0))
    val, _ = quad(lambda x: density(x) * inner(x), 0.0, a, **_QUAD)
    return 2.0 * val


def _ball_radius(mass: float, n: int) -> float:
    if n == 2:
        return math.sqrt(-2.0 * math.log1p(-mass))
    return float(chi(3).ppf(mass))


def _stretch_factors(eps: float, n: int) -> tuple[float, ...]:
    f = 1.0 + eps
    return (f,) + (f ** (-1.0 / (n - 1)),) * (n - 1)


def _gauss_scenario(fam: ScenarioFamily, spec: GridSpec) -> Scenario:
    p, eps, n = fam.mass, fam.eps, fam.n
    s = phi_inv(p)
    e1 = unit_vector(n)
    fid = fam.family_id
    params: dict = {}
    if fid == "tilted-halfspace":
        if eps >= math.pi:
            raise GenerationError("tilt angle must be below pi")
        region: Region = HalfSpace(unit_vector(n, eps), s)
    elif fid == "shifted-slab-halfspace":
        if eps == 0:
            region = HalfSpace(e1, s)
        else:
            if not (p - eps > 0 and p + eps < 1):
                raise GenerationError(f"slab mass {eps} does not fit around mass {p}")
            a, b = phi_inv(p - eps), phi_inv(p + eps)
            region = Union(HalfSpace(e1, a), Slab(e1, s, b))
            params.update(a=a, b=b)
    elif fid == "two-halfspace-union":
        if eps == 0:
            region = HalfSpace(e1, s)
        else:
            if eps >= 0.5 * math.pi:
                raise GenerationError("bend angle must be below pi/2")
            lo = s * math.cos(eps) - 40.0
            try:
                t = brentq(lambda t: _bent_mass(t, eps) - p, lo, s * math.cos(eps) + 1.0,
                           xtol=1e-15)
            except ValueError as exc:
                raise GenerationError(f"cannot place a bent half-space of mass {p}") from exc
            c, sn = math.cos(eps), math.sin(eps)
            region = Union(HalfSpace((c, sn) + (0.0,) * (n - 2), t),
                           HalfSpace((c, -sn) + (0.0,) * (n - 2), t))
            params.update(t=t)
    elif fid == "centered-ball":
        rho0 = _ball_radius(p, n)
        if eps == 0:
            rho = rho0
            region = ConvexBody.ball(n, rho)
        else:
            try:
                rho = brentq(lambda r: _ellipse_gauss_mass(r, eps, n) - p, 1e-3, 4 * rho0 * (1 + eps) + 10,
                             xtol=1e-14)
            except ValueError as exc:
                raise GenerationError("cannot match the ellipsoid mass") from exc
            region = Stretched(ConvexBody.ball(n, rho), _stretch_factors(eps, n))
        params.update(rho=rho)
    else:
        raise GenerationError(f"{fid} has no Gaussian variant")
    return Scenario(fam, region, rasterize(region, spec), s, params)


# Euclidean constructions ----------------------------------------------------

def _euclid_region(fam: ScenarioFamily) -> Region:
    n, eps = fam.n, fam.eps
    V = fam.target_volume
    K = fam.body
    if fam.family_id == "box":
        c = V ** (1.0 / n)
        f = _stretch_factors(eps, n)
        return ConvexBody.box(tuple(0.5 * c * v for v in f))
    if fam.family_id == "perturbed-K":
        Kv = K.scaled((V / K.volume) ** (1.0 / n))
        if eps == 0:
            return Kv
        return Stretched(Kv, _stretch_factors(eps, n))
    if fam.family_id == "centered-ball":
        rho = (V / _unit_ball_volume(n)) ** (1.0 / n)
        ball = ConvexBody.ball(n, rho)
        return ball if eps == 0 else Stretched(ball, _stretch_factors(eps, n))
    raise GenerationError(f"{fam.family_id} has no Euclidean variant")


def _extent(region: Region) -> float:
    lo, hi = region.bbox()
    return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))


def auto_window(fam: ScenarioFamily, r_max: float, m: int) -> float:
    """Window half-width that holds the set and all its enlargements up to ``r_max``.

    Gaussian families use ``|s| + r_max + 6``. Euclidean families leave a
    margin of 16 cells (fewer on coarse grids) around ``E + max(r_max, 1) K``
    for the perimeter quotients.
    """
    if not fam.euclidean:
        R = abs(phi_inv(fam.mass)) + r_max + WINDOW_MARGIN
        if fam.family_id == "centered-ball":
            R = max(R, _ball_radius(fam.mass, fam.n) * (1 + fam.eps) + r_max + WINDOW_MARGIN)
        return R
    region = _euclid_region(fam)
    K = fam.body
    reach = _extent(region) + max(r_max, 1.0) * _extent(K)
    margin = min(16, m // 8)
    return reach * m / (m - 2 * margin)


def generate_family(fam: ScenarioFamily, spec: GridSpec) -> Scenario:
    """Realize ``fam`` on ``spec``; closed forms ride along as methods."""
    if fam.n != spec.n:
        raise GenerationError(f"family in R^{fam.n} on a grid in R^{spec.n}")
    if not fam.euclidean:
        return _gauss_scenario(fam, spec)
    region = _euclid_region(fam)
    return Scenario(fam, region, rasterize(region, spec), None, {})


# closed forms -----------------------------------------------------------------

def _box_sides(sc: Scenario) -> tuple[np.ndarray, float] | None:
    K = sc.family.body
    if K.kind != "box" or len(set(K.params)) != 1:
        return None
    fam = sc.family
    if fam.family_id == "box" or (fam.family_id == "perturbed-K"):
        c = fam.target_volume ** (1.0 / fam.n)
        return c * np.asarray(_stretch_factors(fam.eps, fam.n)), 2.0 * K.params[0]
    return None


def _disk_pair(sc: Scenario) -> tuple[float, float, float] | None:
    fam = sc.family
    K = fam.body
    if fam.family_id != "perturbed-K" or K.kind != "ball" or fam.n != 2:
        return None
    rho = math.sqrt(fam.target_volume / math.pi)
    f = 1.0 + fam.eps
    return rho * f, rho / f, K.params[0]


def _ellipse_perimeter(a: float, b: float) -> float:
    a, b = max(a, b), min(a, b)
    return 4.0 * a * float(ellipe(1.0 - (b / a) ** 2))


def _ellipse_disk_overlap(a: float, b: float, rho: float) -> float:
    def f(t):
        re = a * b / math.sqrt((b * math.cos(t)) ** 2 + (a * math.sin(t)) ** 2)
        return 0.5 * min(re, rho) ** 2

    # crossings split the integrand into smooth pieces
    pts = []
    if b < rho < a:
        t0 = math.asin(math.sqrt((a * a * b * b / rho ** 2 - b * b) / (a * a - b * b)))
        pts = [t0, math.pi - t0]
    val, _ = quad(f, 0.0, math.pi, points=pts or None, **_QUAD)
    return 2.0 * val


def _dispatch(kind: str, sc: Scenario, *args):
    fam = sc.family
    fid = fam.family_id
    if not fam.euclidean:
        s = sc.s
        if fid == "tilted-halfspace" or (fam.eps == 0 and fid != "centered-ball"):
            return {"mass": fam.mass, "alpha": 0.0,
                    "deficit": 0.0, "grown": phi(s + args[0]) if args else None}[kind]
        if fid == "shifted-slab-halfspace":
            a, b = sc.params["a"], sc.params["b"]
            if kind == "mass":
                return phi(a) + phi(b) - phi(s)
            if kind == "alpha":
                return _slab_alpha(a, b, s)
            r = args[0]
            grown = phi(b + r) if s - a <= 2.0 * r else phi(a + r) + phi(b + r) - phi(s - r)
            return grown if kind == "grown" else grown - phi(s + r)
        if fid == "two-halfspace-union":
            t, th = sc.params["t"], fam.eps
            if kind == "mass":
                return _bent_mass(t, th)
            if kind == "alpha":
                return _bent_alpha(t, th, s)
            grown = _bent_mass(t + args[0], th)
            return grown if kind == "grown" else grown - phi(s + args[0])
        if fid == "centered-ball":
            if kind == "mass":
                return fam.mass
            if kind == "alpha" and fam.eps == 0 and fam.mass == 0.5:
                return 0.5
            if kind == "grown" and fam.eps == 0 and fam.n == 2:
                return -math.expm1(-0.5 * (sc.params["rho"] + args[0]) ** 2)
            return None
        return None
    V = fam.target_volume
    if kind == "mass":
        return V
    box = _box_sides(sc)
    if box is not None:
        sides, k = box
        if kind == "alpha":
            return 2.0 * V - 2.0 * float(np.prod(np.minimum(sides, k)))
        r = args[0]
        grown = float(np.prod(sides + r * k))
        return grown if kind == "grown" else grown - (1.0 + r) ** fam.n * V
    disk = _disk_pair(sc)
    if disk is not None:
        a, b, rk = disk
        if kind == "alpha":
            return 2.0 * (V - _ellipse_disk_overlap(a, b, math.sqrt(V / math.pi)))
        r = args[0]
        grown = V + _ellipse_perimeter(a, b) * r * rk + math.pi * (r * rk) ** 2
        return grown if kind == "grown" else grown - (1.0 + r) ** 2 * fam.body.volume
    if fid == "centered-ball" and fam.eps == 0 and fam.body.kind == "ball":
        if kind == "alpha":
            return 0.0
        return 0.0 if kind == "deficit" else None
    return None


def sharpness_points(fam_id: str, eps_values, r: float, n: int = 2, **kwargs) -> list[tuple[float, float]]:
    """``(alpha, deficit)`` pairs from the closed forms of a family.

    Grid deficits near ``alpha^2`` are far below the grid resolution for
    small ``eps``, so the sharpness sweep reads the exact formulas.
    """
    pts = []
    for eps in eps_values:
        fam = ScenarioFamily(fam_id, float(eps), n, **kwargs)
        sc = _metadata_only(fam)
        alpha, deficit = sc.exact_alpha(), sc.exact_deficit(r)
        if alpha is None or deficit is None:
            raise GenerationError(f"{fam_id} has no closed-form deficit")
        pts.append((alpha, deficit))
    return pts


def _metadata_only(fam: ScenarioFamily) -> Scenario:
    # a tiny grid is enough to carry the parameters; the closed forms ignore it
    spec = GridSpec(fam.n, auto_window(fam, 2.0, 32), 32)
    return generate_family(fam, spec)
