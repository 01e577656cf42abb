"""Deficit reports for the concentration inequalities and their lemmas.

Each check returns a :class:`DeficitReport` holding both sides as
estimates with error bounds. A check passes when
``lhs - rhs >= -(lhs.err + rhs.err)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .asymmetry import (AsymmetryResult, _mass_offset, alpha_convex,
                        alpha_gauss, beta_strong, offset_uncertainty, search_directions)
from .errors import InvalidArgumentError, VolumeMismatchError
from .gauss1d import INV_SQRT2PI, SQRT2PI, density, phi, phi_inv
from .grid import GridSet, rasterize
from .measures import (MeasureEstimate, anisotropic_perimeter, cell_weights, gaussian_measure,
                       gaussian_perimeter_from_field, volume, window_mass)
from .morphology import DistanceField, enlarge_ball, enlarge_convex
from .regions import ConvexBody

C_ISO = 1.0 / (48.0 * SQRT2PI)
C_GAUSS = C_ISO / 2000.0

GAUSS_CONCENTRATION = "gauss_concentration"
COVERING = "covering"
GAUSS_LAYERCAKE = "gauss_layercake"
EUCLID_CONCENTRATION = "euclid_concentration"
MONOTONE_COVER = "monotone_cover"
BRUNN_MINKOWSKI = "brunn_minkowski"
EUCLID_LAYERCAKE = "euclid_layercake"
INEQUALITY_IDS = (GAUSS_CONCENTRATION, COVERING, GAUSS_LAYERCAKE, EUCLID_CONCENTRATION,
                  MONOTONE_COVER, BRUNN_MINKOWSKI, EUCLID_LAYERCAKE)

VOLUME_RTOL = 0.02


def default_c_n(n: int) -> float:
    return 9.0 ** (-n) / 100.0


@dataclass(frozen=True)
class Constants:
    """``c_gauss`` for the Gaussian estimate, ``c_n`` for the Euclidean ones.

    ``c_n = None`` means ``9^-n / 100`` for the dimension at hand.
    """

    c_gauss: float = C_GAUSS
    c_n: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.c_gauss) and self.c_gauss > 0):
            raise InvalidArgumentError(f"c_gauss must be positive, got {self.c_gauss!r}")
        if self.c_n is not None and not (math.isfinite(self.c_n) and self.c_n > 0):
            raise InvalidArgumentError(f"c_n must be positive, got {self.c_n!r}")

    def euclid(self, n: int) -> float:
        return default_c_n(n) if self.c_n is None else self.c_n


@dataclass(frozen=True)
class DeficitReport:
    inequality_id: str
    lhs: MeasureEstimate
    rhs: MeasureEstimate
    intermediates: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs.value - self.rhs.value

    @property
    def tolerance(self) -> float:
        return self.lhs.err + self.rhs.err

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance


def _positive(r: float, name: str = "r") -> float:
    if not (math.isfinite(r) and r > 0):
        raise InvalidArgumentError(f"{name} must be positive and finite, got {r!r}")
    return float(r)


def gauss_rhs_factor(s: float, r: float) -> float:
    """``e^{s^2} e^{-(|s| + r + 4)^2 / 2} r``."""
    return math.exp(s * s - 0.5 * (abs(s) + r + 4.0) ** 2) * r


# Gaussian checks ------------------------------------------------------------

def gauss_deficit_report(E: GridSet, r: float, constants: Constants = Constants(),
                         alpha: AsymmetryResult | None = None) -> DeficitReport:
    """``gamma(E + B_r) - phi(s + r) >= c e^{s^2} e^{-(|s|+r+4)^2/2} r alpha^2``."""
    r = _positive(r)
    s, g = _mass_offset(E)
    ds = offset_uncertainty(g, s)
    grown = gaussian_measure(enlarge_ball(E, r))
    # phi(s + r) moves by at most the largest density on [s + r - ds, s + r + ds]
    dens = density(max(abs(s + r) - ds, 0.0))
    lhs = MeasureEstimate(grown.value - phi(s + r), grown.err + dens * ds)
    a = alpha_gauss(E) if alpha is None else alpha
    coef = constants.c_gauss * gauss_rhs_factor(s, r)
    rhs_val = coef * a.value ** 2
    rhs_err = coef * (2.0 * a.value * a.err + a.err ** 2)
    # the coefficient is smooth in s; bound its relative change over [s - ds, s + ds]
    rel = math.expm1((3.0 * (abs(s) + ds) + r + 4.0) * ds)
    rhs_err += rel * (rhs_val + rhs_err)
    s_rho = phi_inv(grown.value) - s if 0.0 < grown.value < 1.0 else None
    beta = beta_strong(E)
    return DeficitReport(GAUSS_CONCENTRATION, lhs, MeasureEstimate(rhs_val, rhs_err), {
        "s": s, "r": r, "gamma_E": g.value, "alpha": a.value, "alpha_err": a.err,
        "omega": a.minimizer, "beta": beta.value, "rho_hat": s_rho,
        "c_gauss": constants.c_gauss,
    })


def _band_mass(ds: float) -> float:
    # Gaussian mass of a slab of half-width ds around any hyperplane
    return 2.0 * ds * INV_SQRT2PI


@njit(cache=True)
def _covering_sums(X, W, e, er, unc_e, unc_r, dirs, s, r, h):
    # per direction: gamma(Er \ H_{w,s+r}), gamma(E \ H_{w,s}) and the
    # uncertain content of each, the half-space raster contributing the
    # band |<x,w> - t| < h max|w_i| around its boundary
    k = dirs.shape[0]
    out = np.zeros((k, 4))
    for j in range(k):
        band = h * max(abs(dirs[j, 0]), abs(dirs[j, 1]))
        if dirs.shape[1] == 3:
            band = max(band, h * abs(dirs[j, 2]))
        lv = 0.0
        rv = 0.0
        lu = 0.0
        ru = 0.0
        for i in range(X.shape[0]):
            p = 0.0
            for c in range(X.shape[1]):
                p += X[i, c] * dirs[j, c]
            w = W[i]
            if er[i] and p >= s + r:
                lv += w
            if e[i] and p >= s:
                rv += w
            if unc_r[i] or abs(p - (s + r)) < band:
                lu += w
            if unc_e[i] or abs(p - s) < band:
                ru += w
        out[j, 0] = lv
        out[j, 1] = rv
        out[j, 2] = lu
        out[j, 3] = ru
    return out


def covering_sweep(E: GridSet, r: float, directions: np.ndarray | None = None) -> list[DeficitReport]:
    """``gamma((E + B_r) \\ H_{w,s+r}) >= e^{-s^+}/5 gamma(E \\ H_{w,s})`` for many ``w``.

    Each direction costs one pass over the window. The half-space raster
    error uses its interface band ``|<x,w> - t| < h max|w_i|``.
    """
    r = _positive(r)
    if r > 1.0:
        raise InvalidArgumentError(f"the covering estimate needs r <= 1, got {r}")
    s, g = _mass_offset(E)
    ds = offset_uncertainty(g, s)
    dirs = search_directions(E.n) if directions is None else np.atleast_2d(np.asarray(directions, float))
    Er = enlarge_ball(E, r)
    spec = E.spec
    sums = _covering_sums(
        np.ascontiguousarray(spec.points().reshape(-1, spec.n)),
        np.ascontiguousarray(cell_weights(spec).ravel()),
        E.mask.ravel(), Er.mask.ravel(), E.layer().ravel(), Er.layer().ravel(),
        np.ascontiguousarray(dirs, dtype=np.float64), s, r, spec.h)
    # mass beyond the window is not split by direction; charge all of it
    tail = max(1.0 - window_mass(spec), 0.0)
    factor = math.exp(-max(s, 0.0)) / 5.0
    reports = []
    for w, (lhs_v, rhs_v, lhs_u, rhs_u) in zip(dirs, sums):
        lhs = MeasureEstimate(float(lhs_v), 0.5 * float(lhs_u) + _band_mass(ds) + tail)
        rhs_err = 0.5 * float(rhs_u) + _band_mass(ds) + tail
        rhs = MeasureEstimate(factor * float(rhs_v), factor * rhs_err)
        reports.append(DeficitReport(COVERING, lhs, rhs, {
            "s": s, "r": r, "omega": tuple(float(v) for v in w), "factor": factor,
        }))
    return reports


def covering_lemma_check(E: GridSet, omega: Sequence[float], r: float) -> DeficitReport:
    """Covering estimate for a single direction ``omega``."""
    w = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(w) - 1.0) > 1e-12 or w.size != E.n:
        raise InvalidArgumentError("omega must be a unit vector of the grid dimension")
    return covering_sweep(E, r, w[None, :])[0]


def worst(reports: Iterable[DeficitReport]) -> DeficitReport:
    """Report with the smallest margin ``slack + tolerance``; first wins ties."""
    best = None
    for rep in reports:
        if best is None or rep.slack + rep.tolerance < best.slack + best.tolerance:
            best = rep
    if best is None:
        raise InvalidArgumentError("no reports given")
    return best


def _riemann(values: Sequence[MeasureEstimate], d_rho: float, scale: float) -> MeasureEstimate:
    vals = np.array([v.value for v in values])
    errs = np.array([v.err + v.bias for v in values])
    variation = float(np.sum(np.abs(np.diff(vals))))
    total = scale * d_rho * float(np.sum(vals))
    err = scale * d_rho * (float(np.sum(errs)) + variation)
    return MeasureEstimate(total, err)


def layercake_check(E: GridSet, r: float, steps: int = 8, K: ConvexBody | None = None) -> DeficitReport:
    """Layer-cake lower bound for the growth of a set.

    Gaussian (``K`` is None): ``gamma(E+B_r) - gamma(E) >= (2 pi)^-1/2 int_0^r P_gamma(E+B_rho)``.
    Euclidean: ``|E+rK| - |E| >= int_0^r P_K(E + rho K)``. The integral is a
    left-endpoint Riemann sum; the tolerance includes the observed variation
    of the perimeter between nodes.
    """
    r = _positive(r)
    if steps < 4:
        raise InvalidArgumentError(f"need at least 4 steps, got {steps}")
    d_rho = r / steps
    hq = 4.0 * E.spec.h
    nodes = [k * d_rho for k in range(steps)]
    if K is None:
        field_ = DistanceField(E, r + hq)
        perims = [gaussian_perimeter_from_field(field_, rho, hq) for rho in nodes]
        base = gaussian_measure(E)
        grown = gaussian_measure(field_.enlargement(r))
        lhs = grown - base
        rhs = _riemann(perims, d_rho, INV_SQRT2PI)
        ident = GAUSS_LAYERCAKE
    else:
        sets = [E] + [enlarge_convex(E, K, rho) for rho in nodes[1:]]
        perims = [anisotropic_perimeter(S, K, hq) for S in sets]
        grown = volume(enlarge_convex(E, K, r))
        base = volume(E)
        lhs = grown - base
        rhs = _riemann(perims, d_rho, 1.0)
        ident = EUCLID_LAYERCAKE
    lhs = MeasureEstimate(lhs.value, lhs.err)
    return DeficitReport(ident, lhs, rhs, {
        "r": r, "steps": steps, "quotient_step": hq,
        "perimeters": tuple(p.value for p in perims),
    })


# Euclidean checks -----------------------------------------------------------

def _check_volume(E: GridSet, K: ConvexBody) -> MeasureEstimate:
    vol = volume(E)
    if abs(vol.value - K.volume) > max(vol.err, VOLUME_RTOL * K.volume):
        raise VolumeMismatchError(f"|E| = {vol.value} +- {vol.err} but |K| = {K.volume}")
    return vol


def euclid_deficit_report(E: GridSet, K: ConvexBody, r: float, constants: Constants = Constants(),
                          alpha: AsymmetryResult | None = None) -> DeficitReport:
    """``|E + rK| - |(1+r)K| >= c_n max(r^{n-1}, r) alpha^2 / |E|``."""
    r = _positive(r)
    vol = _check_volume(E, K)
    grown = volume(enlarge_convex(E, K, r))
    n = E.n
    target = (1.0 + r) ** n * K.volume
    # |E| may differ from |K| by vol.err; the comparison body scales with it
    lhs = MeasureEstimate(grown.value - target, grown.err + (1.0 + r) ** n * vol.err)
    a = alpha_convex(E, K) if alpha is None else alpha
    c = constants.euclid(n)
    coef = c * max(r ** (n - 1), r) / vol.value
    rhs_val = coef * a.value ** 2
    rhs_err = coef * (2.0 * a.value * a.err + a.err ** 2) + rhs_val * vol.err / max(vol.value - vol.err, 1e-300)
    return DeficitReport(EUCLID_CONCENTRATION, lhs, MeasureEstimate(rhs_val, rhs_err), {
        "r": r, "volume": vol.value, "alpha": a.value, "alpha_err": a.err,
        "translation": a.minimizer, "c_n": c,
    })


def monotone_cover_check(E: GridSet, K: ConvexBody, r: float) -> DeficitReport:
    """``|(E + rK) \\ (1+r)K| >= |E \\ K|``."""
    r = _positive(r)
    _check_volume(E, K)
    Kr = rasterize(K, E.spec)
    grown_K = rasterize(K.scaled(1.0 + r), E.spec)
    lhs = volume(enlarge_convex(E, K, r) - grown_K)
    rhs = volume(E - Kr)
    return DeficitReport(MONOTONE_COVER, lhs, rhs, {"r": r})


def bm_report(E: GridSet, F: ConvexBody, constants: Constants = Constants(),
              alpha: AsymmetryResult | None = None) -> DeficitReport:
    """``|E+F|^{1/n} - |E|^{1/n} - |F|^{1/n} >= c_n min(|E|,|F|)^{1/n} alpha^2(E,F) / |E|^2``."""
    n = E.n
    vol = volume(E)
    if vol.value <= 0:
        raise InvalidArgumentError("Brunn-Minkowski check of an empty set")
    sum_ = volume(enlarge_convex(E, F, 1.0))
    root = 1.0 / n
    vF = F.volume

    def droot(v, dv):
        return root * max(v - dv, 1e-300) ** (root - 1.0) * dv

    lhs_val = sum_.value ** root - vol.value ** root - vF ** root
    lhs_err = droot(sum_.value, sum_.err) + droot(vol.value, vol.err)
    a = alpha_convex(E, F) if alpha is None else alpha
    c = constants.euclid(n)
    m_ = min(vol.value, vF)
    coef = c * m_ ** root / vol.value ** 2
    rhs_val = coef * a.value ** 2
    rel = (1.0 + vol.err / max(vol.value - vol.err, 1e-300)) ** 2 - 1.0
    rhs_err = coef * (2.0 * a.value * a.err + a.err ** 2) + rel * rhs_val
    return DeficitReport(BRUNN_MINKOWSKI, MeasureEstimate(lhs_val, lhs_err),
                         MeasureEstimate(rhs_val, rhs_err), {
                             "volume_E": vol.value, "volume_F": vF, "volume_sum": sum_.value,
                             "alpha": a.value, "alpha_err": a.err, "c_n": c,
                         })


# sharpness ----------------------------------------------------------------------

def sharpness_fit(points: Sequence[tuple[float, float]], min_points: int = 5) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log(deficit)`` against ``log(alpha)``."""
    if len(points) < min_points:
        raise InvalidArgumentError(f"need at least {min_points} points, got {len(points)}")
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgumentError("points must be (alpha, deficit) pairs")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidArgumentError("alpha and deficit must be positive and finite")
    slope, intercept = np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 1]), 1)
    return float(slope), float(intercept)
