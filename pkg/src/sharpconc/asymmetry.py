"""Fraenkel asymmetries, strong asymmetry and the equivalent offset.

The Gaussian asymmetry minimizes ``gamma(E xor H_{w,s})`` over directions:
a coarse enumeration of the sphere (256 angles in the plane, a level-3
icosphere in space), then a local refinement (golden section in the plane,
compass search on the sphere). The Euclidean asymmetry scans integer
translations by FFT cross-correlation and then refines at sub-cell shifts
with a compass search on re-rasterized copies of ``sK``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .errors import DegenerateMassError, InvalidArgumentError, WindowOverflowError
from .gauss1d import density, phi_inv
from .grid import GridSet, GridSpec, rasterize
from .measures import (MeasureEstimate, cell_weights, gauss_barycenter, gaussian_measure,
                       sym_diff_measure, volume)
from .morphology import enlarge_ball
from .regions import ConvexBody, HalfSpace, Translated

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
COARSE_ANGLES = 256
ANGLE_TOL = 1e-4
_CHUNK = 16


@dataclass(frozen=True)
class AsymmetryResult:
    value: float
    err: float
    minimizer: tuple[float, ...]
    evaluations: int
    final_step: float
    scan_boundary_hit: bool = False


# sphere directions ----------------------------------------------------------

def circle_directions(k: int = COARSE_ANGLES) -> np.ndarray:
    t = 2.0 * np.pi * np.arange(k) / k
    d = np.column_stack([np.cos(t), np.sin(t)])
    d[0] = (1.0, 0.0)
    return d


@lru_cache(maxsize=4)
def icosphere(level: int = 3) -> np.ndarray:
    """Vertices of a subdivided icosahedron on the unit sphere (642 at level 3)."""
    p = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0), (0, -1, p), (0, 1, p),
             (0, -1, -p), (0, 1, -p), (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    pts = [np.asarray(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                v = pts[a] + pts[b]
                pts.append(v / np.linalg.norm(v))
                cache[key] = len(pts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    out = np.array(pts)
    out.flags.writeable = False
    return out


def search_directions(n: int) -> np.ndarray:
    """Coarse direction grid used by the Gaussian searches."""
    if n == 2:
        return circle_directions()
    # put e1 first so ties favor the coordinate direction
    d = np.array(icosphere(3))
    d = np.vstack([[1.0, 0.0, 0.0], d[~np.all(np.isclose(d, [1.0, 0.0, 0.0]), axis=1)]])
    return d


# fast half-space scans ---------------------------------------------------------

class HalfspaceScanner:
    """In-window ``gamma(E xor H_{w,t})`` for many directions at once."""

    def __init__(self, E: GridSet):
        self.E = E
        self.W = cell_weights(E.spec).ravel()
        self.X = E.spec.points().reshape(-1, E.n)
        self.e = E.mask.ravel()
        self.We = self.W * self.e
        self.total_e = float(self.We.sum())
        self.evaluations = 0

    def sym_diff(self, directions: np.ndarray, t: float) -> np.ndarray:
        directions = np.atleast_2d(directions)
        out = np.empty(len(directions))
        for i in range(0, len(directions), _CHUNK):
            blk = directions[i:i + _CHUNK]
            inside = (self.X @ blk.T) < t
            out[i:i + _CHUNK] = self.total_e + self.W @ inside - 2.0 * (self.We @ inside)
        self.evaluations += len(directions)
        return out


def _golden(f, a: float, b: float, tol: float) -> tuple[float, float, int]:
    """Golden-section search for a minimum of ``f`` on ``[a, b]``."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        elif fd < fc:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        else:
            # plateau: keep the middle section
            a, b = c, d
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)
            fc, fd = f(c), f(d)
            evals += 1
        evals += 1
    x = 0.5 * (a + b)
    return x, f(x), evals + 1


def _tangent_basis(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.eye(3)[int(np.argmin(np.abs(w)))]
    u = np.cross(w, a)
    u /= np.linalg.norm(u)
    return u, np.cross(w, u)


def _compass_sphere(f, w0: np.ndarray, f0: float, step: float, tol: float):
    w, fw, evals = w0, f0, 0
    while step > tol:
        u, v = _tangent_basis(w)
        moved = False
        for d in (u, -u, v, -v):
            cand = math.cos(step) * w + math.sin(step) * d
            cand /= np.linalg.norm(cand)
            fc = f(cand)
            evals += 1
            if fc < fw:
                w, fw, moved = cand, fc, True
                break
        if not moved:
            step *= 0.5
    return w, fw, evals, step


def _mass_offset(E: GridSet) -> tuple[float, MeasureEstimate]:
    g = gaussian_measure(E)
    if g.value - g.err <= 0.0 or g.value + g.err >= 1.0 or not 0.0 < g.value < 1.0:
        raise DegenerateMassError(f"gamma(E) = {g.value} +- {g.err} is not inside (0, 1)")
    return phi_inv(g.value), g


def offset_uncertainty(g: MeasureEstimate, s: float) -> float:
    """Bound on the error of ``s = phi_inv(gamma(E))`` induced by ``g.err``."""
    lo, hi = max(g.value - g.err, 1e-300), min(g.value + g.err, 1.0 - 1e-16)
    return max(abs(phi_inv(lo) - s), abs(phi_inv(hi) - s)) if lo < hi else 0.0


def alpha_gauss(E: GridSet) -> AsymmetryResult:
    """``min_w gamma(E xor H_{w,s})`` with ``gamma(E) = phi(s)``."""
    s, _ = _mass_offset(E)
    scan = HalfspaceScanner(E)
    dirs = search_directions(E.n)
    coarse = scan.sym_diff(dirs, s)
    k = int(np.argmin(coarse))  # first index wins ties
    best_w, best_f = dirs[k], float(coarse[k])
    if E.n == 2:
        theta0 = math.atan2(best_w[1], best_w[0])
        span = 2.0 * np.pi / COARSE_ANGLES

        def f(theta):
            return float(scan.sym_diff(np.array([[math.cos(theta), math.sin(theta)]]), s)[0])

        theta, ft, _ = _golden(f, theta0 - span, theta0 + span, ANGLE_TOL)
        final_step = ANGLE_TOL
        if ft < best_f:
            best_w, best_f = np.array([math.cos(theta), math.sin(theta)]), ft
    else:
        def f(w):
            return float(scan.sym_diff(w[None, :], s)[0])

        w, fw, _, final_step = _compass_sphere(f, np.asarray(best_w, float), best_f, 0.1, ANGLE_TOL)
        if fw < best_f:
            best_w, best_f = w, fw
    omega = tuple(float(v) for v in best_w / np.linalg.norm(best_w))
    final = sym_diff_measure(E, rasterize(HalfSpace(omega, s), E.spec), "gauss")
    return AsymmetryResult(final.value, final.err, omega, scan.evaluations + 1, final_step)


def beta_strong(E: GridSet) -> MeasureEstimate:
    """``min_w |b(E) - b(H_{w,s})| = | |b(E)| - density(s) |``."""
    s, g = _mass_offset(E)
    bary = gauss_barycenter(E)
    radius = density(s)
    norm = bary.norm
    value = abs(norm - radius) if norm > 0.0 else radius
    ds = offset_uncertainty(g, s)
    return MeasureEstimate(value, bary.err + abs(s) * radius * ds + 0.5 * radius * ds * ds)


def equivalent_offset(E: GridSet, rho: float) -> MeasureEstimate:
    """``rho_hat = phi_inv(gamma(E + B_rho)) - s``."""
    s, g = _mass_offset(E)
    grown = gaussian_measure(enlarge_ball(E, rho))
    if not 0.0 < grown.value < 1.0:
        raise DegenerateMassError(f"gamma(E + B_rho) = {grown.value} is not inside (0, 1)")
    s_rho = phi_inv(grown.value)
    err = offset_uncertainty(grown, s_rho) + offset_uncertainty(g, s)
    return MeasureEstimate(s_rho - s, err)


# Euclidean asymmetry ------------------------------------------------------------

def _centroid(mask: np.ndarray) -> np.ndarray:
    idx = np.argwhere(mask)
    return idx.mean(axis=0)


def alpha_convex(E: GridSet, K: ConvexBody) -> AsymmetryResult:
    """``inf_x |(E + x) xor sK|`` with ``s = (|E| / |K|)^(1/n)``.

    The reported minimizer is the translation ``x``.
    """
    if E.outside is not None:
        raise InvalidArgumentError("Euclidean asymmetry needs a bounded set")
    if K.n != E.n:
        raise InvalidArgumentError("body and grid dimensions differ")
    vol = volume(E)
    if vol.value <= 0:
        raise InvalidArgumentError("Euclidean asymmetry of an empty set")
    spec = E.spec
    scale = (vol.value / K.volume) ** (1.0 / spec.n)
    sK = K.scaled(scale)
    S = rasterize(sK, spec)
    if not S.mask.any():
        raise InvalidArgumentError("the scaled body is smaller than one cell")
    # overlap(t) = sum_x E(x) S(x - t) for integer shifts t
    flipped = S.mask[(slice(None, None, -1),) * spec.n].astype(np.float64)
    corr = fftconvolve(E.mask.astype(np.float64), flipped, mode="full")
    corr = np.rint(corr)
    origin = np.array([spec.m - 1] * spec.n)  # index of zero shift
    guess = np.rint(_centroid(E.mask) - _centroid(S.mask)).astype(int)
    radius = spec.m // 4
    lo = np.maximum(origin + guess - radius, 0)
    hi = np.minimum(origin + guess + radius + 1, corr.shape[0])
    window = corr[tuple(slice(a, b) for a, b in zip(lo, hi))]
    flat = int(np.argmax(window))  # first index wins ties
    best = np.array(np.unravel_index(flat, window.shape)) + lo
    shift = best - origin
    boundary_hit = bool(np.any(np.abs(shift - guess) >= radius))
    h = spec.h
    evals = int(window.size)

    def cost(t: np.ndarray) -> float:
        try:
            T = rasterize(Translated(sK, tuple(t)), spec)
        except WindowOverflowError:
            return math.inf
        return float(np.count_nonzero(E.mask ^ T.mask))

    t = shift.astype(float) * h
    ft = cost(t)
    evals += 1
    step = 0.5 * h
    eye = np.eye(spec.n)
    while step >= h / 64.0:
        moved = False
        for d in np.vstack([eye, -eye]):
            cand = t + step * d
            fc = cost(cand)
            evals += 1
            if fc < ft:
                t, ft, moved = cand, fc, True
                break
        if not moved:
            step *= 0.5
    T = rasterize(Translated(sK, tuple(t)), spec)
    final = sym_diff_measure(E, T, "lebesgue")
    return AsymmetryResult(final.value, final.err, tuple(float(-v) for v in t), evals,
                           step, boundary_hit)


def alpha_pair(E: GridSet, F: ConvexBody) -> float:
    """``alpha(E, F)``: the asymmetry of ``E`` against the body ``F``."""
    return alpha_convex(E, F).value
