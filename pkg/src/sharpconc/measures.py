"""Gaussian and Lebesgue measures of grid sets, perimeters and barycenters.

Every cell is integrated exactly: its Gaussian content is the product of
1-D interval masses. The only discretization error left is the
cell-center membership rule, bounded by half the content of the cells
marked uncertain (the interface layer). Mass beyond the window comes from
the outside policy, exactly when the policy depends on a single axis and
as a tail bound otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridSpecError, InvalidArgumentError
from .gauss1d import INV_SQRT2PI, SQRT2PI, density, phi_interval
from .grid import GridSet, GridSpec
from .morphology import DistanceField, enlarge_convex
from .regions import ConvexBody, Region


@dataclass(frozen=True)
class MeasureEstimate:
    """A value with an absolute error bound.

    ``bias`` is reported separately for quotient-based quantities: an
    estimate of the first-order truncation error that the bound ``err``
    does not cover.
    """

    value: float
    err: float
    bias: float = 0.0

    def __post_init__(self):
        if not (self.err >= 0 and math.isfinite(self.err)):
            raise InvalidArgumentError(f"error bound must be finite and >= 0, got {self.err!r}")

    @property
    def lo(self) -> float:
        return self.value - self.err

    @property
    def hi(self) -> float:
        return self.value + self.err

    def __sub__(self, other: "MeasureEstimate") -> "MeasureEstimate":
        return MeasureEstimate(self.value - other.value, self.err + other.err,
                               self.bias + other.bias)

    def __add__(self, other: "MeasureEstimate") -> "MeasureEstimate":
        return MeasureEstimate(self.value + other.value, self.err + other.err,
                               self.bias + other.bias)


@dataclass(frozen=True)
class Barycenter:
    """Non-renormalized Gaussian first moment ``int_E x dgamma``."""

    b: tuple[float, ...]
    err: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.b))


# per-axis weights --------------------------------------------------------------

@lru_cache(maxsize=16)
def _axis_weights(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    e = spec.axis_edges()
    w = phi_interval(e[:-1], e[1:])
    mom = density(e[:-1]) - density(e[1:])
    w.flags.writeable = False
    mom.flags.writeable = False
    return w, mom


def _contract(mask: np.ndarray, *weights: np.ndarray) -> float:
    m = mask.astype(np.float64)
    if m.ndim == 2:
        return float(weights[0] @ m @ weights[1])
    return float(np.einsum("i,j,k,ijk->", weights[0], weights[1], weights[2], m))


def cell_weights(spec: GridSpec) -> np.ndarray:
    """Gaussian content of every cell, shape ``spec.shape``."""
    w, _ = _axis_weights(spec)
    out = w
    for _ in range(spec.n - 1):
        out = np.multiply.outer(out, w)
    return out


def window_mass(spec: GridSpec) -> float:
    return phi_interval(-spec.R, spec.R) ** spec.n


def _interval_mass(ivs) -> float:
    return float(sum(phi_interval(lo, hi) for lo, hi in ivs))


def _interval_moment(ivs) -> float:
    # int t dgamma(t) over a union of intervals
    return float(sum(density(lo) - density(hi) for lo, hi in ivs))


def _clip(ivs, R: float):
    out = []
    for lo, hi in ivs:
        a, b = max(lo, -R), min(hi, R)
        if a < b:
            out.append((a, b))
    return out


def outside_mass(outside: Region | None, spec: GridSpec) -> MeasureEstimate:
    """Gaussian mass of ``outside`` minus the window."""
    if outside is None:
        return MeasureEstimate(0.0, 0.0)
    tail = max(1.0 - window_mass(spec), 0.0)
    ax = outside.axis_intervals()
    if ax is None:
        return MeasureEstimate(0.5 * tail, 0.5 * tail)
    _, ivs = ax
    inner = _interval_mass(_clip(ivs, spec.R)) * phi_interval(-spec.R, spec.R) ** (spec.n - 1)
    value = max(_interval_mass(ivs) - inner, 0.0)
    return MeasureEstimate(value, 4e-16 * spec.n)


def gaussian_measure(E: GridSet) -> MeasureEstimate:
    """``gamma(E)`` with discretization and tail error."""
    w, _ = _axis_weights(E.spec)
    ws = (w,) * E.n
    inside = _contract(E.mask, *ws)
    err = 0.5 * _contract(E.uncertain_cells(), *ws)
    tail = outside_mass(E.outside, E.spec)
    value = min(max(inside + tail.value, 0.0), 1.0)
    return MeasureEstimate(value, err + tail.err)


def volume(E: GridSet) -> MeasureEstimate:
    """Lebesgue measure ``|E|``; the set must be empty outside the window."""
    if E.outside is not None:
        raise InvalidArgumentError("volume needs a bounded set (empty outside policy)")
    cell = E.spec.h ** E.n
    count = int(np.count_nonzero(E.mask))
    unc = int(np.count_nonzero(E.uncertain_cells()))
    return MeasureEstimate(count * cell, 0.5 * unc * cell)


def sym_diff_measure(E: GridSet, F: GridSet, weight: str = "gauss") -> MeasureEstimate:
    """Measure of ``E`` xor ``F`` under ``weight`` in {"gauss", "lebesgue"}."""
    if E.spec != F.spec:
        raise GridSpecError("symmetric difference of sets on different grids")
    D = E ^ F
    if weight == "gauss":
        return gaussian_measure(D)
    if weight == "lebesgue":
        return volume(D)
    raise InvalidArgumentError(f"unknown weight {weight!r}")


def default_quotient_step(spec: GridSpec) -> float:
    return 4.0 * spec.h


def _check_step(spec: GridSpec, hq: float | None) -> float:
    hq = default_quotient_step(spec) if hq is None else float(hq)
    if not (math.isfinite(hq) and hq >= 2.0 * spec.h * (1 - 1e-12)):
        raise InvalidArgumentError(f"quotient step {hq} is below two cells ({2 * spec.h})")
    return hq


def gaussian_perimeter_from_field(field: DistanceField, rho: float, hq: float) -> MeasureEstimate:
    """Outer Minkowski quotient of ``E + B_rho`` read off one distance field."""
    base = gaussian_measure(field.enlargement(rho))
    grown = gaussian_measure(field.enlargement(rho + hq))
    half = gaussian_measure(field.enlargement(rho + 0.5 * hq))
    q = SQRT2PI * (grown.value - base.value) / hq
    q_half = SQRT2PI * (half.value - base.value) / (0.5 * hq)
    tails = SQRT2PI * (_tail_part(field.E, rho, field.spec) + _tail_part(field.E, rho + hq, field.spec)) / hq
    h = field.spec.h
    err = abs(q) * (0.5 * h) / hq + tails
    return MeasureEstimate(max(q, 0.0), err, 2.0 * abs(q - q_half))


def _tail_part(E: GridSet, rho: float, spec: GridSpec) -> float:
    if E.outside is None:
        return 0.0
    return outside_mass(E.outside.enlarged(rho) if rho > 0 else E.outside, spec).err


def gaussian_perimeter(E: GridSet, hq: float | None = None) -> MeasureEstimate:
    """``sqrt(2 pi) (gamma(E + B_hq) - gamma(E)) / hq``.

    ``err`` covers the half-cell rounding of the enlargement radius and the
    window tails; ``bias`` is twice the change of the quotient when the
    step is halved, a gauge of the first-order truncation error.
    """
    hq = _check_step(E.spec, hq)
    field = DistanceField(E, hq)
    return gaussian_perimeter_from_field(field, 0.0, hq)


def anisotropic_perimeter(E: GridSet, K: ConvexBody, hq: float | None = None) -> MeasureEstimate:
    """``(|E + hq K| - |E|) / hq`` for a bounded grid set."""
    hq = _check_step(E.spec, hq)
    base = volume(E).value
    grown = volume(enlarge_convex(E, K, hq)).value
    half = volume(enlarge_convex(E, K, 0.5 * hq)).value
    q = (grown - base) / hq
    q_half = (half - base) / (0.5 * hq)
    delta = K.half_cell(E.spec.h)
    return MeasureEstimate(q, abs(q) * delta / hq, 2.0 * abs(q - q_half))


def gauss_barycenter(E: GridSet) -> Barycenter:
    """``b(E) = int_E x dgamma`` from exact per-cell first moments."""
    spec = E.spec
    w, mom = _axis_weights(spec)
    unc = E.uncertain_cells()
    b = np.zeros(spec.n)
    err_vec = np.zeros(spec.n)
    for i in range(spec.n):
        ws = [w] * spec.n
        ws[i] = mom
        b[i] = _contract(E.mask, *ws)
        ws[i] = np.abs(mom)
        err_vec[i] = 0.5 * _contract(unc, *ws)
    err = float(np.linalg.norm(err_vec))
    if E.outside is not None:
        ax = E.outside.axis_intervals()
        if ax is not None:
            k, ivs = ax
            inner = _interval_moment(_clip(ivs, spec.R)) * phi_interval(-spec.R, spec.R) ** (spec.n - 1)
            b[k] += _interval_moment(ivs) - inner
        else:
            tail = max(1.0 - window_mass(spec), 0.0)
            err += math.sqrt(spec.n * tail)
    return Barycenter(tuple(float(v) for v in b), err)


def halfspace_barycenter(omega, s: float) -> np.ndarray:
    """Closed form ``b(H_{omega,s}) = -density(s) omega``."""
    return -density(s) * np.asarray(omega, dtype=float)


__all__ = [
    "MeasureEstimate", "Barycenter", "gaussian_measure", "volume", "sym_diff_measure",
    "gaussian_perimeter", "anisotropic_perimeter", "gauss_barycenter", "cell_weights",
    "window_mass", "outside_mass", "halfspace_barycenter", "default_quotient_step",
    "gaussian_perimeter_from_field", "INV_SQRT2PI",
]
