"""Figures of merit computed from far-field maps.

Collection efficiency is the sin(theta)-weighted intensity fraction inside
the aperture cone theta <= arcsin(NA), scaled by the extraction efficiency
eta_ex that carries everything the hemisphere model does not resolve
(downward emission, absorption).  Gaussian overlap scores mode matching to
an axis-centered circularly polarized Gaussian beam.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dipole import FarFieldMap

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

WAIST_RANGE = (0.01, 1.2)
WAIST_TOL = 1e-4


class ZeroIntensityError(ValueError):
    """Raised when a ratio over an all-zero intensity map is requested."""


class RefinementWarning(UserWarning):
    """Hemisphere grid too coarse: halving it moved eta_col by >= 0.2%."""


def _phi_weights(phi: np.ndarray) -> np.ndarray:
    """Periodic trapezoid weights on [0, 2*pi); uniform grids get 2*pi/n."""
    n = len(phi)
    if n == 1:
        return np.array([2.0 * np.pi])
    fwd = np.diff(phi, append=phi[0] + 2.0 * np.pi)
    back = np.roll(fwd, 1)
    return 0.5 * (fwd + back)


def _ring_integrand(fmap: FarFieldMap) -> np.ndarray:
    """F(theta_i) = integral over phi of I sin(theta) at each theta node."""
    return (fmap.intensity @ _phi_weights(fmap.phi)) * np.sin(fmap.theta)


def _cone_integral(theta: np.ndarray, f: np.ndarray, theta_a: float) -> float:
    """Trapezoid of f over [theta[0], theta_a] with linear partial-cell cut."""
    if theta_a >= theta[-1]:
        return float(np.trapezoid(f, theta))
    i = int(np.searchsorted(theta, theta_a, side="right")) - 1
    total = float(np.trapezoid(f[:i + 1], theta[:i + 1])) if i >= 1 else 0.0
    if theta_a > theta[i]:
        frac = (theta_a - theta[i]) / (theta[i + 1] - theta[i])
        f_cut = f[i] + frac * (f[i + 1] - f[i])
        total += 0.5 * (f[i] + f_cut) * (theta_a - theta[i])
    return total


def collection_efficiency(fmap: FarFieldMap, na: float, eta_ex: float = 1.0) -> float:
    """eta_col = eta_ex * (intensity inside arcsin(NA)) / (hemisphere total)."""
    if not 0 <= na <= 1:
        raise ValueError(f"NA must lie in [0, 1], got {na}")
    if not 0 <= eta_ex <= 1:
        raise ValueError(f"eta_ex must lie in [0, 1], got {eta_ex}")
    f = _ring_integrand(fmap)
    total = float(np.trapezoid(f, fmap.theta))
    if total <= 0:
        raise ZeroIntensityError("far-field map carries no intensity; "
                                 "collection ratio undefined")
    return eta_ex * _cone_integral(fmap.theta, f, float(np.arcsin(na))) / total


def efficiency_curve(fmap: FarFieldMap, eta_ex: float,
                     na_grid: np.ndarray) -> np.ndarray:
    """(n, 2) array of (NA, eta_col) rows over an ascending NA grid."""
    na_grid = np.asarray(na_grid, dtype=float)
    if np.any(np.diff(na_grid) < 0) or na_grid[0] < 0 or na_grid[-1] > 1:
        raise ValueError("NA grid must be sorted ascending within [0, 1]")
    f = _ring_integrand(fmap)
    total = float(np.trapezoid(f, fmap.theta))
    if total <= 0:
        raise ZeroIntensityError("far-field map carries no intensity; "
                                 "collection ratio undefined")
    eta = [eta_ex * _cone_integral(fmap.theta, f, float(np.arcsin(v))) / total
           for v in na_grid]
    return np.column_stack([na_grid, eta])


def check_refinement(fmap: FarFieldMap, na: float, eta_ex: float = 1.0,
                     rel_tol: float = 0.002) -> tuple[float, float, bool]:
    """Compare eta_col on the stored grid against a half-resolution grid.

    Keeps the theta anchors (0, NA = 0.7 circle, requested NA) so the coarse
    map stays valid; warns with RefinementWarning when the relative change
    reaches rel_tol.  Returns (eta_full, eta_coarse, warned).
    """
    eta_full = collection_efficiency(fmap, na, eta_ex)
    idx = set(range(0, len(fmap.theta), 2))
    idx.add(len(fmap.theta) - 1)
    for anchor in (0.0, float(np.arcsin(0.7)), float(np.arcsin(na))):
        idx.add(int(np.argmin(np.abs(fmap.theta - anchor))))
    rows = sorted(idx)
    cols = list(range(0, len(fmap.phi), 2)) if len(fmap.phi) >= 2 else [0]
    coarse = FarFieldMap(fmap.theta[rows], fmap.phi[cols],
                         fmap.e_theta[np.ix_(rows, cols)],
                         fmap.e_phi[np.ix_(rows, cols)], fmap.peak)
    eta_coarse = collection_efficiency(coarse, na, eta_ex)
    scale = max(abs(eta_full), 1e-30)
    warned = abs(eta_full - eta_coarse) / scale >= rel_tol
    if warned:
        warnings.warn(f"hemisphere grid not converged: eta_col moved from "
                      f"{eta_coarse:.6g} to {eta_full:.6g} on refinement; "
                      f"increase the grid resolution", RefinementWarning,
                      stacklevel=2)
    return eta_full, eta_coarse, warned


def _gaussian_target(fmap: FarFieldMap, theta_w: float,
                     handed: int) -> tuple[np.ndarray, np.ndarray]:
    """Circular Gaussian beam components on the map grid.

    handed +1: (E_theta, E_phi) = g e^{i phi} (1, i); handed -1 conjugates
    the azimuthal winding and flips the phi-component sign.
    """
    g = np.exp(-(fmap.theta / theta_w) ** 2)[:, None]
    wind = np.exp(1j * handed * fmap.phi)[None, :]
    t_theta = g * wind
    t_phi = 1j * handed * g * wind
    return t_theta, t_phi


def gaussian_overlap(fmap: FarFieldMap) -> tuple[float, float]:
    """Best modal overlap with an axis-centered circular Gaussian beam.

    overlap(theta_w) = |<E, G>|^2 / (<E, E> <G, G>) with sin(theta)-weighted
    hemisphere inner products; the Gaussian's circular polarization follows
    the map's dominant on-axis handedness; theta_w maximized by golden-
    section search on [0.01, 1.2] rad to 1e-4 rad.  Returns (overlap, waist).
    """
    w_phi = _phi_weights(fmap.phi)
    w_theta = np.zeros(len(fmap.theta))
    dt = np.diff(fmap.theta)
    w_theta[:-1] += 0.5 * dt
    w_theta[1:] += 0.5 * dt
    weights = (w_theta * np.sin(fmap.theta))[:, None] * w_phi[None, :]
    e_norm = float(np.sum(weights * fmap.intensity))
    if e_norm <= 0:
        raise ZeroIntensityError("far-field map carries no intensity; "
                                 "overlap undefined")
    ring = 1 if len(fmap.theta) > 1 else 0
    phase = np.exp(-1j * fmap.phi)
    a_l = np.sum(phase * (fmap.e_theta[ring] - 1j * fmap.e_phi[ring]))
    a_r = np.sum(np.conj(phase) * (fmap.e_theta[ring] + 1j * fmap.e_phi[ring]))
    handed = 1 if abs(a_l) >= abs(a_r) else -1

    def objective(theta_w: float) -> float:
        t_theta, t_phi = _gaussian_target(fmap, theta_w, handed)
        inner = np.sum(weights * (np.conj(t_theta) * fmap.e_theta
                                  + np.conj(t_phi) * fmap.e_phi))
        g_norm = np.sum(weights * (np.abs(t_theta) ** 2 + np.abs(t_phi) ** 2))
        return float(abs(inner) ** 2 / (e_norm * g_norm))

    lo, hi = WAIST_RANGE
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > WAIST_TOL:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = objective(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = objective(x1)
    best = 0.5 * (lo + hi)
    return objective(best), best


def total_efficiency(eta_zpl: float, eta_col: float) -> float:
    """eta_tot = eta_zpl * eta_col."""
    for name, v in (("eta_zpl", eta_zpl), ("eta_col", eta_col)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return eta_zpl * eta_col


@dataclass(frozen=True)
class EfficiencyReport:
    """Scalar figures of merit plus the eta_col(NA) curve for one run."""

    eta_zpl: float
    eta_ex: float
    na: float
    eta_col: float
    overlap_gauss: float
    eta_tot: float
    curve: np.ndarray = field(repr=False)
    best_waist: float = float("nan")

    def __post_init__(self):
        for name in ("eta_zpl", "eta_ex", "eta_col", "overlap_gauss", "eta_tot"):
            v = getattr(self, name)
            if not 0 <= v <= 1 + 1e-12:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not 0 <= self.na <= 1:
            raise ValueError(f"na must lie in [0, 1], got {self.na}")
        if abs(self.eta_tot - self.eta_zpl * self.eta_col) > 1e-12:
            raise ValueError("eta_tot must equal eta_zpl * eta_col")
        curve = np.asarray(self.curve, dtype=float)
        if curve.ndim != 2 or curve.shape[1] != 2:
            raise ValueError(f"curve must be (n, 2) of (NA, eta_col), got {curve.shape}")
        if np.any(np.diff(curve[:, 1]) < -1e-12):
            raise ValueError("curve must be monotone nondecreasing in NA")
        for na_val, eta in curve:
            if na_val == 0.0 and abs(eta) > 1e-9:
                raise ValueError("curve must satisfy eta_col(0) = 0")
            if na_val == 1.0 and abs(eta - self.eta_ex) > 1e-9:
                raise ValueError("curve must satisfy eta_col(1) = eta_ex")
        object.__setattr__(self, "curve", curve)


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def write_report_json(report: EfficiencyReport, path) -> None:
    """Flat JSON document of the scalar figures of merit."""
    doc = {
        "eta_zpl": _round12(report.eta_zpl),
        "eta_ex": _round12(report.eta_ex),
        "na": _round12(report.na),
        "eta_col": _round12(report.eta_col),
        "overlap_gauss": _round12(report.overlap_gauss),
        "eta_tot": _round12(report.eta_tot),
        "best_waist": _round12(report.best_waist),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curve_csv(curve: np.ndarray, path) -> None:
    """CSV with columns NA, eta_col."""
    with open(path, "w") as fh:
        fh.write("NA,eta_col\n")
        for na_val, eta in np.asarray(curve, dtype=float):
            fh.write(f"{na_val:.12g},{eta:.12g}\n")
