"""Exact point-dipole radiation, moment induction, and the two-layer cascade.

Lengths are in units of the vacuum wavelength, so k = 2*pi.  Physical
prefactors (omega, c, eps0) are folded into the dimensionless
polarizabilities, making fields and moments share one arbitrary scale.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import DeviceGeometry, ScattererLayer
from .nearfield import NearFieldSpec, sample_nearfield

TWO_PI = 2.0 * np.pi

# Observation points closer than this to a dipole indicate a geometry error.
SINGULARITY_GUARD = 1e-6

# Sphere radius where far-field maps are evaluated (spherical factor divided out).
R_FARFIELD = 1e4

# Chunked superposition keeps (obs x dipole) temporaries near this many pairs.
_PAIR_BUDGET = 1 << 19


class SingularFieldError(ValueError):
    """Raised when an observation point (nearly) coincides with a dipole."""


@dataclass(frozen=True)
class DipoleSet:
    """Point dipoles: positions (n, 3), complex moments (n, 3), wavenumber k."""

    positions: np.ndarray
    moments: np.ndarray
    k: float = TWO_PI

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        mom = np.asarray(self.moments, dtype=complex)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must be (n, 3), got {pos.shape}")
        if mom.shape != pos.shape:
            raise ValueError(f"moments shape {mom.shape} != positions shape {pos.shape}")
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(mom.view(float)))):
            raise ValueError("positions and moments must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "moments", mom)

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class FieldGrid:
    """Complex E vectors (n, 3) sampled at observation points (n, 3)."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        val = np.asarray(self.values, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (n, 3), got {pts.shape}")
        if val.shape != pts.shape:
            raise ValueError(f"values shape {val.shape} != points shape {pts.shape}")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(val.view(float)))):
            raise ValueError("points and values must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", val)


@dataclass(frozen=True)
class FarFieldMap:
    """Transverse far field on a (theta, phi) hemisphere grid.

    e_theta and e_phi are scaled so the peak of intensity = |E_theta|^2 +
    |E_phi|^2 is 1; the raw peak intensity before scaling is kept in `peak`
    so absolute comparisons between maps remain possible.
    """

    theta: np.ndarray
    phi: np.ndarray
    e_theta: np.ndarray
    e_phi: np.ndarray
    peak: float = 1.0

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        ph = np.asarray(self.phi, dtype=float)
        et = np.asarray(self.e_theta, dtype=complex)
        ep = np.asarray(self.e_phi, dtype=complex)
        if th.ndim != 1 or ph.ndim != 1:
            raise ValueError("theta and phi must be 1-d")
        if et.shape != (len(th), len(ph)) or ep.shape != et.shape:
            raise ValueError(f"field shape {et.shape} != grid ({len(th)}, {len(ph)})")
        if np.any(np.diff(th) <= 0) or th[0] < 0 or th[-1] > np.pi / 2 + 1e-12:
            raise ValueError("theta must increase strictly within [0, pi/2]")
        if th[0] != 0.0:
            raise ValueError("theta grid must include the on-axis sample theta = 0")
        theta_na = float(np.arcsin(0.7))
        if np.min(np.abs(th - theta_na)) > 1e-9:
            raise ValueError("theta grid must include the NA = 0.7 circle (arcsin 0.7)")
        if np.any(np.diff(ph) <= 0) or ph[0] < 0 or ph[-1] >= TWO_PI:
            raise ValueError("phi must increase strictly within [0, 2*pi)")
        if not (np.all(np.isfinite(et.view(float))) and np.all(np.isfinite(ep.view(float)))):
            raise ValueError("field components must be finite")
        if self.peak < 0 or not np.isfinite(self.peak):
            raise ValueError(f"peak must be finite and >= 0, got {self.peak}")
        for name, arr in (("theta", th), ("phi", ph), ("e_theta", et), ("e_phi", ep)):
            object.__setattr__(self, name, arr)

    @property
    def intensity(self) -> np.ndarray:
        """|E_theta|^2 + |E_phi|^2 per node (peak scaled to 1)."""
        return np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2

    @property
    def onaxis_raw_intensity(self) -> float:
        """Unnormalized intensity at theta = 0 (phi-independent there)."""
        return self.peak * float(np.mean(self.intensity[0]))


def hemisphere_grid(n_theta: int = 181, n_phi: int = 256,
                    na: float = 0.7) -> tuple[np.ndarray, np.ndarray]:
    """Uniform hemisphere grid with the on-axis, NA = 0.7, and `na` circles kept.

    theta spans [0, pi/2] with the anchor angles inserted exactly; phi is a
    uniform periodic grid on [0, 2*pi).
    """
    if n_theta < 2 or n_phi < 1:
        raise ValueError("need n_theta >= 2 and n_phi >= 1")
    if not 0 < na <= 1:
        raise ValueError(f"na must lie in (0, 1], got {na}")
    anchors = [0.0, float(np.arcsin(0.7)), float(np.arcsin(na))]
    theta = np.sort(np.concatenate([np.linspace(0.0, np.pi / 2, n_theta), anchors]))
    keep = np.concatenate([[True], np.diff(theta) > 1e-12])
    theta = theta[keep]
    phi = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    return theta, phi


def dipole_field_at(p: np.ndarray, src: np.ndarray, obs: np.ndarray,
                    k: float = TWO_PI) -> np.ndarray:
    """Exact field of one point dipole p at src, observed at obs.

    E = e^{ikR} [ k^2 (p - RR.p)/R + (3R(R.p) - p)(1/R^3 - ik/R^2) ] with
    R the source-to-observation distance and R-hat its direction; the
    1/4 pi eps0 prefactor is folded into the units.
    """
    p = np.asarray(p, dtype=complex)
    d = np.asarray(obs, dtype=float) - np.asarray(src, dtype=float)
    r = float(np.linalg.norm(d))
    if r < SINGULARITY_GUARD:
        raise SingularFieldError(
            f"observation point within {SINGULARITY_GUARD:g} of the dipole (R = {r:g})")
    u = d / r
    udp = complex(u @ p)
    near = 1.0 / r ** 3 - 1j * k / r ** 2
    rad = k ** 2 / r
    return np.exp(1j * k * r) * ((rad - near) * p + (3.0 * near - rad) * udp * u)


def induce_moments(layer: ScattererLayer,
                   incident: Callable[[np.ndarray], np.ndarray] | np.ndarray,
                   k: float = TWO_PI) -> DipoleSet:
    """Dipole moments p_n = alpha * E_incident(r_n), component-wise.

    `incident` is either a sampler mapping (n, 3) points to (n, 3) complex
    vectors, or a precomputed (n, 3) field array.
    """
    if len(layer) == 0:
        raise ValueError("layer has no scatterers")
    if callable(incident):
        fields = np.asarray(incident(layer.positions), dtype=complex)
    else:
        fields = np.asarray(incident, dtype=complex)
    if fields.shape != layer.positions.shape:
        raise ValueError(f"incident field shape {fields.shape} != positions "
                         f"shape {layer.positions.shape}")
    return DipoleSet(layer.positions, layer.alpha * fields, k)


def superpose_field(dipoles: DipoleSet, obs: np.ndarray) -> FieldGrid:
    """Sum of exact dipole fields at each observation point.

    Observation points are processed in chunks; the sum over dipoles runs in
    a fixed index order, so results are bitwise reproducible.
    """
    pts = np.atleast_2d(np.asarray(obs, dtype=float))
    if pts.shape[1] != 3:
        raise ValueError(f"obs must be (m, 3), got {pts.shape}")
    n = len(dipoles)
    k = dipoles.k
    mom = dipoles.moments
    out = np.empty((len(pts), 3), dtype=complex)
    chunk = max(1, _PAIR_BUDGET // max(1, n))
    for start in range(0, len(pts), chunk):
        o = pts[start:start + chunk]
        d = o[:, None, :] - dipoles.positions[None, :, :]
        r = np.sqrt(np.einsum("mnc,mnc->mn", d, d))
        if np.any(r < SINGULARITY_GUARD):
            i, j = np.unravel_index(int(np.argmin(r)), r.shape)
            raise SingularFieldError(
                f"observation point {start + i} within {SINGULARITY_GUARD:g} of "
                f"dipole {j} (R = {r[i, j]:g})")
        inv_r = 1.0 / r
        inv_r2 = inv_r * inv_r
        near = inv_r2 * (inv_r - 1j * k)
        rad = k ** 2 * inv_r
        phase = np.exp(1j * k * r)
        coeff_p = phase * (rad - near)
        # (R-hat (R-hat . p)) terms written via d (d . p) / r^2 so the unit
        # vectors are never materialized.
        dp = (d[:, :, 0] * mom[None, :, 0] + d[:, :, 1] * mom[None, :, 1]
              + d[:, :, 2] * mom[None, :, 2])
        coeff_d = phase * (3.0 * near - rad) * dp * inv_r2
        for c in range(3):
            out[start:start + chunk, c] = (
                np.einsum("mn,n->m", coeff_p, mom[:, c])
                + np.einsum("mn,mn->m", coeff_d, d[:, :, c]))
    return FieldGrid(pts, out)


def _farfield_vectors(dipoles: DipoleSet, theta: np.ndarray, phi: np.ndarray,
                      r_ff: float, asymptotic: bool) -> np.ndarray:
    """Cartesian far field on the (theta, phi) grid, spherical factor removed.

    Finite mode: exact fields on the radius-r_ff sphere times r_ff e^{-ik r_ff}.
    Asymptotic mode: radiation term only, E(d) = k^2 sum_n (p_n - d(d.p_n))
    e^{-ik d.r_n}, the r_ff -> infinity limit of the same scaling.
    """
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    st, ct = np.sin(tt).ravel(), np.cos(tt).ravel()
    sp, cp = np.sin(pp).ravel(), np.cos(pp).ravel()
    dirs = np.stack([st * cp, st * sp, ct], axis=1)
    if asymptotic:
        k = dipoles.k
        phases = np.exp(-1j * k * (dirs @ dipoles.positions.T))
        ddp = dirs @ dipoles.moments.T
        e = k ** 2 * (phases @ dipoles.moments
                      - dirs * np.sum(phases * ddp, axis=1, keepdims=True))
    else:
        grid = superpose_field(dipoles, r_ff * dirs)
        e = grid.values * (r_ff * np.exp(-1j * dipoles.k * r_ff))
    return e.reshape(len(theta), len(phi), 3)


def farfield_map(dipole_sets: list[DipoleSet], theta: np.ndarray, phi: np.ndarray,
                 r_ff: float = R_FARFIELD, asymptotic: bool = False) -> FarFieldMap:
    """Transverse-projected far field of one or more dipole sets, peak set to 1."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    total = np.zeros((len(theta), len(phi), 3), dtype=complex)
    for ds in dipole_sets:
        if len(ds):
            total += _farfield_vectors(ds, theta, phi, r_ff, asymptotic)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    theta_hat = np.stack([np.cos(tt) * np.cos(pp), np.cos(tt) * np.sin(pp),
                          -np.sin(tt)], axis=2)
    phi_hat = np.stack([-np.sin(pp), np.cos(pp), np.zeros_like(pp)], axis=2)
    e_theta = np.sum(total * theta_hat, axis=2)
    e_phi = np.sum(total * phi_hat, axis=2)
    raw_peak = float(np.max(np.abs(e_theta) ** 2 + np.abs(e_phi) ** 2))
    if raw_peak > 0:
        scale = 1.0 / np.sqrt(raw_peak)
        e_theta = e_theta * scale
        e_phi = e_phi * scale
    return FarFieldMap(theta, phi, e_theta, e_phi, raw_peak)


def cascade_two_layers(geom: DeviceGeometry, nearfield: NearFieldSpec,
                       layer1: ScattererLayer, layer2: ScattererLayer | None,
                       theta: np.ndarray, phi: np.ndarray,
                       r_ff: float = R_FARFIELD, include_direct: bool = True,
                       asymptotic: bool = False) -> FarFieldMap:
    """Near field -> layer-1 moments -> intermediate field -> layer-2 moments -> far field.

    Single-scattering cascade: layer-2 moments are induced by the exact
    layer-1 radiation with no back-action.  The far field superposes layer-2
    radiation with the direct layer-1 radiation unless include_direct is
    False (or layer2 is None, which gives the bare single-layer far field).
    """
    set1 = induce_moments(layer1, lambda pts: sample_nearfield(nearfield, pts))
    if layer2 is None:
        return farfield_map([set1], theta, phi, r_ff, asymptotic)
    if layer2.positions[:, 2].min() <= layer1.positions[:, 2].max():
        raise ValueError("layer 2 must sit strictly above layer 1 (z2 > z1)")
    intermediate = superpose_field(set1, layer2.positions)
    set2 = induce_moments(layer2, intermediate.values)
    sets = [set2, set1] if include_direct else [set2]
    return farfield_map(sets, theta, phi, r_ff, asymptotic)


def export_farfield(fmap: FarFieldMap, path) -> None:
    """CSV rows theta,phi,Re/Im E_theta,Re/Im E_phi,intensity (theta outer)."""
    inten = fmap.intensity
    with open(path, "w") as fh:
        fh.write("theta,phi,re_e_theta,im_e_theta,re_e_phi,im_e_phi,intensity\n")
        for i, th in enumerate(fmap.theta):
            for j, ph in enumerate(fmap.phi):
                et, ep = fmap.e_theta[i, j], fmap.e_phi[i, j]
                vals = (th, ph, et.real, et.imag, ep.real, ep.imag, inten[i, j])
                fh.write(",".join(f"{v:.12g}" for v in vals) + "\n")


def load_farfield(path, peak: float = 1.0) -> FarFieldMap:
    """Read a far-field CSV written by export_farfield."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["theta", "phi", "re_e_theta", "im_e_theta",
                      "re_e_phi", "im_e_phi", "intensity"]:
            raise ValueError(f"{path}: unexpected far-field CSV header {header}")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    theta = np.unique(rows[:, 0])
    phi = np.unique(rows[:, 1])
    if len(rows) != len(theta) * len(phi):
        raise ValueError(f"{path}: rows do not form a full theta x phi grid")
    e_theta = (rows[:, 2] + 1j * rows[:, 3]).reshape(len(theta), len(phi))
    e_phi = (rows[:, 4] + 1j * rows[:, 5]).reshape(len(theta), len(phi))
    return FarFieldMap(theta, phi, e_theta, e_phi, peak)
