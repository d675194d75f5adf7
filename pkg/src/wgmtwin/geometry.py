"""Hexagonal-lattice scatterer layouts, alignment folding, and annulus selection.

All lengths are expressed in units of the design wavelength lambda0, so the
wavenumber is k = 2*pi throughout the package.
"""

from dataclasses import dataclass, field

import numpy as np

SQRT3 = np.sqrt(3.0)

# Table of optimized device lengths, in lambda0 units.
DEFAULT_R_D = 1.4687
DEFAULT_H = 0.9491
DEFAULT_A1 = 0.5234
DEFAULT_A2 = 0.3406
DEFAULT_D1 = 0.3561
DEFAULT_D2 = 0.3561
DEFAULT_R_H1 = 0.1875
DEFAULT_R_H2 = 0.1562


@dataclass(frozen=True)
class DeviceGeometry:
    """Geometric description of the disk plus the two perturbation layers.

    Lengths are in lambda0 units.  ``z1``/``z2`` are the layer center heights
    above the disk top surface; the layer stack fixes only the in-plane
    pattern, so the defaults (layer 1 directly atop the disk, layer 2 in the
    intermediate zone) are placeholders and should be set from the config for
    any quantitative study.
    """

    r_d: float = DEFAULT_R_D
    h: float = DEFAULT_H
    a1: float = DEFAULT_A1
    a2: float = DEFAULT_A2
    d1: float = DEFAULT_D1
    d2: float = DEFAULT_D2
    r_h1: float = DEFAULT_R_H1
    r_h2: float = DEFAULT_R_H2
    z1: float = DEFAULT_D1 / 2
    z2: float = 2.0
    n_diamond: float = 2.4
    n_ox: float = 1.8
    n_sio2: float = 1.4
    lambda0: float = 1.0
    alpha1: complex = 1.0 + 0.0j
    alpha2: complex = 1.0 + 0.0j

    def __post_init__(self):
        for name in ("r_d", "h", "a1", "a2", "d1", "d2", "r_h1", "r_h2", "lambda0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")
        if not self.r_h1 < self.a1 / 2:
            raise ValueError(f"r_h1 = {self.r_h1} must be < a1/2 = {self.a1 / 2} (holes overlap)")
        if not self.r_h2 < self.a2 / 2:
            raise ValueError(f"r_h2 = {self.r_h2} must be < a2/2 = {self.a2 / 2} (holes overlap)")
        if not (self.z2 > self.z1 >= 0):
            raise ValueError(f"need z2 > z1 >= 0, got z1 = {self.z1}, z2 = {self.z2}")
        for name in ("n_diamond", "n_ox", "n_sio2"):
            if not getattr(self, name) >= 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class AlignmentOffset:
    """In-plane translation (u, v) of one grating layer, in lambda0 units."""

    u: float = 0.0
    v: float = 0.0
    layer: int = 1

    def __post_init__(self):
        if self.layer not in (1, 2):
            raise ValueError(f"layer must be 1 or 2, got {self.layer}")


@dataclass(frozen=True)
class ScattererLayer:
    """One grating layer: hole-center positions with per-point trace indices."""

    positions: np.ndarray  # (n, 3) float
    trace_index: np.ndarray  # (n,) int
    alpha: complex
    layer_id: int

    def __post_init__(self):
        if len(self.positions) != len(self.trace_index):
            raise ValueError("positions and trace_index lengths differ")

    def __len__(self) -> int:
        return len(self.positions)

    def subset(self, mask: np.ndarray) -> "ScattererLayer":
        return ScattererLayer(self.positions[mask], self.trace_index[mask],
                              self.alpha, self.layer_id)


def hex_trace(l: int, a: float) -> np.ndarray:
    """Return the 2D lattice points on the l-th hexagon trace about the origin.

    Trace 0 is the single center point; trace l >= 1 has 6l points with
    consecutive spacing exactly a (the corners are shared lattice points of
    the edge subdivisions).
    """
    if l < 0:
        raise ValueError(f"trace index must be >= 0, got {l}")
    if not a > 0:
        raise ValueError(f"lattice constant must be > 0, got {a}")
    if l == 0:
        return np.zeros((1, 2))
    j = np.arange(6)
    corners = l * a * np.stack([np.cos(j * np.pi / 3), np.sin(j * np.pi / 3)], axis=1)
    edges = []
    for i in range(6):
        step = (corners[(i + 1) % 6] - corners[i]) / l
        edges.append(corners[i] + np.outer(np.arange(l), step))
    return np.concatenate(edges)


def build_layer(geom: DeviceGeometry, layer_id: int,
                offset: AlignmentOffset | None = None,
                max_radius: float | None = None) -> ScattererLayer:
    """Generate one grating layer, translated by ``offset`` and clipped to
    ``max_radius`` about the optical axis."""
    if layer_id == 1:
        a, z, alpha = geom.a1, geom.z1, geom.alpha1
    elif layer_id == 2:
        a, z, alpha = geom.a2, geom.z2, geom.alpha2
    else:
        raise ValueError(f"unknown layer_id {layer_id!r}, expected 1 or 2")
    if max_radius is None:
        max_radius = geom.r_d + a
    if not max_radius > 0:
        raise ValueError(f"max_radius must be > 0, got {max_radius}")
    u, v = (offset.u, offset.v) if offset is not None else (0.0, 0.0)
    # Innermost point of trace l sits at l*a*sqrt(3)/2, so this bound covers
    # every trace that can reach the clip circle after translation.
    l_max = int(np.ceil((max_radius + np.hypot(u, v)) / (a * SQRT3 / 2))) + 1
    pts, idx = [], []
    for l in range(l_max + 1):
        p = hex_trace(l, a) + np.array([u, v])
        keep = np.hypot(p[:, 0], p[:, 1]) <= max_radius
        pts.append(p[keep])
        idx.append(np.full(int(keep.sum()), l))
    xy = np.concatenate(pts)
    positions = np.column_stack([xy, np.full(len(xy), z)])
    return ScattererLayer(positions, np.concatenate(idx), alpha, layer_id)


def _lattice_basis(a: float) -> np.ndarray:
    return np.array([[a, a / 2], [0.0, a * SQRT3 / 2]])


def _in_reduced_triangle(x: float, y: float, a: float, eps: float) -> bool:
    # Vertices (0,0), (a/2, 0), (a/2, a/(2*sqrt(3))): lattice site, edge
    # midpoint, and triangle center of the unit cell.
    return (y >= -eps) and (x <= a / 2 + eps) and (y <= x / SQRT3 + eps)


def reduced_domain_vertices(a: float) -> np.ndarray:
    """Vertices of the reduced-symmetry triangle of offsets."""
    return np.array([[0.0, 0.0], [a / 2, 0.0], [a / 2, a / (2 * SQRT3)]])


def fold_to_reduced_domain(u: float, v: float, a: float) -> tuple[float, float]:
    """Fold an arbitrary layer offset into the reduced-symmetry triangle.

    The lattice is invariant under translations by lattice vectors and the
    12-element hexagonal point group, so every offset is equivalent to one
    inside the triangle spanned by a lattice site, the midpoint of a bond,
    and the cell center.  Boundary ties resolve to the representative with
    the smallest u, then smallest v.
    """
    if not a > 0:
        raise ValueError(f"lattice constant must be > 0, got {a}")
    basis = _lattice_basis(a)
    inv = np.linalg.inv(basis)
    frac = inv @ np.array([u, v])
    base = basis @ (frac - np.round(frac))
    eps = 1e-9 * a
    best = None
    shifts = [basis @ np.array([m, n]) for m in (-1, 0, 1) for n in (-1, 0, 1)]
    for reflect in (False, True):
        for j in range(6):
            c, s = np.cos(j * np.pi / 3), np.sin(j * np.pi / 3)
            q = np.array([c * base[0] - s * base[1], s * base[0] + c * base[1]])
            if reflect:
                q = np.array([q[0], -q[1]])
            for t in shifts:
                cand = q + t
                if _in_reduced_triangle(cand[0], cand[1], a, eps):
                    key = (round(cand[0] / eps), round(cand[1] / eps))
                    if best is None or key < best[0]:
                        best = (key, (float(cand[0]), float(cand[1])))
    if best is None:  # unreachable: the triangle is a fundamental domain
        raise RuntimeError("folding failed to find a representative")
    # Clamp residual rounding noise on the triangle boundary.
    uf, vf = best[1]
    if abs(uf) < eps:
        uf = 0.0
    if abs(vf) < eps:
        vf = 0.0
    return uf, vf


def reduced_domain_grid(a: float, n: int) -> np.ndarray:
    """Barycentric n-per-edge raster of the reduced triangle, n(n+1)/2 points.

    Includes the alignment presets A (lattice site) and B (bond midpoint) as
    the first and last points of the bottom edge.
    """
    if n < 2:
        raise ValueError(f"grid order must be >= 2, got {n}")
    pts = []
    for i in range(n):
        for jj in range(i + 1):
            pts.append([(a / 2) * i / (n - 1), (a / (2 * SQRT3)) * jj / (n - 1)])
    return np.array(pts)


def alignment_preset(name: str, a: float, layer: int = 1) -> AlignmentOffset:
    """Named alignment points: A = lattice site on axis, B = half-constant shift."""
    key = name.strip().upper()
    if key == "A":
        return AlignmentOffset(0.0, 0.0, layer)
    if key == "B":
        return AlignmentOffset(a / 2, 0.0, layer)
    raise ValueError(f"unknown alignment preset {name!r}, expected 'A' or 'B'")


def select_interacting(layer: ScattererLayer, inner: float, outer: float) -> ScattererLayer:
    """Keep only scatterers whose radial distance from the axis lies in
    [inner, outer]; used to restrict dipole induction to the annulus where
    the cavity near field is non-negligible."""
    if not (0 <= inner < outer):
        raise ValueError(f"need 0 <= inner < outer, got [{inner}, {outer}]")
    rho = np.hypot(layer.positions[:, 0], layer.positions[:, 1])
    return layer.subset((rho >= inner) & (rho <= outer))
