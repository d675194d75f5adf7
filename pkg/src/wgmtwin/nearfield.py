"""Cavity near field (analytic annulus mode or imported grid) and emitter formulas."""

import math
from dataclasses import dataclass

import numpy as np


class GridFormatError(ValueError):
    """Raised when a near-field grid file violates the documented format."""


@dataclass(frozen=True)
class NearFieldGrid:
    """Sampled complex field on a rectangular x-y grid at a fixed z plane."""

    x0: float
    y0: float
    dx: float
    dy: float
    z: float
    lambda0: float
    ex: np.ndarray  # (ny, nx) complex
    ey: np.ndarray
    ez: np.ndarray

    @property
    def nx(self) -> int:
        return self.ex.shape[1]

    @property
    def ny(self) -> int:
        return self.ex.shape[0]

    def interpolate(self, points: np.ndarray) -> np.ndarray:
        """Bilinear interpolation of the complex field at (n, 2+) points.

        Node queries reproduce node values exactly; points outside the grid
        rectangle raise.
        """
        pts = np.atleast_2d(points)
        fx = (pts[:, 0] - self.x0) / self.dx
        fy = (pts[:, 1] - self.y0) / self.dy
        tol = 1e-9
        if np.any(fx < -tol) or np.any(fx > self.nx - 1 + tol) or \
           np.any(fy < -tol) or np.any(fy > self.ny - 1 + tol):
            bad = int(np.argmax((fx < -tol) | (fx > self.nx - 1 + tol) |
                                (fy < -tol) | (fy > self.ny - 1 + tol)))
            raise ValueError(
                f"query point {tuple(pts[bad, :2])} lies outside the sampled grid")
        fx = np.clip(fx, 0.0, self.nx - 1)
        fy = np.clip(fy, 0.0, self.ny - 1)
        ix = np.minimum(fx.astype(int), self.nx - 2) if self.nx > 1 else np.zeros(len(pts), int)
        iy = np.minimum(fy.astype(int), self.ny - 2) if self.ny > 1 else np.zeros(len(pts), int)
        tx = fx - ix
        ty = fy - iy
        out = np.empty((len(pts), 3), dtype=complex)
        for c, comp in enumerate((self.ex, self.ey, self.ez)):
            if self.nx > 1 and self.ny > 1:
                v = (comp[iy, ix] * (1 - tx) * (1 - ty)
                     + comp[iy, ix + 1] * tx * (1 - ty)
                     + comp[iy + 1, ix] * (1 - tx) * ty
                     + comp[iy + 1, ix + 1] * tx * ty)
            elif self.nx > 1:
                v = comp[iy, ix] * (1 - tx) + comp[iy, ix + 1] * tx
            elif self.ny > 1:
                v = comp[iy, ix] * (1 - ty) + comp[iy + 1, ix] * ty
            else:
                v = comp[iy, ix]
            out[:, c] = v
        return out


@dataclass(frozen=True)
class NearFieldSpec:
    """Near-field source: analytic annulus mode e^{iM phi} or an imported grid.

    The analytic variant is a Gaussian annulus exp(-(rho-rho_m)^2/w^2) with
    azimuthal winding M, carried on the radial (amp_rho) and vertical (amp_z)
    components.  It stands in for a recorded cavity field when none is given.
    """

    variant: str = "analytic"
    M: int = 17
    rho_m: float = 1.2687
    w: float = 0.25
    amp_rho: complex = 1.0 + 0.0j
    amp_z: complex = 0.0j
    grid: NearFieldGrid | None = None

    def __post_init__(self):
        if self.variant not in ("analytic", "imported"):
            raise ValueError(f"variant must be 'analytic' or 'imported', got {self.variant!r}")
        if self.variant == "analytic":
            if self.M < 1:
                raise ValueError(f"mode number M must be >= 1, got {self.M}")
            if not self.w > 0:
                raise ValueError(f"annulus width w must be > 0, got {self.w}")
            if self.amp_rho == 0 and self.amp_z == 0:
                raise ValueError("at least one of amp_rho, amp_z must be nonzero")
        elif self.grid is None:
            raise ValueError("imported variant requires a grid")


def sample_nearfield(spec: NearFieldSpec, points: np.ndarray) -> np.ndarray:
    """Complex Cartesian E vectors of the near field at (n, 3) points.

    The analytic variant is defined on any plane (its z dependence is folded
    into the amplitudes); the imported variant interpolates its grid and
    rejects out-of-bounds queries.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if spec.variant == "imported":
        return spec.grid.interpolate(pts)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    profile = np.exp(-((rho - spec.rho_m) / spec.w) ** 2) * np.exp(1j * spec.M * phi)
    out = np.zeros((len(pts), 3), dtype=complex)
    out[:, 0] = spec.amp_rho * profile * np.cos(phi)
    out[:, 1] = spec.amp_rho * profile * np.sin(phi)
    out[:, 2] = spec.amp_z * profile
    return out


def export_nearfield(grid: NearFieldGrid, path) -> None:
    """Write a grid in the interchange format (see import_nearfield)."""
    with open(path, "w") as fh:
        fh.write(f"{grid.nx} {grid.ny} {grid.dx:.12g} {grid.dy:.12g} "
                 f"{grid.z:.12g} {grid.lambda0:.12g}\n")
        for iy in range(grid.ny):
            y = grid.y0 + iy * grid.dy
            for ix in range(grid.nx):
                x = grid.x0 + ix * grid.dx
                vals = [grid.ex[iy, ix], grid.ey[iy, ix], grid.ez[iy, ix]]
                parts = [f"{x:.12g}", f"{y:.12g}"]
                for v in vals:
                    parts.append(f"{v.real:.12g}")
                    parts.append(f"{v.imag:.12g}")
                fh.write(" ".join(parts) + "\n")


def import_nearfield(path) -> NearFieldSpec:
    """Load a sampled near field.

    Format: one header line ``nx ny dx dy z lambda0`` followed by nx*ny data
    rows ``x y Re(Ex) Im(Ex) Re(Ey) Im(Ey) Re(Ez) Im(Ez)``, x varying fastest.
    The grid origin is taken from the first data row; every row's stated
    position must match its implied grid node.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise GridFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 6:
        raise GridFormatError(f"{path}: header must have 6 fields, got {len(head)}")
    try:
        nx, ny = int(head[0]), int(head[1])
        dx, dy, z, lambda0 = (float(v) for v in head[2:])
    except ValueError as exc:
        raise GridFormatError(f"{path}: malformed header: {exc}") from exc
    if nx < 1 or ny < 1 or dx <= 0 or dy <= 0:
        raise GridFormatError(f"{path}: header requires nx, ny >= 1 and dx, dy > 0")
    if len(lines) - 1 != nx * ny:
        raise GridFormatError(f"{path}: expected {nx * ny} data rows, got {len(lines) - 1}")
    ex = np.empty((ny, nx), dtype=complex)
    ey = np.empty((ny, nx), dtype=complex)
    ez = np.empty((ny, nx), dtype=complex)
    x0 = y0 = 0.0
    tol = 1e-6 * max(dx, dy)
    for row, line in enumerate(lines[1:]):
        fields = line.split()
        if len(fields) != 8:
            raise GridFormatError(f"{path}: row {row + 1}: expected 8 columns, got {len(fields)}")
        try:
            vals = [float(v) for v in fields]
        except ValueError:
            bad = next(i for i, v in enumerate(fields) if not _is_float(v))
            raise GridFormatError(f"{path}: row {row + 1}, column {bad + 1}: "
                                  f"not a number: {fields[bad]!r}") from None
        if any(math.isnan(v) for v in vals):
            bad = next(i for i, v in enumerate(vals) if math.isnan(v))
            raise GridFormatError(f"{path}: row {row + 1}, column {bad + 1}: NaN entry")
        ix, iy = row % nx, row // nx
        if row == 0:
            x0, y0 = vals[0], vals[1]
        if abs(vals[0] - (x0 + ix * dx)) > tol or abs(vals[1] - (y0 + iy * dy)) > tol:
            raise GridFormatError(f"{path}: row {row + 1}: position "
                                  f"({vals[0]}, {vals[1]}) breaks the rectangular grid")
        ex[iy, ix] = complex(vals[2], vals[3])
        ey[iy, ix] = complex(vals[4], vals[5])
        ez[iy, ix] = complex(vals[6], vals[7])
    grid = NearFieldGrid(x0, y0, dx, dy, z, lambda0, ex, ey, ez)
    return NearFieldSpec(variant="imported", grid=grid)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Emitter-side formulas.

@dataclass(frozen=True)
class EmitterSpec:
    """Color-center emitter: branching constant and achieved Purcell factor."""

    name: str
    branch: float
    Fp: float = 0.0

    def __post_init__(self):
        if self.branch < 0:
            raise ValueError(f"branch must be >= 0, got {self.branch}")
        if self.Fp < 0:
            raise ValueError(f"Fp must be >= 0, got {self.Fp}")


@dataclass(frozen=True)
class CavityMode:
    """Cavity mode with V expressed in (lambda/n_eff)^3 units."""

    Q: float
    V: float
    n_eff: float = 1.0

    def __post_init__(self):
        if not self.Q > 0:
            raise ValueError(f"Q must be > 0, got {self.Q}")
        if not self.V > 0:
            raise ValueError(f"V must be > 0, got {self.V}")
        if self.n_eff < 1:
            raise ValueError(f"n_eff must be >= 1, got {self.n_eff}")


# Branching constants (total off-line emission relative to the bare line).
EMITTER_BRANCH = {"snv": 0.25, "siv": 0.66, "nv": 32.3}


def emitter_preset(name: str, Fp: float = 0.0) -> EmitterSpec:
    key = name.strip().lower()
    if key not in EMITTER_BRANCH:
        raise ValueError(f"unknown emitter {name!r}, expected one of {sorted(EMITTER_BRANCH)}")
    return EmitterSpec(key, EMITTER_BRANCH[key], Fp)


def purcell_factor(mode: CavityMode) -> float:
    """F_p = (3 / 4 pi^2) Q / V with V in (lambda/n_eff)^3 units.

    The wavelength cancels in these units, so the mode alone determines F_p.
    """
    return (3.0 / (4.0 * np.pi ** 2)) * mode.Q / mode.V


def zpl_efficiency(fp: float, branch: float) -> float:
    """Fraction of emission in the enhanced line: Fp / (Fp + branch)."""
    if fp < 0 or branch < 0:
        raise ValueError("fp and branch must be >= 0")
    if fp == 0:
        return 0.0
    return fp / (fp + branch)


def required_purcell(eta_target: float, branch: float) -> float:
    """Purcell factor needed for a given line efficiency: branch*eta/(1-eta)."""
    if not 0 < eta_target < 1:
        raise ValueError(f"eta_target must lie in (0, 1), got {eta_target}")
    if branch < 0:
        raise ValueError(f"branch must be >= 0, got {branch}")
    return branch * eta_target / (1.0 - eta_target)
