"""End-to-end runs, alignment sweeps, geometry optimization, model comparison."""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .analytic import R_FAR, Z_INTERMEDIATE, RingSpec, ff_closed_form, if_transverse
from .dipole import (DipoleSet, FarFieldMap, cascade_two_layers,
                     hemisphere_grid, superpose_field)
from .geometry import (AlignmentOffset, DeviceGeometry, ScattererLayer,
                       build_layer, fold_to_reduced_domain, reduced_domain_grid,
                       select_interacting)
from .metrics import (EfficiencyReport, check_refinement, collection_efficiency,
                      efficiency_curve, gaussian_overlap, total_efficiency)
from .nearfield import (CavityMode, EmitterSpec, NearFieldSpec, emitter_preset,
                        purcell_factor, zpl_efficiency)

# Geometry parameters exposed to the optimizer, in declared order.
OPT_PARAMS = ("r_d", "h", "a1", "a2", "d1", "d2", "r_h1", "r_h2")

_DEFAULT_NA_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class RunConfig:
    """Everything one end-to-end run needs; immutable so runs are repeatable."""

    geometry: DeviceGeometry = DeviceGeometry()
    nearfield: NearFieldSpec = NearFieldSpec()
    alignment: AlignmentOffset = AlignmentOffset()
    emitter: EmitterSpec = emitter_preset("snv")
    mode: CavityMode | None = None
    n_theta: int = 181
    n_phi: int = 256
    na: float = 0.7
    eta_ex: float = 1.0
    annulus: tuple[float, float] | None = None
    max_radius: float | None = None
    include_direct: bool = True
    seed: int = 0
    na_grid: np.ndarray = field(default_factory=lambda: _DEFAULT_NA_GRID.copy(),
                                repr=False)
    out_dir: str = "out"

    def __post_init__(self):
        if not 0 < self.na <= 1:
            raise ValueError(f"na must lie in (0, 1], got {self.na}")
        if not 0 <= self.eta_ex <= 1:
            raise ValueError(f"eta_ex must lie in [0, 1], got {self.eta_ex}")
        if self.n_theta < 2 or self.n_phi < 1:
            raise ValueError("hemisphere grid needs n_theta >= 2, n_phi >= 1")
        if self.annulus is not None:
            inner, outer = self.annulus
            if not 0 <= inner < outer:
                raise ValueError(f"annulus must satisfy 0 <= inner < outer, "
                                 f"got {self.annulus}")


def _zpl_from_config(config: RunConfig) -> float:
    fp = config.emitter.Fp
    if fp == 0 and config.mode is not None:
        fp = purcell_factor(config.mode)
    return zpl_efficiency(fp, config.emitter.branch)


def _build_layers(config: RunConfig) -> tuple[ScattererLayer, ScattererLayer]:
    off1 = config.alignment if config.alignment.layer == 1 else None
    off2 = config.alignment if config.alignment.layer == 2 else None
    layer1 = build_layer(config.geometry, 1, off1, config.max_radius)
    layer2 = build_layer(config.geometry, 2, off2, config.max_radius)
    if config.annulus is not None:
        # The cavity field lives on an annulus; layer-1 holes outside it are
        # never driven, while layer 2 sees the spread intermediate field.
        layer1 = select_interacting(layer1, *config.annulus)
    return layer1, layer2


def run_pipeline(config: RunConfig) -> tuple[EfficiencyReport, FarFieldMap]:
    """Near field -> layers -> cascade -> far-field map -> figures of merit."""
    layer1, layer2 = _build_layers(config)
    theta, phi = hemisphere_grid(config.n_theta, config.n_phi, config.na)
    fmap = cascade_two_layers(config.geometry, config.nearfield, layer1, layer2,
                              theta, phi, include_direct=config.include_direct)
    eta_col, _, _ = check_refinement(fmap, config.na, config.eta_ex)
    curve = efficiency_curve(fmap, config.eta_ex, config.na_grid)
    overlap, waist = gaussian_overlap(fmap)
    eta_zpl = _zpl_from_config(config)
    report = EfficiencyReport(eta_zpl=eta_zpl, eta_ex=config.eta_ex,
                              na=config.na, eta_col=eta_col,
                              overlap_gauss=overlap,
                              eta_tot=total_efficiency(eta_zpl, eta_col),
                              curve=curve, best_waist=waist)
    return report, fmap


@dataclass(frozen=True)
class SweepResult:
    """Collection efficiency over alignment offsets of one layer."""

    offsets: np.ndarray  # (n, 2) folded (u, v)
    eta_col: np.ndarray  # (n,)
    layer_id: int
    eta_ex: float
    maps: tuple = ()

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=float)
        eta = np.asarray(self.eta_col, dtype=float)
        if off.ndim != 2 or off.shape[1] != 2:
            raise ValueError(f"offsets must be (n, 2), got {off.shape}")
        if eta.shape != (len(off),):
            raise ValueError("need exactly one eta_col per offset")
        if np.any(eta < 0) or np.any(eta > self.eta_ex + 1e-12):
            raise ValueError("eta_col values must lie in [0, eta_ex]")
        if self.maps and len(self.maps) != len(off):
            raise ValueError("need one far-field map per offset when maps are kept")
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "eta_col", eta)


def alignment_sweep(config: RunConfig, layer_id: int, grid_n: int = 10,
                    offsets: np.ndarray | None = None,
                    keep_maps: bool = False) -> SweepResult:
    """run_pipeline per offset of one layer over the reduced-symmetry triangle.

    Offsets default to the barycentric grid_n-per-edge raster; explicit
    offsets are folded into the triangle first.
    """
    if layer_id not in (1, 2):
        raise ValueError(f"layer_id must be 1 or 2, got {layer_id}")
    a = config.geometry.a1 if layer_id == 1 else config.geometry.a2
    if offsets is None:
        offsets = reduced_domain_grid(a, grid_n)
    folded = np.array([fold_to_reduced_domain(u, v, a) for u, v in offsets])
    etas, maps = [], []
    for u, v in folded:
        cell = dataclasses.replace(config,
                                   alignment=AlignmentOffset(u, v, layer_id))
        report, fmap = run_pipeline(cell)
        etas.append(report.eta_col)
        if keep_maps:
            maps.append(fmap)
    return SweepResult(folded, np.array(etas), layer_id, config.eta_ex,
                       tuple(maps))


def write_sweep_csv(result: SweepResult, path) -> None:
    """CSV with columns u, v, eta_col."""
    with open(path, "w") as fh:
        fh.write("u,v,eta_col\n")
        for (u, v), eta in zip(result.offsets, result.eta_col):
            fh.write(f"{u:.12g},{v:.12g},{eta:.12g}\n")


def _objective(config: RunConfig, x: np.ndarray) -> float:
    """eta_col(na) * gaussian overlap; -1 marks an infeasible geometry."""
    try:
        geom = dataclasses.replace(config.geometry,
                                   **dict(zip(OPT_PARAMS, (float(v) for v in x))))
        report, _ = run_pipeline(dataclasses.replace(config, geometry=geom))
    except ValueError:
        return -1.0
    return report.eta_col * report.overlap_gauss


def optimize_geometry(config: RunConfig,
                      bounds: dict[str, tuple[float, float]] | None = None,
                      budget: int = 100, seed: int | None = None
                      ) -> tuple[DeviceGeometry, np.ndarray]:
    """Bounded derivative-free simplex search over the device lengths.

    Maximizes eta_col(config.na) x gaussian_overlap with a Nelder-Mead-style
    simplex: candidate points are clamped to the bounds, a collapsed simplex
    triggers a seeded random restart (at most 3), and the evaluation budget
    is a hard cap.  budget = 1 returns the initial geometry after scoring it.

    Returns (best geometry, trace); trace rows are
    [eval index, r_d, h, a1, a2, d1, d2, r_h1, r_h2, objective, best so far].
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if bounds is None:
        bounds = {name: (0.8 * getattr(config.geometry, name),
                         1.2 * getattr(config.geometry, name))
                  for name in OPT_PARAMS}
    lo = np.array([bounds[name][0] for name in OPT_PARAMS])
    hi = np.array([bounds[name][1] for name in OPT_PARAMS])
    if np.any(~np.isfinite(lo)) or np.any(~np.isfinite(hi)) or np.any(lo >= hi):
        raise ValueError("bounds must be finite with lower < upper for every parameter")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    x0 = np.clip([getattr(config.geometry, name) for name in OPT_PARAMS], lo, hi)

    trace = []
    state = {"best_f": -np.inf, "best_x": x0.copy(), "evals": 0}

    def score(x: np.ndarray) -> float:
        x = np.clip(x, lo, hi)
        f = _objective(config, x)
        state["evals"] += 1
        if f > state["best_f"]:
            state["best_f"], state["best_x"] = f, x.copy()
        trace.append([state["evals"], *x, f, state["best_f"]])
        return f

    def make_simplex(center: np.ndarray) -> list[np.ndarray]:
        verts = [np.clip(center, lo, hi)]
        for i in range(len(OPT_PARAMS)):
            step = 0.05 * (hi[i] - lo[i])
            v = verts[0].copy()
            v[i] = v[i] + step if v[i] + step <= hi[i] else v[i] - step
            verts.append(v)
        return verts

    d = len(OPT_PARAMS)
    restarts = 0
    verts = make_simplex(x0)
    fvals = []
    for v in verts:
        if state["evals"] >= budget:
            break
        fvals.append(score(v))
    verts = verts[:len(fvals)]
    while state["evals"] < budget and len(verts) == d + 1:
        order = np.argsort(fvals)[::-1]  # maximize: best first
        verts = [verts[i] for i in order]
        fvals = [fvals[i] for i in order]
        if np.max([np.linalg.norm(v - verts[0]) for v in verts]) < 1e-8 * np.max(hi - lo):
            if restarts >= 3:
                break
            restarts += 1
            verts = make_simplex(lo + rng.random(d) * (hi - lo))
            fvals = []
            for v in verts:
                if state["evals"] >= budget:
                    break
                fvals.append(score(v))
            verts = verts[:len(fvals)]
            continue
        centroid = np.mean(verts[:-1], axis=0)
        reflected = np.clip(centroid + (centroid - verts[-1]), lo, hi)
        f_r = score(reflected)
        if state["evals"] >= budget:
            break
        if f_r > fvals[0]:
            expanded = np.clip(centroid + 2.0 * (centroid - verts[-1]), lo, hi)
            f_e = score(expanded)
            if f_e > f_r:
                verts[-1], fvals[-1] = expanded, f_e
            else:
                verts[-1], fvals[-1] = reflected, f_r
        elif f_r > fvals[-2]:
            verts[-1], fvals[-1] = reflected, f_r
        else:
            contracted = np.clip(centroid + 0.5 * (verts[-1] - centroid), lo, hi)
            f_c = score(contracted)
            if f_c > fvals[-1]:
                verts[-1], fvals[-1] = contracted, f_c
            else:
                for i in range(1, d + 1):
                    if state["evals"] >= budget:
                        break
                    verts[i] = np.clip(verts[0] + 0.5 * (verts[i] - verts[0]), lo, hi)
                    fvals[i] = score(verts[i])
    best = dataclasses.replace(config.geometry,
                               **dict(zip(OPT_PARAMS,
                                          (float(v) for v in state["best_x"]))))
    return best, np.array(trace)


def write_trace_csv(trace: np.ndarray, path) -> None:
    """CSV of optimizer evaluations with running best."""
    cols = ["eval", *OPT_PARAMS, "objective", "best"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in np.asarray(trace, dtype=float):
            fh.write(f"{int(row[0])}," + ",".join(f"{v:.12g}" for v in row[1:]) + "\n")


def ring_dipoles(ring: RingSpec, n: int | None = None, z: float = 0.0,
                 amp: complex = 1.0) -> DipoleSet:
    """Discrete counterpart of a closed-form ring: n dipoles, winding L.

    Moments point along rho-hat (or z-hat) with phases e^{i L phi_n}, the
    equal-amplitude assumption the closed forms are derived under.
    """
    count = ring.N if n is None else n
    if count < 1:
        raise ValueError(f"need at least 1 dipole, got {count}")
    phi_n = 2.0 * np.pi * np.arange(count) / count
    positions = np.column_stack([ring.rho_n * np.cos(phi_n),
                                 ring.rho_n * np.sin(phi_n),
                                 np.full(count, z)])
    wind = amp * np.exp(1j * ring.L * phi_n)
    if ring.orientation == "rho":
        moments = np.column_stack([wind * np.cos(phi_n), wind * np.sin(phi_n),
                                   np.zeros(count, complex)])
    else:
        moments = np.column_stack([np.zeros(count, complex),
                                   np.zeros(count, complex), wind])
    return DipoleSet(positions, moments)


def _normalized(intensity: np.ndarray) -> np.ndarray:
    peak = intensity.max()
    return intensity / peak if peak > 0 else intensity


def model_compare(ring: RingSpec, n_list, theta_max: float = 0.3,
                  n_samples: int = 61, z: float = Z_INTERMEDIATE,
                  r: float = R_FAR) -> np.ndarray:
    """RMS error of discrete rings against the closed forms, per dipole count.

    For each N: an N-dipole layer-1 ring is compared against the Fresnel
    transverse pattern on the phi = 0 cut at height z, and an N-dipole
    layer-2 circle (driven by the closed-form intermediate field) against
    the Fraunhofer form at radius r.  Intensities are normalized to peak 1;
    rows are [N, rms_if, rms_ff].
    """
    n_arr = [int(v) for v in n_list]
    if any(b <= a for a, b in zip(n_arr, n_arr[1:])):
        raise ValueError("n_list must be strictly ascending")
    theta = np.linspace(0.0, theta_max, n_samples)
    obs_if = np.column_stack([z * np.tan(theta), np.zeros_like(theta),
                              np.full_like(theta, z)])
    obs_ff = np.column_stack([r * np.sin(theta), np.zeros_like(theta),
                              r * np.cos(theta)])
    ex, ey = if_transverse(ring, theta, 0.0, z=z)
    ref_if = _normalized(np.abs(ex) ** 2 + np.abs(ey) ** 2)
    rows = []
    for count in n_arr:
        grid = superpose_field(ring_dipoles(ring, n=count), obs_if)
        disc_if = _normalized(np.abs(grid.values[:, 0]) ** 2
                              + np.abs(grid.values[:, 1]) ** 2)
        rms_if = float(np.sqrt(np.mean((disc_if - ref_if) ** 2)))

        spec_q = dataclasses.replace(ring, Q_ring=count)
        phi_q = 2.0 * np.pi * np.arange(count) / count
        z_q = ring.r_q * np.cos(ring.theta_q)
        rho_q = ring.r_q * np.sin(ring.theta_q)
        pos_q = np.column_stack([rho_q * np.cos(phi_q), rho_q * np.sin(phi_q),
                                 np.full(count, z_q)])
        ex_q, ey_q = if_transverse(ring, ring.theta_q, phi_q, z=z_q)
        mom_q = np.column_stack([ex_q, ey_q, np.zeros(count, complex)])
        grid = superpose_field(DipoleSet(pos_q, mom_q), obs_ff)
        disc_ff = _normalized(np.abs(grid.values[:, 0]) ** 2
                              + np.abs(grid.values[:, 1]) ** 2)
        ex, ey = ff_closed_form(spec_q, theta, 0.0, r=r)
        ref_ff = _normalized(np.abs(ex) ** 2 + np.abs(ey) ** 2)
        rms_ff = float(np.sqrt(np.mean((disc_ff - ref_ff) ** 2)))
        rows.append([count, rms_if, rms_ff])
    return np.array(rows)


def write_compare_csv(table: np.ndarray, path) -> None:
    """CSV with columns N, rms_if, rms_ff."""
    with open(path, "w") as fh:
        fh.write("N,rms_if,rms_ff\n")
        for count, rms_if, rms_ff in np.asarray(table, dtype=float):
            fh.write(f"{int(count)},{rms_if:.12g},{rms_ff:.12g}\n")
