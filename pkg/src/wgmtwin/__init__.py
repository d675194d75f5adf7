"""Digital-twin simulator for vertically emitting microdisk spin-photon devices.

A whispering-gallery near field drives two hexagonal grating layers of
point scatterers; exact dipole superposition carries the light to a far-
field hemisphere where collection efficiency, Gaussian overlap, and line
efficiencies are scored.  Closed-form Bessel solutions for idealized rings
validate the discrete solver.
"""

from .analytic import (PrefactorState, RingSpec, encircled_fraction,
                       ff_closed_form, fig2_profiles, if_components,
                       if_transverse, onaxis_selection, prefactor_state,
                       write_fig2_csv)
from .dipole import (DipoleSet, FarFieldMap, FieldGrid, SingularFieldError,
                     cascade_two_layers, dipole_field_at, export_farfield,
                     farfield_map, hemisphere_grid, induce_moments,
                     load_farfield, superpose_field)
from .geometry import (AlignmentOffset, DeviceGeometry, ScattererLayer,
                       alignment_preset, build_layer, fold_to_reduced_domain,
                       hex_trace, reduced_domain_grid, reduced_domain_vertices,
                       select_interacting)
from .metrics import (EfficiencyReport, RefinementWarning, ZeroIntensityError,
                      check_refinement, collection_efficiency, efficiency_curve,
                      gaussian_overlap, total_efficiency, write_curve_csv,
                      write_report_json)
from .nearfield import (CavityMode, EmitterSpec, GridFormatError, NearFieldGrid,
                        NearFieldSpec, emitter_preset, export_nearfield,
                        import_nearfield, purcell_factor, required_purcell,
                        sample_nearfield, zpl_efficiency)
from .workflow import (RunConfig, SweepResult, alignment_sweep, model_compare,
                       optimize_geometry, ring_dipoles, run_pipeline)

__version__ = "0.1.0"

__all__ = [
    "AlignmentOffset", "CavityMode", "DeviceGeometry", "DipoleSet",
    "EfficiencyReport", "EmitterSpec", "FarFieldMap", "FieldGrid",
    "GridFormatError", "NearFieldGrid", "NearFieldSpec", "PrefactorState",
    "RefinementWarning", "RingSpec", "RunConfig", "ScattererLayer",
    "SingularFieldError", "SweepResult", "ZeroIntensityError",
    "alignment_preset", "alignment_sweep", "build_layer", "cascade_two_layers",
    "collection_efficiency", "check_refinement", "dipole_field_at",
    "efficiency_curve", "emitter_preset", "encircled_fraction",
    "export_farfield", "export_nearfield", "farfield_map", "ff_closed_form",
    "fig2_profiles", "fold_to_reduced_domain", "gaussian_overlap",
    "hemisphere_grid", "hex_trace", "if_components", "if_transverse",
    "import_nearfield", "induce_moments", "load_farfield", "model_compare",
    "onaxis_selection", "optimize_geometry", "prefactor_state",
    "purcell_factor", "reduced_domain_grid", "reduced_domain_vertices",
    "required_purcell", "ring_dipoles", "run_pipeline", "sample_nearfield",
    "select_interacting", "superpose_field", "total_efficiency",
    "write_curve_csv", "write_fig2_csv", "write_report_json", "zpl_efficiency",
]
