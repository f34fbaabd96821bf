"""gyrokit: S-parameter toolkit for magnet-free nonreciprocal metasurfaces.

Designs, synthesizes, and analyzes transistor-loaded ring metasurface unit
cells at the scattering-parameter level: Floquet S-matrix handling and
reciprocity checks, Jones/circular polarimetry (transmission- and
reflection-side rotation and ellipticity spectra), the gyromagnetic
precession physics the surface imitates, microstrip ring sizing,
EM + circuit co-simulation via exact S-block cascading, and quasi-Newton
design optimization.  The ``gyrokit`` CLI drives the same flow from
Touchstone files.
"""

__version__ = "0.1.0"

from .cosim import (
    OptimizationGoal,
    OptimizeResult,
    SurrogateParams,
    cosim,
    expand_twoport,
    finite_diff_gradient,
    kpi_cost,
    optimize_surrogate,
    passivity_report,
    quasi_newton_minimize,
    synth_ring_response,
)
from .errors import GyroKitError
from .ferrite import (
    FerriteParams,
    PolderTensor,
    Trajectory,
    integrate_llg,
    larmor_frequency,
    llg_rhs,
    polder_tensor,
    precession_frequency,
)
from .io import (
    Network,
    RunConfig,
    export_polarimetry_csv,
    map_ports_to_floquet,
    parse_touchstone,
    write_touchstone,
)
from .polarimetry import (
    CircularJones,
    JonesMatrix,
    PolarimetrySweep,
    analyze_sweep,
    circ_to_lin,
    ellipticity,
    find_resonance,
    lin_to_circ,
    rotation_angle,
)
from .resonator import (
    RingGeometry,
    Substrate,
    effective_permittivity,
    microstrip_z0,
    resonance_frequency,
    ring_geometry_for,
)
from .smatrix import (
    BlockDecomposition,
    FloquetSMatrix,
    FloquetSweep,
    cascade,
    decompose_blocks,
    perfect_thru,
    reassemble_blocks,
    reciprocity_defect,
)

__all__ = [
    "__version__",
    "GyroKitError",
    # scattering matrices
    "FloquetSMatrix",
    "FloquetSweep",
    "BlockDecomposition",
    "decompose_blocks",
    "reassemble_blocks",
    "reciprocity_defect",
    "cascade",
    "perfect_thru",
    # polarimetry
    "JonesMatrix",
    "CircularJones",
    "PolarimetrySweep",
    "lin_to_circ",
    "circ_to_lin",
    "ellipticity",
    "rotation_angle",
    "analyze_sweep",
    "find_resonance",
    # ferrite physics
    "FerriteParams",
    "PolderTensor",
    "Trajectory",
    "larmor_frequency",
    "polder_tensor",
    "llg_rhs",
    "integrate_llg",
    "precession_frequency",
    # ring sizing
    "Substrate",
    "RingGeometry",
    "effective_permittivity",
    "microstrip_z0",
    "ring_geometry_for",
    "resonance_frequency",
    # surrogate, co-simulation, optimization
    "SurrogateParams",
    "OptimizationGoal",
    "OptimizeResult",
    "synth_ring_response",
    "expand_twoport",
    "cosim",
    "passivity_report",
    "kpi_cost",
    "finite_diff_gradient",
    "quasi_newton_minimize",
    "optimize_surrogate",
    # file I/O
    "Network",
    "RunConfig",
    "parse_touchstone",
    "write_touchstone",
    "map_ports_to_floquet",
    "export_polarimetry_csv",
]
