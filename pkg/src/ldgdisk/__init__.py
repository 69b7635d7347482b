"""Numerical laboratory for a tensor order-parameter model on a disk with
winding boundary anchoring: equivariant radial solves, full 2D minimization,
escape limits, spectral stability probes, and mountain-pass paths."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("ldgdisk")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.0.0+src"

from .tensors import (
    Frame,
    FrameContinuityError,
    MaterialParams,
    QTensor,
    WVector,
    act_o2_point,
    act_z2,
    boundary_w,
    compose_o2,
    derive_params,
    f_bulk,
    f_bulk_w,
    frame_basis,
    g_cubic,
    h_bulk2,
    q_from_w,
    w_from_q,
)
from .radial import (
    NonConvergenceError,
    RadialGrid,
    RadialProfile,
    SolverOptions,
    alpha_R,
    minimize_radial,
    newton_stationary,
    ode_residual,
    radial_energy,
    refine_saddle,
)
from .disk import (
    DiskField,
    PolarGrid,
    SymmetryReport,
    disk_energy,
    lift_profile,
    load_field,
    minimize_disk,
    save_field,
    symmetry_diagnostics,
)
from .limits import (
    Decomposition,
    HarmonicLimit,
    OutOfNeighborhoodError,
    decompose,
    eps_norm,
    manifold_defect,
    pi_tangent,
    reconstruct,
)
from .spectra import (
    HessianProbe,
    SpectralReport,
    hessian_smallest,
    l_parallel_spectrum,
    l_perp_point_eigs,
    scalar_mode_correlation,
)
from .paths import (
    MinimizerCache,
    PathConfig,
    PathEnsemble,
    PathProfile,
    SaddleEstimate,
    explicit_gamma,
    explicit_path,
    load_ensemble,
    odd_k_energy_scan,
    path_energy_profile,
    save_ensemble,
    string_relax,
)
from .cli import (
    ExperimentConfig,
    ResultRow,
    ResultTable,
    default_config,
    emit_plotdata,
    load_config,
    run,
)
from .tolerances import TOL

__all__ = [
    "Frame", "FrameContinuityError", "MaterialParams", "QTensor", "WVector",
    "act_o2_point", "act_z2", "boundary_w", "compose_o2", "derive_params",
    "f_bulk", "f_bulk_w", "frame_basis", "g_cubic", "h_bulk2", "q_from_w",
    "w_from_q",
    "NonConvergenceError", "RadialGrid", "RadialProfile", "SolverOptions",
    "alpha_R", "minimize_radial", "newton_stationary", "ode_residual",
    "radial_energy", "refine_saddle",
    "DiskField", "PolarGrid", "SymmetryReport", "disk_energy", "lift_profile",
    "load_field", "minimize_disk", "save_field", "symmetry_diagnostics",
    "Decomposition", "HarmonicLimit", "OutOfNeighborhoodError", "decompose",
    "eps_norm", "manifold_defect", "pi_tangent", "reconstruct",
    "HessianProbe", "SpectralReport", "hessian_smallest",
    "l_parallel_spectrum", "l_perp_point_eigs", "scalar_mode_correlation",
    "MinimizerCache", "PathConfig", "PathEnsemble", "PathProfile",
    "SaddleEstimate", "explicit_gamma", "explicit_path", "load_ensemble",
    "odd_k_energy_scan", "path_energy_profile", "save_ensemble",
    "string_relax",
    "ExperimentConfig", "ResultRow", "ResultTable", "default_config",
    "emit_plotdata", "load_config", "run",
    "TOL", "__version__",
]
