"""Central tolerance table.

Every numerical threshold used by the library and its test suite lives here,
so thresholds are auditable in one place and never scattered as literals.
"""

TOL = {
    # exact algebra
    "qtensor_symmetry": 1e-12,
    "qtensor_trace_rel": 1e-12,
    "frame_orthonormal": 1e-13,
    "frame_derivative_fd": 1e-8,
    "w_roundtrip": 1e-13,
    "s_plus_identity_rel": 1e-12,
    "f_bulk_floor": -1e-12,
    "h_floor": -1e-12,
    "odd_k_component": 1e-12,
    # discretized energies and solvers
    "radial_solve": 1e-8,
    "disk_solve": 1e-6,             # max-norm scaled residual floors near
                                    # 5e-7 at desk grids (innermost-ring mass
                                    # amplifies assembly rounding)
    "multistart_solve": 5e-6,       # classification-grade stop for seeded
                                    # descent; the last decade fights the
                                    # defect-drift soft mode for minutes
    "ode_residual_rel": 1e-6,        # x s_plus, interior nodes
    "grad_fd_radial_rel": 1e-6,
    "grad_fd_disk_rel": 1e-5,
    "max_principle_slack": 1e-6,
    "z2_pair_rel": 1e-6,             # x s_plus, node-wise
    "lift_energy_rel": 1e-10,
    "rotation_invariance": 1e-12,
    "refine_order_min": 1.8,
    # harmonic limit and decomposition
    "grad_n_quad_rel": 5e-3,
    "w_star_norm": 1e-12,
    "pi_idempotent": 1e-12,
    "pi_normal": 1e-10,
    "pi_tangent_fd": 1e-8,
    "decomp_newton": 1e-12,
    "decomp_roundtrip": 1e-9,
    "decomp_reconstruction": 1e-10,
    "normal_commutator": 1e-10,
    "min_v_dot_n": 0.5,
    # spectra
    "eig_residual_rel": 1e-8,
    "hessian_symmetry": 1e-7,
    "rayleigh_rel": 1e-6,
    "l_par_scalar_abs": 5e-3,
    "l_par_eigfn_corr": 0.999,
    "l_par_constrained_min": 0.05,
    "l_perp_exact": 1e-12,
    "hessian_psd_floor": -1e-6,
    # paths
    "path_endpoint": 1e-8,
    "path_max_variation": 0.10,
    "conformal_energy_rel": 0.01,
    "alpha_growth_min": 2.0,
    "barrier_descent_slack": 1e-7,   # relative, 1 + |barrier| scaled
    # hard bounds and orderings (zero slack by construction)
    "energy_upper_slack": 0.0,
    "monotone_slack": 0.0,
    # scaling laws
    "alpha_lower_frac": 0.65,
    "odd_slope_rel": 0.15,
    "even_range_rel": 0.05,
    "slope_coincidence_rel": 0.10,
    # multistart structure
    "multistart_match_rel": 1e-4,    # x s_plus, node-wise
    "so2_defect_rel": 1e-6,
    "z2_defect_rel_min": 1e-2,
    "angular_variance_max": 1e-8,
}
