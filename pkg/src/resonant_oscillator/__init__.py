"""Resonant bubbles of the 2D quantum harmonic oscillator.

A numerical library for the weakly turbulent mechanism driven by the
pseudo-conformal symmetry: the radial Laguerre-Hermite calculus, the
finite-dimensional bubble modulation system and its backward-shot resonant
trajectory, the renormalized spectral evolution with its smooth decaying
potential, and the continuous-resonant trilinear machinery.
"""

from .basis import (
    QuadratureResolutionWarning,
    RadialQuadrature,
    RadialState,
    eigenvalue,
    hermite_radial,
    hermite_radial_table,
    inner_h_h0_h,
    inner_h_h0sq_h,
    laguerre,
    quad_product_integral,
    sobolev_norm,
    synthesize,
)
from .bubble import (
    ActionAngle,
    ModulationFrame,
    ResonantTrajectory,
    TrajectoryDiagnostics,
    backward_shoot,
    beta,
    energy,
    free_bubble,
    from_action_angle,
    l_squared_closed,
    l_squared_fourier,
    perturbed_hamiltonian,
    rhs_modbeta,
    rhs_syslap,
    time_map,
    to_action_angle,
    trajectory_diagnostics,
)
from .cr import (
    ChiTensor,
    CrModeSolution,
    chi,
    cr_apply,
    cr_potential,
    cr_residual,
    modulation_odes,
    scaling_solution,
    solve_mode_equation,
)
from .evolution import (
    EvolutionState,
    GrowthSeries,
    RemainderRun,
    alpha_const,
    construct_remainder,
    measure_growth,
    potential_field,
    reconstruct_u,
    rhs_renormalized,
    source_term,
    u_h1_norm_sq,
)
from .operators import (
    ModulatedGaussianParams,
    apply_h0_mult,
    apply_lambda,
    apply_laplacian,
    apply_x2,
    complex_gaussian_coeffs,
    free_flow,
    gaussian_fourier,
    grid_h1_norm_sq,
    grid_l2_norm,
    lens_transform,
    modulated_gaussian_h1_sq,
    modulated_gaussian_profile,
)

__version__ = "0.1.0"
