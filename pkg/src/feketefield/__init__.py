"""Weighted Fekete configurations and plane Coulomb gas diagnostics.

Conventions used throughout the package:

* area measure  dA = d^2z / pi  (the unit disk has measure 1),
* Laplacian     Delta = (1/4) (d^2/dx^2 + d^2/dy^2), so Delta |z|^2 = 1,
* gradients of real fields are encoded as complex numbers g = f_x + i f_y,
* external potentials Q grow faster than log|z|^2 at infinity.
"""

from feketefield.quadrature import (
    Quadrature1D,
    Grid2D,
    gauss_legendre,
    polar_grid,
    cartesian_grid,
    integrate2d,
)
from feketefield.potentials import (
    Potential,
    ginibre,
    mittag_leffler,
    ellipse_potential,
    custom_potential,
    eval_potential,
    grad_potential,
    laplacian_potential,
    growth_check,
)
from feketefield.equilibrium import (
    Droplet,
    EquilibriumMeasure,
    solve_droplet_radial,
    droplet_ellipse,
    droplet_for,
    equilibrium_measure,
    log_potential,
    robin_constant,
    obstacle,
    equilibrium_energy,
    equilibrium_residual,
)
from feketefield.fekete import (
    Configuration,
    SolverConfig,
    SolverReport,
    coulomb_energy,
    coulomb_gradient,
    solve_fekete,
    separation,
    counting_vs_sigma,
    metropolis_sample,
)
from feketefield.kernels import (
    WeightedBasis,
    RescaleFrame,
    KernelModel,
    build_basis,
    kernel_model,
    kernel_eval,
    one_point_function,
    rescale_frame,
    rescaled_one_point,
    rescaled_kernel,
    berezin,
    rescaled_berezin,
)
from feketefield.limits import (
    PlasmaParams,
    plasma_F,
    dawson_H,
    ginibre_G,
    smoothed_indicator,
    kernel_Km,
    berezin_Bm,
    mass_one_mu,
    ward_residual,
)
from feketefield.density import (
    MovingPointPlan,
    DensityEstimate,
    ConcentrationSpectrum,
    classify_regime,
    count_in_disk,
    bl_density,
    strip_count_bound,
    concentration_spectrum,
    trace_defect,
    lagrange_basis,
    bernstein_check,
    interpolation_certificate,
    m_family_certificate,
)

__version__ = "0.1.0"
