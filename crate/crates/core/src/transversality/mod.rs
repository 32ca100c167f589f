//! Cone field, transversality of image cones, the sums `phi` and `varphi`,
//! the series `Omega` and the cohomology detector.

pub mod cohomology;
pub mod cone;
pub mod invariance;
pub mod mass;
pub mod omega;

pub use cohomology::{cohomology_detect, CohomologyOptions, CohomologyVerdict, Verdict};
pub use cone::{
    block_jacobian, block_jacobian_forward, block_jacobians_transversal, cones_transversal,
    transversality_ratio, BlockJacobian, Cone, ConeImage, CONE_MARGIN,
};
pub use invariance::{cone_invariance_check, invariance_factor, InvarianceReport};
pub use mass::{
    phi_at, phi_envelope, phi_sum, phi_table, preimages, varphi_sup, varphi_sum, varphi_table, y_grid,
    PhiRow, PhiTable, Preimage,
};
pub use omega::{omega_depth, omega_limit, omega_tail_bound, theta_series, BranchPolicy, OmegaValue};
