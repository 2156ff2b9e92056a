//! Detection and characterization of the three bifurcations of the model:
//! the fold of the boundary equilibria, the Hopf bifurcation at the larger
//! diagonal equilibrium, and the two-parameter unfolding of the
//! codimension-2 cusp on the diagonal fold.

mod hopf;
mod saddle_node;
mod takens;

pub use hopf::{
    critical_s_by_bisection, first_lyapunov, hopf_critical, simulate_hopf_side, DiagonalRoot,
    HopfCritical, HopfDirection, HopfReport, HopfSideOutcome, LimitCycleEvidence, NoCycleReason,
};
pub use saddle_node::{saddle_node_check, SaddleNodeReport};
pub use takens::{
    bt_chain_self_check, bt_organizing_center, bt_phase_census, bt_unfold, uniform_eta_grid,
    BtCensusCell, BtOrganizingCenter, BtRegime, BtReport, Stage20, Stage21, Stage22, Stage24,
    Stage25, Stage26, Stage27,
};
