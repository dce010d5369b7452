//! Lagrangian relaxation of the capacity constraint, solved by minimum cuts.

mod exact;
mod lr;
pub mod maxflow;

pub use exact::{dominance_fixings, lr_branch_and_bound, ExactSolution};
pub use lr::{
    inner_value, lp_to_lr, lr_to_lp, mu_upper_bound, papprox_certificate, solve_lr, solve_lr_inner,
    solve_lr_inner_with, solve_lr_with, threshold, LpPoint, LrSolution, PApproxCertificate,
    TieBreak,
};
