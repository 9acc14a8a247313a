//! Series and Monte Carlo estimators: the renewal-series asymptotics, tilted
//! expectations, contour-membership probabilities, the Gibbs sampler of the
//! particle model and hole probabilities of Poisson configurations.

mod events;
mod gibbs;
mod holes;
mod membership;
mod renewal;
mod tilted;

pub use events::{contour_events, ContourEvents};
pub use gibbs::{
    birth_acceptance, death_acceptance, gibbs_step, log_density, pair_weight, run_gibbs,
    small_system_oracle, GibbsRun, GibbsState, SmallSystemOracle, REVALIDATE_EVERY, REVALIDATE_TOL,
    TRUNCATION_TOL,
};
pub use holes::{hole_probability_estimate, HoleEstimate, GRID_CONSTANT};
pub use membership::{
    contour_membership_prob, contour_membership_prob_with, membership_diagnostics,
    MembershipDiagnostics, MembershipEstimate, MembershipOptions, MembershipRow, BATCHES,
    DEFAULT_CHI_DELTA, OFFSET_FACTOR,
};
pub use renewal::{renewal_expectation_series, renewal_log_expectation, RenewalSeriesResult};
pub use tilted::{tilted_expect_mc, GapSampler, TiltProposal, TiltedEstimate, DEGENERATE_ESS};
