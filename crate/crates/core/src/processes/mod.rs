//! Auxiliary randomness of the droplet surface: angular Poisson points, the
//! mean-centred Brownian bridge, tilt weights, Z-configurations and their statistics.

mod angular;
mod bridge;
mod discretisation;
mod statistics;

pub use angular::{sample_angular, AngularSample};
pub use bridge::{
    bridge_cov, discretised_mean_variance, sample_bridge, BridgeFactor, BridgeMode, KlPath,
    SequentialBridge,
};
pub use discretisation::{discretisation_bounds, DiscretisationReport};
pub use statistics::{
    build_z, chi_decomposition, surface_statistics, tilt_weight, ChiDecomposition,
    SurfaceStatistics, TiltWeight, ZConfiguration,
};
