//! Numerical tolerances used by the geometric predicates.

/// Tolerance of geometric predicates (tangency, coincidence, containment).
pub const GEOM_EPS: f64 = 1e-12;

/// Maximal gap between consecutive arc endpoints in a closed chain.
pub const CHAIN_CLOSURE: f64 = 1e-9;

/// Angular perturbation used to classify degenerate tangencies.
pub const TANGENCY_PERTURBATION: f64 = 1e-12;

/// Radial offset at which candidate boundary arcs of the eroded region are classified.
pub const EROSION_PROBE: f64 = 1e-8;

/// Tolerance for matching arc endpoints to configuration points.
pub const POINT_MATCH: f64 = 1e-7;

/// Disc radius of the model.
pub const DISC_RADIUS: f64 = 2.0;
