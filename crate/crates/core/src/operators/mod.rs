//! Operators acting on sampled and radial functions.

mod grand;
mod hardy;
mod heat;
mod maximal;
mod spherical;

pub use grand::{grand_maximal, rho_n, BumpKind, TestFamily, TestMember, MAX_SEMINORM_ORDER};
pub use hardy::{hardy, hardy_dual, hardy_nd, weighted_theta_norm, RadialFunction};
pub use heat::{heat, heat_sup, log_times, HeatOutput};
pub use maximal::{hl_maximal, lu_aggregate, vector_maximal};
pub use spherical::{spherical_mean, spherical_mean_with, SphericalMean, DEFAULT_ROTATIONS, ROTATION_SEED};
