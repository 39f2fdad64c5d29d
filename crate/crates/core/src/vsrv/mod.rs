//! Vector-scaling regular variation: radii, spectral components and the
//! statistics built from exceedances of the radius.

mod angular;
mod exceedance;
mod norm;

pub use angular::{
    angle, angular_histogram, block_mass, empirical_tail_process, nonstandard_angular, spectral_recursion_check,
    AngularHistogram, BlockMass, WeightedAngular, DEFAULT_BINS,
};
pub use exceedance::{tail_count, ExceedanceRecord, ExceedanceSet, ExceedanceSink, DEFAULT_MIN_RECORDS};
pub use norm::{log_vs_norm, max_norm, scale_by_radius, spectral_component, vs_norm};
