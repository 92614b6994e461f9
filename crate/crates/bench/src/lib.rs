//! Fixtures shared by the benchmarks.

use maxgrowth::numerics::rational_from_f64;
use maxgrowth::{BigRational, Family, HighamInstance};

/// Perturbation size used by the heatmap benchmarks.
pub fn heatmap_epsilon() -> BigRational {
    rational_from_f64(1e-8)
}

/// A strictly valid instance; seeds are fixed so runs are comparable.
pub fn instance(family: Family, n: usize) -> HighamInstance {
    HighamInstance::generate(family, n, 1).expect("benchmark fixture")
}
