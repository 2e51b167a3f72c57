//! Fixture problems shared by the benchmarks in `benches/`.

use stefan_core::PhaseConfig;

/// An `m`-transition phase layout with mildly varying coefficients.
pub fn phases(m: usize) -> PhaseConfig {
    let u = (0..=m).map(|i| i as f64).collect();
    let a = (0..=m).map(|i| 1.0 + 0.1 * i as f64).collect();
    let k = (0..=m).map(|i| 1.0 + 0.2 * (i % 3) as f64).collect();
    PhaseConfig::new(u, a, k, vec![0.8; m]).expect("fixture phases are valid")
}
