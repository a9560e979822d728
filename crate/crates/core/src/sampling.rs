//! Reproducible sample points.
//!
//! Points come from `ChaCha8Rng::seed_from_u64(seed)`. Ball coordinates are
//! drawn uniformly from the cube `[-R, R]^k` and rejected outside the ball;
//! interval coordinates are uniform. Candidates failing the chart domain
//! predicate are rejected as well.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{FramedChart, SampleRegion};
use crate::jet::C64;
use crate::svforms::SpinorForm;

const MAX_ATTEMPTS: usize = 1_000_000;

pub fn sample_region(region: &SampleRegion, count: usize, seed: u64, accept: impl Fn(&[f64]) -> bool) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let mut x: Vec<f64> = (0..region.ball_dims)
            .map(|_| rng.random_range(-region.radius..=region.radius))
            .collect();
        if x.iter().map(|v| v * v).sum::<f64>() >= region.radius * region.radius {
            continue;
        }
        x.extend(region.intervals.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)));
        if accept(&x) {
            out.push(x);
        }
    }
    out
}

/// `count` points of the chart's sampling region.
pub fn sample_chart(chart: &FramedChart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_region(chart.region(), count, seed, |x| chart.contains(x))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the square `[-1, 1] + i[-1, 1]`.
pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

pub fn random_real_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn random_spinor_form(rng: &mut impl Rng, n: usize, degree: usize, spin: usize) -> SpinorForm<C64> {
    let len = crate::exterior::binomial(n, degree) * spin;
    SpinorForm::from_parts(n, degree, spin, (0..len).map(|_| random_c64(rng)).collect())
}
