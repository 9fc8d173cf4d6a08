//! Small numeric helpers shared across the samplers.

/// Natural log of the Gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    libm::lgamma(x)
}

pub const LN_2: f64 = std::f64::consts::LN_2;

/// Samples an index proportionally to `weights`. Weights must be
/// non-negative with a positive total.
pub fn sample_index<R: rand::Rng + ?Sized>(
    weights: impl Iterator<Item = f64>,
    total: f64,
    rng: &mut R,
) -> usize {
    debug_assert!(total > 0.0);
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
        last = i;
    }
    // Rounding can leave a sliver of mass past the last weight.
    last
}
