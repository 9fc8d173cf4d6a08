//! Univariate slice sampling (Neal 2003) with step-out and shrinkage, used
//! to resample Pitman-Yor hyperparameters under vague priors.

use rand::Rng;

use crate::crp::{PypParams, SeatingSummary};
use crate::math::ln_gamma;

/// One slice-sampling update of `x0` under an unnormalized log density.
/// Out-of-support points must return `f64::NEG_INFINITY`.
pub fn slice_sample<R: Rng + ?Sized>(
    x0: f64,
    log_density: impl Fn(f64) -> f64,
    initial_width: f64,
    max_step_outs: u32,
    rng: &mut R,
) -> f64 {
    let f0 = log_density(x0);
    debug_assert!(f0.is_finite(), "slice sampler started outside support");
    let level = f0 + rng.random::<f64>().ln();

    // Step out: place an interval of the initial width around x0, then grow
    // each end until it falls below the slice level.
    let w = initial_width;
    let mut left = x0 - rng.random::<f64>() * w;
    let mut right = left + w;
    let mut budget = max_step_outs;
    while budget > 0 && log_density(left) > level {
        left -= w;
        budget -= 1;
    }
    let mut budget_r = max_step_outs;
    while budget_r > 0 && log_density(right) > level {
        right += w;
        budget_r -= 1;
    }

    // Shrink toward x0 until a point inside the slice is found.
    for _ in 0..1000 {
        let x1 = left + rng.random::<f64>() * (right - left);
        if log_density(x1) > level {
            return x1;
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
    }
    x0
}

/// Log density of the discount prior Beta(1, 1) on [0, 1).
fn ln_prior_discount(a: f64) -> f64 {
    if (0.0..1.0).contains(&a) {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Log density (up to a constant) of the strength prior Gamma with shape 10
/// and scale 0.1, mean 1.0.
fn ln_prior_strength(b: f64) -> f64 {
    const SHAPE: f64 = 10.0;
    const SCALE: f64 = 0.1;
    if b > 0.0 {
        (SHAPE - 1.0) * b.ln() - b / SCALE
    } else {
        f64::NEG_INFINITY
    }
}

pub const DISCOUNT_WIDTH: f64 = 0.1;
pub const STRENGTH_WIDTH: f64 = 1.0;
pub const MAX_STEP_OUTS: u32 = 100;

/// Resamples the hyperparameters of one depth given the seating statistics
/// of its restaurants: discount and strength are updated in turn by slice
/// sampling their conditional posteriors. With no seated restaurants the
/// posteriors reduce to the priors.
pub fn resample_params<R: Rng + ?Sized>(
    params: PypParams,
    summary: &SeatingSummary,
    rng: &mut R,
) -> PypParams {
    let discount = slice_sample(
        params.discount,
        |a| {
            let prior = ln_prior_discount(a);
            if prior.is_infinite() {
                return prior;
            }
            let candidate = PypParams {
                discount: a,
                strength: params.strength,
            };
            if candidate.strength <= -a {
                return f64::NEG_INFINITY;
            }
            prior + summary.log_likelihood(candidate)
        },
        DISCOUNT_WIDTH,
        MAX_STEP_OUTS,
        rng,
    );
    let strength = slice_sample(
        params.strength,
        |b| {
            let prior = ln_prior_strength(b);
            if prior.is_infinite() {
                return prior;
            }
            prior
                + summary.log_likelihood(PypParams {
                    discount,
                    strength: b,
                })
        },
        STRENGTH_WIDTH,
        MAX_STEP_OUTS,
        rng,
    );
    PypParams { discount, strength }
}

/// Mean of the strength prior, for reference in tests: shape · scale.
pub fn strength_prior_mean() -> f64 {
    10.0 * 0.1
}

/// Log of the normalized Gamma(10, 0.1) density; exposed for tests that
/// validate the prior parameterization.
pub fn ln_strength_prior_pdf(b: f64) -> f64 {
    const SHAPE: f64 = 10.0;
    const SCALE: f64 = 0.1;
    if b <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (SHAPE - 1.0) * b.ln() - b / SCALE - ln_gamma(SHAPE) - SHAPE * SCALE.ln()
}
