//! Seeded Monte Carlo measure estimators on `[0,1]^N`.
//!
//! Sampling is split into fixed-size chunks; chunk `c` draws from stream
//! `c` of a ChaCha generator seeded with the caller's seed, and the chunk
//! statistics are merged in chunk order. The result is bit-identical
//! regardless of how many worker threads rayon uses.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ScalarField;

const CHUNK: usize = 16_384;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    /// Number of samples with a nonzero contribution. Zero means the
    /// estimator saw nothing (infinite relative error).
    pub support: u64,
}

impl Estimate {
    pub fn is_degenerate(&self) -> bool {
        self.support == 0
    }

    /// Distance from a reference value in units of the standard error.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        if self.se == 0.0 {
            if (self.value - reference).abs() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - reference).abs() / self.se
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
    support: u64,
}

/// Chunked deterministic mean of `value(x)` over uniform `x ∈ [0,1]^N`.
fn mc_mean(dim: usize, samples: usize, seed: u64, value: impl Fn(&[f64]) -> f64 + Sync) -> Estimate {
    assert!(samples > 0);
    let chunks: Vec<(usize, usize)> = (0..samples)
        .step_by(CHUNK)
        .map(|start| (start / CHUNK, CHUNK.min(samples - start)))
        .collect();
    let partials: Vec<Moments> = chunks
        .par_iter()
        .map(|&(chunk_index, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk_index as u64);
            let mut x = vec![0.0; dim];
            let mut m = Moments::default();
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = rng.random::<f64>();
                }
                let v = value(&x);
                m.sum += v;
                m.sum_sq += v * v;
                if v != 0.0 {
                    m.support += 1;
                }
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for m in partials {
        total.sum += m.sum;
        total.sum_sq += m.sum_sq;
        total.support += m.support;
    }
    let n = samples as f64;
    let mean = total.sum / n;
    let var = (total.sum_sq / n - mean * mean).max(0.0);
    Estimate {
        value: mean,
        se: (var / n).sqrt(),
        support: total.support,
    }
}

/// Unbiased Monte Carlo volume of `{x ∈ [0,1]^N : indicator(x)}`.
pub fn mc_volume(
    dim: usize,
    indicator: impl Fn(&[f64]) -> bool + Sync,
    samples: usize,
    seed: u64,
) -> Estimate {
    mc_mean(dim, samples, seed, |x| if indicator(x) { 1.0 } else { 0.0 })
}

/// Coarea band estimator for the (N−1)-volume of the level set `{f = λ}`:
/// the mean of `|∇f| · 1{|f−λ| < band/2} / band`. Consistent as the band
/// shrinks and the sample count grows.
///
/// An estimate with `support == 0` (no sample landed in the band) carries
/// value 0 and the degenerate-band flag.
pub fn level_set_area_mc(
    field: &ScalarField,
    lambda: f64,
    band: f64,
    samples: usize,
    seed: u64,
) -> Estimate {
    assert!(band > 0.0, "band width must be positive");
    let half = band / 2.0;
    mc_mean(field.dim(), samples, seed, |x| {
        if (field.eval(x) - lambda).abs() < half {
            field.grad_norm(x) / band
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_indicator_is_exact() {
        let e = mc_volume(3, |_| true, 1000, 1);
        assert_eq!(e.value, 1.0);
        assert_eq!(e.se, 0.0);
    }

    #[test]
    fn half_space_within_four_se() {
        let e = mc_volume(2, |x| x[0] < 0.5, 200_000, 2);
        assert!(e.sigmas_from(0.5) < 4.0, "value={} se={}", e.value, e.se);
    }

    #[test]
    fn arcsin_measure_in_one_dimension() {
        // {sin(πx) ≤ λ} at λ = sin(π/4) has measure exactly 1/2.
        let lambda = (PI / 4.0).sin();
        let e = mc_volume(1, |x| (PI * x[0]).sin() <= lambda, 200_000, 3);
        assert!(e.sigmas_from(0.5) < 4.0, "value={} se={}", e.value, e.se);
    }

    #[test]
    fn determinism_across_thread_counts() {
        // Chunked streams: the estimate depends only on (samples, seed).
        let a = mc_volume(3, |x| x.iter().sum::<f64>() < 1.0, 100_000, 7);
        let b = mc_volume(3, |x| x.iter().sum::<f64>() < 1.0, 100_000, 7);
        assert_eq!(a, b);
    }

    fn sine_field() -> ScalarField {
        ScalarField::new(
            1,
            |x| (PI * x[0]).sin(),
            |x, out| out[0] = PI * (PI * x[0]).cos(),
        )
    }

    #[test]
    fn level_set_of_sine_counts_two_points() {
        // {sin(πx) = 1/2} consists of two points; the coarea estimator
        // converges to the point count 2.
        let f = sine_field();
        let e = level_set_area_mc(&f, 0.5, 0.02, 400_000, 4);
        assert!(
            (e.value - 2.0).abs() < 0.2,
            "value={} se={}",
            e.value,
            e.se
        );
    }

    #[test]
    fn level_above_max_is_degenerate() {
        let f = sine_field();
        let e = level_set_area_mc(&f, 2.0, 0.02, 10_000, 5);
        assert_eq!(e.value, 0.0);
        assert!(e.is_degenerate());
    }

    #[test]
    fn circle_perimeter_from_distance_field() {
        // Distance-like field of a circle of radius r centered in the
        // square: |∇f| = 1, so the band estimator reads off the perimeter.
        let r = 0.25;
        let f = ScalarField::new(
            2,
            move |x| {
                let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
                (dx * dx + dy * dy).sqrt() - r
            },
            |x, out| {
                let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
                let n = (dx * dx + dy * dy).sqrt().max(1e-30);
                out[0] = dx / n;
                out[1] = dy / n;
            },
        );
        let e = level_set_area_mc(&f, 0.0, 0.01, 400_000, 6);
        let perimeter = 2.0 * PI * r;
        assert!(
            ((e.value - perimeter) / perimeter).abs() < 0.05,
            "value={} expected={perimeter}",
            e.value
        );
    }
}
