//! Periodic scalar fields on `[0,1]^N` with analytic gradients.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tol;
use crate::{Error, Result};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A scalar field `f: [0,1]^N → R`, 1-periodic in every coordinate, with an
/// analytic gradient evaluator.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    f: Arc<EvalFn>,
    grad: Arc<GradFn>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.dim).finish()
    }
}

impl ScalarField {
    pub fn new(
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            f: Arc::new(f),
            grad: Arc::new(grad),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.f)(x)
    }

    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.grad)(x, out);
    }

    pub fn grad_norm(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim];
        self.grad_into(x, &mut g);
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Verifies the analytic gradient against central finite differences at
    /// seeded sample points. Points where both are tiny are skipped (the
    /// relative comparison is meaningless there).
    pub fn check_gradient(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        let mut x = vec![0.0; self.dim];
        let mut g = vec![0.0; self.dim];
        for s in 0..samples {
            for xi in x.iter_mut() {
                *xi = rng.random::<f64>();
            }
            self.grad_into(&x, &mut g);
            for a in 0..self.dim {
                let orig = x[a];
                x[a] = orig + h;
                let fp = self.eval(&x);
                x[a] = orig - h;
                let fm = self.eval(&x);
                x[a] = orig;
                let fd = (fp - fm) / (2.0 * h);
                let scale = g[a].abs().max(fd.abs());
                if scale < 1e-6 {
                    continue;
                }
                if (g[a] - fd).abs() / scale > tol::FIELD_SELF_CHECK {
                    return Err(Error::Falsification(format!(
                        "gradient mismatch at sample {s}, axis {a}: analytic {} vs finite difference {fd}",
                        g[a]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_of_squares(dim: usize) -> ScalarField {
        ScalarField::new(
            dim,
            |x| x.iter().map(|v| v * v).product(),
            |x, out| {
                for a in 0..x.len() {
                    let rest: f64 = x
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != a)
                        .map(|(_, v)| v * v)
                        .product();
                    out[a] = 2.0 * x[a] * rest;
                }
            },
        )
    }

    #[test]
    fn gradient_check_passes_for_consistent_field() {
        product_of_squares(3).check_gradient(1000, 1).unwrap();
    }

    #[test]
    fn gradient_check_catches_wrong_gradient() {
        let bad = ScalarField::new(2, |x| x[0] * x[1], |x, out| {
            out[0] = x[1] * 2.0;
            out[1] = x[0];
        });
        assert!(bad.check_gradient(100, 1).is_err());
    }
}
