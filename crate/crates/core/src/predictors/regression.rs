//! Linear regression `ŷ = W x` fitted by least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, NormalEquations};

/// Relative ridge added to the normal equations for rank safety.
pub const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    /// `out_dim × in_dim`; the input already carries the constant 1.
    pub w: Matrix,
}

/// A fitted model and its mean squared training residual per example.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub model: RegressionModel,
    pub residual: f64,
}

impl RegressionModel {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            w: Matrix::zeros(out_dim, in_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.w.mul_vec(x)
    }
}

/// Minimizes `Σ ‖y - W x‖²` over the rows of `x` and `y`.
pub fn regression_fit(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<RegressionFit> {
    if x.len() != y.len() {
        return Err(Error::precondition("design and target row counts differ"));
    }
    let d = x.first().map_or(0, Vec::len);
    let k = y.first().map_or(0, Vec::len);
    if x.len() <= d {
        return Err(Error::Training(format!(
            "regression needs more than {d} examples, got {}",
            x.len()
        )));
    }
    let mut ne = NormalEquations::new(d, k);
    for (xi, yi) in x.iter().zip(y) {
        if xi.len() != d || yi.len() != k {
            return Err(Error::precondition("ragged regression data"));
        }
        ne.add_row(xi, yi, 1.0);
    }
    let model = RegressionModel {
        w: ne.solve(RIDGE)?.transpose(),
    };
    if !model.w.is_finite() {
        return Err(Error::numerical("regression produced non-finite weights", f64::INFINITY));
    }
    let residual = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            model
                .predict(xi)
                .iter()
                .zip(yi)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
        })
        .sum::<f64>()
        / x.len() as f64;
    Ok(RegressionFit { model, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_design(rng: &mut impl Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| {
                let mut r: Vec<f64> = (0..d - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                r.push(1.0);
                r
            })
            .collect()
    }

    #[test]
    fn recovers_exact_linear_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_design(&mut rng, 200, 18);
        let w0 = Matrix::from_rows(
            &(0..8)
                .map(|_| (0..18).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect::<Vec<_>>(),
        );
        let y: Vec<Vec<f64>> = x.iter().map(|r| w0.mul_vec(r)).collect();
        let fit = regression_fit(&x, &y).unwrap();
        for (a, b) in fit.model.w.as_slice().iter().zip(w0.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }

        let mut x2 = x.clone();
        let mut y2 = y.clone();
        x2.push(x[3].clone());
        y2.push(y[3].clone());
        let fit2 = regression_fit(&x2, &y2).unwrap();
        for (a, b) in fit.model.w.as_slice().iter().zip(fit2.model.w.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_targets_give_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_design(&mut rng, 50, 5);
        let y = vec![vec![0.0; 3]; 50];
        let fit = regression_fit(&x, &y).unwrap();
        assert!(fit.model.w.as_slice().iter().all(|&w| w == 0.0));
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn prediction_cases() {
        let m = RegressionModel::zeros(2, 3);
        assert_eq!(m.predict(&[1.0, 2.0, 3.0]), vec![0.0, 0.0]);
        let m = RegressionModel {
            w: Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]),
        };
        assert_eq!(m.predict(&[0.0, 1.0, 0.0]), vec![2.0, 5.0]);
    }

    #[test]
    fn too_few_examples_is_a_training_error() {
        let x = vec![vec![1.0, 1.0]; 2];
        let y = vec![vec![0.0]; 2];
        assert!(matches!(regression_fit(&x, &y), Err(Error::Training(_))));
    }

    #[test]
    fn duplicate_columns_are_rescued_or_reported() {
        // two identical columns: the ridge makes the system solvable
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let v = rng.gen_range(-1.0..1.0);
                vec![v, v, 1.0]
            })
            .collect();
        let y: Vec<Vec<f64>> = x.iter().map(|r| vec![2.0 * r[0] + 1.0]).collect();
        match regression_fit(&x, &y) {
            Ok(fit) => assert!(fit.residual < 1e-6),
            Err(e) => assert!(matches!(e, Error::Numerical { .. })),
        }
    }
}
