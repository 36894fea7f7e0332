use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::linalg::Matrix;

/// Parameters of the Lorenz equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzParams {
    pub sigma: f64,
    pub b: f64,
    pub r: f64,
}

impl LorenzParams {
    pub const SIGMA: f64 = 10.0;
    pub const B: f64 = 8.0 / 3.0;

    /// Classical parameters `sigma = 10`, `b = 8/3` at Rayleigh number `r`.
    pub fn classical(r: f64) -> Self {
        Self { sigma: Self::SIGMA, b: Self::B, r }
    }

    pub fn new(sigma: f64, b: f64, r: f64) -> Result<Self> {
        let p = Self { sigma, b, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.b > 0.0 && self.r > 0.0)
            || !(self.sigma.is_finite() && self.b.is_finite() && self.r.is_finite())
        {
            return Err(contract(format!(
                "Lorenz parameters must be finite and positive, got sigma={}, b={}, r={}",
                self.sigma, self.b, self.r
            )));
        }
        Ok(())
    }

    /// Height of the plane containing `C1` and `C2`.
    pub fn section_height(&self) -> f64 {
        self.r - 1.0
    }
}

/// Radial normal form with `k` unstable and `n - k` stable coordinates.
///
/// On the unstable block `x_u' = lambda x_u - |x_u|^2 x_u`, on the rest `x_s' = -x_s`.
/// For `lambda > 0` the sphere `|x_u| = sqrt(lambda)` is attracting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormParams {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
}

impl NormalFormParams {
    pub fn new(n: usize, k: usize, lambda: f64) -> Result<Self> {
        let p = Self { n, k, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.k < 1 || self.k > self.n || !self.lambda.is_finite() {
            return Err(contract(format!(
                "normal form needs n >= 2 and 1 <= k <= n with finite lambda, got n={}, k={}, lambda={}",
                self.n, self.k, self.lambda
            )));
        }
        Ok(())
    }
}

/// A parametrized vector field with an exact Jacobian.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    /// Writes `F(x)` into `out`. Both slices have length `dim()`.
    fn field(&self, x: &[f64], out: &mut [f64]);

    /// Writes the row-major Jacobian `dF(x)` into `out` (length `dim()^2`).
    fn jacobian(&self, x: &[f64], out: &mut [f64]);
}

/// The models the toolkit knows how to analyse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    Lorenz(LorenzParams),
    NormalForm(NormalFormParams),
    /// `x' = -x` in `dim` dimensions.
    LinearSink { dim: usize },
    /// `x' = 0`; every point is an equilibrium.
    Zero { dim: usize },
}

impl Model {
    pub fn lorenz(r: f64) -> Self {
        Model::Lorenz(LorenzParams::classical(r))
    }

    pub fn normal_form(n: usize, k: usize, lambda: f64) -> Result<Self> {
        Ok(Model::NormalForm(NormalFormParams::new(n, k, lambda)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Lorenz(p) => p.validate(),
            Model::NormalForm(p) => p.validate(),
            Model::LinearSink { dim } | Model::Zero { dim } => {
                if *dim == 0 {
                    Err(contract("model dimension must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn as_lorenz(&self) -> Option<&LorenzParams> {
        match self {
            Model::Lorenz(p) => Some(p),
            _ => None,
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(contract(format!(
                "state has dimension {len}, model expects {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

impl VectorField for Model {
    fn dim(&self) -> usize {
        match self {
            Model::Lorenz(_) => 3,
            Model::NormalForm(p) => p.n,
            Model::LinearSink { dim } | Model::Zero { dim } => *dim,
        }
    }

    #[inline]
    fn field(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Model::Lorenz(p) => {
                out[0] = p.sigma * (x[1] - x[0]);
                out[1] = p.r * x[0] - x[1] - x[0] * x[2];
                out[2] = x[0] * x[1] - p.b * x[2];
            }
            Model::NormalForm(p) => {
                let norm2: f64 = x[..p.k].iter().map(|v| v * v).sum();
                for i in 0..p.k {
                    out[i] = p.lambda * x[i] - norm2 * x[i];
                }
                for i in p.k..p.n {
                    out[i] = -x[i];
                }
            }
            Model::LinearSink { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -v;
                }
            }
            Model::Zero { .. } => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        out.iter_mut().for_each(|o| *o = 0.0);
        match self {
            Model::Lorenz(p) => {
                out[0] = -p.sigma;
                out[1] = p.sigma;
                out[3] = p.r - x[2];
                out[4] = -1.0;
                out[5] = -x[0];
                out[6] = x[1];
                out[7] = x[0];
                out[8] = -p.b;
            }
            Model::NormalForm(p) => {
                let norm2: f64 = x[..p.k].iter().map(|v| v * v).sum();
                for i in 0..p.k {
                    for j in 0..p.k {
                        out[i * n + j] = -2.0 * x[i] * x[j];
                    }
                    out[i * n + i] += p.lambda - norm2;
                }
                for i in p.k..p.n {
                    out[i * n + i] = -1.0;
                }
            }
            Model::LinearSink { .. } => {
                for i in 0..n {
                    out[i * n + i] = -1.0;
                }
            }
            Model::Zero { .. } => {}
        }
    }
}

/// `F(state)`, checking the dimension.
pub fn eval_field(model: &Model, state: &[f64]) -> Result<Vec<f64>> {
    model.check_dim(state.len())?;
    let mut out = vec![0.0; state.len()];
    model.field(state, &mut out);
    Ok(out)
}

/// Exact Jacobian of [`eval_field`].
pub fn eval_jacobian(model: &Model, state: &[f64]) -> Result<Matrix> {
    model.check_dim(state.len())?;
    let n = state.len();
    let mut out = vec![0.0; n * n];
    model.jacobian(state, &mut out);
    Ok(Matrix::from_row_major(n, n, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorenz_origin_is_equilibrium() {
        for r in [0.5, 1.0, 13.926, 28.0] {
            let f = eval_field(&Model::lorenz(r), &[0.0, 0.0, 0.0]).unwrap();
            assert_eq!(f, vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn lorenz_substitution() {
        let f = eval_field(&Model::lorenz(28.0), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 26.0);
        assert!((f[2] + 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normal_form_invariant_circle() {
        let m = Model::normal_form(3, 2, 0.25).unwrap();
        let f = eval_field(&m, &[0.5, 0.0, 0.7]).unwrap();
        assert!(f[0].abs() < 1e-15);
        assert_eq!(f[1], 0.0);
        assert!((f[2] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn jacobian_at_origin() {
        let j = eval_jacobian(&Model::lorenz(28.0), &[0.0; 3]).unwrap();
        let expect = [[-10.0, 10.0, 0.0], [28.0, -1.0, 0.0], [0.0, 0.0, -8.0 / 3.0]];
        for (i, row) in expect.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                assert_eq!(j.get(i, k), *v);
            }
        }
        let m = Model::normal_form(4, 3, 0.3).unwrap();
        let j = eval_jacobian(&m, &[0.0; 4]).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let want = match (i == k, i < 3) {
                    (true, true) => 0.3,
                    (true, false) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(j.get(i, k), want);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        assert!(matches!(
            eval_field(&Model::lorenz(2.0), &[1.0, 2.0]),
            Err(crate::Error::Contract(_))
        ));
        assert!(eval_jacobian(&Model::lorenz(2.0), &[1.0; 4]).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(LorenzParams::new(10.0, 8.0 / 3.0, -1.0).is_err());
        assert!(NormalFormParams::new(3, 4, 0.1).is_err());
        assert!(NormalFormParams::new(1, 1, 0.1).is_err());
        assert!(NormalFormParams::new(3, 3, 0.1).is_ok());
    }
}
