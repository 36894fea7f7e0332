//! Forward-invariant boxes for the supported models.

use serde::{Deserialize, Serialize};

use super::model::{LorenzParams, Model, NormalFormParams};
use crate::error::{contract, Error, Result};

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrappingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl TrappingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(contract(format!("box needs lo < hi componentwise, got {lo:?} / {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// The box scaled by `factor` about its center.
    pub fn scaled(&self, factor: f64) -> Self {
        let c = self.center();
        let half: Vec<f64> = self.widths().iter().map(|w| 0.5 * w * factor).collect();
        Self {
            lo: c.iter().zip(&half).map(|(c, h)| c - h).collect(),
            hi: c.iter().zip(&half).map(|(c, h)| c + h).collect(),
        }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// Safety factor applied to the maximal value of the Lyapunov function over the
/// region where its derivative can be non-negative.
pub const ELLIPSOID_SAFETY: f64 = 1.2;

/// Lyapunov ellipsoid `V = r x^2 + sigma y^2 + sigma (z - 2r)^2 <= C` of the Lorenz flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzEllipsoid {
    pub params: LorenzParams,
    pub level: f64,
}

impl LorenzEllipsoid {
    pub fn value(&self, x: &[f64]) -> f64 {
        let p = &self.params;
        p.r * x[0] * x[0] + p.sigma * x[1] * x[1] + p.sigma * (x[2] - 2.0 * p.r).powi(2)
    }

    /// `dV/dt = -2 sigma (r x^2 + y^2 + b z^2 - 2 b r z)` along the flow.
    pub fn derivative(&self, x: &[f64]) -> f64 {
        let p = &self.params;
        -2.0 * p.sigma * (p.r * x[0] * x[0] + x[1] * x[1] + p.b * x[2] * x[2] - 2.0 * p.b * p.r * x[2])
    }

    pub fn bounding_box(&self) -> TrappingBox {
        let p = &self.params;
        let hx = (self.level / p.r).sqrt();
        let hy = (self.level / p.sigma).sqrt();
        TrappingBox {
            lo: vec![-hx, -hy, 2.0 * p.r - hy],
            hi: vec![hx, hy, 2.0 * p.r + hy],
        }
    }
}

/// Maximum of `V` over the closed region `{dV/dt >= 0}`, i.e. the ellipsoid
/// `r x^2 + y^2 + b (z - r)^2 <= b r^2`.
///
/// On the slice at height `z` the region is the ellipse `r x^2 + y^2 <= s(z)`,
/// where `r x^2 + sigma y^2` peaks at `max(1, sigma) s(z)`; the remaining 1-d problem
/// in `z` is maximised by golden-section search plus the interval endpoints.
pub fn lorenz_max_lyapunov(p: &LorenzParams) -> f64 {
    let s = |z: f64| (p.b * p.r * p.r - p.b * (z - p.r).powi(2)).max(0.0);
    let g = |z: f64| p.sigma.max(1.0) * s(z) + p.sigma * (z - 2.0 * p.r).powi(2);
    let (mut a, mut b) = (0.0, 2.0 * p.r);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
        if (b - a).abs() < 1e-13 * p.r.max(1.0) {
            break;
        }
    }
    g(0.5 * (a + b)).max(g(0.0)).max(g(2.0 * p.r))
}

pub fn lorenz_ellipsoid(p: &LorenzParams) -> LorenzEllipsoid {
    LorenzEllipsoid { params: *p, level: ELLIPSOID_SAFETY * lorenz_max_lyapunov(p) }
}

/// Number of lattice points per axis in the certification shell.
pub const CERTIFICATION_LATTICE: usize = 50;

/// Checks `dV/dt < 0` on every point of a 50^3 lattice over a box slightly larger than
/// the ellipsoid's bounding box that lies outside the ellipsoid.
pub fn certify_lorenz_ellipsoid(e: &LorenzEllipsoid) -> Result<usize> {
    let outer = e.bounding_box().scaled(1.25);
    let m = CERTIFICATION_LATTICE;
    let mut checked = 0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let idx = [i, j, k];
                let x: Vec<f64> = (0..3)
                    .map(|a| outer.lo[a] + (outer.hi[a] - outer.lo[a]) * idx[a] as f64 / (m - 1) as f64)
                    .collect();
                if e.value(&x) < e.level {
                    continue;
                }
                checked += 1;
                let dv = e.derivative(&x);
                if !(dv < 0.0) {
                    return Err(Error::Certification(format!(
                        "dV/dt = {dv} >= 0 at {x:?} outside the ellipsoid"
                    )));
                }
            }
        }
    }
    Ok(checked)
}

fn normal_form_box(p: &NormalFormParams) -> TrappingBox {
    let a = if p.lambda > 0.0 { 2.0 * p.lambda.sqrt() } else { 1.0 };
    let lo = (0..p.n).map(|i| if i < p.k { -a } else { -1.0 }).collect();
    let hi = (0..p.n).map(|i| if i < p.k { a } else { 1.0 }).collect();
    TrappingBox { lo, hi }
}

/// A certified forward-invariant box for the model.
pub fn trapping_box(model: &Model) -> Result<TrappingBox> {
    model.validate()?;
    match model {
        Model::Lorenz(p) => {
            let e = lorenz_ellipsoid(p);
            certify_lorenz_ellipsoid(&e)?;
            Ok(e.bounding_box())
        }
        Model::NormalForm(p) => Ok(normal_form_box(p)),
        Model::LinearSink { dim } => TrappingBox::new(vec![-1.0; *dim], vec![1.0; *dim]),
        Model::Zero { .. } => Err(contract("the zero field has no trapping region")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::model::VectorField;

    #[test]
    fn lorenz_level_matches_lagrange_analysis() {
        // interior critical point z = 0.4 r gives V = sigma r^2 (0.64 b + 2.56)
        let p = LorenzParams::classical(28.0);
        let want = p.sigma * 784.0 * (0.64 * p.b + 2.56);
        assert!((lorenz_max_lyapunov(&p) - want).abs() < 1e-6 * want);
    }

    #[test]
    fn small_r_box_contains_origin() {
        for r in [0.2, 0.5, 1.0] {
            let b = trapping_box(&Model::lorenz(r)).unwrap();
            assert!(b.contains(&[0.0, 0.0, 0.0]));
        }
    }

    #[test]
    fn normal_form_box_is_inward() {
        let m = Model::normal_form(3, 2, 0.25).unwrap();
        let b = trapping_box(&m).unwrap();
        assert_eq!(b.lo, vec![-1.0, -1.0, -1.0]);
        // sample the faces: the outward normal component of the field is negative
        let mut f = [0.0; 3];
        for s in 0..=20 {
            let u = -1.0 + 0.1 * s as f64;
            for v in [-1.0, -0.3, 0.4, 1.0] {
                for (axis, x) in [
                    (0, [1.0, u, v]),
                    (1, [u, 1.0, v]),
                    (2, [u, v, 1.0]),
                ] {
                    m.field(&x, &mut f);
                    assert!(f[axis] < 0.0, "{x:?}");
                }
            }
        }
    }

    #[test]
    fn certification_detects_too_small_level() {
        let p = LorenzParams::classical(28.0);
        let e = LorenzEllipsoid { params: p, level: 0.5 * lorenz_max_lyapunov(&p) };
        assert!(matches!(certify_lorenz_ellipsoid(&e), Err(Error::Certification(_))));
    }
}
