//! Explicit Runge-Kutta integration: fixed-step RK4 and adaptive Dormand-Prince 5(4)
//! with its 4th-order continuous extension.

use serde::{Deserialize, Serialize};

use super::model::VectorField;
use crate::error::{contract, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FixedRk4,
    AdaptiveRk45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step; the step itself for `FixedRk4`.
    pub max_step: f64,
    /// Horizon used by open-ended searches (crossings, settling).
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::adaptive(1e-10)
    }
}

impl IntegratorConfig {
    pub fn adaptive(tol: f64) -> Self {
        Self {
            method: Method::AdaptiveRk45,
            abs_tol: tol,
            rel_tol: tol,
            max_step: 0.1,
            max_time: 1000.0,
        }
    }

    /// Tolerances used for threshold detection.
    pub fn threshold() -> Self {
        Self::adaptive(1e-10)
    }

    /// Fixed RK4, the deterministic choice for grid work.
    pub fn fixed(step: f64) -> Self {
        Self {
            method: Method::FixedRk4,
            abs_tol: 1e-7,
            rel_tol: 1e-7,
            max_step: step,
            max_time: 1000.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_step > 0.0
            && self.max_time > 0.0
            && self.max_step.is_finite();
        if !ok {
            return Err(contract(format!("invalid integrator config {self:?}")));
        }
        Ok(())
    }
}

// Dormand-Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dense-output coefficients of the last accepted step.
#[derive(Clone, Debug)]
enum Dense {
    /// Dormand-Prince continuous extension (`rcont1..5` in Hairer's notation).
    Dopri([Vec<f64>; 5]),
    /// Cubic Hermite interpolation through both endpoints and slopes.
    Hermite { x0: Vec<f64>, f0: Vec<f64>, x1: Vec<f64>, f1: Vec<f64> },
}

/// A single-trajectory stepper. Keeps the last accepted step for dense output.
pub struct Stepper<'a, F: VectorField> {
    field: &'a F,
    cfg: IntegratorConfig,
    t: f64,
    x: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    prev_t: f64,
    dense: Option<Dense>,
    guard: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a, F: VectorField> Stepper<'a, F> {
    pub fn new(field: &'a F, t0: f64, x0: &[f64], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let n = field.dim();
        if x0.len() != n {
            return Err(contract(format!("initial state has dimension {}, model expects {n}", x0.len())));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t0, last_state: x0.to_vec() });
        }
        let mut f = vec![0.0; n];
        field.field(x0, &mut f);
        let mut s = Self {
            field,
            cfg,
            t: t0,
            x: x0.to_vec(),
            f,
            h: 0.0,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            prev_t: t0,
            dense: None,
            guard: None,
        };
        s.h = match cfg.method {
            Method::FixedRk4 => cfg.max_step,
            Method::AdaptiveRk45 => s.initial_step(),
        };
        Ok(s)
    }

    /// Aborts with a divergence error when the state leaves `[lo, hi]`.
    pub fn with_guard(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.guard = Some((lo, hi));
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    /// Time at the start of the last accepted step.
    pub fn prev_t(&self) -> f64 {
        self.prev_t
    }

    fn initial_step(&self) -> f64 {
        let scale = |v: f64| self.cfg.abs_tol + self.cfg.rel_tol * v.abs();
        let d0 = rms(self.x.iter().map(|v| v / scale(*v)));
        let d1 = rms(self.x.iter().zip(&self.f).map(|(v, fv)| fv / scale(*v)));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(self.cfg.max_step)
    }

    /// Advances by one accepted step without passing `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<()> {
        let remaining = t_end - self.t;
        if remaining <= 0.0 {
            return Ok(());
        }
        match self.cfg.method {
            Method::FixedRk4 => {
                let h = self.cfg.max_step.min(remaining);
                self.rk4_step(h);
            }
            Method::AdaptiveRk45 => self.dopri_step(remaining)?,
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: self.t, last_state: self.x.clone() });
        }
        if let Some((lo, hi)) = &self.guard {
            if self.x.iter().zip(lo.iter().zip(hi)).any(|(v, (l, h))| v < l || v > h) {
                return Err(Error::Divergence { t: self.t, last_state: self.x.clone() });
            }
        }
        Ok(())
    }

    /// Integrates up to exactly `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(())
    }

    fn rk4_step(&mut self, h: f64) {
        let n = self.x.len();
        let [k1, k2, k3, k4, ..] = &mut self.k;
        k1.copy_from_slice(&self.f);
        for i in 0..n {
            self.tmp[i] = self.x[i] + 0.5 * h * k1[i];
        }
        self.field.field(&self.tmp, k2);
        for i in 0..n {
            self.tmp[i] = self.x[i] + 0.5 * h * k2[i];
        }
        self.field.field(&self.tmp, k3);
        for i in 0..n {
            self.tmp[i] = self.x[i] + h * k3[i];
        }
        self.field.field(&self.tmp, k4);
        let x0 = self.x.clone();
        let f0 = self.f.clone();
        for i in 0..n {
            self.x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.field.field(&self.x, &mut self.f);
        self.prev_t = self.t;
        self.t += h;
        self.dense = Some(Dense::Hermite { x0, f0, x1: self.x.clone(), f1: self.f.clone() });
    }

    fn dopri_step(&mut self, remaining: f64) -> Result<()> {
        let n = self.x.len();
        let mut h = self.h.min(self.cfg.max_step);
        let mut last_pass = false;
        if h >= remaining {
            h = remaining;
            last_pass = true;
        }
        let mut rejected = false;
        loop {
            let min_step = 1e-14 * self.t.abs().max(1.0);
            if h < min_step {
                return Err(Error::StepUnderflow { t: self.t, last_state: self.x.clone() });
            }
            let x = &self.x;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let tmp = &mut self.tmp;
            k1.copy_from_slice(&self.f);
            for i in 0..n {
                tmp[i] = x[i] + h * A21 * k1[i];
            }
            self.field.field(tmp, k2);
            for i in 0..n {
                tmp[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            self.field.field(tmp, k3);
            for i in 0..n {
                tmp[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            self.field.field(tmp, k4);
            for i in 0..n {
                tmp[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            self.field.field(tmp, k5);
            for i in 0..n {
                tmp[i] = x[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            self.field.field(tmp, k6);
            let mut x_new = vec![0.0; n];
            for i in 0..n {
                x_new[i] = x[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            self.field.field(&x_new, k7);
            let mut err_sq = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.cfg.abs_tol + self.cfg.rel_tol * x[i].abs().max(x_new[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                last_pass = false;
                rejected = true;
                continue;
            }
            if err <= 1.0 {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let fac = if rejected { fac.min(1.0) } else { fac };
                let rc2: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
                let rc3: Vec<f64> = (0..n).map(|i| h * k1[i] - rc2[i]).collect();
                let rc4: Vec<f64> = (0..n).map(|i| rc2[i] - h * k7[i] - rc3[i]).collect();
                let rc5: Vec<f64> = (0..n)
                    .map(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    })
                    .collect();
                self.dense = Some(Dense::Dopri([x.clone(), rc2, rc3, rc4, rc5]));
                self.prev_t = self.t;
                self.t = if last_pass { self.t + remaining } else { self.t + h };
                self.x = x_new;
                self.f.copy_from_slice(k7);
                // keep the proposed step when the last step was clipped to the horizon
                if !last_pass || h * fac > self.h {
                    self.h = (h * fac).min(self.cfg.max_step);
                }
                return Ok(());
            }
            h *= (0.9 * err.powf(-0.2)).max(0.1);
            last_pass = false;
            rejected = true;
        }
    }

    /// Interpolated state at `t` inside the last accepted step.
    pub fn dense_output(&self, t: f64, out: &mut [f64]) {
        let h = self.t - self.prev_t;
        let theta = if h > 0.0 { ((t - self.prev_t) / h).clamp(0.0, 1.0) } else { 1.0 };
        match &self.dense {
            None => out.copy_from_slice(&self.x),
            Some(Dense::Dopri(rc)) => {
                let t1 = 1.0 - theta;
                for i in 0..out.len() {
                    out[i] = rc[0][i]
                        + theta * (rc[1][i] + t1 * (rc[2][i] + theta * (rc[3][i] + t1 * rc[4][i])));
                }
            }
            Some(Dense::Hermite { x0, f0, x1, f1 }) => {
                let s = theta;
                let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
                let h10 = s * s * s - 2.0 * s * s + s;
                let h01 = -2.0 * s * s * s + 3.0 * s * s;
                let h11 = s * s * s - s * s;
                for i in 0..out.len() {
                    out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
                }
            }
        }
    }
}

impl<'a, F: VectorField> Stepper<'a, F> {
    /// Locates a root of `g` inside the last accepted step, assuming `g` changes sign
    /// over it. Bisection on the dense output down to `t_tol`, followed by one Newton
    /// polish on the interpolant. Writes the state into `out` and returns the time.
    pub fn locate_event(&self, g: impl Fn(&[f64]) -> f64, dg: impl Fn(&[f64], &[f64]) -> f64, t_tol: f64, out: &mut [f64]) -> f64 {
        let (mut a, mut b) = (self.prev_t, self.t);
        self.dense_output(a, out);
        let ga = g(out);
        while b - a > t_tol {
            let m = 0.5 * (a + b);
            self.dense_output(m, out);
            let gm = g(out);
            if gm == 0.0 {
                return m;
            }
            if (gm > 0.0) == (ga > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        let mut t = 0.5 * (a + b);
        self.dense_output(t, out);
        let mut f = vec![0.0; out.len()];
        self.field.field(out, &mut f);
        let slope = dg(out, &f);
        if slope != 0.0 {
            let dt = -g(out) / slope;
            if dt.abs() <= 2.0 * t_tol {
                t += dt;
                self.dense_output(t, out);
            }
        }
        t
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (s / n.max(1) as f64).sqrt()
}

/// A finite sampling of a trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    /// CSV with a `t` column and one column per coordinate (`x,y,z` in 3D),
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map_or(0, |s| s.len());
        let names: Vec<String> = if dim == 3 {
            vec!["x".into(), "y".into(), "z".into()]
        } else {
            (0..dim).map(|i| format!("x{i}")).collect()
        };
        let mut out = format!("t,{}\n", names.join(","));
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:.16e}"));
            for v in s {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Integrates from `x0` over `t_span`, recording every accepted step.
pub fn integrate<F: VectorField>(
    field: &F,
    x0: &[f64],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(contract(format!("invalid time span ({t0}, {t1})")));
    }
    let mut st = Stepper::new(field, t0, x0, *cfg)?;
    let mut traj = Trajectory { times: vec![t0], states: vec![x0.to_vec()] };
    while st.t() < t1 {
        st.step(t1)?;
        traj.times.push(st.t());
        traj.states.push(st.state().to_vec());
    }
    Ok(traj)
}

/// State at time `tau` of the trajectory through `x`.
pub fn time_tau_map<F: VectorField>(field: &F, x: &[f64], tau: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(contract(format!("tau must be positive, got {tau}")));
    }
    let mut st = Stepper::new(field, 0.0, x, *cfg)?;
    st.advance_to(tau)?;
    Ok(st.state().to_vec())
}

/// Fixed-step RK4 flow for a 3-dimensional field, allocation free. Used in the
/// cubical engine's inner loop. Returns `None` when the state becomes non-finite.
#[inline]
pub fn rk4_flow3<F: VectorField>(field: &F, x: [f64; 3], tau: f64, max_step: f64) -> Option<[f64; 3]> {
    let steps = (tau / max_step).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    let mut x = x;
    let mut k1 = [0.0; 3];
    let mut k2 = [0.0; 3];
    let mut k3 = [0.0; 3];
    let mut k4 = [0.0; 3];
    let add = |a: &[f64; 3], b: &[f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    for _ in 0..steps {
        field.field(&x, &mut k1);
        field.field(&add(&x, &k1, 0.5 * h), &mut k2);
        field.field(&add(&x, &k2, 0.5 * h), &mut k3);
        field.field(&add(&x, &k3, h), &mut k4);
        for i in 0..3 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !(x[0].is_finite() && x[1].is_finite() && x[2].is_finite()) {
            return None;
        }
    }
    Some(x)
}

/// Fixed-step RK4 flow in any dimension; `None` on non-finite states.
pub fn rk4_flow<F: VectorField>(field: &F, x: &[f64], tau: f64, max_step: f64) -> Option<Vec<f64>> {
    if x.len() == 3 {
        return rk4_flow3(field, [x[0], x[1], x[2]], tau, max_step).map(|a| a.to_vec());
    }
    let cfg = IntegratorConfig::fixed(max_step);
    let mut st = Stepper::new(field, 0.0, x, cfg).ok()?;
    st.advance_to(tau).ok()?;
    Some(st.state().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::model::Model;

    #[test]
    fn origin_stays_put() {
        let m = Model::lorenz(28.0);
        let traj = integrate(&m, &[0.0; 3], (0.0, 5.0), &IntegratorConfig::threshold()).unwrap();
        assert!(traj.states.iter().all(|s| s.iter().all(|v| *v == 0.0)));
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let m = Model::LinearSink { dim: 2 };
        let x = time_tau_map(&m, &[1.0, -2.0], 3.0, &IntegratorConfig::adaptive(1e-12)).unwrap();
        assert!((x[0] - (-3f64).exp()).abs() < 1e-11);
        assert!((x[1] + 2.0 * (-3f64).exp()).abs() < 1e-11);
        let y = time_tau_map(&m, &[1.0, -2.0], 3.0, &IntegratorConfig::fixed(0.01)).unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_is_accurate() {
        let m = Model::LinearSink { dim: 1 };
        let mut st = Stepper::new(&m, 0.0, &[1.0], IntegratorConfig::adaptive(1e-10)).unwrap();
        st.step(10.0).unwrap();
        st.step(10.0).unwrap();
        let mid = 0.5 * (st.prev_t() + st.t());
        let mut out = [0.0];
        st.dense_output(mid, &mut out);
        assert!((out[0] - (-mid).exp()).abs() < 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        let m = Model::lorenz(28.0);
        assert!(time_tau_map(&m, &[1.0; 3], 0.0, &IntegratorConfig::threshold()).is_err());
        assert!(integrate(&m, &[1.0; 3], (1.0, 0.0), &IntegratorConfig::threshold()).is_err());
        let mut bad = IntegratorConfig::threshold();
        bad.abs_tol = 0.0;
        assert!(integrate(&m, &[1.0; 3], (0.0, 1.0), &bad).is_err());
    }

    #[test]
    fn guard_reports_divergence() {
        let m = Model::lorenz(28.0);
        let mut st = Stepper::new(&m, 0.0, &[1.0, 1.0, 1.0], IntegratorConfig::threshold())
            .unwrap()
            .with_guard(vec![-2.0; 3], vec![2.0; 3]);
        let res = st.advance_to(10.0);
        assert!(matches!(res, Err(Error::Divergence { .. })));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let m = Model::lorenz(28.0);
        let traj = integrate(&m, &[1.0; 3], (0.0, 0.1), &IntegratorConfig::fixed(0.05)).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,y,z"));
        assert_eq!(lines.count(), 3);
    }
}
