//! Equilibria of the Lorenz flow, their linear stability, and the parameter values
//! where the phase portrait changes: pitchfork, homoclinic explosion, absorption of the
//! unstable manifold of the origin, and Hopf.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::flow::{eval_field, eval_jacobian, LorenzParams, Model, NormalFormParams, Stepper, Trajectory};
use crate::flow::{integrate, trapping_box, IntegratorConfig};
use crate::linalg::{self, Matrix};

/// Real parts within this band of zero make an equilibrium nonhyperbolic.
pub const HYPERBOLICITY_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Attractor,
    Saddle,
    Repeller,
    Nonhyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumLabel {
    Origin,
    C1,
    C2,
    Other,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: Vec<f64>,
    /// Sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    pub unstable_dim: usize,
    pub classification: Classification,
    pub label: EquilibriumLabel,
}

impl Equilibrium {
    fn from_eigenvalues(state: Vec<f64>, eigenvalues: Vec<Complex64>, label: EquilibriumLabel) -> Self {
        let unstable_dim = eigenvalues.iter().filter(|l| l.re > HYPERBOLICITY_BAND).count();
        let classification = classify(&eigenvalues);
        Self { state, eigenvalues, unstable_dim, classification, label }
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Partitions by the signs of the real parts, with a dead band around zero.
pub fn classify(eigenvalues: &[Complex64]) -> Classification {
    if eigenvalues.iter().any(|l| l.re.abs() <= HYPERBOLICITY_BAND) {
        return Classification::Nonhyperbolic;
    }
    let unstable = eigenvalues.iter().filter(|l| l.re > 0.0).count();
    match unstable {
        0 => Classification::Attractor,
        u if u == eigenvalues.len() => Classification::Repeller,
        _ => Classification::Saddle,
    }
}

fn lorenz_eigenvalues(p: &LorenzParams, state: &[f64]) -> Result<Vec<Complex64>> {
    let j = eval_jacobian(&Model::Lorenz(*p), state)?;
    Ok(linalg::eigenvalues3(&j).to_vec())
}

fn newton_refine(model: &Model, guess: &[f64]) -> Result<Vec<f64>> {
    let mut x = guess.to_vec();
    for _ in 0..50 {
        let f = eval_field(model, &x)?;
        if linalg::norm(&f) <= 1e-13 {
            return Ok(x);
        }
        let j = eval_jacobian(model, &x)?;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let dx = linalg::solve(&j, &neg)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    let res = linalg::norm(&eval_field(model, &x)?);
    if res <= 1e-12 {
        Ok(x)
    } else {
        Err(Error::Numerical(format!("Newton did not converge from {guess:?}, residual {res:e}")))
    }
}

/// The origin, and for `r > 1` the symmetric pair `C1` (x > 0) and `C2` (x < 0).
pub fn find_equilibria(p: &LorenzParams) -> Result<Vec<Equilibrium>> {
    p.validate()?;
    let model = Model::Lorenz(*p);
    let origin = vec![0.0; 3];
    let mut out = vec![Equilibrium::from_eigenvalues(
        origin.clone(),
        lorenz_eigenvalues(p, &origin)?,
        EquilibriumLabel::Origin,
    )];
    if p.r > 1.0 {
        let a = (p.b * (p.r - 1.0)).sqrt();
        for (sign, label) in [(1.0, EquilibriumLabel::C1), (-1.0, EquilibriumLabel::C2)] {
            let state = newton_refine(&model, &[sign * a, sign * a, p.r - 1.0])?;
            let eig = lorenz_eigenvalues(p, &state)?;
            out.push(Equilibrium::from_eigenvalues(state, eig, label));
        }
    }
    Ok(out)
}

pub fn equilibrium(p: &LorenzParams, label: EquilibriumLabel) -> Result<Equilibrium> {
    find_equilibria(p)?
        .into_iter()
        .find(|e| e.label == label)
        .ok_or_else(|| contract(format!("no equilibrium {label:?} at r = {}", p.r)))
}

/// The origin of the normal form; its spectrum is read off the block structure.
pub fn normal_form_origin(p: &NormalFormParams) -> Result<Equilibrium> {
    p.validate()?;
    let eig = (0..p.n)
        .map(|i| Complex64::new(if i < p.k { p.lambda } else { -1.0 }, 0.0))
        .collect();
    Ok(Equilibrium::from_eigenvalues(vec![0.0; p.n], eig, EquilibriumLabel::Origin))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    Pitchfork,
    Homoclinic,
    Heteroclinic,
    Hopf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionSample {
    pub r: f64,
    pub sign: i8,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub kind: ThresholdKind,
    pub r_star: f64,
    pub bracket: (f64, f64),
    pub iterations: Vec<CriterionSample>,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Bisection on the sign of `criterion` over `[lo, hi]` down to width `tol`.
pub fn bisect(
    kind: ThresholdKind,
    (mut lo, mut hi): (f64, f64),
    tol: f64,
    mut criterion: impl FnMut(f64) -> Result<f64>,
) -> Result<ThresholdResult> {
    if !(tol > 0.0) || !(lo < hi) {
        return Err(contract(format!("bisection needs tol > 0 and lo < hi, got {tol}, [{lo}, {hi}]")));
    }
    let mut log = Vec::new();
    let mut eval = |r: f64, log: &mut Vec<CriterionSample>| -> Result<i8> {
        let value = criterion(r)?;
        let sign = sign_of(value);
        log.push(CriterionSample { r, sign, value });
        Ok(sign)
    };
    let s_lo = eval(lo, &mut log)?;
    let s_hi = eval(hi, &mut log)?;
    let name = format!("{kind:?}").to_lowercase();
    if s_lo == 0 {
        return Ok(ThresholdResult { kind, r_star: lo, bracket: (lo, lo), iterations: log });
    }
    if s_hi == 0 {
        return Ok(ThresholdResult { kind, r_star: hi, bracket: (hi, hi), iterations: log });
    }
    if s_lo == s_hi {
        return Err(Error::Bracket { lo, hi, criterion: name });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let s = eval(mid, &mut log)?;
        if s == 0 {
            return Ok(ThresholdResult { kind, r_star: mid, bracket: (mid, mid), iterations: log });
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult { kind, r_star: 0.5 * (lo + hi), bracket: (lo, hi), iterations: log })
}

/// Default bracket for the pitchfork search.
pub const PITCHFORK_BRACKET: (f64, f64) = (0.5, 1.5);

/// The origin eigenvalue of smallest magnitude at `r` (classical sigma, b).
pub fn pitchfork_criterion(r: f64) -> Result<f64> {
    let p = LorenzParams::classical(r);
    let eig = lorenz_eigenvalues(&p, &[0.0; 3])?;
    let l = eig.iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    Ok(l.re)
}

pub fn pitchfork_threshold(tol: f64) -> Result<ThresholdResult> {
    bisect(ThresholdKind::Pitchfork, PITCHFORK_BRACKET, tol, pitchfork_criterion)
}

pub const HOPF_BRACKET: (f64, f64) = (20.0, 30.0);

/// Largest real part of the spectrum at `C1`.
pub fn hopf_criterion(r: f64) -> Result<f64> {
    Ok(equilibrium(&LorenzParams::classical(r), EquilibriumLabel::C1)?.max_real_part())
}

pub fn hopf_threshold(tol: f64) -> Result<ThresholdResult> {
    bisect(ThresholdKind::Hopf, HOPF_BRACKET, tol, hopf_criterion)
}

/// Routh-Hurwitz value where the complex pair at `C1` crosses the imaginary axis:
/// `r = sigma (sigma + b + 3) / (sigma - b - 1)`.
pub fn hopf_routh_hurwitz(sigma: f64, b: f64) -> f64 {
    sigma * (sigma + b + 3.0) / (sigma - b - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Unit unstable eigenvector of a saddle with one unstable direction,
/// oriented so that its first component is positive.
pub fn unstable_direction(model: &Model, eq: &Equilibrium) -> Result<Vec<f64>> {
    if eq.unstable_dim != 1 || eq.classification != Classification::Saddle {
        return Err(contract("unstable manifold shooting needs a saddle with one unstable direction"));
    }
    let j: Matrix = eval_jacobian(model, &eq.state)?;
    let l = eq.eigenvalues[0];
    let mut v = if j.rows() == 3 {
        linalg::real_eigenvector3(&j, l.re)
    } else {
        // the normal form is diagonal at the origin
        let n = j.rows();
        let i = (0..n).find(|&i| (j.get(i, i) - l.re).abs() < 1e-12).unwrap_or(0);
        (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
    };
    let flip = if v[0] < 0.0 || (v[0] == 0.0 && v.iter().find(|c| **c != 0.0).copied().unwrap_or(1.0) < 0.0) {
        -1.0
    } else {
        1.0
    };
    v.iter_mut().for_each(|c| *c *= flip);
    Ok(v)
}

/// Relative offset of the manifold seed, scaled by the trapping box diameter.
pub const BRANCH_OFFSET: f64 = 1e-6;

pub fn default_branch_epsilon(model: &Model) -> Result<f64> {
    Ok(BRANCH_OFFSET * trapping_box(model)?.diameter())
}

fn branch_seed(model: &Model, eq: &Equilibrium, side: Side, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(contract("epsilon must be positive"));
    }
    let v = unstable_direction(model, eq)?;
    let s = if side == Side::Plus { 1.0 } else { -1.0 };
    Ok(eq.state.iter().zip(&v).map(|(x, v)| x + s * epsilon * v).collect())
}

/// One branch of the one-dimensional unstable manifold of `eq`, over `[0, t_max]`.
pub fn unstable_manifold_branch(
    model: &Model,
    eq: &Equilibrium,
    side: Side,
    epsilon: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let x0 = branch_seed(model, eq, side, epsilon)?;
    integrate(model, &x0, (0.0, t_max), cfg)
}

/// Time tolerance for locating section crossings.
pub const CROSSING_TIME_TOL: f64 = 1e-12;

fn descending_crossing(st: &Stepper<'_, Model>, prev: &[f64], level: f64, out: &mut [f64]) -> Option<f64> {
    let cur = st.state();
    if prev[2] > level && cur[2] <= level {
        Some(st.locate_event(|x| x[2] - level, |_, f| f[2], CROSSING_TIME_TOL, out))
    } else {
        None
    }
}

pub const HOMOCLINIC_BRACKET: (f64, f64) = (13.0, 14.5);

/// Radius of the ball around the origin the branch must leave before crossings count.
pub const HOMOCLINIC_EXIT_RADIUS: f64 = 1.0;

/// Shooting criterion for the homoclinic explosion: `x` at the second descending
/// crossing of `z = r - 1` by the `+` branch of the unstable manifold of the origin.
///
/// The first descending crossing always lies on the `C1` lobe, halfway round the first
/// loop. The second one is on the `C1` lobe (x > 0) while the branch still spirals onto
/// `C1`, and on the `C2` lobe once it has switched sides.
pub fn homoclinic_criterion(r: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let p = LorenzParams::classical(r);
    let model = Model::Lorenz(p);
    let origin = equilibrium(&p, EquilibriumLabel::Origin)?;
    let x0 = branch_seed(&model, &origin, Side::Plus, default_branch_epsilon(&model)?)?;
    let level = p.section_height();
    let mut st = Stepper::new(&model, 0.0, &x0, *cfg)?;
    let mut left_ball = false;
    let mut seen = 0;
    let mut buf = vec![0.0; 3];
    let t_max = cfg.max_time;
    while st.t() < t_max {
        let prev = st.state().to_vec();
        st.step(t_max)?;
        if !left_ball {
            left_ball = linalg::norm(st.state()) > HOMOCLINIC_EXIT_RADIUS;
            continue;
        }
        if descending_crossing(&st, &prev, level, &mut buf).is_some() {
            seen += 1;
            if seen == 2 {
                return Ok(buf[0]);
            }
        }
    }
    Err(Error::NoCrossing { r, t_max })
}

pub fn homoclinic_threshold(tol: f64, cfg: &IntegratorConfig) -> Result<ThresholdResult> {
    homoclinic_threshold_in(HOMOCLINIC_BRACKET, tol, cfg)
}

pub fn homoclinic_threshold_in(bracket: (f64, f64), tol: f64, cfg: &IntegratorConfig) -> Result<ThresholdResult> {
    bisect(ThresholdKind::Homoclinic, bracket, tol, |r| homoclinic_criterion(r, cfg))
}

pub const HETEROCLINIC_BRACKET: (f64, f64) = (23.5, 24.5);

/// Settling test for the absorption of the unstable manifold of the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettleConfig {
    /// Integration horizon.
    pub horizon: f64,
    /// Entering this ball around `C1` or `C2` counts as settling.
    pub radius: f64,
    /// A lobe switch after `wander_window * horizon` counts as wandering.
    pub wander_window: f64,
}

impl Default for SettleConfig {
    fn default() -> Self {
        Self { horizon: 500.0, radius: 1e-3, wander_window: 0.9 }
    }
}

/// `+(horizon - t_enter)` when the `+` branch settles onto `C1` or `C2`, `-1` when it
/// keeps switching lobes up to the end of the horizon.
///
/// Near the Hopf value the foci attract at a rate of order `1e-2`, too slowly
/// to reach a small ball within the horizon. A branch that stopped switching
/// lobes before the wander window and whose distance to that lobe's
/// equilibrium contracts over its stay also counts as settled, with value
/// `horizon - t_last_switch`.
pub fn heteroclinic_criterion(r: f64, settle: &SettleConfig, cfg: &IntegratorConfig) -> Result<f64> {
    let p = LorenzParams::classical(r);
    let model = Model::Lorenz(p);
    let eqs = find_equilibria(&p)?;
    let origin = &eqs[0];
    let targets: Vec<&Equilibrium> = eqs.iter().filter(|e| e.label != EquilibriumLabel::Origin).collect();
    if targets.is_empty() {
        return Err(contract("the settling criterion needs r > 1"));
    }
    let x0 = branch_seed(&model, origin, Side::Plus, default_branch_epsilon(&model)?)?;
    let mut st = Stepper::new(&model, 0.0, &x0, *cfg)?;
    let mut lobe = 1.0;
    let mut last_switch = 0.0;
    // (t, distance to the equilibrium of the current lobe) since the last switch
    let mut stay: Vec<(f64, f64)> = Vec::new();
    while st.t() < settle.horizon {
        st.step(settle.horizon)?;
        let x = st.state();
        if targets.iter().any(|e| linalg::dist(x, &e.state) < settle.radius) {
            return Ok(settle.horizon - st.t());
        }
        // a lobe counts once the branch is well away from the stable manifold of the origin
        if x[0].abs() > 1.0 && x[0].signum() != lobe {
            lobe = x[0].signum();
            last_switch = st.t();
            stay.clear();
        }
        let home = targets.iter().find(|e| e.state[0].signum() == lobe).unwrap_or(&targets[0]);
        stay.push((st.t(), linalg::dist(x, &home.state)));
    }
    if last_switch >= settle.wander_window * settle.horizon {
        return Ok(-1.0);
    }
    // envelope of the distance over the second and the last quarter of the stay
    let span = settle.horizon - last_switch;
    let envelope = |a: f64, b: f64| {
        stay.iter().filter(|(t, _)| *t >= last_switch + a * span && *t <= last_switch + b * span).map(|p| p.1).fold(0.0, f64::max)
    };
    let (early, late) = (envelope(0.25, 0.5), envelope(0.75, 1.0));
    if late < early {
        Ok(settle.horizon - last_switch)
    } else {
        Err(Error::Inconclusive {
            r,
            reason: format!(
                "branch stopped switching lobes at t = {last_switch:.1} but neither entered the {} ball nor contracted by t = {}",
                settle.radius, settle.horizon
            ),
        })
    }
}

pub fn heteroclinic_threshold(tol: f64, cfg: &IntegratorConfig) -> Result<ThresholdResult> {
    heteroclinic_threshold_in(HETEROCLINIC_BRACKET, tol, &SettleConfig::default(), cfg)
}

pub fn heteroclinic_threshold_in(
    bracket: (f64, f64),
    tol: f64,
    settle: &SettleConfig,
    cfg: &IntegratorConfig,
) -> Result<ThresholdResult> {
    bisect(ThresholdKind::Heteroclinic, bracket, tol, |r| heteroclinic_criterion(r, settle, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_equilibrium_below_pitchfork() {
        let eqs = find_equilibria(&LorenzParams::classical(0.5)).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].label, EquilibriumLabel::Origin);
        assert_eq!(eqs[0].classification, Classification::Attractor);
    }

    #[test]
    fn c_pair_at_r28() {
        let eqs = find_equilibria(&LorenzParams::classical(28.0)).unwrap();
        assert_eq!(eqs.len(), 3);
        let a = 72f64.sqrt();
        let c1 = &eqs[1];
        assert!((c1.state[0] - a).abs() < 1e-10 && (c1.state[1] - a).abs() < 1e-10);
        assert!((c1.state[2] - 27.0).abs() < 1e-10);
        let c2 = &eqs[2];
        assert!((c2.state[0] + a).abs() < 1e-10 && (c2.state[2] - 27.0).abs() < 1e-10);
        for e in &eqs {
            let f = eval_field(&Model::lorenz(28.0), &e.state).unwrap();
            assert!(linalg::norm(&f) <= 1e-12);
        }
    }

    #[test]
    fn origin_spectrum_at_r28() {
        // roots of (l + sigma)(l + 1) - sigma r together with -b
        let o = equilibrium(&LorenzParams::classical(28.0), EquilibriumLabel::Origin).unwrap();
        let disc = (11.0f64 * 11.0 + 4.0 * 10.0 * 27.0).sqrt();
        let want = [(-11.0 + disc) / 2.0, -8.0 / 3.0, (-11.0 - disc) / 2.0];
        for (l, w) in o.eigenvalues.iter().zip(want) {
            assert!((l.re - w).abs() < 1e-10 && l.im == 0.0);
        }
        assert!((want[0] - 11.8277).abs() < 1e-4 && (want[2] + 22.8277).abs() < 1e-4);
    }

    #[test]
    fn classification_examples() {
        let o2 = equilibrium(&LorenzParams::classical(2.0), EquilibriumLabel::Origin).unwrap();
        assert_eq!((o2.classification, o2.unstable_dim), (Classification::Saddle, 1));
        let c2 = equilibrium(&LorenzParams::classical(2.0), EquilibriumLabel::C1).unwrap();
        assert_eq!(c2.classification, Classification::Attractor);
        let c28 = equilibrium(&LorenzParams::classical(28.0), EquilibriumLabel::C1).unwrap();
        assert_eq!((c28.classification, c28.unstable_dim), (Classification::Saddle, 2));
        assert_eq!(
            classify(&[Complex64::new(1e-10, 0.0), Complex64::new(-1.0, 0.0)]),
            Classification::Nonhyperbolic
        );
        assert_eq!(classify(&[Complex64::new(1.0, 0.0); 2]), Classification::Repeller);
    }

    #[test]
    fn normal_form_origin_spectrum() {
        let e = normal_form_origin(&NormalFormParams::new(3, 2, 0.25).unwrap()).unwrap();
        assert_eq!(e.unstable_dim, 2);
        assert_eq!(e.classification, Classification::Saddle);
        let e = normal_form_origin(&NormalFormParams::new(2, 2, 0.25).unwrap()).unwrap();
        assert_eq!(e.classification, Classification::Repeller);
    }

    #[test]
    fn pitchfork_signs_and_threshold() {
        assert!(pitchfork_criterion(0.9).unwrap() < 0.0);
        assert!(pitchfork_criterion(1.1).unwrap() > 0.0);
        let res = pitchfork_threshold(1e-8).unwrap();
        assert!((res.r_star - 1.0).abs() <= 1e-8);
        assert!(res.bracket.0 <= res.r_star && res.r_star <= res.bracket.1);
        assert!(res.bracket.1 - res.bracket.0 <= 1e-8);
    }

    #[test]
    fn hopf_signs_and_threshold() {
        assert!(hopf_criterion(20.0).unwrap() < 0.0);
        assert!(hopf_criterion(26.0).unwrap() > 0.0);
        let res = hopf_threshold(1e-7).unwrap();
        assert!((res.r_star - 470.0 / 19.0).abs() < 1e-6);
        assert!((hopf_routh_hurwitz(10.0, 8.0 / 3.0) - 470.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_requires_sign_change() {
        let err = bisect(ThresholdKind::Hopf, (1.0, 2.0), 1e-3, |_| Ok(1.0)).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
        assert!(bisect(ThresholdKind::Hopf, (1.0, 2.0), 0.0, |r| Ok(r - 1.5)).is_err());
    }

    #[test]
    fn tighter_tolerance_nests_brackets() {
        let coarse = pitchfork_threshold(1e-3).unwrap();
        let fine = pitchfork_threshold(1e-6).unwrap();
        assert!(fine.bracket.1 - fine.bracket.0 <= coarse.bracket.1 - coarse.bracket.0);
        assert!(coarse.bracket.0 <= fine.r_star && fine.r_star <= coarse.bracket.1);
    }

    #[test]
    fn threshold_json_shape() {
        let res = pitchfork_threshold(1e-2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&res).unwrap();
        assert_eq!(v["kind"], "pitchfork");
        assert!(v["bracket"].is_array());
        assert!(v["iterations"][0]["r"].is_number());
        assert!(v["iterations"][0]["sign"].is_number());
        assert!(v["iterations"][0]["value"].is_number());
    }

    #[test]
    fn branches_at_r2_reach_c_pair() {
        let p = LorenzParams::classical(2.0);
        let m = Model::Lorenz(p);
        let eqs = find_equilibria(&p).unwrap();
        let eps = default_branch_epsilon(&m).unwrap();
        let cfg = IntegratorConfig::adaptive(1e-12);
        let plus = unstable_manifold_branch(&m, &eqs[0], Side::Plus, eps, 60.0, &cfg).unwrap();
        let minus = unstable_manifold_branch(&m, &eqs[0], Side::Minus, eps, 60.0, &cfg).unwrap();
        assert!(linalg::dist(plus.last_state(), &eqs[1].state) < 1e-4);
        assert!(linalg::dist(minus.last_state(), &eqs[2].state) < 1e-4);
        // mirror image under (x, y, z) -> (-x, -y, z), compared at common times via re-integration
        for t in [1.0, 5.0, 20.0] {
            let a = crate::flow::time_tau_map(&m, &plus.states[0], t, &cfg).unwrap();
            let b = crate::flow::time_tau_map(&m, &minus.states[0], t, &cfg).unwrap();
            assert!((a[0] + b[0]).abs() < 1e-5 && (a[1] + b[1]).abs() < 1e-5 && (a[2] - b[2]).abs() < 1e-5);
        }
    }

    #[test]
    fn branch_needs_one_dimensional_unstable_manifold() {
        let p = LorenzParams::classical(28.0);
        let c1 = equilibrium(&p, EquilibriumLabel::C1).unwrap();
        assert!(unstable_manifold_branch(&Model::Lorenz(p), &c1, Side::Plus, 1e-6, 1.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn homoclinic_criterion_signs() {
        let cfg = IntegratorConfig::adaptive(1e-12);
        assert!(homoclinic_criterion(13.0, &cfg).unwrap() > 0.0);
        assert!(homoclinic_criterion(14.5, &cfg).unwrap() < 0.0);
    }
}
