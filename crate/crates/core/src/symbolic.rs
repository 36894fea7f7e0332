//! Poincare section `z = r - 1`, two-symbol coding by lobe, return-map words,
//! periodic orbits and the largest Lyapunov exponent.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::flow::{IntegratorConfig, LorenzParams, Model, Stepper, VectorField};
use crate::linalg::{self, Matrix};

/// Time tolerance for locating a crossing.
pub const CROSSING_TOL: f64 = 1e-12;

/// Crossings with `|x|` below this cannot be coded.
pub const SYMBOL_DEAD_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Descending,
    Ascending,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionCrossing {
    pub time: f64,
    pub state: Vec<f64>,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    S,
    T,
}

impl Symbol {
    pub fn swapped(self) -> Self {
        match self {
            Symbol::S => Symbol::T,
            Symbol::T => Symbol::S,
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'S' => Some(Symbol::S),
            'T' => Some(Symbol::T),
            _ => None,
        }
    }
}

/// Which lobe is called `S`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `S` for `x > 0`.
    #[default]
    PositiveS,
    /// `S` for `x < 0`.
    NegativeS,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolSequence {
    pub symbols: Vec<Symbol>,
    pub times: Vec<f64>,
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn word(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{s:?}")?;
        }
        Ok(())
    }
}

/// Parses a word over `{S, T}`.
pub fn parse_code(code: &str) -> Result<Vec<Symbol>> {
    code.chars().map(|c| Symbol::from_char(c).ok_or_else(|| contract(format!("invalid symbol {c:?} in code")))).collect()
}

fn lorenz(model: &Model) -> Result<LorenzParams> {
    let p = *model.as_lorenz().ok_or_else(|| contract("section machinery needs the Lorenz model"))?;
    if p.r <= 1.0 {
        return Err(contract("the section z = r - 1 needs r > 1"));
    }
    Ok(p)
}

/// All crossings of `z = r - 1` on `(0, t_max]`. A trajectory sitting on the
/// section, such as the equilibria `C1`, `C2`, produces none.
pub fn section_crossings(model: &Model, x0: &[f64], t_max: f64, cfg: &IntegratorConfig) -> Result<Vec<SectionCrossing>> {
    let h = lorenz(model)?.section_height();
    let mut st = Stepper::new(model, 0.0, x0, *cfg)?;
    let mut out = Vec::new();
    let mut buf = vec![0.0; 3];
    while st.t() < t_max {
        let before = st.state()[2] - h;
        st.step(t_max)?;
        let after = st.state()[2] - h;
        if before * after < 0.0 || (after == 0.0 && before != 0.0) {
            let t = st.locate_event(|x| x[2] - h, |_, f| f[2], CROSSING_TOL, &mut buf);
            let direction = if before > 0.0 { Direction::Descending } else { Direction::Ascending };
            out.push(SectionCrossing { time: t, state: buf.clone(), direction });
        }
    }
    Ok(out)
}

/// Moves a crossing onto the section by Newton steps in time along the flow.
pub fn refine_crossing(model: &Model, c: &SectionCrossing) -> Result<SectionCrossing> {
    let h = lorenz(model)?.section_height();
    let mut x = c.state.clone();
    let mut t = c.time;
    let mut f = vec![0.0; 3];
    for _ in 0..5 {
        model.field(&x, &mut f);
        if f[2] == 0.0 {
            break;
        }
        let dt = -(x[2] - h) / f[2];
        if dt.abs() < 1e-15 {
            break;
        }
        x = rk4_signed(model, &x, dt)?;
        t += dt;
    }
    Ok(SectionCrossing { time: t, state: x, direction: c.direction })
}

/// One classical RK4 step of signed length `h`.
fn rk4_signed(model: &Model, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut k = [vec![0.0; 3], vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]];
    model.field(x, &mut k[0]);
    let y1: Vec<f64> = (0..3).map(|i| x[i] + 0.5 * h * k[0][i]).collect();
    model.field(&y1, &mut k[1]);
    let y2: Vec<f64> = (0..3).map(|i| x[i] + 0.5 * h * k[1][i]).collect();
    model.field(&y2, &mut k[2]);
    let y3: Vec<f64> = (0..3).map(|i| x[i] + h * k[2][i]).collect();
    model.field(&y3, &mut k[3]);
    let out: Vec<f64> = (0..3).map(|i| x[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i])).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Divergence { t: h, last_state: x.to_vec() })
    }
}

/// Codes descending crossings by lobe.
pub fn encode_symbols(crossings: &[SectionCrossing], orientation: Orientation) -> Result<SymbolSequence> {
    let mut seq = SymbolSequence::default();
    for (i, c) in crossings.iter().enumerate() {
        if c.direction != Direction::Descending {
            return Err(contract("only descending crossings can be coded"));
        }
        let x = c.state[0];
        if x.abs() <= SYMBOL_DEAD_BAND {
            return Err(Error::AmbiguousSymbol { index: i, x });
        }
        let s = if x > 0.0 { Symbol::S } else { Symbol::T };
        seq.symbols.push(if orientation == Orientation::PositiveS { s } else { s.swapped() });
        seq.times.push(c.time);
    }
    Ok(seq)
}

/// First `count` descending crossings of the trajectory of `x0`, or fewer if
/// `t_max` is reached.
pub fn descending_crossings(model: &Model, x0: &[f64], count: usize, t_max: f64, cfg: &IntegratorConfig) -> Result<Vec<SectionCrossing>> {
    let h = lorenz(model)?.section_height();
    let mut st = Stepper::new(model, 0.0, x0, *cfg)?;
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0.0; 3];
    while out.len() < count && st.t() < t_max {
        let before = st.state()[2] - h;
        st.step(t_max)?;
        let after = st.state()[2] - h;
        if before > 0.0 && after <= 0.0 {
            let t = st.locate_event(|x| x[2] - h, |_, f| f[2], CROSSING_TOL, &mut buf);
            out.push(SectionCrossing { time: t, state: buf.clone(), direction: Direction::Descending });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordReport {
    pub r: f64,
    pub word_length: usize,
    pub seeds: usize,
    /// Seed segment `[lo, hi]` in `x` on the line `y = x`.
    pub window: [f64; 2],
    pub words_found: usize,
    pub total: usize,
    pub words: Vec<String>,
    /// Seeds dropped for hitting the dead band or running out of time.
    pub uncoded_seeds: usize,
    pub note: String,
}

/// Where seeds are placed on the line `y = x`, `z = r - 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedWindow {
    /// `|x| <= 2 sqrt(b (r - 1))`, twice the lobe centers.
    Full,
    /// The part of the full segment where the coarse word pattern changes.
    #[default]
    Auto,
    Fixed { lo: f64, hi: f64 },
}

/// Seeds of the coarse scan behind [`SeedWindow::Auto`].
pub const PRESCAN_SEEDS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordConfig {
    pub seeds: usize,
    /// Integration time allowed per seed.
    pub t_max: f64,
    pub integrator: IntegratorConfig,
    pub orientation: Orientation,
    pub window: SeedWindow,
}

impl Default for WordConfig {
    fn default() -> Self {
        Self {
            seeds: 100_000,
            t_max: 60.0,
            integrator: IntegratorConfig::adaptive(1e-9),
            orientation: Orientation::PositiveS,
            window: SeedWindow::Auto,
        }
    }
}

/// Base-2 radical inverse of `i`.
fn van_der_corput(mut i: u64) -> f64 {
    let mut x = 0.0;
    let mut f = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            x += f;
        }
        i >>= 1;
        f *= 0.5;
    }
    x
}

/// `n` seeds on `y = x`, `z = r - 1` with `x` in `[lo, hi]`, in van der
/// Corput order so that a smaller seed set is a prefix of a larger one.
pub fn word_seeds(p: &LorenzParams, window: [f64; 2], n: usize) -> Vec<Vec<f64>> {
    let h = p.section_height();
    (1..=n as u64)
        .map(|i| {
            let x = window[0] + (window[1] - window[0]) * van_der_corput(i);
            vec![x, x, h]
        })
        .collect()
}

fn word_of(model: &Model, seed: &[f64], m: usize, t_max: f64, cfg: &IntegratorConfig, orientation: Orientation) -> Option<String> {
    if m == 0 {
        return Some(String::new());
    }
    let cr = descending_crossings(model, seed, m, t_max, cfg).ok()?;
    if cr.len() < m {
        return None;
    }
    encode_symbols(&cr, orientation).ok().map(|q| q.word())
}

/// Resolves the seed segment. The automatic window is the hull of the places
/// where the length-`m` word changes along a uniform coarse scan of the full
/// segment, padded by one scan spacing; without changes it is the full segment.
pub fn seed_window(model: &Model, m: usize, wc: &WordConfig) -> Result<[f64; 2]> {
    let p = lorenz(model)?;
    let half = 2.0 * (p.b * p.section_height()).sqrt();
    match wc.window {
        SeedWindow::Full => Ok([-half, half]),
        SeedWindow::Fixed { lo, hi } => {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(contract("seed window needs lo < hi"));
            }
            Ok([lo, hi])
        }
        SeedWindow::Auto => {
            let h = p.section_height();
            let dx = 2.0 * half / PRESCAN_SEEDS as f64;
            let xs: Vec<f64> = (0..PRESCAN_SEEDS).map(|i| -half + dx * (i as f64 + 0.5)).collect();
            let words: Vec<Option<String>> =
                xs.par_iter().map(|&x| word_of(model, &[x, x, h], m.max(1), wc.t_max, &wc.integrator, wc.orientation)).collect();
            let changes: Vec<usize> = (0..PRESCAN_SEEDS - 1).filter(|&i| words[i] != words[i + 1]).collect();
            match (changes.first(), changes.last()) {
                (Some(&a), Some(&b)) => Ok([(xs[a] - dx).max(-half), (xs[b + 1] + dx).min(half)]),
                _ => Ok([-half, half]),
            }
        }
    }
}

/// Counts the distinct words of length `m` produced by the descending
/// crossings of trajectories started on a dense set of section points.
/// Evidence for a full shift, not a proof.
pub fn verify_word_realization(model: &Model, m: usize, wc: &WordConfig) -> Result<WordReport> {
    let p = lorenz(model)?;
    if m > 8 {
        return Err(contract("word length is limited to 8"));
    }
    let total = 1usize << m;
    let window = seed_window(model, m, wc)?;
    let seeds = word_seeds(&p, window, wc.seeds);
    let words: Vec<Option<String>> =
        seeds.par_iter().map(|s| word_of(model, s, m, wc.t_max, &wc.integrator, wc.orientation)).collect();
    let uncoded = words.iter().filter(|w| w.is_none()).count();
    let found: BTreeSet<String> = words.into_iter().flatten().collect();
    Ok(WordReport {
        r: p.r,
        word_length: m,
        seeds: wc.seeds,
        window,
        words_found: found.len(),
        total,
        words: found.into_iter().collect(),
        uncoded_seeds: uncoded,
        note: "non-rigorous; sampled covering".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitResult {
    pub code: String,
    pub period: f64,
    /// Section point of the first symbol.
    pub point: Vec<f64>,
    /// All section points along one period.
    pub points: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    pub integrator: IntegratorConfig,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Seeds scanned for the initial guess.
    pub scan_seeds: usize,
    /// Finite-difference step for the return-map Jacobian.
    pub fd_step: f64,
    pub orientation: Orientation,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::adaptive(1e-12),
            max_iterations: 100,
            tolerance: 1e-8,
            scan_seeds: 20_000,
            fd_step: 1e-7,
            orientation: Orientation::PositiveS,
        }
    }
}

/// Next descending crossing after leaving the section point `(x, y)`.
/// Returns the new point and the flight time.
pub fn return_map(model: &Model, q: [f64; 2], cfg: &IntegratorConfig) -> Result<([f64; 2], f64)> {
    let p = lorenz(model)?;
    let x0 = [q[0], q[1], p.section_height()];
    let c = descending_crossings(model, &x0, 1, 100.0, cfg)?;
    let c = c.first().ok_or(Error::NoCrossing { r: p.r, t_max: 100.0 })?;
    Ok(([c.state[0], c.state[1]], c.time))
}

fn symbol_of(x: f64, orientation: Orientation) -> Option<Symbol> {
    if x.abs() <= SYMBOL_DEAD_BAND {
        return None;
    }
    let s = if x > 0.0 { Symbol::S } else { Symbol::T };
    Some(if orientation == Orientation::PositiveS { s } else { s.swapped() })
}

/// Section points closer than this to `C1` or `C2` are not accepted as
/// periodic points, since the equilibria are fixed points of the return map.
pub const EQUILIBRIUM_EXCLUSION: f64 = 1.0;

fn near_equilibrium(p: &LorenzParams, q: [f64; 2]) -> bool {
    let c = (p.b * p.section_height()).sqrt();
    let d = |s: f64| ((q[0] - s * c).powi(2) + (q[1] - s * c).powi(2)).sqrt();
    d(1.0) < EQUILIBRIUM_EXCLUSION || d(-1.0) < EQUILIBRIUM_EXCLUSION
}

/// Initial guess: among orbits started on the word seeds, the stretch of
/// descending crossings that spells the code twice in a row, stays away from
/// the equilibria, and returns closest to itself after one period.
fn scan_guess(model: &Model, code: &[Symbol], oc: &OrbitConfig) -> Result<Vec<[f64; 2]>> {
    let p = lorenz(model)?;
    let n = code.len();
    let reps = 4;
    let wc = WordConfig { orientation: oc.orientation, ..WordConfig::default() };
    let window = seed_window(model, (2 * n).min(8), &wc)?;
    let cfg = IntegratorConfig::adaptive(1e-10);
    let best = word_seeds(&p, window, oc.scan_seeds)
        .par_iter()
        .filter_map(|s| {
            let cr = descending_crossings(model, s, reps * n, 100.0, &cfg).ok()?;
            let pts: Vec<[f64; 2]> = cr.iter().map(|c| [c.state[0], c.state[1]]).collect();
            let mut best: Option<(f64, Vec<[f64; 2]>)> = None;
            for start in 0..pts.len().saturating_sub(2 * n - 1) {
                let ok = (0..2 * n).all(|i| symbol_of(pts[start + i][0], oc.orientation) == Some(code[i % n]))
                    && (0..n).all(|i| !near_equilibrium(&p, pts[start + i]));
                if !ok {
                    continue;
                }
                let d = ((pts[start + n][0] - pts[start][0]).powi(2) + (pts[start + n][1] - pts[start][1]).powi(2)).sqrt();
                if best.as_ref().map_or(true, |b| d < b.0) {
                    best = Some((d, pts[start..start + n].to_vec()));
                }
            }
            best
        })
        .min_by(|a, b| a.0.total_cmp(&b.0));
    best.map(|b| b.1).ok_or_else(|| Error::NotFound(format!("no seed realizes the code with {} seeds", oc.scan_seeds)))
}

/// Periodic orbit of the return map realizing `code`, by multiple shooting:
/// unknowns are the `n` section points, equations `R(p_i) = p_(i+1)`.
pub fn find_periodic_orbit(model: &Model, code: &str, oc: &OrbitConfig) -> Result<PeriodicOrbitResult> {
    let syms = parse_code(code)?;
    if syms.is_empty() {
        return Err(contract("code must be non-empty"));
    }
    let n = syms.len();
    let mut pts = scan_guess(model, &syms, oc)?;
    let residual_of = |pts: &[[f64; 2]]| -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
        let mut res = vec![0.0; 2 * n];
        let mut imgs = Vec::with_capacity(n);
        for i in 0..n {
            let (img, _) = return_map(model, pts[i], &oc.integrator)?;
            let next = pts[(i + 1) % n];
            res[2 * i] = img[0] - next[0];
            res[2 * i + 1] = img[1] - next[1];
            imgs.push(img);
        }
        Ok((res, imgs))
    };
    let mut iterations = 0;
    loop {
        let (res, imgs) = residual_of(&pts)?;
        let norm = linalg::norm(&res);
        if norm <= 0.1 * oc.tolerance || iterations >= oc.max_iterations {
            if iterations >= oc.max_iterations && norm > oc.tolerance {
                return Err(Error::NotFound(format!("Newton did not converge for code {code}, residual {norm:e}")));
            }
            break;
        }
        // Jacobian of F(p) = R(p_i) - p_(i+1) by forward differences
        let mut jac = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for d in 0..2 {
                let mut q = pts[i];
                let hstep = oc.fd_step * (1.0 + q[d].abs());
                q[d] += hstep;
                let (img, _) = return_map(model, q, &oc.integrator)?;
                for e in 0..2 {
                    jac.set(2 * i + e, 2 * i + d, (img[e] - imgs[i][e]) / hstep);
                }
            }
            let j = (i + 1) % n;
            for e in 0..2 {
                let v = jac.get(2 * i + e, 2 * j + e) - 1.0;
                jac.set(2 * i + e, 2 * j + e, v);
            }
        }
        let neg: Vec<f64> = res.iter().map(|v| -v).collect();
        let delta = linalg::solve(&jac, &neg)?;
        // damped update: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let trial: Vec<[f64; 2]> = (0..n).map(|i| [pts[i][0] + lambda * delta[2 * i], pts[i][1] + lambda * delta[2 * i + 1]]).collect();
            if let Ok((r2, _)) = residual_of(&trial) {
                if linalg::norm(&r2) < norm {
                    pts = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        iterations += 1;
        if !accepted {
            if norm <= oc.tolerance {
                break;
            }
            return Err(Error::NotFound(format!("line search failed for code {code}, residual {norm:e}")));
        }
    }
    let p = lorenz(model)?;
    for (i, q) in pts.iter().enumerate() {
        if symbol_of(q[0], oc.orientation) != Some(syms[i]) {
            return Err(Error::NotFound(format!("Newton converged to an orbit with a different code than {code}")));
        }
        if near_equilibrium(&p, *q) {
            return Err(Error::NotFound(format!("Newton converged to an equilibrium instead of an orbit with code {code}")));
        }
    }
    // residual and period by one pass of the n-fold return map
    let mut q = pts[0];
    let mut period = 0.0;
    for _ in 0..n {
        let (img, t) = return_map(model, q, &oc.integrator)?;
        q = img;
        period += t;
    }
    let residual = ((q[0] - pts[0][0]).powi(2) + (q[1] - pts[0][1]).powi(2)).sqrt();
    if residual > oc.tolerance {
        return Err(Error::NotFound(format!("residual {residual:e} above tolerance for code {code}")));
    }
    let h = p.section_height();
    Ok(PeriodicOrbitResult {
        code: code.to_string(),
        period,
        point: vec![pts[0][0], pts[0][1], h],
        points: pts.iter().map(|q| vec![q[0], q[1], h]).collect(),
        residual,
        iterations,
    })
}

/// State and tangent vector integrated together.
struct Tangent<'a> {
    model: &'a Model,
}

impl VectorField for Tangent<'_> {
    fn dim(&self) -> usize {
        2 * self.model.dim()
    }

    fn field(&self, x: &[f64], out: &mut [f64]) {
        let n = self.model.dim();
        self.model.field(&x[..n], &mut out[..n]);
        let mut jac = vec![0.0; n * n];
        self.model.jacobian(&x[..n], &mut jac);
        for i in 0..n {
            out[n + i] = (0..n).map(|j| jac[i * n + j] * x[n + j]).sum();
        }
    }

    fn jacobian(&self, _x: &[f64], _out: &mut [f64]) {
        unimplemented!("not needed by the explicit integrators")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    pub std_error: f64,
    pub segments: usize,
    pub t_transient: f64,
    pub t_max: f64,
}

/// Renormalization interval of the tangent vector.
pub const LYAPUNOV_RENORM: f64 = 1.0;
/// Segments used for the standard error.
pub const LYAPUNOV_SEGMENTS: usize = 10;

/// Benettin estimate of the largest Lyapunov exponent along the orbit of
/// `x0`, discarding the first tenth of `[0, t_max]` as transient.
pub fn largest_lyapunov(model: &Model, x0: &[f64], t_max: f64, cfg: &IntegratorConfig) -> Result<LyapunovEstimate> {
    if t_max < 100.0 {
        return Err(contract("Lyapunov estimates need t_max >= 100"));
    }
    let n = model.dim();
    if x0.len() != n {
        return Err(contract("initial state has the wrong dimension"));
    }
    let tangent = Tangent { model };
    let t_transient = 0.1 * t_max;
    let mut state = x0.to_vec();
    state.extend((0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }));
    let mut st = Stepper::new(&tangent, 0.0, &state, *cfg)?;
    st.advance_to(t_transient)?;
    let renorms = ((t_max - t_transient) / LYAPUNOV_RENORM).floor() as usize;
    let mut logs = Vec::with_capacity(renorms);
    let mut t = t_transient;
    for _ in 0..renorms {
        // restart from the renormalized state so the stepper sees a unit vector
        let mut s = st.state().to_vec();
        let len = linalg::norm(&s[n..]);
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::Numerical("tangent vector collapsed".into()));
        }
        for v in &mut s[n..] {
            *v /= len;
        }
        st = Stepper::new(&tangent, t, &s, *cfg)?;
        st.advance_to(t + LYAPUNOV_RENORM)?;
        t += LYAPUNOV_RENORM;
        logs.push(linalg::norm(&st.state()[n..]).ln());
    }
    let seg = (logs.len() / LYAPUNOV_SEGMENTS).max(1);
    let means: Vec<f64> = logs.chunks(seg).filter(|c| c.len() == seg).map(|c| c.iter().sum::<f64>() / (seg as f64 * LYAPUNOV_RENORM)).collect();
    let k = means.len() as f64;
    let exponent = logs.iter().sum::<f64>() / (logs.len() as f64 * LYAPUNOV_RENORM);
    let mean = means.iter().sum::<f64>() / k;
    let var = if means.len() > 1 { means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    Ok(LyapunovEstimate { exponent, std_error: (var / k).sqrt(), segments: means.len(), t_transient, t_max })
}

/// CSV with one row per crossing: `t,x,y,z,direction,symbol`. Ascending
/// crossings and dead-band crossings carry an empty symbol.
pub fn crossings_csv(crossings: &[SectionCrossing], orientation: Orientation) -> String {
    let mut s = String::from("t,x,y,z,direction,symbol\n");
    for c in crossings {
        let sym = match c.direction {
            Direction::Descending => symbol_of(c.state[0], orientation).map(|s| format!("{s:?}")).unwrap_or_default(),
            Direction::Ascending => String::new(),
        };
        let dir = match c.direction {
            Direction::Descending => "descending",
            Direction::Ascending => "ascending",
        };
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e},{dir},{sym}\n", c.time, c.state[0], c.state[1], c.state[2]));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crossing(x: f64) -> SectionCrossing {
        SectionCrossing { time: 0.0, state: vec![x, 0.0, 27.0], direction: Direction::Descending }
    }

    #[test]
    fn coding_by_sign() {
        let seq = encode_symbols(&[crossing(1.0), crossing(2.0), crossing(-3.0)], Orientation::PositiveS).unwrap();
        assert_eq!(seq.word(), "SST");
        let swapped = encode_symbols(&[crossing(1.0)], Orientation::NegativeS).unwrap();
        assert_eq!(swapped.word(), "T");
        assert!(encode_symbols(&[], Orientation::PositiveS).unwrap().is_empty());
    }

    #[test]
    fn dead_band_is_an_error() {
        let e = encode_symbols(&[crossing(1.0), crossing(1e-10)], Orientation::PositiveS).unwrap_err();
        assert!(matches!(e, Error::AmbiguousSymbol { index: 1, .. }));
    }

    #[test]
    fn equilibrium_has_no_crossings() {
        let m = Model::lorenz(28.0);
        let c = 72f64.sqrt();
        let cr = section_crossings(&m, &[c, c, 27.0], 10.0, &IntegratorConfig::adaptive(1e-10)).unwrap();
        assert!(cr.is_empty());
    }

    #[test]
    fn crossings_at_r28() {
        let m = Model::lorenz(28.0);
        let cr = section_crossings(&m, &[1.0, 1.0, 1.0], 50.0, &IntegratorConfig::adaptive(1e-10)).unwrap();
        let desc = cr.iter().filter(|c| c.direction == Direction::Descending).count();
        assert!(desc >= 20, "{desc} descending crossings");
        for c in &cr {
            assert!((c.state[2] - 27.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn code_parsing() {
        assert_eq!(parse_code("STS").unwrap(), vec![Symbol::S, Symbol::T, Symbol::S]);
        assert!(parse_code("SX").is_err());
    }
}
