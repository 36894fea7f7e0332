//! Poincare polynomials and the Morse equations relating them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Polynomial in `t` with integer coefficients, lowest degree first, no
/// trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polynomial(Vec<i64>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn one() -> Self {
        Self(vec![1])
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        Self(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> i64 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn eval(&self, t: i64) -> i64 {
        self.0.iter().rev().fold(0, |acc, &c| acc * t + c)
    }

    /// Quotient and remainder of division by `1 + t`.
    pub fn div_one_plus_t(&self) -> (Self, i64) {
        let n = self.0.len();
        if n == 0 {
            return (Self::zero(), 0);
        }
        let mut q = vec![0i64; n - 1];
        let mut carry = 0;
        // from the top: q[k-1] = p[k] - q[k]
        for k in (1..n).rev() {
            let v = self.0[k] - carry;
            q[k - 1] = v;
            carry = v;
        }
        (Self::new(q), self.0[0] - carry)
    }

    pub fn mul_one_plus_t(&self) -> Self {
        let n = self.0.len();
        Self::new((0..=n).map(|k| self.coeff(k) + if k > 0 { self.coeff(k - 1) } else { 0 }).collect())
    }

    fn term_count(&self) -> usize {
        self.0.iter().filter(|&&c| c != 0).count()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "{}", if c < 0 { "-" } else { "+" })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.unsigned_abs();
            match (k, a) {
                (0, _) => write!(f, "{a}")?,
                (_, 1) => {}
                _ => write!(f, "{a}")?,
            }
            match k {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        Ok(())
    }
}

/// Poincare polynomial of a Conley index: Betti numbers as coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PoincarePolynomial(Vec<u64>);

impl PoincarePolynomial {
    pub fn new(mut betti: Vec<u64>) -> Self {
        while betti.last() == Some(&0) {
            betti.pop();
        }
        Self(betti)
    }

    /// Rejects negative ranks.
    pub fn from_ranks(ranks: &[i64]) -> Result<Self> {
        if ranks.iter().any(|&r| r < 0) {
            return Err(contract("ranks must be non-negative"));
        }
        Ok(Self::new(ranks.iter().map(|&r| r as u64).collect()))
    }

    pub fn betti(&self) -> &[u64] {
        &self.0
    }

    pub fn rank(&self, k: usize) -> u64 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::new(self.0.iter().map(|&b| b as i64).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PoincarePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_polynomial().fmt(f)
    }
}

/// One Morse equation `lhs = global + (1 + t) Q(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseEquationReport {
    pub lhs: Polynomial,
    pub global: Polynomial,
    pub q: Polynomial,
    /// Remainder of `lhs - global` on division by `1 + t`.
    pub remainder: i64,
    /// Division exact and `Q` has non-negative coefficients.
    pub valid: bool,
    pub display: String,
}

impl MorseEquationReport {
    pub fn new(lhs: Polynomial, global: Polynomial) -> Self {
        let (q, remainder) = lhs.sub(&global).div_one_plus_t();
        let valid = remainder == 0 && q.is_nonnegative();
        let display = format!("{lhs}={}", rhs_display(&global, &q, remainder));
        Self { lhs, global, q, remainder, valid, display }
    }
}

fn rhs_display(global: &Polynomial, q: &Polynomial, remainder: i64) -> String {
    let mut s = global.to_string();
    if !q.is_zero() {
        let qs = q.to_string();
        if *q == Polynomial::one() {
            s.push_str("+(1+t)");
        } else if q.term_count() == 1 && q.coeff(0) >= 0 && q.is_nonnegative() {
            s.push_str(&format!("+(1+t){qs}"));
        } else {
            s.push_str(&format!("+(1+t)({qs})"));
        }
    }
    if remainder != 0 {
        s.push_str(&format!("{remainder:+}"));
    }
    s
}

/// Morse equation for a decomposition: the sum of the nodes' Poincare
/// polynomials against that of the global invariant set.
pub fn morse_equations(nodes: &[PoincarePolynomial], global: &PoincarePolynomial) -> MorseEquationReport {
    let lhs = nodes.iter().fold(Polynomial::zero(), |acc, p| acc.add(&p.to_polynomial()));
    MorseEquationReport::new(lhs, global.to_polynomial())
}

/// Left side `sum r_k t^k + sum r_k t^(k+1) - t` of the index-1 travel
/// relation for one invariant set with Betti numbers `r`.
fn travel_term(r: &PoincarePolynomial) -> Polynomial {
    r.to_polynomial().mul_one_plus_t().sub(&Polynomial::monomial(1))
}

/// Morse equations along the homoclinic and heteroclinic bifurcations, from
/// the Betti numbers of the strange invariant set `K` and of the set `C`
/// appearing at the second bifurcation. The global invariant set has index 1.
///
/// Stage 1 is `C` alone with the origin, stage 2 carries both `K` and `C`,
/// stage 3 is `K` alone.
pub fn travel_equations(betti_k: &[i64], betti_c: &[i64]) -> Result<[MorseEquationReport; 3]> {
    let k = PoincarePolynomial::from_ranks(betti_k)?;
    let c = PoincarePolynomial::from_ranks(betti_c)?;
    let global = Polynomial::one();
    let tk = travel_term(&k);
    let tc = travel_term(&c);
    let stage2 = k.to_polynomial().mul_one_plus_t().add(&tc);
    Ok([MorseEquationReport::new(tc, global.clone()), MorseEquationReport::new(stage2, global.clone()), MorseEquationReport::new(tk, global)])
}

/// Morse equation for the supercritical pitchfork in the normal form with `k`
/// unstable directions: origin of index `t^k`, attracting sphere of index
/// `1 + t^(k-1)`, global index 1.
pub fn pitchfork_equations(k: usize) -> Result<MorseEquationReport> {
    if k == 0 {
        return Err(contract("pitchfork needs at least one unstable direction"));
    }
    let sphere = Polynomial::one().add(&Polynomial::monomial(k - 1));
    let lhs = sphere.add(&Polynomial::monomial(k));
    Ok(MorseEquationReport::new(lhs, Polynomial::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        assert_eq!(Polynomial::new(vec![2, 1]).to_string(), "2+t");
        assert_eq!(Polynomial::new(vec![3, 4, 2]).to_string(), "3+4t+2t^2");
        assert_eq!(Polynomial::new(vec![0, -1, 0, 1]).to_string(), "-t+t^3");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn division_by_one_plus_t() {
        let p = Polynomial::new(vec![2, 6, 4]); // 2(1+t)(1+2t)
        let (q, r) = p.div_one_plus_t();
        assert_eq!((q, r), (Polynomial::new(vec![2, 4]), 0));
        let (_, r) = Polynomial::new(vec![1, 0, 1]).div_one_plus_t();
        assert_eq!(r, 2);
    }

    #[test]
    fn travel_for_one_and_two_circles() {
        let [s1, s2, s3] = travel_equations(&[1, 2], &[2]).unwrap();
        assert_eq!(s1.display, "2+t=1+(1+t)");
        assert_eq!(s2.display, "3+4t+2t^2=1+(1+t)(2+2t)");
        assert_eq!(s3.display, "1+2t+2t^2=1+(1+t)2t");
        assert!(s1.valid && s2.valid && s3.valid);
    }

    #[test]
    fn pitchfork_in_low_dimensions() {
        let e = pitchfork_equations(1).unwrap();
        assert_eq!(e.display, "2+t=1+(1+t)");
        let e = pitchfork_equations(3).unwrap();
        assert_eq!(e.display, "1+t^2+t^3=1+(1+t)t^2");
        assert!(e.valid);
        assert!(pitchfork_equations(0).is_err());
    }

    #[test]
    fn negative_ranks_rejected() {
        assert!(travel_equations(&[1, -1], &[1]).is_err());
    }
}
