//! Exact calculus on finite linear combinations of `r^alpha * ln(r)^m`.
//!
//! Every spline piece, operator kernel and operator image in this crate lives
//! in this function class, which is closed under differentiation,
//! multiplication by powers of `r`, and the frequency operators of
//! [`crate::operators`]. Exponents are kept as exact rationals (integers and
//! half-integers cover everything the operators produce), so kernel
//! annihilation and factorization identities come out as exact zeros rather
//! than small residuals.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

/// Exact exponent of a power term. Integers and half-integers in practice.
pub type Exponent = Ratio<i64>;

/// Default relative tolerance for expression comparison; see
/// [`PowerLogExpr::approx_eq`] and [`PowerLogExpr::prune`].
pub const COEFF_REL_TOL: f64 = 1e-14;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PowerLogError {
    #[error("integral diverges at the {endpoint} endpoint: term {term} is not integrable there")]
    Divergent {
        term: String,
        endpoint: &'static str,
    },
    #[error("invalid integration bounds: lower {lower} must be >= 0 and below upper {upper}")]
    BadBounds { lower: f64, upper: f64 },
    #[error("expression has no finite limit at r = 0")]
    NoLimitAtZero,
}

/// A single term `coeff * r^exponent * ln(r)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLogTerm {
    pub coeff: f64,
    pub exponent: Exponent,
    pub log_power: u32,
}

impl PowerLogTerm {
    pub fn new(coeff: f64, exponent: Exponent, log_power: u32) -> Self {
        Self {
            coeff,
            exponent,
            log_power,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        let p = r.powf(ratio_to_f64(self.exponent));
        if self.log_power == 0 {
            self.coeff * p
        } else {
            self.coeff * p * r.ln().powi(self.log_power as i32)
        }
    }
}

impl fmt::Display for PowerLogTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*r^({})", self.coeff, self.exponent)?;
        if self.log_power > 0 {
            write!(f, "*ln(r)^{}", self.log_power)?;
        }
        Ok(())
    }
}

fn ratio_to_f64(x: Exponent) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// A normalized finite sum of [`PowerLogTerm`]s.
///
/// Normalization merges terms sharing `(exponent, log_power)` and drops exact
/// zeros; kernel annihilation therefore produces the empty expression with no
/// tolerance involved. Terms are kept sorted by `(exponent, log_power)`, so
/// two expressions are equal as functions iff their normalized term lists
/// agree up to coefficient tolerance (see [`approx_eq`](Self::approx_eq)).
/// Magnitude-based pruning is deliberately *not* part of normalization: a
/// coefficient that is tiny next to the expression's largest one can still
/// dominate pointwise values when exponents span a wide range and the domain
/// sits far from `r = 1`; [`prune`](Self::prune) exists for callers that know
/// their scale.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerLogExpr {
    terms: Vec<PowerLogTerm>,
}

impl PowerLogExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![PowerLogTerm::new(c, Ratio::from_integer(0), 0)])
    }

    /// `c * r^alpha` for an integer exponent.
    pub fn monomial(c: f64, alpha: i64) -> Self {
        Self::from_terms(vec![PowerLogTerm::new(c, Ratio::from_integer(alpha), 0)])
    }

    /// `c * r^alpha * ln(r)^m` with an exact rational exponent.
    pub fn term(c: f64, alpha: Exponent, m: u32) -> Self {
        Self::from_terms(vec![PowerLogTerm::new(c, alpha, m)])
    }

    pub fn from_terms(terms: Vec<PowerLogTerm>) -> Self {
        let mut e = Self { terms };
        e.normalize();
        e
    }

    pub fn terms(&self) -> &[PowerLogTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient magnitude, 0 for the zero expression.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc.max(t.coeff.abs()))
    }

    /// Sum of coefficient magnitudes; a cheap symbolic norm.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// The set of exponents present, for structural checks on spline pieces.
    pub fn exponents(&self) -> Vec<Exponent> {
        let mut exps: Vec<Exponent> = self.terms.iter().map(|t| t.exponent).collect();
        exps.dedup();
        exps
    }

    fn normalize(&mut self) {
        use std::collections::BTreeMap;
        let mut merged: BTreeMap<(Exponent, u32), f64> = BTreeMap::new();
        for t in &self.terms {
            *merged.entry((t.exponent, t.log_power)).or_insert(0.0) += t.coeff;
        }
        self.terms = merged
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|((alpha, m), c)| PowerLogTerm::new(c, alpha, m))
            .collect();
    }

    /// Drop terms whose coefficients are below `rel_tol` of the largest one.
    /// Only meaningful when the caller knows all terms act on a comparable
    /// scale (e.g. expressions anchored near `r = 1`).
    pub fn prune(&self, rel_tol: f64) -> Self {
        let cutoff = self.max_abs_coeff() * rel_tol;
        Self {
            terms: self
                .terms
                .iter()
                .filter(|t| t.coeff.abs() > cutoff)
                .copied()
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| PowerLogTerm::new(t.coeff * s, t.exponent, t.log_power))
                .collect(),
        )
    }

    /// Multiply by `r^beta`.
    pub fn mul_power(&self, beta: Exponent) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| PowerLogTerm::new(t.coeff, t.exponent + beta, t.log_power))
                .collect(),
        )
    }

    /// Product of two expressions (exponents add, log powers add).
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(PowerLogTerm::new(
                    a.coeff * b.coeff,
                    a.exponent + b.exponent,
                    a.log_power + b.log_power,
                ));
            }
        }
        Self::from_terms(terms)
    }

    /// Term-wise derivative:
    /// `r^a ln^m r  ->  a r^{a-1} ln^m r + m r^{a-1} ln^{m-1} r`.
    pub fn differentiate(&self) -> Self {
        let one = Ratio::from_integer(1);
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let a = ratio_to_f64(t.exponent);
            if a != 0.0 {
                terms.push(PowerLogTerm::new(
                    t.coeff * a,
                    t.exponent - one,
                    t.log_power,
                ));
            }
            if t.log_power > 0 {
                terms.push(PowerLogTerm::new(
                    t.coeff * t.log_power as f64,
                    t.exponent - one,
                    t.log_power - 1,
                ));
            }
        }
        Self::from_terms(terms)
    }

    /// The Euler operator `r d/dr`, for which `r^a` is an eigenfunction.
    pub fn euler(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let a = ratio_to_f64(t.exponent);
            if a != 0.0 {
                terms.push(PowerLogTerm::new(t.coeff * a, t.exponent, t.log_power));
            }
            if t.log_power > 0 {
                terms.push(PowerLogTerm::new(
                    t.coeff * t.log_power as f64,
                    t.exponent,
                    t.log_power - 1,
                ));
            }
        }
        Self::from_terms(terms)
    }

    /// Derivative of the requested order (0, 1, 2, ...).
    pub fn derivative(&self, order: u32) -> Self {
        let mut e = self.clone();
        for _ in 0..order {
            e = e.differentiate();
        }
        e
    }

    /// Evaluate at `r > 0`; at `r = 0` the one-sided limit is used and
    /// evaluation panics if no finite limit exists (spline pieces always do).
    pub fn eval(&self, r: f64) -> f64 {
        if r == 0.0 {
            return self
                .limit_at_zero()
                .expect("expression has no finite limit at r = 0");
        }
        self.terms.iter().map(|t| t.eval(r)).sum()
    }

    /// One-sided limit as `r -> 0+`, if finite.
    pub fn limit_at_zero(&self) -> Option<f64> {
        let mut sum = 0.0;
        for t in &self.terms {
            if t.exponent > Ratio::from_integer(0) {
                continue; // -> 0
            }
            if t.exponent == Ratio::from_integer(0) && t.log_power == 0 {
                sum += t.coeff;
                continue;
            }
            return None;
        }
        Some(sum)
    }

    /// Limit as `r -> infinity`, if finite.
    pub fn limit_at_infinity(&self) -> Option<f64> {
        let mut sum = 0.0;
        for t in &self.terms {
            if t.exponent < Ratio::from_integer(0) {
                continue;
            }
            if t.exponent == Ratio::from_integer(0) && t.log_power == 0 {
                sum += t.coeff;
                continue;
            }
            return None;
        }
        Some(sum)
    }

    /// Exact antiderivative, again a power-log expression.
    ///
    /// `r^a ln^m` integrates by parts recursively for `a != -1`; for `a = -1`
    /// the antiderivative is `ln^{m+1} r / (m+1)`.
    pub fn antiderivative(&self) -> Self {
        let one = Ratio::from_integer(1);
        let minus_one = Ratio::from_integer(-1);
        let mut out = Vec::new();
        for t in &self.terms {
            if t.exponent == minus_one {
                out.push(PowerLogTerm::new(
                    t.coeff / (t.log_power as f64 + 1.0),
                    Ratio::from_integer(0),
                    t.log_power + 1,
                ));
            } else {
                // c r^a ln^m -> c/(a+1) r^{a+1} ln^m - m/(a+1) * integral of c r^a ln^{m-1}
                let ap1 = ratio_to_f64(t.exponent + one);
                let mut c = t.coeff / ap1;
                let mut m = t.log_power;
                loop {
                    out.push(PowerLogTerm::new(c, t.exponent + one, m));
                    if m == 0 {
                        break;
                    }
                    c *= -(m as f64) / ap1;
                    m -= 1;
                }
            }
        }
        Self::from_terms(out)
    }

    /// Exact definite integral over `(a, b)`, with `a = 0` and
    /// `b = f64::INFINITY` allowed as improper endpoints.
    ///
    /// A term with exponent `<= -1` diverges at 0; a term with exponent
    /// `>= -1` diverges at infinity. Divergent terms are reported by name.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64, PowerLogError> {
        if a.is_nan() || b.is_nan() || a < 0.0 || b <= a {
            return Err(PowerLogError::BadBounds { lower: a, upper: b });
        }
        let minus_one = Ratio::from_integer(-1);
        for t in &self.terms {
            if a == 0.0 && t.exponent <= minus_one {
                return Err(PowerLogError::Divergent {
                    term: t.to_string(),
                    endpoint: "lower (r -> 0)",
                });
            }
            if b.is_infinite() && t.exponent >= minus_one {
                return Err(PowerLogError::Divergent {
                    term: t.to_string(),
                    endpoint: "upper (r -> infinity)",
                });
            }
        }
        let anti = self.antiderivative();
        let upper = if b.is_infinite() {
            anti.limit_at_infinity()
                .expect("tail checked convergent per term")
        } else {
            anti.eval(b)
        };
        let lower = if a == 0.0 {
            anti.limit_at_zero()
                .expect("head checked convergent per term")
        } else {
            anti.eval(a)
        };
        Ok(upper - lower)
    }

    /// Substitute `r -> r / rho` for `rho > 0`, producing the dilated
    /// expression in global coordinates. Log terms expand binomially via
    /// `ln(r/rho) = ln r - ln rho`.
    pub fn dilate(&self, rho: f64) -> Self {
        assert!(rho > 0.0, "dilation factor must be positive");
        let log_rho = rho.ln();
        let mut out = Vec::new();
        for t in &self.terms {
            let scale = t.coeff * rho.powf(-ratio_to_f64(t.exponent));
            let m = t.log_power;
            let mut binom = 1.0f64;
            for j in (0..=m).rev() {
                // binom = C(m, j) at this point in the loop
                out.push(PowerLogTerm::new(
                    scale * binom * (-log_rho).powi((m - j) as i32),
                    t.exponent,
                    j,
                ));
                if j > 0 {
                    binom = binom * j as f64 / (m - j + 1) as f64;
                }
            }
        }
        Self::from_terms(out)
    }

    /// Term-set equality up to a relative coefficient tolerance.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            return true;
        }
        self.sub(other).max_abs_coeff() <= rel_tol * scale
    }
}

impl fmt::Display for PowerLogExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn half(n: i64) -> Exponent {
        Ratio::new(n, 2)
    }

    #[test]
    fn derivative_power_rule() {
        // r^2 -> 2r
        let e = PowerLogExpr::monomial(1.0, 2);
        assert_eq!(e.differentiate(), PowerLogExpr::monomial(2.0, 1));
    }

    #[test]
    fn derivative_of_log() {
        // ln r -> r^{-1}
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(0), 1);
        assert_eq!(e.differentiate(), PowerLogExpr::monomial(1.0, -1));
    }

    #[test]
    fn derivative_product_rule_log() {
        // r^2 ln r -> 2 r ln r + r
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(2), 1);
        let expected =
            PowerLogExpr::term(2.0, Ratio::from_integer(1), 1).add(&PowerLogExpr::monomial(1.0, 1));
        assert_eq!(e.differentiate(), expected);
    }

    #[test]
    fn euler_eigenfunction() {
        for k in 1..=16i64 {
            let e = PowerLogExpr::monomial(1.0, k);
            assert_eq!(e.euler(), PowerLogExpr::monomial(k as f64, k));
        }
        // r ln r -> r ln r + r
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(1), 1);
        let expected =
            PowerLogExpr::term(1.0, Ratio::from_integer(1), 1).add(&PowerLogExpr::monomial(1.0, 1));
        assert_eq!(e.euler(), expected);
        // constants die
        assert!(PowerLogExpr::constant(3.0).euler().is_zero());
    }

    #[test]
    fn integrate_simple_power() {
        let e = PowerLogExpr::monomial(1.0, 2);
        assert_relative_eq!(e.integrate(0.0, 1.0).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn integrate_tail() {
        let e = PowerLogExpr::monomial(1.0, -3);
        assert_relative_eq!(e.integrate(1.0, f64::INFINITY).unwrap(), 0.5);
    }

    #[test]
    fn integrate_r_log_r() {
        // By-parts oracle: antiderivative r^2/2 ln r - r^2/4, so the value on
        // (0, 1] is -1/4.
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(1), 1);
        assert_relative_eq!(e.integrate(0.0, 1.0).unwrap(), -0.25);
    }

    #[test]
    fn integrate_log_squared() {
        // Oracle: integral of ln^2 r over (0,1] is 2 (by parts twice).
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(0), 2);
        assert_relative_eq!(e.integrate(0.0, 1.0).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn divergence_reported_with_term() {
        let e = PowerLogExpr::monomial(2.0, -1);
        let err = e.integrate(0.0, 1.0).unwrap_err();
        match err {
            PowerLogError::Divergent { term, .. } => assert!(term.contains("r^(-1)")),
            other => panic!("unexpected error {other:?}"),
        }
        // ln r diverges at infinity
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(0), 1);
        assert!(e.integrate(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn antiderivative_roundtrip() {
        // d/dr of the antiderivative reproduces the expression exactly,
        // including half-integer exponents and log powers.
        let cases = vec![
            PowerLogExpr::monomial(3.0, 4),
            PowerLogExpr::term(-2.0, half(5), 2),
            PowerLogExpr::term(1.5, Ratio::from_integer(-1), 1),
            PowerLogExpr::term(0.25, half(-3), 0).add(&PowerLogExpr::term(
                -7.0,
                Ratio::from_integer(2),
                3,
            )),
        ];
        for e in cases {
            assert!(
                e.antiderivative().differentiate().approx_eq(&e, 1e-13),
                "round trip failed for {e}"
            );
        }
    }

    #[test]
    fn mul_merges_terms() {
        let a = PowerLogExpr::monomial(2.0, 1).add(&PowerLogExpr::term(1.0, half(1), 1));
        let b = PowerLogExpr::monomial(0.5, -1);
        let p = a.mul(&b);
        let expected = PowerLogExpr::constant(1.0).add(&PowerLogExpr::term(0.5, half(-1), 1));
        assert_eq!(p, expected);
    }

    #[test]
    fn limits() {
        let e = PowerLogExpr::monomial(5.0, 2).add(&PowerLogExpr::constant(1.0));
        assert_eq!(e.limit_at_zero(), Some(1.0));
        assert_eq!(e.limit_at_infinity(), None);
        let e = PowerLogExpr::monomial(5.0, -2).add(&PowerLogExpr::constant(1.0));
        assert_eq!(e.limit_at_infinity(), Some(1.0));
        assert_eq!(e.limit_at_zero(), None);
        assert_eq!(
            PowerLogExpr::term(1.0, Ratio::from_integer(0), 1).limit_at_zero(),
            None
        );
    }

    #[test]
    fn dilate_matches_pointwise_substitution() {
        let e = PowerLogExpr::term(2.0, half(3), 2)
            .add(&PowerLogExpr::monomial(-1.0, 1))
            .add(&PowerLogExpr::term(0.5, Ratio::from_integer(-1), 1));
        let rho = 1.7;
        let d = e.dilate(rho);
        for r in [0.3, 1.0, 2.9, 10.0] {
            assert_relative_eq!(d.eval(r), e.eval(r / rho), max_relative = 1e-13);
        }
    }

    #[test]
    fn normalization_is_canonical() {
        let a = PowerLogExpr::from_terms(vec![
            PowerLogTerm::new(1.0, Ratio::from_integer(2), 0),
            PowerLogTerm::new(2.0, Ratio::from_integer(2), 0),
            PowerLogTerm::new(0.0, Ratio::from_integer(7), 0),
        ]);
        let b = PowerLogExpr::monomial(3.0, 2);
        assert_eq!(a, b);
        // exact cancellation leaves the zero expression
        let c = a.sub(&b);
        assert!(c.is_zero());
    }
}
