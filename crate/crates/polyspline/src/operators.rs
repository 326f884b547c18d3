//! The frequency-indexed differential operators `L_k`, `G_k`, `R_k`, `M_k`.
//!
//! For a nonzero frequency `k`, the fourth-order operator
//!
//! ```text
//! L_k = r (d^2/dr^2 + r^{-1} d/dr - k^2 r^{-2})^2
//! ```
//!
//! governs the radial amplitude of a biharmonic surface mode, and factors
//! through the Euler operator `E = r d/dr` as
//!
//! ```text
//! L_k = r^{-3} (E - |k|)(E - |k| - 2)(E + |k|)(E + |k| - 2).
//! ```
//!
//! The second-order end operators
//!
//! ```text
//! G_k = r^{-3} (E - |k|)(E - |k| - 2),   R_k = r^{-3} (E + |k|)(E + |k| - 2)
//! ```
//!
//! are formal adjoints of one another; their kernels span the admissible
//! behaviours near 0 and near infinity, and `L_k = G_k r^3 R_k`. A second
//! factorization `L_k = M_k^* M_k` uses `M_k = r^{-3/2} (E - |k|)(E + |k|)`.
//! All of this is implemented exactly on [`PowerLogExpr`], so the kernel and
//! factorization identities can be tested symbolically.

use num_rational::Ratio;
use thiserror::Error;

use crate::powerlog::{Exponent, PowerLogExpr};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum OperatorError {
    #[error("frequency k = 0 is not supported by the nonzero-frequency operators")]
    ZeroFrequency,
}

/// Apply the shifted Euler product `(E + s_1)(E + s_2)...` left to right on
/// the rightmost factor first.
pub fn euler_product(e: &PowerLogExpr, shifts: &[i64]) -> PowerLogExpr {
    let mut out = e.clone();
    for &s in shifts.iter().rev() {
        out = out.euler().add(&out.scale(s as f64));
    }
    out
}

/// Operator bundle for one nonzero frequency.
///
/// All operators depend on `|k|` only, which is what makes splines for `k`
/// and `-k` identical on real data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeOps {
    k_abs: i64,
}

impl ModeOps {
    pub fn new(k: i32) -> Result<Self, OperatorError> {
        if k == 0 {
            return Err(OperatorError::ZeroFrequency);
        }
        Ok(Self {
            k_abs: (k as i64).abs(),
        })
    }

    pub fn k_abs(&self) -> i64 {
        self.k_abs
    }

    /// `G_k = r^{-3} (E - |k|)(E - |k| - 2)`, the end operator at 0.
    pub fn g(&self, e: &PowerLogExpr) -> PowerLogExpr {
        self.endpoint_left(e).mul_power(Ratio::from_integer(-3))
    }

    /// `R_k = r^{-3} (E + |k|)(E + |k| - 2)`, the end operator at infinity.
    pub fn r(&self, e: &PowerLogExpr) -> PowerLogExpr {
        self.endpoint_right(e).mul_power(Ratio::from_integer(-3))
    }

    /// `(E - |k|)(E - |k| - 2)`, i.e. `r^3 G_k`; this is the left endpoint
    /// condition row used by the interpolation system.
    pub fn endpoint_left(&self, e: &PowerLogExpr) -> PowerLogExpr {
        euler_product(e, &[-self.k_abs, -self.k_abs - 2])
    }

    /// `(E + |k|)(E + |k| - 2)`, i.e. `r^3 R_k`.
    pub fn endpoint_right(&self, e: &PowerLogExpr) -> PowerLogExpr {
        euler_product(e, &[self.k_abs, self.k_abs - 2])
    }

    /// `L_k` applied via its defining form `r (d^2 + r^{-1} d - k^2 r^{-2})^2`,
    /// independent of the Euler factorizations (which tests then verify).
    pub fn l(&self, e: &PowerLogExpr) -> PowerLogExpr {
        let once = self.bessel_like(e);
        self.bessel_like(&once).mul_power(Ratio::from_integer(1))
    }

    /// `d^2/dr^2 + r^{-1} d/dr - k^2 r^{-2}`.
    fn bessel_like(&self, e: &PowerLogExpr) -> PowerLogExpr {
        let k2 = (self.k_abs * self.k_abs) as f64;
        let d1 = e.differentiate();
        let d2 = d1.differentiate();
        d2.add(&d1.mul_power(Ratio::from_integer(-1)))
            .sub(&e.scale(k2).mul_power(Ratio::from_integer(-2)))
    }

    /// `M_k = r^{-3/2} (E - |k|)(E + |k|)`.
    pub fn m(&self, e: &PowerLogExpr) -> PowerLogExpr {
        euler_product(e, &[-self.k_abs, self.k_abs]).mul_power(Ratio::new(-3, 2))
    }

    /// Formal adjoint of `M_k` with respect to the unweighted inner product
    /// on `(0, infinity)`:
    /// `M_k^* v = (r^{1/2} v)'' - (r^{-1/2} v)' - k^2 r^{-3/2} v`.
    pub fn m_adjoint(&self, e: &PowerLogExpr) -> PowerLogExpr {
        let k2 = (self.k_abs * self.k_abs) as f64;
        let a = e.mul_power(Ratio::new(1, 2)).derivative(2);
        let b = e.mul_power(Ratio::new(-1, 2)).differentiate();
        let c = e.scale(k2).mul_power(Ratio::new(-3, 2));
        a.sub(&b).sub(&c)
    }

    /// The four generators of `Ker L_k`: for `|k| >= 2` these are
    /// `r^{|k|+2}, r^{|k|}, r^{2-|k|}, r^{-|k|}`; for `|k| = 1` the repeated
    /// exponent is replaced by `r ln r`.
    pub fn kernel_l(&self) -> [PowerLogExpr; 4] {
        if self.k_abs == 1 {
            [
                PowerLogExpr::monomial(1.0, 3),
                PowerLogExpr::monomial(1.0, 1),
                PowerLogExpr::term(1.0, Ratio::from_integer(1), 1),
                PowerLogExpr::monomial(1.0, -1),
            ]
        } else {
            [
                PowerLogExpr::monomial(1.0, self.k_abs + 2),
                PowerLogExpr::monomial(1.0, self.k_abs),
                PowerLogExpr::monomial(1.0, 2 - self.k_abs),
                PowerLogExpr::monomial(1.0, -self.k_abs),
            ]
        }
    }

    /// Generators of `Ker G_k = span{r^{|k|+2}, r^{|k|}}` (admissible near 0).
    pub fn kernel_g(&self) -> [PowerLogExpr; 2] {
        [
            PowerLogExpr::monomial(1.0, self.k_abs + 2),
            PowerLogExpr::monomial(1.0, self.k_abs),
        ]
    }

    /// Generators of `Ker R_k = span{r^{2-|k|}, r^{-|k|}}` (admissible near
    /// infinity).
    pub fn kernel_r(&self) -> [PowerLogExpr; 2] {
        [
            PowerLogExpr::monomial(1.0, 2 - self.k_abs),
            PowerLogExpr::monomial(1.0, -self.k_abs),
        ]
    }

    /// Exponents allowed in an admissible head piece, `{|k|, |k|+2}`.
    pub fn head_exponents(&self) -> [Exponent; 2] {
        [
            Ratio::from_integer(self.k_abs),
            Ratio::from_integer(self.k_abs + 2),
        ]
    }

    /// Exponents allowed in an admissible tail piece, `{2-|k|, -|k|}`.
    pub fn tail_exponents(&self) -> [Exponent; 2] {
        [
            Ratio::from_integer(2 - self.k_abs),
            Ratio::from_integer(-self.k_abs),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(c: f64, a: i64) -> PowerLogExpr {
        PowerLogExpr::monomial(c, a)
    }

    #[test]
    fn g3_annihilates_its_kernel() {
        let ops = ModeOps::new(3).unwrap();
        assert!(ops.g(&mono(1.0, 5)).is_zero());
        assert!(ops.g(&mono(1.0, 3)).is_zero());
        assert!(!ops.g(&mono(1.0, 2)).is_zero());
    }

    #[test]
    fn l2_annihilates_r4() {
        let ops = ModeOps::new(2).unwrap();
        assert!(ops.l(&mono(1.0, 4)).is_zero());
    }

    #[test]
    fn r2_on_r4() {
        // (E+2)(E+0) r^4 = 24 r^4, then divide by r^3.
        let ops = ModeOps::new(2).unwrap();
        assert_eq!(ops.r(&mono(1.0, 4)), mono(24.0, 1));
    }

    #[test]
    fn kernel_annihilation_all_frequencies() {
        for k in 1..=16 {
            let ops = ModeOps::new(k).unwrap();
            for gen in ops.kernel_l() {
                assert!(ops.l(&gen).is_zero(), "L_{k} failed on {gen}");
            }
            for gen in ops.kernel_g() {
                assert!(ops.g(&gen).is_zero(), "G_{k} failed on {gen}");
            }
            for gen in ops.kernel_r() {
                assert!(ops.r(&gen).is_zero(), "R_{k} failed on {gen}");
            }
            // negative frequencies share the same operators
            let neg = ModeOps::new(-k).unwrap();
            assert_eq!(ops, neg);
        }
    }

    #[test]
    fn factors_through_g_r3_r() {
        // L_k = G_k r^3 R_k on monomials r^{-3}..r^5, all |k| <= 8.
        for k in 1..=8 {
            let ops = ModeOps::new(k).unwrap();
            for j in -3..=5 {
                let e = mono(1.0, j);
                let via_factor = ops.g(&ops.r(&e).mul_power(Ratio::from_integer(3)));
                let direct = ops.l(&e);
                assert!(
                    via_factor.approx_eq(&direct, 1e-12),
                    "k={k} j={j}: {via_factor} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn factors_through_m_adjoint_m() {
        for k in 1..=8 {
            let ops = ModeOps::new(k).unwrap();
            for j in -3..=5 {
                let e = mono(1.0, j);
                let via_factor = ops.m_adjoint(&ops.m(&e));
                let direct = ops.l(&e);
                assert!(
                    via_factor.approx_eq(&direct, 1e-12),
                    "k={k} j={j}: {via_factor} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn m2_annihilates_euler_eigenfunctions() {
        let ops = ModeOps::new(2).unwrap();
        assert!(ops.m(&mono(1.0, 2)).is_zero());
        assert!(ops.m(&mono(1.0, -2)).is_zero());
        assert!(ops.m_adjoint(&ops.m(&mono(1.0, 4))).is_zero());
        // M_2^* M_2 r^3 = L_2 r^3 = -15 (constant)
        let lhs = ops.m_adjoint(&ops.m(&mono(1.0, 3)));
        assert!(lhs.approx_eq(&ops.l(&mono(1.0, 3)), 1e-13));
        assert!(lhs.approx_eq(&PowerLogExpr::constant(-15.0), 1e-13));
    }

    #[test]
    fn factorizations_cover_log_generators() {
        // |k| = 1 has the r ln r generator; both factorizations must agree
        // with the direct form there too.
        let ops = ModeOps::new(1).unwrap();
        let e = PowerLogExpr::term(1.0, Ratio::from_integer(1), 1);
        let direct = ops.l(&e);
        assert!(direct.is_zero());
        let via_g = ops.g(&ops.r(&e).mul_power(Ratio::from_integer(3)));
        assert!(via_g.is_zero());
        assert!(ops.m_adjoint(&ops.m(&e)).is_zero());
    }

    #[test]
    fn zero_frequency_rejected() {
        assert_eq!(ModeOps::new(0).unwrap_err(), OperatorError::ZeroFrequency);
    }
}
