//! Construction and evaluation of interpolatory Beppo Levi L_k-splines.
//!
//! For a nonzero frequency `k` and knots `0 < r_1 < ... < r_n`, the spline
//! interpolating values `v_1..v_n` is the unique function that
//!
//! * solves `L_k u = 0` between consecutive knots,
//! * lies in `Ker G_k` on `(0, r_1)` and in `Ker R_k` on `(r_n, infinity)`
//!   (the adjoint end conditions that make its energy finite), and
//! * joins `C^2`-continuously across every knot.
//!
//! The construction solves a `4(n-1)` linear system for the interior pieces
//! and then extends across the extreme intervals by `C^1` matching; second
//! derivatives match automatically because of the endpoint condition rows.
//! Interior pieces are expressed per segment in the anchored basis
//! `(r / anchor)^mu` with growing exponents anchored at the right knot and
//! decaying ones at the left, so all basis values lie in `(0, 1]` and the
//! matrix never sees entries of size `r_j^(+-|k|)` or
//! `exp(|mu| * segment width in log r)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Ratio;
use thiserror::Error;

use crate::knots::{KnotError, KnotSet};
use crate::operators::{ModeOps, OperatorError};
use crate::piecewise::PiecewiseRadial;
use crate::powerlog::PowerLogExpr;

/// Construction fails if the solved system's relative residual exceeds this.
pub const MAX_SOLVE_RESIDUAL: f64 = 1e-6;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SplineError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Knots(#[from] KnotError),
    #[error("expected {expected} data values for {expected} knots, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("interpolation system is numerically singular (relative residual {residual:.3e})")]
    SingularSystem { residual: f64 },
    #[error("kernel-dilate representation requires |k| >= 2; it does not exist for |k| = 1")]
    CollocationUnsupported,
    #[error("collocation Gram matrix is not positive definite")]
    GramNotPositiveDefinite,
    #[error("derivative order {order} not supported; third derivatives jump at knots")]
    DerivativeOrder { order: u32 },
    #[error("radius must be nonnegative, got {r}")]
    NegativeRadius { r: f64 },
}

/// An interpolatory Beppo Levi L_k-spline.
#[derive(Debug, Clone, PartialEq)]
pub struct BeppoLeviSpline {
    k: i32,
    values: Vec<f64>,
    pieces: PiecewiseRadial,
    solve_residual: f64,
}

impl BeppoLeviSpline {
    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn k_abs(&self) -> i64 {
        (self.k as i64).abs()
    }

    pub fn knots(&self) -> &[f64] {
        &self.pieces.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> &PiecewiseRadial {
        &self.pieces
    }

    pub fn head(&self) -> &PowerLogExpr {
        &self.pieces.head
    }

    pub fn tail(&self) -> &PowerLogExpr {
        &self.pieces.tail
    }

    pub fn interior(&self) -> &[PowerLogExpr] {
        &self.pieces.interior
    }

    /// Relative residual of the linear solve (0 for the single-knot path).
    pub fn solve_residual(&self) -> f64 {
        self.solve_residual
    }

    /// Evaluate the `order`-th derivative (order 0, 1 or 2) at `r >= 0`.
    pub fn evaluate(&self, r: f64, order: u32) -> Result<f64, SplineError> {
        if order > 2 {
            return Err(SplineError::DerivativeOrder { order });
        }
        if r < 0.0 {
            return Err(SplineError::NegativeRadius { r });
        }
        Ok(self.pieces.eval(r, order))
    }

    /// Convenience value accessor.
    pub fn value(&self, r: f64) -> f64 {
        self.evaluate(r, 0).expect("order 0 at nonnegative radius")
    }

    /// Symbolic residuals `(|G_k head|, |R_k tail|)` measured as coefficient
    /// l1 norms; both are exactly zero for a correctly constructed spline.
    pub fn end_condition_residuals(&self) -> (f64, f64) {
        let ops = ModeOps::new(self.k).expect("spline frequency is nonzero");
        (
            ops.g(&self.pieces.head).coeff_l1(),
            ops.r(&self.pieces.tail).coeff_l1(),
        )
    }

    /// Rebuild with a substituted tail piece. Only useful for constructing
    /// negative controls in verification; the result generally violates the
    /// defining end conditions.
    pub fn with_tail_piece(mut self, tail: PowerLogExpr) -> Self {
        self.pieces.tail = tail;
        self
    }

    /// Internal constructor for deserialized artifacts; validates shape only.
    pub fn from_parts(
        k: i32,
        knots: KnotSet,
        values: Vec<f64>,
        head: PowerLogExpr,
        interior: Vec<PowerLogExpr>,
        tail: PowerLogExpr,
    ) -> Result<Self, SplineError> {
        ModeOps::new(k)?;
        if values.len() != knots.len() {
            return Err(SplineError::LengthMismatch {
                expected: knots.len(),
                found: values.len(),
            });
        }
        if interior.len() + 1 != knots.len() {
            return Err(SplineError::LengthMismatch {
                expected: knots.len() - 1,
                found: interior.len(),
            });
        }
        Ok(Self {
            k,
            values,
            pieces: PiecewiseRadial {
                breaks: knots.radii().to_vec(),
                head,
                interior,
                tail,
            },
            solve_residual: 0.0,
        })
    }
}

/// The single-knot basis spline: `phi_k(1) = 1`, `C^2` at `r = 1`, admissible
/// at both ends. For `|k| >= 2` its dilates span the whole spline space.
pub fn phi(k: i32, r: f64) -> f64 {
    let kk = (k as f64).abs();
    debug_assert!(kk >= 1.0, "phi is defined for |k| >= 1");
    if r <= 1.0 {
        0.5 * r.powf(kk) * ((1.0 + kk) + (1.0 - kk) * r * r)
    } else {
        0.5 * r.powf(-kk) * ((1.0 - kk) + (1.0 + kk) * r * r)
    }
}

/// `phi_k` on `[0, 1]` as an expression: `(1+|k|)/2 r^|k| + (1-|k|)/2 r^{|k|+2}`.
pub fn phi_lower_expr(k: i32) -> PowerLogExpr {
    let kk = (k as i64).abs();
    PowerLogExpr::monomial(0.5 * (1.0 + kk as f64), kk)
        .add(&PowerLogExpr::monomial(0.5 * (1.0 - kk as f64), kk + 2))
}

/// `phi_k` on `[1, infinity)`: `(1-|k|)/2 r^{-|k|} + (1+|k|)/2 r^{2-|k|}`.
pub fn phi_upper_expr(k: i32) -> PowerLogExpr {
    let kk = (k as i64).abs();
    PowerLogExpr::monomial(0.5 * (1.0 - kk as f64), -kk)
        .add(&PowerLogExpr::monomial(0.5 * (1.0 + kk as f64), 2 - kk))
}

/// Basis of the solution space on one interior segment `[left, right]`:
/// `(r/anchor)^mu` for `mu` in `{|k|+2, |k|, 2-|k|, -|k|}`, with the repeated
/// `mu = 1` replaced by `(r/left) ln(r/left)` when `|k| = 1`.
///
/// Growing exponents are anchored at the right knot and decaying ones at the
/// left, so every basis value on the segment lies in `(0, 1]` and the system
/// matrix never sees entries of size `exp(|mu| * segment width in log r)`.
fn segment_basis(ops: &ModeOps, left: f64, right: f64) -> [PowerLogExpr; 4] {
    let k = ops.k_abs();
    let mono = |mu: i64| {
        let anchor = if mu > 0 { right } else { left };
        PowerLogExpr::monomial(1.0, mu).dilate(anchor)
    };
    if k == 1 {
        [
            mono(3),
            mono(1),
            PowerLogExpr::term(1.0, Ratio::from_integer(1), 1).dilate(left),
            mono(-1),
        ]
    } else {
        [mono(k + 2), mono(k), mono(2 - k), mono(-k)]
    }
}

struct AssembledSystem {
    ops: ModeOps,
    knots: KnotSet,
    basis: Vec<[PowerLogExpr; 4]>,
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Row equilibration factors applied to the matrix (and to every rhs).
    row_scale: Vec<f64>,
}

impl AssembledSystem {
    /// Assemble the `4(n-1)` system: one interpolation row per knot, three
    /// continuity rows per interior knot, and the two endpoint rows
    /// `(E - |k|)(E - |k| - 2) = 0` at `r_1+`, `(E + |k|)(E + |k| - 2) = 0`
    /// at `r_n-`.
    fn new(k: i32, knots: KnotSet) -> Result<Self, SplineError> {
        let ops = ModeOps::new(k)?;
        let n = knots.len();
        debug_assert!(n >= 2);
        let radii = knots.radii();
        let dim = 4 * (n - 1);
        let basis: Vec<[PowerLogExpr; 4]> = (0..n - 1)
            .map(|j| segment_basis(&ops, radii[j], radii[j + 1]))
            .collect();
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut row = 0;
        // interpolation at r_j from the segment to its right (last knot from
        // the last segment)
        for j in 0..n - 1 {
            for i in 0..4 {
                a[(row, 4 * j + i)] = basis[j][i].eval(radii[j]);
            }
            row += 1;
        }
        for i in 0..4 {
            a[(row, 4 * (n - 2) + i)] = basis[n - 2][i].eval(radii[n - 1]);
        }
        row += 1;
        // C^2 continuity at interior knots
        for j in 1..n - 1 {
            for order in 0..3u32 {
                for i in 0..4 {
                    a[(row, 4 * (j - 1) + i)] = basis[j - 1][i].derivative(order).eval(radii[j]);
                    a[(row, 4 * j + i)] = -basis[j][i].derivative(order).eval(radii[j]);
                }
                row += 1;
            }
        }
        // endpoint rows
        for i in 0..4 {
            a[(row, i)] = ops.endpoint_left(&basis[0][i]).eval(radii[0]);
        }
        row += 1;
        for i in 0..4 {
            a[(row, 4 * (n - 2) + i)] = ops.endpoint_right(&basis[n - 2][i]).eval(radii[n - 1]);
        }
        row += 1;
        debug_assert_eq!(row, dim);

        // row equilibration keeps the derivative and endpoint rows from
        // dominating the value rows
        let mut row_scale = vec![1.0; dim];
        for i in 0..dim {
            let max = (0..dim).fold(0.0f64, |acc, j| acc.max(a[(i, j)].abs()));
            if max > 0.0 {
                row_scale[i] = 1.0 / max;
                for j in 0..dim {
                    a[(i, j)] *= row_scale[i];
                }
            }
        }

        let lu = a.clone().lu();
        Ok(Self {
            ops,
            knots,
            basis,
            matrix: a,
            lu,
            row_scale,
        })
    }

    /// Solve for one set of interpolation values: LU with partial pivoting
    /// plus one step of iterative refinement, then reject if the relative
    /// residual is still large.
    fn solve(&self, k: i32, values: &[f64]) -> Result<BeppoLeviSpline, SplineError> {
        let n = self.knots.len();
        let dim = 4 * (n - 1);
        let mut b = DVector::<f64>::zeros(dim);
        for j in 0..n {
            b[j] = values[j] * self.row_scale[j];
        }
        let mut x = self.lu.solve(&b).ok_or(SplineError::SingularSystem {
            residual: f64::INFINITY,
        })?;
        // one refinement pass
        let resid = &b - &self.matrix * &x;
        if let Some(dx) = self.lu.solve(&resid) {
            x += dx;
        }
        let resid = &b - &self.matrix * &x;
        let scale = self.matrix.norm() * x.norm() + b.norm();
        let rel = if scale > 0.0 {
            resid.norm() / scale
        } else {
            0.0
        };
        if !rel.is_finite() || rel > MAX_SOLVE_RESIDUAL {
            return Err(SplineError::SingularSystem { residual: rel });
        }

        let radii = self.knots.radii();
        let interior: Vec<PowerLogExpr> = (0..n - 1)
            .map(|j| {
                (0..4).fold(PowerLogExpr::zero(), |acc, i| {
                    acc.add(&self.basis[j][i].scale(x[4 * j + i]))
                })
            })
            .collect();

        // Extend by C^1 matching; C^2 follows from the endpoint rows.
        let (head, tail) = extend_ends(
            &self.ops,
            radii[0],
            values[0],
            interior[0].differentiate().eval(radii[0]),
            radii[n - 1],
            values[n - 1],
            interior[n - 2].differentiate().eval(radii[n - 1]),
        );

        Ok(BeppoLeviSpline {
            k,
            values: values.to_vec(),
            pieces: PiecewiseRadial {
                breaks: radii.to_vec(),
                head,
                interior,
                tail,
            },
            solve_residual: rel,
        })
    }
}

/// Head and tail pieces from value/slope data at the extreme knots.
///
/// Head: `c1 (r/r1)^{|k|+2} + c2 (r/r1)^{|k|}` with `c1 + c2 = v`,
/// `((|k|+2) c1 + |k| c2)/r1 = d`, so `c1 = (d r1 - |k| v)/2`.
/// Tail analogously with exponents `2-|k|` and `-|k|`.
fn extend_ends(
    ops: &ModeOps,
    r1: f64,
    head_value: f64,
    head_slope: f64,
    rn: f64,
    tail_value: f64,
    tail_slope: f64,
) -> (PowerLogExpr, PowerLogExpr) {
    let kk = ops.k_abs() as f64;
    let k = ops.k_abs();

    let c1 = 0.5 * (head_slope * r1 - kk * head_value);
    let c2 = head_value - c1;
    let head = PowerLogExpr::monomial(c1, k + 2)
        .dilate(r1)
        .add(&PowerLogExpr::monomial(c2, k).dilate(r1));

    let c3 = 0.5 * (tail_slope * rn + kk * tail_value);
    let c4 = tail_value - c3;
    let tail = PowerLogExpr::monomial(c3, 2 - k)
        .dilate(rn)
        .add(&PowerLogExpr::monomial(c4, -k).dilate(rn));

    (head, tail)
}

fn check_lengths(knots: &KnotSet, len: usize) -> Result<(), SplineError> {
    if len != knots.len() {
        return Err(SplineError::LengthMismatch {
            expected: knots.len(),
            found: len,
        });
    }
    Ok(())
}

/// Build the unique interpolatory Beppo Levi L_k-spline through
/// `(r_j, values[j])`.
pub fn build_interpolant(
    k: i32,
    knots: &KnotSet,
    values: &[f64],
) -> Result<BeppoLeviSpline, SplineError> {
    check_lengths(knots, values.len())?;
    if knots.len() == 1 {
        return single_knot_spline(k, knots, values[0]);
    }
    let system = AssembledSystem::new(k, knots.clone())?;
    system.solve(k, values)
}

/// The `n = 1` interpolant `v * phi_k(r / r_1)`.
fn single_knot_spline(k: i32, knots: &KnotSet, v: f64) -> Result<BeppoLeviSpline, SplineError> {
    ModeOps::new(k)?;
    let r1 = knots.first();
    Ok(BeppoLeviSpline {
        k,
        values: vec![v],
        pieces: PiecewiseRadial {
            breaks: vec![r1],
            head: phi_lower_expr(k).dilate(r1).scale(v),
            interior: Vec::new(),
            tail: phi_upper_expr(k).dilate(r1).scale(v),
        },
        solve_residual: 0.0,
    })
}

/// A spline with complex data, stored as real and imaginary interpolants
/// sharing one factorization of the (real) system matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpline {
    pub re: BeppoLeviSpline,
    pub im: BeppoLeviSpline,
}

impl ComplexSpline {
    pub fn k(&self) -> i32 {
        self.re.k()
    }

    pub fn evaluate(&self, r: f64, order: u32) -> Result<Complex64, SplineError> {
        Ok(Complex64::new(
            self.re.evaluate(r, order)?,
            self.im.evaluate(r, order)?,
        ))
    }

    /// The spline interpolating the conjugated data; solves nothing new.
    pub fn conjugate(&self) -> Self {
        let mut im = self.im.clone();
        im.values.iter_mut().for_each(|v| *v = -*v);
        im.pieces.head = im.pieces.head.scale(-1.0);
        im.pieces.tail = im.pieces.tail.scale(-1.0);
        for p in &mut im.pieces.interior {
            *p = p.scale(-1.0);
        }
        Self {
            re: self.re.clone(),
            im,
        }
    }
}

/// Interpolate complex values with two real solves through one LU
/// factorization.
pub fn build_interpolant_complex(
    k: i32,
    knots: &KnotSet,
    values: &[Complex64],
) -> Result<ComplexSpline, SplineError> {
    check_lengths(knots, values.len())?;
    let re_vals: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im_vals: Vec<f64> = values.iter().map(|v| v.im).collect();
    if knots.len() == 1 {
        return Ok(ComplexSpline {
            re: single_knot_spline(k, knots, re_vals[0])?,
            im: single_knot_spline(k, knots, im_vals[0])?,
        });
    }
    let system = AssembledSystem::new(k, knots.clone())?;
    Ok(ComplexSpline {
        re: system.solve(k, &re_vals)?,
        im: system.solve(k, &im_vals)?,
    })
}

/// Result of the kernel-dilate construction for `|k| >= 2`.
#[derive(Debug, Clone)]
pub struct CollocationFit {
    /// Coefficients `a_j` of `sum_j a_j phi_k(r / r_j)`.
    pub coefficients: Vec<f64>,
    pub spline: BeppoLeviSpline,
}

/// Build the interpolant as a linear combination of dilates
/// `phi_k(r / r_j)`, solving the collocation system
/// `sum_j a_j phi_k(r_i / r_j) = v_i`.
///
/// The system is solved in its symmetrized form: with `t_j = ln r_j` and
/// `psi_k(t) = e^{-t} phi_k(e^t)`, the matrix `psi_k(t_i - t_j)` is symmetric
/// positive definite (a Cholesky factorization is required to succeed), and
/// `a_j = r_j y_j` recovers the dilate coefficients. This representation
/// exists only for `|k| >= 2`.
pub fn build_by_collocation(
    k: i32,
    knots: &KnotSet,
    values: &[f64],
) -> Result<CollocationFit, SplineError> {
    let ops = ModeOps::new(k)?;
    if ops.k_abs() < 2 {
        return Err(SplineError::CollocationUnsupported);
    }
    check_lengths(knots, values.len())?;
    let radii = knots.radii();
    let n = radii.len();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let x = radii[i] / radii[j];
            gram[(i, j)] = phi(k, x) / x;
        }
    }
    let chol = gram
        .cholesky()
        .ok_or(SplineError::GramNotPositiveDefinite)?;
    let rhs = DVector::from_iterator(n, (0..n).map(|i| values[i] / radii[i]));
    let y = chol.solve(&rhs);
    let coefficients: Vec<f64> = (0..n).map(|j| radii[j] * y[j]).collect();

    // Assemble the piecewise form: on each interval, dilates with r_j to the
    // left contribute their upper branch, the rest their lower branch.
    let lower: Vec<PowerLogExpr> = radii
        .iter()
        .map(|&rho| phi_lower_expr(k).dilate(rho))
        .collect();
    let upper: Vec<PowerLogExpr> = radii
        .iter()
        .map(|&rho| phi_upper_expr(k).dilate(rho))
        .collect();
    let combine = |split: usize| -> PowerLogExpr {
        let mut acc = PowerLogExpr::zero();
        for j in 0..n {
            let branch = if j < split { &upper[j] } else { &lower[j] };
            acc = acc.add(&branch.scale(coefficients[j]));
        }
        acc
    };
    let head = combine(0);
    let interior: Vec<PowerLogExpr> = (1..n).map(combine).collect();
    let tail = combine(n);

    let spline = BeppoLeviSpline {
        k,
        values: values.to_vec(),
        pieces: PiecewiseRadial {
            breaks: radii.to_vec(),
            head,
            interior,
            tail,
        },
        solve_residual: 0.0,
    };
    Ok(CollocationFit {
        coefficients,
        spline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn knots(r: &[f64]) -> KnotSet {
        KnotSet::new(r.to_vec()).unwrap()
    }

    #[test]
    fn phi_spot_values() {
        for k in 1..=16 {
            assert_eq!(phi(k, 1.0), 1.0, "phi_{k}(1)");
        }
        assert_eq!(phi(2, 0.5), 0.34375);
        assert_eq!(phi(2, 2.0), 1.375);
        assert_eq!(phi(5, 0.0), 0.0);
    }

    #[test]
    fn single_knot_is_scaled_phi() {
        let s = build_interpolant(2, &knots(&[1.0]), &[5.0]).unwrap();
        assert_relative_eq!(s.value(1.0), 5.0);
        assert_relative_eq!(s.value(0.5), 5.0 * 0.34375);
        assert_relative_eq!(s.value(2.0), 5.0 * 1.375);
        assert_eq!(s.value(0.0), 0.0);
        let (g, r) = s.end_condition_residuals();
        assert_eq!((g, r), (0.0, 0.0));
    }

    #[test]
    fn two_knot_defining_conditions() {
        let s = build_interpolant(2, &knots(&[1.0, 2.0]), &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.value(1.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.value(2.0), 0.0, epsilon = 1e-12);
        let (g, r) = s.end_condition_residuals();
        assert_eq!((g, r), (0.0, 0.0));
        assert!(s.solve_residual() < 1e-12);
    }

    // Worst relative jump of value/first/second derivative across any knot.
    // Pieces are exact expressions, so both sides evaluate at the knot itself.
    fn c2_defect(s: &BeppoLeviSpline) -> f64 {
        let mut worst: f64 = 0.0;
        for &r in s.knots() {
            let left_piece = if r <= s.knots()[0] {
                s.head()
            } else {
                let idx = s.knots().partition_point(|&x| x < r) - 1;
                &s.interior()[idx]
            };
            for order in 0..=2u32 {
                let right = s.pieces().eval(r, order);
                let left = left_piece.derivative(order).eval(r);
                let scale = right.abs().max(left.abs()).max(1.0);
                worst = worst.max((right - left).abs() / scale);
            }
        }
        worst
    }

    #[test]
    fn c2_continuity_across_knots() {
        let s =
            build_interpolant(3, &knots(&[0.8, 1.4, 2.0, 3.1]), &[1.0, -2.0, 0.5, 0.25]).unwrap();
        assert!(c2_defect(&s) < 1e-8, "C2 defect {}", c2_defect(&s));
    }

    #[test]
    fn head_and_tail_are_structurally_admissible() {
        let s = build_interpolant(4, &knots(&[1.0, 1.7, 2.9]), &[0.3, -1.0, 2.0]).unwrap();
        let ops = ModeOps::new(4).unwrap();
        for e in s.head().exponents() {
            assert!(ops.head_exponents().contains(&e), "head exponent {e}");
        }
        for e in s.tail().exponents() {
            assert!(ops.tail_exponents().contains(&e), "tail exponent {e}");
        }
        // every interior piece is annihilated by L_k symbolically
        for piece in s.interior() {
            assert!(ops.l(piece).coeff_l1() < 1e-9 * piece.coeff_l1().max(1.0));
        }
    }

    #[test]
    fn recovers_phi_dilate_combination() {
        // g = 2 phi_3(r) + 0 phi_3(r/1.5) - phi_3(r/2.5) is itself a spline
        // on {1, 1.5, 2.5}; uniqueness forces exact recovery.
        let ks = knots(&[1.0, 1.5, 2.5]);
        let g = |r: f64| 2.0 * phi(3, r) - phi(3, r / 2.5);
        let values: Vec<f64> = ks.radii().iter().map(|&r| g(r)).collect();
        let s = build_interpolant(3, &ks, &values).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=500 {
            let r = 5.0 * i as f64 / 500.0;
            worst = worst.max((s.value(r) - g(r)).abs());
        }
        assert!(worst < 1e-8, "sup error {worst}");
    }

    #[test]
    fn collocation_matches_piecewise_construction() {
        let ks = knots(&[1.0, 2.0]);
        let direct = build_interpolant(2, &ks, &[1.0, 0.0]).unwrap();
        let fit = build_by_collocation(2, &ks, &[1.0, 0.0]).unwrap();
        for i in 0..=400 {
            let r = 4.0 * i as f64 / 400.0;
            assert_abs_diff_eq!(direct.value(r), fit.spline.value(r), epsilon = 1e-9);
        }
    }

    #[test]
    fn collocation_edge_cases() {
        // n = 1: a_1 = v_1 because phi_k(1) = 1
        let fit = build_by_collocation(3, &knots(&[2.0]), &[4.0]).unwrap();
        assert_relative_eq!(fit.coefficients[0], 4.0, max_relative = 1e-12);
        // zero data -> zero coefficients
        let fit = build_by_collocation(2, &knots(&[1.0, 2.0, 3.0]), &[0.0, 0.0, 0.0]).unwrap();
        assert!(fit.coefficients.iter().all(|&a| a.abs() < 1e-14));
        // |k| = 1 refused
        assert_eq!(
            build_by_collocation(1, &knots(&[1.0]), &[1.0]).unwrap_err(),
            SplineError::CollocationUnsupported
        );
    }

    // Uniqueness: data sampled from a member of the spline space must
    // reproduce that member everywhere.
    #[test]
    fn random_recovery_from_spline_space_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let k = rng.gen_range(2..=8) * if rng.gen_bool(0.5) { 1 } else { -1 };
            let n = rng.gen_range(2..=10);
            let mut radii = Vec::with_capacity(n);
            let mut r = rng.gen_range(0.3..1.2);
            for _ in 0..n {
                radii.push(r);
                r += rng.gen_range(0.15..0.8);
            }
            let ks = knots(&radii);
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let member = |r: f64| -> f64 {
                coeffs
                    .iter()
                    .zip(ks.radii())
                    .map(|(a, &rho)| a * phi(k, r / rho))
                    .sum()
            };
            let values: Vec<f64> = ks.radii().iter().map(|&r| member(r)).collect();
            let s = build_interpolant(k, &ks, &values).unwrap();
            assert!(
                s.solve_residual() < 1e-10,
                "residual {}",
                s.solve_residual()
            );
            let hi = 2.0 * ks.last();
            let mut sup = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..=300 {
                let r = hi * i as f64 / 300.0;
                sup = sup.max((s.value(r) - member(r)).abs());
                scale = scale.max(member(r).abs());
            }
            assert!(
                sup <= 1e-8 * scale.max(1.0),
                "trial {trial}: k={k} n={n} sup={sup} scale={scale}"
            );
        }
    }

    #[test]
    fn many_knot_system_solves_cleanly() {
        let radii: Vec<f64> = (0..40).map(|i| 0.8 + 0.11 * i as f64).collect();
        let values: Vec<f64> = (0..40).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let ks = knots(&radii);
        let s = build_interpolant(5, &ks, &values).unwrap();
        assert!(s.solve_residual() < 1e-12);
        for (&r, &v) in ks.radii().iter().zip(&values) {
            assert_abs_diff_eq!(s.value(r), v, epsilon = 1e-9);
        }
        assert!(c2_defect(&s) < 1e-8);
    }

    #[test]
    fn high_frequency_wide_span_recovery() {
        // |k| = 12 across a decade of radii stresses the anchored basis
        let ks = knots(&[0.5, 0.9, 1.6, 2.9, 5.2, 9.4]);
        let coeffs = [0.8, -1.2, 0.3, 1.0, -0.6, 0.45];
        let member = |r: f64| -> f64 {
            coeffs
                .iter()
                .zip(ks.radii())
                .map(|(a, &rho)| a * phi(12, r / rho))
                .sum()
        };
        let values: Vec<f64> = ks.radii().iter().map(|&r| member(r)).collect();
        let s = build_interpolant(12, &ks, &values).unwrap();
        assert!(s.solve_residual() < 1e-10);
        let mut sup = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..=400 {
            let r = 18.8 * i as f64 / 400.0;
            sup = sup.max((s.value(r) - member(r)).abs());
            scale = scale.max(member(r).abs());
        }
        assert!(sup <= 1e-8 * scale.max(1.0), "sup {sup} scale {scale}");
    }

    #[test]
    fn linearity_pointwise() {
        let ks = knots(&[1.0, 1.6, 2.2, 3.0]);
        let v1 = [0.4, -1.0, 0.9, 2.0];
        let v2 = [1.0, 0.3, -0.7, 0.1];
        let (alpha, beta) = (1.7, -0.6);
        let combo: Vec<f64> = v1
            .iter()
            .zip(&v2)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let s1 = build_interpolant(5, &ks, &v1).unwrap();
        let s2 = build_interpolant(5, &ks, &v2).unwrap();
        let sc = build_interpolant(5, &ks, &combo).unwrap();
        for i in 0..=200 {
            let r = 6.0 * i as f64 / 200.0;
            let expect = alpha * s1.value(r) + beta * s2.value(r);
            assert_abs_diff_eq!(sc.value(r), expect, epsilon = 1e-10 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn dilation_covariance() {
        let ks = knots(&[0.9, 1.5, 2.4]);
        let values = [1.0, -0.5, 0.8];
        let s = build_interpolant(3, &ks, &values).unwrap();
        for lambda in [0.5, 2.0, 3.7] {
            let scaled: Vec<f64> = ks.radii().iter().map(|r| r * lambda).collect();
            let s_scaled = build_interpolant(3, &knots(&scaled), &values).unwrap();
            for i in 1..=150 {
                let r = 5.0 * lambda * i as f64 / 150.0;
                let a = s_scaled.value(r);
                let b = s.value(r / lambda);
                assert_abs_diff_eq!(a, b, epsilon = 1e-9 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn conjugate_frequency_gives_identical_spline() {
        let ks = knots(&[1.0, 2.0, 2.8]);
        let values = [0.2, 1.4, -0.9];
        let plus = build_interpolant(6, &ks, &values).unwrap();
        let minus = build_interpolant(-6, &ks, &values).unwrap();
        assert_eq!(plus.pieces(), minus.pieces());
    }

    #[test]
    fn complex_build_shares_structure() {
        let ks = knots(&[1.0, 1.8, 2.6]);
        let values = [
            Complex64::new(1.0, -0.5),
            Complex64::new(0.0, 2.0),
            Complex64::new(-1.0, 0.25),
        ];
        let cs = build_interpolant_complex(2, &ks, &values).unwrap();
        let re = build_interpolant(2, &ks, &[1.0, 0.0, -1.0]).unwrap();
        let im = build_interpolant(2, &ks, &[-0.5, 2.0, 0.25]).unwrap();
        assert_eq!(cs.re.pieces(), re.pieces());
        assert_eq!(cs.im.pieces(), im.pieces());
        let conj = cs.conjugate();
        for i in 0..=50 {
            let r = 4.0 * i as f64 / 50.0;
            let v = cs.evaluate(r, 0).unwrap();
            let w = conj.evaluate(r, 0).unwrap();
            assert_eq!(v.conj(), w);
        }
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            build_interpolant(0, &knots(&[1.0]), &[1.0]).unwrap_err(),
            SplineError::Operator(_)
        ));
        assert!(matches!(
            build_interpolant(2, &knots(&[1.0, 2.0]), &[1.0]).unwrap_err(),
            SplineError::LengthMismatch { .. }
        ));
        let s = build_interpolant(2, &knots(&[1.0]), &[1.0]).unwrap();
        assert!(matches!(
            s.evaluate(1.0, 3).unwrap_err(),
            SplineError::DerivativeOrder { order: 3 }
        ));
        assert!(matches!(
            s.evaluate(-1.0, 0).unwrap_err(),
            SplineError::NegativeRadius { .. }
        ));
    }

    #[test]
    fn corrupted_tail_has_nonzero_end_residual() {
        let s = build_interpolant(3, &knots(&[1.0, 2.0]), &[1.0, 1.0]).unwrap();
        let (_, tail_residual) = s.end_condition_residuals();
        assert_eq!(tail_residual, 0.0);
        // r^{|k|} is admissible near 0, not near infinity
        let bad = s.with_tail_piece(PowerLogExpr::monomial(1.0, 3));
        let (_, corrupt_residual) = bad.end_condition_residuals();
        assert!(corrupt_residual > 1.0);
    }
}
