//! Energy seminorms, variational checks, and the convergence-order harness.
//!
//! The per-frequency energy of a radial profile `f` is
//!
//! ```text
//! |f|_k^2 = integral over (0, inf) of
//!     { |f''|^2 + 2 k^2 |f/r^2 - f'/r|^2 + |k^2 f/r^2 - f'/r|^2 } r dr,
//! ```
//!
//! a norm for `|k| >= 2` and a seminorm with kernel `span{r}` for `|k| = 1`.
//! For piecewise power-log functions the integral is evaluated in closed form
//! per segment, improper head and tail included; sampled functions go through
//! Gauss-Legendre quadrature. The interpolating spline is the unique energy
//! minimizer among functions matching its knot values; the checks in this
//! module measure that statement numerically: the orthogonality defect, the
//! Pythagoras defect, and mesh-refinement error bounds with rates `h^{3/2-m}`
//! (sup norm) and `h^{2-m}` (L2).

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knots::KnotSet;
use crate::operators::ModeOps;
use crate::piecewise::PiecewiseRadial;
use crate::powerlog::{PowerLogError, PowerLogExpr};
use crate::quadrature::GaussLegendre;
use crate::spline::{build_interpolant, BeppoLeviSpline, SplineError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("energy integral diverges; the function is outside the admissible class: {0}")]
    Divergent(#[from] PowerLogError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("the log-coordinate kernel requires |k| >= 2, got {k}")]
    KernelFrequency { k: i32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// A pointwise-evaluable radial function with two derivatives.
pub trait RadialFn {
    /// Value of the `order`-th derivative at `r` (order 0, 1 or 2).
    fn eval(&self, r: f64, order: u32) -> f64;
}

impl RadialFn for BeppoLeviSpline {
    fn eval(&self, r: f64, order: u32) -> f64 {
        self.pieces().eval(r, order)
    }
}

impl RadialFn for PiecewiseRadial {
    fn eval(&self, r: f64, order: u32) -> f64 {
        PiecewiseRadial::eval(self, r, order)
    }
}

impl RadialFn for crate::piecewise::PiecewiseDerivs {
    fn eval(&self, r: f64, order: u32) -> f64 {
        crate::piecewise::PiecewiseDerivs::eval(self, r, order)
    }
}

/// Adapter for closures `(r, order) -> f64`.
pub struct RadialClosure<F: Fn(f64, u32) -> f64>(pub F);

impl<F: Fn(f64, u32) -> f64> RadialFn for RadialClosure<F> {
    fn eval(&self, r: f64, order: u32) -> f64 {
        (self.0)(r, order)
    }
}

/// The identically zero profile.
pub struct ZeroFn;

impl RadialFn for ZeroFn {
    fn eval(&self, _r: f64, _order: u32) -> f64 {
        0.0
    }
}

/// `p(r) e^{-r}` for a polynomial `p`; derivatives follow the recurrence
/// `q_{m+1} = q_m' - q_m` exactly, which keeps the convergence-harness data
/// functions free of hand-derived formulas.
#[derive(Debug, Clone)]
pub struct PolyExpDecay {
    coeffs: Vec<f64>,
}

impl PolyExpDecay {
    /// `coeffs[i]` multiplies `r^i`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

impl RadialFn for PolyExpDecay {
    fn eval(&self, r: f64, order: u32) -> f64 {
        let mut q = self.coeffs.clone();
        for _ in 0..order {
            // q' - q
            let mut next = vec![0.0; q.len()];
            for (i, &c) in q.iter().enumerate() {
                next[i] -= c;
                if i > 0 {
                    next[i - 1] += i as f64 * c;
                }
            }
            q = next;
        }
        let p = q.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        p * (-r).exp()
    }
}

/// Built-in data functions for the convergence study.
pub fn builtin_datum(id: &str) -> Option<Box<dyn RadialFn + Sync + Send>> {
    match id {
        "r2-exp" => Some(Box::new(PolyExpDecay::new(vec![0.0, 0.0, 1.0]))),
        "r3-exp" => Some(Box::new(PolyExpDecay::new(vec![0.0, 0.0, 0.0, 1.0]))),
        "zero" => Some(Box::new(ZeroFn)),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Energy

/// Value of the energy functional for one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    /// The integral itself, i.e. the squared (semi)norm.
    pub squared: f64,
    pub k: i32,
    /// True for `|k| = 1`, where multiples of `r` carry zero energy.
    pub is_seminorm: bool,
}

impl EnergyValue {
    pub fn norm(&self) -> f64 {
        self.squared.sqrt()
    }
}

/// The three linear functionals whose squares make up the energy integrand:
/// `f''`, `f/r^2 - f'/r`, `k^2 f/r^2 - f'/r`.
fn energy_functionals(k_abs: i64, f: &PowerLogExpr) -> [PowerLogExpr; 3] {
    let d1 = f.differentiate();
    let d2 = d1.differentiate();
    let f_over_r2 = f.mul_power(Ratio::from_integer(-2));
    let d1_over_r = d1.mul_power(Ratio::from_integer(-1));
    let b = f_over_r2.sub(&d1_over_r);
    let c = f_over_r2.scale((k_abs * k_abs) as f64).sub(&d1_over_r);
    [d2, b, c]
}

/// `r * (|A|^2 + 2 k^2 |B|^2 + |C|^2)` as an exact expression.
fn energy_integrand(k_abs: i64, f: &PowerLogExpr) -> PowerLogExpr {
    let [a, b, c] = energy_functionals(k_abs, f);
    let k2 = (k_abs * k_abs) as f64;
    a.mul(&a)
        .add(&b.mul(&b).scale(2.0 * k2))
        .add(&c.mul(&c))
        .mul_power(Ratio::from_integer(1))
}

/// Closed-form energy of a piecewise power-log profile over all of
/// `(0, infinity)`, improper segments included.
pub fn energy(k: i32, f: &PiecewiseRadial) -> Result<EnergyValue, AnalysisError> {
    energy_on(k, f, 0.0, f64::INFINITY)
}

/// Closed-form energy restricted to `(a, b)`.
///
/// Each segment is integrated in local coordinates: with `q(s) = p(rho s)`,
/// every energy functional of `q` is `rho^2` times the functional of `p`, so
/// the segment energy is `rho^-2` times the local one. Squaring the dilated
/// piece rather than the global one keeps the integrand's coefficients on one
/// scale; otherwise canonical-form merging of the squared expression loses
/// the small-coefficient high-exponent terms that dominate far from `r = 1`.
pub fn energy_on(
    k: i32,
    f: &PiecewiseRadial,
    a: f64,
    b: f64,
) -> Result<EnergyValue, AnalysisError> {
    let ops = ModeOps::new(k).map_err(SplineError::from)?;
    let mut total = 0.0;
    for (lo, hi, piece) in f.segments() {
        let lo = lo.max(a);
        let hi = hi.min(b);
        if lo >= hi {
            continue;
        }
        let rho = if lo > 0.0 { lo } else { hi };
        let local = piece.dilate(1.0 / rho);
        let upper = if hi.is_infinite() { hi } else { hi / rho };
        let seg = energy_integrand(ops.k_abs(), &local).integrate(lo / rho, upper)?;
        total += seg / (rho * rho);
    }
    Ok(EnergyValue {
        squared: total,
        k,
        is_seminorm: ops.k_abs() == 1,
    })
}

pub fn energy_of_spline(s: &BeppoLeviSpline) -> Result<EnergyValue, AnalysisError> {
    energy(s.k(), s.pieces())
}

/// Pointwise energy integrand of a sampled function.
fn sampled_integrand(k_abs: i64, f: &dyn RadialFn, r: f64) -> f64 {
    let v = f.eval(r, 0);
    let d1 = f.eval(r, 1);
    let d2 = f.eval(r, 2);
    let k2 = (k_abs * k_abs) as f64;
    let b = v / (r * r) - d1 / r;
    let c = k2 * v / (r * r) - d1 / r;
    (d2 * d2 + 2.0 * k2 * b * b + c * c) * r
}

/// Energy of a sampled function by composite Gauss-Legendre quadrature over
/// the given breakpoints (which should cover the support or decay range).
///
/// A finite quadrature value is necessary but not sufficient for membership
/// in the admissible class; behaviour between nodes and beyond the window is
/// the caller's responsibility.
pub fn energy_sampled(
    k: i32,
    f: &dyn RadialFn,
    breaks: &[f64],
    rule: &GaussLegendre,
    panels_per_segment: usize,
) -> Result<EnergyValue, AnalysisError> {
    let ops = ModeOps::new(k).map_err(SplineError::from)?;
    let squared = rule.integrate_segments(breaks, panels_per_segment, |r| {
        sampled_integrand(ops.k_abs(), f, r)
    });
    if !squared.is_finite() {
        return Err(AnalysisError::Precondition(
            "energy quadrature did not return a finite value".into(),
        ));
    }
    Ok(EnergyValue {
        squared,
        k,
        is_seminorm: ops.k_abs() == 1,
    })
}

/// Breakpoints `0, 1, 2, ..., ceil(hi)` for quadrature of decaying data.
pub fn unit_breaks(hi: f64) -> Vec<f64> {
    let n = hi.ceil() as usize;
    (0..=n).map(|i| i as f64).collect()
}

// ---------------------------------------------------------------------------
// Orthogonality and optimality

/// `R_k psi` evaluated pointwise from two derivatives:
/// `[psi'' + (2|k|-1) psi'/r + |k|(|k|-2) psi/r^2] / r`.
pub fn apply_r_pointwise(k_abs: i64, f: &dyn RadialFn, r: f64) -> f64 {
    let kk = k_abs as f64;
    (f.eval(r, 2) + (2.0 * kk - 1.0) * f.eval(r, 1) / r + kk * (kk - 2.0) * f.eval(r, 0) / (r * r))
        / r
}

/// `G_k psi` evaluated pointwise from two derivatives:
/// `[psi'' - (2|k|+1) psi'/r + |k|(|k|+2) psi/r^2] / r`.
pub fn apply_g_pointwise(k_abs: i64, f: &dyn RadialFn, r: f64) -> f64 {
    let kk = k_abs as f64;
    (f.eval(r, 2) - (2.0 * kk + 1.0) * f.eval(r, 1) / r + kk * (kk + 2.0) * f.eval(r, 0) / (r * r))
        / r
}

#[derive(Debug, Clone, Copy)]
pub struct OrthogonalityReport {
    /// The integral of `r^3 (R_k eta)(R_k psi)` over `(0, r_n)`.
    pub raw: f64,
    /// `|raw|` relative to the product of the factors' weighted L2 norms.
    pub normalized: f64,
    pub eta_scale: f64,
    pub psi_scale: f64,
}

fn sup_on_grid(f: &dyn RadialFn, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n)
        .map(|i| f.eval(lo + (hi - lo) * i as f64 / n as f64, 0).abs())
        .fold(0.0, f64::max)
}

fn require_vanishing_at_knots(
    psi: &dyn RadialFn,
    knots: &[f64],
    support: (f64, f64),
) -> Result<(), AnalysisError> {
    let scale = sup_on_grid(psi, support.0, support.1, 64).max(1.0);
    for &r in knots {
        let v = psi.eval(r, 0).abs();
        if v > 1e-10 * scale {
            return Err(AnalysisError::Precondition(format!(
                "test function does not vanish at knot r = {r} (value {v:.3e})"
            )));
        }
    }
    Ok(())
}

/// The orthogonality defect between a spline `eta` and a test function `psi`
/// vanishing on the knot set: in exact arithmetic the integral is zero, so
/// the normalized defect measures quadrature and solve error only.
pub fn orthogonality_defect(
    eta: &BeppoLeviSpline,
    psi: &dyn RadialFn,
    support: (f64, f64),
    rule: &GaussLegendre,
    panels: usize,
) -> Result<OrthogonalityReport, AnalysisError> {
    require_vanishing_at_knots(psi, eta.knots(), support)?;
    orthogonality_defect_unchecked(eta, psi, support, rule, panels)
}

/// Same as [`orthogonality_defect`] without the vanishing precondition;
/// used for negative controls, where the defect should be large.
pub fn orthogonality_defect_unchecked(
    eta: &BeppoLeviSpline,
    psi: &dyn RadialFn,
    support: (f64, f64),
    rule: &GaussLegendre,
    panels: usize,
) -> Result<OrthogonalityReport, AnalysisError> {
    let ops = ModeOps::new(eta.k()).map_err(SplineError::from)?;
    let r_n = *eta.knots().last().unwrap();
    // R_k eta vanishes identically beyond r_n, so the integral stops there.
    let lo = support.0.max(0.0);
    let hi = support.1.min(r_n);

    let r_eta_pw = eta.pieces().map_pieces(|e| ops.r(e));
    let r_eta = |r: f64| -> f64 { r_eta_pw.piece_at(r).eval(r) };

    let mut breaks = vec![lo];
    for &r in eta.knots() {
        if r > lo && r < hi {
            breaks.push(r);
        }
    }
    breaks.push(hi);

    let raw = rule.integrate_segments(&breaks, panels, |r| {
        r.powi(3) * r_eta(r) * apply_r_pointwise(ops.k_abs(), psi, r)
    });

    // scales: closed form for the spline factor (in local coordinates, as in
    // the energy), quadrature for psi
    let mut eta_sq = 0.0;
    for (a, b, piece) in eta.pieces().segments() {
        let b = b.min(r_n);
        if a >= b {
            continue;
        }
        let rho = if a > 0.0 { a } else { b };
        let local_r = ops.r(&piece.dilate(1.0 / rho));
        let seg = local_r
            .mul(&local_r)
            .mul_power(Ratio::from_integer(3))
            .integrate(a / rho, b / rho)?;
        eta_sq += seg / (rho * rho);
    }
    let psi_sq = rule.integrate_segments(&breaks, panels, |r| {
        let v = apply_r_pointwise(ops.k_abs(), psi, r);
        r.powi(3) * v * v
    });

    let eta_scale = eta_sq.max(0.0).sqrt();
    let psi_scale = psi_sq.max(0.0).sqrt();
    let denom = eta_scale * psi_scale;
    let normalized = if denom > 0.0 { raw.abs() / denom } else { 0.0 };
    Ok(OrthogonalityReport {
        raw,
        normalized,
        eta_scale,
        psi_scale,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PythagorasReport {
    /// `|g|_k^2` for the competitor `g = sigma + addend`.
    pub competitor_sq: f64,
    /// `|sigma|_k^2`.
    pub spline_sq: f64,
    /// `|g - sigma|_k^2`.
    pub difference_sq: f64,
    /// `| |g|^2 - |sigma|^2 - |g-sigma|^2 |` relative to `|g|^2`.
    pub defect: f64,
}

impl PythagorasReport {
    /// The optimality statement: the spline energy never exceeds the
    /// competitor energy.
    pub fn spline_is_minimal(&self) -> bool {
        self.spline_sq <= self.competitor_sq * (1.0 + 1e-12)
    }
}

/// Check the energy Pythagoras identity
/// `|g|^2 = |sigma|^2 + |g - sigma|^2` for a competitor `g` matching the
/// spline's knot values. The competitor is given as `sigma + addend` with a
/// compactly supported addend vanishing at the knots.
pub fn pythagoras_check(
    sigma: &BeppoLeviSpline,
    addend: &dyn RadialFn,
    support: (f64, f64),
    rule: &GaussLegendre,
    panels: usize,
) -> Result<PythagorasReport, AnalysisError> {
    require_vanishing_at_knots(addend, sigma.knots(), support)?;
    let ops = ModeOps::new(sigma.k()).map_err(SplineError::from)?;
    let k_abs = ops.k_abs();
    let (lo, hi) = support;
    if lo <= 0.0 {
        return Err(AnalysisError::Precondition(
            "competitor addend must be supported away from r = 0".into(),
        ));
    }

    let spline_sq = energy(sigma.k(), sigma.pieces())?.squared;

    // |g - sigma|^2 = |addend|^2 by quadrature on the support
    let breaks = {
        let mut b = vec![lo];
        for &r in sigma.knots() {
            if r > lo && r < hi {
                b.push(r);
            }
        }
        b.push(hi);
        b
    };
    let difference_sq =
        rule.integrate_segments(&breaks, panels, |r| sampled_integrand(k_abs, addend, r));

    // |g|^2: exact outside the support, quadrature across it
    let sigma_derivs = sigma.pieces().with_derivatives();
    let g_fn =
        RadialClosure(|r: f64, order: u32| sigma_derivs.eval(r, order) + addend.eval(r, order));
    let outside = energy_on(sigma.k(), sigma.pieces(), 0.0, lo)?.squared
        + energy_on(sigma.k(), sigma.pieces(), hi, f64::INFINITY)?.squared;
    let across = rule.integrate_segments(&breaks, panels, |r| sampled_integrand(k_abs, &g_fn, r));
    let competitor_sq = outside + across;

    let defect = (competitor_sq - spline_sq - difference_sq).abs() / competitor_sq.max(1e-300);
    Ok(PythagorasReport {
        competitor_sq,
        spline_sq,
        difference_sq,
        defect,
    })
}

// ---------------------------------------------------------------------------
// The log-coordinate kernel

/// `psi_k(t) = e^{-t} phi_k(e^t)`, the positive definite kernel underlying
/// the dilate representation; defined for `|k| >= 2`.
pub fn psi_kernel(k: i32, t: f64) -> Result<f64, AnalysisError> {
    let kk = (k as f64).abs();
    if kk < 2.0 {
        return Err(AnalysisError::KernelFrequency { k });
    }
    let a = t.abs();
    Ok(0.5 * (-kk * a).exp() * ((1.0 - kk) * (-a).exp() + (1.0 + kk) * a.exp()))
}

/// Fourier transform of `psi_k`:
/// `4|k|(k^2-1) / ([(|k|-1)^2 + tau^2][(|k|+1)^2 + tau^2])`, positive for all
/// real `tau`, which is the positive definiteness witness.
pub fn psi_kernel_ft(k: i32, tau: f64) -> Result<f64, AnalysisError> {
    let kk = (k as f64).abs();
    if kk < 2.0 {
        return Err(AnalysisError::KernelFrequency { k });
    }
    let num = 4.0 * kk * (kk * kk - 1.0);
    let den = ((kk - 1.0) * (kk - 1.0) + tau * tau) * ((kk + 1.0) * (kk + 1.0) + tau * tau);
    Ok(num / den)
}

// ---------------------------------------------------------------------------
// Convergence study

/// Per-level record of the mesh refinement study. Serialized field names are
/// part of the report file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub k: i32,
    pub n: usize,
    pub h: f64,
    #[serde(rename = "errLinf0")]
    pub err_linf_0: f64,
    #[serde(rename = "errLinf1")]
    pub err_linf_1: f64,
    #[serde(rename = "errL2_0")]
    pub err_l2_0: f64,
    #[serde(rename = "errL2_1")]
    pub err_l2_1: f64,
    #[serde(rename = "boundLinf0")]
    pub bound_linf_0: f64,
    #[serde(rename = "boundLinf1")]
    pub bound_linf_1: f64,
    #[serde(rename = "boundL2_0")]
    pub bound_l2_0: f64,
    #[serde(rename = "boundL2_1")]
    pub bound_l2_1: f64,
    /// `|g|_k`, the data-function energy norm entering every bound.
    pub energy: f64,
}

impl ErrorReport {
    pub fn bounds_satisfied(&self) -> bool {
        self.err_linf_0 <= self.bound_linf_0
            && self.err_linf_1 <= self.bound_linf_1
            && self.err_l2_0 <= self.bound_l2_0
            && self.err_l2_1 <= self.bound_l2_1
    }
}

#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub quad_order: usize,
    pub panels_per_segment: usize,
    pub dense_grid: usize,
    /// Breakpoints for the energy quadrature of the data function.
    pub energy_breaks: Vec<f64>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            quad_order: 32,
            panels_per_segment: 4,
            dense_grid: 1500,
            energy_breaks: unit_breaks(60.0),
        }
    }
}

/// Interpolate `g` on each knot set and measure sup and L2 errors of the
/// value and first derivative on `[r_1, r_n]`, together with the bound
/// right-hand sides `h^{3/2-m} / (2^{1-m} sqrt(r_1)) * |g|_k` (sup norm) and
/// `h^{2-m} / (2^{1-m} sqrt(r_1)) * |g|_k` (L2 norm).
pub fn error_study(
    k: i32,
    g: &dyn RadialFn,
    family: &[KnotSet],
    opts: &StudyOptions,
) -> Result<Vec<ErrorReport>, AnalysisError> {
    let rule = GaussLegendre::new(opts.quad_order);
    let g_energy = energy_sampled(k, g, &opts.energy_breaks, &rule, opts.panels_per_segment)?;
    let g_norm = g_energy.norm();

    let mut out = Vec::with_capacity(family.len());
    for knots in family {
        let values: Vec<f64> = knots.radii().iter().map(|&r| g.eval(r, 0)).collect();
        let sigma = build_interpolant(k, knots, &values)?;
        let sigma_derivs = sigma.pieces().with_derivatives();
        let (r1, rn) = (knots.first(), knots.last());
        let h = knots.mesh_size();

        let mut linf = [0.0f64; 2];
        for i in 0..=opts.dense_grid {
            let r = r1 + (rn - r1) * i as f64 / opts.dense_grid as f64;
            for m in 0..2u32 {
                let d = (g.eval(r, m) - sigma_derivs.eval(r, m)).abs();
                linf[m as usize] = linf[m as usize].max(d);
            }
        }
        let mut l2 = [0.0f64; 2];
        for m in 0..2u32 {
            let sq = rule.integrate_segments(knots.radii(), opts.panels_per_segment, |r| {
                let d = g.eval(r, m) - sigma_derivs.eval(r, m);
                d * d
            });
            l2[m as usize] = sq.max(0.0).sqrt();
        }

        let prefactor = |m: i32| 1.0 / (2.0f64.powi(1 - m) * r1.sqrt());
        out.push(ErrorReport {
            k,
            n: knots.len(),
            h,
            err_linf_0: linf[0],
            err_linf_1: linf[1],
            err_l2_0: l2[0],
            err_l2_1: l2[1],
            bound_linf_0: prefactor(0) * h.powf(1.5) * g_norm,
            bound_linf_1: prefactor(1) * h.powf(0.5) * g_norm,
            bound_l2_0: prefactor(0) * h.powi(2) * g_norm,
            bound_l2_1: prefactor(1) * h.powi(1) * g_norm,
            energy: g_norm,
        });
    }
    Ok(out)
}

/// Least-squares slope of `log error` against `log h`, discarding the
/// coarsest level (pre-asymptotic). Returns `None` when fewer than two
/// usable levels remain or any error vanishes.
pub fn fitted_order(
    reports: &[ErrorReport],
    error_of: impl Fn(&ErrorReport) -> f64,
) -> Option<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .skip(1)
        .filter_map(|r| {
            let e = error_of(r);
            (e > 0.0 && r.h > 0.0).then(|| (r.h.ln(), e.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

// ---------------------------------------------------------------------------
// Smooth test functions

/// A `C^infinity` bump `exp(-1/(1-u^2))` rescaled to `(lo, hi)`, identically
/// zero outside.
#[derive(Debug, Clone, Copy)]
pub struct SmoothBump {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothBump {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "bump support must be nonempty");
        Self { lo, hi }
    }
}

impl RadialFn for SmoothBump {
    fn eval(&self, r: f64, order: u32) -> f64 {
        let s = 2.0 / (self.hi - self.lo);
        let u = s * r - (self.hi + self.lo) / (self.hi - self.lo);
        let w = 1.0 - u * u;
        if w <= 1e-8 {
            return 0.0;
        }
        let e = (-1.0 / w).exp();
        match order {
            0 => e,
            1 => {
                let g = -2.0 * u / (w * w);
                s * e * g
            }
            2 => {
                let g = -2.0 * u / (w * w);
                let gp = (-2.0 - 6.0 * u * u) / (w * w * w);
                s * s * e * (g * g + gp)
            }
            _ => panic!("bump derivatives implemented up to order 2"),
        }
    }
}

/// `amplitude * prod_j (r - root_j) * bump(r)`: smooth, compactly supported,
/// and vanishing at every root; the stock test function for the
/// orthogonality and optimality checks.
#[derive(Debug, Clone)]
pub struct VanishingTestFn {
    poly: Vec<f64>,
    pub bump: SmoothBump,
    pub amplitude: f64,
}

impl VanishingTestFn {
    pub fn new(roots: &[f64], bump: SmoothBump, amplitude: f64) -> Self {
        let mut poly = vec![1.0];
        for &root in roots {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * root;
            }
            poly = next;
        }
        Self {
            poly,
            bump,
            amplitude,
        }
    }

    fn poly_eval(&self, r: f64, order: u32) -> f64 {
        let mut q = self.poly.clone();
        for _ in 0..order {
            q = q
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect();
        }
        q.iter().rev().fold(0.0, |acc, &c| acc * r + c)
    }
}

impl RadialFn for VanishingTestFn {
    fn eval(&self, r: f64, order: u32) -> f64 {
        let a = self.amplitude;
        match order {
            0 => a * self.poly_eval(r, 0) * self.bump.eval(r, 0),
            1 => {
                a * (self.poly_eval(r, 1) * self.bump.eval(r, 0)
                    + self.poly_eval(r, 0) * self.bump.eval(r, 1))
            }
            2 => {
                a * (self.poly_eval(r, 2) * self.bump.eval(r, 0)
                    + 2.0 * self.poly_eval(r, 1) * self.bump.eval(r, 1)
                    + self.poly_eval(r, 0) * self.bump.eval(r, 2))
            }
            _ => panic!("test function derivatives implemented up to order 2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::{phi_lower_expr, phi_upper_expr};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn phi2_piecewise() -> PiecewiseRadial {
        PiecewiseRadial {
            breaks: vec![1.0],
            head: phi_lower_expr(2),
            interior: vec![],
            tail: phi_upper_expr(2),
        }
    }

    #[test]
    fn seminorm_kernel_for_k1() {
        // c * r has exactly zero energy at |k| = 1
        let f = PiecewiseRadial {
            breaks: vec![1.0],
            head: PowerLogExpr::monomial(3.5, 1),
            interior: vec![],
            tail: PowerLogExpr::monomial(3.5, 1),
        };
        let e = energy(1, &f).unwrap();
        assert_eq!(e.squared, 0.0);
        assert!(e.is_seminorm);
    }

    #[test]
    fn divergent_profile_is_rejected() {
        let f = PiecewiseRadial {
            breaks: vec![1.0],
            head: PowerLogExpr::monomial(1.0, -2),
            interior: vec![],
            tail: PowerLogExpr::monomial(1.0, -2),
        };
        assert!(matches!(energy(2, &f), Err(AnalysisError::Divergent(_))));
    }

    #[test]
    fn phi2_energy_closed_form_is_24() {
        // Hand integration oracle: the head contributes 9, the tail 15.
        let e = energy(2, &phi2_piecewise()).unwrap();
        assert_relative_eq!(e.squared, 24.0, max_relative = 1e-13);
        assert!(!e.is_seminorm);
    }

    #[test]
    fn phi2_energy_quadrature_agrees() {
        // quadrature over a finite window plus the exact improper tail
        let pw = phi2_piecewise();
        let rule = GaussLegendre::new(64);
        let mid = energy_sampled(2, &pw, &[0.0, 0.5, 1.0, 4.0, 16.0, 64.0], &rule, 8)
            .unwrap()
            .squared;
        let tail = energy_on(2, &pw, 64.0, f64::INFINITY).unwrap().squared;
        assert_relative_eq!(mid + tail, 24.0, max_relative = 1e-8);
    }

    #[test]
    fn plancherel_identity_for_r_weighted_r_op() {
        // A second closed-form route: |phi_2|^2 = integral of r^3 (R_2 phi_2)^2.
        let ops = ModeOps::new(2).unwrap();
        let r_head = ops.r(&phi_lower_expr(2));
        let sq = r_head
            .mul(&r_head)
            .mul_power(Ratio::from_integer(3))
            .integrate(0.0, 1.0)
            .unwrap();
        // the tail is annihilated by R_2
        assert!(ops.r(&phi_upper_expr(2)).is_zero());
        assert_relative_eq!(sq, 24.0, max_relative = 1e-13);
    }

    #[test]
    fn orthogonality_zero_for_zero_test_fn() {
        let ks = KnotSet::new(vec![1.0, 2.0]).unwrap();
        let eta = build_interpolant(2, &ks, &[1.0, -1.0]).unwrap();
        let rule = GaussLegendre::new(32);
        let rep = orthogonality_defect(&eta, &ZeroFn, (0.5, 2.5), &rule, 4).unwrap();
        assert_eq!(rep.raw, 0.0);
        assert_eq!(rep.normalized, 0.0);
    }

    // For a spline eta and ANY smooth compactly supported psi (vanishing at
    // the knots or not), the weighted product of R_k images equals the energy
    // bilinear form; the knot-vanishing hypothesis is only what forces the
    // common value to zero.
    #[test]
    fn r_weighted_integral_matches_energy_bilinear_form() {
        let ks = KnotSet::new(vec![1.0, 1.7, 2.6]).unwrap();
        let eta = build_interpolant(4, &ks, &[1.0, -0.4, 0.9]).unwrap();
        let psi = VanishingTestFn::new(&[], SmoothBump::new(0.6, 3.1), 1.0); // no roots
        let rule = GaussLegendre::new(40);
        let lhs = orthogonality_defect_unchecked(&eta, &psi, (0.6, 3.1), &rule, 16)
            .unwrap()
            .raw;

        // <eta, psi>_k by quadrature over the support of psi
        let k2 = 16.0;
        let derivs = eta.pieces().with_derivatives();
        let breaks = [0.6, 1.0, 1.7, 2.6, 3.1];
        let rhs = rule.integrate_segments(&breaks, 16, |r| {
            let (e0, e1, e2) = (derivs.eval(r, 0), derivs.eval(r, 1), derivs.eval(r, 2));
            let (p0, p1, p2) = (psi.eval(r, 0), psi.eval(r, 1), psi.eval(r, 2));
            let b_e = e0 / (r * r) - e1 / r;
            let b_p = p0 / (r * r) - p1 / r;
            let c_e = k2 * e0 / (r * r) - e1 / r;
            let c_p = k2 * p0 / (r * r) - p1 / r;
            (e2 * p2 + 2.0 * k2 * b_e * b_p + c_e * c_p) * r
        });
        assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
        // and it is decisively nonzero here, since psi misses the knots
        assert!(lhs.abs() > 1e-3);
    }

    #[test]
    fn orthogonality_defect_small_on_valid_pairs() {
        let ks = KnotSet::new(vec![1.0, 1.6, 2.4, 3.0]).unwrap();
        let eta = build_interpolant(3, &ks, &[0.5, -1.0, 2.0, 0.7]).unwrap();
        let bump = SmoothBump::new(0.7, 3.4);
        let psi = VanishingTestFn::new(ks.radii(), bump, 1.0);
        let rule = GaussLegendre::new(32);
        let rep = orthogonality_defect(&eta, &psi, (0.7, 3.4), &rule, 12).unwrap();
        assert!(
            rep.normalized <= 1e-6,
            "normalized defect {}",
            rep.normalized
        );
    }

    #[test]
    fn orthogonality_negative_control() {
        let ks = KnotSet::new(vec![1.0, 1.6, 2.4, 3.0]).unwrap();
        let eta = build_interpolant(3, &ks, &[0.5, -1.0, 2.0, 0.7]).unwrap();
        // drop the root at the second knot: the test function no longer
        // vanishes there and the identity genuinely fails
        let roots = [1.0, 2.4, 3.0];
        let bump = SmoothBump::new(0.7, 3.4);
        let psi = VanishingTestFn::new(&roots, bump, 1.0);
        let rule = GaussLegendre::new(32);
        assert!(matches!(
            orthogonality_defect(&eta, &psi, (0.7, 3.4), &rule, 8),
            Err(AnalysisError::Precondition(_))
        ));
        let rep = orthogonality_defect_unchecked(&eta, &psi, (0.7, 3.4), &rule, 12).unwrap();
        assert!(rep.normalized > 1e-3, "control defect {}", rep.normalized);
    }

    #[test]
    fn orthogonality_scales_bilinearly() {
        let ks = KnotSet::new(vec![1.0, 1.6, 2.4, 3.0]).unwrap();
        let eta = build_interpolant(3, &ks, &[0.5, -1.0, 2.0, 0.7]).unwrap();
        let roots = [1.0, 2.4, 3.0];
        let bump = SmoothBump::new(0.7, 3.4);
        let rule = GaussLegendre::new(32);
        let one = VanishingTestFn::new(&roots, bump, 1.0);
        let five = VanishingTestFn::new(&roots, bump, 5.0);
        let a = orthogonality_defect_unchecked(&eta, &one, (0.7, 3.4), &rule, 8).unwrap();
        let b = orthogonality_defect_unchecked(&eta, &five, (0.7, 3.4), &rule, 8).unwrap();
        assert_relative_eq!(b.raw, 5.0 * a.raw, max_relative = 1e-10);
        // normalization removes the scaling entirely
        assert_relative_eq!(b.normalized, a.normalized, max_relative = 1e-10);
    }

    #[test]
    fn pythagoras_identity_and_minimality() {
        let ks = KnotSet::new(vec![1.0, 1.8, 2.6]).unwrap();
        let sigma = build_interpolant(2, &ks, &[1.0, 0.2, -0.8]).unwrap();
        let rule = GaussLegendre::new(32);
        let bump = SmoothBump::new(0.8, 3.0);
        let psi = VanishingTestFn::new(ks.radii(), bump, 0.5);
        let rep = pythagoras_check(&sigma, &psi, (0.8, 3.0), &rule, 12).unwrap();
        assert!(rep.defect <= 1e-6, "defect {}", rep.defect);
        assert!(rep.spline_is_minimal());
        assert!(rep.difference_sq > 0.0);

        // g = sigma reduces every part to the spline energy
        let rep0 = pythagoras_check(&sigma, &ZeroFn, (0.8, 3.0), &rule, 4).unwrap();
        assert_eq!(rep0.difference_sq, 0.0);
        assert_relative_eq!(rep0.competitor_sq, rep0.spline_sq, max_relative = 1e-10);
        assert!(rep0.defect <= 1e-10);
    }

    #[test]
    fn k1_linear_shift_is_not_admissible() {
        // c * r does not vanish at the knots, so it changes the interpolated
        // values; the precondition rejects it.
        let ks = KnotSet::new(vec![1.0, 2.0]).unwrap();
        let sigma = build_interpolant(1, &ks, &[1.0, 3.0]).unwrap();
        let rule = GaussLegendre::new(16);
        let shift = RadialClosure(|r: f64, m: u32| match m {
            0 => 0.3 * r,
            1 => 0.3,
            _ => 0.0,
        });
        assert!(matches!(
            pythagoras_check(&sigma, &shift, (0.5, 3.0), &rule, 4),
            Err(AnalysisError::Precondition(_))
        ));
    }

    #[test]
    fn psi_kernel_values() {
        for k in 2..=8 {
            assert_relative_eq!(psi_kernel(k, 0.0).unwrap(), 1.0);
        }
        assert_relative_eq!(psi_kernel_ft(2, 0.0).unwrap(), 8.0 / 3.0);
        assert!(matches!(
            psi_kernel(1, 0.0),
            Err(AnalysisError::KernelFrequency { k: 1 })
        ));
        assert!(psi_kernel_ft(1, 0.0).is_err());
    }

    #[test]
    fn psi_kernel_matches_phi_in_log_coordinates() {
        for k in [2, 3, 5] {
            for t in [-2.0f64, -0.5, 0.0, 0.7, 1.9] {
                let via_phi = (-t).exp() * crate::spline::phi(k, t.exp());
                assert_relative_eq!(psi_kernel(k, t).unwrap(), via_phi, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn psi_kernel_ft_matches_numerical_fourier_integral() {
        // Oracle: psi_2 decays like e^{-|t|}, so [-40, 40] carries the whole
        // integral to far below the tolerance.
        let rule = GaussLegendre::new(16);
        for tau in [0.0, 1.0, 2.0] {
            let numeric = 2.0
                * rule.integrate_split(0.0, 40.0, 40, |t| {
                    (tau * t).cos() * psi_kernel(2, t).unwrap()
                });
            assert_abs_diff_eq!(numeric, psi_kernel_ft(2, tau).unwrap(), epsilon = 1e-6);
        }
    }

    #[test]
    fn psi_kernel_ft_positive_on_grid() {
        for k in 2..=8 {
            for i in 0..=100 {
                let tau = -10.0 + 20.0 * i as f64 / 100.0;
                assert!(psi_kernel_ft(k, tau).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn error_study_reproduces_spline_data() {
        // Data sampled from a spline on the coarsest knots: zero error there,
        // and refinements keeping those knots and endpoints reproduce the
        // same function as well.
        let coarse = KnotSet::new(vec![1.0, 1.5, 2.0]).unwrap();
        let member = build_interpolant(2, &coarse, &[1.0, -0.5, 0.3]).unwrap();
        let family = vec![
            coarse.clone(),
            KnotSet::new(vec![1.0, 1.25, 1.5, 1.75, 2.0]).unwrap(),
        ];
        let opts = StudyOptions {
            energy_breaks: unit_breaks(40.0),
            ..StudyOptions::default()
        };
        let reports = error_study(2, &member, &family, &opts).unwrap();
        assert!(reports[0].err_linf_0 < 1e-9, "{}", reports[0].err_linf_0);
        assert!(reports[0].err_l2_0 < 1e-9);
        assert!(reports[1].err_linf_0 < 1e-8);
    }

    #[test]
    fn error_study_bounds_and_order() {
        let g = PolyExpDecay::new(vec![0.0, 0.0, 1.0]);
        let family: Vec<KnotSet> = [5usize, 9, 17, 33]
            .iter()
            .map(|&n| KnotSet::uniform(1.0, 2.0, n).unwrap())
            .collect();
        let reports = error_study(2, &g, &family, &StudyOptions::default()).unwrap();
        for rep in &reports {
            assert!(
                rep.bounds_satisfied(),
                "bounds violated at n = {}: {:?}",
                rep.n,
                rep
            );
        }
        // errors decrease monotonically
        for pair in reports.windows(2) {
            assert!(pair[1].err_l2_0 < pair[0].err_l2_0);
        }
        let order = fitted_order(&reports, |r| r.err_l2_0).unwrap();
        assert!(order >= 1.8, "fitted order {order}");
    }

    #[test]
    fn vanishing_test_fn_has_consistent_derivatives() {
        // central differences as an oracle for the closed-form derivatives
        let bump = SmoothBump::new(0.5, 2.5);
        let f = VanishingTestFn::new(&[1.0, 2.0], bump, 1.3);
        let h = 1e-5;
        for r in [0.7, 1.1, 1.9, 2.3] {
            let d1 = (f.eval(r + h, 0) - f.eval(r - h, 0)) / (2.0 * h);
            assert_abs_diff_eq!(d1, f.eval(r, 1), epsilon = 1e-7);
            let d2 = (f.eval(r + h, 1) - f.eval(r - h, 1)) / (2.0 * h);
            assert_abs_diff_eq!(d2, f.eval(r, 2), epsilon = 1e-6);
        }
        assert_eq!(f.eval(0.4, 0), 0.0);
        assert_eq!(f.eval(2.6, 2), 0.0);
        assert_abs_diff_eq!(f.eval(1.0, 0), 0.0);
        assert_abs_diff_eq!(f.eval(2.0, 0), 0.0);
    }
}
