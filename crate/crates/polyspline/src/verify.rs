//! Randomized verification suite behind `polyspline verify`.
//!
//! Each check pins one identity or inequality the construction guarantees
//! (kernel annihilation, the two operator factorizations, formal adjointness
//! of the end operators, solve residuals, recovery and representation
//! equivalence, orthogonality with a negative control, the energy Pythagoras
//! identity and minimality, kernel positivity) and records a defect against
//! a fixed tolerance. Artifacts loaded from disk get a
//! structural subset of the same checks.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    apply_g_pointwise, apply_r_pointwise, builtin_datum, energy_of_spline, error_study,
    fitted_order, orthogonality_defect, orthogonality_defect_unchecked, psi_kernel, psi_kernel_ft,
    pythagoras_check, RadialFn, SmoothBump, StudyOptions, VanishingTestFn,
};
use crate::artifact::SCHEMA_VERSION;
use crate::knots::KnotSet;
use crate::operators::ModeOps;
use crate::powerlog::PowerLogExpr;
use crate::quadrature::GaussLegendre;
use crate::spline::{build_by_collocation, build_interpolant, phi, BeppoLeviSpline};

/// One verification check outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub context: String,
    /// Measured defect, when the check is quantitative.
    pub defect: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn quantitative(name: &str, context: String, defect: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            context,
            defect: Some(defect),
            tolerance,
            passed: defect.is_finite() && defect <= tolerance,
            note: None,
        }
    }

    fn skipped(name: &str, context: String, note: &str) -> Self {
        Self {
            name: name.into(),
            context,
            defect: None,
            tolerance: 0.0,
            passed: true,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn new(seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "verification".into(),
            seed,
            passed,
            checks,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub quad_order: usize,
    /// Tolerance for the quadrature-limited defects (orthogonality,
    /// Pythagoras).
    pub defect_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            quad_order: 32,
            defect_tol: 1e-6,
        }
    }
}

/// A random interpolation instance: frequency, knots, data.
#[derive(Debug, Clone)]
pub struct Instance {
    pub k: i32,
    pub knots: KnotSet,
    pub values: Vec<f64>,
}

/// Draw a well-scaled random instance: `|k|` in `k_abs_range`, `n` in
/// `n_range`, first radius in `[0.3, 1.2]`, gaps in `[0.15, 0.8]`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    k_abs_range: std::ops::RangeInclusive<i32>,
    n_range: std::ops::RangeInclusive<usize>,
) -> Instance {
    let k_abs = rng.gen_range(k_abs_range);
    let k = if rng.gen_bool(0.5) { k_abs } else { -k_abs };
    let n = rng.gen_range(n_range);
    let mut radii = Vec::with_capacity(n);
    let mut r = rng.gen_range(0.3..1.2);
    for _ in 0..n {
        radii.push(r);
        r += rng.gen_range(0.15..0.8);
    }
    let values = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    Instance {
        k,
        knots: KnotSet::new(radii).expect("generated radii are valid"),
        values,
    }
}

// ---------------------------------------------------------------------------
// Individual checks

/// Exact annihilation of the kernel generators, `1 <= |k| <= 16`.
pub fn check_annihilation() -> Check {
    let mut worst: f64 = 0.0;
    for k in 1..=16 {
        let ops = ModeOps::new(k).expect("nonzero frequency");
        for gen in ops.kernel_l() {
            worst = worst.max(ops.l(&gen).coeff_l1());
        }
        for gen in ops.kernel_g() {
            worst = worst.max(ops.g(&gen).coeff_l1());
        }
        for gen in ops.kernel_r() {
            worst = worst.max(ops.r(&gen).coeff_l1());
        }
    }
    Check::quantitative("kernel-annihilation", "1 <= |k| <= 16".into(), worst, 0.0)
}

/// Both operator factorizations on monomials `r^-3 .. r^5`, `|k| <= 8`.
pub fn check_factorizations() -> Vec<Check> {
    let mut worst_grr: f64 = 0.0;
    let mut worst_mm: f64 = 0.0;
    for k in 1..=8 {
        let ops = ModeOps::new(k).expect("nonzero frequency");
        let mut probes: Vec<PowerLogExpr> =
            (-3..=5).map(|j| PowerLogExpr::monomial(1.0, j)).collect();
        if k == 1 {
            probes.push(PowerLogExpr::term(1.0, Ratio::from_integer(1), 1));
        }
        for e in &probes {
            let direct = ops.l(e);
            let scale = direct.coeff_l1().max(1.0);
            let via_g = ops.g(&ops.r(e).mul_power(Ratio::from_integer(3)));
            worst_grr = worst_grr.max(via_g.sub(&direct).coeff_l1() / scale);
            let via_m = ops.m_adjoint(&ops.m(e));
            worst_mm = worst_mm.max(via_m.sub(&direct).coeff_l1() / scale);
        }
    }
    vec![
        Check::quantitative(
            "factorization-g-r3-r",
            "monomials r^-3..r^5, |k| <= 8".into(),
            worst_grr,
            1e-12,
        ),
        Check::quantitative(
            "factorization-m-adjoint-m",
            "monomials r^-3..r^5, |k| <= 8".into(),
            worst_mm,
            1e-12,
        ),
    ]
}

/// Formal adjointness of the end operators: for compactly supported smooth
/// `u, v`, the inner products `(G_k u, v)` and `(u, R_k v)` agree.
pub fn check_adjointness(quad_order: usize) -> Check {
    let rule = GaussLegendre::new(quad_order);
    let mut worst: f64 = 0.0;
    for k in [1i64, 2, 5, 8] {
        let u = VanishingTestFn::new(&[], SmoothBump::new(0.5, 3.0), 1.0);
        let v = VanishingTestFn::new(&[], SmoothBump::new(1.0, 4.0), 1.0);
        let lhs =
            rule.integrate_split(0.5, 4.0, 28, |r| apply_g_pointwise(k, &u, r) * v.eval(r, 0));
        let rhs =
            rule.integrate_split(0.5, 4.0, 28, |r| u.eval(r, 0) * apply_r_pointwise(k, &v, r));
        let scale = lhs.abs().max(rhs.abs()).max(1e-30);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Check::quantitative(
        "end-operator-adjointness",
        "bump pairs, |k| in {1,2,5,8}".into(),
        worst,
        1e-8,
    )
}

/// Solve residuals over randomized instances (existence/uniqueness at the
/// linear-algebra level).
pub fn check_solve_residuals(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let inst = random_instance(rng, 1..=8, 2..=12);
        match build_interpolant(inst.k, &inst.knots, &inst.values) {
            Ok(s) => worst = worst.max(s.solve_residual()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check::quantitative(
        "interpolation-solve-residual",
        format!("{trials} randomized instances, |k| <= 8, n <= 12"),
        worst,
        1e-10,
    )
}

/// Recovery of members of the spline space sampled at the knots (`|k| >= 2`,
/// generated through the dilate representation).
pub fn check_recovery(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let inst = random_instance(rng, 2..=8, 2..=12);
        let coeffs: Vec<f64> = (0..inst.knots.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let member = |r: f64| -> f64 {
            coeffs
                .iter()
                .zip(inst.knots.radii())
                .map(|(a, &rho)| a * phi(inst.k, r / rho))
                .sum()
        };
        let values: Vec<f64> = inst.knots.radii().iter().map(|&r| member(r)).collect();
        let Ok(s) = build_interpolant(inst.k, &inst.knots, &values) else {
            worst = f64::INFINITY;
            continue;
        };
        let hi = 2.0 * inst.knots.last();
        let mut sup = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..=300 {
            let r = hi * i as f64 / 300.0;
            sup = sup.max((s.value(r) - member(r)).abs());
            scale = scale.max(member(r).abs());
        }
        worst = worst.max(sup / scale.max(1.0));
    }
    Check::quantitative(
        "spline-space-recovery",
        format!("{trials} randomized members, 2 <= |k| <= 8"),
        worst,
        1e-8,
    )
}

/// Agreement of the dilate-representation construction with the piecewise
/// construction (`|k| >= 2` only; the representation does not exist for
/// `|k| = 1`).
pub fn check_representation_equivalence(
    rng: &mut ChaCha8Rng,
    trials: usize,
    k: Option<i32>,
) -> Check {
    if let Some(k) = k {
        if k.unsigned_abs() < 2 {
            return Check::skipped(
                "representation-equivalence",
                format!("k = {k}"),
                "not applicable: the dilate representation does not exist for |k| = 1",
            );
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let inst = match k {
            Some(k) => {
                let mut inst = random_instance(
                    rng,
                    k.unsigned_abs() as i32..=k.unsigned_abs() as i32,
                    2..=12,
                );
                inst.k = k;
                inst
            }
            None => random_instance(rng, 2..=8, 2..=12),
        };
        let (direct, fit) = match (
            build_interpolant(inst.k, &inst.knots, &inst.values),
            build_by_collocation(inst.k, &inst.knots, &inst.values),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                worst = f64::INFINITY;
                continue;
            }
        };
        let hi = 2.0 * inst.knots.last();
        let mut sup = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..=300 {
            let r = hi * i as f64 / 300.0;
            let (a, b) = (direct.value(r), fit.spline.value(r));
            sup = sup.max((a - b).abs());
            scale = scale.max(a.abs());
        }
        worst = worst.max(sup / scale.max(1.0));
    }
    Check::quantitative(
        "representation-equivalence",
        format!("{trials} randomized instances, 2 <= |k| <= 8"),
        worst,
        1e-8,
    )
}

/// Closed-form spline energies against quadrature over a finite window plus
/// the exact improper tail.
pub fn check_energy_consistency(rng: &mut ChaCha8Rng, trials: usize, quad_order: usize) -> Check {
    let rule = GaussLegendre::new(quad_order);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let inst = random_instance(rng, (trial % 8) as i32 + 1..=(trial % 8) as i32 + 1, 2..=8);
        let Ok(s) = build_interpolant(inst.k, &inst.knots, &inst.values) else {
            worst = f64::INFINITY;
            continue;
        };
        let closed = match energy_of_spline(&s) {
            Ok(e) => e.squared,
            Err(_) => {
                worst = f64::INFINITY;
                continue;
            }
        };
        let window = 4.0 * inst.knots.last();
        let mut breaks = vec![0.0];
        breaks.extend_from_slice(s.knots());
        breaks.push(window);
        let derivs = s.pieces().with_derivatives();
        let quad = crate::analysis::energy_sampled(s.k(), &derivs, &breaks, &rule, 8)
            .map(|e| e.squared)
            .unwrap_or(f64::INFINITY)
            + crate::analysis::energy_on(s.k(), s.pieces(), window, f64::INFINITY)
                .map(|e| e.squared)
                .unwrap_or(f64::INFINITY);
        worst = worst.max((closed - quad).abs() / closed.max(1e-300));
    }
    Check::quantitative(
        "energy-closed-form-vs-quadrature",
        format!("{trials} randomized instances, 1 <= |k| <= 8"),
        worst,
        1e-8,
    )
}

fn test_pair(rng: &mut ChaCha8Rng, k_abs: i32) -> (BeppoLeviSpline, VanishingTestFn, (f64, f64)) {
    let inst = random_instance(rng, k_abs..=k_abs, 2..=8);
    let eta = build_interpolant(inst.k, &inst.knots, &inst.values)
        .expect("random instances are well conditioned");
    let r1 = inst.knots.first();
    let rn = inst.knots.last();
    let delta = (0.5 * r1).min(0.5);
    let support = (r1 - delta, rn + delta);
    let bump = SmoothBump::new(support.0, support.1);
    let psi = VanishingTestFn::new(inst.knots.radii(), bump, rng.gen_range(0.5..2.0));
    (eta, psi, support)
}

/// Orthogonality of `R_k`-images over random (spline, test-function) pairs,
/// `|k| >= 1`, plus a negative control where the test function fails to
/// vanish at one knot.
pub fn check_orthogonality(
    rng: &mut ChaCha8Rng,
    trials: usize,
    quad_order: usize,
    tol: f64,
) -> Vec<Check> {
    let rule = GaussLegendre::new(quad_order);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        // cycle |k| so every frequency up to 8, including |k| = 1, is hit
        let (eta, psi, support) = test_pair(rng, (trial % 8) as i32 + 1);
        let rep = orthogonality_defect(&eta, &psi, support, &rule, 12)
            .expect("generated test functions vanish at knots");
        worst = worst.max(rep.normalized);
    }
    let positive = Check::quantitative(
        "orthogonality",
        format!("{trials} randomized pairs, 1 <= |k| <= 8"),
        worst,
        tol,
    );

    // negative control: drop one interior root
    let inst = random_instance(rng, 2..=6, 3..=6);
    let eta = build_interpolant(inst.k, &inst.knots, &inst.values).expect("well conditioned");
    let radii = inst.knots.radii();
    let mut roots = radii.to_vec();
    roots.remove(1);
    let delta = (0.5 * radii[0]).min(0.5);
    let support = (radii[0] - delta, inst.knots.last() + delta);
    let psi = VanishingTestFn::new(&roots, SmoothBump::new(support.0, support.1), 1.0);
    let rep = orthogonality_defect_unchecked(&eta, &psi, support, &rule, 12)
        .expect("quadrature succeeds");
    let control = Check {
        name: "orthogonality-negative-control".into(),
        context: format!("k = {}, root dropped at knot 2", inst.k),
        defect: Some(rep.normalized),
        tolerance: 1e-3,
        passed: rep.normalized > 1e-3,
        note: Some("expected to exceed the tolerance: the identity must fail".into()),
    };
    vec![positive, control]
}

/// Pythagoras identity and strict minimality against perturbed competitors.
pub fn check_optimality(
    rng: &mut ChaCha8Rng,
    instances: usize,
    competitors: usize,
    quad_order: usize,
    tol: f64,
) -> Vec<Check> {
    let rule = GaussLegendre::new(quad_order);
    let mut worst_defect: f64 = 0.0;
    let mut strictly_minimal = true;
    let mut min_margin = f64::INFINITY;
    for instance in 0..instances {
        let (sigma, _, support) = test_pair(rng, (instance % 8) as i32 + 1);
        let sigma_sq = energy_of_spline(&sigma)
            .expect("spline energy is finite")
            .squared;
        for _ in 0..competitors {
            let lo = rng.gen_range(support.0..(support.0 + 0.3 * (support.1 - support.0)));
            let hi = rng.gen_range((support.1 - 0.3 * (support.1 - support.0))..support.1);
            let bump = SmoothBump::new(lo, hi);
            let psi = VanishingTestFn::new(sigma.knots(), bump, rng.gen_range(0.2..1.5));
            let rep = pythagoras_check(&sigma, &psi, (lo, hi), &rule, 12)
                .expect("competitors vanish at knots");
            worst_defect = worst_defect.max(rep.defect);
            if rep.competitor_sq <= sigma_sq {
                strictly_minimal = false;
            }
            min_margin = min_margin.min(rep.competitor_sq - sigma_sq);
        }
    }
    vec![
        Check::quantitative(
            "pythagoras-identity",
            format!("{instances} instances x {competitors} competitors"),
            worst_defect,
            tol,
        ),
        Check {
            name: "energy-minimality".into(),
            context: format!("{instances} instances x {competitors} competitors"),
            defect: Some(-min_margin),
            tolerance: 0.0,
            passed: strictly_minimal,
            note: Some(
                "defect is the negated worst margin; negative values mean strict minimality".into(),
            ),
        },
    ]
}

/// End-condition residuals of freshly built splines are exactly zero.
pub fn check_end_conditions(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let inst = random_instance(rng, 1..=8, 1..=10);
        match build_interpolant(inst.k, &inst.knots, &inst.values) {
            Ok(s) => {
                let (g, r) = s.end_condition_residuals();
                worst = worst.max(g).max(r);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check::quantitative(
        "adjoint-end-conditions",
        format!("{trials} randomized instances"),
        worst,
        0.0,
    )
}

/// Positivity of the kernel transform plus its two closed-form spot values.
pub fn check_kernel_positivity(quad_order: usize) -> Vec<Check> {
    let mut min_val = f64::INFINITY;
    for k in 2..=8 {
        for i in 0..=200 {
            let tau = -20.0 + 40.0 * i as f64 / 200.0;
            min_val = min_val.min(psi_kernel_ft(k, tau).expect("|k| >= 2"));
        }
    }
    let positivity = Check {
        name: "kernel-transform-positivity".into(),
        context: "2 <= |k| <= 8, tau grid [-20, 20]".into(),
        defect: Some(-min_val),
        tolerance: 0.0,
        passed: min_val > 0.0,
        note: Some("defect is the negated minimum; negative values mean strict positivity".into()),
    };
    let spot = Check::quantitative(
        "kernel-transform-spot-value",
        "psi_hat_2(0) = 8/3".into(),
        (psi_kernel_ft(2, 0.0).unwrap() - 8.0 / 3.0).abs(),
        0.0,
    );
    let rule = GaussLegendre::new(quad_order.max(16));
    let mut worst: f64 = 0.0;
    for tau in [0.0, 1.0, 2.0] {
        let numeric = 2.0
            * rule.integrate_split(0.0, 40.0, 40, |t| {
                (tau * t).cos() * psi_kernel(2, t).expect("|k| >= 2")
            });
        worst = worst.max((numeric - psi_kernel_ft(2, tau).unwrap()).abs());
    }
    let fourier = Check::quantitative(
        "kernel-transform-fourier-integral",
        "k = 2, tau in {0, 1, 2}".into(),
        worst,
        1e-6,
    );
    vec![positivity, spot, fourier]
}

/// Error bounds and fitted convergence order for the built-in datum.
pub fn check_convergence(k: i32, datum: &str) -> Vec<Check> {
    let g = builtin_datum(datum).expect("built-in datum id");
    let family: Vec<KnotSet> = [5usize, 9, 17, 33]
        .iter()
        .map(|&n| KnotSet::uniform(1.0, 2.0, n).expect("uniform knots"))
        .collect();
    let reports = error_study(k, g.as_ref(), &family, &StudyOptions::default())
        .expect("built-in datum has finite energy");
    let mut worst_excess: f64 = 0.0;
    for rep in &reports {
        for (err, bound) in [
            (rep.err_linf_0, rep.bound_linf_0),
            (rep.err_linf_1, rep.bound_linf_1),
            (rep.err_l2_0, rep.bound_l2_0),
            (rep.err_l2_1, rep.bound_l2_1),
        ] {
            worst_excess = worst_excess.max(err - bound);
        }
    }
    let bounds = Check {
        name: "error-bounds".into(),
        context: format!("datum {datum}, k = {k}, n in {{5, 9, 17, 33}}"),
        defect: Some(worst_excess),
        tolerance: 0.0,
        passed: worst_excess <= 0.0,
        note: Some("defect is the worst (error - bound); nonpositive means all bounds hold".into()),
    };
    let order = fitted_order(&reports, |r| r.err_l2_0);
    let order_check = Check {
        name: "convergence-order".into(),
        context: format!("datum {datum}, k = {k}, L2 value error"),
        defect: order.map(|o| 1.8 - o),
        tolerance: 0.0,
        passed: order.is_some_and(|o| o >= 1.8),
        note: order.map(|o| format!("fitted order {o:.3}")),
    };
    vec![bounds, order_check]
}

// ---------------------------------------------------------------------------
// Suites

/// The full randomized suite with the given options.
pub fn run_suite(opts: &SuiteOptions) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    checks.push(check_annihilation());
    checks.extend(check_factorizations());
    checks.push(check_adjointness(opts.quad_order));
    checks.push(check_energy_consistency(&mut rng, 16, opts.quad_order));
    checks.push(check_solve_residuals(&mut rng, 40));
    checks.push(check_recovery(&mut rng, 25));
    checks.push(check_representation_equivalence(&mut rng, 25, None));
    checks.extend(check_orthogonality(
        &mut rng,
        12,
        opts.quad_order,
        opts.defect_tol,
    ));
    checks.extend(check_optimality(
        &mut rng,
        4,
        5,
        opts.quad_order,
        opts.defect_tol,
    ));
    checks.push(check_end_conditions(&mut rng, 25));
    checks.extend(check_kernel_positivity(opts.quad_order));
    VerificationReport::new(opts.seed, checks)
}

/// Structural checks of a stored spline artifact: interpolation, continuity,
/// end conditions, interior annihilation, and admissible piece structure.
pub fn verify_spline(
    s: &BeppoLeviSpline,
    seed: u64,
    k_for_note: Option<i32>,
) -> VerificationReport {
    let ops = ModeOps::new(s.k()).expect("artifact frequency is nonzero");
    let mut checks = Vec::new();

    let mut interp: f64 = 0.0;
    let scale = s.values().iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    for (&r, &v) in s.knots().iter().zip(s.values()) {
        interp = interp.max((s.value(r) - v).abs() / scale);
    }
    checks.push(Check::quantitative(
        "interpolation",
        format!("k = {}, n = {}", s.k(), s.knots().len()),
        interp,
        1e-8,
    ));

    let mut c2: f64 = 0.0;
    for (i, &r) in s.knots().iter().enumerate() {
        let left = if i == 0 {
            s.head()
        } else {
            &s.interior()[i - 1]
        };
        let right = if i == s.knots().len() - 1 {
            s.tail()
        } else {
            &s.interior()[i]
        };
        for order in 0..=2u32 {
            let a = left.derivative(order).eval(r);
            let b = right.derivative(order).eval(r);
            c2 = c2.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
    }
    checks.push(Check::quantitative(
        "c2-continuity",
        format!("{} knots", s.knots().len()),
        c2,
        1e-8,
    ));

    let (g_res, r_res) = s.end_condition_residuals();
    checks.push(Check::quantitative(
        "end-condition-head",
        "G_k applied to the head piece".into(),
        g_res,
        1e-9 * s.head().coeff_l1().max(1.0),
    ));
    checks.push(Check::quantitative(
        "end-condition-tail",
        "R_k applied to the tail piece".into(),
        r_res,
        1e-9 * s.tail().coeff_l1().max(1.0),
    ));

    let mut annihilation: f64 = 0.0;
    for piece in s.interior() {
        annihilation = annihilation.max(ops.l(piece).coeff_l1() / piece.coeff_l1().max(1.0));
    }
    checks.push(Check::quantitative(
        "interior-annihilation",
        format!("{} interior pieces", s.interior().len()),
        annihilation,
        1e-9,
    ));

    let head_ok = s
        .head()
        .exponents()
        .iter()
        .all(|e| ops.head_exponents().contains(e));
    let tail_ok = s
        .tail()
        .exponents()
        .iter()
        .all(|e| ops.tail_exponents().contains(e));
    checks.push(Check {
        name: "extreme-piece-structure".into(),
        context: format!(
            "head exponents subset of {{|k|, |k|+2}}, tail of {{2-|k|, -|k|}}, |k| = {}",
            ops.k_abs()
        ),
        defect: None,
        tolerance: 0.0,
        passed: head_ok && tail_ok,
        note: None,
    });

    if let Some(k) = k_for_note {
        if k.unsigned_abs() < 2 {
            checks.push(Check::skipped(
                "representation-equivalence",
                format!("k = {k}"),
                "not applicable: the dilate representation does not exist for |k| = 1",
            ));
        }
    }

    VerificationReport::new(seed, checks)
}
