//! Starlikeness and growth screening of normalized maps, the coefficient
//! functional `f ↦ a¹₀,₂`, and the end-to-end reproduction pipeline for the
//! extremal shear `Φ(z) = (z₁ + (3√3/2) z₂², z₂)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loewner::{envelope_bound, recover_chain_map, HerglotzField, DEFAULT_HORIZON};
use crate::mminus::{
    check_mminus, refine_maximum, report_from, sharp_shear_bound, shear_field, MembershipReport, SamplePlan,
    SamplingConfig, Verdict, SHARP_CONSTANT,
};
use crate::series::{mat_solve, Component, MultiIndex, Point2, PowerSeriesMap2};

/// `(1/2) ∂²f₁/∂z₂²(0)`, i.e. the Taylor coefficient `a¹₀,₂`.
pub fn functional_l102(f: &PowerSeriesMap2) -> Complex64 {
    f.coefficient(Component::First, (0, 2))
}

/// The extremal shear `(z₁ + a z₂², z₂)` at the given coefficient.
pub fn phi_map(a: Complex64, trunc_degree: u32) -> Result<PowerSeriesMap2> {
    PowerSeriesMap2::shear_family(a, trunc_degree)
}

/// `(e^{−2iψ} f₁(e^{2iψ}z₁, e^{iψ}z₂), e^{−iψ} f₂(e^{2iψ}z₁, e^{iψ}z₂))`,
/// computed coefficient-wise.
pub fn rotate_map(f: &PowerSeriesMap2, psi: f64) -> PowerSeriesMap2 {
    let phase = |comp_weight: i64, idx: MultiIndex| {
        let k = 2 * idx.a1 as i64 + idx.a2 as i64 - comp_weight;
        Complex64::from_polar(1.0, k as f64 * psi)
    };
    let first: Vec<_> = f.terms(Component::First).map(|(k, c)| (k, c * phase(2, k))).collect();
    let second: Vec<_> = f.terms(Component::Second).map(|(k, c)| (k, c * phase(1, k))).collect();
    PowerSeriesMap2::from_terms(f.trunc_degree(), first, second).expect("same support as a valid map")
}

/// `Re⟨(df_z)⁻¹ f(z), z⟩`; positive at every `z ≠ 0` for starlike maps.
pub fn starlike_defect(f: &PowerSeriesMap2, z: Point2) -> Result<f64> {
    let n = z.norm();
    if !(n < 1.0) {
        return Err(Error::OutsideBall(n));
    }
    if n == 0.0 {
        return Err(Error::InvalidArgument(
            "starlikeness is tested away from the origin".into(),
        ));
    }
    starlike_unchecked(f, z)
}

fn starlike_unchecked(f: &PowerSeriesMap2, z: Point2) -> Result<f64> {
    let jac = f.jacobian_at(z);
    let w = mat_solve(&jac, &f.eval(z)).ok_or_else(|| Error::SingularJacobian(z.to_string()))?;
    Ok(w.inner(&z).re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarlikeReport {
    pub verdict: Verdict,
    pub min_margin: f64,
    pub witness: Point2,
    pub samples_used: usize,
}

fn check_invertible_normalized(f: &PowerSeriesMap2) -> Result<()> {
    let lin = f.linear_part();
    let det = lin[0][0] * lin[1][1] - lin[0][1] * lin[1][0];
    if !f.has_zero_constant_term() || det == Complex64::new(0.0, 0.0) {
        return Err(Error::NotNormalized);
    }
    Ok(())
}

/// Samples the starlikeness functional on the `M₋` grid; accepts when its
/// minimum is at least `−defect_tolerance`.
pub fn check_starlike(f: &PowerSeriesMap2, cfg: &SamplingConfig) -> Result<StarlikeReport> {
    check_invertible_normalized(f)?;
    let plan = SamplePlan::new(cfg)?;
    let (min_margin, witness) = (0..plan.len())
        .into_par_iter()
        .map(|i| {
            let z = plan.point(i);
            starlike_unchecked(f, z).map(|v| (v, z))
        })
        .try_reduce(
            || (f64::INFINITY, Point2::ORIGIN),
            |a, b| {
                // smaller margin wins; ties go to the lexicographically smaller point
                let ord = a.0.total_cmp(&b.0).then_with(|| {
                    a.1.to_reals()
                        .iter()
                        .zip(b.1.to_reals().iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                Ok(if ord.is_gt() { b } else { a })
            },
        )?;
    let verdict = if min_margin >= -cfg.defect_tolerance {
        Verdict::Accept
    } else {
        Verdict::Reject
    };
    Ok(StarlikeReport {
        verdict,
        min_margin,
        witness,
        samples_used: plan.len(),
    })
}

/// Screens `‖f(z)‖ ≤ ‖z‖/(1 − ‖z‖)²`. A rejection shows `f` admits no
/// parametric representation; acceptance is inconclusive.
pub fn growth_check(f: &PowerSeriesMap2, cfg: &SamplingConfig) -> Result<MembershipReport> {
    if !f.is_normalized_to(Complex64::new(1.0, 0.0), 1e-12) {
        return Err(Error::NotNormalized);
    }
    let plan = SamplePlan::new(cfg)?;
    let excess = |z: Point2| {
        let r = z.norm();
        f.eval(z).norm() - r / ((1.0 - r) * (1.0 - r))
    };
    let worst = refine_maximum(excess, plan.maximize(excess));
    Ok(report_from(worst, plan.len(), cfg))
}

/// One line of a [`ReproductionReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl CheckOutcome {
    fn within(name: &str, computed: f64, expected: f64, tolerance: f64, note: &str) -> Self {
        Self {
            name: name.into(),
            computed,
            expected,
            tolerance,
            passed: (computed - expected).abs() <= tolerance,
            note: note.into(),
        }
    }

    /// `computed` is a nonnegative error measured against zero.
    fn at_most(name: &str, computed: f64, limit: f64, note: &str) -> Self {
        Self {
            name: name.into(),
            computed,
            expected: 0.0,
            tolerance: limit,
            passed: computed <= limit,
            note: note.into(),
        }
    }
}

pub const SHARPNESS_TOLERANCE: f64 = 1e-8;
pub const BOUND_TOLERANCE: f64 = 1e-9;
pub const CHAIN_TOLERANCE: f64 = 1e-7;
pub const ENVELOPE_TOLERANCE: f64 = 1e-7;
/// Sample count below which membership verdicts are flagged low-confidence.
pub const CONFIDENT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub computed_bound: f64,
    pub bound_direction: (f64, f64),
    #[serde(serialize_with = "ser_complex")]
    pub phi_coefficient: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub functional_at_phi: Complex64,
    pub phi_membership: Option<MembershipReport>,
    pub phi_starlike: Option<StarlikeReport>,
    pub chain_recovery_error: f64,
    pub envelope_limit: f64,
    pub low_confidence: bool,
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

impl ReproductionReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {}: computed {:.12}, expected {:.12} (tol {:e}){}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.computed,
                c.expected,
                c.tolerance,
                if c.note.is_empty() {
                    String::new()
                } else {
                    format!(" - {}", c.note)
                },
            );
        }
        let _ = writeln!(
            out,
            "bound {:.12} attained at direction ({:.6}, {:.6}); samples per check: {}{}",
            self.computed_bound,
            self.bound_direction.0,
            self.bound_direction.1,
            self.phi_membership.as_ref().map_or(0, |m| m.samples_used),
            if self.low_confidence { " (low confidence)" } else { "" },
        );
        let _ = writeln!(out, "overall: {}", if self.all_passed { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs the pipeline for the extremal map `Φ`.
pub fn reproduce_theorems(cfg: &SamplingConfig) -> Result<ReproductionReport> {
    reproduce_with_coefficient(Complex64::new(SHARP_CONSTANT, 0.0), cfg)
}

/// Runs the pipeline with `Φ` replaced by `(z₁ + a z₂², z₂)`. Sub-check
/// failures are recorded in the report; only an invalid config is an error.
pub fn reproduce_with_coefficient(a: Complex64, cfg: &SamplingConfig) -> Result<ReproductionReport> {
    cfg.validate()?;
    let phi = phi_map(a, 2)?;
    let field = shear_field(a, 2)?;

    let bound = sharp_shear_bound();
    let functional = functional_l102(&phi);

    let ((membership, starlike), recovery) = rayon::join(
        || rayon::join(|| check_mminus(&field, cfg), || check_starlike(&phi, cfg)),
        || HerglotzField::constant(field.clone()).and_then(|g| recover_chain_map(&g, 0.0, DEFAULT_HORIZON, 2)),
    );

    let chain_recovery_error = match &recovery {
        Ok(f0) => f0.max_coeff_diff(&phi),
        Err(_) => f64::INFINITY,
    };
    let envelope_limit = DEFAULT_HORIZON.exp() * envelope_bound(0.0, DEFAULT_HORIZON);

    let mut checks = vec![
        CheckOutcome::within(
            "sharp bound sup|q| over shear fields in M-",
            bound.value,
            SHARP_CONSTANT,
            BOUND_TOLERANCE,
            "",
        ),
        CheckOutcome::within(
            "sharpness |L(Phi)| equals the bound",
            functional.norm(),
            bound.value,
            SHARPNESS_TOLERANCE,
            "",
        ),
    ];
    let verdict_check = |name: &str, r: &std::result::Result<Verdict, Error>, value: f64| match r {
        Ok(v) => CheckOutcome {
            name: name.into(),
            computed: value,
            expected: 0.0,
            tolerance: cfg.defect_tolerance,
            passed: v.is_accept(),
            note: v.as_str().into(),
        },
        Err(e) => CheckOutcome {
            name: name.into(),
            computed: f64::NAN,
            expected: 0.0,
            tolerance: cfg.defect_tolerance,
            passed: false,
            note: e.to_string(),
        },
    };
    checks.push(verdict_check(
        "generating field of Phi lies in M- (max defect)",
        &membership.as_ref().map(|m| m.verdict).map_err(Clone::clone),
        membership.as_ref().map_or(f64::NAN, |m| m.max_defect),
    ));
    checks.push(verdict_check(
        "Phi is starlike (min margin)",
        &starlike.as_ref().map(|m| m.verdict).map_err(Clone::clone),
        starlike.as_ref().map_or(f64::NAN, |m| m.min_margin),
    ));
    checks.push(CheckOutcome::at_most(
        "chain recovery e^T phi_{0,T} vs Phi",
        chain_recovery_error,
        CHAIN_TOLERANCE,
        &recovery.as_ref().err().map(|e| e.to_string()).unwrap_or_default(),
    ));
    checks.push(CheckOutcome::within(
        "envelope limit e^T (3sqrt3/2) e^-T (1-e^-T)",
        envelope_limit,
        bound.value,
        ENVELOPE_TOLERANCE,
        "",
    ));
    let all_passed = checks.iter().all(|c| c.passed);
    let samples = membership.as_ref().map_or(0, |m| m.samples_used);

    Ok(ReproductionReport {
        computed_bound: bound.value,
        bound_direction: bound.direction,
        phi_coefficient: a,
        functional_at_phi: functional,
        phi_membership: membership.ok(),
        phi_starlike: starlike.ok(),
        chain_recovery_error,
        envelope_limit,
        low_confidence: samples < CONFIDENT_SAMPLES,
        checks,
        all_passed,
    })
}
