//! Sampling tests for the class `M₋` of normalized vector fields with
//! `Re⟨H(z), z⟩ ≤ 0` on the ball, the θ-averaging reduction for fields, and
//! the sharp constant `3√3/2` for quadratic shear fields.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Component, MultiIndex, Point2, PowerSeriesMap2};

/// `3√3/2`, the largest `|a|` for which `(−z₁ + az₂², −z₂)` lies in `M₋`.
pub const SHARP_CONSTANT: f64 = 2.598_076_211_353_316;

/// Samples never leave the ball of radius `1 − BALL_MARGIN`.
pub const BALL_MARGIN: f64 = 1e-6;

/// Tolerance on `H(0) = 0, dH₀ = −id`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Trapezoid nodes on `[0, 4π]` for the θ-average.
pub const FOURIER_NODES: usize = 512;

const REFINE_STEPS: usize = 50;
const REFINE_INITIAL_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub grid_radii: usize,
    pub grid_angles: usize,
    pub random_samples: usize,
    pub rng_seed: u64,
    pub defect_tolerance: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            grid_radii: 40,
            grid_angles: 24,
            random_samples: 100_000,
            rng_seed: 0,
            defect_tolerance: 1e-12,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_radii == 0 || self.grid_angles == 0 {
            return Err(Error::InvalidArgument("grid counts must be positive".into()));
        }
        if !(self.defect_tolerance >= 0.0) {
            return Err(Error::InvalidArgument("defect tolerance must be nonnegative".into()));
        }
        Ok(())
    }

    /// A config with roughly `n` points in total, useful for quick runs.
    pub fn with_sample_budget(n: usize, seed: u64) -> Self {
        Self {
            grid_radii: 1,
            grid_angles: 1,
            random_samples: n.saturating_sub(1),
            rng_seed: seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        }
    }
}

/// Outcome of a sampling check. `accept` only means no violation was found
/// at the configured resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub verdict: Verdict,
    pub max_defect: f64,
    pub witness: Point2,
    pub samples_used: usize,
    pub seed: u64,
}

/// Deterministic grid plus seeded random points, all inside the ball of
/// radius `1 − BALL_MARGIN` and none at the origin.
pub struct SamplePlan {
    radii: Vec<f64>,
    psis: Vec<f64>,
    thetas: Vec<f64>,
    random: Vec<Point2>,
}

impl SamplePlan {
    pub fn new(cfg: &SamplingConfig) -> Result<Self> {
        cfg.validate()?;
        let cap = 1.0 - BALL_MARGIN;
        let radii = (1..=cfg.grid_radii)
            .map(|k| k as f64 / cfg.grid_radii as f64 * cap)
            .collect();
        let n = cfg.grid_angles;
        let psis = if n == 1 {
            vec![FRAC_PI_2 / 2.0]
        } else {
            (0..n).map(|j| j as f64 / (n - 1) as f64 * FRAC_PI_2).collect()
        };
        let thetas = (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let unit = Uniform::new(0.0f64, 1.0);
        let random = (0..cfg.random_samples)
            .map(|_| loop {
                let g: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if len == 0.0 {
                    continue;
                }
                // uniform in the 4-ball: radius ~ U^(1/4)
                let r = unit.sample(&mut rng).powf(0.25).max(f64::MIN_POSITIVE) * cap;
                break Point2::from_reals(g.map(|v| v / len * r));
            })
            .collect();
        Ok(Self {
            radii,
            psis,
            thetas,
            random,
        })
    }

    fn grid_len(&self) -> usize {
        self.radii.len() * self.psis.len() * self.thetas.len() * self.thetas.len()
    }

    pub fn len(&self) -> usize {
        self.grid_len() + self.random.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> Point2 {
        let g = self.grid_len();
        if i >= g {
            return self.random[i - g];
        }
        let nt = self.thetas.len();
        let (t2, rest) = (i % nt, i / nt);
        let (t1, rest) = (rest % nt, rest / nt);
        let (p, k) = (rest % self.psis.len(), rest / self.psis.len());
        let (r, psi) = (self.radii[k], self.psis[p]);
        Point2::new(
            Complex64::from_polar(r * psi.cos(), self.thetas[t1]),
            Complex64::from_polar(r * psi.sin(), self.thetas[t2]),
        )
    }

    /// Maximum of `f` over the plan with a deterministic argmax, independent
    /// of how the work is split across threads.
    pub fn maximize<F>(&self, f: F) -> (f64, Point2)
    where
        F: Fn(Point2) -> f64 + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let z = self.point(i);
                (f(z), z)
            })
            .reduce(|| (f64::NEG_INFINITY, Point2::ORIGIN), pick_larger)
    }
}

fn point_order(a: &Point2, b: &Point2) -> Ordering {
    a.to_reals()
        .iter()
        .zip(b.to_reals().iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn pick_larger(a: (f64, Point2), b: (f64, Point2)) -> (f64, Point2) {
    match a.0.total_cmp(&b.0).then_with(|| point_order(&a.1, &b.1)) {
        Ordering::Less => b,
        _ => a,
    }
}

/// Coordinate ascent on the four real coordinates of `z`, halving the step
/// whenever no coordinate move improves `f`. Stays inside the sampling ball.
pub fn refine_maximum<F>(f: F, start: (f64, Point2)) -> (f64, Point2)
where
    F: Fn(Point2) -> f64,
{
    let cap = 1.0 - BALL_MARGIN;
    let (mut best, mut at) = start;
    let mut step = REFINE_INITIAL_STEP;
    for _ in 0..REFINE_STEPS {
        let mut improved = false;
        for coord in 0..4 {
            for dir in [1.0, -1.0] {
                let mut r = at.to_reals();
                r[coord] += dir * step;
                let cand = Point2::from_reals(r);
                if cand.norm() > cap {
                    continue;
                }
                let v = f(cand);
                if v > best {
                    best = v;
                    at = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, at)
}

fn check_field_normalized(h: &PowerSeriesMap2) -> Result<()> {
    if h.is_normalized_to(Complex64::new(-1.0, 0.0), NORMALIZATION_TOLERANCE) {
        Ok(())
    } else {
        Err(Error::NotNormalized)
    }
}

fn defect_unchecked(h: &PowerSeriesMap2, z: Point2) -> f64 {
    h.eval(z).inner(&z).re
}

/// `Re⟨H(z), z⟩`; nonpositive values satisfy the `M₋` condition at `z`.
pub fn herglotz_defect(h: &PowerSeriesMap2, z: Point2) -> Result<f64> {
    let n = z.norm();
    if !(n < 1.0) {
        return Err(Error::OutsideBall(n));
    }
    Ok(defect_unchecked(h, z))
}

/// Falsification sampler for `H ∈ M₋`.
pub fn check_mminus(h: &PowerSeriesMap2, cfg: &SamplingConfig) -> Result<MembershipReport> {
    check_field_normalized(h)?;
    let plan = SamplePlan::new(cfg)?;
    let f = |z| defect_unchecked(h, z);
    let worst = refine_maximum(f, plan.maximize(f));
    Ok(report_from(worst, plan.len(), cfg))
}

pub(crate) fn report_from(worst: (f64, Point2), samples: usize, cfg: &SamplingConfig) -> MembershipReport {
    let (max_defect, witness) = worst;
    let verdict = if max_defect > cfg.defect_tolerance || max_defect.is_nan() {
        Verdict::Reject
    } else {
        Verdict::Accept
    };
    MembershipReport {
        verdict,
        max_defect,
        witness,
        samples_used: samples,
        seed: cfg.rng_seed,
    }
}

/// `(−z₁ + a z₂², −z₂)`.
pub fn shear_field(a: Complex64, trunc_degree: u32) -> Result<PowerSeriesMap2> {
    if trunc_degree < 2 {
        return Err(Error::InvalidDegree(trunc_degree, 2));
    }
    let minus_one = Complex64::new(-1.0, 0.0);
    PowerSeriesMap2::from_terms(
        trunc_degree,
        [(MultiIndex::new(1, 0), minus_one), (MultiIndex::new(0, 2), a)],
        [(MultiIndex::new(0, 1), minus_one)],
    )
}

/// The shear part `(−z₁ + q¹₀,₂ z₂², −z₂)` of a normalized field.
pub fn sheared_field(h: &PowerSeriesMap2) -> Result<PowerSeriesMap2> {
    check_field_normalized(h)?;
    shear_field(q102(h), h.trunc_degree().max(2))
}

fn q102(h: &PowerSeriesMap2) -> Complex64 {
    h.coefficient(Component::First, (0, 2))
}

/// `−x² − y² + |q| x y²`: the θ-average of the defect along the torus
/// `z₁ = x e^{i(θ+η)}, z₂ = y e^{iθ/2}`.
pub fn averaged_defect_closed_form(q_abs: f64, x: f64, y: f64) -> f64 {
    -x * x - y * y + q_abs * x * y * y
}

/// Trapezoid-rule θ-average of the defect over `[0, 4π]`, with the phase
/// `η = arg q¹₀,₂` (zero when the coefficient vanishes).
pub fn fourier_average(h: &PowerSeriesMap2, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::InvalidArgument(format!("x = {x}, y = {y} must be nonnegative")));
    }
    let n = (x * x + y * y).sqrt();
    if !(n < 1.0) {
        return Err(Error::OutsideBall(n));
    }
    check_field_normalized(h)?;
    let q = q102(h);
    let eta = if q == Complex64::new(0.0, 0.0) { 0.0 } else { q.arg() };
    let sum: f64 = (0..FOURIER_NODES)
        .map(|k| {
            let theta = 4.0 * PI * k as f64 / FOURIER_NODES as f64;
            let z = Point2::new(
                Complex64::from_polar(x, theta + eta),
                Complex64::from_polar(y, theta / 2.0),
            );
            defect_unchecked(h, z)
        })
        .sum();
    Ok(sum / FOURIER_NODES as f64)
}

/// Minimizer found by [`golden_section_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMinimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for a unimodal `f` on `[lo, hi]`, stopping when the
/// bracket is narrower than `tol`.
pub fn golden_section_minimize<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> LineMinimum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while (hi - lo).abs() > tol && iterations < 200 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
        iterations += 1;
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
    LineMinimum { x, value, iterations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpBound {
    /// `inf (x² + y²)/(x y²)` over the positive quarter of the ball.
    pub value: f64,
    /// Attaining direction `(x, y)/r` on the unit sphere.
    pub direction: (f64, f64),
}

/// Shells where the reduced problem is solved; the last one is the closure
/// `r = 1`, where the infimum is approached.
const BOUND_SHELLS: [f64; 5] = [0.5, 0.9, 0.99, 0.999, 1.0];

/// Largest `|a|` with `−x² − y² + |a| x y² ≤ 0` on the ball.
///
/// On the shell `y² = r² − x²` the ratio is `r² / (x(r² − x²))`, minimized
/// over `x ∈ (0, r)` by golden-section search; the ratio decreases in `r`
/// so the infimum is the value on the closing shell.
pub fn sharp_shear_bound() -> SharpBound {
    let mut best: Option<(f64, f64, f64)> = None;
    for r in BOUND_SHELLS {
        let r2 = r * r;
        let ratio = |x: f64| r2 / (x * (r2 - x * x));
        let edge = 1e-9 * r;
        let m = golden_section_minimize(ratio, edge, r - edge, 1e-12);
        if best.is_none_or(|(v, _, _)| m.value < v) {
            best = Some((m.value, m.x, r));
        }
    }
    let (value, x, r) = best.expect("at least one shell");
    let y = (r * r - x * x).sqrt();
    SharpBound {
        value,
        direction: (x / r, y / r),
    }
}

/// Whether the shear field `(−z₁ + a z₂², −z₂)` belongs to `M₋`.
pub fn shear_membership_threshold(a: Complex64) -> Verdict {
    if a.norm() <= sharp_shear_bound().value + 1e-9 {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}
