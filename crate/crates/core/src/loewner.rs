//! Loewner ODE flows `∂φ_{s,t}/∂t = G(φ_{s,t}, t)`, recovery of chain maps
//! through the limit `e^t φ_{s,t}`, and the scalar flow of the shear
//! coefficient `a(s,t)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mminus::{
    check_mminus, shear_field, MembershipReport, SamplingConfig, NORMALIZATION_TOLERANCE, SHARP_CONSTANT,
};
use crate::numerics::{adaptive_simpson, dopri5, OdeOptions};
use crate::series::{MultiIndex, Point2, PowerSeriesMap2};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Horizon `T − s` used in place of `t → ∞`.
pub const DEFAULT_HORIZON: f64 = 20.0;

pub const STENCIL_RADIUS: f64 = 0.3;

/// Tolerance of the internal ODE-vs-quadrature cross-check.
pub const FLOW_CONSISTENCY: f64 = 1e-8;

type FieldFn = dyn Fn(f64) -> PowerSeriesMap2 + Send + Sync;

#[derive(Clone)]
enum FieldKind {
    Constant(PowerSeriesMap2),
    /// Right-continuous; `starts[0]` also covers earlier times.
    Piecewise {
        starts: Vec<f64>,
        values: Vec<PowerSeriesMap2>,
    },
    Callable {
        f: Arc<FieldFn>,
        breakpoints: Vec<f64>,
    },
}

/// A time-dependent field `t ↦ G(·, t)` with `G(0, t) = 0` and
/// `dG(·, t)₀ = −id`.
#[derive(Clone)]
pub struct HerglotzField {
    kind: FieldKind,
    mminus_checked: bool,
}

impl fmt::Debug for HerglotzField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            FieldKind::Constant(_) => "constant".to_string(),
            FieldKind::Piecewise { starts, .. } => format!("piecewise-constant({} segments)", starts.len()),
            FieldKind::Callable { breakpoints, .. } => format!("callable({} breakpoints)", breakpoints.len()),
        };
        f.debug_struct("HerglotzField")
            .field("kind", &kind)
            .field("mminus_checked", &self.mminus_checked)
            .finish()
    }
}

fn check_normalized(h: &PowerSeriesMap2) -> Result<()> {
    if h.is_normalized_to(Complex64::new(-1.0, 0.0), NORMALIZATION_TOLERANCE) {
        Ok(())
    } else {
        Err(Error::NotNormalized)
    }
}

impl HerglotzField {
    pub fn constant(h: PowerSeriesMap2) -> Result<Self> {
        check_normalized(&h)?;
        Ok(Self {
            kind: FieldKind::Constant(h),
            mminus_checked: false,
        })
    }

    /// Segments `(t_start, value)` with strictly increasing starts.
    pub fn piecewise(segments: Vec<(f64, PowerSeriesMap2)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("piecewise field needs a segment".into()));
        }
        let (starts, values): (Vec<_>, Vec<_>) = segments.into_iter().unzip();
        check_increasing(&starts)?;
        for v in &values {
            check_normalized(v)?;
        }
        Ok(Self {
            kind: FieldKind::Piecewise { starts, values },
            mminus_checked: false,
        })
    }

    /// A field given by a closure, continuous between the listed breakpoints.
    /// Normalization is checked at the breakpoints and at `t = 0`.
    pub fn callable<F>(f: F, breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> PowerSeriesMap2 + Send + Sync + 'static,
    {
        check_increasing(&breakpoints)?;
        for t in std::iter::once(0.0).chain(breakpoints.iter().copied()) {
            check_normalized(&f(t))?;
        }
        Ok(Self {
            kind: FieldKind::Callable {
                f: Arc::new(f),
                breakpoints,
            },
            mminus_checked: false,
        })
    }

    /// Shear field `(−z₁ + q(t) z₂², −z₂)` for a piecewise-constant `q`.
    pub fn shear_profile(q: &QProfile, trunc_degree: u32) -> Result<Self> {
        let segments = q
            .segments
            .iter()
            .map(|s| Ok((s.t_start, shear_field(s.value, trunc_degree)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::piecewise(segments)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FieldKind::Constant(_) => "constant",
            FieldKind::Piecewise { .. } => "piecewise-constant",
            FieldKind::Callable { .. } => "callable",
        }
    }

    pub fn mminus_checked(&self) -> bool {
        self.mminus_checked
    }

    /// Runs the `M₋` sampler on every distinct value (constant and
    /// piecewise kinds); the flag is set when all of them pass.
    pub fn verify_mminus(mut self, cfg: &SamplingConfig) -> Result<(Self, Vec<MembershipReport>)> {
        let reports = match &self.kind {
            FieldKind::Constant(h) => vec![check_mminus(h, cfg)?],
            FieldKind::Piecewise { values, .. } => values
                .iter()
                .map(|h| check_mminus(h, cfg))
                .collect::<Result<Vec<_>>>()?,
            FieldKind::Callable { .. } => {
                return Err(Error::InvalidArgument(
                    "callable fields cannot be sampled exhaustively".into(),
                ))
            }
        };
        self.mminus_checked = reports.iter().all(|r| r.verdict.is_accept());
        Ok((self, reports))
    }

    pub fn value(&self, t: f64) -> PowerSeriesMap2 {
        match &self.kind {
            FieldKind::Constant(h) => h.clone(),
            FieldKind::Piecewise { starts, values } => values[segment_index(starts, t)].clone(),
            FieldKind::Callable { f, .. } => f(t),
        }
    }

    pub fn trunc_degree(&self) -> u32 {
        match &self.kind {
            FieldKind::Constant(h) => h.trunc_degree(),
            FieldKind::Piecewise { values, .. } => values.iter().map(|v| v.trunc_degree()).min().unwrap_or(1),
            FieldKind::Callable { f, .. } => f(0.0).trunc_degree(),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match &self.kind {
            FieldKind::Constant(_) => &[],
            FieldKind::Piecewise { starts, .. } => starts,
            FieldKind::Callable { breakpoints, .. } => breakpoints,
        }
    }

    /// `[s, t]` cut at every breakpoint strictly inside it.
    fn pieces(&self, s: f64, t: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![s];
        cuts.extend(self.breakpoints().iter().copied().filter(|b| *b > s && *b < t));
        cuts.push(t);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Integrates `y' = rhs(t, y, G(·,t))` across `[s, t]`, never stepping
    /// across a breakpoint of the field.
    fn integrate_with<R>(&self, s: f64, t: f64, y0: Point2, opts: &OdeOptions, rhs: R) -> Result<Point2>
    where
        R: Fn(f64, Point2, &PowerSeriesMap2) -> Point2,
    {
        let mut y = y0;
        for (a, b) in self.pieces(s, t) {
            y = match &self.kind {
                FieldKind::Constant(h) => dopri5(|tt, yy| rhs(tt, yy, h), a, y, b, opts)?.0,
                FieldKind::Piecewise { starts, values } => {
                    let h = &values[segment_index(starts, a)];
                    dopri5(|tt, yy| rhs(tt, yy, h), a, y, b, opts)?.0
                }
                FieldKind::Callable { f, .. } => dopri5(|tt, yy| rhs(tt, yy, &f(tt)), a, y, b, opts)?.0,
            };
        }
        Ok(y)
    }
}

fn check_increasing(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "breakpoints must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn segment_index(starts: &[f64], t: f64) -> usize {
    starts.partition_point(|s| *s <= t).saturating_sub(1)
}

fn check_interval(s: f64, t: f64) -> Result<()> {
    if !(s >= 0.0 && t >= s && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 ≤ s ≤ t, got s = {s}, t = {t}")));
    }
    Ok(())
}

/// `φ_{s,t}(z)`: solution at time `t` of `∂φ/∂t = G(φ, t)`, `φ_{s,s}(z) = z`.
pub fn integrate_transition(g: &HerglotzField, s: f64, t: f64, z: Point2, tol: f64) -> Result<Point2> {
    check_interval(s, t)?;
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideBall(z.norm()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    g.integrate_with(s, t, z, &OdeOptions::with_tolerance(tol), |_, y, h| h.eval(y))
}

/// `e^{t−s} φ_{s,t}(z)`, integrated as `w' = w + e^{t−s} G(e^{s−t} w, t)` so
/// the state stays of unit size as `t` grows.
fn integrate_rescaled(g: &HerglotzField, s: f64, t: f64, z: Point2, tol: f64) -> Result<Point2> {
    g.integrate_with(s, t, z, &OdeOptions::with_tolerance(tol), |tt, w, h| {
        let grow = (tt - s).exp();
        let shrink = Complex64::new((s - tt).exp(), 0.0);
        w + h.eval(w.scale(shrink)).scale(Complex64::new(grow, 0.0))
    })
}

/// Fits the coefficients of `F` up to `degree` from its values on a torus of
/// radius `STENCIL_RADIUS`, by a 2-D discrete Fourier inversion. Exact when
/// `F` is a polynomial of degree at most `degree`.
pub fn fit_on_stencil<F>(f: F, degree: u32) -> Result<PowerSeriesMap2>
where
    F: Fn(Point2) -> Result<Point2> + Sync,
{
    if degree < 1 {
        return Err(Error::InvalidDegree(degree, 1));
    }
    let n = 2 * degree as usize + 1;
    let root = |k: usize| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            f(Point2::new(root(j) * STENCIL_RADIUS, root(k) * STENCIL_RADIUS))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for idx in MultiIndex::up_to(degree) {
        let (a1, a2) = (idx.a1 as usize, idx.a2 as usize);
        let mut acc = Point2::ORIGIN;
        for j in 0..n {
            for k in 0..n {
                let w = root((n * n - (a1 * j + a2 * k) % n) % n);
                acc = acc + values[j * n + k].scale(w);
            }
        }
        let norm = Complex64::new(1.0 / ((n * n) as f64 * STENCIL_RADIUS.powi(idx.degree() as i32)), 0.0);
        first.push((idx, acc.z1 * norm));
        second.push((idx, acc.z2 * norm));
    }
    PowerSeriesMap2::from_terms(degree, first, second)
}

/// `φ_{s,t}` as a reusable evaluator.
#[derive(Debug, Clone)]
pub struct TransitionMap {
    pub s: f64,
    pub t: f64,
    pub tol: f64,
    field: HerglotzField,
    pub recovered_series: Option<PowerSeriesMap2>,
}

impl TransitionMap {
    pub fn new(field: &HerglotzField, s: f64, t: f64, tol: f64) -> Result<Self> {
        check_interval(s, t)?;
        Ok(Self {
            s,
            t,
            tol,
            field: field.clone(),
            recovered_series: None,
        })
    }

    pub fn apply(&self, z: Point2) -> Result<Point2> {
        integrate_transition(&self.field, self.s, self.t, z, self.tol)
    }

    /// Fits and stores the Taylor coefficients of the flow up to `degree`.
    pub fn recover(mut self, degree: u32) -> Result<Self> {
        let series = fit_on_stencil(|z| self.apply(z), degree)?;
        self.recovered_series = Some(series);
        Ok(self)
    }
}

/// `f_s ≈ e^T φ_{s,T}`, recovered on a stencil up to `stencil_degree`.
pub fn recover_chain_map(g: &HerglotzField, s: f64, horizon_t: f64, stencil_degree: u32) -> Result<PowerSeriesMap2> {
    recover_chain_map_with_tol(g, s, horizon_t, stencil_degree, DEFAULT_TOLERANCE)
}

pub fn recover_chain_map_with_tol(
    g: &HerglotzField,
    s: f64,
    horizon_t: f64,
    stencil_degree: u32,
    tol: f64,
) -> Result<PowerSeriesMap2> {
    check_interval(s, horizon_t)?;
    if stencil_degree > g.trunc_degree() {
        return Err(Error::InvalidArgument(format!(
            "stencil degree {stencil_degree} exceeds field truncation degree {}",
            g.trunc_degree()
        )));
    }
    let es = Complex64::new(s.exp(), 0.0);
    fit_on_stencil(
        |z| Ok(integrate_rescaled(g, s, horizon_t, z, tol)?.scale(es)),
        stencil_degree,
    )
}

/// One segment of a piecewise-constant coefficient profile `q(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSegment {
    pub t_start: f64,
    pub value: Complex64,
}

#[derive(Serialize, Deserialize)]
struct QSegmentRecord {
    t_start: f64,
    value: [f64; 2],
}

impl Serialize for QSegment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QSegmentRecord {
            t_start: self.t_start,
            value: [self.value.re, self.value.im],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QSegment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QSegmentRecord::deserialize(d)?;
        Ok(QSegment {
            t_start: r.t_start,
            value: Complex64::new(r.value[0], r.value[1]),
        })
    }
}

/// Piecewise-constant, right-continuous `q(t)`; the first segment also
/// covers times before its start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QProfile {
    pub segments: Vec<QSegment>,
}

impl QProfile {
    pub fn new(segments: Vec<QSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("q profile needs a segment".into()));
        }
        let starts: Vec<f64> = segments.iter().map(|s| s.t_start).collect();
        check_increasing(&starts)?;
        if segments.iter().any(|s| !s.value.is_finite()) {
            return Err(Error::InvalidArgument("q values must be finite".into()));
        }
        Ok(Self { segments })
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            segments: vec![QSegment { t_start: 0.0, value }],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let segments: Vec<QSegment> = serde_json::from_str(text)?;
        Self::new(segments)
    }

    pub fn value_at(&self, t: f64) -> Complex64 {
        let idx = self.segments.partition_point(|s| s.t_start <= t).saturating_sub(1);
        self.segments[idx].value
    }

    pub fn max_abs(&self) -> f64 {
        self.segments.iter().map(|s| s.value.norm()).fold(0.0, f64::max)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.t_start).collect()
    }

    pub fn describe(&self) -> String {
        if self.segments.len() == 1 {
            format!("constant {}", self.segments[0].value)
        } else {
            format!("piecewise-constant, {} segments", self.segments.len())
        }
    }
}

/// `a(s,t)` for a given `q`, with both computed routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFlow {
    pub s: f64,
    pub t: f64,
    #[serde(serialize_with = "ser_complex")]
    pub a_st: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub a_ode: Complex64,
    pub envelope: f64,
    pub q_profile: String,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

pub fn shear_coefficient_flow(q: &QProfile, s: f64, t: f64) -> Result<CoefficientFlow> {
    shear_coefficient_flow_fn(&|tau| q.value_at(tau), &q.breakpoints(), s, t, q.describe())
}

/// `a(s,t) = e^{s−t} ∫_s^t q(τ) e^{s−τ} dτ` by adaptive quadrature, checked
/// against the ODE `∂a/∂t = −a + q(t) e^{2(s−t)}, a(s,s) = 0`.
pub fn shear_coefficient_flow_fn(
    q: &(dyn Fn(f64) -> Complex64 + Sync),
    breakpoints: &[f64],
    s: f64,
    t: f64,
    description: String,
) -> Result<CoefficientFlow> {
    check_interval(s, t)?;
    let mut cuts = vec![s];
    cuts.extend(breakpoints.iter().copied().filter(|b| *b > s && *b < t));
    cuts.push(t);

    let mut integral = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // left limit at the cut: q is right-continuous
        let upper = b - (b - a) * 1e-12;
        let inner = |tau: f64| q(tau.min(upper)) * (s - tau).exp();
        integral += adaptive_simpson(&inner, a, b, 1e-14)?;
    }
    let a_st = integral * (s - t).exp();

    let opts = OdeOptions {
        atol: 1e-14,
        rtol: 1e-11,
        ..OdeOptions::default()
    };
    let mut state = Point2::ORIGIN;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let upper = b - (b - a) * 1e-12;
        let rhs = |tt: f64, y: Point2| {
            Point2::new(
                -y.z1 + q(tt.min(upper)) * (2.0 * (s - tt)).exp(),
                Complex64::new(0.0, 0.0),
            )
        };
        state = dopri5(rhs, a, state, b, &opts)?.0;
    }
    let a_ode = state.z1;
    let gap = (a_ode - a_st).norm();
    if !(gap <= FLOW_CONSISTENCY) {
        return Err(Error::Inconsistent(gap));
    }
    Ok(CoefficientFlow {
        s,
        t,
        a_st,
        a_ode,
        envelope: envelope_bound(s, t),
        q_profile: description,
    })
}

/// `(3√3/2)·e^{s−t}(1 − e^{s−t})`, the largest `|a(s,t)|` reachable with
/// `|q| ≤ 3√3/2`.
pub fn envelope_bound(s: f64, t: f64) -> f64 {
    let e = (s - t).exp();
    SHARP_CONSTANT * e * (1.0 - e)
}
