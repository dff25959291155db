//! Dormand–Prince 5(4) integrator on `C²` and adaptive Simpson quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Defaults to a hundredth of the interval.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights minus embedded 4th-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn axpy(y: Point2, terms: &[(f64, Point2)], h: f64) -> Point2 {
    let mut out = y;
    for (a, k) in terms {
        if *a != 0.0 {
            out = out + k.scale(Complex64::new(h * a, 0.0));
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 ≥ t0` with an adaptive
/// Dormand–Prince pair. The step never crosses `t1`, so callers split the
/// interval at discontinuities of `f` in `t`.
pub fn dopri5<F>(f: F, t0: f64, y0: Point2, t1: f64, opts: &OdeOptions) -> Result<(Point2, OdeStats)>
where
    F: Fn(f64, Point2) -> Point2,
{
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((y0, stats));
    }
    if !(span > 0.0) {
        return Err(Error::InvalidArgument(format!("integration interval [{t0}, {t1}]")));
    }
    let mut h = opts.initial_step.unwrap_or(span / 100.0).min(span);
    let (mut t, mut y) = (t0, y0);
    let mut k1 = f(t, y);
    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) && !last {
            return Err(Error::StepUnderflow { t, h });
        }
        let mut k = [k1; 7];
        for s in 1..7 {
            let terms: Vec<(f64, Point2)> = (0..s).map(|j| (A[s][j], k[j])).collect();
            k[s] = f(t + C[s] * h, axpy(y, &terms, h));
        }
        // FSAL: the 7th stage is evaluated at the 5th-order solution
        let y_new = axpy(y, &(0..6).map(|j| (A[6][j], k[j])).collect::<Vec<_>>(), h);
        let err_vec = axpy(Point2::ORIGIN, &(0..7).map(|j| (E[j], k[j])).collect::<Vec<_>>(), h);
        let (ya, yb, ee) = (y.to_reals(), y_new.to_reals(), err_vec.to_reals());
        let err = (0..4)
            .map(|i| ee[i].abs() / (opts.atol + opts.rtol * ya[i].abs().max(yb[i].abs())))
            .fold(0.0, f64::max);
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k[6];
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let scale = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= scale;
    }
    Ok((y, stats))
}

/// Adaptive Simpson rule for a complex integrand on `[a, b]`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(Error::QuadratureDiverged(a, b));
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}
