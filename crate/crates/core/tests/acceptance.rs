//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line
//! with its measured value and runtime; the target exits nonzero if any
//! line fails. It runs without the libtest harness so the lines are always
//! shown.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{c, point_in_ball, random_hd, random_normal_field};
use loewner_core::analysis::{check_starlike, functional_l102, growth_check, phi_map, starlike_defect};
use loewner_core::loewner::{
    envelope_bound, integrate_transition, recover_chain_map, shear_coefficient_flow, HerglotzField, QProfile, QSegment,
};
use loewner_core::mminus::{
    check_mminus, fourier_average, herglotz_defect, sharp_shear_bound, shear_field, SamplingConfig, Verdict,
    SHARP_CONSTANT,
};
use loewner_core::shear::{shear_compose, shear_of};
use loewner_core::{Component, MultiIndex, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sharp_bound() -> Outcome {
    let b = sharp_shear_bound();
    let err = (b.value - SHARP_CONSTANT).abs();
    ensure(err <= 1e-9, || format!("bound {} off by {err:e}", b.value))?;
    // brute force over 0 < x < r ≤ 1 on a 1e-4 lattice
    let h: f64 = 1e-4;
    let n = (1.0 / h).round() as usize;
    let mut grid_min = f64::INFINITY;
    for i in 1..=n {
        let r = i as f64 * h;
        let r2 = r * r;
        for j in 1..i {
            let x = j as f64 * h;
            let v = r2 / (x * (r2 - x * x));
            if v < grid_min {
                grid_min = v;
            }
        }
    }
    let gap = (grid_min - b.value).abs();
    ensure(gap <= 1e-6, || format!("grid minimum {grid_min} differs by {gap:e}"))?;
    Ok(format!(
        "bound = {:.15}, |err| = {err:.1e}, grid gap = {gap:.1e}",
        b.value
    ))
}

fn extremal_membership() -> Outcome {
    let cfg = SamplingConfig::default();
    let h_phi = shear_field(c(SHARP_CONSTANT, 0.0), 2).map_err(|e| e.to_string())?;
    let rep = check_mminus(&h_phi, &cfg).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Accept && rep.max_defect <= 1e-12, || {
        format!("{rep:?}")
    })?;
    ensure(rep.samples_used >= 100_000, || {
        format!("only {} samples", rep.samples_used)
    })?;
    let h_bad = shear_field(c(2.7, 0.0), 2).map_err(|e| e.to_string())?;
    let bad = check_mminus(&h_bad, &cfg).map_err(|e| e.to_string())?;
    let witness_defect = herglotz_defect(&h_bad, bad.witness).map_err(|e| e.to_string())?;
    ensure(bad.verdict == Verdict::Reject && witness_defect > 1e-3, || {
        format!("{bad:?}")
    })?;
    Ok(format!(
        "max defect {:.2e} over {} samples; a = 2.7 witness defect {witness_defect:.4e}",
        rep.max_defect, rep.samples_used
    ))
}

fn fourier_averaging() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let deg = rng.gen_range(2..=8);
        let h = random_normal_field(&mut rng, 8, deg);
        let q = h.coefficient(Component::First, MultiIndex::new(0, 2)).norm();
        for _ in 0..20 {
            let (x, y) = loop {
                let (x, y) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                if x * x + y * y < 1.0 {
                    break (x, y);
                }
            };
            let avg = fourier_average(&h, x, y).map_err(|e| e.to_string())?;
            worst = worst.max((avg - (-x * x - y * y + q * x * y * y)).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e} over 1000 points"))
}

fn shearing_composition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.gen_range(2..=8);
        let h = random_hd(&mut rng, d, d);
        let g = random_hd(&mut rng, d, d);
        let hg = h.compose(&g).map_err(|e| e.to_string())?;
        let lhs = shear_of(&hg).map_err(|e| e.to_string())?;
        let rhs = shear_compose(
            &shear_of(&h).map_err(|e| e.to_string())?,
            &shear_of(&g).map_err(|e| e.to_string())?,
        );
        worst = worst.max(lhs.max_diff(&rhs));
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e} over 100 pairs"))
}

fn closed_form_transition(s: f64, t: f64, z: Point2) -> Point2 {
    let e = (s - t).exp();
    Point2::new(e * z.z1 + SHARP_CONSTANT * e * (1.0 - e) * z.z2 * z.z2, e * z.z2)
}

fn ode_closed_form() -> Outcome {
    let g = HerglotzField::constant(shear_field(c(SHARP_CONSTANT, 0.0), 2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut closed, mut semigroup): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let s = rng.gen_range(0.0..5.0);
        let t = s + rng.gen_range(0.0..5.0);
        let u = rng.gen_range(s..=t);
        let z = point_in_ball(&mut rng, 0.99);
        let w = integrate_transition(&g, s, t, z, 1e-12).map_err(|e| e.to_string())?;
        closed = closed.max(w.dist(&closed_form_transition(s, t, z)));
        let mid = integrate_transition(&g, s, u, z, 1e-12).map_err(|e| e.to_string())?;
        let w2 = integrate_transition(&g, u, t, mid, 1e-12).map_err(|e| e.to_string())?;
        semigroup = semigroup.max(w2.dist(&w));
    }
    ensure(closed <= 1e-8 && semigroup <= 1e-8, || {
        format!("closed form {closed:e}, semigroup {semigroup:e}")
    })?;
    Ok(format!("closed form {closed:.2e}, semigroup {semigroup:.2e}"))
}

fn chain_recovery() -> Outcome {
    let g = HerglotzField::constant(shear_field(c(SHARP_CONSTANT, 0.0), 4).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let f0 = recover_chain_map(&g, 0.0, 20.0, 4).map_err(|e| e.to_string())?;
    let phi = phi_map(c(SHARP_CONSTANT, 0.0), 4).map_err(|e| e.to_string())?;
    let (mut on, mut off): (f64, f64) = (0.0, 0.0);
    for comp in [Component::First, Component::Second] {
        for idx in MultiIndex::up_to(4) {
            let diff = (f0.coefficient(comp, idx) - phi.coefficient(comp, idx)).norm();
            if phi.coefficient(comp, idx).norm() > 0.0 {
                on = on.max(diff);
            } else {
                off = off.max(diff);
            }
        }
    }
    ensure(on <= 1e-7 && off <= 1e-8, || {
        format!("shear coefficients {on:e}, off-shear {off:e}")
    })?;
    Ok(format!("shear coefficients {on:.2e}, off-shear {off:.2e}"))
}

fn coefficient_flow() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut excess, mut mismatch) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..20 {
        let pieces = rng.gen_range(1..=6);
        let mut starts: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..10.0)).collect();
        starts.sort_by(f64::total_cmp);
        starts[0] = 0.0;
        starts.dedup();
        let segments = starts
            .into_iter()
            .map(|t_start| QSegment {
                t_start,
                value: common::unit_disk(&mut rng) * SHARP_CONSTANT,
            })
            .collect();
        let q = QProfile::new(segments).map_err(|e| e.to_string())?;
        let s = rng.gen_range(0.0..8.0);
        let t = s + rng.gen_range(0.0..6.0);
        let flow = shear_coefficient_flow(&q, s, t).map_err(|e| e.to_string())?;
        excess = excess.max(flow.a_st.norm() - envelope_bound(s, t));
        mismatch = mismatch.max((flow.a_st - flow.a_ode).norm());
    }
    ensure(excess <= 1e-9 && mismatch <= 1e-8, || {
        format!("envelope excess {excess:e}, mismatch {mismatch:e}")
    })?;
    let flow =
        shear_coefficient_flow(&QProfile::constant(c(SHARP_CONSTANT, 0.0)), 0.0, 20.0).map_err(|e| e.to_string())?;
    let limit = (flow.a_st * 20f64.exp()).norm();
    let gap = (limit - SHARP_CONSTANT).abs();
    ensure(gap <= 1e-7, || format!("e^20 a(0,20) = {limit}, gap {gap:e}"))?;
    Ok(format!(
        "envelope excess {excess:.2e}, route mismatch {mismatch:.2e}, limit gap {gap:.2e}"
    ))
}

fn starlikeness() -> Outcome {
    let cfg = SamplingConfig::default();
    let phi = phi_map(c(SHARP_CONSTANT, 0.0), 2).map_err(|e| e.to_string())?;
    let rep = check_starlike(&phi, &cfg).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Accept && rep.min_margin >= -1e-12, || {
        format!("{rep:?}")
    })?;
    let mut slack = f64::INFINITY;
    for i in 1..=200 {
        let r = i as f64 / 200.0 * (1.0 - 1e-6);
        for j in 0..=200 {
            let psi = j as f64 / 200.0 * std::f64::consts::FRAC_PI_2;
            let z = Point2::real(r * psi.cos(), r * psi.sin());
            let margin = starlike_defect(&phi, z).map_err(|e| e.to_string())?;
            slack = slack.min(margin - r * r * (1.0 - r));
        }
    }
    ensure(slack >= -1e-10, || format!("real-slice slack {slack:e}"))?;
    let phi3 = phi_map(c(3.0, 0.0), 2).map_err(|e| e.to_string())?;
    let bad = check_starlike(&phi3, &cfg).map_err(|e| e.to_string())?;
    ensure(bad.verdict == Verdict::Reject, || format!("{bad:?}"))?;
    Ok(format!(
        "min margin {:.2e}, real-slice slack {slack:.2e}, a = 3 margin {:.4e}",
        rep.min_margin, bad.min_margin
    ))
}

fn functional_sharpness() -> Outcome {
    let phi = phi_map(c(SHARP_CONSTANT, 0.0), 2).map_err(|e| e.to_string())?;
    let value = functional_l102(&phi);
    let bound = sharp_shear_bound().value;
    let gap = (value - c(bound, 0.0)).norm();
    ensure(gap <= 1e-8, || format!("functional {value}, bound {bound}"))?;
    let out = Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(["reproduce", "--format", "text"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.code() == Some(0), || {
        format!("reproduce exited {:?}:\n{text}", out.status.code())
    })?;
    ensure(!text.contains("[FAIL]") && text.contains("[PASS]"), || text.to_string())?;
    Ok(format!(
        "functional gap {gap:.2e}, reproduce: {} checks green",
        text.matches("[PASS]").count()
    ))
}

fn growth_screen() -> Outcome {
    let cfg = SamplingConfig::default();
    let big = phi_map(c(2.0 * 15f64.sqrt(), 0.0), 2).map_err(|e| e.to_string())?;
    let bad = growth_check(&big, &cfg).map_err(|e| e.to_string())?;
    let w = bad.witness;
    let r = w.norm();
    let excess = big.eval(w).norm() - r / ((1.0 - r) * (1.0 - r));
    ensure(bad.verdict == Verdict::Reject && excess > 0.0, || format!("{bad:?}"))?;
    let phi = phi_map(c(SHARP_CONSTANT, 0.0), 2).map_err(|e| e.to_string())?;
    let good = growth_check(&phi, &cfg).map_err(|e| e.to_string())?;
    ensure(good.verdict == Verdict::Accept, || format!("{good:?}"))?;
    Ok(format!(
        "witness {w} exceeds envelope by {excess:.4e}; extremal map max excess {:.2e}",
        good.max_defect
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("sharp shear bound", 1_000, sharp_bound),
        ("extremal field membership", 5_000, extremal_membership),
        ("Fourier averaging identity", 5_000, fourier_averaging),
        ("shearing composition identity", 1_000, shearing_composition),
        ("Loewner ODE closed form", 5_000, ode_closed_form),
        ("chain map recovery", 5_000, chain_recovery),
        ("shear coefficient flow", 5_000, coefficient_flow),
        ("starlikeness of extremal map", 5_000, starlikeness),
        ("functional sharpness", 15_000, functional_sharpness),
        ("growth screening", 2_000, growth_screen),
    ];
    let mut failures = Vec::new();
    for (i, (name, limit_ms, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let limit = Duration::from_millis(limit_ms);
        let (passed, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {limit:?}")),
            Err(e) => (false, e),
        };
        println!(
            "{} {:>2} {name}: {detail} [{:.3} s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
        if !passed {
            failures.push(name);
        }
    }
    if !failures.is_empty() {
        eprintln!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
