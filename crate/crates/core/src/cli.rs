//! Command-line front end. Exit codes: 0 accept/success, 1 reject or
//! violation found, 2 usage or input error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{check_starlike, growth_check, phi_map, reproduce_with_coefficient};
use crate::error::{Error, Result};
use crate::loewner::{
    envelope_bound, integrate_transition, recover_chain_map_with_tol, shear_coefficient_flow, HerglotzField, QProfile,
    DEFAULT_HORIZON, DEFAULT_TOLERANCE,
};
use crate::mminus::{
    averaged_defect_closed_form, check_mminus, sharp_shear_bound, shear_field, SamplingConfig, SHARP_CONSTANT,
};
use crate::series::{Point2, PowerSeriesMap2, DEFAULT_TRUNC_DEGREE};
use crate::shear::{shear_of, shear_to_series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Envelope,
    DefectSlice,
    FlowTrajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample Re<H(z), z> <= 0 for a normalized field H (--in or --a).
    CheckMminus,
    /// Replace a map by its shear part (lambda z1 + A z2^2, mu z2).
    Shear,
    /// Largest |a| with (-z1 + a z2^2, -z2) in M-.
    Bound,
    /// Transition map (with --z) or chain map recovered from a field.
    Evolve,
    /// Sample the starlikeness functional of a map (--in or --a).
    Starlike,
    /// Screen a map against the growth envelope |z|/(1-|z|)^2.
    Growth,
    /// Shear coefficient a(s,t) for a q profile (--in) or constant q (--a).
    Flow,
    /// End-to-end checks of the sharp bound and its extremal map.
    Reproduce,
    /// Emit CSV plot data (--kind).
    Plot,
}

#[derive(Debug, Parser)]
#[command(
    name = "loewner",
    version,
    about = "Shearing of Loewner chains on the unit ball of C^2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct Options {
    /// Input file (series, or q profile for `flow`).
    #[arg(long = "in", global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long = "out", global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Seed of the random sample stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Defect tolerance for sampling checks; ODE tolerance for evolve/flow.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Truncation degree of generated maps, or stencil degree for `evolve`.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Start time.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// End time, or horizon of chain recovery.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Shear coefficient as real and imaginary parts.
    #[arg(long, global = true, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub a: Option<Vec<f64>>,
    /// Number of random samples added to the grid.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Initial point as RE1 IM1 RE2 IM2.
    #[arg(long, global = true, num_args = 4, allow_negative_numbers = true)]
    pub z: Option<Vec<f64>>,
    /// Plot data to emit.
    #[arg(long, global = true, value_enum)]
    pub kind: Option<PlotKind>,
    /// Row spacing of plot data.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Sphere radius of the defect slice.
    #[arg(long, global = true)]
    pub r: Option<f64>,
}

/// Effective configuration, echoed into every report.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    subcommand: Command,
    #[serde(flatten)]
    options: &'a Options,
    sampling: Option<SamplingConfig>,
}

struct Outcome {
    body: String,
    code: i32,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit(&cli.opts, &outcome.body) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(opts: &Options, body: &str) -> std::io::Result<()> {
    match &opts.output {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().write_all(body.as_bytes()),
    }
}

fn read_input(opts: &Options) -> Result<Option<String>> {
    opts.input
        .as_ref()
        .map(|p| fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display()))))
        .transpose()
}

fn coefficient(opts: &Options) -> Option<Complex64> {
    opts.a.as_ref().map(|v| Complex64::new(v[0], v[1]))
}

fn degree(opts: &Options) -> u32 {
    opts.degree.unwrap_or(DEFAULT_TRUNC_DEGREE)
}

fn sampling(opts: &Options) -> SamplingConfig {
    let mut cfg = SamplingConfig {
        rng_seed: opts.seed,
        ..SamplingConfig::default()
    };
    if let Some(tol) = opts.tol {
        cfg.defect_tolerance = tol;
    }
    if let Some(n) = opts.samples {
        cfg.random_samples = n;
    }
    cfg
}

/// Field from `--in`, else the shear field of `--a`.
fn load_field(opts: &Options) -> Result<PowerSeriesMap2> {
    if let Some(text) = read_input(opts)? {
        return PowerSeriesMap2::from_json(&text);
    }
    match coefficient(opts) {
        Some(a) => shear_field(a, degree(opts).max(2)),
        None => Err(Error::InvalidArgument("need --in PATH or --a RE IM".into())),
    }
}

/// Map from `--in`, else the shear `(z₁ + a z₂², z₂)` of `--a`.
fn load_map(opts: &Options) -> Result<PowerSeriesMap2> {
    if let Some(text) = read_input(opts)? {
        return PowerSeriesMap2::from_json(&text);
    }
    match coefficient(opts) {
        Some(a) => phi_map(a, degree(opts).max(2)),
        None => Err(Error::InvalidArgument("need --in PATH or --a RE IM".into())),
    }
}

fn report_json<T: Serialize>(cli: &Cli, sampling: Option<SamplingConfig>, key: &str, value: &T) -> Result<String> {
    let config = RunConfig {
        subcommand: cli.command,
        options: &cli.opts,
        sampling,
    };
    let mut out = serde_json::to_string_pretty(&json!({ "config": config, key: value }))?;
    out.push('\n');
    Ok(out)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    let text = opts.format == Format::Text;
    match cli.command {
        Command::CheckMminus => {
            let h = load_field(opts)?;
            let cfg = sampling(opts);
            let report = check_mminus(&h, &cfg)?;
            let code = if report.verdict.is_accept() {
                EXIT_OK
            } else {
                EXIT_REJECT
            };
            let body = if text {
                format!(
                    "M- check: {}\nmax defect: {:e}\nwitness: {}\nsamples: {} (seed {})\n",
                    report.verdict.as_str(),
                    report.max_defect,
                    report.witness,
                    report.samples_used,
                    report.seed
                )
            } else {
                report_json(cli, Some(cfg), "report", &report)?
            };
            Ok(Outcome { body, code })
        }
        Command::Shear => {
            let text_in = read_input(opts)?.ok_or_else(|| Error::InvalidArgument("shear needs --in PATH".into()))?;
            let f = PowerSeriesMap2::from_json(&text_in)?;
            let s = shear_of(&f)?;
            let sheared = shear_to_series(&s, f.trunc_degree().max(2))?;
            let body = if text {
                format!("lambda = {}\nmu = {}\nA = {}\n", s.lambda, s.mu, s.a)
            } else {
                let mut out = sheared.to_json();
                out.push('\n');
                out
            };
            Ok(Outcome { body, code: EXIT_OK })
        }
        Command::Bound => {
            let b = sharp_shear_bound();
            let body = if text {
                format!(
                    "bound: {:.15}\ndirection: ({:.12}, {:.12})\n",
                    b.value, b.direction.0, b.direction.1
                )
            } else {
                report_json(
                    cli,
                    None,
                    "bound",
                    &json!({ "value": b.value, "direction": b.direction, "expected": SHARP_CONSTANT }),
                )?
            };
            Ok(Outcome { body, code: EXIT_OK })
        }
        Command::Evolve => evolve(cli),
        Command::Starlike => {
            let f = load_map(opts)?;
            let cfg = sampling(opts);
            let report = check_starlike(&f, &cfg)?;
            let code = if report.verdict.is_accept() {
                EXIT_OK
            } else {
                EXIT_REJECT
            };
            let body = if text {
                format!(
                    "starlike: {}\nmin margin: {:e}\nwitness: {}\nsamples: {}\n",
                    report.verdict.as_str(),
                    report.min_margin,
                    report.witness,
                    report.samples_used
                )
            } else {
                report_json(cli, Some(cfg), "report", &report)?
            };
            Ok(Outcome { body, code })
        }
        Command::Growth => {
            let f = load_map(opts)?;
            let cfg = sampling(opts);
            let report = growth_check(&f, &cfg)?;
            let code = if report.verdict.is_accept() {
                EXIT_OK
            } else {
                EXIT_REJECT
            };
            let body = if text {
                format!(
                    "growth screen: {}\nmax excess: {:e}\nwitness: {}\nsamples: {}\n",
                    report.verdict.as_str(),
                    report.max_defect,
                    report.witness,
                    report.samples_used
                )
            } else {
                report_json(cli, Some(cfg), "report", &report)?
            };
            Ok(Outcome { body, code })
        }
        Command::Flow => {
            let q = match (read_input(opts)?, coefficient(opts)) {
                (Some(text_in), _) => QProfile::from_json(&text_in)?,
                (None, Some(a)) => QProfile::constant(a),
                (None, None) => return Err(Error::InvalidArgument("flow needs --in PATH or --a RE IM".into())),
            };
            let s = opts.s.unwrap_or(0.0);
            let t = opts.t.unwrap_or(s + 1.0);
            let flow = shear_coefficient_flow(&q, s, t)?;
            let bounded_q = q.max_abs() <= SHARP_CONSTANT + 1e-12;
            let within = flow.a_st.norm() <= flow.envelope + 1e-9;
            let code = if bounded_q && !within { EXIT_REJECT } else { EXIT_OK };
            let body = if text {
                format!(
                    "a({s}, {t}) = {}\nODE check: {}\nenvelope: {:.15}\nscaled e^t a: {}\n",
                    flow.a_st,
                    flow.a_ode,
                    flow.envelope,
                    flow.a_st * t.exp()
                )
            } else {
                report_json(cli, None, "flow", &json!({ "result": flow, "within_envelope": within }))?
            };
            Ok(Outcome { body, code })
        }
        Command::Reproduce => {
            let cfg = sampling(opts);
            let a = coefficient(opts).unwrap_or(Complex64::new(SHARP_CONSTANT, 0.0));
            let report = reproduce_with_coefficient(a, &cfg)?;
            let code = if report.all_passed { EXIT_OK } else { EXIT_REJECT };
            let body = if text {
                report.render_text()
            } else {
                report_json(cli, Some(cfg), "report", &report)?
            };
            Ok(Outcome { body, code })
        }
        Command::Plot => Ok(Outcome {
            body: plot(opts)?,
            code: EXIT_OK,
        }),
    }
}

fn evolve(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    let h = load_field(opts)?;
    let field = HerglotzField::constant(h)?;
    let s = opts.s.unwrap_or(0.0);
    let tol = opts.tol.unwrap_or(DEFAULT_TOLERANCE);
    if let Some(z) = &opts.z {
        let z = Point2::from_reals([z[0], z[1], z[2], z[3]]);
        let t = opts
            .t
            .ok_or_else(|| Error::InvalidArgument("transition map needs --t".into()))?;
        let w = integrate_transition(&field, s, t, z, tol)?;
        let body = if opts.format == Format::Text {
            format!("phi_{{{s},{t}}}({z}) = {w}\n")
        } else {
            report_json(cli, None, "transition", &json!({ "s": s, "t": t, "z": z, "value": w }))?
        };
        return Ok(Outcome { body, code: EXIT_OK });
    }
    let horizon = opts.t.unwrap_or(s + DEFAULT_HORIZON);
    let stencil = opts.degree.unwrap_or(4).min(field.trunc_degree());
    let chain = recover_chain_map_with_tol(&field, s, horizon, stencil, tol)?;
    let normalization_error = {
        let lin = chain.linear_part();
        let es = Complex64::new(s.exp(), 0.0);
        [
            (lin[0][0] - es).norm(),
            (lin[1][1] - es).norm(),
            lin[0][1].norm(),
            lin[1][0].norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    };
    let body = if opts.format == Format::Text {
        let mut out = format!("chain map at s = {s} (horizon {horizon}, stencil degree {stencil})\n");
        for (label, comp) in [("f1", crate::Component::First), ("f2", crate::Component::Second)] {
            for (k, c) in chain.terms(comp).filter(|(_, c)| c.norm() > 1e-12) {
                let _ = writeln!(out, "{label} {k}: {c}");
            }
        }
        let _ = writeln!(out, "normalization error: {normalization_error:e}");
        out
    } else {
        report_json(
            cli,
            None,
            "chain",
            &json!({ "s": s, "horizon": horizon, "series": chain, "normalization_error": normalization_error }),
        )?
    };
    Ok(Outcome { body, code: EXIT_OK })
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "invalid range [{start}, {end}] with step {step}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(Error::InvalidArgument("too many plot rows".into()));
    }
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// Column-oriented CSV with a header row and 17 significant digits.
pub fn plot(opts: &Options) -> Result<String> {
    let kind = opts
        .kind
        .ok_or_else(|| Error::InvalidArgument("plot needs --kind envelope|defect-slice|flow-trajectory".into()))?;
    let mut out = String::new();
    match kind {
        PlotKind::Envelope => {
            let s = opts.s.unwrap_or(0.0);
            let t_end = opts.t.unwrap_or(s + 10.0);
            if s < 0.0 {
                return Err(Error::InvalidArgument("s must be nonnegative".into()));
            }
            out.push_str("t,envelope,scaled_envelope\n");
            for t in grid(s, t_end, opts.step.unwrap_or(0.01))? {
                let e = envelope_bound(s, t);
                let _ = writeln!(out, "{},{},{}", fmt17(t), fmt17(e), fmt17(t.exp() * e));
            }
        }
        PlotKind::DefectSlice => {
            let a = coefficient(opts).unwrap_or(Complex64::new(SHARP_CONSTANT, 0.0));
            let r = opts.r.unwrap_or(0.999);
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidArgument(format!("slice radius {r} must lie in (0, 1)")));
            }
            out.push_str("x,y,defect\n");
            for x in grid(0.0, r, opts.step.unwrap_or(r / 1000.0))? {
                let x = x.min(r);
                let y = (r * r - x * x).max(0.0).sqrt();
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    fmt17(x),
                    fmt17(y),
                    fmt17(averaged_defect_closed_form(a.norm(), x, y))
                );
            }
        }
        PlotKind::FlowTrajectory => {
            let a = coefficient(opts).unwrap_or(Complex64::new(SHARP_CONSTANT, 0.0));
            let field = HerglotzField::constant(shear_field(a, degree(opts).max(2))?)?;
            let s = opts.s.unwrap_or(0.0);
            let t_end = opts.t.unwrap_or(s + 5.0);
            let z0 = opts
                .z
                .as_ref()
                .map(|z| Point2::from_reals([z[0], z[1], z[2], z[3]]))
                .unwrap_or(Point2::real(0.5, 0.5));
            let tol = opts.tol.unwrap_or(DEFAULT_TOLERANCE);
            out.push_str("t,re_z1,im_z1,re_z2,im_z2\n");
            let times = grid(s, t_end, opts.step.unwrap_or(0.05))?;
            let mut z = z0;
            let mut prev = s;
            for t in times {
                z = integrate_transition(&field, prev, t, z, tol)?;
                prev = t;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt17(t),
                    fmt17(z.z1.re),
                    fmt17(z.z1.im),
                    fmt17(z.z2.re),
                    fmt17(z.z2.im)
                );
            }
        }
    }
    Ok(out)
}
