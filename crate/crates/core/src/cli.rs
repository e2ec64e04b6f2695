//! Command-line front end.
//!
//! Every subcommand writes JSON (tagged with [`SCHEMA`]) or CSV to the
//! output stream. Exit codes: 0 success or PASS, 1 FAIL verdict, 2 usage or
//! input error. Floats are rounded to 15 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cfunction::{cplus_symbolic, evaluate, nonvanishing_scan, scan_with_tau, uniform_grid, Classification};
use crate::compact_duals::{branches_to, branching_set, enumerate_ktypes_containing, HighestWeight};
use crate::error::{Error, Result};
use crate::gap_params::{kappa0, kappa1, ssg_verdict, GapParameters, SpectrumEntry};
use crate::ktype_search::{construct_witness_ktype, default_bound, lambda_tau, minimal_ktypes};
use crate::laplace_sim::{
    compare_models, complex_grid, correlation, laplace_closed, laplace_numeric, pole_probe, rank_survey, rank_test,
    ProbeOptions, SpectralModel, TOL_RANK,
};
use crate::stieltjes::{invert_interval, transform, vanishing_detector, DetectorOptions, InversionOptions, RealLineMeasure};

pub const SCHEMA: &str = "rankone-gap/1";
pub const THREADS_ENV: &str = "RANKONE_GAP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "rankone-gap", version, about = "SO(n) duals, C-function scalars and spectral-gap numerics")]
struct Cli {
    /// Worker threads for scans (overrides RANKONE_GAP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Highest weights of SO(n).
    #[command(subcommand)]
    Duals(DualsCmd),
    /// λ_τ, witness and minimal K-types.
    #[command(subcommand)]
    Ktype(KtypeCmd),
    /// C-function scalars.
    #[command(subcommand)]
    Cfun(CfunCmd),
    /// Gap parameters and verdicts.
    #[command(subcommand)]
    Gap(GapCmd),
    /// Stieltjes transforms and inversion.
    #[command(subcommand)]
    Stieltjes(StieltjesCmd),
    /// Synthetic spectral models.
    #[command(subcommand)]
    Sim(SimCmd),
}

#[derive(Args, Debug)]
struct WeightArg {
    #[arg(long)]
    n: u32,
    /// Comma-separated entries (empty for SO(1)).
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    entries: String,
}

#[derive(Subcommand, Debug)]
enum DualsCmd {
    Validate(WeightArg),
    Dual(WeightArg),
    /// Restriction to SO(n−1), or a single containment check with --sigma.
    Branch {
        #[command(flatten)]
        w: WeightArg,
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
    },
    Dim(WeightArg),
    /// SO(n+1)-types containing the SO(n)-type given.
    Enum {
        #[command(flatten)]
        w: WeightArg,
        #[arg(long, allow_hyphen_values = true)]
        bound: i64,
    },
}

#[derive(Subcommand, Debug)]
enum KtypeCmd {
    Lambda {
        #[arg(long)]
        d: u32,
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
    },
    Witness {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        sigma: String,
    },
    Minimal {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        sigma: String,
        #[arg(long)]
        bound: Option<i64>,
    },
}

#[derive(Args, Debug)]
struct CfunArgs {
    #[arg(long)]
    d: u32,
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    sigma: String,
    /// Defaults to the witness K-type of σ.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CfunCmd {
    Expr(CfunArgs),
    Eval {
        #[command(flatten)]
        c: CfunArgs,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long)]
        json: bool,
    },
    /// With --tau, scans C₊(τ:σ;s); without, scans the witness against σ*.
    Scan {
        #[command(flatten)]
        c: CfunArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GapCmd {
    Params {
        #[arg(long)]
        kappa_gamma: f64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        delta: Option<f64>,
    },
    Verdict {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = 0.5)]
    y0: f64,
    #[arg(long, default_value_t = 12)]
    k_max: usize,
}

#[derive(Subcommand, Debug)]
enum StieltjesCmd {
    Transform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        z_re: f64,
        #[arg(long, allow_hyphen_values = true)]
        z_im: f64,
    },
    Invert {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        inv: InvertArgs,
    },
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        inv: InvertArgs,
    },
}

#[derive(Subcommand, Debug)]
enum SimCmd {
    Correlate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Laplace {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated real parts of the z grid.
        #[arg(long, allow_hyphen_values = true, default_value = "0.2,0.5,1,2")]
        re: String,
        /// Comma-separated imaginary parts of the z grid.
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        im: String,
        #[arg(long, default_value_t = 80.0)]
        t_max: f64,
    },
    Compare {
        #[arg(long)]
        model: PathBuf,
        /// Model for the closed form (defaults to --model).
        #[arg(long)]
        closed_model: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, default_value = "0.2,0.5,1,2")]
        re: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,0,1")]
        im: String,
        #[arg(long, default_value_t = 80.0)]
        t_max: f64,
    },
    Poles {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value = "0.5,0.1,0.01")]
        grid_y: String,
    },
    Rank {
        #[arg(long, conflicts_with = "random")]
        q: Option<PathBuf>,
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Input format for `gap verdict`.
#[derive(Serialize, Deserialize)]
pub struct SpectrumFile {
    pub d: u32,
    pub delta: f64,
    pub spectrum: Vec<SpectrumEntry>,
}

/// Input format for `sim rank --q`.
#[derive(Serialize, Deserialize)]
pub struct QFile {
    pub re: [[f64; 2]; 2],
    #[serde(default)]
    pub im: [[f64; 2]; 2],
}

enum Outcome {
    Pass,
    Fail,
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| usage(format!("cannot parse '{p}' in '{text}'"))))
        .collect()
}

fn weight(n: u32, entries: &str) -> Result<HighestWeight> {
    HighestWeight::new(n, parse_list(entries)?)
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// A plain number with 15 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round15(x))
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = serde_json::Number::from_f64(round15(x)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn with_schema(body: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), Value::String(SCHEMA.into()));
    match body {
        Value::Object(inner) => map.extend(inner),
        other => {
            map.insert("result".into(), other);
        }
    }
    Value::Object(map)
}

impl Ctx<'_> {
    fn json(&mut self, body: impl Serialize) -> Result<()> {
        let mut v = with_schema(serde_json::to_value(body).map_err(|e| usage(e.to_string()))?);
        round_value(&mut v);
        writeln!(self.out, "{v}").map_err(|e| usage(e.to_string()))
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| usage(e.to_string()))
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.err, "{text}");
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| usage(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| usage(e.to_string()))?;
    }
    w.into_inner().map_err(|e| usage(e.to_string()))
}

fn verdict(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn run_duals(cmd: DualsCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        DualsCmd::Validate(w) => match weight(w.n, &w.entries) {
            Ok(hw) => {
                ctx.json(json!({"valid": true, "weight": hw}))?;
                Ok(Outcome::Pass)
            }
            Err(e @ (Error::WrongLength { .. } | Error::OrderingViolation { .. })) => {
                let code = if matches!(e, Error::WrongLength { .. }) { "wrong_length" } else { "ordering_violation" };
                ctx.json(json!({"valid": false, "error": code, "message": e.to_string()}))?;
                Ok(Outcome::Fail)
            }
            Err(e) => Err(e),
        },
        DualsCmd::Dual(w) => {
            ctx.json(weight(w.n, &w.entries)?.dual())?;
            Ok(Outcome::Pass)
        }
        DualsCmd::Branch { w, sigma } => {
            let tau = weight(w.n, &w.entries)?;
            match sigma {
                Some(s) => {
                    let sigma = weight(w.n.saturating_sub(1), &s)?;
                    let contains = branches_to(&tau, &sigma)?;
                    ctx.json(json!({"tau": tau, "sigma": sigma, "contains": contains}))?;
                }
                None => {
                    let set = branching_set(&tau)?;
                    ctx.json(json!({"tau": tau, "branches": set}))?;
                }
            }
            Ok(Outcome::Pass)
        }
        DualsCmd::Dim(w) => {
            let hw = weight(w.n, &w.entries)?;
            let dim = hw.dimension();
            let value = match dim.to_u64() {
                Some(v) => json!(v),
                None => json!(dim.to_string()),
            };
            ctx.json(json!({"weight": hw, "dimension": value}))?;
            Ok(Outcome::Pass)
        }
        DualsCmd::Enum { w, bound } => {
            let sigma = weight(w.n, &w.entries)?;
            let list = enumerate_ktypes_containing(&sigma, bound)?;
            ctx.json(json!({"sigma": sigma, "bound": bound, "ktypes": list}))?;
            Ok(Outcome::Pass)
        }
    }
}

fn run_ktype(cmd: KtypeCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        KtypeCmd::Lambda { d, tau } => {
            let tau = weight(d + 1, &tau)?;
            let lam = lambda_tau(&tau, d)?;
            ctx.json(json!({"tau": tau, "d": d, "lambda": lam.to_string(), "lambda_f64": lam.to_f64()}))?;
            Ok(Outcome::Pass)
        }
        KtypeCmd::Witness { d, sigma } => {
            let sigma = weight(d, &sigma)?;
            ctx.json(construct_witness_ktype(&sigma, d)?)?;
            Ok(Outcome::Pass)
        }
        KtypeCmd::Minimal { d, sigma, bound } => {
            let sigma = weight(d, &sigma)?;
            let bound = bound.unwrap_or_else(|| default_bound(&sigma));
            let (mins, report) = minimal_ktypes(&sigma, d, bound)?;
            let ok = report.contains_sigma && report.contains_sigma_dual && report.is_minimal_over_bound;
            ctx.json(json!({"minimizers": mins, "report": report, "pass": ok}))?;
            Ok(verdict(ok))
        }
    }
}

fn cfun_pair(c: &CfunArgs) -> Result<(HighestWeight, HighestWeight)> {
    let sigma = weight(c.d, &c.sigma)?;
    let tau = match &c.tau {
        Some(t) => weight(c.d + 1, t)?,
        None => construct_witness_ktype(&sigma, c.d)?,
    };
    Ok((tau, sigma))
}

fn run_cfun(cmd: CfunCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        CfunCmd::Expr(c) => {
            let (tau, sigma) = cfun_pair(&c)?;
            ctx.line(&cplus_symbolic(&tau, &sigma, c.d)?.to_string())?;
            Ok(Outcome::Pass)
        }
        CfunCmd::Eval { c, s, json } => {
            let (tau, sigma) = cfun_pair(&c)?;
            let ev = evaluate(&cplus_symbolic(&tau, &sigma, c.d)?, s)?;
            if json {
                let value = if ev.value.is_finite() { json!(ev.value) } else { Value::Null };
                ctx.json(json!({"s": s, "value": value, "classification": ev.classification}))?;
            } else {
                ctx.line(&fmt_num(ev.value))?;
            }
            Ok(verdict(ev.classification != Classification::Pole))
        }
        CfunCmd::Scan { c, grid } => {
            if grid == 0 {
                return Err(usage("--grid must be positive"));
            }
            let points = uniform_grid(c.d, grid);
            let sigma = weight(c.d, &c.sigma)?;
            let report = match &c.tau {
                Some(t) => scan_with_tau(&weight(c.d + 1, t)?, &sigma, c.d, &points)?,
                None => nonvanishing_scan(&sigma, c.d, &points)?,
            };
            let rows = report
                .points
                .iter()
                .map(|p| vec![fmt_num(p.s), fmt_num(p.value), p.classification.to_string()])
                .collect();
            let bytes = csv_bytes(&["s", "value", "classification"], rows)?;
            ctx.out.write_all(&bytes).map_err(|e| usage(e.to_string()))?;
            ctx.note(&format!(
                "{} tau={} sigma={} min_abs={} zeros={} poles={} sign_changes={}",
                if report.pass { "PASS" } else { "FAIL" },
                report.tau,
                report.sigma,
                fmt_num(report.min_abs),
                report.zeros.len(),
                report.poles.len(),
                report.sign_changes
            ));
            Ok(verdict(report.pass))
        }
    }
}

fn run_gap(cmd: GapCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        GapCmd::Params { kappa_gamma, d, delta } => {
            match delta {
                Some(delta) => ctx.json(GapParameters::new(d, delta, kappa_gamma)?)?,
                None => {
                    let k0 = kappa0(kappa_gamma)?;
                    ctx.json(json!({"d": d, "kappa_gamma": kappa_gamma, "kappa0": k0, "kappa1": kappa1(k0, d)?}))?
                }
            }
            Ok(Outcome::Pass)
        }
        GapCmd::Verdict { model } => {
            let file: SpectrumFile = load(&model)?;
            let report = ssg_verdict(&file.spectrum, file.delta, file.d)?;
            let pass = report.verdict;
            ctx.json(report)?;
            Ok(verdict(pass))
        }
    }
}

fn inversion_opts(inv: &InvertArgs) -> InversionOptions {
    InversionOptions { y0: inv.y0, k_max: inv.k_max, ..InversionOptions::default() }
}

fn transform_fn(m: &RealLineMeasure) -> impl Fn(Complex64) -> Complex64 + Sync + '_ {
    move |z| transform(m, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

fn run_stieltjes(cmd: StieltjesCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        StieltjesCmd::Transform { model, z_re, z_im } => {
            let m: RealLineMeasure = load(&model)?;
            let v = transform(&m, Complex64::new(z_re, z_im))?;
            ctx.json(json!({"z": {"re": z_re, "im": z_im}, "value": {"re": v.re, "im": v.im}}))?;
            Ok(Outcome::Pass)
        }
        StieltjesCmd::Invert { model, inv } => {
            let m: RealLineMeasure = load(&model)?;
            let opts = inversion_opts(&inv);
            let (re_part, im_part) = (m.real_part(), m.imag_part());
            let re = invert_interval(transform_fn(&re_part), inv.a, inv.b, &opts)?;
            let im = invert_interval(transform_fn(&im_part), inv.a, inv.b, &opts)?;
            let exact = m.half_sum_mass(inv.a, inv.b);
            let ok = re.converged && im.converged;
            ctx.json(json!({
                "a": inv.a, "b": inv.b,
                "estimate": {"re": re.estimate, "im": im.estimate},
                "error_estimate": {"re": re.error_estimate, "im": im.error_estimate},
                "converged": ok,
                "exact_half_sum": {"re": exact.re, "im": exact.im},
            }))?;
            if !ok {
                ctx.note("low confidence: extrapolation did not settle");
            }
            Ok(Outcome::Pass)
        }
        StieltjesCmd::Detect { model, inv } => {
            let m: RealLineMeasure = load(&model)?;
            let opts = DetectorOptions { inversion: inversion_opts(&inv), ..DetectorOptions::default() };
            let (re_part, im_part) = (m.real_part(), m.imag_part());
            let report = vanishing_detector(transform_fn(&re_part), transform_fn(&im_part), inv.a, inv.b, &opts)?;
            ctx.json(report)?;
            Ok(Outcome::Pass)
        }
    }
}

fn run_sim(cmd: SimCmd, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        SimCmd::Correlate { model, t_max, dt, out } => {
            let m: SpectralModel = load(&model)?;
            if !(dt > 0.0 && t_max >= 0.0) {
                return Err(usage("need dt > 0 and t_max ≥ 0"));
            }
            let steps = (t_max / dt + 1e-9).floor() as usize;
            let rows = (0..=steps)
                .map(|k| {
                    let t = k as f64 * dt;
                    correlation(&m, t).map(|f| vec![fmt_num(t), fmt_num(f.re), fmt_num(f.im)])
                })
                .collect::<Result<Vec<_>>>()?;
            let bytes = csv_bytes(&["t", "re", "im"], rows)?;
            match out {
                Some(p) => fs::write(&p, bytes).map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => ctx.out.write_all(&bytes).map_err(|e| usage(e.to_string()))?,
            }
            Ok(Outcome::Pass)
        }
        SimCmd::Laplace { model, re, im, t_max } => {
            let m: SpectralModel = load(&model)?;
            let grid = complex_grid(&parse_list(&re)?, &parse_list(&im)?);
            let mut rows = Vec::new();
            for z in grid {
                let num = laplace_numeric(&m, z, t_max)?;
                let closed = laplace_closed(&m, z)?;
                rows.push(
                    [z.re, z.im, num.value.re, num.value.im, closed.re, closed.im, num.truncation_bound, num.quad_error]
                        .iter()
                        .map(|&x| fmt_num(x))
                        .collect(),
                );
            }
            let header = ["z_re", "z_im", "numeric_re", "numeric_im", "closed_re", "closed_im", "truncation_bound", "quad_error"];
            let bytes = csv_bytes(&header, rows)?;
            ctx.out.write_all(&bytes).map_err(|e| usage(e.to_string()))?;
            Ok(Outcome::Pass)
        }
        SimCmd::Compare { model, closed_model, re, im, t_max } => {
            let m: SpectralModel = load(&model)?;
            let closed = match closed_model {
                Some(p) => load(&p)?,
                None => m.clone(),
            };
            let grid = complex_grid(&parse_list(&re)?, &parse_list(&im)?);
            let report = compare_models(&m, &closed, &grid, t_max)?;
            let pass = report.pass;
            ctx.json(report)?;
            Ok(verdict(pass))
        }
        SimCmd::Poles { model, eta, grid_y } => {
            let m: SpectralModel = load(&model)?;
            let opts = ProbeOptions { grid_y: parse_list(&grid_y)?, ..ProbeOptions::default() };
            let report = pole_probe(&m, eta, &opts)?;
            let pass = report.pass;
            ctx.json(report)?;
            Ok(verdict(pass))
        }
        SimCmd::Rank { q, random, seed } => match (q, random) {
            (Some(path), None) => {
                let qf: QFile = load(&path)?;
                let m = [
                    [Complex64::new(qf.re[0][0], qf.im[0][0]), Complex64::new(qf.re[0][1], qf.im[0][1])],
                    [Complex64::new(qf.re[1][0], qf.im[1][0]), Complex64::new(qf.re[1][1], qf.im[1][1])],
                ];
                ctx.json(json!({"rank": rank_test(&m, TOL_RANK), "tol": TOL_RANK}))?;
                Ok(Outcome::Pass)
            }
            (None, Some(n)) => {
                let survey = rank_survey(seed, n, TOL_RANK);
                let pass = survey.pass;
                ctx.json(survey)?;
                Ok(verdict(pass))
            }
            _ => Err(usage("give exactly one of --q or --random")),
        },
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|_| usage(format!("{THREADS_ENV}={v} is not a count")))
        }
        _ => Ok(None),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run_with_io<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let (mut out_buf, mut err_buf) = (Vec::new(), Vec::new());
    let result = pool.install(|| {
        let mut ctx = Ctx { out: &mut out_buf, err: &mut err_buf };
        match cli.group {
            Group::Duals(c) => run_duals(c, &mut ctx),
            Group::Ktype(c) => run_ktype(c, &mut ctx),
            Group::Cfun(c) => run_cfun(c, &mut ctx),
            Group::Gap(c) => run_gap(c, &mut ctx),
            Group::Stieltjes(c) => run_stieltjes(c, &mut ctx),
            Group::Sim(c) => run_sim(c, &mut ctx),
        }
    });
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Runs against the process's stdout and stderr.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run_with_io(std::env::args_os(), &mut out, &mut err)
}
