//! Synthetic spectral models, their correlation functions and Laplace
//! transforms.
//!
//! A model has channels (σ, m_σ, c_σ): the correlation is
//!
//! ```text
//! f(t) = Σ_σ ∫ e^{−(d−s)t} c_σ(s) dm_σ(s) + R(1+t) e^{−dt/2} cos t
//! ```
//!
//! and F(z) = ∫_0^∞ e^{−(z+δ−d)t} f(t) dt is computed two ways: by
//! quadrature in t, and as the closed main term
//! B(z) = Σ_σ ∫ c_σ(s)/(z + δ − s) dm_σ(s). Their difference is the
//! holomorphic remainder coming from the tempered part. The probe routines
//! locate the singularities of B − Res/z in a strip around Re z = 0.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compact_duals::HighestWeight;
use crate::error::{Error, Result};
use crate::gap_params::{eta_0, interval_i};
use crate::quadrature::{integrate_interval, richardson_table, QuadOptions};
use crate::stieltjes::{join_complex, poly_eval, rectangle_contour, split_complex, RealLineMeasure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct Channel {
    pub sigma: HighestWeight,
    pub measure: RealLineMeasure,
    /// c_σ(s) = Σ coeff[k] s^k.
    pub coeff: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    sigma: HighestWeight,
    measure: RealLineMeasure,
    coeff_re: Vec<f64>,
    #[serde(default)]
    coeff_im: Vec<f64>,
}

impl TryFrom<RawChannel> for Channel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        Ok(Channel { sigma: raw.sigma, measure: raw.measure, coeff: join_complex(&raw.coeff_re, &raw.coeff_im) })
    }
}

impl From<Channel> for RawChannel {
    fn from(c: Channel) -> Self {
        let (coeff_re, coeff_im) = split_complex(&c.coeff);
        RawChannel { sigma: c.sigma, measure: c.measure, coeff_re, coeff_im }
    }
}

impl Channel {
    /// The measure c_σ(s) dm_σ(s).
    pub fn weighted(&self) -> RealLineMeasure {
        self.measure.weighted_by(&self.coeff)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct SpectralModel {
    d: u32,
    delta: f64,
    channels: Vec<Channel>,
    tempered_amplitude: f64,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    d: u32,
    delta: f64,
    #[serde(default)]
    tempered_amplitude: f64,
    #[serde(default)]
    channels: Vec<Channel>,
}

impl TryFrom<RawModel> for SpectralModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        SpectralModel::new(raw.d, raw.delta, raw.channels, raw.tempered_amplitude)
    }
}

impl From<SpectralModel> for RawModel {
    fn from(m: SpectralModel) -> Self {
        RawModel { d: m.d, delta: m.delta, tempered_amplitude: m.tempered_amplitude, channels: m.channels }
    }
}

impl SpectralModel {
    /// Checks δ ∈ (d/2, d], R ≥ 0, distinct σ, and supp m_σ ⊂ I_σ ∩ (d/2, δ].
    pub fn new(d: u32, delta: f64, channels: Vec<Channel>, tempered_amplitude: f64) -> Result<Self> {
        let half = d as f64 / 2.0;
        if d == 0 || !(delta > half && delta <= d as f64) {
            return Err(Error::InvalidModel(format!("δ = {delta} is not in ({half}, {d}]")));
        }
        if !(tempered_amplitude >= 0.0 && tempered_amplitude.is_finite()) {
            return Err(Error::InvalidModel(format!("tempered amplitude {tempered_amplitude} must be ≥ 0")));
        }
        for (i, ch) in channels.iter().enumerate() {
            if channels[..i].iter().any(|o| o.sigma == ch.sigma) {
                return Err(Error::InvalidModel(format!("σ = {} appears twice", ch.sigma)));
            }
            if ch.coeff.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidModel("non-finite coefficient".into()));
            }
            let iv = interval_i(&ch.sigma, d).map_err(|e| Error::InvalidModel(e.to_string()))?;
            let hi = iv.hi.min(delta);
            let ok = ch.measure.atoms().iter().all(|a| a.t > half && a.t <= hi)
                && ch.measure.densities().iter().all(|p| p.a >= half && p.b <= hi);
            if !ok {
                return Err(Error::SupportOutsideInterval {
                    sigma: ch.sigma.to_string(),
                    interval: format!("({half}, {hi}]"),
                });
            }
        }
        Ok(SpectralModel { d, delta, channels, tempered_amplitude })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn tempered_amplitude(&self) -> f64 {
        self.tempered_amplitude
    }

    /// Same model without the tempered remainder.
    pub fn main_part(&self) -> SpectralModel {
        SpectralModel { tempered_amplitude: 0.0, ..self.clone() }
    }

    /// Same model without channel `i`.
    pub fn without_channel(&self, i: usize) -> SpectralModel {
        let mut m = self.clone();
        m.channels.remove(i);
        m
    }

    /// Σ_σ c_σ(s) dm_σ(s) as a single measure on the parameter line.
    pub fn pushforward(&self) -> RealLineMeasure {
        self.channels.iter().fold(RealLineMeasure::zero(), |acc, ch| acc.add(&ch.weighted()))
    }

    /// Largest support point over all channels.
    pub fn s_max(&self) -> Option<f64> {
        self.channels.iter().filter_map(|c| c.measure.support()).map(|s| s.1).reduce(f64::max)
    }

    fn half(&self) -> f64 {
        self.d as f64 / 2.0
    }
}

fn fine_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, ..QuadOptions::default() }
}

/// The synthetic tempered remainder r(t) = R(1+t)e^{−dt/2}cos t.
pub fn remainder(model: &SpectralModel, t: f64) -> f64 {
    model.tempered_amplitude * (1.0 + t) * (-model.half() * t).exp() * t.cos()
}

/// Main term Σ_σ ∫ e^{−(d−s)t} c_σ(s) dm_σ(s).
pub fn main_term(model: &SpectralModel, t: f64) -> Complex64 {
    let d = model.d as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for ch in &model.channels {
        for a in ch.measure.atoms() {
            total += (-(d - a.t) * t).exp() * poly_eval(&ch.coeff, a.t) * a.w;
        }
        for p in ch.measure.densities() {
            let r = integrate_interval(
                |s| (-(d - s) * t).exp() * poly_eval(&ch.coeff, s) * p.at(s),
                p.a,
                p.b,
                &[],
                &fine_opts(),
            );
            total += r.value;
        }
    }
    total
}

/// f(t), the synthetic scaled matrix coefficient.
pub fn correlation(model: &SpectralModel, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be ≥ 0, got {t}")));
    }
    Ok(main_term(model, t) + remainder(model, t))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LaplaceNumeric {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub quad_error: f64,
    /// Bound on |∫_{T}^∞ …|.
    pub truncation_bound: f64,
    pub error_bound: f64,
}

pub(crate) fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

/// Smallest Re z for which the Laplace integral converges.
pub fn abscissa(model: &SpectralModel) -> f64 {
    let mut min_re = f64::NEG_INFINITY;
    if let Some(s) = model.s_max() {
        min_re = min_re.max(s - model.delta);
    }
    if model.tempered_amplitude > 0.0 {
        min_re = min_re.max(model.half() - model.delta);
    }
    min_re
}

fn tail_bound(model: &SpectralModel, re_z: f64, t_max: f64) -> f64 {
    let mut bound = 0.0;
    for ch in &model.channels {
        let w = ch.weighted();
        for a in w.atoms() {
            let rate = re_z + model.delta - a.t;
            bound += a.w.norm() * (-rate * t_max).exp() / rate;
        }
        for p in w.densities() {
            let rate = re_z + model.delta - p.b;
            let piece = RealLineMeasure::new(Vec::new(), vec![p.clone()]).expect("valid piece");
            bound += piece.total_variation_bound() * (-rate * t_max).exp() / rate;
        }
    }
    if model.tempered_amplitude > 0.0 {
        let a = re_z + model.delta - model.half();
        bound += model.tempered_amplitude * (-a * t_max).exp() * ((1.0 + t_max) / a + 1.0 / (a * a));
    }
    bound
}

fn laplace_of<G>(g: G, model: &SpectralModel, z: Complex64, t_max: f64) -> (Complex64, f64)
where
    G: Fn(f64) -> Complex64,
{
    let shift = z + model.delta - model.d as f64;
    let breaks: Vec<f64> = (1..).map(|k| k as f64 * 5.0).take_while(|&x| x < t_max).collect();
    let opts = QuadOptions { abs_tol: 1e-10, max_segments: 50_000, peak_ratio: None };
    let r = integrate_interval(|t| (-shift * t).exp() * g(t), 0.0, t_max, &breaks, &opts);
    (r.value, r.error)
}

/// ∫_0^{T} e^{−(z+δ−d)t} f(t) dt with a bound on the neglected tail.
pub fn laplace_numeric(model: &SpectralModel, z: Complex64, t_max: f64) -> Result<LaplaceNumeric> {
    let min_re = abscissa(model);
    if !(z.re > min_re) {
        return Err(Error::TailDiverges { re: z.re, min_re });
    }
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("T_max must be positive, got {t_max}")));
    }
    let (value, quad_error) = laplace_of(|t| main_term(model, t) + remainder(model, t), model, z, t_max);
    let truncation_bound = tail_bound(model, z.re, t_max);
    Ok(LaplaceNumeric { value, quad_error, truncation_bound, error_bound: quad_error + truncation_bound })
}

/// Numeric transform of the remainder r(t) alone, on the same footing.
pub fn laplace_remainder_numeric(model: &SpectralModel, z: Complex64, t_max: f64) -> (Complex64, f64) {
    laplace_of(|t| Complex64::new(remainder(model, t), 0.0), model, z, t_max)
}

/// ∫_0^∞ e^{−(z+δ−d)t} r(t) dt in closed form.
pub fn laplace_remainder_closed(model: &SpectralModel, z: Complex64) -> Complex64 {
    let a = z + model.delta - model.half();
    let i = Complex64::new(0.0, 1.0);
    let term = |b: Complex64| 1.0 / b + 1.0 / (b * b);
    model.tempered_amplitude * 0.5 * (term(a - i) + term(a + i))
}

/// B(z) = Σ_σ ∫ c_σ(s)/(z + δ − s) dm_σ(s).
pub fn laplace_closed(model: &SpectralModel, z: Complex64) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    let opts = QuadOptions { abs_tol: 1e-12, peak_ratio: Some(10.0), ..QuadOptions::default() };
    for ch in &model.channels {
        for a in ch.measure.atoms() {
            let den = z + model.delta - a.t;
            if den.norm() <= 1e-12 {
                return Err(Error::SingularPoint { re: z.re, im: z.im });
            }
            total += poly_eval(&ch.coeff, a.t) * a.w / den;
        }
        for p in ch.measure.densities() {
            // The pole set of this piece is z ∈ [a − δ, b − δ].
            let pole = z.re + model.delta;
            if z.im.abs() <= 1e-12 && pole >= p.a - 1e-12 && pole <= p.b + 1e-12 {
                return Err(Error::SingularPoint { re: z.re, im: z.im });
            }
            let r = integrate_interval(
                |s| poly_eval(&ch.coeff, s) * p.at(s) / (z + model.delta - s),
                p.a,
                p.b,
                &[pole],
                &opts,
            );
            total += r.value;
        }
    }
    Ok(total)
}

/// Σ_σ c_σ(δ)·m_σ({δ}).
pub fn residue_at_zero(model: &SpectralModel) -> Complex64 {
    model
        .channels
        .iter()
        .flat_map(|ch| {
            ch.measure.atoms().iter().filter(|a| a.t == model.delta).map(move |a| poly_eval(&ch.coeff, a.t) * a.w)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueExtrapolation {
    #[serde(serialize_with = "ser_complex")]
    pub estimate: Complex64,
    pub error_estimate: f64,
    /// z_k for the samples z_k·B(z_k).
    pub z: Vec<f64>,
}

/// lim_{z→0+} z·B(z) from samples at z = z0·2^{−k}, Richardson-extrapolated.
pub fn extrapolate_residue(model: &SpectralModel, z0: f64, levels: usize) -> Result<ResidueExtrapolation> {
    let zs: Vec<f64> = (0..=levels).map(|k| z0 * 0.5f64.powi(k as i32)).collect();
    let samples: Vec<Complex64> = zs
        .iter()
        .map(|&z| laplace_closed(model, Complex64::new(z, 0.0)).map(|b| b * z))
        .collect::<Result<_>>()?;
    let depth = levels.min(4);
    let table = richardson_table(&samples, depth);
    let last = table.last().expect("non-empty");
    let estimate = *last.last().expect("non-empty column");
    let error_estimate = if last.len() >= 2 {
        (last[last.len() - 1] - last[last.len() - 2]).norm()
    } else {
        let prev = &table[table.len() - 2];
        (prev[prev.len() - 1] - estimate).norm()
    };
    Ok(ResidueExtrapolation { estimate, error_estimate, z: zs })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparePoint {
    #[serde(serialize_with = "ser_complex")]
    pub z: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub numeric: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub closed: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub remainder: Complex64,
    pub discrepancy: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub points: Vec<ComparePoint>,
    pub max_discrepancy: f64,
    pub tol: f64,
    pub pass: bool,
}

pub const TOL_COMPARE: f64 = 1e-6;

/// Compares the t-quadrature of `numeric_model` (minus its own remainder
/// transform) with the closed main term of `closed_model`. Pass the same
/// model twice for the honest comparison; a different `closed_model` is a
/// negative control.
pub fn compare_models(
    numeric_model: &SpectralModel,
    closed_model: &SpectralModel,
    grid: &[Complex64],
    t_max: f64,
) -> Result<CompareReport> {
    let points: Vec<ComparePoint> = grid
        .par_iter()
        .map(|&z| {
            let num = laplace_numeric(numeric_model, z, t_max)?;
            let (rem, rem_err) = laplace_remainder_numeric(numeric_model, z, t_max);
            let closed = laplace_closed(closed_model, z)?;
            let main_trunc = tail_bound(&numeric_model.main_part(), z.re, t_max);
            let discrepancy = (num.value - rem - closed).norm();
            let bound = main_trunc + num.quad_error + rem_err;
            Ok(ComparePoint {
                z,
                numeric: num.value,
                closed,
                remainder: rem,
                discrepancy,
                bound,
                pass: discrepancy <= TOL_COMPARE + bound,
            })
        })
        .collect::<Result<_>>()?;
    let max_discrepancy = points.iter().map(|p| p.discrepancy).fold(0.0, f64::max);
    let pass = points.iter().all(|p| p.pass);
    Ok(CompareReport { points, max_discrepancy, tol: TOL_COMPARE, pass })
}

/// A cartesian grid of complex points.
pub fn complex_grid(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().flat_map(|&x| im.iter().map(move |&y| Complex64::new(x, y))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstructionKind {
    Pole,
    Cut,
}

#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Midpoint of the located cell.
    pub location: f64,
    pub kind: ObstructionKind,
    /// ∮G dz / 2πi over the located cell.
    #[serde(serialize_with = "ser_complex")]
    pub enclosed: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleProbeReport {
    pub eta: f64,
    #[serde(serialize_with = "ser_complex")]
    pub residue: Complex64,
    pub max_abs_g: f64,
    pub bounded: bool,
    pub obstructions: Vec<Obstruction>,
    pub resolution: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    /// Heights at which |G| is scanned (both half-planes); the largest is
    /// also the half-height of the contour rectangles.
    pub grid_y: Vec<f64>,
    pub x_points: usize,
    pub resolution: f64,
    pub contour_tol: f64,
    pub bound_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            grid_y: vec![0.5, 0.1, 0.01],
            x_points: 201,
            resolution: 1e-3,
            contour_tol: 1e-6,
            bound_tol: 1e8,
        }
    }
}

/// Probes G(z) = B(z) − Res/z on the strip |Re z| < η for singularities.
pub fn pole_probe(model: &SpectralModel, eta: f64, opts: &ProbeOptions) -> Result<PoleProbeReport> {
    let eta0 = eta_0(model.delta, model.d)?;
    if !(eta > 0.0 && eta < eta0) {
        return Err(Error::Domain(format!("η must lie in (0, {eta0}), got {eta}")));
    }
    let res = residue_at_zero(model);
    let g = |z: Complex64| -> Complex64 {
        match laplace_closed(model, z) {
            Ok(b) => b - res / z,
            Err(_) => Complex64::new(f64::INFINITY, 0.0),
        }
    };
    let y_top = opts.grid_y.iter().copied().fold(0.0, f64::max);
    if !(y_top > 0.0) {
        return Err(Error::Domain("grid_y needs a positive height".into()));
    }

    // Boundedness scan off the real axis.
    let n = opts.x_points.max(2);
    let xs: Vec<f64> = (0..n).map(|i| -eta + 2.0 * eta * (i as f64 + 0.5) / n as f64).collect();
    let max_abs_g = xs
        .par_iter()
        .map(|&x| {
            opts.grid_y.iter().flat_map(|&y| [y, -y]).map(|y| g(Complex64::new(x, y)).norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let bounded = max_abs_g.is_finite() && max_abs_g <= opts.bound_tol;

    // Points on the real axis where a contour edge must not be placed.
    let mut avoid: Vec<f64> = vec![0.0];
    for ch in &model.channels {
        avoid.extend(ch.measure.atoms().iter().map(|a| a.t - model.delta));
        for p in ch.measure.densities() {
            avoid.push(p.a - model.delta);
            avoid.push(p.b - model.delta);
        }
    }
    let edge = |x: f64, w: f64| -> f64 {
        let clearance = 0.02 * w;
        match avoid.iter().find(|&&s| (s - x).abs() < clearance) {
            Some(&s) => if x >= s { s + clearance } else { s - clearance },
            None => x,
        }
    };

    let quad = QuadOptions { abs_tol: 1e-10, peak_ratio: Some(10.0), max_segments: 20_000 };
    let contour = |x0: f64, x1: f64| -> Complex64 {
        let (v, _) = rectangle_contour(&g, x0, x1, -y_top, y_top, &[], &[0.0], &quad);
        v / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
    };

    let lo = edge(-eta, 2.0 * eta);
    let hi = edge(eta, 2.0 * eta);
    let mut cells = Vec::new();
    let mut stack = vec![(lo, hi, contour(lo, hi))];
    while let Some((x0, x1, enclosed)) = stack.pop() {
        if enclosed.norm() * 2.0 * std::f64::consts::PI <= opts.contour_tol {
            continue;
        }
        if x1 - x0 <= opts.resolution {
            cells.push((x0, x1, enclosed));
            continue;
        }
        let mid = edge(0.5 * (x0 + x1), x1 - x0);
        stack.push((mid, x1, contour(mid, x1)));
        stack.push((x0, mid, contour(x0, mid)));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Adjacent cells belong to one extended obstruction.
    let mut merged: Vec<(f64, f64, Complex64, usize)> = Vec::new();
    for (x0, x1, e) in cells {
        match merged.last_mut() {
            Some(last) if last.1 == x0 => {
                last.1 = x1;
                last.2 += e;
                last.3 += 1;
            }
            _ => merged.push((x0, x1, e, 1)),
        }
    }
    let obstructions = merged
        .into_iter()
        .map(|(x0, x1, enclosed, count)| {
            let (kind, location) = classify(&g, x0, x1, y_top, enclosed, count, &quad);
            Obstruction { x_lo: x0, x_hi: x1, location, kind, enclosed }
        })
        .collect::<Vec<_>>();
    let pass = bounded && obstructions.is_empty();
    Ok(PoleProbeReport { eta, residue: res, max_abs_g, bounded, obstructions, resolution: opts.resolution, pass })
}

/// For a simple pole the first moment ∮zG/∮G recovers its location x*,
/// and h·|G(x* + ih)| tends to the enclosed residue as h ↘ 0; across a cut
/// h·|G| tends to 0.
fn classify<G: Fn(Complex64) -> Complex64>(
    g: &G,
    x0: f64,
    x1: f64,
    y_top: f64,
    enclosed: Complex64,
    cells: usize,
    quad: &QuadOptions,
) -> (ObstructionKind, f64) {
    let mid = 0.5 * (x0 + x1);
    if cells > 2 {
        return (ObstructionKind::Cut, mid);
    }
    let (moment, _) = rectangle_contour(|z| z * g(z), x0, x1, -y_top, y_top, &[], &[0.0], quad);
    let x_star = (moment / Complex64::new(0.0, 2.0 * std::f64::consts::PI) / enclosed).re;
    if !(x_star > x0 && x_star < x1) {
        return (ObstructionKind::Cut, mid);
    }
    let h = 1e-7;
    let scaled = h * g(Complex64::new(x_star, h)).norm();
    if (scaled - enclosed.norm()).abs() <= 0.1 * enclosed.norm() {
        (ObstructionKind::Pole, x_star)
    } else {
        (ObstructionKind::Cut, mid)
    }
}

pub const TOL_RANK: f64 = 1e-10;

/// Numerical rank of a 2×2 matrix: 0 if every entry is below `tol`, at
/// most 1 if |det| ≤ tol·(max |entry|)², else 2.
pub fn rank_test(q: &[[Complex64; 2]; 2], tol: f64) -> u8 {
    let scale = q.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= tol {
        return 0;
    }
    let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
    if det.norm() <= tol * scale * scale {
        1
    } else {
        2
    }
}

fn random_unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 && z.norm() > 1e-3 {
            return z;
        }
    }
}

/// L1(φ_i)·conj(L2(ψ_j)) for random linear-form values.
pub fn random_outer_product(rng: &mut ChaCha8Rng) -> [[Complex64; 2]; 2] {
    let l1 = [random_unit_disk(rng), random_unit_disk(rng)];
    let l2 = [random_unit_disk(rng), random_unit_disk(rng)];
    [[l1[0] * l2[0].conj(), l1[0] * l2[1].conj()], [l1[1] * l2[0].conj(), l1[1] * l2[1].conj()]]
}

/// A random matrix with |det| ≥ `min_ratio`·(max |entry|)².
pub fn random_well_conditioned(rng: &mut ChaCha8Rng, min_ratio: f64) -> [[Complex64; 2]; 2] {
    loop {
        let q = [[random_unit_disk(rng), random_unit_disk(rng)], [random_unit_disk(rng), random_unit_disk(rng)]];
        let scale = q.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        if det.norm() >= min_ratio * scale * scale {
            return q;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RankSurvey {
    pub seed: u64,
    pub samples: usize,
    pub outer_rank_le_1: usize,
    pub well_conditioned_rank_2: usize,
    pub misclassified: usize,
    pub pass: bool,
}

/// Classifies `samples` random outer products and `samples` random
/// well-conditioned matrices.
pub fn rank_survey(seed: u64, samples: usize, tol: f64) -> RankSurvey {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outer_ok = 0;
    let mut full_ok = 0;
    for _ in 0..samples {
        if rank_test(&random_outer_product(&mut rng), tol) <= 1 {
            outer_ok += 1;
        }
        if rank_test(&random_well_conditioned(&mut rng, 0.1), tol) == 2 {
            full_ok += 1;
        }
    }
    let misclassified = 2 * samples - outer_ok - full_ok;
    RankSurvey {
        seed,
        samples,
        outer_rank_le_1: outer_ok,
        well_conditioned_rank_2: full_ok,
        misclassified,
        pass: misclassified == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn triv(d: u32) -> HighestWeight {
        HighestWeight::trivial(d)
    }

    fn atom_model(d: u32, delta: f64, atoms: &[(f64, f64)], coeff: f64, r: f64) -> SpectralModel {
        let measure = atoms
            .iter()
            .fold(RealLineMeasure::zero(), |m, &(t, w)| m.add(&RealLineMeasure::atom(t, c(w)).unwrap()));
        SpectralModel::new(d, delta, vec![Channel { sigma: triv(d), measure, coeff: vec![c(coeff)] }], r).unwrap()
    }

    #[test]
    fn correlation_examples() {
        let m = atom_model(2, 1.5, &[(1.5, 1.0)], 1.0, 0.0);
        for &t in &[0.0, 1.0, 7.5] {
            let f = correlation(&m, t).unwrap();
            assert!(((0.5 * t).exp() * f - 1.0).norm() < 1e-14);
        }
        let m = atom_model(2, 1.5, &[(1.2, 1.0)], 1.0, 0.0);
        assert!((correlation(&m, 1.0).unwrap().re - (-0.8f64).exp()).abs() < 1e-15);

        let m = SpectralModel::new(2, 1.5, vec![], 2.0).unwrap();
        for &t in &[0.0, 0.3, 2.0, 9.0] {
            assert!(correlation(&m, t).unwrap().norm() <= 2.0 * (1.0 + t) * (-t).exp() + 1e-15);
        }
    }

    #[test]
    fn laplace_examples() {
        let m = atom_model(2, 1.5, &[(1.2, 1.0)], 1.0, 0.0);
        let r = laplace_numeric(&m, c(1.0), 60.0).unwrap();
        assert!((r.value - 1.0 / 1.3).norm() <= r.error_bound + 1e-12);
        assert!((laplace_closed(&m, c(1.0)).unwrap() - 1.0 / 1.3).norm() < 1e-15);

        let zero = SpectralModel::new(2, 1.5, vec![], 0.0).unwrap();
        assert_eq!(laplace_numeric(&zero, c(1.0), 80.0).unwrap().value, c(0.0));

        let m = atom_model(2, 1.5, &[(1.5, 1.0)], 1.0, 0.0);
        let r = laplace_numeric(&m, c(0.5), 80.0).unwrap();
        assert!((r.value - 2.0).norm() <= r.error_bound + 1e-12);
        assert!(matches!(laplace_numeric(&m, c(-0.1), 80.0), Err(Error::TailDiverges { .. })));
    }

    #[test]
    fn closed_examples() {
        let m = atom_model(2, 1.5, &[(1.5, 1.0)], 2.0, 0.0);
        assert!((laplace_closed(&m, c(1.0)).unwrap() - 2.0).norm() < 1e-15);
        assert!(laplace_closed(&m, c(0.0)).is_err());

        let dens = SpectralModel::new(
            2,
            1.7,
            vec![Channel { sigma: triv(2), measure: RealLineMeasure::uniform(1.3, 1.6, c(1.0)).unwrap(), coeff: vec![c(1.0)] }],
            0.0,
        )
        .unwrap();
        assert!((laplace_closed(&dens, c(0.2)).unwrap() - 2f64.ln()).norm() < 1e-12);
    }

    #[test]
    fn residues() {
        let m = atom_model(2, 1.5, &[(1.5, 0.7)], 2.0, 0.0);
        assert!((residue_at_zero(&m) - 1.4).norm() < 1e-15);
        let ex = extrapolate_residue(&m, 1e-3, 8).unwrap();
        assert!((ex.estimate - 1.4).norm() < 1e-8);
        assert_eq!(residue_at_zero(&atom_model(2, 1.5, &[(1.3, 1.0)], 1.0, 0.0)), c(0.0));
    }

    #[test]
    fn model_validation() {
        // Support above δ.
        let bad = SpectralModel::new(
            2,
            1.5,
            vec![Channel { sigma: triv(2), measure: RealLineMeasure::atom(1.6, c(1.0)).unwrap(), coeff: vec![c(1.0)] }],
            0.0,
        );
        assert!(matches!(bad, Err(Error::SupportOutsideInterval { .. })));
        let ch = Channel { sigma: triv(2), measure: RealLineMeasure::zero(), coeff: vec![c(1.0)] };
        assert!(SpectralModel::new(2, 1.5, vec![ch.clone(), ch], 0.0).is_err());
        assert!(SpectralModel::new(2, 0.9, vec![], 0.0).is_err());
    }

    #[test]
    fn probe_examples() {
        let opts = ProbeOptions::default();
        let m = atom_model(2, 1.5, &[(1.5, 1.0)], 1.0, 0.0);
        let rep = pole_probe(&m, 0.1, &opts).unwrap();
        assert!(rep.pass, "{rep:?}");

        let m = atom_model(2, 1.5, &[(1.5, 1.0), (1.45, 0.5)], 1.0, 0.0);
        let rep = pole_probe(&m, 0.1, &opts).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.obstructions.len(), 1);
        let o = &rep.obstructions[0];
        assert_eq!(o.kind, ObstructionKind::Pole);
        assert!((o.location + 0.05).abs() <= 1e-3, "{o:?}");
        assert!((o.enclosed - 0.5).norm() < 1e-6);

        let empty = SpectralModel::new(2, 1.5, vec![], 0.0).unwrap();
        let rep = pole_probe(&empty, 0.1, &opts).unwrap();
        assert!(rep.pass && rep.max_abs_g == 0.0);
    }

    #[test]
    fn ranks() {
        let i = c(1.0);
        let o = c(0.0);
        assert_eq!(rank_test(&[[i, o], [o, i]], TOL_RANK), 2);
        assert_eq!(rank_test(&[[o, o], [o, o]], TOL_RANK), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(rank_test(&random_outer_product(&mut rng), TOL_RANK), 1);
    }

    #[test]
    fn json_shape() {
        let text = r#"{"d":2,"delta":1.5,"tempered_amplitude":0.5,
            "channels":[{"sigma":{"n":2,"entries":[0]},
                         "measure":{"atoms":[{"t":1.5,"w_re":1.0,"w_im":0.0}],"densities":[]},
                         "coeff_re":[1.0],"coeff_im":[0.0]}]}"#;
        let m: SpectralModel = serde_json::from_str(text).unwrap();
        assert_eq!(m.channels().len(), 1);
        let back: SpectralModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
