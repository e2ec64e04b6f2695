//! Complex measures on the real line, their Stieltjes transforms
//! F(z) = ∫ dν(t)/(z − t), and numerical inversion of F back to interval
//! masses.
//!
//! Measures are finite sums of atoms and polynomial density pieces on
//! bounded intervals, so interval masses are available exactly (up to
//! rounding) from antiderivatives and serve as the reference for the
//! numerical inversion.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_interval, QuadOptions};

/// Distance to the support below which the transform is refused.
pub const TOL_SUPPORT: f64 = 1e-12;

/// Horner evaluation of `Σ c_k t^k`.
pub fn poly_eval(coeffs: &[Complex64], t: f64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
}

/// Same, at a complex argument.
pub fn poly_eval_complex(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_antiderivative(coeffs: &[Complex64], t: f64) -> Complex64 {
    // Σ c_k t^{k+1}/(k+1), by Horner on the shifted coefficients.
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().rev() {
        acc = acc * t + c / (k as f64 + 1.0);
    }
    acc * t
}

fn poly_mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub w: Complex64,
}

/// Density `Σ coeffs[k] t^k` on the closed interval `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<Complex64>,
}

impl DensityPiece {
    pub fn at(&self, t: f64) -> Complex64 {
        poly_eval(&self.coeffs, t)
    }

    /// ∫ over `[lo, hi] ∩ [a, b]`.
    pub fn integral(&self, lo: f64, hi: f64) -> Complex64 {
        let lo = lo.max(self.a);
        let hi = hi.min(self.b);
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        poly_antiderivative(&self.coeffs, hi) - poly_antiderivative(&self.coeffs, lo)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct RealLineMeasure {
    atoms: Vec<Atom>,
    densities: Vec<DensityPiece>,
}

#[derive(Serialize, Deserialize)]
struct RawAtom {
    t: f64,
    w_re: f64,
    #[serde(default)]
    w_im: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    a: f64,
    b: f64,
    coeffs_re: Vec<f64>,
    #[serde(default)]
    coeffs_im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<RawAtom>,
    #[serde(default)]
    densities: Vec<RawDensity>,
}

/// Splits complex coefficients into the `(re, im)` JSON arrays.
pub fn split_complex(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|c| c.re).collect(), v.iter().map(|c| c.im).collect())
}

/// Joins `(re, im)` arrays; the shorter one is zero-padded.
pub fn join_complex(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    let n = re.len().max(im.len());
    (0..n)
        .map(|k| Complex64::new(re.get(k).copied().unwrap_or(0.0), im.get(k).copied().unwrap_or(0.0)))
        .collect()
}

impl TryFrom<RawMeasure> for RealLineMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        let atoms = raw.atoms.into_iter().map(|a| Atom { t: a.t, w: Complex64::new(a.w_re, a.w_im) }).collect();
        let densities = raw
            .densities
            .into_iter()
            .map(|d| DensityPiece { a: d.a, b: d.b, coeffs: join_complex(&d.coeffs_re, &d.coeffs_im) })
            .collect();
        RealLineMeasure::new(atoms, densities)
    }
}

impl From<RealLineMeasure> for RawMeasure {
    fn from(m: RealLineMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms.iter().map(|a| RawAtom { t: a.t, w_re: a.w.re, w_im: a.w.im }).collect(),
            densities: m
                .densities
                .iter()
                .map(|d| {
                    let (coeffs_re, coeffs_im) = split_complex(&d.coeffs);
                    RawDensity { a: d.a, b: d.b, coeffs_re, coeffs_im }
                })
                .collect(),
        }
    }
}

impl RealLineMeasure {
    /// Validates finiteness, distinct atom locations and `a < b` on every
    /// density piece. Atoms are stored sorted by location.
    pub fn new(mut atoms: Vec<Atom>, densities: Vec<DensityPiece>) -> Result<Self> {
        for a in &atoms {
            if !a.t.is_finite() || !a.w.re.is_finite() || !a.w.im.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom at {}", a.t)));
            }
        }
        atoms.sort_by(|x, y| x.t.total_cmp(&y.t));
        if let Some(w) = atoms.windows(2).find(|w| w[0].t == w[1].t) {
            return Err(Error::InvalidMeasure(format!("two atoms at {}", w[0].t)));
        }
        for d in &densities {
            if !(d.a.is_finite() && d.b.is_finite() && d.a < d.b) {
                return Err(Error::InvalidMeasure(format!("bad density interval [{}, {}]", d.a, d.b)));
            }
            if d.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite density coefficient".into()));
            }
        }
        Ok(RealLineMeasure { atoms, densities })
    }

    pub fn zero() -> Self {
        RealLineMeasure::default()
    }

    pub fn atom(t: f64, w: Complex64) -> Result<Self> {
        RealLineMeasure::new(vec![Atom { t, w }], Vec::new())
    }

    /// Constant density `c` on `[a, b]`.
    pub fn uniform(a: f64, b: f64, c: Complex64) -> Result<Self> {
        RealLineMeasure::new(Vec::new(), vec![DensityPiece { a, b, coeffs: vec![c] }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.densities.is_empty()
    }

    /// Sum of two measures; atoms at a shared location merge.
    pub fn add(&self, other: &RealLineMeasure) -> RealLineMeasure {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            match atoms.iter_mut().find(|b| b.t == a.t) {
                Some(b) => b.w += a.w,
                None => atoms.push(*a),
            }
        }
        atoms.sort_by(|x, y| x.t.total_cmp(&y.t));
        let mut densities = self.densities.clone();
        densities.extend(other.densities.iter().cloned());
        RealLineMeasure { atoms, densities }
    }

    pub fn scale(&self, c: Complex64) -> RealLineMeasure {
        self.weighted_by(&[c])
    }

    /// The measure `p(t) dν(t)` for a polynomial `p`.
    pub fn weighted_by(&self, poly: &[Complex64]) -> RealLineMeasure {
        RealLineMeasure {
            atoms: self.atoms.iter().map(|a| Atom { t: a.t, w: a.w * poly_eval(poly, a.t) }).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| DensityPiece { a: d.a, b: d.b, coeffs: poly_mul(&d.coeffs, poly) })
                .collect(),
        }
    }

    pub fn real_part(&self) -> RealLineMeasure {
        self.map_values(|c| Complex64::new(c.re, 0.0))
    }

    pub fn imag_part(&self) -> RealLineMeasure {
        self.map_values(|c| Complex64::new(c.im, 0.0))
    }

    fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> RealLineMeasure {
        RealLineMeasure {
            atoms: self.atoms.iter().map(|a| Atom { t: a.t, w: f(a.w) }).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| DensityPiece { a: d.a, b: d.b, coeffs: d.coeffs.iter().map(|&c| f(c)).collect() })
                .collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.atoms.iter().all(|a| a.w.im == 0.0)
            && self.densities.iter().all(|d| d.coeffs.iter().all(|c| c.im == 0.0))
    }

    /// Closed convex hull of the support (density pieces count in full).
    pub fn support(&self) -> Option<(f64, f64)> {
        let points = self.atoms.iter().map(|a| (a.t, a.t)).chain(self.densities.iter().map(|d| (d.a, d.b)));
        points.fold(None, |acc, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.min(lo), b.max(hi))),
        })
    }

    /// Upper bound on the total variation: Σ|w| + Σ ∫ Σ|c_k||t|^k.
    pub fn total_variation_bound(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.w.norm()).sum();
        let dens: f64 = self
            .densities
            .iter()
            .map(|d| {
                let r = d.a.abs().max(d.b.abs());
                let sup: f64 = d.coeffs.iter().enumerate().map(|(k, c)| c.norm() * r.powi(k as i32)).sum();
                sup * (d.b - d.a)
            })
            .sum();
        atoms + dens
    }

    /// ν of the interval from `lo` to `hi`, with each endpoint included or
    /// not according to the flags.
    pub fn mass(&self, lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            let above = if lo_closed { a.t >= lo } else { a.t > lo };
            let below = if hi_closed { a.t <= hi } else { a.t < hi };
            if above && below {
                total += a.w;
            }
        }
        for d in &self.densities {
            total += d.integral(lo, hi);
        }
        total
    }

    /// (ν([a, b)) + ν((a, b]))/2, the quantity the inversion formula returns.
    pub fn half_sum_mass(&self, a: f64, b: f64) -> Complex64 {
        (self.mass(a, b, true, false) + self.mass(a, b, false, true)) * 0.5
    }

    fn check_off_support(&self, z: Complex64) -> Result<()> {
        let err = Err(Error::SingularPoint { re: z.re, im: z.im });
        if self.atoms.iter().any(|a| (z - a.t).norm() <= TOL_SUPPORT * (1.0 + a.t.abs())) {
            return err;
        }
        if z.im.abs() <= TOL_SUPPORT
            && self.densities.iter().any(|d| z.re >= d.a - TOL_SUPPORT && z.re <= d.b + TOL_SUPPORT)
        {
            return err;
        }
        Ok(())
    }
}

/// F(z) = ∫ dν(t)/(z − t); density pieces by adaptive quadrature.
pub fn transform(nu: &RealLineMeasure, z: Complex64) -> Result<Complex64> {
    nu.check_off_support(z)?;
    let mut total: Complex64 = nu.atoms.iter().map(|a| a.w / (z - a.t)).sum();
    let opts = QuadOptions { abs_tol: 1e-9, peak_ratio: Some(10.0), ..QuadOptions::default() };
    for d in &nu.densities {
        let r = integrate_interval(|t| d.at(t) / (z - t), d.a, d.b, &[z.re], &opts);
        total += r.value;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct InversionOptions {
    pub y0: f64,
    pub k_max: usize,
    /// Absolute quadrature tolerance at each height.
    pub quad_tol: f64,
    /// Extra breakpoints for the x-integration (optional).
    pub breakpoints: Vec<f64>,
    pub peak_ratio: f64,
    /// Error estimates above this flag the result as low confidence.
    pub confidence_tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            y0: 0.5,
            k_max: 12,
            quad_tol: 1e-9,
            breakpoints: Vec::new(),
            peak_ratio: 10.0,
            confidence_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InversionResult {
    pub estimate: f64,
    pub error_estimate: f64,
    pub converged: bool,
    /// I(y_k) for y_k = y0·2^{−k}.
    pub samples: Vec<f64>,
    /// First-order Richardson extrapolants 2·I(y_{k+1}) − I(y_k).
    pub extrapolants: Vec<f64>,
}

/// Estimates (ν([a,b)) + ν((a,b]))/2 from −(1/π)∫_a^b Im F(x + iy) dx as
/// y ↘ 0. `f` must be the Stieltjes transform of a real (signed) measure
/// for the result to be that measure's half-sum; for complex ν apply it to
/// the transforms of the real and imaginary parts separately.
pub fn invert_interval<F>(f: F, a: f64, b: f64, opts: &InversionOptions) -> Result<InversionResult>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("need a < b, got [{a}, {b}]")));
    }
    if !(opts.y0 > 0.0) || opts.k_max == 0 {
        return Err(Error::Domain("need y0 > 0 and k_max ≥ 1".into()));
    }
    let quad = QuadOptions { abs_tol: opts.quad_tol, peak_ratio: Some(opts.peak_ratio), ..QuadOptions::default() };
    let mut mesh: Vec<f64> = vec![a];
    mesh.extend(opts.breakpoints.iter().copied().filter(|&x| x > a && x < b));
    mesh.push(b);
    mesh.sort_by(f64::total_cmp);
    mesh.dedup();

    let mut samples = Vec::with_capacity(opts.k_max + 1);
    let mut quad_err: f64 = 0.0;
    for k in 0..=opts.k_max {
        let y = opts.y0 * 0.5f64.powi(k as i32);
        let r = integrate(|x| f(Complex64::new(x, y)).im, &mesh, &quad);
        samples.push(-r.value / std::f64::consts::PI);
        quad_err = quad_err.max(r.error / std::f64::consts::PI);
        mesh = r.mesh;
    }
    let extrapolants: Vec<f64> = samples.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let n = extrapolants.len();
    let estimate = extrapolants[n - 1];
    let error_estimate = if n >= 2 { (extrapolants[n - 1] - extrapolants[n - 2]).abs() } else { f64::INFINITY }
        + quad_err;
    Ok(InversionResult {
        estimate,
        error_estimate,
        converged: error_estimate <= opts.confidence_tol,
        samples,
        extrapolants,
    })
}

/// ∮ F(z) dz counter-clockwise around `[x0, x1] × [y0, y1]`, with extra
/// breakpoints on the horizontal (`bx`) and vertical (`by`) edges.
pub fn rectangle_contour<F>(f: F, x0: f64, x1: f64, y0: f64, y1: f64, bx: &[f64], by: &[f64], opts: &QuadOptions) -> (Complex64, f64)
where
    F: Fn(Complex64) -> Complex64,
{
    let i = Complex64::new(0.0, 1.0);
    let bottom = integrate_interval(|x| f(Complex64::new(x, y0)), x0, x1, bx, opts);
    let right = integrate_interval(|y| f(Complex64::new(x1, y)) * i, y0, y1, by, opts);
    let top = integrate_interval(|x| f(Complex64::new(x, y1)), x0, x1, bx, opts);
    let left = integrate_interval(|y| f(Complex64::new(x0, y)) * i, y0, y1, by, opts);
    let value = bottom.value + right.value - top.value - left.value;
    (value, bottom.error + right.error + top.error + left.error)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Vanishes,
    DoesNotVanish,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct DetectorOptions {
    /// Points of the continuity probe grid on [a, b] (endpoints included).
    pub x_points: usize,
    /// Number of halvings of y in the continuity probe.
    pub y_levels: usize,
    pub y0: f64,
    /// Equal subintervals of [a, b] whose masses are inverted.
    pub subintervals: usize,
    pub mass_tol: f64,
    pub continuity_tol: f64,
    pub inversion: InversionOptions,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        DetectorOptions {
            x_points: 21,
            y_levels: 12,
            y0: 0.5,
            subintervals: 8,
            mass_tol: 1e-3,
            continuity_tol: 1e-2,
            inversion: InversionOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityProbe {
    /// max over the x-grid of |F(x+iy) − F(x+iy/2)| + |F(x+iy) − F(x−iy)|,
    /// one entry per y level.
    pub indicators: Vec<f64>,
    /// max |Im F(x + i y_min)| over the grid.
    pub imag_at_min_y: f64,
    /// Grid point where the last indicator is largest.
    pub worst_x: f64,
    pub decays: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubMass {
    pub a: f64,
    pub b: f64,
    pub re: InversionResult,
    pub im: InversionResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectorReport {
    pub verdict: Verdict,
    pub continuity_re: ContinuityProbe,
    pub continuity_im: ContinuityProbe,
    pub sub_masses: Vec<SubMass>,
}

fn probe_continuity<F>(f: &F, a: f64, b: f64, opts: &DetectorOptions) -> ContinuityProbe
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let n = opts.x_points.max(2);
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let mut indicators = Vec::with_capacity(opts.y_levels);
    let mut worst_x = a;
    let mut imag_at_min_y = 0.0;
    for k in 0..opts.y_levels {
        let y = opts.y0 * 0.5f64.powi(k as i32);
        let values: Vec<(f64, f64)> = xs
            .par_iter()
            .map(|&x| {
                let up = f(Complex64::new(x, y));
                let half = f(Complex64::new(x, 0.5 * y));
                let down = f(Complex64::new(x, -y));
                let c = (up - half).norm() + (up - down).norm();
                (if c.is_finite() { c } else { f64::INFINITY }, half.im.abs())
            })
            .collect();
        let (idx, max) = values
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bm), (i, v)| if v.0 > bm { (i, v.0) } else { (bi, bm) });
        worst_x = xs[idx];
        indicators.push(max);
        imag_at_min_y = values.iter().map(|v| v.1).fold(0.0, f64::max);
    }
    let last = *indicators.last().unwrap_or(&0.0);
    let first = *indicators.first().unwrap_or(&0.0);
    let decays = last <= opts.continuity_tol && last <= first;
    ContinuityProbe { indicators, imag_at_min_y, worst_x, decays }
}

/// Decides whether ν restricted to (a, b) vanishes, given the transforms
/// of its real and imaginary parts.
pub fn vanishing_detector<FR, FI>(f_re: FR, f_im: FI, a: f64, b: f64, opts: &DetectorOptions) -> Result<DetectorReport>
where
    FR: Fn(Complex64) -> Complex64 + Sync,
    FI: Fn(Complex64) -> Complex64 + Sync,
{
    if !(a < b) {
        return Err(Error::Domain(format!("need a < b, got ({a}, {b})")));
    }
    let continuity_re = probe_continuity(&f_re, a, b, opts);
    let continuity_im = probe_continuity(&f_im, a, b, opts);

    let m = opts.subintervals.max(1);
    let cuts: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let sub_masses: Vec<SubMass> = cuts
        .par_windows(2)
        .map(|w| {
            let re = invert_interval(&f_re, w[0], w[1], &opts.inversion)?;
            let im = invert_interval(&f_im, w[0], w[1], &opts.inversion)?;
            Ok(SubMass { a: w[0], b: w[1], re, im })
        })
        .collect::<Result<_>>()?;

    let small = |r: &InversionResult| r.estimate.abs() + r.error_estimate <= opts.mass_tol;
    let detected = |r: &InversionResult| r.converged && r.estimate.abs() > opts.mass_tol;
    let all_small = sub_masses.iter().all(|s| small(&s.re) && small(&s.im));
    let any_detected = sub_masses.iter().any(|s| detected(&s.re) || detected(&s.im));
    let verdict = if any_detected {
        Verdict::DoesNotVanish
    } else if all_small && continuity_re.decays && continuity_im.decays {
        Verdict::Vanishes
    } else {
        Verdict::Inconclusive
    };
    Ok(DetectorReport { verdict, continuity_re, continuity_im, sub_masses })
}

/// Checks ν([α, β]) = 0 for every pair of consecutive points of `grid`,
/// a finite stand-in for "every subinterval with endpoints in a dense set".
/// Grid points must lie in the open interval `(lo, hi)` and avoid atoms.
pub fn is_zero_by_interval_family(nu: &RealLineMeasure, lo: f64, hi: f64, grid: &[f64]) -> Result<bool> {
    let mut pts: Vec<f64> = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if let Some(&x) = pts.iter().find(|&&x| !(x > lo && x < hi)) {
        return Err(Error::Domain(format!("grid point {x} outside ({lo}, {hi})")));
    }
    for &x in &pts {
        if nu.atoms.iter().any(|a| (a.t - x).abs() <= 1e-12 * (1.0 + x.abs())) {
            return Err(Error::GridHitsAtom(x));
        }
    }
    let tol = 1e-12 * (1.0 + nu.total_variation_bound());
    Ok(pts.windows(2).all(|w| nu.mass(w[0], w[1], true, true).norm() <= tol))
}
