//! Harish-Chandra C-function scalars C₊(τ : σ; s) as exact Gamma ratios.
//!
//! Expressions are built symbolically, identical Gamma factors are
//! cancelled, and what remains is evaluated in the log domain with the sign
//! tracked separately. A factor whose argument lands on a non-positive
//! integer is treated through its Laurent leading term, so removable
//! singularities (equal numbers of colliding factors above and below the
//! line) evaluate to their limit.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::compact_duals::{branches_to, dual, HighestWeight};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma_signed;
use crate::ktype_search::construct_witness_ktype;

/// Distance from a non-positive integer below which a Gamma argument is
/// treated as sitting on the pole.
pub const TOL_POLE: f64 = 1e-9;
/// Smallest |value| a non-vanishing scan accepts.
pub const TOL_NONVANISH: f64 = 1e-12;

/// Γ(u·s + a).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaFactor {
    pub u: i64,
    pub a: Rational64,
}

impl GammaFactor {
    pub fn new(u: i64, a: Rational64) -> Self {
        GammaFactor { u, a }
    }

    fn argument(&self, s: f64) -> f64 {
        self.u as f64 * s + self.a.to_f64().expect("small rational")
    }
}

impl fmt::Display for GammaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.u == 1 { "s".to_string() } else { format!("{}s", self.u) };
        if self.a.is_zero() {
            write!(f, "Γ({var})")
        } else if self.a.is_negative() {
            write!(f, "Γ({var}-{})", -self.a)
        } else {
            write!(f, "Γ({var}+{})", self.a)
        }
    }
}

/// `prefactor · 2^(α·s + β) · Π num Γ / Π den Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaRatioExpr {
    pub prefactor: BigRational,
    pub two_power: (Rational64, Rational64),
    pub numerator: Vec<GammaFactor>,
    pub denominator: Vec<GammaFactor>,
}

impl GammaRatioExpr {
    /// Sorts both factor lists and removes factors common to both.
    pub fn normalized(&self) -> GammaRatioExpr {
        let mut num = self.numerator.clone();
        let mut den = self.denominator.clone();
        num.sort();
        den.sort();
        let (mut keep_num, mut keep_den) = (Vec::new(), Vec::new());
        let (mut i, mut j) = (0, 0);
        while i < num.len() && j < den.len() {
            match num[i].cmp(&den[j]) {
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => {
                    keep_num.push(num[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    keep_den.push(den[j]);
                    j += 1;
                }
            }
        }
        keep_num.extend_from_slice(&num[i..]);
        keep_den.extend_from_slice(&den[j..]);
        GammaRatioExpr {
            prefactor: self.prefactor.clone(),
            two_power: self.two_power,
            numerator: keep_num,
            denominator: keep_den,
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.numerator.iter().all(|f| !self.denominator.contains(f))
    }
}

impl fmt::Display for GammaRatioExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.prefactor)?;
        let (alpha, beta) = self.two_power;
        if !alpha.is_zero() || !beta.is_zero() {
            write!(f, " * 2^(")?;
            if !alpha.is_zero() {
                write!(f, "{alpha}s")?;
                if beta.is_positive() {
                    write!(f, "+")?;
                }
            }
            if !beta.is_zero() {
                write!(f, "{beta}")?;
            }
            write!(f, ")")?;
        }
        write!(f, " * ")?;
        if self.numerator.is_empty() {
            write!(f, "1")?;
        }
        for g in &self.numerator {
            write!(f, "{g}")?;
        }
        write!(f, " / ")?;
        if self.denominator.is_empty() {
            write!(f, "1")?;
        } else {
            write!(f, "[")?;
            for g in &self.denominator {
                write!(f, "{g}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

fn factorial(n: i64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// The unreduced Gamma ratio for C₊(τ : σ; s), τ a K-type for SO(d+1) and
/// σ an M-type for SO(d) contained in it.
pub fn cplus_raw(tau: &HighestWeight, sigma: &HighestWeight, d: u32) -> Result<GammaRatioExpr> {
    if d == 0 || tau.n() != d + 1 || sigma.n() != d {
        return Err(Error::GroupMismatch(format!("need τ over SO({}) and σ over SO({d})", d + 1)));
    }
    if !branches_to(tau, sigma)? {
        return Err(Error::NotContained { tau: tau.to_string(), sigma: sigma.to_string() });
    }
    let di = d as i64;
    let half_d = Rational64::new(di, 2);
    let t = tau.entries();
    let sg = sigma.entries();
    let (num_terms, den_terms) = if d % 2 == 0 { (d / 2, d / 2) } else { ((d - 1) / 2, (d + 1) / 2) };

    let mut numerator = Vec::new();
    let mut denominator = Vec::new();
    for j in 1..=num_terms as i64 {
        let sj = sg[(j - 1) as usize];
        numerator.push(GammaFactor::new(1, Rational64::from(j - sj) - half_d));
        numerator.push(GammaFactor::new(1, half_d - j + sj));
    }
    for j in 1..=den_terms as i64 {
        let tj = t[(j - 1) as usize];
        denominator.push(GammaFactor::new(1, Rational64::from(j - tj) - half_d));
        denominator.push(GammaFactor::new(1, half_d - j + 1 + tj));
    }

    let (prefactor, two_power) = if d % 2 == 0 {
        let q = BigRational::new(factorial(di - 1), factorial(di / 2 - 1));
        (q, (Rational64::zero(), Rational64::zero()))
    } else {
        numerator.push(GammaFactor::new(2, Rational64::zero()));
        let q = BigRational::from_integer(factorial((di - 1) / 2));
        (q, (Rational64::from(-2), Rational64::from(di)))
    };
    Ok(GammaRatioExpr { prefactor, two_power, numerator, denominator })
}

/// C₊(τ : σ; s) with identical factors cancelled.
pub fn cplus_symbolic(tau: &HighestWeight, sigma: &HighestWeight, d: u32) -> Result<GammaRatioExpr> {
    Ok(cplus_raw(tau, sigma, d)?.normalized())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Finite,
    Zero,
    Pole,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Finite => "finite",
            Classification::Zero => "zero",
            Classification::Pole => "pole",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Zero for `Zero`, infinite for `Pole`.
    pub value: f64,
    pub classification: Classification,
}

/// If `x` sits within [`TOL_POLE`] of a non-positive integer `-k`, returns
/// `k`.
fn pole_index(x: f64) -> Option<u64> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() < TOL_POLE {
        Some((-r) as u64)
    } else {
        None
    }
}

/// ln|Res Γ(u·s + a)| in the variable s at the pole −k: (−1)^k / (k!·u).
fn residue_log_sign(k: u64, u: i64) -> (f64, f64) {
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 } * (u as f64).signum();
    (-ln_fact - (u.abs() as f64).ln(), sign)
}

/// Evaluates a Gamma ratio at real `s`.
pub fn evaluate(expr: &GammaRatioExpr, s: f64) -> Result<Evaluation> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} is not finite")));
    }
    let pref = expr.prefactor.to_f64().unwrap_or(f64::NAN);
    if pref == 0.0 {
        return Ok(Evaluation { value: 0.0, classification: Classification::Zero });
    }
    let (alpha, beta) = expr.two_power;
    let two_log = (alpha.to_f64().unwrap() * s + beta.to_f64().unwrap()) * std::f64::consts::LN_2;
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    let mut direct = 1.0;
    let mut order: i64 = 0;

    let (num, den) = pair_shifted(expr, s);
    for (ng, dg) in &num.paired {
        direct *= pochhammer_ratio(ng.argument(s), dg.argument(s));
        if !(1e-150..=1e150).contains(&direct.abs()) {
            log_abs += direct.abs().ln();
            sign *= direct.signum();
            direct = 1.0;
        }
    }
    for (factors, dir) in [(&num.rest, 1.0), (&den, -1.0)] {
        for g in factors.iter() {
            let x = g.argument(s);
            let (lg, sg) = match pole_index(x) {
                Some(k) => {
                    order += dir as i64;
                    residue_log_sign(k, g.u)
                }
                None => ln_gamma_signed(x).ok_or(Error::Domain(format!("Γ argument {x}")))?,
            };
            log_abs += dir * lg;
            sign *= sg;
        }
    }

    match order.cmp(&0) {
        std::cmp::Ordering::Greater => {
            return Ok(Evaluation { value: f64::INFINITY, classification: Classification::Pole })
        }
        std::cmp::Ordering::Less => return Ok(Evaluation { value: 0.0, classification: Classification::Zero }),
        std::cmp::Ordering::Equal => {}
    }
    let total = pref.abs().ln() + two_log + direct.abs().ln() + log_abs;
    if !total.is_finite() || total > f64::MAX.ln() || total < f64::MIN_POSITIVE.ln() {
        return Err(Error::OutOfRange { log_abs: total });
    }
    let value = if (two_log + log_abs).abs() < 600.0 && direct.is_finite() && direct != 0.0 {
        sign * pref * direct * (two_log + log_abs).exp()
    } else {
        sign * pref.signum() * direct.signum() * total.exp()
    };
    Ok(Evaluation { value, classification: Classification::Finite })
}

const MAX_SHIFT: i64 = 64;

struct Paired {
    paired: Vec<(GammaFactor, GammaFactor)>,
    rest: Vec<GammaFactor>,
}

/// Pairs numerator and denominator factors Γ(us+a), Γ(us+a') with a − a' a
/// small integer and neither argument at a pole. Returns the pairs, the
/// unpaired numerator factors and the unpaired denominator factors.
fn pair_shifted(expr: &GammaRatioExpr, s: f64) -> (Paired, Vec<GammaFactor>) {
    let mut den: Vec<Option<GammaFactor>> = expr.denominator.iter().copied().map(Some).collect();
    let mut paired = Vec::new();
    let mut rest = Vec::new();
    for g in &expr.numerator {
        let usable = |h: &GammaFactor| {
            let diff = g.a - h.a;
            h.u == g.u
                && diff.is_integer()
                && diff.to_integer().abs() <= MAX_SHIFT
                && pole_index(g.argument(s)).is_none()
                && pole_index(h.argument(s)).is_none()
        };
        match den.iter().position(|h| h.as_ref().is_some_and(|h| usable(h))) {
            Some(i) => paired.push((*g, den[i].take().unwrap())),
            None => rest.push(*g),
        }
    }
    (Paired { paired, rest }, den.into_iter().flatten().collect())
}

/// Γ(x)/Γ(y) for x − y an integer, as a finite product.
fn pochhammer_ratio(x: f64, y: f64) -> f64 {
    let m = (x - y).round() as i64;
    if m >= 0 {
        (0..m).map(|k| y + k as f64).product()
    } else {
        1.0 / (0..-m).map(|k| x + k as f64).product::<f64>()
    }
}

/// The scalar (dim τ / dim σ)·C₊(τ : σ; s).
pub fn cor43_scalar(tau: &HighestWeight, sigma: &HighestWeight, s: f64, d: u32) -> Result<f64> {
    if !(s > d as f64 / 2.0) {
        return Err(Error::Domain(format!("need s > d/2 = {}, got {s}", d as f64 / 2.0)));
    }
    let expr = cplus_symbolic(tau, sigma, d)?;
    let ev = evaluate(&expr, s)?;
    if ev.classification == Classification::Pole {
        return Err(Error::Pole { s });
    }
    let ratio = BigRational::new(tau.dimension().into(), sigma.dimension().into());
    Ok(ratio.to_f64().expect("finite ratio") * ev.value)
}

/// `n` equally spaced points d/2 + (d/2)·i/n, i = 1..n, filling (d/2, d].
pub fn uniform_grid(d: u32, n: usize) -> Vec<f64> {
    let h = d as f64 / 2.0;
    (1..=n).map(|i| h + h * i as f64 / n as f64).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub s: f64,
    pub value: f64,
    pub classification: Classification,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub d: u32,
    pub tau: HighestWeight,
    /// The M-type actually plugged into the formula.
    pub sigma: HighestWeight,
    pub expr: String,
    pub points: Vec<ScanPoint>,
    pub min_abs: f64,
    pub zeros: Vec<f64>,
    pub poles: Vec<f64>,
    pub sign_changes: usize,
    pub pass: bool,
}

/// Evaluates C₊(τ : σ; s) over `grid` and summarizes.
pub fn scan_with_tau(tau: &HighestWeight, sigma: &HighestWeight, d: u32, grid: &[f64]) -> Result<ScanReport> {
    let h = d as f64 / 2.0;
    if let Some(&bad) = grid.iter().find(|&&s| !(s > h && s <= d as f64)) {
        return Err(Error::Domain(format!("grid point {bad} outside ({h}, {d}]")));
    }
    let expr = cplus_symbolic(tau, sigma, d)?;
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&s| {
            evaluate(&expr, s).map(|ev| ScanPoint { s, value: ev.value, classification: ev.classification })
        })
        .collect::<Result<_>>()?;

    let zeros: Vec<f64> =
        points.iter().filter(|p| p.classification == Classification::Zero).map(|p| p.s).collect();
    let poles: Vec<f64> =
        points.iter().filter(|p| p.classification == Classification::Pole).map(|p| p.s).collect();
    let min_abs = points.iter().map(|p| p.value.abs()).fold(f64::INFINITY, f64::min);
    let sign_changes = points
        .windows(2)
        .filter(|w| w[0].value != 0.0 && w[1].value != 0.0 && w[0].value.signum() != w[1].value.signum())
        .count();
    let pass = zeros.is_empty() && poles.is_empty() && min_abs > TOL_NONVANISH;
    Ok(ScanReport {
        d,
        tau: tau.clone(),
        sigma: sigma.clone(),
        expr: expr.to_string(),
        points,
        min_abs,
        zeros,
        poles,
        sign_changes,
        pass,
    })
}

/// Checks C₊(τ : σ*; s) ≠ 0 on `grid` for the witness τ of σ.
pub fn nonvanishing_scan(sigma: &HighestWeight, d: u32, grid: &[f64]) -> Result<ScanReport> {
    let tau = construct_witness_ktype(sigma, d)?;
    scan_with_tau(&tau, &dual(sigma), d, grid)
}
