//! Spectral-gap parameters and rate arithmetic.
//!
//! ℓ(σ) and the interval I_σ = (d/2, d − ℓ(σ)] of admissible parameters,
//! the exponents η_s, η_0, κ_0, κ_1, the tempered decay envelope, and a
//! strong-spectral-gap verdict on a finite synthetic spectrum.

use serde::{Deserialize, Serialize};

use crate::compact_duals::HighestWeight;
use crate::error::{Error, Result};
use crate::stieltjes::RealLineMeasure;

/// Largest index j (1-based) with σ_j > 0; 0 if there is none.
pub fn ell(sigma: &HighestWeight) -> usize {
    sigma.entries().iter().rposition(|&e| e > 0).map_or(0, |i| i + 1)
}

/// The half-open interval (lo, hi]; empty when hi ≤ lo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfOpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl HalfOpenInterval {
    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }

    /// Whether the closed interval [a, b] sits inside (lo, hi].
    pub fn contains_closed(&self, a: f64, b: f64) -> bool {
        a > self.lo && b <= self.hi
    }
}

impl std::fmt::Display for HalfOpenInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            write!(f, "∅ ({}, {}]", self.lo, self.hi)
        } else {
            write!(f, "({}, {}]", self.lo, self.hi)
        }
    }
}

/// I_σ = (d/2, d − ℓ(σ)].
pub fn interval_i(sigma: &HighestWeight, d: u32) -> Result<HalfOpenInterval> {
    if sigma.n() != d {
        return Err(Error::GroupMismatch(format!("{sigma} is not an M-type for d = {d}")));
    }
    Ok(HalfOpenInterval { lo: d as f64 / 2.0, hi: d as f64 - ell(sigma) as f64 })
}

pub fn eta_s(s: f64, d: u32) -> Result<f64> {
    let h = d as f64 / 2.0;
    if !(s > h) {
        return Err(Error::Domain(format!("η_s needs s > {h}, got {s}")));
    }
    Ok((2.0 * s - d as f64).min(1.0))
}

pub fn eta_0(delta: f64, d: u32) -> Result<f64> {
    let h = d as f64 / 2.0;
    if !(delta > h) {
        return Err(Error::Domain(format!("η_0 needs δ > {h}, got {delta}")));
    }
    Ok((delta - h).min(1.0))
}

pub fn kappa0(kappa_gamma: f64) -> Result<f64> {
    if !(kappa_gamma > 0.0) || !kappa_gamma.is_finite() {
        return Err(Error::Domain(format!("κ_Γ must be positive, got {kappa_gamma}")));
    }
    Ok(kappa_gamma.min(1.0))
}

pub fn kappa1(kappa0: f64, d: u32) -> Result<f64> {
    if !(kappa0 > 0.0 && kappa0 <= 1.0) {
        return Err(Error::Domain(format!("κ_0 must lie in (0, 1], got {kappa0}")));
    }
    Ok(kappa0 / (2.0 * (d as f64 + 3.0 + kappa0)))
}

/// (1 + t)·e^{−(d − s⋆)t}.
pub fn decay_envelope(s_star: f64, d: u32, t: f64) -> Result<f64> {
    let d = d as f64;
    if !(s_star >= d / 2.0 && s_star < d) {
        return Err(Error::Domain(format!("s⋆ must lie in [{}, {d}), got {s_star}", d / 2.0)));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be non-negative, got {t}")));
    }
    Ok((1.0 + t) * (-(d - s_star) * t).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapParameters {
    pub d: u32,
    pub delta: f64,
    pub kappa_gamma: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub eta_delta: f64,
    pub eta0: f64,
}

impl GapParameters {
    pub fn new(d: u32, delta: f64, kappa_gamma: f64) -> Result<Self> {
        check_delta(delta, d)?;
        if !(kappa_gamma > 0.0 && kappa_gamma <= delta - d as f64 / 2.0 + 1e-15) {
            return Err(Error::Domain(format!("κ_Γ must lie in (0, δ − d/2], got {kappa_gamma}")));
        }
        let k0 = kappa0(kappa_gamma)?;
        Ok(GapParameters {
            d,
            delta,
            kappa_gamma,
            kappa0: k0,
            kappa1: kappa1(k0, d)?,
            eta_delta: eta_s(delta, d)?,
            eta0: eta_0(delta, d)?,
        })
    }
}

fn check_delta(delta: f64, d: u32) -> Result<()> {
    let d = d as f64;
    if !(delta > d / 2.0 && delta <= d) {
        return Err(Error::Domain(format!("δ must lie in ({}, {d}], got {delta}", d / 2.0)));
    }
    Ok(())
}

/// A spectrum entry: an M-type with its spectral measure on the parameter
/// line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub sigma: HighestWeight,
    pub measure: RealLineMeasure,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub parameters: Option<GapParameters>,
    pub kappa_gamma: f64,
    /// Condition (1): no non-trivial σ carries an atom at δ.
    pub no_nontrivial_atom_at_delta: bool,
    /// Condition (2): some η > 0 leaves (δ − η, δ) free of support.
    pub gap_below_delta: bool,
    pub verdict: bool,
    /// Largest support point in (d/2, δ), if any.
    pub sup_below_delta: Option<f64>,
    /// σ with a negative coordinate (ℓ ignores those coordinates).
    pub negative_entry_sigmas: Vec<HighestWeight>,
}

/// Decides whether a finite synthetic spectrum has a strong spectral gap
/// at δ and computes κ_Γ.
pub fn ssg_verdict(spectrum: &[SpectrumEntry], delta: f64, d: u32) -> Result<VerdictReport> {
    check_delta(delta, d)?;
    let half = d as f64 / 2.0;
    let mut cond1 = true;
    let mut sup: Option<f64> = None;
    let mut touches_delta = false;
    let mut negative_entry_sigmas = Vec::new();

    for entry in spectrum {
        let iv = interval_i(&entry.sigma, d)?;
        let m = &entry.measure;
        let outside = m.atoms().iter().any(|a| !iv.contains(a.t))
            || m.densities().iter().any(|p| !(p.a >= iv.lo && p.b <= iv.hi && !iv.is_empty()));
        if outside {
            return Err(Error::SupportOutsideInterval { sigma: entry.sigma.to_string(), interval: iv.to_string() });
        }
        if entry.sigma.entries().iter().any(|&e| e < 0) {
            negative_entry_sigmas.push(entry.sigma.clone());
        }
        for a in m.atoms() {
            if a.w.norm() == 0.0 {
                continue;
            }
            if a.t == delta && !entry.sigma.is_trivial() {
                cond1 = false;
            }
            if a.t > half && a.t < delta {
                sup = Some(sup.map_or(a.t, |s: f64| s.max(a.t)));
            }
        }
        for p in m.densities() {
            // [a, b] meets (d/2, δ) iff a < δ and b > d/2.
            if p.a < delta && p.b > half {
                let top = p.b.min(delta);
                if p.b >= delta {
                    touches_delta = true;
                }
                sup = Some(sup.map_or(top, |s: f64| s.max(top)));
            }
        }
    }

    let max_gap = delta - half;
    let kappa_gamma = if touches_delta { 0.0 } else { sup.map_or(max_gap, |s| (delta - s).min(max_gap)) };
    let gap_below_delta = kappa_gamma > 0.0;
    let verdict = cond1 && gap_below_delta;
    let parameters = if gap_below_delta { Some(GapParameters::new(d, delta, kappa_gamma)?) } else { None };
    Ok(VerdictReport {
        parameters,
        kappa_gamma,
        no_nontrivial_atom_at_delta: cond1,
        gap_below_delta,
        verdict,
        sup_below_delta: sup,
        negative_entry_sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn hw(n: u32, e: &[i64]) -> HighestWeight {
        HighestWeight::new(n, e.to_vec()).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn ell_and_interval() {
        assert_eq!(ell(&hw(4, &[2, 0])), 1);
        assert_eq!(ell(&hw(4, &[0, 0])), 0);
        assert_eq!(ell(&hw(6, &[3, 1, 1])), 3);
        assert_eq!(ell(&hw(4, &[1, -1])), 1);
        assert_eq!(interval_i(&hw(4, &[2, 0]), 4).unwrap(), HalfOpenInterval { lo: 2.0, hi: 3.0 });
        assert_eq!(interval_i(&hw(2, &[0]), 2).unwrap(), HalfOpenInterval { lo: 1.0, hi: 2.0 });
        assert!(interval_i(&hw(2, &[1]), 2).unwrap().is_empty());
    }

    #[test]
    fn scalar_formulas() {
        assert!((eta_s(1.4, 2).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(eta_s(1.6, 2).unwrap(), 1.0);
        assert_eq!(eta_s(2.0, 3).unwrap(), 1.0);
        assert!(eta_s(1.0, 2).is_err());
        assert!((eta_0(1.3, 2).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(eta_0(2.0, 2).unwrap(), 1.0);
        assert_eq!(eta_0(4.0, 5).unwrap(), 1.0);
        assert_eq!(kappa0(1.0).unwrap(), 1.0);
        assert_eq!(kappa0(0.15).unwrap(), 0.15);
        assert_eq!(kappa1(1.0, 2).unwrap(), 1.0 / 12.0);
        let k = 1e-9;
        assert!((kappa1(k, 4).unwrap() / (k / 14.0) - 1.0).abs() < 1e-8);
        assert!(kappa0(0.0).is_err() && kappa1(1.5, 2).is_err());
    }

    #[test]
    fn envelopes() {
        assert_eq!(decay_envelope(1.0, 2, 0.0).unwrap(), 1.0);
        assert!((decay_envelope(1.0, 2, 1.0).unwrap() - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((decay_envelope(1.5, 2, 10.0).unwrap() - 11.0 * (-5.0f64).exp()).abs() < 1e-15);
        assert!(decay_envelope(2.0, 2, 1.0).is_err());
    }

    #[test]
    fn verdict_with_density_below_delta() {
        // Trivial σ: atom at δ plus a density up to 1.55.
        let m = RealLineMeasure::atom(1.7, one()).unwrap().add(&RealLineMeasure::uniform(1.2, 1.55, one()).unwrap());
        let rep = ssg_verdict(&[SpectrumEntry { sigma: hw(2, &[0]), measure: m }], 1.7, 2).unwrap();
        assert!(rep.verdict);
        assert!((rep.kappa_gamma - 0.15).abs() < 1e-12);
    }

    #[test]
    fn density_for_sigma_one_at_d2_is_outside_its_interval() {
        let entries = [SpectrumEntry { sigma: hw(2, &[1]), measure: RealLineMeasure::uniform(1.0, 1.55, one()).unwrap() }];
        assert!(matches!(ssg_verdict(&entries, 1.7, 2), Err(Error::SupportOutsideInterval { .. })));
    }

    #[test]
    fn nontrivial_atom_at_delta_fails() {
        // d = 4, σ = (1, 0): I_σ = (2, 3].
        let entries = [SpectrumEntry { sigma: hw(4, &[1, 0]), measure: RealLineMeasure::atom(2.7, one()).unwrap() }];
        let rep = ssg_verdict(&entries, 2.7, 4).unwrap();
        assert!(!rep.no_nontrivial_atom_at_delta && !rep.verdict);
    }

    #[test]
    fn accumulation_and_truncation() {
        let triv = hw(2, &[0]);
        let atoms = RealLineMeasure::atom(1.69, one()).unwrap().add(&RealLineMeasure::atom(1.695, one()).unwrap());
        let rep = ssg_verdict(&[SpectrumEntry { sigma: triv.clone(), measure: atoms }], 1.7, 2).unwrap();
        assert!(rep.verdict);
        assert!((rep.kappa_gamma - 0.005).abs() < 1e-12);

        let touching = RealLineMeasure::uniform(1.5, 1.7, one()).unwrap();
        let rep = ssg_verdict(&[SpectrumEntry { sigma: triv, measure: touching }], 1.7, 2).unwrap();
        assert!(!rep.verdict && rep.kappa_gamma == 0.0);
    }

    #[test]
    fn empty_spectrum_has_full_gap() {
        let rep = ssg_verdict(&[], 1.7, 2).unwrap();
        assert!(rep.verdict);
        assert!((rep.kappa_gamma - 0.7).abs() < 1e-15);
        assert!(ssg_verdict(&[], 1.0, 2).is_err());
    }
}
