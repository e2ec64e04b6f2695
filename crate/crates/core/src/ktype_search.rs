//! Minimal K-types: the functional λ_τ, the explicit witness τ attached to
//! an M-type σ, and brute-force minimality checks.
//!
//! Here M ≅ SO(d) and K ≅ SO(d+1).

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::compact_duals::{branches_to, dual, enumerate_ktypes_containing, HighestWeight};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub sigma: HighestWeight,
    pub tau: HighestWeight,
    #[serde(serialize_with = "ser_ratio")]
    pub lambda_value: BigRational,
    pub contains_sigma: bool,
    pub contains_sigma_dual: bool,
    pub is_minimal_over_bound: bool,
    pub search_bound: i64,
}

fn ser_ratio<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn check_ktype(tau: &HighestWeight, d: u32) -> Result<()> {
    if d == 0 || tau.n() != d + 1 {
        return Err(Error::GroupMismatch(format!("{tau} is not a K-type for d = {d}")));
    }
    Ok(())
}

fn check_mtype(sigma: &HighestWeight, d: u32) -> Result<()> {
    if d == 0 || sigma.n() != d {
        return Err(Error::GroupMismatch(format!("{sigma} is not an M-type for d = {d}")));
    }
    Ok(())
}

/// λ_τ = Σ_{j=1}^{⌈d/2⌉} (τ_j + (d+1−2j)/2)², exactly.
pub fn lambda_tau(tau: &HighestWeight, d: u32) -> Result<BigRational> {
    check_ktype(tau, d)?;
    let terms = d.div_ceil(2) as usize;
    let d = d as i64;
    let twice_sum: BigInt = tau.entries()[..terms]
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let j = i as i64 + 1;
            let twice = BigInt::from(2 * t + d + 1 - 2 * j);
            &twice * &twice
        })
        .sum();
    Ok(BigRational::new(twice_sum, BigInt::from(4)))
}

/// The explicit K-type containing both σ and σ*.
pub fn construct_witness_ktype(sigma: &HighestWeight, d: u32) -> Result<HighestWeight> {
    check_mtype(sigma, d)?;
    let s = sigma.entries();
    let mut entries: Vec<i64> = Vec::with_capacity(d.div_ceil(2) as usize);
    if d % 2 == 0 {
        let h = (d / 2) as usize;
        entries.extend_from_slice(&s[..h - 1]);
        entries.push(s[h - 1].abs());
    } else {
        entries.extend_from_slice(s);
        entries.push(0);
    }
    HighestWeight::new(d + 1, entries)
}

/// Search bound used when none is given.
pub fn default_bound(sigma: &HighestWeight) -> i64 {
    sigma.max_abs() + 3
}

/// All λ-minimizers among K-types with first entry ≤ `bound` that contain
/// both σ and σ*, in lexicographic order, together with a report on the
/// explicit witness.
pub fn minimal_ktypes(sigma: &HighestWeight, d: u32, bound: i64) -> Result<(Vec<HighestWeight>, WitnessReport)> {
    check_mtype(sigma, d)?;
    let sigma_dual = dual(sigma);
    let mut candidates = Vec::new();
    for tau in enumerate_ktypes_containing(sigma, bound)? {
        if branches_to(&tau, &sigma_dual)? {
            let lam = lambda_tau(&tau, d)?;
            candidates.push((tau, lam));
        }
    }
    let Some(best) = candidates.iter().map(|(_, l)| l).min().cloned() else {
        return Err(Error::BoundTooSmall { bound, needed: sigma.max_abs() });
    };
    let minimizers: Vec<HighestWeight> =
        candidates.into_iter().filter(|(_, l)| *l == best).map(|(t, _)| t).collect();

    let tau = construct_witness_ktype(sigma, d)?;
    let lambda_value = lambda_tau(&tau, d)?;
    let report = WitnessReport {
        contains_sigma: branches_to(&tau, sigma)?,
        contains_sigma_dual: branches_to(&tau, &sigma_dual)?,
        is_minimal_over_bound: lambda_value == best,
        sigma: sigma.clone(),
        tau,
        lambda_value,
        search_bound: bound,
    };
    Ok((minimizers, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hw(n: u32, e: &[i64]) -> HighestWeight {
        HighestWeight::new(n, e.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_tau(&hw(3, &[0]), 2).unwrap(), q(1, 4));
        assert_eq!(lambda_tau(&hw(3, &[1]), 2).unwrap(), q(9, 4));
        assert_eq!(lambda_tau(&hw(4, &[0, 0]), 3).unwrap(), q(1, 1));
        assert_eq!(lambda_tau(&hw(4, &[1, 0]), 3).unwrap(), q(4, 1));
        assert_eq!(lambda_tau(&hw(2, &[0]), 1).unwrap(), q(0, 1));
        assert_eq!(lambda_tau(&hw(2, &[-3]), 1).unwrap(), q(9, 1));
        assert!(lambda_tau(&hw(3, &[0]), 3).is_err());
    }

    #[test]
    fn witness_examples() {
        assert_eq!(construct_witness_ktype(&hw(4, &[2, -1]), 4).unwrap(), hw(5, &[2, 1]));
        assert_eq!(construct_witness_ktype(&hw(3, &[2]), 3).unwrap(), hw(4, &[2, 0]));
        assert_eq!(construct_witness_ktype(&hw(1, &[]), 1).unwrap(), hw(2, &[0]));
        assert_eq!(construct_witness_ktype(&hw(2, &[-2]), 2).unwrap(), hw(3, &[2]));
    }

    #[test]
    fn minimal_examples() {
        let (mins, rep) = minimal_ktypes(&hw(2, &[1]), 2, 4).unwrap();
        assert_eq!(mins, vec![hw(3, &[1])]);
        assert_eq!(rep.lambda_value, q(9, 4));
        assert!(rep.is_minimal_over_bound && rep.contains_sigma && rep.contains_sigma_dual);

        let (mins, rep) = minimal_ktypes(&hw(3, &[1]), 3, 3).unwrap();
        assert!(mins.contains(&hw(4, &[1, 0])));
        assert_eq!(rep.lambda_value, q(4, 1));

        let (mins, rep) = minimal_ktypes(&hw(2, &[0]), 2, 2).unwrap();
        assert_eq!(mins, vec![hw(3, &[0])]);
        assert_eq!(rep.lambda_value, q(1, 4));
    }

    #[test]
    fn bound_too_small_is_rejected() {
        assert!(matches!(minimal_ktypes(&hw(2, &[-2]), 2, 1), Err(Error::BoundTooSmall { .. })));
    }
}
