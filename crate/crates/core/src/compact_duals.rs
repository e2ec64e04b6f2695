//! Highest weights of SO(n) and the combinatorics of their duals.
//!
//! An irreducible representation of SO(n) is labelled by an integer tuple of
//! length ⌊n/2⌋:
//!
//! * `n = 2m + 1`: `τ_1 ≥ … ≥ τ_m ≥ 0` (SO(1) has only the empty tuple);
//! * `n = 2m`, `m ≥ 2`: `τ_1 ≥ … ≥ τ_{m−1} ≥ |τ_m|`;
//! * `n = 2`: a single arbitrary integer (the characters of the circle).
//!
//! Restriction to SO(n − 1) is multiplicity free and governed by
//! interlacing; [`branching_set`] lists the constituents and
//! [`enumerate_ktypes_containing`] runs the same rule in reverse.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawWeight")]
pub struct HighestWeight {
    n: u32,
    entries: Vec<i64>,
}

#[derive(Deserialize)]
struct RawWeight {
    n: u32,
    entries: Vec<i64>,
}

impl TryFrom<RawWeight> for HighestWeight {
    type Error = Error;

    fn try_from(raw: RawWeight) -> Result<Self> {
        validate(raw.n, &raw.entries)
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SO({})(", self.n)?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Number of entries of an SO(n) highest weight.
pub fn rank(n: u32) -> usize {
    (n / 2) as usize
}

/// Checks the dominance ordering and returns the weight.
pub fn validate(n: u32, entries: &[i64]) -> Result<HighestWeight> {
    if n == 0 {
        return Err(Error::Domain("SO(0) is not a group in this setting".into()));
    }
    let m = rank(n);
    if entries.len() != m {
        return Err(Error::WrongLength { n, expected: m, got: entries.len() });
    }
    let ordered = if m == 0 {
        true
    } else if n % 2 == 1 {
        entries.windows(2).all(|w| w[0] >= w[1]) && entries[m - 1] >= 0
    } else if m == 1 {
        true
    } else {
        entries[..m - 1].windows(2).all(|w| w[0] >= w[1]) && entries[m - 2] >= entries[m - 1].abs()
    };
    if !ordered {
        return Err(Error::OrderingViolation { n, entries: entries.to_vec() });
    }
    Ok(HighestWeight { n, entries: entries.to_vec() })
}

impl HighestWeight {
    pub fn new(n: u32, entries: Vec<i64>) -> Result<Self> {
        validate(n, &entries)
    }

    pub fn trivial(n: u32) -> Self {
        HighestWeight { n, entries: vec![0; rank(n)] }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn is_trivial(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Largest absolute entry (0 for the empty tuple).
    pub fn max_abs(&self) -> i64 {
        self.entries.iter().map(|e| e.abs()).max().unwrap_or(0)
    }

    pub fn dual(&self) -> HighestWeight {
        dual(self)
    }

    pub fn is_self_dual(&self) -> bool {
        is_self_dual(self)
    }

    pub fn dimension(&self) -> BigUint {
        dimension(self)
    }
}

/// Contragredient. Only SO(2m) with m odd changes anything: the last entry
/// flips sign.
pub fn dual(w: &HighestWeight) -> HighestWeight {
    let mut out = w.clone();
    if w.n % 2 == 0 && (w.n / 2) % 2 == 1 {
        if let Some(last) = out.entries.last_mut() {
            *last = -*last;
        }
    }
    out
}

pub fn is_self_dual(w: &HighestWeight) -> bool {
    dual(w) == *w
}

fn check_restriction(tau: &HighestWeight, sigma: &HighestWeight) -> Result<()> {
    if tau.n < 2 || sigma.n + 1 != tau.n {
        return Err(Error::GroupMismatch(format!(
            "{sigma} is not a weight of SO({}) ⊂ SO({})",
            tau.n.saturating_sub(1),
            tau.n
        )));
    }
    Ok(())
}

/// Whether the SO(n−1)-type `sigma` occurs in the SO(n)-type `tau`,
/// decided by walking the interlacing chain.
pub fn branches_to(tau: &HighestWeight, sigma: &HighestWeight) -> Result<bool> {
    check_restriction(tau, sigma)?;
    let t = &tau.entries;
    let s = &sigma.entries;
    let n = tau.n;
    let holds = if n % 2 == 0 {
        // τ_1 ≥ σ_1 ≥ τ_2 ≥ … ≥ τ_{m−1} ≥ σ_{m−1} ≥ |τ_m|
        let m = t.len();
        (0..m - 1).all(|i| t[i] >= s[i] && s[i] >= if i + 1 == m - 1 { t[m - 1].abs() } else { t[i + 1] })
    } else {
        // τ_1 ≥ σ_1 ≥ … ≥ σ_{m−1} ≥ τ_m ≥ |σ_m|
        let m = t.len();
        (0..m).all(|i| {
            let upper = t[i] >= if i + 1 == m { s[i].abs() } else { s[i] };
            let lower = i + 1 == m || s[i] >= t[i + 1];
            upper && lower
        })
    };
    Ok(holds)
}

/// Iterates the Cartesian product of inclusive integer ranges in
/// lexicographic order.
fn product_of_ranges(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    if ranges.iter().any(|&(lo, hi)| lo > hi) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(cur.clone());
        let mut i = ranges.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                for j in i + 1..ranges.len() {
                    cur[j] = ranges[j].0;
                }
                break;
            }
        }
    }
}

/// All SO(n−1)-types contained in `tau`, lexicographically ordered.
pub fn branching_set(tau: &HighestWeight) -> Result<Vec<HighestWeight>> {
    if tau.n < 2 {
        return Err(Error::Domain("branching needs n ≥ 2".into()));
    }
    let t = &tau.entries;
    let m = t.len();
    let ranges: Vec<(i64, i64)> = if tau.n % 2 == 0 {
        (0..m.saturating_sub(1))
            .map(|i| {
                let lo = if i + 1 == m - 1 { t[m - 1].abs() } else { t[i + 1] };
                (lo, t[i])
            })
            .collect()
    } else {
        (0..m)
            .map(|i| if i + 1 == m { (-t[i], t[i]) } else { (t[i + 1], t[i]) })
            .collect()
    };
    Ok(product_of_ranges(&ranges)
        .into_iter()
        .map(|entries| HighestWeight { n: tau.n - 1, entries })
        .collect())
}

/// All SO(n)-types containing the SO(n−1)-type `sigma` whose first entry is
/// at most `bound`. For SO(2) the single entry is bounded in absolute value.
pub fn enumerate_ktypes_containing(sigma: &HighestWeight, bound: i64) -> Result<Vec<HighestWeight>> {
    let needed = sigma.max_abs();
    if bound < needed {
        return Err(Error::BoundTooSmall { bound, needed });
    }
    let n = sigma.n + 1;
    let s = &sigma.entries;
    let m = rank(n);
    let ranges: Vec<(i64, i64)> = if n == 2 {
        vec![(-bound, bound)]
    } else if n % 2 == 0 {
        // σ has m−1 entries; τ_m ranges over [−σ_{m−1}, σ_{m−1}].
        (0..m)
            .map(|i| {
                if i + 1 == m {
                    (-s[m - 2], s[m - 2])
                } else if i == 0 {
                    (s[0], bound)
                } else {
                    (s[i], s[i - 1])
                }
            })
            .collect()
    } else {
        // σ has m entries; τ_m ≥ |σ_m|.
        (0..m)
            .map(|i| {
                let lo = if i + 1 == m { s[i].abs() } else { s[i] };
                let hi = if i == 0 { bound } else { s[i - 1] };
                (lo, hi)
            })
            .collect()
    };
    Ok(product_of_ranges(&ranges)
        .into_iter()
        .map(|entries| HighestWeight { n, entries })
        .collect())
}

/// Every valid SO(n) weight with all |entries| ≤ `max_abs`, in
/// lexicographic order. Used as the brute-force universe in checks.
pub fn all_weights(n: u32, max_abs: i64) -> Vec<HighestWeight> {
    let ranges = vec![(-max_abs, max_abs); rank(n)];
    product_of_ranges(&ranges)
        .into_iter()
        .filter_map(|e| validate(n, &e).ok())
        .collect()
}

/// Weyl dimension formula, in exact arithmetic.
pub fn dimension(w: &HighestWeight) -> BigUint {
    let m = w.entries.len();
    if m == 0 || w.n == 2 {
        return BigUint::one();
    }
    // Work with doubled coordinates so ρ is integral in type B.
    let odd = w.n % 2 == 1;
    let rho: Vec<i64> = (0..m)
        .map(|i| {
            let r = (m - 1 - i) as i64;
            if odd {
                2 * r + 1
            } else {
                2 * r
            }
        })
        .collect();
    let shifted: Vec<i64> = w.entries.iter().zip(&rho).map(|(e, r)| 2 * e + r).collect();

    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..m {
        for j in i + 1..m {
            num *= BigInt::from(shifted[i] - shifted[j]) * BigInt::from(shifted[i] + shifted[j]);
            den *= BigInt::from(rho[i] - rho[j]) * BigInt::from(rho[i] + rho[j]);
        }
        if odd {
            num *= BigInt::from(shifted[i]);
            den *= BigInt::from(rho[i]);
        }
    }
    let q = BigRational::new(num, den);
    assert!(q.is_integer(), "Weyl dimension must be an integer");
    q.to_integer().abs().to_biguint().expect("non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hw(n: u32, e: &[i64]) -> HighestWeight {
        validate(n, e).unwrap()
    }

    #[test]
    fn validation_cases() {
        assert!(validate(4, &[2, -1]).is_ok());
        assert!(validate(3, &[0]).is_ok());
        assert!(validate(2, &[-5]).is_ok());
        assert!(validate(1, &[]).is_ok());
        assert!(matches!(validate(4, &[1]), Err(Error::WrongLength { .. })));
        assert!(matches!(validate(4, &[1, -2]), Err(Error::OrderingViolation { .. })));
        assert!(matches!(validate(3, &[-1]), Err(Error::OrderingViolation { .. })));
        assert!(matches!(validate(6, &[1, 2, 0]), Err(Error::OrderingViolation { .. })));
    }

    #[test]
    fn duals() {
        assert_eq!(hw(2, &[3]).dual(), hw(2, &[-3]));
        assert_eq!(hw(3, &[7]).dual(), hw(3, &[7]));
        assert_eq!(hw(4, &[1, -1]).dual(), hw(4, &[1, -1]));
        assert_eq!(hw(6, &[2, 1, 1]).dual(), hw(6, &[2, 1, -1]));
    }

    #[test]
    fn self_duality() {
        assert!(hw(2, &[0]).is_self_dual());
        assert!(!hw(2, &[1]).is_self_dual());
        assert!(!hw(6, &[2, 1, 1]).is_self_dual());
        assert!(hw(6, &[2, 1, 0]).is_self_dual());
        assert!(hw(8, &[2, 1, 1, -1]).is_self_dual());
    }

    #[test]
    fn interlacing() {
        assert!(branches_to(&hw(4, &[1, 0]), &hw(3, &[1])).unwrap());
        assert!(branches_to(&hw(4, &[1, 0]), &hw(3, &[0])).unwrap());
        assert!(!branches_to(&hw(3, &[1]), &hw(2, &[2])).unwrap());
        for k in -4..=4 {
            assert!(branches_to(&hw(2, &[k]), &hw(1, &[])).unwrap());
        }
        assert!(branches_to(&hw(3, &[1]), &hw(3, &[1])).is_err());
    }

    #[test]
    fn branching_sets() {
        assert_eq!(branching_set(&hw(4, &[1, 0])).unwrap(), vec![hw(3, &[0]), hw(3, &[1])]);
        let so2: Vec<_> = (-2..=2).map(|k| hw(2, &[k])).collect();
        assert_eq!(branching_set(&hw(3, &[2])).unwrap(), so2);
        assert_eq!(branching_set(&hw(5, &[0, 0])).unwrap(), vec![hw(4, &[0, 0])]);
        assert_eq!(branching_set(&hw(2, &[7])).unwrap(), vec![hw(1, &[])]);
    }

    #[test]
    fn dimensions() {
        for j in 0..6 {
            assert_eq!(dimension(&hw(3, &[j])), BigUint::from((2 * j + 1) as u64));
        }
        assert_eq!(dimension(&hw(4, &[1, 0])), BigUint::from(4u32));
        assert_eq!(dimension(&hw(4, &[1, 1])), BigUint::from(3u32));
        assert_eq!(dimension(&hw(4, &[1, -1])), BigUint::from(3u32));
        assert_eq!(dimension(&hw(2, &[9])), BigUint::one());
        assert_eq!(dimension(&hw(1, &[])), BigUint::one());
        // Vector, adjoint and spinor-free checks for SO(5), SO(6), SO(7).
        assert_eq!(dimension(&hw(5, &[1, 0])), BigUint::from(5u32));
        assert_eq!(dimension(&hw(5, &[1, 1])), BigUint::from(10u32));
        assert_eq!(dimension(&hw(6, &[1, 1, 0])), BigUint::from(15u32));
        assert_eq!(dimension(&hw(7, &[2, 0, 0])), BigUint::from(27u32));
    }

    #[test]
    fn enumeration() {
        let so3: Vec<_> = (1..=3).map(|k| hw(3, &[k])).collect();
        assert_eq!(enumerate_ktypes_containing(&hw(2, &[1]), 3).unwrap(), so3);
        assert_eq!(enumerate_ktypes_containing(&hw(3, &[0]), 1).unwrap(), vec![hw(4, &[0, 0]), hw(4, &[1, 0])]);
        assert_eq!(enumerate_ktypes_containing(&hw(4, &[0, 0]), 0).unwrap(), vec![hw(5, &[0, 0])]);
        assert!(matches!(
            enumerate_ktypes_containing(&hw(2, &[-3]), 2),
            Err(Error::BoundTooSmall { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let w = hw(4, &[2, -1]);
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"n":4,"entries":[2,-1]}"#);
        let back: HighestWeight = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<HighestWeight>(r#"{"n":4,"entries":[1,-2]}"#).is_err());
    }
}
