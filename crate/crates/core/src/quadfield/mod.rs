//! Quadratic fields Q(√d): prime splitting, the admissible prime sets, residue
//! unit groups, units and class groups.

mod classgroup;
mod forms;
mod ideal;
mod residue;
mod units;

pub use classgroup::{
    class_group, count_reduced_definite, principal_generator, ClassGroupBounds, ClassGroupData,
    IdealGenerator,
};
pub use forms::BinaryForm;
pub use ideal::{class_number_by_ideals, Ideal};
pub use residue::{Residue, ResidueModel, ResidueUnitGroup};
pub use units::{fundamental_unit, fundamental_unit_by_search, UnitGroupData};

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, is_squarefree, kronecker_prime};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticField {
    d: i64,
    disc: i64,
}

impl QuadraticField {
    pub fn new(d: i64) -> Result<Self> {
        if d == 0 || d == 1 || !is_squarefree(d) {
            return Err(Error::invalid(format!("d = {d} must be squarefree and not 0 or 1")));
        }
        if d.unsigned_abs() > 1 << 40 {
            return Err(Error::invalid("|d| is beyond the supported range"));
        }
        let disc = if d.rem_euclid(4) == 1 { d } else { 4 * d };
        Ok(QuadraticField { d, disc })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn is_imaginary(&self) -> bool {
        self.d < 0
    }

    /// Order of the torsion subgroup of the unit group.
    pub fn torsion_order(&self) -> u32 {
        match self.d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        }
    }

    pub fn splitting_type(&self, q: u64) -> SplittingType {
        match kronecker_prime(self.disc, q) {
            1 => SplittingType::Split,
            -1 => SplittingType::Inert,
            _ => SplittingType::Ramified,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

/// Which admissible prime set to scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimeSet {
    /// q split in M, q ≡ 1 mod p.
    S1,
    /// q inert in M, q ≡ −1 mod p.
    S2,
}

impl PrimeSet {
    pub fn name(self) -> &'static str {
        match self {
            PrimeSet::S1 => "S1",
            PrimeSet::S2 => "S2",
        }
    }

    pub fn splitting(self) -> SplittingType {
        match self {
            PrimeSet::S1 => SplittingType::Split,
            PrimeSet::S2 => SplittingType::Inert,
        }
    }

    /// Whether q belongs to the set for (K, p), including the exclusion of
    /// primes dividing 2·disc·p.
    pub fn contains(self, k: &QuadraticField, p: u64, q: u64) -> bool {
        let residue = match self {
            PrimeSet::S1 => 1,
            PrimeSet::S2 => p - 1,
        };
        q % p == residue
            && q != 2
            && q != p
            && !k.disc().unsigned_abs().is_multiple_of(q)
            && is_prime(q)
            && k.splitting_type(q) == self.splitting()
    }
}

const SCAN_WINDOW: u64 = 1 << 14;

/// The first `count` primes of the chosen set, ascending, searching q ≤ bound.
pub fn scan(
    k: &QuadraticField,
    p: u64,
    set: PrimeSet,
    count: usize,
    bound: u64,
    exec: Execution,
) -> Result<Vec<u64>> {
    if p < 3 || !is_prime(p) {
        return Err(Error::invalid(format!("p = {p} must be an odd prime")));
    }
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    if set == PrimeSet::S2 && k.d() == p as i64 && p % 4 == 1 {
        return Err(Error::EmptyPrimeSet {
            set: set.name(),
            d: k.d(),
            p,
        });
    }
    let mut found = Vec::with_capacity(count);
    let mut lo = 3u64;
    while lo <= bound && found.len() < count {
        let hi = bound.saturating_add(1).min(lo.saturating_add(SCAN_WINDOW));
        let hits = exec.filter_map_range(lo..hi, |q| set.contains(k, p, q).then_some(q));
        found.extend(hits.into_iter().take(count - found.len()));
        lo = hi;
    }
    if found.len() < count {
        let class = match set {
            PrimeSet::S1 => format!("q = 1 mod {p}, split"),
            PrimeSet::S2 => format!("q = {} mod {p}, inert", p - 1),
        };
        return Err(Error::ScanExhausted {
            set: set.name(),
            found: found.len(),
            wanted: count,
            bound,
            congruences: format!("{class} in Q(sqrt({})), q coprime to {}", k.d(), 2 * k.disc().unsigned_abs() * p),
        });
    }
    Ok(found)
}

pub fn scan_s1(k: &QuadraticField, p: u64, count: usize, bound: u64) -> Result<Vec<u64>> {
    scan(k, p, PrimeSet::S1, count, bound, Execution::default())
}

pub fn scan_s2(k: &QuadraticField, p: u64, count: usize, bound: u64) -> Result<Vec<u64>> {
    scan(k, p, PrimeSet::S2, count, bound, Execution::default())
}

/// An element (a + b√d)/denom of the field, denom ∈ {1, 2}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadElement {
    pub a: num_bigint::BigInt,
    pub b: num_bigint::BigInt,
    pub denom: u8,
}

impl QuadElement {
    pub fn norm(&self, d: i64) -> num_rational::BigRational {
        let n = &self.a * &self.a - num_bigint::BigInt::from(d) * &self.b * &self.b;
        num_rational::BigRational::new(n, num_bigint::BigInt::from(self.denom as u32 * self.denom as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_construction() {
        assert_eq!(QuadraticField::new(-1).unwrap().disc(), -4);
        assert_eq!(QuadraticField::new(5).unwrap().disc(), 5);
        assert_eq!(QuadraticField::new(-3).unwrap().disc(), -3);
        assert_eq!(QuadraticField::new(2).unwrap().disc(), 8);
        assert!(QuadraticField::new(1).is_err());
        assert!(QuadraticField::new(0).is_err());
        assert!(QuadraticField::new(12).is_err());
    }

    #[test]
    fn splitting_examples() {
        let k = QuadraticField::new(-1).unwrap();
        assert_eq!(k.splitting_type(5), SplittingType::Split);
        assert_eq!(k.splitting_type(11), SplittingType::Inert);
        assert_eq!(k.splitting_type(2), SplittingType::Ramified);
    }

    #[test]
    fn scan_examples() {
        let k = QuadraticField::new(-1).unwrap();
        assert_eq!(scan_s2(&k, 3, 3, 1000).unwrap(), vec![11, 23, 47]);
        // q = 1 mod 12 and prime: 13, 37 (25 and 49 are composite)
        assert_eq!(scan_s1(&k, 3, 2, 1000).unwrap(), vec![13, 37]);
        let k13 = QuadraticField::new(13).unwrap();
        assert!(matches!(scan_s2(&k13, 13, 1, 10_000), Err(Error::EmptyPrimeSet { .. })));
        assert!(scan_s1(&k13, 13, 2, 10_000).is_ok());
    }

    #[test]
    fn scan_exhaustion_is_reported() {
        let k = QuadraticField::new(-1).unwrap();
        let err = scan_s2(&k, 3, 3, 30).unwrap_err();
        assert!(err.is_resource_exhaustion());
        assert!(err.to_string().contains("2 mod 3"));
    }

    #[test]
    fn scans_match_direct_filter_in_both_modes() {
        for d in [-1i64, -5, 2, 3, -23] {
            let k = QuadraticField::new(d).unwrap();
            for p in [3u64, 5, 7, 11] {
                for set in [PrimeSet::S1, PrimeSet::S2] {
                    let direct: Vec<u64> = (3..5000)
                        .filter(|&q| {
                            is_prime(q)
                                && q % p == if set == PrimeSet::S1 { 1 } else { p - 1 }
                                && !(2 * k.disc().unsigned_abs() * p).is_multiple_of(q)
                                && k.splitting_type(q) == set.splitting()
                        })
                        .take(4)
                        .collect();
                    let a = scan(&k, p, set, 4, 5000, Execution::Sequential).unwrap();
                    let b = scan(&k, p, set, 4, 5000, Execution::Parallel).unwrap();
                    assert_eq!(a, direct);
                    assert_eq!(b, direct);
                }
            }
        }
    }
}
