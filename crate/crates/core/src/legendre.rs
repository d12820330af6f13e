//! Elliptic curves y² = x(x − 1)(x − λ) with λ odd: invariants, reduction
//! types at bad primes, the integral model at 2 and torsion probes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{big_mod_u64, factorize_big, is_prime, jacobi, valuation};
use crate::error::{Error, Result};

/// Largest trial prime accepted by the torsion probe.
pub const MAX_PROBE_PRIME: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LegendreCurve {
    lambda: BigInt,
}

impl LegendreCurve {
    pub fn new(lambda: BigInt) -> Result<Self> {
        if lambda.is_zero() || lambda.is_one() {
            return Err(Error::invalid(format!("lambda = {lambda} gives a singular curve")));
        }
        if lambda.is_even() {
            return Err(Error::invalid(format!("lambda = {lambda} must be odd")));
        }
        Ok(LegendreCurve { lambda })
    }

    pub fn from_i64(lambda: i64) -> Result<Self> {
        Self::new(BigInt::from(lambda))
    }

    pub fn lambda(&self) -> &BigInt {
        &self.lambda
    }

    pub fn invariants(&self) -> CurveInvariants {
        let l = &self.lambda;
        let lm1 = l - 1;
        let c4 = BigInt::from(16) * (l * l - l + 1u32);
        let delta = BigInt::from(16) * l * l * &lm1 * &lm1;
        let num = c4.pow(3);
        let g = num.gcd(&delta);
        let (mut j_num, mut j_den) = (num / &g, &delta / &g);
        if j_den.is_negative() {
            j_num = -j_num;
            j_den = -j_den;
        }
        CurveInvariants {
            c4,
            delta,
            j_num,
            j_den,
        }
    }

    /// 2 together with the odd primes dividing λ(λ − 1), ascending.
    pub fn bad_primes(&self) -> Result<Vec<u64>> {
        let mut out = vec![2u64];
        for n in [self.lambda.clone(), &self.lambda - 1] {
            for (q, _) in factorize_big(&n) {
                let q = q
                    .to_u64()
                    .ok_or_else(|| Error::Unsupported(format!("bad prime {q} exceeds 64 bits")))?;
                if q != 2 {
                    out.push(q);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Local data at every bad prime.
    pub fn bad_prime_table(&self) -> Result<Vec<LocalCurveData>> {
        self.bad_primes()?
            .into_iter()
            .map(|q| reduction_type(&self.lambda, q))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveInvariants {
    pub c4: BigInt,
    pub delta: BigInt,
    pub j_num: BigInt,
    pub j_den: BigInt,
}

impl CurveInvariants {
    /// j·Δ = c4³ exactly.
    pub fn is_consistent(&self) -> bool {
        &self.j_num * &self.delta == self.c4.pow(3) * &self.j_den && self.j_num.gcd(&self.j_den).is_one()
    }
}

pub fn invariants(lambda: &BigInt) -> Result<CurveInvariants> {
    Ok(LegendreCurve::new(lambda.clone())?.invariants())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReductionType {
    Good,
    SplitMult,
    NonsplitMult,
    /// Bad reduction at 2 outside λ ≡ 17 mod 32. `potentially_good` is false
    /// for λ ≡ 1 mod 32, a case left unclassified.
    Additive2 { potentially_good: bool },
}

impl ReductionType {
    pub fn name(self) -> &'static str {
        match self {
            ReductionType::Good => "good",
            ReductionType::SplitMult => "split",
            ReductionType::NonsplitMult => "nonsplit",
            ReductionType::Additive2 { potentially_good: true } => "additive2",
            ReductionType::Additive2 { potentially_good: false } => "additive2-unsupported",
        }
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, ReductionType::SplitMult | ReductionType::NonsplitMult)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalCurveData {
    pub q: u64,
    pub kind: ReductionType,
    /// −ord_q(j) for multiplicative reduction, else 0.
    pub c_exponent: u32,
}

/// Closed-form classification at q.
pub fn reduction_type(lambda: &BigInt, q: u64) -> Result<LocalCurveData> {
    let curve = LegendreCurve::new(lambda.clone())?;
    if !is_prime(q) {
        return Err(Error::invalid(format!("q = {q} is not prime")));
    }
    let l = curve.lambda();
    let kind_and_c = if q == 2 {
        let r = big_mod_u64(l, 32);
        let kind = match r {
            17 => ReductionType::Good,
            1 => ReductionType::Additive2 { potentially_good: false },
            _ => ReductionType::Additive2 { potentially_good: true },
        };
        (kind, 0)
    } else {
        let lm1 = l - 1;
        let v1 = valuation(&lm1, q);
        let v0 = valuation(l, q);
        if v1 > 0 {
            (ReductionType::SplitMult, 2 * v1)
        } else if v0 > 0 {
            let kind = if q % 4 == 1 {
                ReductionType::SplitMult
            } else {
                ReductionType::NonsplitMult
            };
            (kind, 2 * v0)
        } else {
            (ReductionType::Good, 0)
        }
    };
    Ok(LocalCurveData {
        q,
        kind: kind_and_c.0,
        c_exponent: kind_and_c.1,
    })
}

/// Moves the node to (0, 0) and tests whether the tangent polynomial
/// T² + a₁T − a₂ splits over F_q.
pub fn split_oracle(lambda: &BigInt, q: u64) -> Result<ReductionType> {
    LegendreCurve::new(lambda.clone())?;
    if q == 2 || !is_prime(q) {
        return Err(Error::invalid(format!("q = {q} is not an odd prime")));
    }
    let l = big_mod_u64(lambda, q) as i128;
    let q128 = q as i128;
    // y² = x³ + a2 x² + a4 x + a6
    let (a2, a4, a6) = if l == 1 {
        // x = x' + 1: (x'+1)x'(x'+1−λ)
        (2 - l, 1 - l, 0)
    } else if l == 0 {
        (-(1 + l), l, 0)
    } else {
        return Err(Error::invalid(format!("q = {q} does not divide lambda(lambda - 1)")));
    };
    if a4.rem_euclid(q128) != 0 || a6 != 0 {
        return Err(Error::check("split-oracle", "singular point is not at the origin"));
    }
    let a1 = 0i128;
    let disc = (a1 * a1 + 4 * a2).rem_euclid(q128);
    Ok(match jacobi(disc as i64, q) {
        1 => ReductionType::SplitMult,
        -1 => ReductionType::NonsplitMult,
        _ => return Err(Error::check("split-oracle", "tangent cone is a double line (cusp)")),
    })
}

/// λ = 16·∏qᵢ + 1, with the classification at each qᵢ and at 2 checked.
pub fn construct_lambda(primes: &[u64]) -> Result<BigInt> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("primes must be distinct"));
    }
    if let Some(&q) = sorted.iter().find(|&&q| q == 2 || !is_prime(q)) {
        return Err(Error::invalid(format!("q = {q} is not an odd prime")));
    }
    let lambda = BigInt::from(16) * primes.iter().map(|&q| BigInt::from(q)).product::<BigInt>() + 1;
    if big_mod_u64(&lambda, 32) != 17 {
        return Err(Error::check("lambda-mod-32", format!("{lambda} mod 32 != 17")));
    }
    good_model_at_2(&lambda)?;
    for &q in primes {
        let data = reduction_type(&lambda, q)?;
        if data.kind != ReductionType::SplitMult || data.c_exponent != 2 {
            return Err(Error::check("lambda-reduction", format!("q = {q}: {data:?}")));
        }
    }
    Ok(lambda)
}

/// A Weierstrass model [a1, a2, a3, a4, a6] and its discriminant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeierstrassModel {
    pub a: [BigInt; 5],
    pub delta: BigInt,
}

pub fn weierstrass_discriminant(a: &[BigInt; 5]) -> BigInt {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1 * a1 + BigInt::from(4) * a2;
    let b4 = BigInt::from(2) * a4 + a1 * a3;
    let b6 = a3 * a3 + BigInt::from(4) * a6;
    let b8 = a1 * a1 * a6 + BigInt::from(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    -(&b2 * &b2 * &b8) - BigInt::from(8) * b4.pow(3) - BigInt::from(27) * &b6 * &b6
        + BigInt::from(9) * &b2 * &b4 * &b6
}

/// The model from x = 4x′ + 1, y = 8y′ + 4x′, whose discriminant is odd
/// exactly when λ ≡ 17 mod 32.
pub fn good_model_at_2(lambda: &BigInt) -> Result<WeierstrassModel> {
    let curve = LegendreCurve::new(lambda.clone())?;
    if big_mod_u64(lambda, 32) != 17 {
        return Err(Error::invalid(format!("lambda = {lambda} is not 17 mod 32")));
    }
    let mu: BigInt = lambda - 1u32;
    let a = [
        BigInt::one(),
        -(&mu / 4u32),
        BigInt::zero(),
        -(&mu / 16u32),
        BigInt::zero(),
    ];
    let delta = weierstrass_discriminant(&a);
    if &delta * BigInt::from(4096) != curve.invariants().delta {
        return Err(Error::check("model-at-2", "discriminant does not scale by 2^12"));
    }
    if delta.is_even() {
        return Err(Error::check("model-at-2", "transformed discriminant is even"));
    }
    Ok(WeierstrassModel { a, delta })
}

/// Result of bounding #E(Q)_tors by point counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionProbe {
    pub bound: u64,
    pub primes: Vec<u64>,
    pub counts: Vec<u64>,
    /// Set when p | bound for p ≤ 7, where the probe only warns.
    pub warning: Option<String>,
}

/// #E(F_ℓ) by enumerating x.
pub fn count_points(lambda: &BigInt, l: u64) -> u64 {
    let lm = big_mod_u64(lambda, l);
    let mut n = 1u64;
    for x in 0..l {
        let f = x as u128 * ((x + l - 1) % l) as u128 % l as u128 * ((x + l - lm) % l) as u128 % l as u128;
        n += (1 + jacobi(f as i64, l)) as u64;
    }
    n
}

pub fn torsion_probe(lambda: &BigInt, p: u64, count: usize) -> Result<TorsionProbe> {
    LegendreCurve::new(lambda.clone())?;
    let mut primes = Vec::with_capacity(count);
    let mut counts = Vec::with_capacity(count);
    let mut bound = 0u64;
    for l in (3..=MAX_PROBE_PRIME).filter(|&l| is_prime(l)) {
        if primes.len() == count {
            break;
        }
        let lm = big_mod_u64(lambda, l);
        if lm == 0 || lm == 1 {
            continue;
        }
        let n = count_points(lambda, l);
        let slack = 2.0 * (l as f64).sqrt();
        if (n as f64 - (l + 1) as f64).abs() > slack {
            return Err(Error::check("torsion-hasse", format!("#E(F_{l}) = {n} violates the Hasse bound")));
        }
        primes.push(l);
        counts.push(n);
        bound = bound.gcd(&n);
    }
    if primes.len() < count {
        return Err(Error::BoundExceeded {
            what: format!("good trial primes for the torsion probe ({} found)", primes.len()),
            bound: MAX_PROBE_PRIME,
        });
    }
    if !bound.is_multiple_of(4) {
        return Err(Error::check("torsion-two", format!("bound {bound} is not divisible by 4")));
    }
    let mut warning = None;
    if bound.is_multiple_of(p) {
        if p > 7 {
            return Err(Error::check("torsion-p", format!("{p} divides the torsion bound {bound}")));
        }
        warning = Some(format!("{p} divides the torsion bound {bound}"));
    }
    Ok(TorsionProbe {
        bound,
        primes,
        counts,
        warning,
    })
}

/// −ord_q(j).
pub fn neg_ord_j(inv: &CurveInvariants, q: u64) -> i64 {
    valuation(&inv.j_den, q) as i64 - valuation(&inv.j_num, q) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn invariant_examples() {
        let i = invariants(&b(3)).unwrap();
        assert_eq!((i.c4.clone(), i.delta.clone()), (b(112), b(576)));
        assert!(i.is_consistent());
        let i = invariants(&b(-1)).unwrap();
        assert_eq!((i.c4.clone(), i.delta.clone()), (b(48), b(64)));
        assert_eq!((i.j_num.clone(), i.j_den.clone()), (b(1728), b(1)));
        assert_eq!(invariants(&b(17)).unwrap().delta, b(16 * 289 * 256));
        assert!(invariants(&b(1)).is_err());
        assert!(invariants(&b(0)).is_err());
    }

    #[test]
    fn reduction_examples() {
        let d = reduction_type(&b(4049), 11).unwrap();
        assert_eq!((d.kind, d.c_exponent), (ReductionType::SplitMult, 2));
        assert_eq!(reduction_type(&b(3), 3).unwrap().kind, ReductionType::NonsplitMult);
        assert_eq!(reduction_type(&b(17), 2).unwrap().kind, ReductionType::Good);
        assert_eq!(
            reduction_type(&b(33), 2).unwrap().kind,
            ReductionType::Additive2 { potentially_good: false }
        );
        assert_eq!(
            reduction_type(&b(3), 2).unwrap().kind,
            ReductionType::Additive2 { potentially_good: true }
        );
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(split_oracle(&b(5), 5).unwrap(), ReductionType::SplitMult);
        assert_eq!(split_oracle(&b(3), 3).unwrap(), ReductionType::NonsplitMult);
        assert_eq!(split_oracle(&b(4049), 11).unwrap(), ReductionType::SplitMult);
        assert!(split_oracle(&b(5), 7).is_err());
    }

    #[test]
    fn c_exponent_matches_j() {
        for l in [4049i64, 177, 45, 1009, -25, 243] {
            let c = LegendreCurve::from_i64(l).unwrap();
            let inv = c.invariants();
            for d in c.bad_prime_table().unwrap() {
                if d.kind.is_multiplicative() {
                    assert_eq!(d.c_exponent as i64, neg_ord_j(&inv, d.q), "lambda {l} q {}", d.q);
                }
            }
        }
    }

    #[test]
    fn lambda_construction() {
        assert_eq!(construct_lambda(&[11, 23]).unwrap(), b(4049));
        assert_eq!(construct_lambda(&[11]).unwrap(), b(177));
        assert_eq!(construct_lambda(&[]).unwrap(), b(17));
        assert_eq!(LegendreCurve::from_i64(17).unwrap().bad_primes().unwrap(), vec![2, 17]);
        assert!(construct_lambda(&[11, 11]).is_err());
        assert!(construct_lambda(&[2, 11]).is_err());
    }

    #[test]
    fn model_at_2() {
        assert!(good_model_at_2(&b(17)).unwrap().delta.is_odd());
        assert!(good_model_at_2(&b(49)).unwrap().delta.is_odd());
        assert!(good_model_at_2(&b(33)).is_err());
    }

    #[test]
    fn probe() {
        let t = torsion_probe(&b(4049), 11, 20).unwrap();
        assert_eq!(t.bound % 4, 0);
        assert_ne!(t.bound % 11, 0);
        assert_eq!(t.primes.len(), 20);
    }
}
