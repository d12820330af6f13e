use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{QuadElement, QuadraticField};
use crate::arith::{is_square, isqrt};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGroupData {
    pub torsion_order: u32,
    /// (a + b√d)/denom with a, b > 0; real fields only.
    pub fundamental_unit: Option<QuadElement>,
    /// Norm of the fundamental unit, ±1.
    pub norm: Option<i32>,
}

impl UnitGroupData {
    pub fn imaginary(k: &QuadraticField) -> Self {
        UnitGroupData {
            torsion_order: k.torsion_order(),
            fundamental_unit: None,
            norm: None,
        }
    }
}

/// Continued-fraction steps allowed before giving up.
pub const MAX_PERIOD: usize = 100_000;

/// Fundamental unit of a real quadratic field from the continued fraction
/// of ω (√d, or (1 + √d)/2 when d ≡ 1 mod 4): the first convergent h/k with
/// h − kω of norm ±1 yields ε = h − kω′.
pub fn fundamental_unit(k: &QuadraticField) -> Result<UnitGroupData> {
    let d = k.d();
    if d < 2 {
        return Err(Error::invalid("fundamental units are computed for real fields only"));
    }
    let one_mod_four = d % 4 == 1;
    let s = isqrt(d as u64) as i64;
    // ω = (P + √d)/Q
    let (mut pp, mut qq) = if one_mod_four { (1i64, 2i64) } else { (0, 1) };
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let dn = BigInt::from(d);
    for _ in 0..MAX_PERIOD {
        let a = (pp + s).div_euclid(qq);
        let h2 = BigInt::from(a) * &h1 + &h0;
        let k2 = BigInt::from(a) * &k1 + &k0;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let (ua, ub, denom) = if one_mod_four {
            (BigInt::from(2) * &h1 - &k1, k1.clone(), 2u8)
        } else {
            (h1.clone(), k1.clone(), 1u8)
        };
        let n = &ua * &ua - &dn * &ub * &ub;
        let scale = BigInt::from(denom as u32 * denom as u32);
        if n.abs() == scale {
            let norm = if n.is_positive() { 1 } else { -1 };
            return Ok(UnitGroupData {
                torsion_order: 2,
                fundamental_unit: Some(QuadElement { a: ua, b: ub, denom }),
                norm: Some(norm),
            });
        }
        pp = a * qq - pp;
        qq = (d - pp * pp) / qq;
    }
    Err(Error::BoundExceeded {
        what: format!("continued fraction of Q(sqrt({d}))"),
        bound: MAX_PERIOD as u64,
    })
}

/// Brute-force oracle: the unit (x + y√d)/denom with the smallest y ≥ 1,
/// searching y ≤ `max_y`.
pub fn fundamental_unit_by_search(k: &QuadraticField, max_y: u64) -> Option<QuadElement> {
    let d = k.d();
    if d < 2 {
        return None;
    }
    let (scale, denom) = if d % 4 == 1 { (4i128, 2u8) } else { (1, 1) };
    for y in 1..=max_y as i128 {
        for sign in [-1i128, 1] {
            let x2 = d as i128 * y * y + sign * scale;
            if x2 <= 0 || x2 > i64::MAX as i128 || !is_square(x2 as i64) {
                continue;
            }
            let x = isqrt(x2 as u64) as i128;
            if denom == 2 && (x - y) % 2 != 0 {
                continue;
            }
            return Some(QuadElement {
                a: BigInt::from(x),
                b: BigInt::from(y),
                denom,
            });
        }
    }
    None
}
