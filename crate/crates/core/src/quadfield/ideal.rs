//! Ideals of O_K as Z-modules in the basis (1, ω), ω = (δ + √Δ)/2, and an
//! independent class-number computation by enumerating ideals under the
//! Minkowski bound and testing principality with a bounded element search.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{fundamental_unit, QuadraticField};
use crate::error::{Error, Result};

/// The ideal aZ + (b + cω)Z in Hermite form: a, c > 0, c | a, c | b,
/// 0 ≤ b < a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ideal {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

#[derive(Clone, Copy, Debug)]
struct Arith {
    delta: i64,
    /// N(ω) = (δ − Δ)/4
    n_omega: i64,
}

impl Arith {
    fn new(k: &QuadraticField) -> Self {
        let disc = k.disc();
        let delta = disc.rem_euclid(2);
        Arith {
            delta,
            n_omega: (delta - disc) / 4,
        }
    }

    /// (u1 + v1ω)(u2 + v2ω), using ω² = δω − N(ω).
    fn mul(&self, x: (i64, i64), y: (i64, i64)) -> (i64, i64) {
        let (u1, v1) = (x.0 as i128, x.1 as i128);
        let (u2, v2) = (y.0 as i128, y.1 as i128);
        let u = u1 * u2 - v1 * v2 * self.n_omega as i128;
        let v = u1 * v2 + u2 * v1 + self.delta as i128 * v1 * v2;
        (i64::try_from(u).expect("ideal arithmetic overflow"), i64::try_from(v).expect("ideal arithmetic overflow"))
    }

    fn norm(&self, u: i64, v: i64) -> i128 {
        let (u, v) = (u as i128, v as i128);
        u * u + self.delta as i128 * u * v + self.n_omega as i128 * v * v
    }

    fn conj(&self, x: (i64, i64)) -> (i64, i64) {
        (x.0 + x.1 * self.delta, -x.1)
    }
}

/// Hermite form of the Z-span of some elements (u, v) = u + vω.
fn hnf(gens: &[(i64, i64)]) -> Ideal {
    // gcd-eliminate the ω-coordinate into a single row
    let mut rows: Vec<(i64, i64)> = gens.to_vec();
    let mut pivot: Option<(i64, i64)> = None;
    let mut lattice_a = 0i64;
    for (u, v) in rows.drain(..) {
        match pivot {
            None if v == 0 => lattice_a = lattice_a.gcd(&u),
            None => pivot = Some((u, v)),
            Some((pu, pv)) => {
                let e = pv.extended_gcd(&v);
                let g = e.gcd;
                let new_pivot = (e.x * pu + e.y * u, g);
                // the complementary combination has zero ω-coordinate
                let rest = (v / g) * pu - (pv / g) * u;
                lattice_a = lattice_a.gcd(&rest);
                pivot = Some(new_pivot);
            }
        }
    }
    let (pu, pv) = pivot.expect("ideal has full rank");
    let (pu, pv) = if pv < 0 { (-pu, -pv) } else { (pu, pv) };
    let a = lattice_a.abs();
    assert!(a > 0, "ideal has full rank");
    Ideal {
        a,
        b: pu.rem_euclid(a),
        c: pv,
    }
}

impl Ideal {
    pub fn unit() -> Ideal {
        Ideal { a: 1, b: 0, c: 1 }
    }

    /// The primitive ideal aZ + (t + ω)Z; requires a | N(t + ω).
    pub fn primitive(k: &QuadraticField, a: i64, t: i64) -> Option<Ideal> {
        let ar = Arith::new(k);
        (a > 0 && ar.norm(t, 1) % a as i128 == 0).then(|| Ideal {
            a,
            b: t.rem_euclid(a),
            c: 1,
        })
    }

    pub fn norm(&self) -> i64 {
        self.a * self.c
    }

    fn basis(&self) -> [(i64, i64); 2] {
        [(self.a, 0), (self.b, self.c)]
    }

    pub fn mul(&self, other: &Ideal, k: &QuadraticField) -> Ideal {
        let ar = Arith::new(k);
        let mut gens = Vec::with_capacity(4);
        for x in self.basis() {
            for y in other.basis() {
                gens.push(ar.mul(x, y));
            }
        }
        hnf(&gens)
    }

    pub fn conjugate(&self, k: &QuadraticField) -> Ideal {
        let ar = Arith::new(k);
        hnf(&self.basis().map(|x| ar.conj(x)))
    }

    /// Whether the ideal has a generator, by searching elements α with
    /// |α|, |α′| ≤ √(N·ε) (ε = 1 for imaginary fields).
    pub fn is_principal(&self, k: &QuadraticField, epsilon: f64, max_work: u64) -> Result<bool> {
        let ar = Arith::new(k);
        let n = self.norm() as f64;
        let disc = k.disc();
        let target = self.norm() as i128;
        let sd = (disc.unsigned_abs() as f64).sqrt();
        let radius = (n * epsilon).sqrt() + 1.0;
        // α = x·a + y·(b + cω) = u + vω, v = y·c
        let ymax = (2.0 * radius / sd / self.c as f64).floor() as i64 + 1;
        let mut work = 0u64;
        for y in -ymax..=ymax {
            let v = y * self.c;
            // real part (or half-trace) of α is u + vδ/2; |.| ≤ radius
            let center = -(v as f64) * ar.delta as f64 / 2.0;
            let ulo = center - radius;
            let uhi = center + radius;
            // u = x·a + y·b
            let xlo = ((ulo - (y * self.b) as f64) / self.a as f64).floor() as i64 - 1;
            let xhi = ((uhi - (y * self.b) as f64) / self.a as f64).ceil() as i64 + 1;
            work += (xhi - xlo + 1) as u64;
            if work > max_work {
                return Err(Error::BoundExceeded {
                    what: "principal ideal search".into(),
                    bound: max_work,
                });
            }
            for x in xlo..=xhi {
                let u = x * self.a + y * self.b;
                if ar.norm(u, v).abs() == target {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Class number by Minkowski-bound enumeration of primitive ideals, merged
/// whenever 𝔞·conj(𝔟) is principal.
pub fn class_number_by_ideals(k: &QuadraticField, max_work: u64) -> Result<u64> {
    let disc = k.disc();
    let sd = (disc.unsigned_abs() as f64).sqrt();
    let bound = if disc < 0 {
        2.0 / std::f64::consts::PI * sd
    } else {
        sd / 2.0
    };
    let bound = bound.floor() as i64 + 1;
    let epsilon = if disc > 0 {
        let u = fundamental_unit(k)?.fundamental_unit.expect("real field has a unit");
        let a: f64 = u.a.to_string().parse().unwrap_or(f64::INFINITY);
        let b: f64 = u.b.to_string().parse().unwrap_or(f64::INFINITY);
        (a + b * (k.d() as f64).sqrt()) / u.denom as f64
    } else {
        1.0
    };
    if !epsilon.is_finite() || epsilon > 1e12 {
        return Err(Error::BoundExceeded {
            what: "fundamental unit size for the ideal oracle".into(),
            bound: 1_000_000_000_000,
        });
    }
    let mut ideals = Vec::new();
    for a in 1..=bound {
        for t in 0..a {
            if let Some(i) = Ideal::primitive(k, a, t) {
                ideals.push(i);
            }
        }
    }
    let conj: Vec<Ideal> = ideals.iter().map(|i| i.conjugate(k)).collect();
    let mut parent: Vec<usize> = (0..ideals.len()).collect();
    let mut cache: BTreeMap<Ideal, bool> = BTreeMap::new();
    for i in 0..ideals.len() {
        for j in 0..i {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            let prod = ideals[i].mul(&conj[j], k);
            let principal = match cache.get(&prod) {
                Some(&p) => p,
                None => {
                    let p = prod.is_principal(k, epsilon, max_work)?;
                    cache.insert(prod, p);
                    p
                }
            };
            if principal {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let roots: std::collections::BTreeSet<usize> =
        (0..ideals.len()).map(|i| find(&mut parent, i)).collect();
    Ok(roots.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_products() {
        let k = QuadraticField::new(-5).unwrap();
        // p2 = (2, 1 + √−5), p2² = (2)
        let p2 = Ideal::primitive(&k, 2, 1).unwrap();
        let sq = p2.mul(&p2, &k);
        assert_eq!(sq, Ideal { a: 2, b: 0, c: 2 });
        assert_eq!(sq.norm(), 4);
        assert!(!p2.is_principal(&k, 1.0, 1 << 20).unwrap());
        assert!(sq.is_principal(&k, 1.0, 1 << 20).unwrap());
        assert_eq!(p2.conjugate(&k), p2);
    }

    #[test]
    fn small_class_numbers() {
        for (d, h) in [(-1, 1), (-5, 2), (-23, 3), (-3, 1)] {
            let k = QuadraticField::new(d).unwrap();
            assert_eq!(class_number_by_ideals(&k, 1 << 24).unwrap(), h, "d = {d}");
        }
        // Q(√10): (2, √10) is not principal since x² − 10y² = ±2 has no solution
        let k = QuadraticField::new(10).unwrap();
        assert_eq!(class_number_by_ideals(&k, 1 << 24).unwrap(), 2);
    }
}
