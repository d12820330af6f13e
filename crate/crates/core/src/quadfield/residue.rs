use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{QuadElement, QuadraticField, SplittingType};
use crate::arith::{big_mod_u64, factorize, inv_mod, mul_mod, pow_mod, sqrt_mod};
use crate::dlog::{discrete_log_factored, primitive_root, GroupOps, PrimeField};
use crate::error::{Error, Result};

/// Largest residue-field prime handled with machine-word arithmetic.
pub const MAX_RESIDUE_PRIME: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResidueModel {
    /// F_q[t]/(t² − d), t the image of √d.
    Inert,
    /// F_q × F_q via a + b√d ↦ (a + br, a − br), r² = d.
    Split,
}

/// An element of O/q: `c0 + c1·t` (inert) or the pair `(c0, c1)` (split).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Residue(pub u64, pub u64);

/// (O/q)^× presented by generators, with the Galois action on exponents.
#[derive(Clone, Debug)]
pub struct ResidueUnitGroup {
    pub q: u64,
    pub model: ResidueModel,
    /// d mod q.
    pub d_mod_q: u64,
    /// Square root of d mod q in the split model.
    pub root: Option<u64>,
    pub generators: Vec<Residue>,
    pub orders: Vec<u64>,
    /// Column j holds the exponents of tau(generator j).
    pub tau: Vec<Vec<u64>>,
    factors: Vec<(u64, u32)>,
}

impl ResidueUnitGroup {
    /// Presents (O/q)^× for an odd prime q unramified in K. The generator
    /// scan starts at an offset derived from `seed`.
    pub fn new(k: &QuadraticField, q: u64, seed: u64) -> Result<Self> {
        if q == 2 || q >= MAX_RESIDUE_PRIME || !crate::arith::is_prime(q) {
            return Err(Error::invalid(format!(
                "residue prime q = {q} must be an odd prime below 2^31"
            )));
        }
        let d_mod_q = k.d().rem_euclid(q as i64) as u64;
        match k.splitting_type(q) {
            SplittingType::Ramified => {
                Err(Error::invalid(format!("q = {q} ramifies in Q(sqrt({}))", k.d())))
            }
            SplittingType::Inert => {
                let n = q * q - 1;
                let factors = merge_factors(&factorize(q - 1), &factorize(q + 1));
                let mut grp = ResidueUnitGroup {
                    q,
                    model: ResidueModel::Inert,
                    d_mod_q,
                    root: None,
                    generators: Vec::new(),
                    orders: vec![n],
                    tau: vec![vec![q]],
                    factors,
                };
                let start = seed % (q * q);
                let x = (0..q * q)
                    .map(|i| (start + i) % (q * q))
                    .map(|idx| Residue(idx % q, idx / q))
                    .find(|x| *x != Residue(0, 0) && grp.has_order(x, n))
                    .expect("F_q^2 has a generator");
                grp.generators.push(x);
                Ok(grp)
            }
            SplittingType::Split => {
                let r = sqrt_mod(d_mod_q as i64, q).expect("split primes have a root");
                let x = primitive_root(q, seed % (q - 1));
                Ok(ResidueUnitGroup {
                    q,
                    model: ResidueModel::Split,
                    d_mod_q,
                    root: Some(r),
                    generators: vec![Residue(x, 1), Residue(1, x)],
                    orders: vec![q - 1, q - 1],
                    tau: vec![vec![0, 1], vec![1, 0]],
                    factors: factorize(q - 1),
                })
            }
        }
    }

    /// Total order: q² − 1 (inert) or (q − 1)² (split).
    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    fn has_order(&self, x: &Residue, n: u64) -> bool {
        self.pow(x, n) == self.one()
            && self.factors.iter().all(|&(l, _)| self.pow(x, n / l) != self.one())
    }

    pub fn inverse(&self, x: &Residue) -> Residue {
        let q = self.q;
        match self.model {
            ResidueModel::Split => Residue(inv(x.0, q), inv(x.1, q)),
            ResidueModel::Inert => {
                // (a + bt)^-1 = (a − bt)/(a² − d b²)
                let n = (mul_mod(x.0, x.0, q) + q - mul_mod(self.d_mod_q, mul_mod(x.1, x.1, q), q)) % q;
                let ni = inv(n, q);
                Residue(mul_mod(x.0, ni, q), mul_mod((q - x.1) % q, ni, q))
            }
        }
    }

    /// The nontrivial automorphism: t ↦ −t, or the coordinate swap.
    pub fn tau(&self, x: &Residue) -> Residue {
        match self.model {
            ResidueModel::Inert => Residue(x.0, (self.q - x.1) % self.q),
            ResidueModel::Split => Residue(x.1, x.0),
        }
    }

    pub fn is_unit(&self, x: &Residue) -> bool {
        match self.model {
            ResidueModel::Split => !x.0.is_multiple_of(self.q) && !x.1.is_multiple_of(self.q),
            ResidueModel::Inert => *x != Residue(0, 0),
        }
    }

    /// Image of a rational integer.
    pub fn from_integer(&self, n: &BigInt) -> Residue {
        let r = big_mod_u64(n, self.q);
        match self.model {
            ResidueModel::Inert => Residue(r, 0),
            ResidueModel::Split => Residue(r, r),
        }
    }

    /// Image of (a + b√d)/denom, or `None` if it is not a unit mod q.
    pub fn reduce(&self, x: &QuadElement) -> Option<Residue> {
        let q = self.q;
        let a = big_mod_u64(&x.a, q);
        let b = big_mod_u64(&x.b, q);
        let di = inv(x.denom as u64 % q, q);
        let (a, b) = (mul_mod(a, di, q), mul_mod(b, di, q));
        let r = match self.model {
            ResidueModel::Inert => Residue(a, b),
            ResidueModel::Split => {
                let br = mul_mod(b, self.root.expect("split model has a root"), q);
                Residue((a + br) % q, (a + q - br) % q)
            }
        };
        self.is_unit(&r).then_some(r)
    }

    /// Π generatorᵢ^eᵢ.
    pub fn element(&self, exps: &[u64]) -> Residue {
        self.generators
            .iter()
            .zip(exps)
            .fold(self.one(), |acc, (g, &e)| self.mul(&acc, &self.pow(g, e)))
    }

    /// Exponent vector of a unit with respect to the generators.
    pub fn log(&self, x: &Residue) -> Option<Vec<u64>> {
        if !self.is_unit(x) {
            return None;
        }
        match self.model {
            ResidueModel::Inert => {
                let n = self.orders[0];
                discrete_log_factored(self, &self.generators[0], x, n, &self.factors).map(|e| vec![e])
            }
            ResidueModel::Split => {
                let f = PrimeField(self.q);
                let g = self.generators[0].0;
                let e1 = discrete_log_factored(&f, &g, &x.0, self.q - 1, &self.factors)?;
                let e2 = discrete_log_factored(&f, &g, &x.1, self.q - 1, &self.factors)?;
                Some(vec![e1, e2])
            }
        }
    }

    /// Order of an element (divides the exponent of the group).
    pub fn element_order(&self, x: &Residue) -> u64 {
        let n = match self.model {
            ResidueModel::Inert => self.orders[0],
            ResidueModel::Split => self.q - 1,
        };
        let mut m = n;
        for &(l, _) in &self.factors {
            while m % l == 0 && self.pow(x, m / l) == self.one() {
                m /= l;
            }
        }
        m
    }

    /// Checks the presentation: exact generator orders, their product, the
    /// tau matrix, tau² = 1 and, inert case, tau(x) = x^q on the generator
    /// and on `samples`.
    pub fn verify(&self, samples: &[Residue]) -> Result<()> {
        let expected = match self.model {
            ResidueModel::Inert => self.q * self.q - 1,
            ResidueModel::Split => (self.q - 1) * (self.q - 1),
        };
        if self.order() != expected {
            return Err(Error::check("residue-order", format!("{} != {expected}", self.order())));
        }
        for (g, &n) in self.generators.iter().zip(&self.orders) {
            if self.element_order(g) != n {
                return Err(Error::check("residue-generator", format!("{g:?} lacks order {n}")));
            }
        }
        if self.model == ResidueModel::Split {
            // the two generators must be independent: (x,1), (1,x)
            let (a, b) = (self.generators[0], self.generators[1]);
            if a.1 != 1 || b.0 != 1 || a.0 != b.1 {
                return Err(Error::check("residue-generator", "split generators are not (x,1), (1,x)"));
            }
        }
        for (j, g) in self.generators.iter().enumerate() {
            let col: Vec<u64> = self.tau.iter().map(|row| row[j]).collect();
            if self.element(&col) != self.tau(g) {
                return Err(Error::check("residue-tau", format!("tau matrix wrong on generator {j}")));
            }
            if self.tau(&self.tau(g)) != *g {
                return Err(Error::check("residue-tau", "tau is not an involution"));
            }
        }
        if self.model == ResidueModel::Inert {
            for x in self.generators.iter().chain(samples) {
                if self.tau(x) != self.pow(x, self.q) {
                    return Err(Error::check("residue-frobenius", format!("tau(x) != x^q at {x:?}")));
                }
            }
        }
        Ok(())
    }

    /// Deterministic pseudo-random ring elements for Frobenius sampling.
    pub fn sample_elements(&self, count: usize, seed: u64) -> Vec<Residue> {
        let q = self.q;
        (0..count as u64)
            .map(|i| {
                let h = splitmix(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                Residue(h % q, (h >> 32) % q)
            })
            .collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn inv(a: u64, q: u64) -> u64 {
    inv_mod(a as i64, q as i64).expect("unit modulo q") as u64
}

fn merge_factors(a: &[(u64, u32)], b: &[(u64, u32)]) -> Vec<(u64, u32)> {
    let mut out: std::collections::BTreeMap<u64, u32> = std::collections::BTreeMap::new();
    for &(l, k) in a.iter().chain(b) {
        *out.entry(l).or_default() += k;
    }
    out.into_iter().collect()
}

impl GroupOps for ResidueUnitGroup {
    type Elem = Residue;

    fn one(&self) -> Residue {
        Residue(1, match self.model {
            ResidueModel::Inert => 0,
            ResidueModel::Split => 1,
        })
    }

    fn mul(&self, x: &Residue, y: &Residue) -> Residue {
        let q = self.q;
        match self.model {
            ResidueModel::Split => Residue(mul_mod(x.0, y.0, q), mul_mod(x.1, y.1, q)),
            ResidueModel::Inert => {
                let c0 = (mul_mod(x.0, y.0, q) + mul_mod(self.d_mod_q, mul_mod(x.1, y.1, q), q)) % q;
                let c1 = (mul_mod(x.0, y.1, q) + mul_mod(x.1, y.0, q)) % q;
                Residue(c0, c1)
            }
        }
    }

    fn pow(&self, x: &Residue, e: u64) -> Residue {
        match self.model {
            ResidueModel::Split => Residue(pow_mod(x.0, e, self.q), pow_mod(x.1, e, self.q)),
            ResidueModel::Inert => {
                let mut acc = self.one();
                let mut base = *x;
                let mut e = e;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = self.mul(&acc, &base);
                    }
                    base = self.mul(&base, &base);
                    e >>= 1;
                }
                acc
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> QuadraticField {
        QuadraticField::new(-1).unwrap()
    }

    #[test]
    fn inert_three_is_cyclic_of_order_eight() {
        let g = ResidueUnitGroup::new(&gaussian(), 3, 0).unwrap();
        assert_eq!(g.order(), 8);
        let x = g.generators[0];
        // oracle: powers of x run through all eight nonzero elements of F_9
        let powers: std::collections::BTreeSet<Residue> = (0..8).map(|k| g.pow(&x, k)).collect();
        assert_eq!(powers.len(), 8);
        assert_eq!(g.tau(&x), g.pow(&x, 3));
        g.verify(&[]).unwrap();
    }

    #[test]
    fn inert_eleven() {
        let g = ResidueUnitGroup::new(&gaussian(), 11, 5).unwrap();
        assert_eq!(g.order(), 120);
        let x = g.generators[0];
        let prod = g.mul(&g.tau(&x), &x);
        assert_eq!(prod, g.pow(&x, 12));
        assert_eq!(g.log(&prod).unwrap()[0] % 3, 0);
        let all: Vec<Residue> = (0..11).flat_map(|a| (0..11).map(move |b| Residue(a, b))).collect();
        g.verify(&all).unwrap();
    }

    #[test]
    fn split_five() {
        let g = ResidueUnitGroup::new(&gaussian(), 5, 0).unwrap();
        assert_eq!(g.model, ResidueModel::Split);
        assert_eq!(g.orders, vec![4, 4]);
        let x = g.generators[0];
        assert_eq!(g.tau(&x), g.generators[1]);
        g.verify(&[]).unwrap();
        // i = (r, -r) has order 4
        let i = g.reduce(&QuadElement { a: 0.into(), b: 1.into(), denom: 1 }).unwrap();
        assert_eq!(g.element_order(&i), 4);
    }

    #[test]
    fn ramified_and_two_rejected() {
        assert!(ResidueUnitGroup::new(&gaussian(), 2, 0).is_err());
        let k = QuadraticField::new(-5).unwrap();
        assert!(ResidueUnitGroup::new(&k, 5, 0).is_err());
    }

    #[test]
    fn logs_roundtrip() {
        for (d, q) in [(-1i64, 23u64), (-1, 13), (2, 37), (5, 19), (-5, 7)] {
            let k = QuadraticField::new(d).unwrap();
            let g = ResidueUnitGroup::new(&k, q, 17).unwrap();
            for x in g.sample_elements(40, 9) {
                if !g.is_unit(&x) {
                    continue;
                }
                let e = g.log(&x).unwrap();
                assert_eq!(g.element(&e), x);
            }
        }
    }

    #[test]
    fn reduction_respects_multiplication() {
        let k = QuadraticField::new(5).unwrap();
        let g = ResidueUnitGroup::new(&k, 13, 0).unwrap();
        // (1 + √5)/2 squared is (3 + √5)/2
        let phi = g.reduce(&QuadElement { a: 1.into(), b: 1.into(), denom: 2 }).unwrap();
        let phi2 = g.reduce(&QuadElement { a: 3.into(), b: 1.into(), denom: 2 }).unwrap();
        assert_eq!(g.mul(&phi, &phi), phi2);
    }
}
