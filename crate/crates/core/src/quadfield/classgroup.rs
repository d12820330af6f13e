use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{BinaryForm, QuadElement, QuadraticField};
use crate::arith::{is_prime, isqrt};
use crate::error::{Error, Result};
use crate::linalg::{hnf_rows, smith, IntMatrix};

/// Desk-scale limits for class-group computations.
#[derive(Clone, Copy, Debug)]
pub struct ClassGroupBounds {
    pub max_abs_disc_imaginary: u64,
    pub max_disc_real: u64,
}

impl Default for ClassGroupBounds {
    fn default() -> Self {
        ClassGroupBounds {
            max_abs_disc_imaginary: 4_000_000,
            max_disc_real: 40_000,
        }
    }
}

/// An ideal aZ + ((−b + √Δ)/2)Z, reported as (norm, root) = (a, b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdealGenerator {
    pub norm: i64,
    pub root: i64,
}

impl IdealGenerator {
    pub fn form(&self, disc: i64) -> BinaryForm {
        BinaryForm::from_ab(self.norm, self.root, disc).expect("generator has discriminant disc")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupData {
    pub h: u64,
    /// Cyclic factor orders, each dividing the next.
    pub structure: Vec<u64>,
    pub generators: Vec<IdealGenerator>,
}

/// Prime forms (ℓ, b, c) for primes ℓ ≤ bound not inert in K.
fn prime_forms(disc: i64, bound: i64) -> Vec<BinaryForm> {
    let mut out = Vec::new();
    for l in (2..=bound).filter(|&l| is_prime(l as u64)) {
        if let Some(b) = (0..=l).find(|&b| BinaryForm::from_ab(l, b, disc).is_some()) {
            out.push(BinaryForm::from_ab(l, b, disc).expect("found above"));
        }
    }
    out
}

/// Class group via reduced forms (Gaussian composition): generated by prime
/// forms under the Minkowski bound, structure from the SNF of the relations
/// found while enumerating the group.
pub fn class_group(k: &QuadraticField, bounds: ClassGroupBounds) -> Result<ClassGroupData> {
    let disc = k.disc();
    let abs = disc.unsigned_abs();
    if disc < 0 && abs > bounds.max_abs_disc_imaginary {
        return Err(Error::BoundExceeded {
            what: format!("|disc| = {abs} for the imaginary class group"),
            bound: bounds.max_abs_disc_imaginary,
        });
    }
    if disc > 0 && abs > bounds.max_disc_real {
        return Err(Error::BoundExceeded {
            what: format!("disc = {abs} for the real class group"),
            bound: bounds.max_disc_real,
        });
    }
    let sd = (abs as f64).sqrt();
    let mink = if disc < 0 {
        2.0 / std::f64::consts::PI * sd
    } else {
        sd / 2.0
    };
    let candidates = prime_forms(disc, mink.floor() as i64 + 1);
    let identity = BinaryForm::identity(disc).canonical();

    // canonical class -> exponent vector over the chosen generators
    let mut elements: HashMap<BinaryForm, Vec<i64>> = HashMap::from([(identity, Vec::new())]);
    let mut gens: Vec<BinaryForm> = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();
    for cand in candidates {
        let g = cand.canonical();
        if elements.contains_key(&g) {
            continue;
        }
        let mut cur = g;
        let mut order = 1i64;
        while !elements.contains_key(&cur) {
            cur = cur.compose(&g).canonical();
            order += 1;
        }
        let mut rel = elements[&cur].iter().map(|x| -x).collect::<Vec<_>>();
        rel.push(order);
        relations.push(rel);

        let old: Vec<(BinaryForm, Vec<i64>)> = elements.iter().map(|(f, e)| (*f, e.clone())).collect();
        let mut gi = identity;
        for i in 1..order {
            gi = gi.compose(&g).canonical();
            for (f, e) in &old {
                let mut ex = e.clone();
                ex.resize(gens.len(), 0);
                ex.push(i);
                elements.insert(f.compose(&gi).canonical(), ex);
            }
        }
        for e in elements.values_mut() {
            e.resize(gens.len() + 1, 0);
        }
        gens.push(g);
    }
    let h = elements.len() as u64;
    if disc < 0 {
        let direct = count_reduced_definite(disc);
        if direct != h {
            return Err(Error::check("class-number", format!("{h} classes reached, {direct} reduced forms")));
        }
    }

    let n = gens.len();
    let rel_rows: Vec<Vec<BigInt>> = relations
        .iter()
        .map(|r| {
            let mut row: Vec<BigInt> = r.iter().map(|&x| BigInt::from(x)).collect();
            row.resize(n, BigInt::zero());
            row
        })
        .collect();
    let s = smith(&IntMatrix::from_rows(rel_rows, n));
    let mut structure = Vec::new();
    let mut generators = Vec::new();
    for (j, dj) in s.diag.iter().enumerate() {
        if dj.is_one() {
            continue;
        }
        let dj = dj.to_u64().expect("cyclic order fits in u64");
        let mut f = BinaryForm::identity(disc).reduce();
        for (i, g) in gens.iter().enumerate() {
            let e = s.v_inv.get(j, i).mod_floor(&BigInt::from(dj as i64 * h as i64));
            let e = e.to_i64().expect("exponent fits");
            f = f.compose(&g.pow_signed(e));
        }
        let f = f.canonical();
        if class_order(&f) != dj {
            return Err(Error::check("class-generator", format!("{f:?} lacks order {dj}")));
        }
        structure.push(dj);
        let f = if f.a < 0 { f.negate() } else { f };
        generators.push(IdealGenerator { norm: f.a, root: f.b });
    }
    if structure.iter().product::<u64>() != h {
        return Err(Error::check("class-structure", "cyclic orders do not multiply to h"));
    }
    for g in &generators {
        if g.form(disc).pow(h).canonical() != identity {
            return Err(Error::check("class-generator", "h-th power is not principal"));
        }
    }
    Ok(ClassGroupData {
        h,
        structure,
        generators,
    })
}

fn class_order(f: &BinaryForm) -> u64 {
    let id = BinaryForm::identity(f.disc()).canonical();
    let mut cur = f.canonical();
    let mut k = 1;
    while cur != id {
        cur = cur.compose(f).canonical();
        k += 1;
    }
    k
}

/// Number of reduced primitive positive definite forms of discriminant disc.
pub fn count_reduced_definite(disc: i64) -> u64 {
    let bound = isqrt((-disc / 3) as u64) as i64;
    let mut h = 0;
    for a in 1..=bound {
        for b in -a + 1..=a {
            if let Some(f) = BinaryForm::from_ab(a, b, disc) {
                if f.is_reduced() && f.is_primitive() {
                    h += 1;
                }
            }
        }
    }
    h
}

// ---- explicit generators of principal ideals (imaginary fields) ----

type Elt = (BigInt, BigInt);

struct BigArith {
    delta: BigInt,
    n_omega: BigInt,
}

impl BigArith {
    fn new(disc: i64) -> Self {
        let delta = disc.rem_euclid(2);
        BigArith {
            delta: delta.into(),
            n_omega: ((delta - disc) / 4).into(),
        }
    }

    fn mul(&self, x: &Elt, y: &Elt) -> Elt {
        let u = &x.0 * &y.0 - &x.1 * &y.1 * &self.n_omega;
        let v = &x.0 * &y.1 + &y.0 * &x.1 + &self.delta * &x.1 * &y.1;
        (u, v)
    }

    fn norm(&self, x: &Elt) -> BigInt {
        &x.0 * &x.0 + &self.delta * &x.0 * &x.1 + &self.n_omega * &x.1 * &x.1
    }

    fn add_scaled(&self, x: &Elt, k: &BigInt, y: &Elt) -> Elt {
        (&x.0 + k * &y.0, &x.1 + k * &y.1)
    }

    fn ideal_mul(&self, a: &[Elt; 2], b: &[Elt; 2]) -> [Elt; 2] {
        let mut rows = Vec::new();
        for x in a {
            for y in b {
                let p = self.mul(x, y);
                // (ω-coordinate, 1-coordinate) so the HNF pivots on ω first
                rows.push(vec![p.1, p.0]);
            }
        }
        let h = hnf_rows(&rows, 2);
        [(h[0][1].clone(), h[0][0].clone()), (h[1][1].clone(), h[1][0].clone())]
    }
}

/// An element α with (α) = 𝔞ⁿ for the ideal of `gen`, when that power is
/// principal. Imaginary fields only: the generator is the shortest vector
/// of the ideal lattice under the norm form, found by Lagrange reduction.
pub fn principal_generator(k: &QuadraticField, gen: IdealGenerator, n: u64) -> Result<Option<QuadElement>> {
    let disc = k.disc();
    if disc > 0 {
        return Err(Error::Unsupported("principal generators for real fields".into()));
    }
    let ar = BigArith::new(disc);
    // (−b + √Δ)/2 = (−b − δ)/2 + ω
    let t = (-gen.root - disc.rem_euclid(2)).div_euclid(2);
    let base: [Elt; 2] = [(BigInt::from(gen.norm), BigInt::zero()), (BigInt::from(t), BigInt::one())];
    let mut acc: [Elt; 2] = [(BigInt::one(), BigInt::zero()), (BigInt::zero(), BigInt::one())];
    let mut sq = base;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = ar.ideal_mul(&acc, &sq);
        }
        sq = ar.ideal_mul(&sq, &sq);
        e >>= 1;
    }
    let target = BigInt::from(gen.norm).pow(n as u32);
    let [mut v1, mut v2] = acc;
    loop {
        let (n1, n2) = (ar.norm(&v1), ar.norm(&v2));
        if n2 < n1 {
            std::mem::swap(&mut v1, &mut v2);
            continue;
        }
        let sum = (&v1.0 + &v2.0, &v1.1 + &v2.1);
        let b = ar.norm(&sum) - &n1 - &n2;
        // μ = round(b / 2n1)
        let mu = (&b + &n1).div_floor(&(BigInt::from(2) * &n1));
        if mu.is_zero() {
            break;
        }
        v2 = ar.add_scaled(&v2, &-mu, &v1);
    }
    if ar.norm(&v1) != target {
        return Ok(None);
    }
    let (u, v) = v1;
    Ok(Some(if disc.rem_euclid(2) == 1 {
        QuadElement {
            a: BigInt::from(2) * &u + &v,
            b: v,
            denom: 2,
        }
    } else {
        QuadElement { a: u, b: v, denom: 1 }
    }))
}
