//! Discrete logarithms in finite cyclic groups: baby-step giant-step on each
//! prime-order layer, glued by Pohlig-Hellman and the Chinese remainder
//! theorem.

use std::collections::HashMap;
use std::hash::Hash;

use crate::arith::{factorize, inv_mod};

/// Multiplicative group operations needed for discrete logarithms.
pub trait GroupOps {
    type Elem: Clone + Eq + Hash;

    fn one(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
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

/// x in [0, order) with g^x = h, where g has order dividing `order`.
pub fn bsgs<G: GroupOps>(grp: &G, g: &G::Elem, h: &G::Elem, order: u64) -> Option<u64> {
    if order == 0 {
        return None;
    }
    let m = (order as f64).sqrt().ceil() as u64;
    let m = m.max(1);
    let mut table: HashMap<G::Elem, u64> = HashMap::with_capacity(m as usize);
    let mut cur = grp.one();
    for j in 0..m {
        table.entry(cur.clone()).or_insert(j);
        cur = grp.mul(&cur, g);
    }
    // g^-m
    let step = grp.pow(g, (order - m % order) % order);
    let mut gamma = h.clone();
    for i in 0..=m {
        if let Some(&j) = table.get(&gamma) {
            let x = (i * m + j) % order;
            return Some(x);
        }
        gamma = grp.mul(&gamma, &step);
    }
    None
}

/// log_g(h) modulo `order`, the exact order of g.
pub fn discrete_log<G: GroupOps>(grp: &G, g: &G::Elem, h: &G::Elem, order: u64) -> Option<u64> {
    discrete_log_factored(grp, g, h, order, &factorize(order))
}

/// [`discrete_log`] with the factorization of `order` supplied.
pub fn discrete_log_factored<G: GroupOps>(
    grp: &G,
    g: &G::Elem,
    h: &G::Elem,
    order: u64,
    factors: &[(u64, u32)],
) -> Option<u64> {
    let mut residues: Vec<(u64, u64)> = Vec::new();
    for &(l, k) in factors {
        let lk = l.pow(k);
        let cofactor = order / lk;
        let gi = grp.pow(g, cofactor);
        let hi = grp.pow(h, cofactor);
        // gamma has exact order l
        let gamma = grp.pow(&gi, lk / l);
        let mut x = 0u64;
        let mut lj = 1u64;
        for _ in 0..k {
            // strip the known digits: (g_i^-x h_i)^(l^(k-1-j))
            let gx_inv = grp.pow(&gi, (lk - x % lk) % lk);
            let t = grp.pow(&grp.mul(&gx_inv, &hi), lk / lj / l);
            let digit = bsgs(grp, &gamma, &t, l)?;
            x += digit * lj;
            lj *= l;
        }
        residues.push((x, lk));
    }
    let x = crt(&residues)?;
    (grp.pow(g, x) == *h).then_some(x)
}

/// Combines x ≡ rᵢ mod mᵢ for pairwise coprime moduli.
pub fn crt(residues: &[(u64, u64)]) -> Option<u64> {
    let mut x: u128 = 0;
    let mut m: u128 = 1;
    for &(r, mi) in residues {
        let mi = mi as u128;
        // x + m t ≡ r mod mi
        let inv = inv_mod((m % mi) as i64, mi as i64)? as u128;
        let diff = ((r as u128 % mi) + mi - x % mi) % mi;
        let t = diff * inv % mi;
        x += m * t;
        m *= mi;
    }
    u64::try_from(x % m).ok()
}

/// Multiplicative group of Z/q.
#[derive(Clone, Copy, Debug)]
pub struct PrimeField(pub u64);

impl GroupOps for PrimeField {
    type Elem = u64;

    fn one(&self) -> u64 {
        1
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        crate::arith::mul_mod(*a, *b, self.0)
    }
}

/// First primitive root modulo the prime q met by scanning cyclically from 1 + start.
pub fn primitive_root(q: u64, start: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let f = PrimeField(q);
    let primes: Vec<u64> = factorize(q - 1).into_iter().map(|(l, _)| l).collect();
    let n = q - 1;
    (0..n)
        .map(|i| 1 + (start + i) % n)
        .find(|g| primes.iter().all(|&l| f.pow(g, n / l) != 1))
        .expect("a primitive root exists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;

    #[test]
    fn logs_in_prime_fields() {
        for q in [101u64, 257, 7919, 65537, 1_000_003] {
            let g = primitive_root(q, 0);
            let f = PrimeField(q);
            for x in [0u64, 1, 2, 17, q / 3, q - 2] {
                let h = f.pow(&g, x);
                assert_eq!(discrete_log(&f, &g, &h, q - 1), Some(x % (q - 1)));
                assert_eq!(bsgs(&f, &g, &h, q - 1), Some(x % (q - 1)));
            }
        }
    }

    #[test]
    fn primitive_roots_have_full_order() {
        // oracle: exhaustive order of the returned element
        for q in (3..300u64).filter(|&q| is_prime(q)) {
            let g = primitive_root(q, 5);
            let f = PrimeField(q);
            let order = (1..q).find(|&k| f.pow(&g, k) == 1).unwrap();
            assert_eq!(order, q - 1);
        }
    }

    #[test]
    fn crt_combines() {
        assert_eq!(crt(&[(2, 3), (3, 5), (2, 7)]), Some(23));
        assert_eq!(crt(&[(0, 4), (1, 9)]), Some(28));
    }
}
