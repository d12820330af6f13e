//! Elementary number theory on machine integers and big integers.
//!
//! Machine-word routines (`u64`, with `u128` intermediates) serve the residue
//! fields and prime scans, where every modulus stays far below 2^63. The
//! big-integer routines serve curve discriminants, which grow with the number
//! of primes folded into the Legendre parameter.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization, ascending primes with multiplicities.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Jacobi symbol (a | n) for odd positive n.
pub fn jacobi(a: i64, n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut t = 1i32;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol (disc | q) for a prime q.
pub fn kronecker_prime(disc: i64, q: u64) -> i32 {
    if q == 2 {
        if disc.rem_euclid(2) == 0 {
            return 0;
        }
        return match disc.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
    }
    jacobi(disc, q)
}

/// Euler's criterion; an independent route to the Legendre symbol.
pub fn euler_criterion(a: i64, q: u64) -> i32 {
    let a = a.rem_euclid(q as i64) as u64;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    }
}

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let mut n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        if n.is_multiple_of(p) {
            n /= p;
        }
        p += 1;
    }
    true
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i64) -> bool {
    n >= 0 && {
        let r = isqrt(n as u64);
        r * r == n as u64
    }
}

/// A square root of `a` modulo an odd prime `q` (Tonelli-Shanks), if one exists.
pub fn sqrt_mod(a: i64, q: u64) -> Option<u64> {
    let a = a.rem_euclid(q as i64) as u64;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (q - 1) / 2, q) != 1 {
        return None;
    }
    let mut s = 0;
    let mut t = q - 1;
    while t.is_multiple_of(2) {
        t /= 2;
        s += 1;
    }
    let z = (2..q).find(|&z| pow_mod(z, (q - 1) / 2, q) == q - 1)?;
    let mut m = s;
    let mut c = pow_mod(z, t, q);
    let mut x = pow_mod(a, t.div_ceil(2), q);
    let mut b = pow_mod(a, t, q);
    while b != 1 {
        let mut i = 0;
        let mut b2 = b;
        while b2 != 1 {
            b2 = mul_mod(b2, b2, q);
            i += 1;
        }
        let f = pow_mod(c, 1 << (m - i - 1), q);
        x = mul_mod(x, f, q);
        c = mul_mod(f, f, q);
        b = mul_mod(b, c, q);
        m = i;
    }
    Some(x.min(q - x))
}

/// Modular inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// q-adic valuation of a nonzero big integer.
pub fn valuation(n: &BigInt, q: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let q = BigInt::from(q);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (d, r) = n.div_rem(&q);
        if !r.is_zero() {
            return k;
        }
        n = d;
        k += 1;
    }
}

fn big_pow_mod_is_witness(n: &BigUint, a: &BigUint, d: &BigUint, s: u32) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let mut x = a.modpow(d, n);
    if x == one || x == n1 {
        return false;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return false;
        }
    }
    true
}

/// Miller-Rabin on big integers with the first 13 prime bases.
///
/// Deterministic below 3.3e24, probabilistic (error below 4^-13) above.
pub fn is_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    const BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    for &b in &BASES {
        if (n % b).is_zero() {
            return false;
        }
    }
    let n1 = n - BigUint::one();
    let s = n1.trailing_zeros().unwrap_or(0) as u32;
    let d = &n1 >> s;
    !BASES
        .iter()
        .any(|&b| big_pow_mod_is_witness(n, &BigUint::from(b), &d, s))
}

fn pollard_brent(n: &BigUint, c: u64) -> Option<BigUint> {
    let one = BigUint::one();
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 64u64;
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g == one {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        if r > 1 << 26 {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if g != one {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

fn factor_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_prime_big(&n) {
        out.push(n);
        return;
    }
    if let Some(small) = n.to_u64() {
        for (p, k) in factorize(small) {
            for _ in 0..k {
                out.push(BigUint::from(p));
            }
        }
        return;
    }
    for c in 1u64.. {
        if let Some(f) = pollard_brent(&n, c) {
            let cofactor = &n / &f;
            factor_into(f, out);
            factor_into(cofactor, out);
            return;
        }
    }
}

/// Factor |n| into ascending primes with multiplicities.
pub fn factorize_big(n: &BigInt) -> Vec<(BigUint, u32)> {
    let mut n = n.magnitude().clone();
    assert!(!n.is_zero(), "cannot factor zero");
    let mut primes = Vec::new();
    for p in (2u32..10_000).filter(|&p| is_prime(p as u64)) {
        if n.is_one() {
            break;
        }
        while (&n % p).is_zero() {
            n /= p;
            primes.push(BigUint::from(p));
        }
    }
    factor_into(n, &mut primes);
    primes.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((last, k)) if *last == p => *k += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn big_sign(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// n mod m as a machine word, for m > 0.
pub fn big_mod_u64(n: &BigInt, m: u64) -> u64 {
    let r = n.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits in u64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_sieve() {
        let mut sieve = vec![true; 5000];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..5000 {
            if sieve[i] {
                let mut j = i * i;
                while j < 5000 {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        for (n, &flag) in sieve.iter().enumerate() {
            assert_eq!(is_prime(n as u64), flag, "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn jacobi_agrees_with_euler() {
        for q in (3..400u64).filter(|&q| is_prime(q)) {
            for a in -50..50 {
                assert_eq!(jacobi(a, q), euler_criterion(a, q), "a={a} q={q}");
            }
        }
    }

    #[test]
    fn kronecker_at_two() {
        assert_eq!(kronecker_prime(-4, 2), 0);
        assert_eq!(kronecker_prime(5, 2), -1);
        assert_eq!(kronecker_prime(-7, 2), 1);
        assert_eq!(kronecker_prime(17, 2), 1);
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(-1));
        assert!(is_squarefree(30));
        assert!(!is_squarefree(12));
        assert!(!is_squarefree(-18));
        assert!(!is_squarefree(0));
    }

    #[test]
    fn big_factorization_roundtrip() {
        let n = BigInt::from(16u64 * 43 * 131 * 263 * 307 + 1);
        let f = factorize_big(&n);
        let back: BigUint = f.iter().map(|(p, k)| p.pow(*k)).product();
        assert_eq!(BigInt::from(back), n);
        assert!(f.iter().all(|(p, _)| is_prime_big(p)));

        let semiprime = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        let f = factorize_big(&semiprime);
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn square_roots() {
        for q in (3..300u64).filter(|&q| is_prime(q)) {
            for a in 0..q as i64 {
                match sqrt_mod(a, q) {
                    Some(r) => assert_eq!(mul_mod(r, r, q), a as u64),
                    None => assert_eq!(euler_criterion(a, q), -1),
                }
            }
        }
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&BigInt::from(4048), 2), 4);
        assert_eq!(valuation(&BigInt::from(-363), 11), 2);
        assert_eq!(valuation(&BigInt::from(7), 3), 0);
    }
}
