//! Primitive binary quadratic forms ax² + bxy + cy² of a fixed discriminant,
//! with Gaussian composition and reduction.
//!
//! A form (a, b, c) stands for the ideal aZ + ((−b + √Δ)/2)Z. Definite forms
//! reduce to a unique representative. Indefinite forms reduce to a cycle
//! under the rho operator; a class is named by the least form on its cycle,
//! and wide ideal classes also merge f with −f.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::isqrt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

/// Steps allowed when walking an indefinite cycle.
const MAX_CYCLE: usize = 1 << 22;

impl BinaryForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryForm { a, b, c }
    }

    /// Form with the given a and b; c is solved from the discriminant.
    pub fn from_ab(a: i64, b: i64, disc: i64) -> Option<Self> {
        let num = b as i128 * b as i128 - disc as i128;
        let den = 4 * a as i128;
        if den == 0 || num % den != 0 {
            return None;
        }
        Some(BinaryForm::new(a, b, i64::try_from(num / den).ok()?))
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn identity(disc: i64) -> Self {
        let b = disc.rem_euclid(2);
        BinaryForm::from_ab(1, b, disc).expect("principal form exists")
    }

    pub fn inverse(&self) -> Self {
        BinaryForm::new(self.a, -self.b, self.c)
    }

    pub fn negate(&self) -> Self {
        BinaryForm::new(-self.a, self.b, -self.c)
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    /// Composition (Shanks' formulation of Dirichlet composition), not reduced.
    pub fn compose_raw(&self, other: &BinaryForm) -> BinaryForm {
        let disc = self.disc() as i128;
        let (f1, f2) = if self.a.abs() > other.a.abs() {
            (other, self)
        } else {
            (self, other)
        };
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1.abs())
        } else {
            let e = a2.extended_gcd(&a1);
            (e.x, e.gcd)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let e = s.extended_gcd(&d);
            (e.x, -e.y, e.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1.abs());
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (b3 * b3 - disc) / (4 * a3);
        assert_eq!(b3 * b3 - 4 * a3 * c3, disc, "composition left the discriminant");
        BinaryForm::new(a3 as i64, b3 as i64, c3 as i64)
    }

    /// Composition followed by reduction.
    pub fn compose(&self, other: &BinaryForm) -> BinaryForm {
        self.compose_raw(other).reduce()
    }

    pub fn pow(&self, mut e: u64) -> BinaryForm {
        let mut acc = BinaryForm::identity(self.disc());
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Power with a signed exponent.
    pub fn pow_signed(&self, e: i64) -> BinaryForm {
        if e < 0 {
            self.inverse().reduce().pow(e.unsigned_abs())
        } else {
            self.pow(e as u64)
        }
    }

    pub fn is_reduced(&self) -> bool {
        let disc = self.disc();
        if disc < 0 {
            let (a, b, c) = (self.a, self.b, self.c);
            b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
        } else {
            let s = isqrt(disc as u64) as i64;
            let a2 = 2 * self.a.abs();
            0 < self.b && self.b <= s && s - self.b < a2 && a2 <= s + self.b
        }
    }

    /// Reduced representative: the unique reduced form (definite), or some
    /// reduced form on the cycle (indefinite).
    pub fn reduce(&self) -> BinaryForm {
        if self.disc() < 0 {
            self.reduce_definite()
        } else {
            let mut f = *self;
            while !f.is_reduced() {
                f = f.rho();
            }
            f
        }
    }

    fn reduce_definite(&self) -> BinaryForm {
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        if a < 0 {
            // negative definite forms are out of scope
            a = -a;
            b = -b;
            c = -c;
        }
        loop {
            // normalize b into (−a, a]
            if !(-a < b && b <= a) {
                let r = b.rem_euclid(2 * a);
                let r = if r > a { r - 2 * a } else { r };
                let k = (r - b) / (2 * a);
                c += k * k * a + k * b;
                b = r;
                // c = (b² − Δ)/4a is preserved by the translation
            }
            if a > c {
                (a, b, c) = (c, -b, a);
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        BinaryForm::new(a as i64, b as i64, c as i64)
    }

    /// (a, b, c) ↦ (c, r, (r² − Δ)/4c) with r ≡ −b mod 2c chosen by the
    /// indefinite normalization.
    pub fn rho(&self) -> BinaryForm {
        let disc = self.disc();
        let s = isqrt(disc as u64) as i64;
        let c = self.c;
        let m = 2 * c.abs();
        let r = if c.abs() > s {
            // −|c| < r ≤ |c|
            let r = (-self.b).rem_euclid(m);
            if r > c.abs() {
                r - m
            } else {
                r
            }
        } else {
            // s − 2|c| < r ≤ s
            s - (s + self.b).rem_euclid(m)
        };
        BinaryForm::from_ab(c, r, disc).expect("rho preserves the discriminant")
    }

    /// Reduced forms on the rho-cycle of a reduced indefinite form.
    pub fn cycle(&self) -> Vec<BinaryForm> {
        let start = self.reduce();
        let mut out = vec![start];
        let mut f = start.rho();
        while f != start {
            out.push(f);
            f = f.rho();
            assert!(out.len() < MAX_CYCLE, "indefinite cycle too long");
        }
        out
    }

    /// Canonical name of the (wide) ideal class.
    pub fn canonical(&self) -> BinaryForm {
        if self.disc() < 0 {
            return self.reduce();
        }
        let a = self.cycle().into_iter().min().expect("nonempty cycle");
        let b = self.negate().cycle().into_iter().min().expect("nonempty cycle");
        a.min(b)
    }
}
