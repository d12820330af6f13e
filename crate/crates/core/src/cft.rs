//! Congruence subgroups of two-prime moduli, their Z/p inversion quotients
//! of the ray class group, and the dihedral extension data assembled from
//! them.
//!
//! Moduli are m = q·q′ with no infinite part. The Z/p quotient is cut out by
//! a character on (O/m)^× that is a weighted sum of one discrete-log
//! character per prime, so both primes divide the conductor.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::inv_mod;
use crate::dlog::{bsgs, GroupOps};
use crate::error::{Error, Result};
use crate::linalg::{presented_order, IntMatrix};
use crate::quadfield::{
    class_group, fundamental_unit, principal_generator, ClassGroupBounds, PrimeSet, QuadElement,
    QuadraticField, Residue, ResidueModel, ResidueUnitGroup,
};

/// Frobenius samples used when checking tau(x) = x^q on residue groups.
const FROBENIUS_SAMPLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerificationLevel {
    Structural,
    Full,
}

impl VerificationLevel {
    pub fn name(self) -> &'static str {
        match self {
            VerificationLevel::Structural => "structural",
            VerificationLevel::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "full" | "Full" => Ok(VerificationLevel::Full),
            "structural" | "Structural" => Ok(VerificationLevel::Structural),
            other => Err(Error::invalid(format!("unknown verification mode `{other}`"))),
        }
    }
}

/// m = q·q′, both primes from the same admissible set; the infinite part is
/// always empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    pub q: u64,
    pub q_prime: u64,
    pub set: PrimeSet,
}

impl Modulus {
    pub fn new(k: &QuadraticField, p: u64, set: PrimeSet, q: u64, q_prime: u64) -> Result<Self> {
        if q == q_prime {
            return Err(Error::invalid(format!("modulus primes must be distinct (q = q' = {q})")));
        }
        for r in [q, q_prime] {
            if !set.contains(k, p, r) {
                let want = match set {
                    PrimeSet::S1 => format!("split in Q(sqrt({})) with p | q - 1", k.d()),
                    PrimeSet::S2 => format!("inert in Q(sqrt({})) with p | q + 1", k.d()),
                };
                return Err(Error::invalid(format!(
                    "q = {r} is not in {} for p = {p}: need {want}",
                    set.name()
                )));
            }
        }
        Ok(Modulus { q, q_prime, set })
    }

    pub fn primes(&self) -> [u64; 2] {
        [self.q, self.q_prime]
    }
}

/// The discrete-log-mod-p character on (O/q)^×: the exponent of the cyclic
/// generator (inert), or e₁ − e₂ on (x,1)^e₁(1,x)^e₂ (split).
#[derive(Clone, Debug)]
pub struct LocalCharacter {
    pub group: ResidueUnitGroup,
    pub p: u64,
    pub values: Vec<u64>,
}

impl LocalCharacter {
    pub fn new(k: &QuadraticField, q: u64, p: u64, seed: u64) -> Result<Self> {
        let group = ResidueUnitGroup::new(k, q, seed)?;
        if group.orders.iter().any(|n| n % p != 0) {
            return Err(Error::invalid(format!("p = {p} does not divide the residue orders at q = {q}")));
        }
        let values = match group.model {
            ResidueModel::Inert => vec![1],
            ResidueModel::Split => vec![1, p - 1],
        };
        Ok(LocalCharacter { group, p, values })
    }

    pub fn q(&self) -> u64 {
        self.group.q
    }

    pub fn eval_exponents(&self, e: &[u64]) -> u64 {
        dot_mod(&self.values, e, self.p)
    }

    /// Character value through the exponent vector of x.
    pub fn eval(&self, x: &Residue) -> Option<u64> {
        self.group.log(x).map(|e| self.eval_exponents(&e))
    }

    /// Character value by projecting onto the order-p subgroup and solving a
    /// discrete log of size p; independent of the full logarithm.
    pub fn eval_by_power(&self, x: &Residue) -> Option<u64> {
        let grp = &self.group;
        if !grp.is_unit(x) {
            return None;
        }
        let g = grp.generators[0];
        let (y, n) = match grp.model {
            ResidueModel::Inert => (*x, grp.orders[0]),
            ResidueModel::Split => {
                let inv = inv_mod(x.1 as i64, grp.q as i64)? as u64;
                (Residue(crate::arith::mul_mod(x.0, inv, grp.q), 1), grp.q - 1)
            }
        };
        let base = grp.pow(&g, n / self.p);
        let z = grp.pow(&y, n / self.p);
        bsgs(grp, &base, &z, self.p)
    }

    pub fn kernel_generators(&self) -> Vec<Vec<u64>> {
        kernel_of_character(&self.values, &self.group.orders, self.p)
    }

    /// [(O/q)^× : ker χ].
    pub fn kernel_index(&self) -> Option<BigInt> {
        presented_order(&presentation(&self.group.orders, &self.kernel_generators()))
    }

    /// χ(tau x) = −χ(x) on every generator.
    pub fn inverts(&self) -> bool {
        let tau = &self.group.tau;
        (0..self.values.len()).all(|j| {
            let col: Vec<u64> = tau.iter().map(|row| row[j]).collect();
            (self.eval_exponents(&col) + self.values[j]).is_multiple_of(self.p)
        })
    }
}

fn dot_mod(c: &[u64], e: &[u64], p: u64) -> u64 {
    c.iter()
        .zip(e)
        .fold(0u64, |acc, (&a, &b)| ((acc as u128 + a as u128 * (b % p) as u128) % p as u128) as u64)
}

/// Generators of ker(c) ⊆ ⊕ Z/orders_i, c a character to Z/p with some
/// invertible coefficient.
fn kernel_of_character(c: &[u64], orders: &[u64], p: u64) -> Vec<Vec<u64>> {
    let Some(i0) = c.iter().position(|&x| x % p != 0) else {
        // trivial character: the kernel is everything
        return (0..c.len())
            .map(|j| (0..c.len()).map(|i| u64::from(i == j)).collect())
            .collect();
    };
    let inv = inv_mod(c[i0] as i64, p as i64).expect("p is prime") as u64;
    let mut out = Vec::with_capacity(c.len());
    let mut first = vec![0u64; c.len()];
    first[i0] = p % orders[i0];
    out.push(first);
    for j in (0..c.len()).filter(|&j| j != i0) {
        let mut v = vec![0u64; c.len()];
        v[j] = 1;
        let t = (c[j] % p) * inv % p;
        v[i0] = (orders[i0] - t % orders[i0]) % orders[i0];
        out.push(v);
    }
    out
}

/// Relation matrix of (⊕ Z/orders_i) / ⟨rows⟩.
fn presentation(orders: &[u64], rows: &[Vec<u64>]) -> IntMatrix {
    let n = orders.len();
    let mut all: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::from(orders[i]) } else { BigInt::zero() }).collect())
        .collect();
    all.extend(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()));
    IntMatrix::from_rows(all, n)
}

/// A generator of the unit group (or of a part of it) together with its
/// image in the residue group of a modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitImage {
    pub label: String,
    pub element: QuadElement,
    pub exponents: Vec<u64>,
}

/// −1, a generator of larger torsion when present, and the fundamental unit
/// of a real field.
pub fn unit_generators(k: &QuadraticField) -> Result<Vec<(String, QuadElement)>> {
    let elt = |a: i64, b: i64, denom: u8| QuadElement {
        a: BigInt::from(a),
        b: BigInt::from(b),
        denom,
    };
    let mut out = vec![("-1".to_string(), elt(-1, 0, 1))];
    match k.d() {
        -1 => out.push(("i".into(), elt(0, 1, 1))),
        -3 => out.push(("zeta6".into(), elt(1, 1, 2))),
        d if d > 0 => {
            let u = fundamental_unit(k)?;
            out.push(("epsilon".into(), u.fundamental_unit.expect("real fields have a fundamental unit")));
        }
        _ => {}
    }
    Ok(out)
}

/// A subgroup R of (O/m)^× of index p, given as the kernel of a character on
/// the concatenated generators of (O/q)^× × (O/q′)^×.
#[derive(Clone, Debug)]
pub struct CongruenceSubgroupDatum {
    pub field: QuadraticField,
    pub p: u64,
    pub modulus: Modulus,
    pub factors: [LocalCharacter; 2],
    pub weights: [u64; 2],
    pub character: Vec<u64>,
    pub kernel: Vec<Vec<u64>>,
    pub quotient_order: u64,
    pub units: Vec<UnitImage>,
    pub seed: u64,
}

impl CongruenceSubgroupDatum {
    /// Builds the datum with weights (1, w), w the least nonzero value for
    /// which every unit lies in the kernel. For most fields w = 1.
    pub fn build(k: &QuadraticField, p: u64, modulus: Modulus, seed: u64) -> Result<Self> {
        let base = Self::with_weights(k, p, modulus, [1, 1], seed)?;
        let units: Vec<[u64; 2]> = base
            .units
            .iter()
            .map(|u| {
                let (a, b) = base.split_exponents(&u.exponents);
                [base.factors[0].eval_exponents(a), base.factors[1].eval_exponents(b)]
            })
            .collect();
        let w = std::iter::once(1)
            .chain(2..p)
            .find(|&w| units.iter().all(|[a, b]| (a + w * b) % p == 0))
            .ok_or_else(|| {
                Error::Unsupported(format!(
                    "units of Q(sqrt({})) are nontrivial under every character of the modulus {}*{}",
                    k.d(),
                    modulus.q,
                    modulus.q_prime
                ))
            })?;
        if w == 1 {
            Ok(base)
        } else {
            Self::with_weights(k, p, modulus, [1, w], seed)
        }
    }

    /// The datum for an arbitrary weighting; weights may be zero, which
    /// produces degenerate data rejected by `verify`.
    pub fn with_weights(
        k: &QuadraticField,
        p: u64,
        modulus: Modulus,
        weights: [u64; 2],
        seed: u64,
    ) -> Result<Self> {
        let f0 = LocalCharacter::new(k, modulus.q, p, seed)?;
        let f1 = LocalCharacter::new(k, modulus.q_prime, p, seed.wrapping_add(1))?;
        let weights = weights.map(|w| w % p);
        let character: Vec<u64> = f0
            .values
            .iter()
            .map(|v| v * weights[0] % p)
            .chain(f1.values.iter().map(|v| v * weights[1] % p))
            .collect();
        let orders: Vec<u64> = f0.group.orders.iter().chain(&f1.group.orders).copied().collect();
        let kernel = kernel_of_character(&character, &orders, p);
        let mut datum = CongruenceSubgroupDatum {
            field: *k,
            p,
            modulus,
            factors: [f0, f1],
            weights,
            character,
            kernel,
            quotient_order: p,
            units: Vec::new(),
            seed,
        };
        for (label, element) in unit_generators(k)? {
            let exponents = datum
                .log(&element)
                .ok_or_else(|| Error::check("unit-images", format!("unit {label} is not a unit mod m")))?;
            datum.units.push(UnitImage {
                label,
                element,
                exponents,
            });
        }
        Ok(datum)
    }

    pub fn orders(&self) -> Vec<u64> {
        self.factors.iter().flat_map(|f| f.group.orders.iter().copied()).collect()
    }

    /// |(O/m)^×|.
    pub fn residue_order(&self) -> BigInt {
        self.orders().iter().map(|&n| BigInt::from(n)).product()
    }

    fn split_exponents<'a>(&self, e: &'a [u64]) -> (&'a [u64], &'a [u64]) {
        e.split_at(self.factors[0].group.rank())
    }

    /// Exponent vector of a field element coprime to m.
    pub fn log(&self, x: &QuadElement) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for f in &self.factors {
            out.extend(f.group.log(&f.group.reduce(x)?)?);
        }
        Some(out)
    }

    pub fn eval(&self, e: &[u64]) -> u64 {
        dot_mod(&self.character, e, self.p)
    }

    /// Exponents of tau(x) from those of x.
    pub fn tau_exponents(&self, e: &[u64]) -> Vec<u64> {
        let (a, b) = self.split_exponents(e);
        let mut out = Vec::with_capacity(e.len());
        for (f, part) in self.factors.iter().zip([a, b]) {
            let g = &f.group;
            for (i, row) in g.tau.iter().enumerate() {
                let n = g.orders[i] as u128;
                let s = row
                    .iter()
                    .zip(part)
                    .fold(0u128, |acc, (&t, &x)| (acc + t as u128 * x as u128) % n);
                out.push(s as u64);
            }
        }
        out
    }

    /// Runs every check on the datum, naming the first that fails.
    pub fn verify(&self) -> Result<()> {
        let p = self.p;
        Modulus::new(&self.field, p, self.modulus.set, self.modulus.q, self.modulus.q_prime)
            .map_err(|e| Error::check("modulus", e.to_string()))?;
        for f in &self.factors {
            let samples = f.group.sample_elements(FROBENIUS_SAMPLES, self.seed);
            f.group.verify(&samples)?;
            for (j, g) in f.group.generators.iter().enumerate() {
                if f.eval_by_power(g) != Some(f.values[j]) {
                    return Err(Error::check(
                        "character-generators",
                        format!("power-map value at generator {j} of q = {} disagrees", f.q()),
                    ));
                }
            }
            if !f.inverts() {
                return Err(Error::check("tau-inversion", format!("local character at q = {}", f.q())));
            }
        }
        let support = conductor_support(self).map_err(|e| Error::check("conductor-support", e.to_string()))?;
        if support != self.modulus.primes().into_iter().collect::<BTreeSet<_>>() {
            return Err(Error::check("conductor-support", format!("support {support:?} is not the modulus")));
        }
        for r in &self.kernel {
            if self.eval(r) != 0 {
                return Err(Error::check("kernel-membership", format!("{r:?} is not in ker chi")));
            }
            if self.eval(&self.tau_exponents(r)) != 0 {
                return Err(Error::check("tau-stable", format!("tau({r:?}) leaves R")));
            }
        }
        let index = presented_order(&presentation(&self.orders(), &self.kernel));
        if index != Some(BigInt::from(p)) {
            return Err(Error::check("kernel-index", format!("[G : R] = {index:?}, expected {p}")));
        }
        for j in 0..self.character.len() {
            let mut e = vec![0u64; self.character.len()];
            e[j] = 1;
            if !(self.eval(&self.tau_exponents(&e)) + self.character[j]).is_multiple_of(p) {
                return Err(Error::check("tau-inversion", format!("chi(tau g) != -chi(g) at generator {j}")));
            }
        }
        for u in &self.units {
            if self.log(&u.element).as_ref() != Some(&u.exponents) {
                return Err(Error::check("unit-images", format!("image of {} recomputes differently", u.label)));
            }
            if self.eval(&u.exponents) != 0 {
                return Err(Error::check("unit-images", format!("chi({}) != 0", u.label)));
            }
        }
        Ok(())
    }
}

/// Datum for two primes of S2.
pub fn build_inert_datum(k: &QuadraticField, p: u64, q: u64, q_prime: u64) -> Result<CongruenceSubgroupDatum> {
    build_datum(k, p, PrimeSet::S2, q, q_prime, 0)
}

/// Datum for two primes of S1.
pub fn build_split_datum(k: &QuadraticField, p: u64, q: u64, q_prime: u64) -> Result<CongruenceSubgroupDatum> {
    build_datum(k, p, PrimeSet::S1, q, q_prime, 0)
}

/// Builds and verifies a datum; `seed` offsets the residue generator scans.
pub fn build_datum(
    k: &QuadraticField,
    p: u64,
    set: PrimeSet,
    q: u64,
    q_prime: u64,
    seed: u64,
) -> Result<CongruenceSubgroupDatum> {
    let modulus = Modulus::new(k, p, set, q, q_prime)?;
    let datum = CongruenceSubgroupDatum::build(k, p, modulus, seed)?;
    datum.verify()?;
    Ok(datum)
}

/// Modulus primes on whose residue factor the character is nontrivial.
pub fn conductor_support(datum: &CongruenceSubgroupDatum) -> Result<BTreeSet<u64>> {
    let mut support = BTreeSet::new();
    for (f, &w) in datum.factors.iter().zip(&datum.weights) {
        let nontrivial = f
            .group
            .generators
            .iter()
            .any(|g| f.eval(g).is_some_and(|v| v * w % datum.p != 0));
        if nontrivial {
            support.insert(f.q());
        }
    }
    if support.is_empty() {
        return Err(Error::Unramified);
    }
    Ok(support)
}

/// A presentation of I_m/P_m (Full) or of the residue group modulo unit
/// images (Structural), with a character of order p and the tau action.
#[derive(Clone, Debug)]
pub struct RayClassQuotient {
    pub p: u64,
    pub level: VerificationLevel,
    pub downgrade: Option<String>,
    pub generator_labels: Vec<String>,
    pub relations: IntMatrix,
    pub order: BigInt,
    pub unit_image_order: BigInt,
    pub class_number: Option<u64>,
    pub character: Vec<u64>,
    /// tau_images[j] is the exponent vector of tau(generator j).
    pub tau_images: Vec<Vec<BigInt>>,
}

impl RayClassQuotient {
    /// The character kills every relation, has order p, and is inverted by
    /// tau.
    pub fn check(&self) -> Result<()> {
        let p = BigInt::from(self.p);
        let psi = |v: &[BigInt]| -> BigInt {
            let s: BigInt = v.iter().zip(&self.character).map(|(a, &c)| a * BigInt::from(c)).sum();
            ((s % &p) + &p) % &p
        };
        for i in 0..self.relations.rows() {
            if !psi(self.relations.row(i)).is_zero() {
                return Err(Error::check("ray-character", format!("relation {i} is not killed")));
            }
        }
        if self.character.iter().all(|&c| c % self.p == 0) {
            return Err(Error::check("ray-character", "character is trivial"));
        }
        for (j, img) in self.tau_images.iter().enumerate() {
            if !((psi(img) + BigInt::from(self.character[j])) % &p).is_zero() {
                return Err(Error::check("ray-tau-inversion", format!("generator {}", self.generator_labels[j])));
            }
        }
        Ok(())
    }
}

pub fn ray_class_quotient(
    k: &QuadraticField,
    datum: &CongruenceSubgroupDatum,
    mode: VerificationLevel,
) -> Result<RayClassQuotient> {
    ray_class_quotient_with_bounds(k, datum, mode, ClassGroupBounds::default())
}

/// Full mode falls back to Structural, recording the reason, when the class
/// group or principal generators are out of reach.
pub fn ray_class_quotient_with_bounds(
    k: &QuadraticField,
    datum: &CongruenceSubgroupDatum,
    mode: VerificationLevel,
    bounds: ClassGroupBounds,
) -> Result<RayClassQuotient> {
    if *k != datum.field {
        return Err(Error::invalid("datum belongs to a different field"));
    }
    if mode == VerificationLevel::Full {
        match full_quotient(k, datum, bounds)? {
            Ok(rq) => return Ok(rq),
            Err(reason) => {
                let mut rq = structural_quotient(datum)?;
                rq.downgrade = Some(reason);
                return Ok(rq);
            }
        }
    }
    structural_quotient(datum)
}

fn residue_labels(datum: &CongruenceSubgroupDatum) -> Vec<String> {
    datum
        .factors
        .iter()
        .flat_map(|f| (0..f.group.rank()).map(move |i| format!("res[{}].{i}", f.q())))
        .collect()
}

fn residue_tau_images(datum: &CongruenceSubgroupDatum, width: usize) -> Vec<Vec<BigInt>> {
    let n = datum.character.len();
    (0..n)
        .map(|j| {
            let mut e = vec![0u64; n];
            e[j] = 1;
            let mut v: Vec<BigInt> = datum.tau_exponents(&e).into_iter().map(BigInt::from).collect();
            v.resize(width, BigInt::zero());
            v
        })
        .collect()
}

fn unit_image_order(datum: &CongruenceSubgroupDatum) -> Result<BigInt> {
    let rows: Vec<Vec<u64>> = datum.units.iter().map(|u| u.exponents.clone()).collect();
    let coker = presented_order(&presentation(&datum.orders(), &rows))
        .ok_or_else(|| Error::check("unit-images", "residue presentation is infinite"))?;
    Ok(datum.residue_order() / coker)
}

/// (O/m)^× modulo unit images: its Z/p quotient survives because the
/// character kills every unit.
fn structural_quotient(datum: &CongruenceSubgroupDatum) -> Result<RayClassQuotient> {
    let rows: Vec<Vec<u64>> = datum.units.iter().map(|u| u.exponents.clone()).collect();
    let relations = presentation(&datum.orders(), &rows);
    let order = presented_order(&relations).ok_or_else(|| Error::check("unit-images", "infinite cokernel"))?;
    let rq = RayClassQuotient {
        p: datum.p,
        level: VerificationLevel::Structural,
        downgrade: None,
        generator_labels: residue_labels(datum),
        relations,
        order,
        unit_image_order: unit_image_order(datum)?,
        class_number: None,
        character: datum.character.clone(),
        tau_images: residue_tau_images(datum, datum.character.len()),
    };
    rq.check()?;
    Ok(rq)
}

/// Outer error: a failed check. Inner error: a reason to downgrade.
fn full_quotient(
    k: &QuadraticField,
    datum: &CongruenceSubgroupDatum,
    bounds: ClassGroupBounds,
) -> Result<std::result::Result<RayClassQuotient, String>> {
    let p = datum.p;
    let cl = match class_group(k, bounds) {
        Ok(cl) => cl,
        Err(e) if e.is_resource_exhaustion() || matches!(e, Error::Unsupported(_)) => {
            return Ok(Err(format!("class group unavailable: {e}")))
        }
        Err(e) => return Err(e),
    };
    if !k.is_imaginary() && cl.h > 1 {
        return Ok(Err(format!("principal generators for a real field with h = {}", cl.h)));
    }
    let r = datum.character.len();
    let c = cl.generators.len();
    let width = r + c;
    let mut labels = residue_labels(datum);
    labels.extend(cl.generators.iter().map(|g| format!("cl[{},{}]", g.norm, g.root)));

    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for (i, &n) in datum.orders().iter().enumerate() {
        let mut row = vec![BigInt::zero(); width];
        row[i] = BigInt::from(n);
        rows.push(row);
    }
    for u in &datum.units {
        let mut row: Vec<BigInt> = u.exponents.iter().map(|&x| BigInt::from(x)).collect();
        row.resize(width, BigInt::zero());
        rows.push(row);
    }
    let mut character = datum.character.clone();
    let mut tau_images = residue_tau_images(datum, width);
    let m = datum.modulus.q * datum.modulus.q_prime;
    for (idx, (gen, &n)) in cl.generators.iter().zip(&cl.structure).enumerate() {
        if num_integer::Integer::gcd(&(gen.norm as u64), &m) != 1 {
            return Ok(Err(format!("class generator of norm {} meets the modulus", gen.norm)));
        }
        let alpha = match principal_generator(k, *gen, n)? {
            Some(a) => a,
            None => return Err(Error::check("class-principal", format!("a^{n} has no generator for {gen:?}"))),
        };
        let e = datum
            .log(&alpha)
            .ok_or_else(|| Error::check("class-principal", "generator is not coprime to m"))?;
        let mut row: Vec<BigInt> = e.iter().map(|&x| -BigInt::from(x)).collect();
        row.resize(width, BigInt::zero());
        row[r + idx] = BigInt::from(n);
        rows.push(row);

        let chi = datum.eval(&e);
        let value = if n % p == 0 {
            if chi != 0 {
                return Ok(Err(format!(
                    "character does not extend over the class of norm {} (order {n})",
                    gen.norm
                )));
            }
            0
        } else {
            let inv = inv_mod((n % p) as i64, p as i64).expect("p is prime") as u64;
            chi * inv % p
        };
        character.push(value);

        // tau[a] = ι(N a) − [a]
        let norm = QuadElement {
            a: BigInt::from(gen.norm),
            b: BigInt::zero(),
            denom: 1,
        };
        let ne = datum
            .log(&norm)
            .ok_or_else(|| Error::check("class-tau", "norm is not coprime to m"))?;
        let mut img: Vec<BigInt> = ne.into_iter().map(BigInt::from).collect();
        img.resize(width, BigInt::zero());
        img[r + idx] -= BigInt::one();
        tau_images.push(img);
    }
    let relations = IntMatrix::from_rows(rows, width);
    let order = presented_order(&relations).ok_or_else(|| Error::check("ray-order", "presentation is infinite"))?;
    let unit_image = unit_image_order(datum)?;
    let expected = BigInt::from(cl.h) * datum.residue_order() / &unit_image;
    if order != expected {
        return Err(Error::check("ray-order", format!("|I_m/P_m| = {order}, expected h*|res|/|U| = {expected}")));
    }
    let rq = RayClassQuotient {
        p,
        level: VerificationLevel::Full,
        downgrade: None,
        generator_labels: labels,
        relations,
        order,
        unit_image_order: unit_image,
        class_number: Some(cl.h),
        character,
        tau_images,
    };
    rq.check()?;
    if rq.character[..r] != datum.character[..] {
        return Err(Error::check("ray-character", "does not extend the datum character"));
    }
    Ok(Ok(rq))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamifiedPrime {
    pub q: u64,
    pub set: PrimeSet,
    /// Labels of the decomposition and inertia subgroup classes.
    pub decomposition: String,
    pub inertia: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalData {
    Ramified { decomposition: String, inertia: String },
    /// Decomposition group cyclic; no further data needed.
    Cyclic,
}

/// The data determining a D₂ₚ-extension F/Q containing K.
#[derive(Clone, Debug)]
pub struct DihedralExtensionDatum {
    pub field: QuadraticField,
    pub p: u64,
    pub ramified: Vec<RamifiedPrime>,
    pub moduli: Vec<CongruenceSubgroupDatum>,
    pub level: VerificationLevel,
    pub downgrades: Vec<String>,
    pub provenance: String,
}

fn local_labels(set: PrimeSet) -> (&'static str, &'static str) {
    match set {
        PrimeSet::S2 => ("G", "Cp"),
        PrimeSet::S1 => ("Cp", "Cp"),
    }
}

impl DihedralExtensionDatum {
    pub fn from_modulus(datum: CongruenceSubgroupDatum, quotient: &RayClassQuotient) -> Result<Self> {
        quotient.check()?;
        let support = conductor_support(&datum)?;
        let set = datum.modulus.set;
        let (dec, inertia) = local_labels(set);
        let ramified = support
            .iter()
            .map(|&q| RamifiedPrime {
                q,
                set,
                decomposition: dec.into(),
                inertia: inertia.into(),
            })
            .collect();
        let [q, q2] = datum.modulus.primes();
        Ok(DihedralExtensionDatum {
            field: datum.field,
            p: datum.p,
            ramified,
            moduli: vec![datum],
            level: quotient.level,
            downgrades: quotient.downgrade.iter().cloned().collect(),
            provenance: format!("F[{q}*{q2}]"),
        })
    }

    pub fn ramified_primes(&self) -> Vec<u64> {
        self.ramified.iter().map(|r| r.q).collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.ramified.is_empty() {
            return Err(Error::check("extension-ramified", "no ramified primes"));
        }
        let distinct: BTreeSet<u64> = self.ramified_primes().into_iter().collect();
        if distinct.len() != self.ramified.len() {
            return Err(Error::check("extension-ramified", "repeated ramified prime"));
        }
        for r in &self.ramified {
            let (dec, inertia) = local_labels(r.set);
            if r.decomposition != dec || r.inertia != inertia {
                return Err(Error::check("extension-local", format!("wrong local data at {}", r.q)));
            }
        }
        Ok(())
    }
}

/// The diagonal subfield of the compositum of two extensions with disjoint
/// ramification.
pub fn combine_data(a: &DihedralExtensionDatum, b: &DihedralExtensionDatum) -> Result<DihedralExtensionDatum> {
    if a.field != b.field || a.p != b.p {
        return Err(Error::invalid("combined data must share the field and p"));
    }
    let sa: BTreeSet<u64> = a.ramified_primes().into_iter().collect();
    if let Some(q) = b.ramified_primes().into_iter().find(|q| sa.contains(q)) {
        return Err(Error::invalid(format!("ramified sets overlap at q = {q}")));
    }
    let mut ramified = a.ramified.clone();
    ramified.extend(b.ramified.iter().cloned());
    ramified.sort_by_key(|r| r.q);
    Ok(DihedralExtensionDatum {
        field: a.field,
        p: a.p,
        ramified,
        moduli: a.moduli.iter().chain(&b.moduli).cloned().collect(),
        level: a.level.min(b.level),
        downgrades: a.downgrades.iter().chain(&b.downgrades).cloned().collect(),
        provenance: format!("diag({}, {})", a.provenance, b.provenance),
    })
}

pub fn local_data(datum: &DihedralExtensionDatum, v: u64) -> LocalData {
    match datum.ramified.iter().find(|r| r.q == v) {
        Some(r) => LocalData::Ramified {
            decomposition: r.decomposition.clone(),
            inertia: r.inertia.clone(),
        },
        None => LocalData::Cyclic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> QuadraticField {
        QuadraticField::new(-1).unwrap()
    }

    #[test]
    fn inert_datum_for_11_23() {
        let k = gaussian();
        let d = build_inert_datum(&k, 3, 11, 23).unwrap();
        assert_eq!(d.orders(), vec![120, 528]);
        assert_eq!(d.weights, [1, 1]);
        assert_eq!(conductor_support(&d).unwrap(), BTreeSet::from([11, 23]));
        for f in &d.factors {
            assert_eq!(f.eval_by_power(&f.group.generators[0]), Some(1));
        }
        // i has order 4, so its image has trivial 3-part
        let i = d.units.iter().find(|u| u.label == "i").unwrap();
        assert_eq!(d.eval(&i.exponents), 0);
    }

    #[test]
    fn split_prime_subgroup() {
        let k = gaussian();
        let f = LocalCharacter::new(&k, 13, 3, 0).unwrap();
        assert_eq!(f.kernel_index(), Some(BigInt::from(3)));
        assert!(f.inverts());
        // (x, y) lies in the kernel
        assert_eq!(f.eval_exponents(&[1, 1]), 0);
        assert_eq!(f.eval_exponents(&[3, 0]), 0);
        let d = build_split_datum(&k, 3, 13, 37).unwrap();
        assert_eq!(conductor_support(&d).unwrap(), BTreeSet::from([13, 37]));
    }

    #[test]
    fn modulus_rejections() {
        let k = gaussian();
        assert!(build_inert_datum(&k, 3, 11, 11).is_err());
        assert!(build_inert_datum(&k, 3, 11, 13).is_err());
        assert!(build_split_datum(&k, 3, 11, 13).is_err());
    }

    #[test]
    fn degenerate_character_has_smaller_support() {
        let k = gaussian();
        let m = Modulus::new(&k, 3, PrimeSet::S2, 11, 23).unwrap();
        let d = CongruenceSubgroupDatum::with_weights(&k, 3, m, [1, 0], 0).unwrap();
        assert_eq!(conductor_support(&d).unwrap(), BTreeSet::from([11]));
        assert!(d.verify().is_err());
        let z = CongruenceSubgroupDatum::with_weights(&k, 3, m, [0, 0], 0).unwrap();
        assert!(matches!(conductor_support(&z), Err(Error::Unramified)));
    }

    #[test]
    fn full_and_structural_quotients() {
        for (d, p) in [(-1i64, 3u64), (-5, 3), (-23, 5), (2, 3), (-105, 7), (3, 5)] {
            let k = QuadraticField::new(d).unwrap();
            let qs = crate::quadfield::scan_s2(&k, p, 2, 10_000).unwrap();
            let datum = build_inert_datum(&k, p, qs[0], qs[1]).unwrap();
            let full = ray_class_quotient(&k, &datum, VerificationLevel::Full).unwrap();
            assert_eq!(full.level, VerificationLevel::Full, "d = {d}: {:?}", full.downgrade);
            let s = ray_class_quotient(&k, &datum, VerificationLevel::Structural).unwrap();
            assert_eq!(s.level, VerificationLevel::Structural);
            assert_eq!(full.order, BigInt::from(full.class_number.unwrap()) * &s.order);
        }
    }

    #[test]
    fn combining() {
        let k = gaussian();
        let make = |q, q2| {
            let datum = build_inert_datum(&k, 3, q, q2).unwrap();
            let rq = ray_class_quotient(&k, &datum, VerificationLevel::Full).unwrap();
            DihedralExtensionDatum::from_modulus(datum, &rq).unwrap()
        };
        let a = make(11, 23);
        let b = make(47, 59);
        let ab = combine_data(&a, &b).unwrap();
        assert_eq!(ab.ramified_primes(), vec![11, 23, 47, 59]);
        ab.check_invariants().unwrap();
        assert!(combine_data(&a, &a).is_err());
        assert_eq!(
            local_data(&ab, 11),
            LocalData::Ramified {
                decomposition: "G".into(),
                inertia: "Cp".into()
            }
        );
        assert_eq!(local_data(&ab, 2), LocalData::Cyclic);
    }
}
