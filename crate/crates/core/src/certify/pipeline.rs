use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{Certificate, ConstructionRequest};
use crate::cft::{
    build_datum, combine_data, local_data, ray_class_quotient, unit_generators, CongruenceSubgroupDatum,
    DihedralExtensionDatum, LocalCharacter, RayClassQuotient,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::groups::{
    all_relations, dihedral_group, permutation_character_by_centralizer, relation_isogeny_degree, subgroup_classes,
    GRelation, GroupTable, IsogenySearch, IsogenyWitness,
};
use crate::legendre::{
    construct_lambda, good_model_at_2, torsion_probe, CurveInvariants, LegendreCurve, LocalCurveData,
    TorsionProbe, WeierstrassModel,
};
use crate::quadfield::{scan, PrimeSet, QuadraticField};
use crate::regconst::{invariant_pairing, regulator_constant, IntegralLattice};
use crate::tamagawa::{global_quotient, GlobalQuotient, LocalContext};

pub(crate) const RELATION_CHECKS: &[&str] = &[
    "permutation-characters",
    "centralizer-characters",
    "relation-space-rank-1",
];

/// Every intermediate object of a construction.
#[derive(Clone, Debug)]
pub struct Construction {
    pub request: ConstructionRequest,
    pub warnings: Vec<String>,
    pub field: QuadraticField,
    pub group: GroupTable,
    pub relation: GRelation,
    pub relation_rank: usize,
    pub pairs: Vec<(u64, u64)>,
    pub quotients: Vec<RayClassQuotient>,
    pub extension: DihedralExtensionDatum,
    pub curve: LegendreCurve,
    pub invariants: CurveInvariants,
    pub model_at_2: WeierstrassModel,
    pub bad_primes: Vec<LocalCurveData>,
    pub contexts: Vec<LocalContext>,
    pub global: GlobalQuotient,
    pub torsion: TorsionProbe,
    pub regulator: BigRational,
    pub isogeny: IsogenyWitness,
}

impl Construction {
    pub fn primes_used(&self) -> Vec<u64> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}

/// The relation Θ after checking it against both character formulas and
/// the rank of the relation space.
pub(crate) fn checked_relation(g: &GroupTable) -> Result<(GRelation, usize)> {
    let theta = GRelation::dihedral(g)?;
    let n = g.conjugacy_classes().len();
    let mut total = vec![0i64; n];
    for t in theta.terms() {
        let chi = permutation_character_by_centralizer(g, &t.class.representative);
        for (acc, v) in total.iter_mut().zip(&chi.values) {
            *acc += t.coefficient * v;
        }
    }
    if total.iter().any(|&v| v != 0) {
        return Err(Error::check("relation", "centralizer characters do not cancel"));
    }
    let all = all_relations(g);
    let classes = subgroup_classes(g);
    let want = theta.coefficient_vector(&classes);
    if all.len() != 1 || all[0].coefficient_vector(&classes) != want {
        return Err(Error::check("relation", "relation space is not spanned by Theta"));
    }
    Ok((theta, all.len()))
}

/// Whether some unit has a nonzero character value at q.
fn unit_obstructed(k: &QuadraticField, p: u64, q: u64) -> Result<bool> {
    let f = LocalCharacter::new(k, q, p, 0)?;
    for (label, u) in unit_generators(k)? {
        let x = f
            .group
            .reduce(&u)
            .ok_or_else(|| Error::check("unit-images", format!("{label} is not a unit mod {q}")))?;
        if f.eval(&x).ok_or_else(|| Error::check("unit-images", "log failed"))? != 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// m/2 pairs from S2 in scan order. Primes are paired with the next prime
/// of the same unit-obstruction class, so every pair carries a character
/// that kills the units.
pub fn select_primes(
    k: &QuadraticField,
    p: u64,
    m: usize,
    bound: u64,
    exec: Execution,
) -> Result<Vec<(u64, u64)>> {
    let want = m / 2;
    let mut count = m;
    let mut classified: Vec<(u64, bool)> = Vec::new();
    loop {
        let primes = scan(k, p, PrimeSet::S2, count, bound, exec)?;
        let fresh: Vec<u64> = primes[classified.len()..].to_vec();
        let classes = exec.map(&fresh, |&q| unit_obstructed(k, p, q));
        for (q, c) in fresh.into_iter().zip(classes) {
            classified.push((q, c?));
        }
        let mut pending: [Option<u64>; 2] = [None, None];
        let mut pairs = Vec::new();
        for &(q, c) in &classified {
            match pending[c as usize].take() {
                Some(first) => pairs.push((first, q)),
                None => pending[c as usize] = Some(q),
            }
            if pairs.len() == want {
                return Ok(pairs);
            }
        }
        count += want - pairs.len();
    }
}

fn build_modulus(
    k: &QuadraticField,
    req: &ConstructionRequest,
    index: usize,
    pair: (u64, u64),
) -> Result<(CongruenceSubgroupDatum, RayClassQuotient)> {
    let seed = req.seed.wrapping_add(2 * index as u64);
    let datum = build_datum(k, req.p, PrimeSet::S2, pair.0, pair.1, seed)?;
    let rq = ray_class_quotient(k, &datum, req.mode)?;
    Ok((datum, rq))
}

pub(crate) fn contexts_for(
    g: &GroupTable,
    ext: &DihedralExtensionDatum,
    table: &[LocalCurveData],
) -> Result<Vec<LocalContext>> {
    for r in &ext.ramified {
        if !table.iter().any(|d| d.q == r.q) {
            return Err(Error::check("contexts", format!("ramified prime {} is not a bad prime", r.q)));
        }
    }
    table
        .iter()
        .map(|d| LocalContext::from_local_data(g, *d, &local_data(ext, d.q)))
        .collect()
}

pub(crate) fn regulator_exhibit(g: &GroupTable, theta: &GRelation) -> Result<BigRational> {
    let lattice = IntegralLattice::trivial(g);
    let pairing = invariant_pairing(&lattice, g)?;
    regulator_constant(g, theta, &lattice, &pairing)
}

pub(crate) fn p_power(p: u64, e: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), e.unsigned_abs() as usize)
    }
}

/// Runs every stage, checking each invariant on the way.
pub fn construct(req: &ConstructionRequest) -> Result<Construction> {
    let warnings = req.validate()?;
    let p = req.p;
    let k = QuadraticField::new(req.d)?;
    let g = dihedral_group(p)?;
    let (theta, relation_rank) = checked_relation(&g)?;
    let m = req.target_primes();
    let pairs = select_primes(&k, p, m, req.scan_bound, req.execution)?;

    let indexed: Vec<(usize, (u64, u64))> = pairs.iter().copied().enumerate().collect();
    let built = req
        .execution
        .map(&indexed, |&(i, pair)| build_modulus(&k, req, i, pair));
    let mut data = Vec::with_capacity(built.len());
    let mut quotients = Vec::with_capacity(built.len());
    for b in built {
        let (datum, rq) = b?;
        data.push(DihedralExtensionDatum::from_modulus(datum, &rq)?);
        quotients.push(rq);
    }
    let mut extension = data[0].clone();
    for next in &data[1..] {
        extension = combine_data(&extension, next)?;
    }
    extension.check_invariants()?;
    if extension.ramified.len() != m {
        return Err(Error::check("extension-ramified", format!("{} ramified primes, expected {m}", extension.ramified.len())));
    }

    let primes: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let lambda = construct_lambda(&primes)?;
    let curve = LegendreCurve::new(lambda.clone())?;
    let invariants = curve.invariants();
    let model_at_2 = good_model_at_2(&lambda)?;
    let bad_primes = curve.bad_prime_table()?;
    let contexts = contexts_for(&g, &extension, &bad_primes)?;
    let global = global_quotient(&g, &theta, &contexts, p)?;
    if global.value != p_power(p, -(m as i64)) {
        return Err(Error::check("tamagawa-global", format!("C(E/Theta) = {}, expected {p}^-{m}", global.value)));
    }
    let torsion = torsion_probe(&lambda, p, req.torsion_primes)?;
    let mut warnings = warnings;
    warnings.extend(torsion.warning.iter().cloned());
    let regulator = regulator_exhibit(&g, &theta)?;
    if regulator != p_power(p, -1) {
        return Err(Error::check("regulator-exhibit", format!("C_Theta(Z) = {regulator}, expected 1/{p}")));
    }
    let isogeny = relation_isogeny_degree(&g, &theta, req.seed, IsogenySearch::default())?;
    debug_assert!(!global.value.is_one());
    Ok(Construction {
        request: req.clone(),
        warnings,
        field: k,
        group: g,
        relation: theta,
        relation_rank,
        pairs,
        quotients,
        extension,
        curve,
        invariants,
        model_at_2,
        bad_primes,
        contexts,
        global,
        torsion,
        regulator,
        isogeny,
    })
}

pub fn run_construction(req: &ConstructionRequest) -> Result<Certificate> {
    Ok(Certificate::from_construction(&construct(req)?))
}
