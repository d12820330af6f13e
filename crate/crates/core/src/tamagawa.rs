//! Local and global Tamagawa quotients of an elliptic curve over the fixed
//! fields of a G-relation, from decomposition and inertia data at each
//! prime.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::valuation;
use crate::cft::LocalData;
use crate::error::{Error, Result};
use crate::groups::{double_coset_reps, subgroup_classes, GRelation, GroupTable, Subgroup};
use crate::legendre::{LocalCurveData, ReductionType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecompositionData {
    /// The decomposition group is cyclic; nothing more is needed.
    Cyclic,
    Subgroups { decomposition: Subgroup, inertia: Subgroup },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalContext {
    pub v: u64,
    pub curve: LocalCurveData,
    pub group: DecompositionData,
}

fn class_by_label(g: &GroupTable, label: &str) -> Result<Subgroup> {
    subgroup_classes(g)
        .into_iter()
        .find(|c| c.label == label)
        .map(|c| c.representative)
        .ok_or_else(|| Error::invalid(format!("no subgroup class labelled {label}")))
}

impl LocalContext {
    pub fn new(g: &GroupTable, v: u64, curve: LocalCurveData, group: DecompositionData) -> Result<Self> {
        if let DecompositionData::Subgroups { decomposition, inertia } = &group {
            if !inertia.is_subgroup_of(decomposition) {
                return Err(Error::invalid(format!("inertia is not contained in the decomposition group at {v}")));
            }
            if !inertia.is_normal_in(g, decomposition) {
                return Err(Error::invalid(format!("inertia is not normal in the decomposition group at {v}")));
            }
            if !quotient_is_cyclic(g, decomposition, inertia) {
                return Err(Error::invalid(format!("D/I is not cyclic at {v}")));
            }
        }
        if curve.q != v {
            return Err(Error::invalid(format!("curve data for {} given at v = {v}", curve.q)));
        }
        Ok(LocalContext { v, curve, group })
    }

    /// Context from the labelled local data of an extension datum.
    pub fn from_local_data(g: &GroupTable, curve: LocalCurveData, data: &LocalData) -> Result<Self> {
        let group = match data {
            LocalData::Cyclic => DecompositionData::Cyclic,
            LocalData::Ramified { decomposition, inertia } => DecompositionData::Subgroups {
                decomposition: class_by_label(g, decomposition)?,
                inertia: class_by_label(g, inertia)?,
            },
        };
        Self::new(g, curve.q, curve, group)
    }
}

/// Whether some element of D generates D modulo I.
fn quotient_is_cyclic(g: &GroupTable, d: &Subgroup, i: &Subgroup) -> bool {
    d.elements().iter().any(|&x| {
        let mut gens = i.generators(g);
        gens.push(x);
        Subgroup::generated(g, &gens) == *d
    })
}

/// One place of F^H above v.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Place {
    pub representative: usize,
    pub e: usize,
    pub f: usize,
}

/// Places of F^H above v, one per double coset H g D, with
/// e = [I : I ∩ g⁻¹Hg] and f = [D : D ∩ g⁻¹Hg] / e.
pub fn places_above(g: &GroupTable, h: &Subgroup, d: &Subgroup, i: &Subgroup) -> Result<Vec<Place>> {
    if !i.is_subgroup_of(d) || !i.is_normal_in(g, d) {
        return Err(Error::invalid("inertia must be a normal subgroup of the decomposition group"));
    }
    let places: Vec<Place> = double_coset_reps(g, h, d)
        .into_iter()
        .map(|x| {
            let conj = h.conjugate(g, g.inv(x));
            let e = i.order() / i.intersect(&conj).order();
            let local = d.order() / d.intersect(&conj).order();
            Place {
                representative: x,
                e,
                f: local / e,
            }
        })
        .collect();
    let degree: usize = places.iter().map(|w| w.e * w.f).sum();
    if degree * h.order() != g.order() {
        return Err(Error::check("places-degree", format!("sum of e*f = {degree}, expected [G:H]")));
    }
    Ok(places)
}

/// C_v(E/Θ). Cyclic decomposition groups give 1; otherwise each fixed field
/// contributes ∏_w e_w·c over its places (split multiplicative reduction
/// only).
pub fn local_quotient(g: &GroupTable, theta: &GRelation, ctx: &LocalContext) -> Result<BigRational> {
    if let ReductionType::Additive2 { .. } = ctx.curve.kind {
        return Err(Error::Unsupported(format!("additive reduction at {}", ctx.v)));
    }
    let (d, i) = match &ctx.group {
        DecompositionData::Cyclic => return Ok(BigRational::one()),
        DecompositionData::Subgroups { decomposition, inertia } => (decomposition, inertia),
    };
    match ctx.curve.kind {
        ReductionType::Good => return Ok(BigRational::one()),
        ReductionType::SplitMult => {}
        ReductionType::NonsplitMult if d.is_cyclic(g) => return Ok(BigRational::one()),
        _ => {
            return Err(Error::Unsupported(format!(
                "non-split multiplicative reduction at {} under a non-cyclic decomposition group",
                ctx.v
            )))
        }
    }
    let c = BigInt::from(ctx.curve.c_exponent);
    let mut value = BigRational::one();
    for term in theta.terms() {
        let places = places_above(g, &term.class.representative, d, i)?;
        let contribution: BigInt = places.iter().map(|w| BigInt::from(w.e) * &c).product();
        let r = BigRational::from_integer(contribution);
        let k = term.coefficient;
        let factor = if k >= 0 {
            num_traits::pow(r, k as usize)
        } else {
            num_traits::pow(r.recip(), k.unsigned_abs() as usize)
        };
        value *= factor;
    }
    Ok(value)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalQuotient {
    pub value: BigRational,
    pub ordp: i64,
    pub per_prime: Vec<(u64, BigRational)>,
}

pub fn ord_rational(x: &BigRational, p: u64) -> i64 {
    if x.is_zero() {
        return i64::MAX;
    }
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

/// Product of local quotients over the contexts, in ascending order of v.
pub fn global_quotient(
    g: &GroupTable,
    theta: &GRelation,
    contexts: &[LocalContext],
    p: u64,
) -> Result<GlobalQuotient> {
    let mut sorted: Vec<&LocalContext> = contexts.iter().collect();
    sorted.sort_by_key(|c| c.v);
    if sorted.windows(2).any(|w| w[0].v == w[1].v) {
        return Err(Error::invalid("contexts repeat a prime"));
    }
    let mut per_prime = Vec::with_capacity(sorted.len());
    let mut value = BigRational::one();
    for ctx in sorted {
        let local = local_quotient(g, theta, ctx)?;
        value *= &local;
        per_prime.push((ctx.v, local));
    }
    debug_assert!(value.is_positive());
    Ok(GlobalQuotient {
        ordp: ord_rational(&value, p),
        value,
        per_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{dihedral_group, double_coset_count, all_subgroups};

    fn split(q: u64, c: u32) -> LocalCurveData {
        LocalCurveData {
            q,
            kind: ReductionType::SplitMult,
            c_exponent: c,
        }
    }

    #[test]
    fn example_quotient_is_one_over_p() {
        for p in [3u64, 5, 11] {
            let g = dihedral_group(p).unwrap();
            let theta = GRelation::dihedral(&g).unwrap();
            for c in 1..=3 {
                let data = LocalData::Ramified {
                    decomposition: "G".into(),
                    inertia: "Cp".into(),
                };
                let ctx = LocalContext::from_local_data(&g, split(101, c), &data).unwrap();
                let v = local_quotient(&g, &theta, &ctx).unwrap();
                assert_eq!(v, BigRational::new(BigInt::one(), BigInt::from(p)));
            }
        }
    }

    #[test]
    fn place_examples() {
        let g = dihedral_group(5).unwrap();
        let whole = Subgroup::whole(&g);
        let cp = class_by_label(&g, "Cp").unwrap();
        let c2 = class_by_label(&g, "C2").unwrap();
        let at = |h: &Subgroup| places_above(&g, h, &whole, &cp).unwrap();
        assert_eq!(at(&whole).iter().map(|w| (w.e, w.f)).collect::<Vec<_>>(), vec![(1, 1)]);
        assert_eq!(at(&cp).iter().map(|w| (w.e, w.f)).collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(at(&c2).iter().map(|w| (w.e, w.f)).collect::<Vec<_>>(), vec![(5, 1)]);
    }

    #[test]
    fn cyclic_decomposition_gives_one() {
        let g = dihedral_group(11).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        for d in all_subgroups(&g).into_iter().filter(|d| d.is_cyclic(&g)) {
            for i in all_subgroups(&g).into_iter().filter(|i| i.is_subgroup_of(&d)) {
                for c in 1..=6 {
                    let group = DecompositionData::Subgroups {
                        decomposition: d.clone(),
                        inertia: i.clone(),
                    };
                    let ctx = LocalContext::new(&g, 7, split(7, c), group).unwrap();
                    assert!(local_quotient(&g, &theta, &ctx).unwrap().is_one());
                }
            }
        }
    }

    #[test]
    fn signed_place_counts_vanish() {
        let g = dihedral_group(7).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        for d in all_subgroups(&g) {
            let s: i64 = theta
                .terms()
                .iter()
                .map(|t| t.coefficient * double_coset_count(&g, &d, &t.class.representative) as i64)
                .sum();
            assert_eq!(s, 0);
        }
    }

    #[test]
    fn global_product() {
        let g = dihedral_group(3).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        let ram = LocalData::Ramified {
            decomposition: "G".into(),
            inertia: "Cp".into(),
        };
        let ctxs = vec![
            LocalContext::from_local_data(&g, split(23, 2), &ram).unwrap(),
            LocalContext::from_local_data(&g, split(11, 2), &ram).unwrap(),
            LocalContext::from_local_data(&g, split(5, 2), &LocalData::Cyclic).unwrap(),
        ];
        let q = global_quotient(&g, &theta, &ctxs, 3).unwrap();
        assert_eq!(q.value, BigRational::new(BigInt::one(), BigInt::from(9)));
        assert_eq!(q.ordp, -2);
        assert_eq!(q.per_prime.iter().map(|x| x.0).collect::<Vec<_>>(), vec![5, 11, 23]);
        assert!(global_quotient(&g, &theta, &[], 3).unwrap().value.is_one());
    }

    #[test]
    fn nonsplit_under_full_group_is_refused() {
        let g = dihedral_group(3).unwrap();
        let theta = GRelation::dihedral(&g).unwrap();
        let ram = LocalData::Ramified {
            decomposition: "G".into(),
            inertia: "Cp".into(),
        };
        let mut data = split(7, 2);
        data.kind = ReductionType::NonsplitMult;
        let ctx = LocalContext::from_local_data(&g, data, &ram).unwrap();
        assert!(matches!(local_quotient(&g, &theta, &ctx), Err(Error::Unsupported(_))));
    }
}
