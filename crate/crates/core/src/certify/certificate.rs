//! Certificate schema. Field order is fixed by declaration order and every
//! integer is a decimal string; rationals are written "a/b".

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::pipeline::Construction;
use super::ConstructionRequest;
use crate::cft::{CongruenceSubgroupDatum, DihedralExtensionDatum, RayClassQuotient};
use crate::error::{Error, Result};
use crate::groups::{GRelation, GroupTable, IsogenyWitness};
use crate::legendre::{CurveInvariants, LegendreCurve, LocalCurveData, TorsionProbe, WeierstrassModel};
use crate::quadfield::ResidueModel;
use crate::tamagawa::{DecompositionData, GlobalQuotient, LocalContext};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format_version: String,
    pub request: RequestRecord,
    pub warnings: Vec<String>,
    pub primes_used: Vec<String>,
    pub relation: RelationRecord,
    pub extension: ExtensionRecord,
    pub curve: CurveRecord,
    pub tamagawa: TamagawaRecord,
    pub torsion: TorsionRecord,
    pub regulator_exhibit: RegulatorRecord,
    pub conclusion: ConclusionRecord,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestRecord {
    pub p: String,
    pub d: String,
    pub n: String,
    pub scan_bound: String,
    pub seed: String,
    pub mode: String,
    pub torsion_primes: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub subgroup: String,
    pub order: String,
    pub class_size: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationRecord {
    pub group_order: String,
    pub terms: Vec<TermRecord>,
    pub relation_rank: String,
    pub checks: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamifiedRecord {
    pub q: String,
    pub set: String,
    pub decomposition: String,
    pub inertia: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueRecord {
    pub q: String,
    pub model: String,
    /// Residue coordinates of each generator.
    pub generators: Vec<Vec<String>>,
    pub orders: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRecord {
    pub label: String,
    /// (a, b, denom) for (a + b√d)/denom.
    pub element: Vec<String>,
    pub exponents: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayRecord {
    pub level: String,
    pub downgrade: Option<String>,
    pub generators: Vec<String>,
    pub order: String,
    pub unit_image_order: String,
    pub class_number: Option<String>,
    pub character: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusRecord {
    pub q: String,
    pub q_prime: String,
    pub set: String,
    pub seed: String,
    pub weights: Vec<String>,
    pub residue: Vec<ResidueRecord>,
    pub character: Vec<String>,
    pub kernel: Vec<Vec<String>>,
    pub quotient_order: String,
    pub units: Vec<UnitRecord>,
    pub conductor_support: Vec<String>,
    pub ray_class: RayRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionRecord {
    pub d: String,
    pub disc: String,
    pub p: String,
    pub verification_level: String,
    pub downgrades: Vec<String>,
    pub provenance: String,
    pub ramified_primes: Vec<RamifiedRecord>,
    pub moduli: Vec<ModulusRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BadPrimeRecord {
    pub q: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub c_exponent: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub lambda: String,
    pub c4: String,
    pub delta: String,
    pub j_num: String,
    pub j_den: String,
    pub model_at_2: Vec<String>,
    pub model_at_2_delta: String,
    pub bad_primes: Vec<BadPrimeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalQuotientRecord {
    pub v: String,
    pub decomposition: String,
    pub inertia: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TamagawaRecord {
    pub per_prime: Vec<LocalQuotientRecord>,
    pub value: String,
    pub ordp: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionRecord {
    pub bound: String,
    pub trial_primes: Vec<String>,
    pub counts: Vec<String>,
    pub ordp_bound: String,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulatorRecord {
    pub lattice: String,
    pub value: String,
    pub isogeny_seed: String,
    pub isogeny_degree: String,
    pub isogeny_invariants: Vec<String>,
    pub ordp_isogeny_degree: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConclusionRecord {
    pub m: String,
    pub n: String,
    pub ordp_tamagawa: String,
    pub ordp_sha_reg: String,
    pub claim: String,
    pub citations: Vec<String>,
}

pub(crate) fn s(x: impl ToString) -> String {
    x.to_string()
}

pub(crate) fn rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

pub(crate) fn request_record(req: &ConstructionRequest) -> RequestRecord {
    RequestRecord {
        p: s(req.p),
        d: s(req.d),
        n: s(req.n),
        scan_bound: s(req.scan_bound),
        seed: s(req.seed),
        mode: s(req.mode.name()),
        torsion_primes: s(req.torsion_primes),
    }
}

pub(crate) fn relation_record(g: &GroupTable, theta: &GRelation, rank: usize, checks: &[&str]) -> RelationRecord {
    RelationRecord {
        group_order: s(g.order()),
        terms: theta
            .terms()
            .iter()
            .map(|t| TermRecord {
                subgroup: t.class.label.clone(),
                order: s(t.class.order()),
                class_size: s(t.class.class_size),
                coefficient: s(t.coefficient),
            })
            .collect(),
        relation_rank: s(rank),
        checks: checks.iter().map(|c| c.to_string()).collect(),
    }
}

pub(crate) fn modulus_record(datum: &CongruenceSubgroupDatum, rq: &RayClassQuotient, support: &[u64]) -> ModulusRecord {
    ModulusRecord {
        q: s(datum.modulus.q),
        q_prime: s(datum.modulus.q_prime),
        set: s(datum.modulus.set.name()),
        seed: s(datum.seed),
        weights: strings(&datum.weights),
        residue: datum
            .factors
            .iter()
            .map(|f| ResidueRecord {
                q: s(f.q()),
                model: s(match f.group.model {
                    ResidueModel::Inert => "inert",
                    ResidueModel::Split => "split",
                }),
                generators: f.group.generators.iter().map(|g| vec![s(g.0), s(g.1)]).collect(),
                orders: strings(&f.group.orders),
            })
            .collect(),
        character: strings(&datum.character),
        kernel: datum.kernel.iter().map(|r| strings(r)).collect(),
        quotient_order: s(datum.quotient_order),
        units: datum
            .units
            .iter()
            .map(|u| UnitRecord {
                label: u.label.clone(),
                element: vec![s(&u.element.a), s(&u.element.b), s(u.element.denom)],
                exponents: strings(&u.exponents),
            })
            .collect(),
        conductor_support: strings(support),
        ray_class: RayRecord {
            level: s(rq.level.name()),
            downgrade: rq.downgrade.clone(),
            generators: rq.generator_labels.clone(),
            order: s(&rq.order),
            unit_image_order: s(&rq.unit_image_order),
            class_number: rq.class_number.map(s),
            character: strings(&rq.character),
        },
    }
}

pub(crate) fn extension_record(ext: &DihedralExtensionDatum, moduli: Vec<ModulusRecord>) -> ExtensionRecord {
    ExtensionRecord {
        d: s(ext.field.d()),
        disc: s(ext.field.disc()),
        p: s(ext.p),
        verification_level: s(ext.level.name()),
        downgrades: ext.downgrades.clone(),
        provenance: ext.provenance.clone(),
        ramified_primes: ext
            .ramified
            .iter()
            .map(|r| RamifiedRecord {
                q: s(r.q),
                set: s(r.set.name()),
                decomposition: r.decomposition.clone(),
                inertia: r.inertia.clone(),
            })
            .collect(),
        moduli,
    }
}

pub(crate) fn bad_prime_records(table: &[LocalCurveData]) -> Vec<BadPrimeRecord> {
    table
        .iter()
        .map(|d| BadPrimeRecord {
            q: s(d.q),
            kind: s(d.kind.name()),
            c_exponent: s(d.c_exponent),
        })
        .collect()
}

pub(crate) fn curve_record(
    curve: &LegendreCurve,
    inv: &CurveInvariants,
    model: &WeierstrassModel,
    table: &[LocalCurveData],
) -> CurveRecord {
    CurveRecord {
        lambda: s(curve.lambda()),
        c4: s(&inv.c4),
        delta: s(&inv.delta),
        j_num: s(&inv.j_num),
        j_den: s(&inv.j_den),
        model_at_2: strings(&model.a),
        model_at_2_delta: s(&model.delta),
        bad_primes: bad_prime_records(table),
    }
}

fn subgroup_label(g: &GroupTable, h: &crate::groups::Subgroup) -> String {
    crate::groups::subgroup_classes(g)
        .into_iter()
        .find(|c| c.conjugates(g).contains(h))
        .map(|c| c.label)
        .unwrap_or_else(|| "?".into())
}

pub(crate) fn tamagawa_record(g: &GroupTable, contexts: &[LocalContext], global: &GlobalQuotient) -> TamagawaRecord {
    TamagawaRecord {
        per_prime: global
            .per_prime
            .iter()
            .map(|(v, value)| {
                let ctx = contexts.iter().find(|c| c.v == *v).expect("context for each prime");
                let (dec, inertia) = match &ctx.group {
                    DecompositionData::Cyclic => ("cyclic".to_string(), "-".to_string()),
                    DecompositionData::Subgroups { decomposition, inertia } => {
                        (subgroup_label(g, decomposition), subgroup_label(g, inertia))
                    }
                };
                LocalQuotientRecord {
                    v: s(v),
                    decomposition: dec,
                    inertia,
                    value: rational(value),
                }
            })
            .collect(),
        value: rational(&global.value),
        ordp: s(global.ordp),
    }
}

pub(crate) fn torsion_record(t: &TorsionProbe, p: u64) -> TorsionRecord {
    TorsionRecord {
        bound: s(t.bound),
        trial_primes: strings(&t.primes),
        counts: strings(&t.counts),
        ordp_bound: s(crate::arith::valuation(&BigInt::from(t.bound), p)),
        warning: t.warning.clone(),
    }
}

pub(crate) fn regulator_record(value: &BigRational, iso: &IsogenyWitness, p: u64) -> RegulatorRecord {
    RegulatorRecord {
        lattice: "Z with trivial action, pairing xy".into(),
        value: rational(value),
        isogeny_seed: s(iso.seed),
        isogeny_degree: s(&iso.degree),
        isogeny_invariants: strings(&iso.invariant_factors),
        ordp_isogeny_degree: s(crate::arith::valuation(&iso.degree, p)),
    }
}

pub(crate) fn conclusion_record(p: u64, n: u32, m: usize, ordp: i64) -> ConclusionRecord {
    ConclusionRecord {
        m: s(m),
        n: s(n),
        ordp_tamagawa: s(ordp),
        ordp_sha_reg: s(-ordp),
        claim: format!(
            "ord_{p} C(E/Theta) = {ordp} with m = {m} >= n = {n}; hence ord_{p}(Sh*Reg quotient) = {}, and #S_{p}(E/F) >= {p}^{n}",
            -ordp
        ),
        citations: vec![
            "Brauer relation Theta = 1 - 2 C2 - Cp + 2 G of D2p, unique up to scaling".into(),
            "Sh(E/Theta) Reg(E/Theta) = |E(Theta)_tors|^2 / C(E/Theta)".into(),
            "Tamagawa quotient 1/p at split multiplicative primes inert in M and ramified in F/M".into(),
            "Tamagawa quotient 1 wherever the decomposition group is cyclic".into(),
            "no p-torsion over Q for p > 7 (Mazur)".into(),
            "p-Selmer growth from unbounded ord_p of the regulator quotient along the isogeny".into(),
        ],
    }
}

impl Certificate {
    pub fn from_construction(c: &Construction) -> Certificate {
        let moduli = c
            .extension
            .moduli
            .iter()
            .zip(&c.quotients)
            .map(|(datum, rq)| {
                let support: Vec<u64> = crate::cft::conductor_support(datum)
                    .expect("constructed data have support")
                    .into_iter()
                    .collect();
                modulus_record(datum, rq, &support)
            })
            .collect();
        let mut cert = Certificate {
            format_version: FORMAT_VERSION.into(),
            request: request_record(&c.request),
            warnings: c.warnings.clone(),
            primes_used: strings(&c.primes_used()),
            relation: relation_record(&c.group, &c.relation, c.relation_rank, super::pipeline::RELATION_CHECKS),
            extension: extension_record(&c.extension, moduli),
            curve: curve_record(&c.curve, &c.invariants, &c.model_at_2, &c.bad_primes),
            tamagawa: tamagawa_record(&c.group, &c.contexts, &c.global),
            torsion: torsion_record(&c.torsion, c.request.p),
            regulator_exhibit: regulator_record(&c.regulator, &c.isogeny, c.request.p),
            conclusion: conclusion_record(c.request.p, c.request.n, c.extension.ramified.len(), c.global.ordp),
            digest: String::new(),
        };
        cert.digest = cert.compute_digest();
        cert
    }

    /// SHA-256 over the compact JSON of the certificate with an empty digest.
    pub fn compute_digest(&self) -> String {
        let mut copy = self.clone();
        copy.digest = String::new();
        let bytes = serde_json::to_vec(&copy).expect("certificate serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("certificate serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
