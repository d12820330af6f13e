use std::collections::BTreeSet;
use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use super::certificate::{
    conclusion_record, curve_record, extension_record, modulus_record, regulator_record, relation_record,
    request_record, tamagawa_record, torsion_record,
};
use super::pipeline::{checked_relation, contexts_for, p_power, regulator_exhibit, select_primes, RELATION_CHECKS};
use super::{Certificate, ConstructionRequest, FORMAT_VERSION};
use crate::cft::{
    build_datum, combine_data, conductor_support, ray_class_quotient, DihedralExtensionDatum, VerificationLevel,
};
use crate::error::{Error, Result};
use crate::groups::{dihedral_group, relation_isogeny_degree, IsogenySearch};
use crate::legendre::{
    construct_lambda, good_model_at_2, neg_ord_j, reduction_type, split_oracle, torsion_probe, LegendreCurve,
};
use crate::quadfield::{PrimeSet, QuadraticField};
use crate::tamagawa::global_quotient;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcomes of the checks run, in order; checking stops at the first
/// failure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            if c.passed {
                out.push_str(&format!("PASS {}\n", c.name));
            } else {
                out.push_str(&format!("FAIL {}: {}\n", c.name, c.detail));
            }
        }
        out.push_str(if self.passed() { "verdict: pass\n" } else { "verdict: fail\n" });
        out
    }

    fn step<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => {
                self.checks.push(CheckOutcome {
                    name: name.into(),
                    passed: true,
                    detail: String::new(),
                });
                Some(v)
            }
            Err(e) => {
                self.checks.push(CheckOutcome {
                    name: name.into(),
                    passed: false,
                    detail: e.to_string(),
                });
                None
            }
        }
    }
}

fn same<T: PartialEq + Debug>(field: &str, got: &T, want: &T) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::check(field, format!("certificate has {got:?}, recomputed {want:?}")))
    }
}

fn parse<T: FromStr>(field: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::check(field, format!("`{s}` is not a valid value")))
}

fn parse_request(cert: &Certificate) -> Result<ConstructionRequest> {
    let r = &cert.request;
    let mut req = ConstructionRequest::new(parse("request.p", &r.p)?, parse("request.d", &r.d)?, parse("request.n", &r.n)?);
    req.scan_bound = parse("request.scan_bound", &r.scan_bound)?;
    req.seed = parse("request.seed", &r.seed)?;
    req.mode = VerificationLevel::parse(&r.mode)?;
    req.torsion_primes = parse("request.torsion_primes", &r.torsion_primes)?;
    same("request", &request_record(&req), r)?;
    Ok(req)
}

pub fn verify_json(text: &str) -> Result<VerificationReport> {
    Ok(verify_certificate(&Certificate::from_json(text)?))
}

pub fn verify_certificate(cert: &Certificate) -> VerificationReport {
    let mut report = VerificationReport::default();
    run(cert, &mut report);
    report
}

fn run(cert: &Certificate, report: &mut VerificationReport) -> Option<()> {
    report.step(
        "format",
        same("format_version", &cert.format_version.as_str(), &FORMAT_VERSION),
    )?;
    let (req, mut warnings) = report.step(
        "request",
        parse_request(cert).and_then(|req| {
            let w = req.validate()?;
            Ok((req, w))
        }),
    )?;
    let p = req.p;
    let k = QuadraticField::new(req.d).ok()?;
    let g = report.step("relation", (|| {
        let g = dihedral_group(p)?;
        let (theta, rank) = checked_relation(&g)?;
        same("relation", &cert.relation, &relation_record(&g, &theta, rank, RELATION_CHECKS))?;
        Ok((g, theta))
    })())?;
    let (g, theta) = g;

    let m = req.target_primes();
    let primes: Vec<u64> = report.step("primes", (|| {
        let primes = cert
            .primes_used
            .iter()
            .map(|q| parse::<u64>("primes_used", q))
            .collect::<Result<Vec<u64>>>()?;
        if primes.iter().collect::<BTreeSet<_>>().len() != primes.len() {
            return Err(Error::check("primes_used", "repeated prime"));
        }
        if let Some(q) = primes.iter().find(|&&q| !PrimeSet::S2.contains(&k, p, q)) {
            return Err(Error::check("primes_used", format!("{q} is not in S2")));
        }
        same("primes_used.len", &primes.len(), &m)?;
        let expected: Vec<u64> = select_primes(&k, p, m, req.scan_bound, req.execution)?
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect();
        same("primes_used", &primes, &expected)?;
        Ok(primes)
    })())?;

    if cert.extension.moduli.len() != m / 2 {
        report.step::<()>(
            "extension.moduli",
            Err(Error::check("extension.moduli", format!("{} moduli, expected {}", cert.extension.moduli.len(), m / 2))),
        )?;
    }
    let mut data: Vec<DihedralExtensionDatum> = Vec::new();
    let mut records = Vec::new();
    for (i, pair) in primes.chunks(2).enumerate() {
        let name = format!("extension.moduli[{i}]");
        let (d, rec) = report.step(&name, (|| {
            let seed = req.seed.wrapping_add(2 * i as u64);
            let datum = build_datum(&k, p, PrimeSet::S2, pair[0], pair[1], seed)?;
            let rq = ray_class_quotient(&k, &datum, req.mode)?;
            rq.check()?;
            let support: Vec<u64> = conductor_support(&datum)?.into_iter().collect();
            same(&format!("{name}.conductor_support"), &support, &vec![pair[0], pair[1]])?;
            // character values on the recorded generators, by the power map
            for f in &datum.factors {
                for (j, gen) in f.group.generators.iter().enumerate() {
                    same(&format!("{name}.character"), &f.eval_by_power(gen), &Some(f.values[j]))?;
                }
            }
            let rec = modulus_record(&datum, &rq, &support);
            same(&name, &cert.extension.moduli[i], &rec)?;
            Ok((DihedralExtensionDatum::from_modulus(datum, &rq)?, rec))
        })())?;
        data.push(d);
        records.push(rec);
    }
    let extension = report.step("extension", (|| {
        let mut ext = data[0].clone();
        for next in &data[1..] {
            ext = combine_data(&ext, next)?;
        }
        ext.check_invariants()?;
        same("extension", &cert.extension, &extension_record(&ext, records))?;
        Ok(ext)
    })())?;

    let lambda: BigInt = report.step("curve.lambda_field", parse("curve.lambda", &cert.curve.lambda))?;
    report.step("curve.reduction_types", (|| {
        let curve = LegendreCurve::new(lambda.clone())?;
        let inv = curve.invariants();
        for rec in &cert.curve.bad_primes {
            let q: u64 = parse("curve.bad_primes.q", &rec.q)?;
            let kind = if q == 2 {
                reduction_type(&lambda, 2)?.kind
            } else {
                split_oracle(&lambda, q)?
            };
            same(&format!("curve.bad_primes[{q}].type"), &rec.kind.as_str(), &kind.name())?;
            let c = if kind.is_multiplicative() { neg_ord_j(&inv, q) } else { 0 };
            same(&format!("curve.bad_primes[{q}].c_exponent"), &rec.c_exponent, &c.to_string())?;
        }
        Ok(())
    })())?;
    report.step("curve.lambda", construct_lambda(&primes).and_then(|l| same("curve.lambda", &lambda, &l)))?;
    let (curve, table) = report.step("curve", (|| {
        let curve = LegendreCurve::new(lambda.clone())?;
        let table = curve.bad_prime_table()?;
        let model = good_model_at_2(&lambda)?;
        same("curve", &cert.curve, &curve_record(&curve, &curve.invariants(), &model, &table))?;
        Ok((curve, table))
    })())?;

    let (contexts, global) = report.step("tamagawa.per_prime", (|| {
        let contexts = contexts_for(&g, &extension, &table)?;
        let global = global_quotient(&g, &theta, &contexts, p)?;
        let rec = tamagawa_record(&g, &contexts, &global);
        same("tamagawa.per_prime", &cert.tamagawa.per_prime, &rec.per_prime)?;
        Ok((contexts, global))
    })())?;
    report.step("tamagawa.global", (|| {
        let rec = tamagawa_record(&g, &contexts, &global);
        same("tamagawa.value", &cert.tamagawa.value, &rec.value)?;
        same("tamagawa.ordp", &cert.tamagawa.ordp, &rec.ordp)?;
        same("tamagawa.value", &global.value, &p_power(p, -(m as i64)))
    })())?;

    let torsion = report.step("torsion", (|| {
        let t = torsion_probe(curve.lambda(), p, req.torsion_primes)?;
        same("torsion", &cert.torsion, &torsion_record(&t, p))?;
        Ok(t)
    })())?;
    warnings.extend(torsion.warning.iter().cloned());

    report.step("regulator_exhibit", (|| {
        let value = regulator_exhibit(&g, &theta)?;
        same("regulator_exhibit.value", &value, &p_power(p, -1))?;
        let iso = relation_isogeny_degree(&g, &theta, req.seed, IsogenySearch::default())?;
        same("regulator_exhibit", &cert.regulator_exhibit, &regulator_record(&value, &iso, p))
    })())?;
    report.step("conclusion", (|| {
        let m_found = extension.ramified.len();
        if m_found < req.n as usize {
            return Err(Error::check("conclusion.m", format!("m = {m_found} < n = {}", req.n)));
        }
        same("conclusion", &cert.conclusion, &conclusion_record(p, req.n, m_found, global.ordp))
    })())?;
    report.step("warnings", same("warnings", &cert.warnings, &warnings))?;
    report.step("digest", same("digest", &cert.digest, &cert.compute_digest()))?;
    Some(())
}
