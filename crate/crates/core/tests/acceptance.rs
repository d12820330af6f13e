//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use selmer_core::arith::is_squarefree;
use selmer_core::certify::{run_construction, verify_certificate, Certificate, ConstructionRequest};
use selmer_core::cft::{build_inert_datum, conductor_support, ray_class_quotient, VerificationLevel};
use selmer_core::exec::Execution;
use selmer_core::groups::{
    all_relations, all_subgroups, dihedral_group, double_coset_count, is_relation, subgroup_classes, GRelation,
};
use selmer_core::legendre::{reduction_type, split_oracle, LegendreCurve, LocalCurveData, ReductionType};
use selmer_core::quadfield::{class_number_by_ideals, count_reduced_definite, QuadraticField};
use selmer_core::regconst::{invariant_pairing, lattice_library, random_invariant_pairing, regulator_constant, IntegralLattice};
use selmer_core::tamagawa::{local_quotient, DecompositionData, LocalContext};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn relation_identity() -> Outcome {
    for p in [3u64, 5, 7, 11, 13, 31] {
        let g = ok(dihedral_group(p))?;
        let theta = ok(GRelation::dihedral(&g))?;
        let terms: Vec<_> = theta
            .terms()
            .iter()
            .map(|t| (t.class.representative.clone(), t.coefficient))
            .collect();
        ensure(is_relation(&g, &terms), || format!("p = {p}: Theta is not a relation"))?;
        let classes = subgroup_classes(&g);
        let all = all_relations(&g);
        ensure(all.len() == 1, || format!("p = {p}: relation space has rank {}", all.len()))?;
        let (a, b) = (all[0].coefficient_vector(&classes), theta.coefficient_vector(&classes));
        let scalar_multiple = a.iter().zip(&b).all(|(x, y)| x * b[0] == y * a[0]) && a[0] != 0;
        ensure(scalar_multiple, || format!("p = {p}: kernel {a:?} is not spanned by {b:?}"))?;
    }
    Ok("6 groups, rank-1 kernel spanned by Theta".into())
}

fn double_coset_zero_sum() -> Outcome {
    let mut count = 0;
    for p in [3u64, 5, 7, 11] {
        let g = ok(dihedral_group(p))?;
        let theta = ok(GRelation::dihedral(&g))?;
        for d in all_subgroups(&g) {
            let s: i64 = theta
                .terms()
                .iter()
                .map(|t| t.coefficient * double_coset_count(&g, &d, &t.class.representative) as i64)
                .sum();
            ensure(s == 0, || format!("p = {p}, |D| = {}: signed count {s}", d.order()))?;
            count += 1;
        }
    }
    Ok(format!("{count} subgroups D"))
}

fn regulator_constants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairings = 0;
    let mut sums = 0;
    for p in [3u64, 5, 7, 11] {
        let g = ok(dihedral_group(p))?;
        let theta = ok(GRelation::dihedral(&g))?;
        let trivial = IntegralLattice::trivial(&g);
        let c = ok(regulator_constant(&g, &theta, &trivial, &ok(invariant_pairing(&trivial, &g))?))?;
        let want = BigRational::new(BigInt::one(), BigInt::from(p));
        ensure(c == want, || format!("p = {p}: C(Z) = {c}"))?;

        let library = lattice_library(&g);
        let mut values = Vec::new();
        for (label, lattice) in &library {
            let base = ok(regulator_constant(&g, &theta, lattice, &ok(invariant_pairing(lattice, &g))?))?;
            for _ in 0..5 {
                let pairing = ok(random_invariant_pairing(lattice, &g, &mut rng))?;
                let v = ok(regulator_constant(&g, &theta, lattice, &pairing))?;
                ensure(v == base, || format!("p = {p}, {label}: {v} != {base}"))?;
                pairings += 1;
            }
            values.push(base);
        }
        for _ in 0..5 {
            let i = rng.gen_range(0..library.len());
            let j = rng.gen_range(0..library.len());
            let sum = library[i].1.direct_sum(&library[j].1);
            let pairing = ok(random_invariant_pairing(&sum, &g, &mut rng))?;
            let v = ok(regulator_constant(&g, &theta, &sum, &pairing))?;
            let want = &values[i] * &values[j];
            ensure(v == want, || {
                format!("p = {p}: C({} + {}) = {v}, expected {want}", library[i].0, library[j].0)
            })?;
            sums += 1;
        }
    }
    Ok(format!("C(Z) = 1/p; {pairings} random pairings; {sums} direct sums"))
}

fn split(q: u64, c: u32) -> LocalCurveData {
    LocalCurveData {
        q,
        kind: ReductionType::SplitMult,
        c_exponent: c,
    }
}

fn tamagawa_reproduction() -> Outcome {
    for p in [3u64, 11] {
        let g = ok(dihedral_group(p))?;
        let theta = ok(GRelation::dihedral(&g))?;
        let cp = subgroup_classes(&g)
            .into_iter()
            .find(|c| c.label == "Cp")
            .ok_or("no Cp class")?
            .representative;
        for c in 1..=3 {
            let group = DecompositionData::Subgroups {
                decomposition: selmer_core::groups::Subgroup::whole(&g),
                inertia: cp.clone(),
            };
            let ctx = ok(LocalContext::new(&g, 101, split(101, c), group))?;
            let v = ok(local_quotient(&g, &theta, &ctx))?;
            ensure(v == BigRational::new(BigInt::one(), BigInt::from(p)), || {
                format!("p = {p}, c = {c}: {v}")
            })?;
        }
    }
    let g = ok(dihedral_group(11))?;
    let theta = ok(GRelation::dihedral(&g))?;
    let subgroups = all_subgroups(&g);
    let mut contexts = 0;
    for d in subgroups.iter().filter(|d| d.is_cyclic(&g)) {
        for i in subgroups.iter().filter(|i| i.is_subgroup_of(d)) {
            for c in 1..=6 {
                let group = DecompositionData::Subgroups {
                    decomposition: d.clone(),
                    inertia: i.clone(),
                };
                let ctx = ok(LocalContext::new(&g, 7, split(7, c), group))?;
                let v = ok(local_quotient(&g, &theta, &ctx))?;
                ensure(v.is_one(), || format!("|D| = {}, |I| = {}, c = {c}: {v}", d.order(), i.order()))?;
                contexts += 1;
            }
        }
    }
    Ok(format!("1/p for p = 3, 11; {contexts} cyclic contexts give 1"))
}

fn legendre_cross_validation() -> Outcome {
    let lambdas: Vec<i64> = (3..=2001i64).step_by(2).flat_map(|l| [l, -l]).collect();
    let results = Execution::Parallel.map(&lambdas, |&l| -> Result<usize, String> {
        let lambda = BigInt::from(l);
        let curve = ok(LegendreCurve::new(lambda.clone()))?;
        let mut checked = 0;
        for q in ok(curve.bad_primes())?.into_iter().filter(|&q| q != 2 && q < 10_000) {
            let a = ok(reduction_type(&lambda, q))?.kind;
            let b = ok(split_oracle(&lambda, q))?;
            ensure(a == b, || format!("lambda = {l}, q = {q}: {} vs oracle {}", a.name(), b.name()))?;
            checked += 1;
        }
        Ok(checked)
    });
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{} curves, {total} (lambda, q) pairs, 0 mismatches", lambdas.len()))
}

fn cft_construction() -> Outcome {
    let k = ok(QuadraticField::new(-1))?;
    let datum = ok(build_inert_datum(&k, 3, 11, 23))?;
    ensure(datum.orders() == vec![120, 528], || format!("residue orders {:?}", datum.orders()))?;
    ensure(datum.residue_order() == BigInt::from(120 * 528), || format!("residue order {}", datum.residue_order()))?;
    ensure(datum.quotient_order == 3, || format!("quotient order {}", datum.quotient_order))?;
    ok(datum.verify())?;
    ensure(
        datum.factors.iter().all(|f| f.inverts()),
        || "tau does not invert the character".into(),
    )?;
    let support = ok(conductor_support(&datum))?;
    ensure(support == BTreeSet::from([11, 23]), || format!("conductor support {support:?}"))?;
    let i = datum.units.iter().find(|u| u.label == "i").ok_or("no unit i")?;
    for f in &datum.factors {
        let x = f.group.reduce(&i.element).ok_or("i is not a unit")?;
        ensure(f.group.element_order(&x) == 4, || format!("i has order {} mod {}", f.group.element_order(&x), f.q()))?;
    }
    ensure(datum.eval(&i.exponents) == 0, || "the image of i has nontrivial 3-part".into())?;
    let rq = ok(ray_class_quotient(&k, &datum, VerificationLevel::Full))?;
    ok(rq.check())?;
    Ok(format!("|res| = 63360, quotient Z/3, support {{11, 23}}, level {}", rq.level.name()))
}

fn class_group_dual_oracle() -> Outcome {
    let ds: Vec<i64> = (-200..=-1i64).filter(|&d| is_squarefree(d)).collect();
    let results = Execution::Parallel.map(&ds, |&d| -> Result<(i64, u64), String> {
        let k = ok(QuadraticField::new(d))?;
        let forms = count_reduced_definite(k.disc());
        let ideals = ok(class_number_by_ideals(&k, 1 << 24))?;
        ensure(forms == ideals, || format!("d = {d}: forms {forms}, ideals {ideals}"))?;
        Ok((d, forms))
    });
    let mut h = std::collections::BTreeMap::new();
    for r in results {
        let (d, v) = r?;
        h.insert(d, v);
    }
    for (d, want) in [(-1i64, 1u64), (-5, 2), (-23, 3)] {
        ensure(h[&d] == want, || format!("h({d}) = {}, expected {want}", h[&d]))?;
    }
    Ok(format!("{} fields agree", h.len()))
}

/// Every leaf of the certificate JSON, as a path of object keys and array
/// indices.
fn leaves(v: &Value, path: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                path.push(Value::String(k.clone()));
                leaves(x, path, out);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                path.push(Value::from(i));
                leaves(x, path, out);
                path.pop();
            }
        }
        _ => out.push(path.clone()),
    }
}

fn leaf_mut<'a>(v: &'a mut Value, path: &[Value]) -> &'a mut Value {
    path.iter().fold(v, |v, key| match key {
        Value::String(k) => &mut v[k.as_str()],
        Value::Number(i) => &mut v[i.as_u64().unwrap() as usize],
        _ => unreachable!(),
    })
}

fn mutate(v: &Value) -> Value {
    match v {
        Value::String(s) => {
            if let Ok(n) = s.parse::<BigInt>() {
                Value::String((n + 1u32).to_string())
            } else if let Some((a, b)) = s.split_once('/') {
                match a.parse::<BigInt>() {
                    Ok(n) => Value::String(format!("{}/{b}", n + 2)),
                    Err(_) => Value::String(format!("{s}'")),
                }
            } else {
                Value::String(format!("{s}'"))
            }
        }
        Value::Null => Value::String("0".into()),
        Value::Bool(b) => Value::Bool(!b),
        Value::Number(n) => Value::from(n.as_i64().unwrap_or(0) + 1),
        other => other.clone(),
    }
}

fn certificate_request() -> ConstructionRequest {
    ConstructionRequest::new(11, -1, 2)
}

fn end_to_end() -> Outcome {
    let cert = ok(run_construction(&certificate_request()))?;
    let lambda: BigInt = ok(cert.curve.lambda.parse())?;
    ensure(lambda.clone() % 32u32 == BigInt::from(17), || format!("lambda = {lambda}"))?;
    ensure(cert.primes_used.len() == 2, || format!("primes {:?}", cert.primes_used))?;
    let ramified = &cert.extension.ramified_primes;
    ensure(ramified.len() == 2 && ramified.iter().all(|r| r.set == "S2"), || {
        format!("ramified {ramified:?}")
    })?;
    ensure(cert.tamagawa.value == "1/121", || format!("C = {}", cert.tamagawa.value))?;
    let b: u64 = ok(cert.torsion.bound.parse())?;
    ensure(b.is_multiple_of(4) && !b.is_multiple_of(11), || format!("torsion bound {b}"))?;
    let report = verify_certificate(&cert);
    ensure(report.passed(), || report.render_text())?;

    let original = ok(serde_json::to_value(&cert))?;
    let mut paths = Vec::new();
    leaves(&original, &mut Vec::new(), &mut paths);
    paths.retain(|p| p.first() != Some(&Value::String("digest".into())));
    let mut fuzzed = 0;
    let mut equivalent = 0;
    for path in &paths {
        let mut v = original.clone();
        let leaf = leaf_mut(&mut v, path);
        *leaf = mutate(leaf);
        let Ok(mut mutated) = serde_json::from_value::<Certificate>(v) else {
            fuzzed += 1;
            continue;
        };
        ensure(!verify_certificate(&mutated).passed(), || format!("mutation at {path:?} verified"))?;
        // with a fresh digest, only a genuine certificate for the mutated
        // request may pass
        mutated.digest = mutated.compute_digest();
        if verify_certificate(&mutated).passed() {
            let r = &mutated.request;
            let mut req = ConstructionRequest::new(ok(r.p.parse())?, ok(r.d.parse())?, ok(r.n.parse())?);
            req.scan_bound = ok(r.scan_bound.parse())?;
            req.seed = ok(r.seed.parse())?;
            req.torsion_primes = ok(r.torsion_primes.parse())?;
            let genuine = ok(run_construction(&req))?;
            ensure(genuine.to_json() == mutated.to_json(), || format!("mutation at {path:?} with fresh digest verified"))?;
            equivalent += 1;
        }
        fuzzed += 1;
    }
    ensure(fuzzed >= 50, || format!("only {fuzzed} mutations"))?;
    Ok(format!("lambda = {lambda}, primes {:?}, B = {b}, {fuzzed} mutations rejected ({equivalent} re-sealed ones are genuine for their request)", cert.primes_used))
}

fn determinism() -> Outcome {
    let a = ok(run_construction(&certificate_request()))?.to_json();
    let b = ok(run_construction(&certificate_request()))?.to_json();
    ensure(a == b, || "two runs differ".into())?;
    let mut seq = certificate_request();
    seq.execution = Execution::Sequential;
    let c = ok(run_construction(&seq))?.to_json();
    ensure(a == c, || "sequential and parallel runs differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("relation identity", relation_identity, Duration::from_secs(1)),
        ("double-coset zero-sum", double_coset_zero_sum, Duration::from_secs(5)),
        ("regulator constants", regulator_constants, Duration::from_secs(30)),
        ("Tamagawa reproduction", tamagawa_reproduction, Duration::from_secs(5)),
        ("Legendre classification", legendre_cross_validation, Duration::from_secs(60)),
        ("CFT construction", cft_construction, Duration::from_secs(10)),
        ("class-group dual oracle", class_group_dual_oracle, Duration::from_secs(60)),
        ("end-to-end certificate", end_to_end, Duration::from_secs(120)),
        ("determinism", determinism, Duration::from_secs(240)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= *limit {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}) [{elapsed:.2?}]: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {} ({name}) [{elapsed:.2?}]: {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
