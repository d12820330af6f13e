use num_bigint::BigInt;

use selmer_core::certify::{
    report_bsd_ledger, run_construction, verify_certificate, verify_json, Certificate, ConstructionRequest,
};
use selmer_core::cft::VerificationLevel;
use selmer_core::exec::Execution;

fn build(p: u64, d: i64, n: u32) -> Certificate {
    run_construction(&ConstructionRequest::new(p, d, n)).unwrap_or_else(|e| panic!("({p}, {d}, {n}): {e}"))
}

#[test]
fn grid_round_trips() {
    let mut cases = Vec::new();
    for p in [11u64, 13, 19] {
        for d in [-1i64, -5, 2] {
            for n in [1u32, 2, 3] {
                cases.push((p, d, n));
            }
        }
    }
    let failures: Vec<String> = Execution::Parallel
        .map(&cases, |&(p, d, n)| {
            let cert = build(p, d, n);
            let text = cert.to_json();
            let back = Certificate::from_json(&text).unwrap();
            assert_eq!(back, cert);
            let report = verify_json(&text).unwrap();
            let m = 2 * n.div_ceil(2) as i64;
            let ordp_ok = cert.tamagawa.ordp == (-m).to_string();
            (!report.passed() || !ordp_ok).then(|| format!("({p}, {d}, {n}):\n{}", report.render_text()))
        })
        .into_iter()
        .flatten()
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn shifted_lambda_fails_at_reduction_types() {
    let mut cert = build(11, -1, 2);
    let lambda: BigInt = cert.curve.lambda.parse().unwrap();
    cert.curve.lambda = (lambda + 2u32).to_string();
    let report = verify_certificate(&cert);
    assert_eq!(report.first_failure().unwrap().name, "curve.reduction_types");
}

#[test]
fn tampered_valuation_fails_at_global_quotient() {
    let mut cert = build(11, -1, 2);
    cert.tamagawa.ordp = "-3".into();
    cert.digest = cert.compute_digest();
    let report = verify_certificate(&cert);
    assert_eq!(report.first_failure().unwrap().name, "tamagawa.global");
}

#[test]
fn tampered_digest_fails_last() {
    let mut cert = build(13, -1, 1);
    cert.digest = "0".repeat(64);
    let report = verify_certificate(&cert);
    assert_eq!(report.first_failure().unwrap().name, "digest");
    assert_eq!(report.checks.last().unwrap().name, "digest");
}

#[test]
fn unknown_fields_are_rejected() {
    let cert = build(11, -1, 1);
    let mut v: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
    v["curve"]["extra"] = serde_json::Value::String("1".into());
    let err = verify_json(&v.to_string()).unwrap_err();
    assert!(err.is_input_rejection());
}

#[test]
fn valuation_grows_with_n() {
    let mut previous: Option<Certificate> = None;
    for n in 1..=6u32 {
        let cert = build(11, -1, n);
        let m: i64 = cert.conclusion.m.parse().unwrap();
        assert_eq!(m, 2 * n.div_ceil(2) as i64);
        assert_eq!(cert.tamagawa.ordp, (-m).to_string());
        if let Some(prev) = &previous {
            assert!(cert.primes_used.starts_with(&prev.primes_used));
            let before: i64 = prev.tamagawa.ordp.parse().unwrap();
            assert!(-m <= before);
        }
        let ledger = report_bsd_ledger(&cert).unwrap();
        assert_eq!(ledger.rows[2].ordp, Some(m));
        previous = Some(cert);
    }
}

#[test]
fn structural_mode_verifies() {
    let mut req = ConstructionRequest::new(13, -5, 2);
    req.mode = VerificationLevel::Structural;
    let cert = run_construction(&req).unwrap();
    assert_eq!(cert.extension.verification_level, "structural");
    assert!(verify_certificate(&cert).passed());
}

#[test]
fn execution_mode_does_not_change_bytes() {
    let mut req = ConstructionRequest::new(19, 2, 3);
    let a = run_construction(&req).unwrap().to_json();
    req.execution = Execution::Sequential;
    assert_eq!(a, run_construction(&req).unwrap().to_json());
}

#[test]
fn seeds_change_generators_not_conclusions() {
    let mut req = ConstructionRequest::new(11, -1, 2);
    let a = run_construction(&req).unwrap();
    req.seed = 7;
    let b = run_construction(&req).unwrap();
    assert!(verify_certificate(&b).passed());
    assert_eq!(a.primes_used, b.primes_used);
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.tamagawa, b.tamagawa);
}
