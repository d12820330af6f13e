//! End-to-end construction, certificates and their independent
//! re-verification.

mod certificate;
mod ledger;
mod pipeline;
mod verify;

pub use certificate::{
    BadPrimeRecord, Certificate, ConclusionRecord, CurveRecord, ExtensionRecord, LocalQuotientRecord,
    ModulusRecord, RamifiedRecord, RayRecord, RegulatorRecord, RelationRecord, RequestRecord, ResidueRecord,
    TamagawaRecord, TermRecord, TorsionRecord, UnitRecord, FORMAT_VERSION,
};
pub use ledger::{report_bsd_ledger, BsdLedger, LedgerRow};
pub use pipeline::{construct, run_construction, select_primes, Construction};
pub use verify::{verify_certificate, verify_json, CheckOutcome, VerificationReport};

use crate::arith::is_prime;
use crate::cft::VerificationLevel;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quadfield::{PrimeSet, QuadraticField};

/// Default upper bound for the prime scan.
pub const DEFAULT_SCAN_BOUND: u64 = 1_000_000;
/// Default number of good primes used by the torsion probe.
pub const DEFAULT_TORSION_PRIMES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionRequest {
    pub p: u64,
    pub d: i64,
    pub n: u32,
    pub scan_bound: u64,
    pub seed: u64,
    pub mode: VerificationLevel,
    pub torsion_primes: usize,
    pub execution: Execution,
}

impl ConstructionRequest {
    pub fn new(p: u64, d: i64, n: u32) -> Self {
        ConstructionRequest {
            p,
            d,
            n,
            scan_bound: DEFAULT_SCAN_BOUND,
            seed: 0,
            mode: VerificationLevel::Full,
            torsion_primes: DEFAULT_TORSION_PRIMES,
            execution: Execution::default(),
        }
    }

    /// Number of ramified primes the construction aims for: 2⌈n/2⌉.
    pub fn target_primes(&self) -> usize {
        2 * (self.n as usize).div_ceil(2)
    }

    /// Rejects invalid requests and returns warnings for accepted ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.p < 3 || !is_prime(self.p) {
            return Err(Error::invalid(format!("p = {} must be an odd prime", self.p)));
        }
        let k = QuadraticField::new(self.d)?;
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.d == self.p as i64 && self.p % 4 == 1 {
            return Err(Error::EmptyPrimeSet {
                set: PrimeSet::S2.name(),
                d: k.d(),
                p: self.p,
            });
        }
        if self.torsion_primes == 0 {
            return Err(Error::invalid("the torsion probe needs at least one prime"));
        }
        let mut warnings = Vec::new();
        if self.p <= 7 {
            warnings.push(format!(
                "p = {} <= 7: the torsion argument assumes p > 7; the probe only warns if p divides its bound",
                self.p
            ));
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_round_trip() {
        let cert = run_construction(&ConstructionRequest::new(3, -1, 2)).unwrap();
        assert_eq!(cert.primes_used, vec!["11", "23"]);
        assert_eq!(cert.curve.lambda, "4049");
        assert_eq!(cert.tamagawa.ordp, "-2");
        let report = verify_certificate(&cert);
        assert!(report.passed(), "{}", report.render_text());
    }

    #[test]
    fn rejections() {
        let err = ConstructionRequest::new(13, 13, 1).validate().unwrap_err();
        assert!(err.is_input_rejection());
        assert!(ConstructionRequest::new(9, -1, 1).validate().is_err());
        assert!(ConstructionRequest::new(11, -1, 0).validate().is_err());
    }
}
