use serde::Serialize;

use super::Certificate;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerRow {
    pub quantity: String,
    /// `None` when the certificate does not determine the valuation.
    pub ordp: Option<i64>,
    pub source: String,
}

/// p-adic valuations of the terms of Sh·Reg = |tors|² / C over Θ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BsdLedger {
    pub p: u64,
    pub m: i64,
    pub n: u32,
    pub rows: Vec<LedgerRow>,
    pub claim: String,
}

impl BsdLedger {
    pub fn from_values(p: u64, m: i64, n: u32, torsion_ordp: u32, isogeny_ordp: u32) -> Self {
        let tors = (torsion_ordp == 0).then_some(0);
        let rows = vec![
            LedgerRow {
                quantity: "ord_p |E(Theta)_tors|^2".into(),
                ordp: tors,
                source: if tors.is_some() {
                    "torsion probe bound coprime to p; no rational p-torsion".into()
                } else {
                    "torsion probe bound divisible by p; not determined".into()
                },
            },
            LedgerRow {
                quantity: "ord_p C(E/Theta)".into(),
                ordp: Some(-m),
                source: "product of local Tamagawa quotients".into(),
            },
            LedgerRow {
                quantity: "ord_p Sh(E/Theta) Reg(E/Theta)".into(),
                ordp: tors.map(|t| t + m),
                source: "Sh*Reg = |E(Theta)_tors|^2 / C(E/Theta)".into(),
            },
            LedgerRow {
                quantity: "ord_p deg(isogeny from Theta)".into(),
                ordp: Some(isogeny_ordp as i64),
                source: "Smith form of the recorded isogeny witness".into(),
            },
        ];
        let claim = if m == 0 {
            "no ramified primes: no Selmer growth is claimed".to_string()
        } else if tors.is_some() {
            format!(
                "ord_{p} of the regulator quotient is unbounded along the construction; #S_{p}(E/F) >= {p}^k for every requested k <= {m} (here n = {n})"
            )
        } else {
            "torsion term undetermined: no Selmer claim".to_string()
        };
        BsdLedger { p, m, n, rows, claim }
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("p = {}, m = {}, n = {}\n", self.p, self.m, self.n);
        let width = self.rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0);
        for r in &self.rows {
            let v = r.ordp.map_or("?".to_string(), |v| format!("{v:+}"));
            out.push_str(&format!("{:width$}  {:>4}  {}\n", r.quantity, v, r.source));
        }
        out.push_str(&self.claim);
        out.push('\n');
        out
    }
}

fn num<T: std::str::FromStr>(field: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("{field}: `{s}`")))
}

/// Ledger from fields already in the certificate; nothing is recomputed.
pub fn report_bsd_ledger(cert: &Certificate) -> Result<BsdLedger> {
    Ok(BsdLedger::from_values(
        num("request.p", &cert.request.p)?,
        num("conclusion.m", &cert.conclusion.m)?,
        num("conclusion.n", &cert.conclusion.n)?,
        num("torsion.ordp_bound", &cert.torsion.ordp_bound)?,
        num("regulator_exhibit.ordp_isogeny_degree", &cert.regulator_exhibit.ordp_isogeny_degree)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_and_sample_ledgers() {
        let zero = BsdLedger::from_values(3, 0, 1, 0, 0);
        assert!(zero.rows.iter().all(|r| r.ordp == Some(0)));
        let l = BsdLedger::from_values(3, 2, 2, 0, 1);
        assert_eq!(l.rows[2].ordp, Some(2));
        let l = BsdLedger::from_values(11, 3, 3, 0, 1);
        assert_eq!(l.rows[2].ordp, Some(3));
        assert!(l.claim.contains("11^k"));
        assert!(l.render_text().contains("+3"));
    }
}
