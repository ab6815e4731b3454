//! Sieve-based tables of arithmetic functions.
//!
//! Every table is indexed from 1: there is no `t(0)`. Values are `i64` and
//! every construction uses checked arithmetic, so an out-of-range value
//! surfaces as [`Error::Capacity`] instead of wrapping.

mod function;
mod sieve;

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub use function::FunctionId;
pub use sieve::{build_factor_table, max_table_size, FactorTable};

/// An immutable table `f(1..=N)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueTable {
    id: FunctionId,
    /// Set when the table was produced by [`reduce_mod`].
    reduced_mod: Option<i64>,
    values: Vec<i64>,
}

impl ValueTable {
    /// Wraps externally computed values `f(1), f(2), ...`.
    pub fn from_values(id: FunctionId, values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("a value table needs at least one entry".into()));
        }
        Ok(Self { id, reduced_mod: None, values })
    }

    pub fn id(&self) -> &FunctionId {
        &self.id
    }

    pub fn reduced_mod(&self) -> Option<i64> {
        self.reduced_mod
    }

    /// Index bound `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f(n)` for `1 <= n <= N`.
    #[inline]
    pub fn at(&self, n: usize) -> i64 {
        assert!(n >= 1, "value tables are indexed from 1");
        self.values[n - 1]
    }

    pub fn get(&self, n: usize) -> Option<i64> {
        if n == 0 {
            None
        } else {
            self.values.get(n - 1).copied()
        }
    }

    /// The values `f(1..=N)` as a slice (slice index `i` holds `f(i + 1)`).
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Human-readable label such as `lambda` or `tau mod 2`.
    pub fn label(&self) -> String {
        match self.reduced_mod {
            Some(m) => format!("{} mod {m}", self.id),
            None => self.id.to_string(),
        }
    }

    /// Truncates to the first `n` entries.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::Capacity(format!(
                "cannot truncate a table of length {} to {n}",
                self.len()
            )));
        }
        Ok(Self { id: self.id.clone(), reduced_mod: self.reduced_mod, values: self.values[..n].to_vec() })
    }

    /// Applies an entrywise map, producing a [`FunctionId::Custom`] table.
    pub fn map(&self, label: &str, f: impl Fn(i64) -> i64 + Sync) -> Self {
        Self {
            id: FunctionId::Custom(label.to_string()),
            reduced_mod: None,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    fn params_json(&self) -> Value {
        let mut params = serde_json::Map::new();
        if let Some((name, v)) = self.id.param() {
            params.insert(name.to_string(), json!(v));
        }
        if let Some(m) = self.reduced_mod {
            params.insert("mod".to_string(), json!(m));
        }
        Value::Object(params)
    }

    /// JSON export `{id, params, N, values}`.
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id.name(),
            "params": self.params_json(),
            "N": self.len(),
            "values": self.values,
        })
    }

    /// Parses the JSON export format back into a table.
    pub fn from_json(v: &Value) -> Result<Self> {
        let name = v["id"].as_str().ok_or_else(|| Error::Format("missing id".into()))?;
        let params = &v["params"];
        let param = ["k", "m"].iter().find_map(|key| params[*key].as_u64().map(|x| x as u32));
        let id = FunctionId::from_parts(name, param)?;
        let values: Vec<i64> = serde_json::from_value(v["values"].clone())
            .map_err(|e| Error::Format(format!("values: {e}")))?;
        if v["N"].as_u64() != Some(values.len() as u64) {
            return Err(Error::Format("N does not match the number of values".into()));
        }
        let mut table = Self::from_values(id, values)?;
        table.reduced_mod = params["mod"].as_i64();
        Ok(table)
    }

    /// CSV export with header `n,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut buf = String::with_capacity(16 * self.len() + 8);
        buf.push_str("n,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(buf, "{},{}", i + 1, v);
        }
        w.write_all(buf.as_bytes())
    }
}

/// Generates `f(1..=n)` from the factor table.
pub fn generate(id: &FunctionId, n: usize, ft: &FactorTable) -> Result<ValueTable> {
    id.validate()?;
    if n == 0 {
        return Err(Error::Capacity("table bound N must be positive".into()));
    }
    if n > ft.len() && !id.is_digit_fixture() {
        return Err(Error::Capacity(format!(
            "factor table covers 1..={} but N={n} was requested",
            ft.len()
        )));
    }
    let values = match id {
        FunctionId::NthPrime => {
            let primes: Vec<i64> = (2..=ft.len()).filter(|&p| ft.is_prime(p)).take(n).map(|p| p as i64).collect();
            if primes.len() < n {
                return Err(Error::Range(format!(
                    "only {} primes up to {}; the {n}-th prime needs a larger sieve",
                    primes.len(),
                    ft.len()
                )));
            }
            primes
        }
        _ => (1..=n)
            .into_par_iter()
            .map(|i| function::evaluate(id, i, ft))
            .collect::<Result<Vec<i64>>>()?,
    };
    Ok(ValueTable { id: id.clone(), reduced_mod: None, values })
}

/// Convenience: sieve and generate in one step.
pub fn generate_table(id: &FunctionId, n: usize) -> Result<ValueTable> {
    let ft = build_factor_table(n.max(2))?;
    generate(id, n, &ft)
}

/// Entrywise least non-negative residue mod `m`.
pub fn reduce_mod(t: &ValueTable, m: i64) -> Result<ValueTable> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus must be at least 2, got {m}")));
    }
    Ok(ValueTable {
        id: t.id.clone(),
        reduced_mod: Some(m),
        values: t.values.par_iter().map(|v| v.rem_euclid(m)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(id: FunctionId, n: usize) -> ValueTable {
        generate_table(&id, n).unwrap()
    }

    // factorization by trial division, independent of the sieve
    fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut a = 0;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            if a > 0 {
                out.push((p, a));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn lambda_first_ten_matches_trial_division() {
        let t = table(FunctionId::Lambda, 10);
        let oracle: Vec<i64> = (1..=10u64)
            .map(|n| {
                let big_omega: u32 = trial_factor(n).iter().map(|&(_, a)| a).sum();
                if big_omega % 2 == 0 { 1 } else { -1 }
            })
            .collect();
        assert_eq!(t.values(), &oracle[..]);
        assert_eq!(t.values(), &[1, -1, -1, 1, -1, 1, -1, -1, 1, 1]);
    }

    #[test]
    fn mu_and_small_values() {
        assert_eq!(table(FunctionId::Mu, 4).at(4), 0);
        assert_eq!(table(FunctionId::Lambda, 1).at(1), 1);
        let pp = table(FunctionId::ChiPP, 8);
        assert_eq!(pp.at(8), 1);
        assert_eq!(pp.at(6), 0);
        assert_eq!(pp.at(1), 0);
    }

    #[test]
    fn rho_of_twelve_counts_squarefree_divisors() {
        let brute = (1..=12).filter(|d| 12 % d == 0 && trial_factor(*d).iter().all(|&(_, a)| a == 1)).count();
        assert_eq!(brute, 4);
        assert_eq!(table(FunctionId::Rho, 12).at(12), brute as i64);
    }

    #[test]
    fn values_at_one() {
        for id in FunctionId::catalog() {
            let t = table(id.clone(), 1);
            let expected = match id {
                FunctionId::BigOmega | FunctionId::Omega | FunctionId::ChiP | FunctionId::ChiPP => 0,
                FunctionId::SumBinaryDigits => 1,
                FunctionId::ThueMorsePm => -1,
                FunctionId::NthPrime => 2,
                FunctionId::RHalfRho => 0,
                _ => 1,
            };
            assert_eq!(t.at(1), expected, "{id}");
        }
    }

    #[test]
    fn reduce_mod_examples() {
        let om = reduce_mod(&table(FunctionId::BigOmega, 8), 2).unwrap();
        let lam = table(FunctionId::Lambda, 8);
        let oracle: Vec<i64> = lam.values().iter().map(|l| (1 - l) / 2).collect();
        assert_eq!(om.values(), &oracle[..]);
        assert_eq!(om.values(), &[0, 1, 1, 0, 1, 0, 1, 1]);

        let tau = reduce_mod(&table(FunctionId::Tau, 10), 2).unwrap();
        assert_eq!(tau.values(), &[1, 0, 0, 1, 0, 0, 0, 0, 1, 0]);

        let one = reduce_mod(&table(FunctionId::ConstOne, 50), 5).unwrap();
        assert!(one.values().iter().all(|&v| v == 1));
        assert_eq!(one.label(), "const_one mod 5");
        assert!(reduce_mod(&one, 1).is_err());
    }

    #[test]
    fn mu_squared_is_q2_and_rho_relations() {
        let n = 5000;
        let mu = table(FunctionId::Mu, n);
        let q2 = table(FunctionId::Qm(2), n);
        let rho = table(FunctionId::Rho, n);
        let r = table(FunctionId::RHalfRho, n);
        let omega = table(FunctionId::Omega, n);
        let big = table(FunctionId::BigOmega, n);
        let lam = table(FunctionId::Lambda, n);
        let pp = table(FunctionId::ChiPP, n);
        for i in 1..=n {
            assert_eq!(mu.at(i).abs(), q2.at(i));
            assert_eq!(rho.at(i), 1 << omega.at(i));
            if i >= 2 {
                assert_eq!(rho.at(i), 2 * r.at(i));
            }
            assert_eq!(r.at(i) % 2, pp.at(i));
            assert_eq!(lam.at(i), if big.at(i) % 2 == 0 { 1 } else { -1 });
            if q2.at(i) == 1 {
                assert_eq!(mu.at(i), if omega.at(i) % 2 == 0 { 1 } else { -1 });
            }
        }
    }

    #[test]
    fn totient_divisor_sum_is_identity() {
        let n = 10_000;
        let phi = table(FunctionId::Phi, n);
        let mut acc = vec![0i64; n + 1];
        for d in 1..=n {
            for m in (d..=n).step_by(d) {
                acc[m] += phi.at(d);
            }
        }
        for (m, &s) in acc.iter().enumerate().skip(1) {
            assert_eq!(s, m as i64);
        }
    }

    #[test]
    fn lambda_completely_multiplicative_exhaustive() {
        let n = 3000;
        let lam = table(FunctionId::Lambda, n);
        for a in 1..=n {
            for b in 1..=n / a {
                assert_eq!(lam.at(a * b), lam.at(a) * lam.at(b));
            }
        }
    }

    #[test]
    fn divisor_functions_against_brute_force() {
        let n = 600;
        let tau = table(FunctionId::Tau, n);
        let tau3 = table(FunctionId::TauK(3), n);
        let sigma = table(FunctionId::SigmaM(1), n);
        let sigma2 = table(FunctionId::SigmaM(2), n);
        let tsq = table(FunctionId::TauOfSquare, n);
        let t2 = table(FunctionId::TauSquared, n);
        for m in 1..=n {
            let divs: Vec<usize> = (1..=m).filter(|d| m % d == 0).collect();
            assert_eq!(tau.at(m), divs.len() as i64);
            assert_eq!(t2.at(m), (divs.len() * divs.len()) as i64);
            assert_eq!(sigma.at(m), divs.iter().sum::<usize>() as i64);
            assert_eq!(sigma2.at(m), divs.iter().map(|d| d * d).sum::<usize>() as i64);
            let ordered_triples: usize = divs.iter().map(|&d| (1..=m / d).filter(|e| (m / d) % e == 0).count()).sum();
            assert_eq!(tau3.at(m), ordered_triples as i64);
            let sq = m * m;
            assert_eq!(tsq.at(m), (1..=sq).filter(|d| sq % d == 0).count() as i64);
        }
    }

    #[test]
    fn nth_prime_and_exhaustion() {
        let ft = build_factor_table(100).unwrap();
        let p = generate(&FunctionId::NthPrime, 25, &ft).unwrap();
        assert_eq!(p.at(25), 97);
        assert!(matches!(generate(&FunctionId::NthPrime, 26, &ft), Err(Error::Range(_))));
    }

    #[test]
    fn sigma_overflow_is_reported() {
        // sigma_3 grows like n^3; a table value beyond i64 must fail, not wrap
        let ft = build_factor_table(10).unwrap();
        let huge = FunctionId::SigmaM(3);
        assert!(generate(&huge, 10, &ft).is_ok());
        let err = function::evaluate_prime_power(&FunctionId::SigmaM(3), 3_000_000_019, 1);
        assert!(matches!(err, Err(Error::Capacity(_))));
    }

    #[test]
    fn json_and_csv_exports() {
        let t = reduce_mod(&table(FunctionId::Qm(3), 5), 2).unwrap();
        let j = t.to_json();
        assert_eq!(j["id"], "q_m");
        assert_eq!(j["params"]["m"], 3);
        assert_eq!(j["params"]["mod"], 2);
        assert_eq!(j["N"], 5);
        assert_eq!(ValueTable::from_json(&j).unwrap(), t);
        let mut out = Vec::new();
        table(FunctionId::IdentityN, 3).write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,value\n1,1\n2,2\n3,3\n");
    }

    #[test]
    fn fixtures() {
        let tm = table(FunctionId::ThueMorsePm, 8);
        assert_eq!(tm.values(), &[-1, -1, 1, -1, 1, 1, -1, -1]);
        let s = table(FunctionId::SumBinaryDigits, 8);
        assert_eq!(s.values(), &[1, 1, 2, 1, 2, 2, 3, 1]);
    }
}
