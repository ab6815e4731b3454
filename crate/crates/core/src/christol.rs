//! Cartier-section orbits of power series over F_p.
//!
//! The sections `sum a_n X^n -> sum a_{pn+r} X^n` are the coefficient-side
//! counterpart of the p-kernel: a series has a finite orbit under them exactly
//! when its coefficients are p-automatic, i.e. when it is algebraic over
//! F_p(X). Truncated series are compared only on a common window of at least
//! [`MIN_WINDOW`] coefficients, so truncation never merges distinct series.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::seqgen::ValueTable;

/// Smallest window on which two series may be declared equal.
pub const MIN_WINDOW: usize = 32;

/// A truncated power series over F_p; `coeffs[0]` is the constant term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpSeries {
    pub p: u64,
    pub coeffs: Vec<u8>,
    pub reliable_len: usize,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl FpSeries {
    pub fn new(p: u64, coeffs: Vec<u8>) -> Result<Self> {
        if !is_prime(p) || p > 251 {
            return Err(Error::Domain(format!("p must be a prime below 256, got {p}")));
        }
        if coeffs.is_empty() {
            return Err(Error::Domain("series needs at least one coefficient".into()));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c as u64 >= p) {
            return Err(Error::Domain(format!("coefficient {c} is not reduced mod {p}")));
        }
        let reliable_len = coeffs.len();
        Ok(Self { p, coeffs, reliable_len })
    }

    /// Equality on the common window, or `None` if that window is below [`MIN_WINDOW`].
    pub fn agrees_with(&self, other: &FpSeries) -> Option<bool> {
        let w = self.reliable_len.min(other.reliable_len);
        (w >= MIN_WINDOW).then(|| self.coeffs[..w] == other.coeffs[..w])
    }

    /// `{p, reliable_len, coeffs}`.
    pub fn to_json(&self) -> Value {
        json!({ "p": self.p, "reliable_len": self.reliable_len, "coeffs": self.coeffs })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |f: &str| Error::Format(format!("series JSON: bad or missing '{f}'"));
        let p = v.get("p").and_then(Value::as_u64).ok_or_else(|| bad("p"))?;
        let coeffs: Vec<u8> =
            serde_json::from_value(v.get("coeffs").cloned().ok_or_else(|| bad("coeffs"))?).map_err(|_| bad("coeffs"))?;
        let s = Self::new(p, coeffs)?;
        match v.get("reliable_len").and_then(Value::as_u64) {
            Some(n) if n as usize == s.reliable_len => Ok(s),
            _ => Err(bad("reliable_len")),
        }
    }
}

/// `sum_{1 <= n < N} (t(n) mod p) X^n`, exact on all `N` coefficients.
pub fn series_from_table(t: &ValueTable, p: u64, n: usize) -> Result<FpSeries> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if n == 0 || n > t.len() {
        return Err(Error::Capacity(format!("N must be in 1..={}, got {n}", t.len())));
    }
    let coeffs = (0..n).map(|i| if i == 0 { 0 } else { t.at(i).rem_euclid(p as i64) as u8 }).collect();
    FpSeries::new(p, coeffs)
}

/// The section `a_n -> a_{pn+r}`.
pub fn cartier_section(s: &FpSeries, r: u64) -> Result<FpSeries> {
    if r >= s.p {
        return Err(Error::Domain(format!("residue {r} must be below p = {}", s.p)));
    }
    let p = s.p as usize;
    let r = r as usize;
    let len = s.reliable_len.saturating_sub(r) / p;
    if len < MIN_WINDOW {
        return Err(Error::Range(format!(
            "section {r} of a series exact to {} leaves {len} coefficients, below the {MIN_WINDOW}-coefficient window",
            s.reliable_len
        )));
    }
    let coeffs = (0..len).map(|n| s.coeffs[p * n + r]).collect();
    Ok(FpSeries { p: s.p, coeffs, reliable_len: len })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitOutcome {
    /// The orbit closed with `size` distinct series.
    Finite { size: usize },
    /// More than `budget` distinct series by section depth `depth`.
    Growing { depth: u32, count: usize },
    /// A section at depth `depth` fell below the comparison window.
    Exhausted { depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitReport {
    pub p: u64,
    pub budget: usize,
    pub outcome: OrbitOutcome,
    /// Smallest window used in any equality test.
    pub window: usize,
    /// Distinct series found, in discovery order.
    pub orbit: Vec<FpSeries>,
}

/// Breadth-first closure of `{s}` under the `p` sections, up to `budget` distinct series.
pub fn orbit_explore(s: &FpSeries, budget: usize) -> Result<OrbitReport> {
    let order: Vec<u64> = (0..s.p).collect();
    orbit_explore_in_order(s, budget, &order)
}

/// As [`orbit_explore`], applying the sections in the residue order given.
pub fn orbit_explore_in_order(s: &FpSeries, budget: usize, order: &[u64]) -> Result<OrbitReport> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..s.p).collect::<Vec<_>>() {
        return Err(Error::Domain(format!("section order must permute 0..{}", s.p)));
    }
    if s.reliable_len < MIN_WINDOW * s.p as usize {
        return Err(Error::Capacity(format!(
            "orbit exploration needs at least {} coefficients, series has {}",
            MIN_WINDOW * s.p as usize,
            s.reliable_len
        )));
    }
    let mut orbit = vec![s.clone()];
    let mut window = s.reliable_len;
    let mut frontier = vec![0usize];
    let mut depth = 0u32;
    let report = |outcome, window, orbit| OrbitReport { p: s.p, budget, outcome, window, orbit };
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &i in &frontier {
            for &r in order {
                let Ok(child) = cartier_section(&orbit[i], r) else {
                    return Ok(report(OrbitOutcome::Exhausted { depth }, window, orbit));
                };
                let mut seen = false;
                for o in &orbit {
                    window = window.min(o.reliable_len.min(child.reliable_len));
                    if child.agrees_with(o) == Some(true) {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    orbit.push(child);
                    next.push(orbit.len() - 1);
                    if orbit.len() > budget {
                        let count = orbit.len();
                        return Ok(report(OrbitOutcome::Growing { depth, count }, window, orbit));
                    }
                }
            }
        }
        frontier = next;
    }
    let size = orbit.len();
    Ok(report(OrbitOutcome::Finite { size }, window, orbit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraicityVerdict {
    AlgebraicEvidence { size: usize },
    TranscendenceEvidence { depth: u32, count: usize },
    Inconclusive { depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictReport {
    pub verdict: AlgebraicityVerdict,
    pub window: usize,
    pub p: u64,
    pub budget: usize,
}

impl VerdictReport {
    pub fn text(&self) -> String {
        let w = self.window;
        match self.verdict {
            AlgebraicityVerdict::AlgebraicEvidence { size } => format!(
                "algebraic evidence: orbit closed with {size} series over F_{} (compared on {w} coefficients)",
                self.p
            ),
            AlgebraicityVerdict::TranscendenceEvidence { depth, count } => format!(
                "transcendence evidence: {count} distinct series over F_{} by section depth {depth}, budget {} (compared on {w} coefficients)",
                self.p, self.budget
            ),
            AlgebraicityVerdict::Inconclusive { depth } => format!(
                "inconclusive: sections at depth {depth} drop below the {MIN_WINDOW}-coefficient window (smallest window used {w})"
            ),
        }
    }

    /// `{verdict, size_or_depth, window}` plus the details.
    pub fn to_json(&self) -> Value {
        let (name, size_or_depth) = match self.verdict {
            AlgebraicityVerdict::AlgebraicEvidence { size } => ("algebraic_evidence", size as u64),
            AlgebraicityVerdict::TranscendenceEvidence { depth, .. } => ("transcendence_evidence", depth as u64),
            AlgebraicityVerdict::Inconclusive { depth } => ("inconclusive", depth as u64),
        };
        json!({
            "verdict": name,
            "size_or_depth": size_or_depth,
            "window": self.window,
            "p": self.p,
            "budget": self.budget,
            "detail": self.verdict,
            "text": self.text(),
        })
    }
}

pub fn algebraicity_verdict(report: &OrbitReport) -> VerdictReport {
    let verdict = match report.outcome {
        OrbitOutcome::Finite { size } => AlgebraicityVerdict::AlgebraicEvidence { size },
        OrbitOutcome::Growing { depth, count } => AlgebraicityVerdict::TranscendenceEvidence { depth, count },
        OrbitOutcome::Exhausted { depth } => AlgebraicityVerdict::Inconclusive { depth },
    };
    VerdictReport { verdict, window: report.window, p: report.p, budget: report.budget }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::kernel_element;
    use crate::seqgen::{generate_table, FunctionId};
    use proptest::prelude::*;

    fn series(id: FunctionId, p: u64, n: usize) -> FpSeries {
        series_from_table(&generate_table(&id, n).unwrap(), p, n).unwrap()
    }

    #[test]
    fn construction_examples() {
        assert_eq!(series(FunctionId::Lambda, 3, 8).coeffs, vec![0, 1, 2, 2, 1, 2, 1, 2]);
        assert_eq!(series(FunctionId::Mu, 2, 5).coeffs, vec![0, 1, 1, 1, 0]);
        let one = series(FunctionId::ConstOne, 2, 10);
        assert_eq!(one.coeffs, vec![0, 1, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(one.reliable_len, 10);
        let t = generate_table(&FunctionId::ConstOne, 10).unwrap();
        assert!(matches!(series_from_table(&t, 4, 10), Err(Error::Domain(_))));
        assert!(series_from_table(&t, 2, 11).is_err());
    }

    #[test]
    fn section_examples() {
        let one = series(FunctionId::ConstOne, 2, 100);
        let s0 = cartier_section(&one, 0).unwrap();
        assert_eq!(s0.coeffs[0], 0);
        assert!(s0.coeffs[1..].iter().all(|&c| c == 1));
        assert_eq!(s0.reliable_len, 50);
        assert!(cartier_section(&one, 1).unwrap().coeffs.iter().all(|&c| c == 1));

        let tm = series(FunctionId::SumBinaryDigits, 2, 256);
        let e = cartier_section(&tm, 0).unwrap();
        assert_eq!(e.coeffs[..], tm.coeffs[..e.reliable_len]);
        let o = cartier_section(&tm, 1).unwrap();
        for n in 0..o.reliable_len {
            assert_eq!(o.coeffs[n], (n.count_ones() as u8 + 1) % 2);
        }
        assert!(matches!(cartier_section(&series(FunctionId::ConstOne, 2, 63), 0), Err(Error::Range(_))));
        assert!(cartier_section(&one, 2).is_err());
    }

    #[test]
    fn sections_match_kernel_elements() {
        let n = 1 << 12;
        for id in [FunctionId::Lambda, FunctionId::Mu, FunctionId::Tau, FunctionId::ThueMorsePm] {
            let t = generate_table(&id, n).unwrap();
            for p in [2u64, 3, 5] {
                let s = series_from_table(&t, p, n).unwrap();
                for r in 0..p {
                    let sec = cartier_section(&s, r).unwrap();
                    let m = sec.reliable_len - 1;
                    let ke = kernel_element(&t, p, 1, r, m).unwrap();
                    for i in 1..=m {
                        assert_eq!(sec.coeffs[i] as i64, ke.prefix[i - 1].rem_euclid(p as i64), "{id} p={p} r={r} n={i}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sections_interleave_back(p in prop::sample::select(vec![2u64, 3, 5, 7]), raw in prop::collection::vec(0u8..255, 300..600)) {
            let coeffs: Vec<u8> = raw.iter().map(|&c| (c as u64 % p) as u8).collect();
            let s = FpSeries::new(p, coeffs).unwrap();
            let secs: Vec<FpSeries> = (0..p).map(|r| cartier_section(&s, r).unwrap()).collect();
            let covered = secs.iter().map(|x| x.reliable_len).min().unwrap() * p as usize;
            for n in 0..covered {
                prop_assert_eq!(secs[n % p as usize].coeffs[n / p as usize], s.coeffs[n]);
            }
        }
    }

    #[test]
    fn fixture_verdicts() {
        let one = orbit_explore(&series(FunctionId::ConstOne, 2, 1 << 12), 10).unwrap();
        assert!(matches!(one.outcome, OrbitOutcome::Finite { size } if size <= 2), "{:?}", one.outcome);
        let tm = orbit_explore(&series(FunctionId::SumBinaryDigits, 2, 1 << 12), 10).unwrap();
        assert!(matches!(tm.outcome, OrbitOutcome::Finite { size } if size <= 4), "{:?}", tm.outcome);
        assert!(matches!(algebraicity_verdict(&tm).verdict, AlgebraicityVerdict::AlgebraicEvidence { .. }));
        for id in [FunctionId::Lambda, FunctionId::Mu] {
            let r = orbit_explore(&series(id.clone(), 3, 1 << 16), 50).unwrap();
            let v = algebraicity_verdict(&r);
            assert!(matches!(v.verdict, AlgebraicityVerdict::TranscendenceEvidence { count: 51, .. }), "{id}: {v:?}");
            assert!(v.text().contains("coefficients"));
        }
    }

    #[test]
    fn short_series_are_inconclusive() {
        let r = orbit_explore(&series(FunctionId::Lambda, 3, 200), 50).unwrap();
        assert!(matches!(r.outcome, OrbitOutcome::Exhausted { .. }), "{:?}", r.outcome);
        assert!(matches!(algebraicity_verdict(&r).verdict, AlgebraicityVerdict::Inconclusive { .. }));
        assert!(orbit_explore(&series(FunctionId::Lambda, 3, 90), 50).is_err());
    }

    #[test]
    fn orbit_is_independent_of_order() {
        for (id, p) in [(FunctionId::SumBinaryDigits, 2u64), (FunctionId::ConstOne, 3), (FunctionId::ConstOne, 5)] {
            let s = series(id, p, 1 << 12);
            let fwd: Vec<u64> = (0..p).collect();
            let rev: Vec<u64> = (0..p).rev().collect();
            let a = orbit_explore_in_order(&s, 100, &fwd).unwrap();
            let b = orbit_explore_in_order(&s, 100, &rev).unwrap();
            assert_eq!(a.outcome, b.outcome);
            assert!(a.orbit.iter().all(|x| b.orbit.iter().any(|y| x.agrees_with(y) == Some(true))));
        }
        let s = series(FunctionId::Lambda, 3, 1 << 16);
        let a = orbit_explore_in_order(&s, 50, &[0, 1, 2]).unwrap();
        let b = orbit_explore_in_order(&s, 50, &[2, 0, 1]).unwrap();
        assert_eq!(a.outcome, b.outcome);
    }

    #[test]
    fn verdict_passthrough_and_json() {
        let mk = |outcome| OrbitReport { p: 3, budget: 50, outcome, window: 89, orbit: vec![] };
        let v = algebraicity_verdict(&mk(OrbitOutcome::Finite { size: 4 }));
        assert_eq!(v.verdict, AlgebraicityVerdict::AlgebraicEvidence { size: 4 });
        let v = algebraicity_verdict(&mk(OrbitOutcome::Growing { depth: 6, count: 51 }));
        assert_eq!(v.verdict, AlgebraicityVerdict::TranscendenceEvidence { depth: 6, count: 51 });
        assert_eq!(v.to_json()["size_or_depth"], 6);
        let v = algebraicity_verdict(&mk(OrbitOutcome::Exhausted { depth: 3 }));
        assert_eq!(v.verdict, AlgebraicityVerdict::Inconclusive { depth: 3 });
        assert_eq!(v.to_json()["verdict"], "inconclusive");
        assert_eq!(v.to_json()["window"], 89);

        let s = series(FunctionId::Mu, 5, 40);
        assert_eq!(FpSeries::from_json(&s.to_json()).unwrap(), s);
    }
}
