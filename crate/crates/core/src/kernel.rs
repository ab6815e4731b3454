//! k-kernel enumeration, distinct-count and rank profiles, value densities.
//!
//! Kernel subsequences start at `n = 1`: element `(l, r)` is
//! `n -> t(k^l n + r)` for `n = 1..=M`. Two elements are distinct when their
//! length-`M` prefixes differ, so every verdict here is relative to `M`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::EchelonBasis;
use crate::seqgen::ValueTable;

/// One kernel element, truncated to its first `M` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelElement {
    pub depth: u32,
    pub residue: u64,
    pub prefix: Vec<i64>,
}

/// Outcome of a growth profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// Depths `depth` and `depth + 1` added nothing; `size` is the stable count or rank.
    SaturatedAt { depth: u32, size: usize },
    /// Strictly increasing through the last depth.
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn is_saturated(&self) -> bool {
        matches!(self, Verdict::SaturatedAt { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Verdict::SaturatedAt { depth, size } => format!("saturated_at({depth}, {size})"),
            Verdict::Growing => "growing".into(),
            Verdict::Inconclusive => "inconclusive".into(),
        }
    }

    /// Classifies a non-decreasing sequence of per-depth counts.
    fn classify(counts: &[usize]) -> Verdict {
        for d in 1..counts.len().saturating_sub(1) {
            if counts[d - 1] == counts[d] && counts[d] == counts[d + 1] {
                return Verdict::SaturatedAt { depth: d as u32, size: counts[d] };
            }
        }
        if counts.len() >= 2 && counts.windows(2).all(|w| w[0] < w[1]) {
            Verdict::Growing
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Distinct kernel elements per depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub k: u64,
    pub m: usize,
    pub max_depth: u32,
    /// Entry `d` counts distinct prefixes among all elements of depth `<= d`.
    pub distinct_counts: Vec<usize>,
    pub verdict: Verdict,
}

/// Exact rank of stacked kernel prefixes per depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub k: u64,
    pub m: usize,
    pub max_depth: u32,
    pub ranks: Vec<usize>,
    pub verdict: Verdict,
}

macro_rules! profile_exports {
    ($ty:ty, $field:ident, $col:literal) => {
        impl $ty {
            /// JSON export `{k, M, L, counts_or_ranks, verdict}`.
            pub fn to_json(&self) -> Value {
                json!({
                    "k": self.k,
                    "M": self.m,
                    "L": self.max_depth,
                    "counts_or_ranks": self.$field,
                    "verdict": self.verdict.label(),
                })
            }

            /// CSV `depth,count` (or `depth,rank`).
            pub fn to_csv(&self) -> String {
                let mut s = String::from(concat!("depth,", $col, "\n"));
                for (d, c) in self.$field.iter().enumerate() {
                    s.push_str(&format!("{d},{c}\n"));
                }
                s
            }
        }
    };
}

profile_exports!(KernelProfile, distinct_counts, "count");
profile_exports!(RankProfile, ranks, "rank");

fn pow_checked(k: u64, l: u32) -> Result<u64> {
    k.checked_pow(l).ok_or_else(|| Error::Capacity(format!("{k}^{l} overflows")))
}

/// Table length needed to take `M` values of every element up to depth `L`.
pub fn required_len(k: u64, max_depth: u32, m: usize) -> Result<u64> {
    let kl = pow_checked(k, max_depth)?;
    kl.checked_mul(m as u64 + 1)
        .map(|x| x - 1)
        .ok_or_else(|| Error::Capacity("kernel window overflows".into()))
}

fn check_base(k: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("base k must be at least 2, got {k}")));
    }
    Ok(())
}

fn check_window(t: &ValueTable, k: u64, max_depth: u32, m: usize) -> Result<()> {
    check_base(k)?;
    if m == 0 {
        return Err(Error::Domain("comparison length M must be positive".into()));
    }
    let need = required_len(k, max_depth, m)?;
    if need > t.len() as u64 {
        return Err(Error::Capacity(format!(
            "depth {max_depth} with M={m} in base {k} needs N >= {need}, table has N={}",
            t.len()
        )));
    }
    Ok(())
}

fn prefix(t: &ValueTable, kl: u64, r: u64, m: usize) -> Vec<i64> {
    (1..=m as u64).map(|n| t.at((kl * n + r) as usize)).collect()
}

/// The kernel element `n -> t(k^l n + r)`, `n = 1..=M`.
pub fn kernel_element(t: &ValueTable, k: u64, depth: u32, residue: u64, m: usize) -> Result<KernelElement> {
    check_base(k)?;
    let kl = pow_checked(k, depth)?;
    if residue >= kl {
        return Err(Error::Domain(format!("residue {residue} must be below {k}^{depth} = {kl}")));
    }
    let need = kl
        .checked_mul(m as u64)
        .and_then(|x| x.checked_add(residue))
        .ok_or_else(|| Error::Capacity("kernel window overflows".into()))?;
    if need > t.len() as u64 {
        return Err(Error::Capacity(format!("element ({depth}, {residue}) with M={m} needs N >= {need}, table has N={}", t.len())));
    }
    Ok(KernelElement { depth, residue, prefix: prefix(t, kl, residue, m) })
}

/// Prefixes of all elements at one depth, in residue order.
fn depth_prefixes(t: &ValueTable, k: u64, depth: u32, m: usize) -> Vec<Vec<i64>> {
    let kl = k.pow(depth);
    (0..kl).into_par_iter().map(|r| prefix(t, kl, r, m)).collect()
}

/// Distinct kernel elements, discovered in (depth, residue) order.
#[derive(Debug, Clone)]
pub struct DistinctElements {
    /// `(depth, residue)` of the first occurrence of each distinct prefix.
    pub labels: Vec<(u32, u64)>,
    pub prefixes: Vec<Vec<i64>>,
    pub counts: Vec<usize>,
}

/// Enumerates distinct kernel elements up to `max_depth`. Keys are full
/// prefixes, so hash collisions never merge elements.
pub fn distinct_elements(t: &ValueTable, k: u64, max_depth: u32, m: usize) -> Result<DistinctElements> {
    check_window(t, k, max_depth, m)?;
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut out = DistinctElements { labels: Vec::new(), prefixes: Vec::new(), counts: Vec::new() };
    for depth in 0..=max_depth {
        for (r, p) in depth_prefixes(t, k, depth, m).into_iter().enumerate() {
            if !seen.contains_key(&p) {
                seen.insert(p.clone(), out.prefixes.len());
                out.labels.push((depth, r as u64));
                out.prefixes.push(p);
            }
        }
        out.counts.push(out.prefixes.len());
    }
    Ok(out)
}

pub fn kernel_profile(t: &ValueTable, k: u64, max_depth: u32, m: usize) -> Result<KernelProfile> {
    let d = distinct_elements(t, k, max_depth, m)?;
    let verdict = Verdict::classify(&d.counts);
    Ok(KernelProfile { k, m, max_depth, distinct_counts: d.counts, verdict })
}

/// Rank over Q of all kernel prefixes of depth `<= d`, for each `d`.
pub fn rank_profile(t: &ValueTable, k: u64, max_depth: u32, m: usize) -> Result<RankProfile> {
    check_window(t, k, max_depth, m)?;
    let mut basis = EchelonBasis::new(m);
    let mut ranks = Vec::with_capacity(max_depth as usize + 1);
    for depth in 0..=max_depth {
        for p in depth_prefixes(t, k, depth, m) {
            basis.insert(&p);
        }
        ranks.push(basis.rank());
    }
    let verdict = Verdict::classify(&ranks);
    Ok(RankProfile { k, m, max_depth, ranks, verdict })
}

/// Empirical density of one value at one prefix length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub length: usize,
    pub count: usize,
    pub density: f64,
    /// Best `p/q` with `q <= 64`.
    pub rational: (i64, i64),
    pub residual: f64,
}

/// Best rational approximation with denominator at most `max_den`; ties go to the smaller denominator.
pub fn best_rational(x: f64, max_den: i64) -> (i64, i64) {
    let mut best = (x.round() as i64, 1);
    let mut best_err = (x - best.0 as f64).abs();
    for q in 2..=max_den {
        let p = (x * q as f64).round() as i64;
        let err = (x - p as f64 / q as f64).abs();
        if err < best_err - 1e-15 {
            best = (p, q);
            best_err = err;
        }
    }
    let g = num_integer::gcd(best.0, best.1).max(1);
    (best.0 / g, best.1 / g)
}

/// `#{n <= X : t(n) = v} / X` for each requested `X`. Evidence only.
pub fn value_density(t: &ValueTable, v: i64, lengths: &[usize]) -> Result<Vec<DensityEstimate>> {
    let max = lengths.iter().copied().max().unwrap_or(0);
    if max > t.len() {
        return Err(Error::Capacity(format!("prefix length {max} exceeds table length {}", t.len())));
    }
    if lengths.contains(&0) {
        return Err(Error::Domain("prefix lengths must be positive".into()));
    }
    // running count, so every length is answered in one pass
    let mut sorted: Vec<usize> = lengths.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut counts = HashMap::new();
    let mut c = 0usize;
    let mut next = 0;
    for n in 1..=max {
        if t.at(n) == v {
            c += 1;
        }
        while next < sorted.len() && sorted[next] == n {
            counts.insert(n, c);
            next += 1;
        }
    }
    Ok(lengths
        .iter()
        .map(|&x| {
            let count = counts[&x];
            let density = count as f64 / x as f64;
            let rational = best_rational(density, 64);
            let residual = (density - rational.0 as f64 / rational.1 as f64).abs();
            DensityEstimate { length: x, count, density, rational, residual }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::{generate_table, reduce_mod, FunctionId};

    fn table(id: FunctionId, n: usize) -> ValueTable {
        generate_table(&id, n).unwrap()
    }

    #[test]
    fn element_examples() {
        let tm = table(FunctionId::ThueMorsePm, 100);
        assert_eq!(kernel_element(&tm, 2, 1, 0, 8).unwrap().prefix, kernel_element(&tm, 2, 0, 0, 8).unwrap().prefix);

        let lam = table(FunctionId::Lambda, 100);
        let base = kernel_element(&lam, 2, 0, 0, 8).unwrap().prefix;
        let even = kernel_element(&lam, 2, 1, 0, 8).unwrap().prefix;
        // lambda(2n) = lambda(2) lambda(n)
        let oracle: Vec<i64> = base.iter().map(|v| lam.at(2) * v).collect();
        assert_eq!(even, oracle);
        assert_eq!(even, base.iter().map(|v| -v).collect::<Vec<_>>());

        let id = table(FunctionId::IdentityN, 100);
        assert_eq!(kernel_element(&id, 2, 2, 3, 4).unwrap().prefix, vec![7, 11, 15, 19]);
    }

    #[test]
    fn element_errors() {
        let id = table(FunctionId::IdentityN, 18);
        assert!(matches!(kernel_element(&id, 2, 2, 4, 4), Err(Error::Domain(_))));
        let e = kernel_element(&id, 2, 2, 3, 4).unwrap_err();
        assert!(e.to_string().contains("N >= 19"), "{e}");
        assert!(matches!(kernel_element(&id, 1, 0, 0, 4), Err(Error::Domain(_))));
    }

    // brute-force enumeration kept separate from the profile code path
    fn brute_counts(t: &ValueTable, k: u64, max_depth: u32, m: usize) -> Vec<usize> {
        let mut all: Vec<Vec<i64>> = Vec::new();
        let mut counts = Vec::new();
        for l in 0..=max_depth {
            for r in 0..k.pow(l) {
                let p: Vec<i64> = (1..=m as u64).map(|n| t.values()[(k.pow(l) * n + r - 1) as usize]).collect();
                if !all.contains(&p) {
                    all.push(p);
                }
            }
            counts.push(all.len());
        }
        counts
    }

    #[test]
    fn thue_morse_saturates_at_two() {
        let tm = table(FunctionId::ThueMorsePm, required_len(2, 6, 64).unwrap() as usize);
        let p = kernel_profile(&tm, 2, 6, 64).unwrap();
        assert_eq!(p.distinct_counts, brute_counts(&tm, 2, 6, 64));
        assert_eq!(p.verdict, Verdict::SaturatedAt { depth: 2, size: 2 });
    }

    #[test]
    fn const_one_saturates_at_one() {
        let one = table(FunctionId::ConstOne, required_len(3, 5, 32).unwrap() as usize);
        let p = kernel_profile(&one, 3, 5, 32).unwrap();
        assert_eq!(p.verdict, Verdict::SaturatedAt { depth: 1, size: 1 });
        assert!(p.distinct_counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn lambda_kernel_grows() {
        let lam = table(FunctionId::Lambda, 1 << 17);
        let p = kernel_profile(&lam, 2, 8, 256).unwrap();
        assert_eq!(p.verdict, Verdict::Growing);
        assert_eq!(p.distinct_counts, brute_counts(&lam, 2, 8, 256));
    }

    #[test]
    fn rank_examples() {
        let n = required_len(2, 6, 64).unwrap() as usize;
        let id = table(FunctionId::IdentityN, n);
        let r = rank_profile(&id, 2, 6, 32).unwrap();
        assert_eq!(r.verdict, Verdict::SaturatedAt { depth: 2, size: 2 });
        let s = table(FunctionId::SumBinaryDigits, n);
        let r = rank_profile(&s, 2, 6, 32).unwrap();
        assert_eq!(r.ranks.last(), Some(&2));
        assert!(r.verdict.is_saturated());
        let phi = table(FunctionId::Phi, n);
        let r = rank_profile(&phi, 2, 6, 64).unwrap();
        assert_eq!(r.verdict, Verdict::Growing, "{:?}", r.ranks);
    }

    #[test]
    fn rank_never_exceeds_distinct_count() {
        for id in [FunctionId::Mu, FunctionId::Tau, FunctionId::ThueMorsePm, FunctionId::Omega] {
            let t = table(id, required_len(3, 4, 20).unwrap() as usize);
            let kp = kernel_profile(&t, 3, 4, 20).unwrap();
            let rp = rank_profile(&t, 3, 4, 20).unwrap();
            for (c, r) in kp.distinct_counts.iter().zip(&rp.ranks) {
                assert!(r <= c);
                assert!(*r <= 20);
            }
            assert!(kp.distinct_counts.windows(2).all(|w| w[0] <= w[1]));
            assert!(rp.ranks.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn refinement_consistency() {
        // element (l+1, r + j k^l) evaluated at n equals element (l, r) at k n + j
        let k = 3u64;
        let t = table(FunctionId::Phi, 5000);
        for (l, r) in [(0u32, 0u64), (1, 2), (2, 5)] {
            let kl = k.pow(l);
            let parent: Vec<i64> = (1..=150u64).map(|n| t.at((kl * n + r) as usize)).collect();
            for j in 0..k {
                let child = kernel_element(&t, k, l + 1, r + j * kl, 40).unwrap();
                for n in 1..=40usize {
                    assert_eq!(child.prefix[n - 1], parent[k as usize * n + j as usize - 1]);
                }
            }
        }
    }

    #[test]
    fn capacity_error_names_requirement() {
        let t = table(FunctionId::Lambda, 1000);
        let e = kernel_profile(&t, 2, 8, 256).unwrap_err();
        assert!(matches!(e, Error::Capacity(ref s) if s.contains("65791")), "{e}");
    }

    #[test]
    fn densities() {
        let one = table(FunctionId::ConstOne, 100);
        for d in value_density(&one, 1, &[1, 10, 100]).unwrap() {
            assert_eq!(d.density, 1.0);
            assert_eq!(d.rational, (1, 1));
        }
        let tau2 = reduce_mod(&table(FunctionId::Tau, 1_000_000), 2).unwrap();
        let d = &value_density(&tau2, 1, &[1_000_000]).unwrap()[0];
        assert_eq!(d.count, 1000);
        assert_eq!(d.density, 0.001);

        let mu = table(FunctionId::Mu, 1_000_000);
        // square-free count by direct sieve of square multiples
        let mut sqfree = vec![true; 1_000_001];
        let mut q = 2usize;
        while q * q <= 1_000_000 {
            for m in (q * q..=1_000_000).step_by(q * q) {
                sqfree[m] = false;
            }
            q += 1;
        }
        let count = (1..=1_000_000).filter(|&n| sqfree[n]).count();
        let d = &value_density(&mu, 0, &[1_000_000]).unwrap()[0];
        assert!((d.density - (1.0 - count as f64 / 1e6)).abs() < 1e-12);
        assert!((d.density - 0.392074).abs() < 1e-6, "{}", d.density);
        assert!(value_density(&mu, 0, &[2_000_000]).is_err());
    }

    #[test]
    fn best_rational_examples() {
        assert_eq!(best_rational(0.5, 64), (1, 2));
        assert_eq!(best_rational(0.3333333, 64), (1, 3));
        assert_eq!(best_rational(0.0, 64), (0, 1));
        assert_eq!(best_rational(6.0 / 3.14159265358979f64.powi(2), 64), (31, 51));
    }

    #[test]
    fn exports() {
        let one = table(FunctionId::ConstOne, 100);
        let p = kernel_profile(&one, 2, 2, 8).unwrap();
        let j = p.to_json();
        assert_eq!(j["verdict"], "saturated_at(1, 1)");
        assert_eq!(j["counts_or_ranks"], json!([1, 1, 1]));
        assert_eq!(p.to_csv(), "depth,count\n0,1\n1,1\n2,1\n");
    }
}
