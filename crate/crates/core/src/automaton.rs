//! Linear representations `U_{kn+r} = A_r U_n` of k-automatic (and k-regular)
//! sequences, their average matrix and the pole lattice it predicts.
//!
//! Digits run over `r = 0..k-1` and the recursion holds for `n >= 1`; the
//! vectors `U_1..U_{k-1}`, which no recursion step reaches, are stored as the
//! initial segment.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{self, RatMatrix};
use crate::kernel::{distinct_elements, Verdict};
use crate::seqgen::ValueTable;

/// Whether matrices are 0/1 row selections or general integer matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentationMode {
    Automatic,
    Regular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRepresentation {
    k: u64,
    dim: usize,
    matrices: Vec<Vec<Vec<i64>>>,
    initial: Vec<Vec<i64>>,
    output_coord: usize,
    labels: Vec<(u32, u64)>,
    verified_to: u64,
    mode: RepresentationMode,
}

fn mat_vec(a: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    a.iter()
        .map(|row| row.iter().zip(v).try_fold(0i64, |acc, (x, y)| acc.checked_add(x.checked_mul(*y)?)))
        .collect()
}

impl LinearRepresentation {
    /// Assembles a representation from its parts; `initial` holds `U_1..U_{k-1}`.
    pub fn new(
        k: u64,
        matrices: Vec<Vec<Vec<i64>>>,
        initial: Vec<Vec<i64>>,
        output_coord: usize,
        labels: Vec<(u32, u64)>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain("base k must be at least 2".into()));
        }
        if matrices.len() != k as usize {
            return Err(Error::Domain(format!("expected {k} matrices, got {}", matrices.len())));
        }
        if initial.len() != k as usize - 1 {
            return Err(Error::Domain(format!("expected {} initial vectors, got {}", k - 1, initial.len())));
        }
        let dim = initial[0].len();
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        let square = matrices.iter().all(|m| m.len() == dim && m.iter().all(|row| row.len() == dim));
        if !square || initial.iter().any(|v| v.len() != dim) {
            return Err(Error::Domain(format!("all matrices must be {dim}x{dim} and vectors of length {dim}")));
        }
        if output_coord >= dim {
            return Err(Error::Domain("output coordinate out of range".into()));
        }
        if !labels.is_empty() && labels.len() != dim {
            return Err(Error::Domain("one label per coordinate".into()));
        }
        let row_selection =
            matrices.iter().flatten().all(|row| row.iter().all(|&x| x == 0 || x == 1) && row.iter().sum::<i64>() == 1);
        let mode = if row_selection { RepresentationMode::Automatic } else { RepresentationMode::Regular };
        Ok(Self { k, dim, matrices, initial, output_coord, labels, verified_to: 0, mode })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[Vec<Vec<i64>>] {
        &self.matrices
    }

    /// `U_1`.
    pub fn seed(&self) -> &[i64] {
        &self.initial[0]
    }

    /// `U_1..U_{k-1}`.
    pub fn initial_segment(&self) -> &[Vec<i64>] {
        &self.initial
    }

    pub fn output_coord(&self) -> usize {
        self.output_coord
    }

    pub fn labels(&self) -> &[(u32, u64)] {
        &self.labels
    }

    pub fn verified_to(&self) -> u64 {
        self.verified_to
    }

    pub fn mode(&self) -> RepresentationMode {
        self.mode
    }

    /// Every row of every matrix has exactly one 1 and zeros elsewhere.
    pub fn is_row_selection(&self) -> bool {
        self.mode == RepresentationMode::Automatic
    }

    /// The full vector `U_n` by peeling base-k digits.
    pub fn eval_vector(&self, n: u64) -> Result<Vec<i64>> {
        if n == 0 {
            return Err(Error::Domain("sequences are indexed from 1".into()));
        }
        let mut digits = Vec::new();
        let mut q = n;
        while q >= self.k {
            digits.push((q % self.k) as usize);
            q /= self.k;
        }
        let mut v = self.initial[q as usize - 1].clone();
        for &r in digits.iter().rev() {
            v = mat_vec(&self.matrices[r], &v)
                .ok_or_else(|| Error::Capacity(format!("U_{n} overflows i64")))?;
        }
        Ok(v)
    }

    /// `u(n)`, the output coordinate of `U_n`.
    pub fn eval(&self, n: u64) -> Result<i64> {
        Ok(self.eval_vector(n)?[self.output_coord])
    }

    /// All vectors `U_1..=U_n` as floats, built forward from the recursion.
    pub(crate) fn vectors_f64(&self, n: usize) -> Vec<Vec<f64>> {
        let k = self.k as usize;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mats: Vec<Vec<Vec<f64>>> =
            self.matrices.iter().map(|m| m.iter().map(|row| row.iter().map(|&x| x as f64).collect()).collect()).collect();
        for i in 1..=n {
            if i < k {
                out.push(self.initial[i - 1].iter().map(|&x| x as f64).collect());
            } else {
                let (q, r) = (i / k, i % k);
                let u = &out[q - 1];
                let v = mats[r].iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect();
                out.push(v);
            }
        }
        out
    }

    /// `max_r ||A_r||_inf`.
    pub(crate) fn max_matrix_norm(&self) -> f64 {
        self.matrices
            .iter()
            .flat_map(|m| m.iter().map(|row| row.iter().map(|x| x.unsigned_abs() as f64).sum::<f64>()))
            .fold(0.0, f64::max)
    }

    /// Constants `(C, d)` with `||U_n||_inf <= C n^d` for all `n >= 1`.
    pub(crate) fn growth_bound(&self) -> (f64, f64) {
        let c = self
            .initial
            .iter()
            .flat_map(|v| v.iter().map(|x| x.unsigned_abs() as f64))
            .fold(0.0, f64::max)
            .max(1e-300);
        let rho = self.max_matrix_norm().max(1.0);
        (c, rho.ln() / (self.k as f64).ln())
    }

    /// Checks `eval` against the table on `1..=bound` and every coordinate
    /// against its kernel element where the table reaches.
    pub fn verify_against(&mut self, t: &ValueTable, bound: u64) -> Result<()> {
        let bound = bound.min(t.len() as u64);
        for n in 1..=bound {
            let v = self.eval_vector(n)?;
            if v[self.output_coord] != t.at(n as usize) {
                return Err(Error::Construction(format!(
                    "representation gives {} at n={n}, table has {}",
                    v[self.output_coord],
                    t.at(n as usize)
                )));
            }
            for (j, &(l, r)) in self.labels.iter().enumerate() {
                let idx = self.k.pow(l) * n + r;
                if idx <= t.len() as u64 && v[j] != t.at(idx as usize) {
                    return Err(Error::Construction(format!("coordinate ({l},{r}) mismatches at n={n}")));
                }
            }
        }
        self.verified_to = bound;
        Ok(())
    }

    /// `(1/k) sum_r A_r` in exact rationals.
    pub fn average_matrix(&self) -> RatMatrix {
        let k = BigInt::from(self.k);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        let s: i64 = self.matrices.iter().map(|m| m[i][j]).sum();
                        BigRational::new(BigInt::from(s), k.clone())
                    })
                    .collect()
            })
            .collect()
    }

    /// `det(xI - avg)` coefficients, ascending.
    pub fn characteristic_polynomial(&self) -> Vec<BigRational> {
        exact::characteristic_polynomial(&self.average_matrix())
    }

    /// True when `1` is exactly a root of the characteristic polynomial.
    pub fn has_eigenvalue_one(&self) -> bool {
        let one = BigRational::from_integer(BigInt::from(1));
        exact::poly_eval(&self.characteristic_polynomial(), &one).is_zero()
    }

    pub(crate) fn average_matrix_f64(&self) -> DMatrix<f64> {
        let k = self.k as f64;
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.matrices.iter().map(|m| m[i][j] as f64).sum::<f64>() / k)
    }

    /// JSON `{k, t, matrices, seed, output_coord, labels, verified_to}`.
    pub fn to_json(&self) -> Value {
        let flat: Vec<Vec<i64>> = self.matrices.iter().map(|m| m.iter().flatten().copied().collect()).collect();
        json!({
            "k": self.k,
            "t": self.dim,
            "matrices": flat,
            "seed": self.initial[0],
            "initial_segment": self.initial,
            "output_coord": self.output_coord,
            "labels": self.labels.iter().map(|&(l, r)| json!([l, r])).collect::<Vec<_>>(),
            "verified_to": self.verified_to,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Format(format!("representation JSON: bad or missing {what}"));
        let k = v["k"].as_u64().ok_or_else(|| bad("k"))?;
        let dim = v["t"].as_u64().ok_or_else(|| bad("t"))? as usize;
        let flat: Vec<Vec<i64>> = serde_json::from_value(v["matrices"].clone()).map_err(|_| bad("matrices"))?;
        if flat.iter().any(|m| m.len() != dim * dim) {
            return Err(bad("matrices (expected t*t entries each)"));
        }
        let matrices = flat.into_iter().map(|m| m.chunks(dim).map(|c| c.to_vec()).collect()).collect();
        let initial: Vec<Vec<i64>> = match v.get("initial_segment") {
            Some(seg) => serde_json::from_value(seg.clone()).map_err(|_| bad("initial_segment"))?,
            None => vec![serde_json::from_value(v["seed"].clone()).map_err(|_| bad("seed"))?],
        };
        let output_coord = v["output_coord"].as_u64().ok_or_else(|| bad("output_coord"))? as usize;
        let labels: Vec<(u32, u64)> = match v.get("labels") {
            Some(l) => serde_json::from_value(l.clone()).map_err(|_| bad("labels"))?,
            None => Vec::new(),
        };
        let mut rep = Self::new(k, matrices, initial, output_coord, labels)?;
        rep.verified_to = v["verified_to"].as_u64().unwrap_or(0);
        Ok(rep)
    }
}

/// Builds a representation whose coordinates are the distinct kernel
/// elements of a saturated profile.
pub fn build_representation(t: &ValueTable, k: u64, max_depth: u32, m: usize) -> Result<LinearRepresentation> {
    let elems = distinct_elements(t, k, max_depth, m)?;
    let counts = &elems.counts;
    let verdict = crate::kernel::kernel_profile(t, k, max_depth, m)?.verdict;
    if !matches!(verdict, Verdict::SaturatedAt { .. }) {
        return Err(Error::Verdict(format!("kernel is {} up to depth {max_depth}; no representation", verdict.label())));
    }
    // children of every coordinate must already be enumerated
    if counts[max_depth as usize] != counts[max_depth as usize - 1] {
        return Err(Error::Verdict("kernel grew again at the last depth".into()));
    }
    let index: HashMap<&[i64], usize> = elems.prefixes.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let dim = elems.prefixes.len();
    let mut matrices = vec![vec![vec![0i64; dim]; dim]; k as usize];
    for (j, &(l, r)) in elems.labels.iter().enumerate() {
        let kl = k.pow(l);
        for (digit, mat) in matrices.iter_mut().enumerate() {
            let child = crate::kernel::kernel_element(t, k, l + 1, r + digit as u64 * kl, m)?;
            let target = index.get(child.prefix.as_slice()).ok_or_else(|| {
                Error::Construction(format!("child ({}, {}) of ({l}, {r}) is not a known element", l + 1, r + digit as u64 * kl))
            })?;
            mat[j][*target] = 1;
        }
    }
    let initial: Vec<Vec<i64>> = (1..k)
        .map(|n| elems.labels.iter().map(|&(l, r)| t.at((k.pow(l) * n + r) as usize)).collect())
        .collect();
    let mut rep = LinearRepresentation::new(k, matrices, initial, 0, elems.labels.clone())?;
    rep.verify_against(t, k * m as u64)?;
    Ok(rep)
}

/// One candidate pole `log(alpha)/log k + 1 + 2 pi i m / log k - l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub s: Complex64,
    pub alpha_index: usize,
    pub m: i64,
    pub l: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleLattice {
    pub k: u64,
    pub eigenvalues: Vec<Complex64>,
    /// Indices of eigenvalues equal to zero, which contribute no points.
    pub skipped: Vec<usize>,
    pub m_max: i64,
    pub l_max: u64,
    pub points: Vec<LatticePoint>,
}

impl PoleLattice {
    /// Vertical spacing `2 pi / log k` of every tower.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / (self.k as f64).ln()
    }

    /// True when some lattice point lies within `tol` of `s`.
    pub fn contains(&self, s: Complex64, tol: f64) -> bool {
        self.points.iter().any(|p| (p.s - s).norm() <= tol)
    }

    /// CSV `re,im,alpha_index,m,l`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,alpha_index,m,l\n");
        for p in &self.points {
            out.push_str(&format!("{:.12},{:.12},{},{},{}\n", p.s.re, p.s.im, p.alpha_index, p.m, p.l));
        }
        out
    }
}

/// Residual tolerance for computed eigenvalues.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalues of a real matrix, each checked by the smallest singular value of `A - alpha I`.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let vals: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    let scale = a.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let ac = a.map(|x| Complex64::new(x, 0.0));
    for &alpha in &vals {
        let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * alpha;
        let sv = shifted.singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if smin > EIGEN_RESIDUAL_TOL * scale * n as f64 {
            return Err(Error::Numeric(format!("eigenvalue {alpha} has residual {smin:e}")));
        }
    }
    let mut vals = vals;
    // deterministic order: by modulus descending, then argument
    vals.sort_by(|x, y| y.norm().partial_cmp(&x.norm()).unwrap().then(x.arg().partial_cmp(&y.arg()).unwrap()));
    Ok(vals)
}

/// Threshold below which an eigenvalue counts as zero.
const ZERO_EIGENVALUE: f64 = 1e-12;

/// Candidate poles for `|m| <= m_max`, `0 <= l <= l_max`.
pub fn pole_lattice(rep: &LinearRepresentation, m_max: i64, l_max: u64) -> Result<PoleLattice> {
    let eig = eigenvalues(&rep.average_matrix_f64())?;
    let lk = (rep.k as f64).ln();
    let mut skipped = Vec::new();
    let mut points = Vec::new();
    for (i, &alpha) in eig.iter().enumerate() {
        if alpha.norm() < ZERO_EIGENVALUE {
            skipped.push(i);
            continue;
        }
        let base = alpha.ln() / lk + 1.0;
        for l in 0..=l_max {
            for m in -m_max..=m_max {
                let s = base + Complex64::new(-(l as f64), 2.0 * PI * m as f64 / lk);
                points.push(LatticePoint { s, alpha_index: i, m, l });
            }
        }
    }
    Ok(PoleLattice { k: rep.k, eigenvalues: eig, skipped, m_max, l_max, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::required_len;
    use crate::seqgen::{generate_table, reduce_mod, FunctionId};

    fn rep_for(id: FunctionId, k: u64) -> (LinearRepresentation, ValueTable) {
        let n = required_len(k, 6, 64).unwrap().max(10_000) as usize;
        let t = generate_table(&id, n).unwrap();
        (build_representation(&t, k, 6, 64).unwrap(), t)
    }

    fn digit_sum(mut n: u64) -> u32 {
        let mut s = 0;
        while n > 0 {
            s += (n & 1) as u32;
            n >>= 1;
        }
        s
    }

    #[test]
    fn thue_morse_representation() {
        let (mut rep, t) = rep_for(FunctionId::ThueMorsePm, 2);
        assert_eq!(rep.dim(), 2);
        assert_eq!(rep.matrices()[0], vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(rep.matrices()[1], vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(rep.seed(), &[-1, 1]);
        assert!(rep.is_row_selection());
        rep.verify_against(&t, 10_000).unwrap();
        assert_eq!(rep.verified_to(), 10_000);
        assert_eq!(rep.eval(3).unwrap(), 1);
        let n = (1u64 << 20) + 1;
        let oracle = if digit_sum(n) % 2 == 0 { 1 } else { -1 };
        assert_eq!(rep.eval(n).unwrap(), oracle);
    }

    #[test]
    fn const_one_representation() {
        let (rep, _) = rep_for(FunctionId::ConstOne, 2);
        assert_eq!(rep.dim(), 1);
        assert_eq!(rep.matrices(), &[vec![vec![1]], vec![vec![1]]]);
        assert_eq!(rep.seed(), &[1]);
        assert_eq!(rep.eval(997).unwrap(), 1);
        let avg = rep.average_matrix();
        assert_eq!(avg, vec![vec![BigRational::from_integer(1.into())]]);
    }

    #[test]
    fn zero_one_thue_morse_is_row_selection() {
        let t = generate_table(&FunctionId::SumBinaryDigits, 20_000).unwrap();
        let t = reduce_mod(&t, 2).unwrap();
        let rep = build_representation(&t, 2, 6, 64).unwrap();
        assert_eq!(rep.dim(), 2);
        assert!(rep.is_row_selection());
        for n in 1..=20_000u64 {
            assert_eq!(rep.eval(n).unwrap(), (digit_sum(n) % 2) as i64);
        }
    }

    #[test]
    fn base_three_uses_initial_segment() {
        // (-1)^{number of 2 digits in base 3} is 3-automatic
        let n = 30_000;
        let vals: Vec<i64> = (1..=n as u64)
            .map(|mut x| {
                let mut c = 0;
                while x > 0 {
                    c += (x % 3 == 2) as u32;
                    x /= 3;
                }
                if c % 2 == 0 { 1 } else { -1 }
            })
            .collect();
        let t = ValueTable::from_values(FunctionId::Custom("twos3".into()), vals).unwrap();
        let rep = build_representation(&t, 3, 5, 64).unwrap();
        assert_eq!(rep.initial_segment().len(), 2);
        for i in 1..=n as u64 {
            assert_eq!(rep.eval(i).unwrap(), t.at(i as usize));
        }
    }

    #[test]
    fn growing_kernel_is_rejected() {
        let t = generate_table(&FunctionId::Lambda, 20_000).unwrap();
        assert!(matches!(build_representation(&t, 2, 6, 64), Err(Error::Verdict(_))));
    }

    #[test]
    fn average_matrix_and_certified_eigenvalue_one() {
        let (rep, _) = rep_for(FunctionId::ThueMorsePm, 2);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(rep.average_matrix(), vec![vec![half.clone(), half.clone()], vec![half.clone(), half]]);
        assert!(rep.has_eigenvalue_one());
        // row-stochastic
        for row in rep.average_matrix() {
            let s: BigRational = row.into_iter().sum();
            assert_eq!(s, BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn lattice_for_const_one() {
        let (rep, _) = rep_for(FunctionId::ConstOne, 2);
        let lat = pole_lattice(&rep, 2, 2).unwrap();
        let sp = 2.0 * PI / 2f64.ln();
        assert!(lat.contains(Complex64::new(1.0, 0.0), 1e-12));
        assert!(lat.contains(Complex64::new(1.0, sp), 1e-12));
        assert!(lat.contains(Complex64::new(0.0, 0.0), 1e-12));
        assert!((lat.spacing() - 9.064720283654388).abs() < 1e-12);
        assert_eq!(lat.points.len(), 5 * 3);
    }

    #[test]
    fn lattice_for_thue_morse_skips_zero() {
        let (rep, _) = rep_for(FunctionId::ThueMorsePm, 2);
        let lat = pole_lattice(&rep, 1, 1).unwrap();
        assert_eq!(lat.eigenvalues.len(), 2);
        assert!((lat.eigenvalues[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(lat.eigenvalues[1].norm() < 1e-12);
        assert_eq!(lat.skipped, vec![1]);
        assert!(lat.points.iter().all(|p| p.alpha_index == 0));
        // towers: points sharing (alpha, l) differ by exact multiples of the spacing
        for p in &lat.points {
            for q in &lat.points {
                if p.l == q.l {
                    let d = (p.s.im - q.s.im) / lat.spacing();
                    assert!((d - (p.m - q.m) as f64).abs() < 1e-12);
                    assert_eq!(p.s.re, q.s.re);
                }
            }
        }
    }

    #[test]
    fn regular_representation_of_identity() {
        // V_n = (n, 1): V_{2n+r} = [[2, r], [0, 1]] V_n
        let rep = LinearRepresentation::new(
            2,
            vec![vec![vec![2, 0], vec![0, 1]], vec![vec![2, 1], vec![0, 1]]],
            vec![vec![1, 1]],
            0,
            vec![],
        )
        .unwrap();
        assert_eq!(rep.mode(), RepresentationMode::Regular);
        for n in 1..500 {
            assert_eq!(rep.eval(n).unwrap(), n as i64);
        }
        let (c, d) = rep.growth_bound();
        assert!(c >= 1.0 && d > 1.0);
    }

    #[test]
    fn json_round_trip() {
        let (rep, _) = rep_for(FunctionId::ThueMorsePm, 2);
        let j = rep.to_json();
        assert_eq!(j["matrices"], json!([[1, 0, 0, 1], [0, 1, 1, 0]]));
        assert_eq!(j["seed"], json!([-1, 1]));
        assert_eq!(LinearRepresentation::from_json(&j).unwrap(), rep);
        assert!(LinearRepresentation::from_json(&json!({"k": 2})).is_err());
    }

    #[test]
    fn lattice_csv() {
        let (rep, _) = rep_for(FunctionId::ConstOne, 2);
        let csv = pole_lattice(&rep, 0, 1).unwrap().to_csv();
        assert_eq!(csv, "re,im,alpha_index,m,l\n1.000000000000,0.000000000000,0,0,0\n0.000000000000,0.000000000000,0,0,1\n");
    }
}
