//! Continuation of `G(s) = sum_n U_n n^-s` for a linear representation.
//!
//! Splitting `n >= Q` by its last base-k digit, `n = kq + r` with `q >= Q`,
//! and expanding `(kq + r)^-s` binomially gives, for the tail
//! `T_Q(s) = sum_{n >= Q} U_n n^-s`,
//!
//! ```text
//! (I - k^{1-s} avg) T_Q(s) = sum_{Q <= n < kQ} U_n n^-s
//!     + k^-s sum_{r >= 1} A_r sum_{m >= 1} C(s+m-1, m) (-r/k)^m T_Q(s+m)
//! ```
//!
//! and `G(s) = sum_{n < Q} U_n n^-s + T_Q(s)`. With `Q = 1` this is the plain
//! digit recursion with the initial segment `U_1..U_{k-1}` on the right; a
//! larger `Q` shrinks the binomial ratio to `r/(kQ)`, which keeps the
//! alternating binomial sums from cancelling catastrophically at large `|s|`.
//! Each `T_Q(s+m)` comes from the same identity one step to the right, down
//! to a strip where the direct sum converges to machine precision.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{EvalFlags, EvalResult, Method};
use crate::automaton::LinearRepresentation;
use crate::error::{Error, Result};

/// Top-level systems with `|det| ` below this are refused as candidate poles.
pub const NEAR_SINGULAR_DET: f64 = 1e-8;
/// Upper limit on binomial terms per level.
pub const MAX_M: usize = 200;
/// Deeper levels this close to singular trigger evaluation by circle averaging.
const DEEP_SINGULAR_DET: f64 = 1e-4;
/// Direct sums are used once `Re s >= d + 1 + BASE_MARGIN`.
const BASE_MARGIN: f64 = 7.0;
const DIRECT_TOL: f64 = 1e-17;
const MAX_DIRECT_TERMS: usize = 2_000_000;
const CIRCLE_POINTS: usize = 32;
const CIRCLE_RADIUS: f64 = 0.1;

type CVec = DVector<Complex64>;

struct Engine {
    k: usize,
    dim: usize,
    mats: Vec<DMatrix<Complex64>>,
    mat_norms: Vec<f64>,
    avg: DMatrix<Complex64>,
    c: f64,
    d: f64,
    q: usize,
    u: Vec<CVec>,
    ln_n: Vec<f64>,
    out: usize,
}

struct Plain {
    g: CVec,
    err: f64,
    det_top: f64,
    min_deep: f64,
    truncated: Option<usize>,
}

fn inf_norm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn mat_inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl Engine {
    fn new(rep: &LinearRepresentation, q: usize, min_direct_re: f64) -> Result<Self> {
        let k = rep.k() as usize;
        let dim = rep.dim();
        let (c, d) = rep.growth_bound();
        let n_direct = Self::direct_terms(c, d, min_direct_re).max(k * q);
        if n_direct > MAX_DIRECT_TERMS {
            return Err(Error::Capacity(format!("base strip needs {n_direct} direct terms")));
        }
        let mats: Vec<DMatrix<Complex64>> = rep
            .matrices()
            .iter()
            .map(|m| DMatrix::from_fn(dim, dim, |i, j| Complex64::new(m[i][j] as f64, 0.0)))
            .collect();
        let mat_norms = mats.iter().map(mat_inf_norm).collect();
        let avg = rep.average_matrix_f64().map(|x| Complex64::new(x, 0.0));
        let u = rep
            .vectors_f64(n_direct)
            .into_iter()
            .map(|v| CVec::from_iterator(dim, v.into_iter().map(|x| Complex64::new(x, 0.0))))
            .collect();
        let ln_n = (1..=n_direct).map(|n| (n as f64).ln()).collect();
        Ok(Self { k, dim, mats, mat_norms, avg, c, d, q, u, ln_n, out: rep.output_coord() })
    }

    /// Terms needed for the direct tail bound to reach `DIRECT_TOL` at `Re s = sigma`.
    fn direct_terms(c: f64, d: f64, sigma: f64) -> usize {
        let m = sigma - 1.0 - d;
        ((c / (DIRECT_TOL * m)).powf(1.0 / m)).ceil().max(1.0) as usize
    }

    /// `sum_{lo <= n < hi} U_n n^-z` and the sum of term magnitudes.
    fn partial(&self, z: Complex64, lo: usize, hi: usize) -> (CVec, f64) {
        let mut acc = CVec::zeros(self.dim);
        let mut mag = 0.0;
        for n in lo..hi {
            let w = (-z * self.ln_n[n - 1]).exp();
            let un = &self.u[n - 1];
            acc += un * w;
            mag += w.norm() * inf_norm(un);
        }
        (acc, mag)
    }

    /// `T_Q(z)` by direct summation, with its error bound.
    fn direct(&self, z: Complex64) -> (CVec, f64) {
        let n = Self::direct_terms(self.c, self.d, z.re).clamp(self.q, self.u.len());
        let (v, mag) = self.partial(z, self.q, n + 1);
        let m = z.re - 1.0 - self.d;
        let tail = self.c * (n as f64).powf(-m) / m;
        (v, tail + f64::EPSILON * mag * (4.0 + z.norm() * (n as f64).ln()))
    }

    /// Bound on `||T_Q(sigma)||` used to decide when the binomial sum may stop.
    fn tail_bound(&self, sigma: f64) -> f64 {
        let m = sigma - 1.0 - self.d;
        if m <= 0.0 {
            return f64::INFINITY;
        }
        let q = self.q as f64;
        self.c * q.powf(self.d - sigma) * (1.0 + q / m)
    }

    fn system(&self, z: Complex64) -> DMatrix<Complex64> {
        let f = (Complex64::new(1.0, 0.0) - z) * (self.k as f64).ln();
        DMatrix::identity(self.dim, self.dim) - &self.avg * f.exp()
    }

    /// One recursion pass at `z` with `levels` recursive levels above the direct strip.
    fn eval_plain(&self, z: Complex64, levels: usize, m_max: usize) -> Plain {
        let lnk = (self.k as f64).ln();
        let mut memo: Vec<Option<(CVec, f64)>> = vec![None; levels + m_max + 1];
        let mut det_top = f64::INFINITY;
        let mut min_deep = f64::INFINITY;
        let mut truncated = None;
        for j in (0..levels).rev() {
            let zj = z + j as f64;
            let (mut rhs, mut mag) = self.partial(zj, self.q, self.k * self.q);
            let mut err_in = 0.0;
            let kz = (-zj * lnk).exp();
            for r in 1..self.k {
                let x = r as f64 / self.k as f64;
                let mut acc = CVec::zeros(self.dim);
                let mut acc_err = 0.0;
                let mut coef = Complex64::new(1.0, 0.0);
                let mut done = false;
                for m in 1..=m_max {
                    coef = coef * (zj + (m - 1) as f64) / m as f64 * (-x);
                    let idx = j + m;
                    if memo[idx].is_none() {
                        memo[idx] = Some(self.direct(z + idx as f64));
                    }
                    let (tv, te) = memo[idx].as_ref().unwrap();
                    acc += tv * coef;
                    mag += coef.norm() * inf_norm(tv);
                    acc_err += coef.norm() * te;
                    // next term and its decay ratio, from the a-priori tail bound
                    let next = coef.norm() * (zj + m as f64).norm() / (m + 1) as f64 * x;
                    let ratio = (zj + (m + 1) as f64).norm() / (m + 2) as f64 * x / self.q as f64;
                    let bound = next * self.tail_bound(zj.re + (m + 1) as f64);
                    if ratio < 0.5 && bound <= 1e-17 * (inf_norm(&acc) + inf_norm(&rhs)) + 1e-300 {
                        acc_err += 2.0 * bound;
                        done = true;
                        break;
                    }
                    if m == m_max {
                        acc_err += if ratio < 0.5 { 2.0 * bound } else { f64::INFINITY };
                    }
                }
                if !done {
                    truncated = Some(m_max);
                }
                rhs += &self.mats[r] * acc * kz;
                err_in += kz.norm() * self.mat_norms[r] * acc_err;
            }
            let sys = self.system(zj);
            let lu = sys.lu();
            let det = lu.determinant().norm();
            if j == 0 {
                det_top = det;
            } else {
                min_deep = min_deep.min(det);
            }
            let (tj, ej) = match lu.try_inverse() {
                Some(inv) => {
                    let n_inv = mat_inf_norm(&inv);
                    let tj = &inv * &rhs;
                    let rounding = f64::EPSILON * 8.0 * (self.dim as f64 + 1.0) * (mag + inf_norm(&tj));
                    (tj, n_inv * (err_in + rounding))
                }
                None => (CVec::from_element(self.dim, Complex64::new(f64::NAN, f64::NAN)), f64::INFINITY),
            };
            memo[j] = Some((tj, ej));
        }
        if memo[0].is_none() {
            memo[0] = Some(self.direct(z));
        }
        let (t0, e0) = memo[0].take().unwrap();
        let (head, head_mag) = self.partial(z, 1, self.q);
        let g = head + t0;
        let err = e0 + f64::EPSILON * 4.0 * head_mag;
        Plain { g, err, det_top, min_deep, truncated }
    }
}

/// Number of recursive levels so the deepest one lands in the direct strip.
fn effective_levels(levels: u32, re: f64, d: f64) -> usize {
    let need = (1.0 + d + BASE_MARGIN - re).ceil().max(0.0) as usize;
    need.max(levels as usize)
}

fn choose_q(s: Complex64, levels: usize) -> usize {
    ((4.0 * (s.norm() + levels as f64)).ceil() as usize).max(2)
}

/// `det(I - k^{1-s} avg)`, whose zeros are the candidate poles of the top level.
pub(crate) fn system_det(rep: &LinearRepresentation, s: Complex64) -> Complex64 {
    let lnk = (rep.k() as f64).ln();
    let avg = rep.average_matrix_f64().map(|x| Complex64::new(x, 0.0));
    let sys = DMatrix::identity(rep.dim(), rep.dim()) - avg * ((Complex64::new(1.0, 0.0) - s) * lnk).exp();
    sys.determinant()
}

/// Levels the recursion uses at `s` for a requested `levels`.
pub(crate) fn levels_used(rep: &LinearRepresentation, s: Complex64, levels: u32) -> usize {
    effective_levels(levels, s.re - CIRCLE_RADIUS, rep.growth_bound().1)
}

/// Value of `G(s)` at the output coordinate, continued `levels` unit steps
/// left of the direct-sum region.
///
/// Points where a deeper level's system is singular (the binomial factor then
/// vanishes against a pole of `T_Q(s+m)`) are evaluated as the mean over a
/// small circle around `s`, which is exact for the analytic `G`.
pub fn continue_via_recursion(rep: &LinearRepresentation, s: Complex64, levels: u32, m_max: usize) -> Result<EvalResult> {
    if m_max == 0 || m_max > MAX_M {
        return Err(Error::Domain(format!("m_max must be in 1..={MAX_M}, got {m_max}")));
    }
    if !(s.re > 1.0 - levels as f64 + 0.25) || !s.im.is_finite() {
        return Err(Error::Domain(format!("Re s must exceed {} with {levels} levels, got {s}", 1.25 - levels as f64)));
    }
    let (_, d) = rep.growth_bound();
    let j = effective_levels(levels, s.re - CIRCLE_RADIUS, d);
    let q = choose_q(s, j);
    let engine = Engine::new(rep, q, s.re - CIRCLE_RADIUS + j as f64)?;
    let plain = engine.eval_plain(s, j, m_max);
    let mut flags = EvalFlags { near_singular: None, truncated: plain.truncated };
    if plain.det_top < NEAR_SINGULAR_DET {
        flags.near_singular = Some(plain.det_top);
        return Ok(EvalResult { s, value: None, method: Method::Recursion, error_estimate: f64::INFINITY, flags });
    }
    let out = engine.out;
    if plain.min_deep >= DEEP_SINGULAR_DET && plain.g[out].is_finite() {
        return Ok(EvalResult {
            s,
            value: Some(plain.g[out]),
            method: Method::Recursion,
            error_estimate: plain.err,
            flags,
        });
    }
    let rho = CIRCLE_RADIUS.min(0.25 * plain.det_top);
    let mut sum_all = Complex64::new(0.0, 0.0);
    let mut sum_even = Complex64::new(0.0, 0.0);
    // Laurent coefficients a_{-1} rho^{-1} and a_{-2} rho^{-2}; zero unless s is a pole
    let mut principal = [Complex64::new(0.0, 0.0); 2];
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    for i in 0..CIRCLE_POINTS {
        let theta = std::f64::consts::TAU * (i as f64 + 0.5) / CIRCLE_POINTS as f64;
        let z = s + Complex64::from_polar(rho, theta);
        let p = engine.eval_plain(z, j, m_max);
        if p.truncated.is_some() {
            flags.truncated = p.truncated;
        }
        let g = p.g[out];
        sum_all += g;
        if i % 2 == 0 {
            sum_even += g;
        }
        principal[0] += g * Complex64::from_polar(1.0, theta);
        principal[1] += g * Complex64::from_polar(1.0, 2.0 * theta);
        err = err.max(p.err);
        peak = peak.max(g.norm());
    }
    let n = CIRCLE_POINTS as f64;
    let value = sum_all / n;
    if !value.is_finite() {
        return Err(Error::Numeric(format!("circle average at s = {s} is not finite")));
    }
    let pole_part = principal.iter().map(|c| c.norm() / n).fold(0.0, f64::max);
    if pole_part > 1e-8 * peak + 10.0 * err {
        flags.near_singular = Some(plain.min_deep);
        return Ok(EvalResult { s, value: None, method: Method::Recursion, error_estimate: f64::INFINITY, flags });
    }
    let coarse = sum_even / (n / 2.0);
    let error_estimate = err + (value - coarse).norm();
    Ok(EvalResult { s, value: Some(value), method: Method::Recursion, error_estimate, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::build_representation;
    use crate::dirichlet::direct_sum;
    use crate::kernel::required_len;
    use crate::seqgen::{generate_table, FunctionId, ValueTable};
    use crate::zeta::zeta;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixture(id: FunctionId, k: u64) -> (LinearRepresentation, ValueTable) {
        let n = required_len(k, 6, 64).unwrap().max(1 << 16) as usize;
        let t = generate_table(&id, n).unwrap();
        (build_representation(&t, k, 6, 64).unwrap(), t)
    }

    #[test]
    fn const_one_gives_zeta() {
        let (rep, _) = fixture(FunctionId::ConstOne, 2);
        let r = continue_via_recursion(&rep, c(2.0, 0.0), 8, 200).unwrap();
        assert!((r.value.unwrap() - std::f64::consts::PI.powi(2) / 6.0).norm() < 1e-12, "{r:?}");
        let r = continue_via_recursion(&rep, c(0.0, 0.0), 8, 200).unwrap();
        assert!((r.value.unwrap() - c(-0.5, 0.0)).norm() < 1e-10, "{r:?}");
        assert!(r.error_estimate < 1e-8);
        let r = continue_via_recursion(&rep, c(-1.0, 0.0), 8, 200).unwrap();
        assert!((r.value.unwrap() - c(-1.0 / 12.0, 0.0)).norm() < 1e-10, "{r:?}");
        for s in [c(1.5, 0.0), c(0.5, 14.134725141734693), c(0.3, 7.0), c(-0.5, 30.0), c(0.9, 60.0)] {
            let r = continue_via_recursion(&rep, s, 8, 200).unwrap();
            let z = zeta(s).unwrap();
            let v = r.value.unwrap();
            assert!((v - z).norm() <= 1e-9 * (1.0 + z.norm()), "{s}: {v} vs {z}");
            assert!((v - z).norm() <= r.error_estimate + 1e-12, "{s}: estimate {} too small", r.error_estimate);
        }
    }

    #[test]
    fn base_three_agrees() {
        let (rep, _) = fixture(FunctionId::ConstOne, 3);
        for s in [c(0.0, 0.0), c(0.5, 3.0), c(2.0, 0.0)] {
            let v = continue_via_recursion(&rep, s, 8, 200).unwrap().value.unwrap();
            assert!((v - zeta(s).unwrap()).norm() < 1e-9, "{s}: {v}");
        }
    }

    #[test]
    fn pole_is_refused() {
        let (rep, _) = fixture(FunctionId::ConstOne, 2);
        let r = continue_via_recursion(&rep, c(1.0, 0.0), 8, 200).unwrap();
        assert!(r.value.is_none());
        assert!(r.flags.near_singular.unwrap() < NEAR_SINGULAR_DET);
        assert!(r.expect_value().is_err());
    }

    #[test]
    fn overlap_with_direct_sums() {
        for (id, k) in [(FunctionId::ConstOne, 2), (FunctionId::ThueMorsePm, 2), (FunctionId::ConstOne, 3)] {
            let (rep, t) = fixture(id.clone(), k);
            for s in [c(1.5, 0.0), c(2.0, 1.0), c(3.0, -4.0), c(2.5, 0.0)] {
                let rec = continue_via_recursion(&rep, s, 8, 200).unwrap();
                let dir = direct_sum(&t, s, t.len()).unwrap();
                let diff = (rec.value.unwrap() - dir.value.unwrap()).norm();
                assert!(diff <= rec.error_estimate + dir.error_estimate, "{id} {s}: {diff}");
            }
        }
    }

    #[test]
    fn depth_independence() {
        let (rep, _) = fixture(FunctionId::ThueMorsePm, 2);
        for s in [c(0.3, 2.0), c(-1.5, 0.5), c(2.0, 0.0), c(0.5, 20.0)] {
            let a = continue_via_recursion(&rep, s, 10, 200).unwrap().value.unwrap();
            let b = continue_via_recursion(&rep, s, 11, 200).unwrap().value.unwrap();
            assert!((a - b).norm() < 1e-8, "{s}: {a} vs {b}");
        }
    }

    #[test]
    fn thue_morse_series_is_entire_like() {
        // the Dirichlet series of (-1)^{s_2(n)} has no pole at 1: its average matrix
        // has eigenvalues 1 and 0 but the pole from 1 cancels
        let (rep, _) = fixture(FunctionId::ThueMorsePm, 2);
        let near = continue_via_recursion(&rep, c(1.0, 0.001), 8, 200).unwrap();
        let far = continue_via_recursion(&rep, c(1.0, 0.01), 8, 200).unwrap();
        assert!((near.value.unwrap() - far.value.unwrap()).norm() < 1e-2);
    }

    #[test]
    fn circle_average_matches_closed_form() {
        // indicator of odd n: G(s) = (1 - 2^-s) zeta(s); level 1 is singular at s = 0
        let rep = LinearRepresentation::new(2, vec![vec![vec![0, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]], vec![vec![1, 1]], 0, vec![])
            .unwrap();
        for s in [c(0.0, 0.0), c(-1.0, 2.0 * std::f64::consts::PI / 2f64.ln())] {
            let v = continue_via_recursion(&rep, s, 8, 200).unwrap().value.unwrap();
            let want = (1.0 - (-s * 2f64.ln()).exp()) * zeta(s).unwrap();
            assert!((v - want).norm() < 1e-9, "{s}: {v} vs {want}");
        }
    }

    fn digit_sum_rep() -> LinearRepresentation {
        // U_n = (s_2(n), 1)
        LinearRepresentation::new(2, vec![vec![vec![1, 0], vec![0, 1]], vec![vec![1, 1], vec![0, 1]]], vec![vec![1, 1]], 0, vec![]).unwrap()
    }

    #[test]
    fn deep_pole_is_refused() {
        // the digit-sum series has poles at 2 pi i m / log 2, one level left of the top lattice
        let rep = digit_sum_rep();
        for s in [c(0.0, 0.0), c(0.0, 2.0 * std::f64::consts::PI / 2f64.ln())] {
            let r = continue_via_recursion(&rep, s, 8, 200).unwrap();
            assert!(r.value.is_none(), "{s}: {r:?}");
            assert!(r.flags.near_singular.is_some());
        }
        let r = continue_via_recursion(&rep, c(0.3, 1.0), 8, 200).unwrap();
        assert!(r.value.is_some());
    }

    #[test]
    fn regular_representation_overlap() {
        let rep = digit_sum_rep();
        let t = generate_table(&FunctionId::SumBinaryDigits, 1 << 20).unwrap();
        for s in [c(2.0, 0.0), c(2.5, 3.0)] {
            let rec = continue_via_recursion(&rep, s, 8, 200).unwrap();
            let dir = direct_sum(&t, s, t.len()).unwrap();
            let diff = (rec.value.unwrap() - dir.value.unwrap()).norm();
            assert!(diff <= rec.error_estimate + dir.error_estimate, "{s}: {diff}");
        }
    }

    #[test]
    fn parameter_checks() {
        let (rep, _) = fixture(FunctionId::ConstOne, 2);
        assert!(matches!(continue_via_recursion(&rep, c(0.0, 0.0), 1, 200), Err(Error::Domain(_))));
        assert!(matches!(continue_via_recursion(&rep, c(2.0, 0.0), 8, 201), Err(Error::Domain(_))));
        assert!(matches!(continue_via_recursion(&rep, c(2.0, 0.0), 8, 0), Err(Error::Domain(_))));
    }
}
