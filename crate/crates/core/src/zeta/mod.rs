//! Riemann zeta evaluation by Euler-Maclaurin summation, plus critical-line
//! zero location and argument-principle zero counting.

pub mod gamma;
mod zeros;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use zeros::{
    critical_line_zeros, critical_line_zeros_with_step, hardy_z, theta, tlogt_ratio_table, zero_count, winding_count,
    TLogTRow, ZeroCount, ZeroRecord,
};

/// A zeta value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaEval {
    pub s: Complex64,
    pub value: Complex64,
    /// Number of terms summed directly.
    pub terms_used: usize,
    /// Highest Bernoulli index `2p` used in the correction.
    pub bernoulli_order: usize,
    pub error_estimate: f64,
}

/// Largest `|Re s|` and `|Im s|` accepted; heights get a unit margin so
/// contours and brackets at height 1000 stay in range.
pub const WORKING_RANGE: f64 = 1000.0;

// B_2, B_4, ..., B_30
const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

const MAX_TERMS: usize = 1 << 20;

/// `zeta(s)` to absolute accuracy `target_tol` for `s != 1` in the working range.
///
/// `Re s >= 0` uses Euler-Maclaurin directly; `Re s < 0` goes through the
/// functional equation so the direct sum never sees growing terms.
pub fn zeta_em(s: Complex64, target_tol: f64) -> Result<ZetaEval> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Domain("zeta has a pole at s = 1".into()));
    }
    if !(s.re.abs() <= WORKING_RANGE && s.im.abs() <= WORKING_RANGE + 1.0) {
        return Err(Error::Domain(format!("s = {s} is outside the working range |Re s|, |Im s| <= {WORKING_RANGE}")));
    }
    if s.re < 0.0 {
        return reflected(s, target_tol);
    }
    euler_maclaurin(s, target_tol)
}

/// Shorthand returning only the value, at tolerance `1e-13` (relaxed with height).
pub fn zeta(s: Complex64) -> Result<Complex64> {
    Ok(zeta_em(s, default_tol(s))?.value)
}

pub(crate) fn default_tol(s: Complex64) -> f64 {
    1e-13 * (1.0 + s.im.abs() / 10.0)
}

fn euler_maclaurin(s: Complex64, tol: f64) -> Result<ZetaEval> {
    let eps = f64::EPSILON;
    let mut n_terms = ((s.norm() / PI).ceil() as usize).max(8);
    loop {
        if n_terms > MAX_TERMS {
            return Err(Error::Precision(format!("cannot reach tolerance {tol:e} at s = {s}")));
        }
        let nf = n_terms as f64;
        let ln_n = nf.ln();
        // sum_{n < N} n^-s with magnitude tracking for the rounding estimate
        let mut head = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut phase_sq = 0.0;
        for n in 1..n_terms {
            let ln = (n as f64).ln();
            let term = (-s * ln).exp();
            let a = term.norm();
            head += term;
            abs_sum += a;
            phase_sq += (a * s.norm() * ln).powi(2);
        }
        let n_pow = (-s * ln_n).exp();
        let mut value = head + n_pow * nf / (s - 1.0) + n_pow * 0.5;
        // T_j = B_2j / (2j)! * s (s+1) ... (s+2j-2) * N^{-s-2j+1}
        let mut poch = s;
        let mut fact = 2.0;
        let mut npow = n_pow / nf;
        let mut converged = None;
        for (j, b) in BERNOULLI.iter().enumerate() {
            let term = poch * npow * (b / fact);
            // remainder after j terms is bounded by the next term times |s+2j+1|/(Re s+2j+1)
            if j > 0 {
                let jj = j as f64;
                let bound = term.norm() * (s + 2.0 * jj + 1.0).norm() / (s.re + 2.0 * jj + 1.0);
                if bound <= 0.5 * tol {
                    converged = Some((j, bound));
                    break;
                }
            }
            value += term;
            abs_sum += term.norm();
            let jj = (j + 1) as f64;
            poch *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
            fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
            npow /= nf * nf;
        }
        if let Some((p, bound)) = converged {
            let rounding = eps * (4.0 * abs_sum + phase_sq.sqrt());
            let err = bound + rounding;
            if rounding > tol {
                return Err(Error::Precision(format!(
                    "rounding error {rounding:e} exceeds tolerance {tol:e} at s = {s}"
                )));
            }
            return Ok(ZetaEval { s, value, terms_used: n_terms - 1, bernoulli_order: 2 * p, error_estimate: err });
        }
        n_terms = n_terms * 3 / 2;
    }
}

/// `log sin(z)`, finite for large `|Im z|`; the branch is irrelevant because callers exponentiate.
fn ln_sin(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im > 1.0 {
        (i * 0.5).ln() - i * z + (1.0 - (2.0 * i * z).exp()).ln()
    } else if z.im < -1.0 {
        (-i * 0.5).ln() + i * z + (1.0 - (-2.0 * i * z).exp()).ln()
    } else {
        z.sin().ln()
    }
}

/// `log chi(s)` where `zeta(s) = chi(s) zeta(1-s)`, for `Re(1 - s) > 0`.
pub(crate) fn ln_chi(s: Complex64) -> Result<Complex64> {
    Ok(s * 2f64.ln() + (s - 1.0) * PI.ln() + ln_sin(s * (PI / 2.0)) + gamma::ln_gamma(1.0 - s)?)
}

fn reflected(s: Complex64, tol: f64) -> Result<ZetaEval> {
    // trivial zeros
    if s.im == 0.0 && s.re.fract() == 0.0 && (s.re as i64) % 2 == 0 {
        return Ok(ZetaEval { s, value: Complex64::new(0.0, 0.0), terms_used: 0, bernoulli_order: 0, error_estimate: 0.0 });
    }
    let ln_chi = ln_chi(s)?;
    let chi_mag = ln_chi.re.exp();
    if !chi_mag.is_finite() {
        return Err(Error::Precision(format!("|chi(s)| overflows at s = {s}")));
    }
    let inner_tol = (tol / chi_mag.max(1e-300)).min(1e-2);
    let inner = euler_maclaurin(1.0 - s, inner_tol.max(1e-16))?;
    let value = ln_chi.exp() * inner.value;
    // relative error of exp(ln chi) grows with the size of its argument
    let chi_rel = f64::EPSILON * 8.0 * (1.0 + ln_chi.norm());
    let err = chi_mag * inner.error_estimate + value.norm() * chi_rel;
    if err > tol {
        return Err(Error::Precision(format!("reflected evaluation error {err:e} exceeds {tol:e} at s = {s}")));
    }
    Ok(ZetaEval { s, value, terms_used: inner.terms_used, bernoulli_order: inner.bernoulli_order, error_estimate: err })
}
