use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gamma::ln_gamma, zeta_em};
use crate::error::{Error, Result};

/// A critical-line zero located by a sign change of Hardy's Z-function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub ordinate: f64,
    /// Final bracket; `Z` has opposite signs at its ends.
    pub bracket: (f64, f64),
    pub refined_to: f64,
}

/// Bisection width for located zeros.
pub const ZERO_REFINEMENT: f64 = 1e-6;
/// Largest height accepted by the zero routines.
pub const MAX_HEIGHT: f64 = 1000.0;

/// Riemann-Siegel theta, `arg Gamma(1/4 + it/2) - (t/2) log pi`, continuous in `t`.
pub fn theta(t: f64) -> Result<f64> {
    Ok(ln_gamma(Complex64::new(0.25, t / 2.0))?.im - t / 2.0 * PI.ln())
}

/// Hardy's Z-function `exp(i theta(t)) zeta(1/2 + it)`, real for real `t`.
pub fn hardy_z(t: f64) -> Result<f64> {
    let z = zeta_em(Complex64::new(0.5, t), 1e-10 * (1.0 + t.abs()))?.value;
    let rotated = Complex64::from_polar(1.0, theta(t)?) * z;
    Ok(rotated.re)
}

fn sample_step(t: f64, subdivisions: f64) -> f64 {
    let gap = 2.0 * PI / (t.max(2.0 * PI * std::f64::consts::E) / (2.0 * PI)).ln();
    (gap / subdivisions).min(0.25)
}

fn check_height(t_max: f64) -> Result<()> {
    if !(t_max > 0.0 && t_max <= MAX_HEIGHT) {
        return Err(Error::Domain(format!("height T must lie in (0, {MAX_HEIGHT}], got {t_max}")));
    }
    Ok(())
}

fn bisect(mut a: f64, mut b: f64, mut fa: f64) -> Result<ZeroRecord> {
    while b - a > ZERO_REFINEMENT {
        let mid = 0.5 * (a + b);
        let fm = hardy_z(mid)?;
        if fm == 0.0 {
            return Ok(ZeroRecord { ordinate: mid, bracket: (mid, mid), refined_to: ZERO_REFINEMENT });
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(ZeroRecord { ordinate: 0.5 * (a + b), bracket: (a, b), refined_to: ZERO_REFINEMENT })
}

/// Sign-change zeros of `Z` on `(0, T]`, sampling about `subdivisions` points per mean zero gap.
pub fn critical_line_zeros_with_step(t_max: f64, subdivisions: f64) -> Result<Vec<ZeroRecord>> {
    check_height(t_max)?;
    const CHUNK: f64 = 10.0;
    let chunks = (t_max / CHUNK).ceil() as usize;
    let per_chunk: Vec<Result<Vec<ZeroRecord>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c as f64 * CHUNK;
            let hi = ((c + 1) as f64 * CHUNK).min(t_max);
            let mut out = Vec::new();
            let mut a = lo;
            let mut fa = hardy_z(a)?;
            while a < hi {
                let b = (a + sample_step(a, subdivisions)).min(hi);
                let fb = hardy_z(b)?;
                if fa != 0.0 && fb != 0.0 && (fa > 0.0) != (fb > 0.0) {
                    out.push(bisect(a, b, fa)?);
                }
                a = b;
                fa = fb;
            }
            Ok(out)
        })
        .collect();
    let mut zeros = Vec::new();
    for r in per_chunk {
        zeros.extend(r?);
    }
    Ok(zeros)
}

/// Sign-change zeros of `Z` on `(0, T]` at the default sampling density.
pub fn critical_line_zeros(t_max: f64) -> Result<Vec<ZeroRecord>> {
    critical_line_zeros_with_step(t_max, 12.0)
}

const CONTOUR_LEFT: f64 = -0.5;
const CONTOUR_RIGHT: f64 = 1.5;
const CONTOUR_BOTTOM: f64 = 0.1;
const MAX_SEGMENT: f64 = 0.1;
const MAX_ARG_STEP: f64 = PI / 4.0;

fn zeta_on_contour(s: Complex64) -> Result<Complex64> {
    let v = zeta_em(s, 1e-9 * (1.0 + s.im.abs()))?;
    if v.value.norm() < 1e2 * v.error_estimate.max(1e-12) {
        return Err(Error::Contour(format!("contour passes too close to a zero near {s}")));
    }
    Ok(v.value)
}

/// Total change of `arg zeta` along the segment `z0 -> z1`, with adaptive subdivision
/// so that no piece changes the argument by more than `pi/4`.
fn arg_change(z0: Complex64, z1: Complex64) -> Result<f64> {
    let pieces = ((z1 - z0).norm() / MAX_SEGMENT).ceil().max(1.0) as usize;
    let pts: Vec<Complex64> = (0..=pieces).map(|i| z0 + (z1 - z0) * (i as f64 / pieces as f64)).collect();
    let vals: Vec<Complex64> = pts.par_iter().map(|&p| zeta_on_contour(p)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..pieces {
        total += refine(pts[i], pts[i + 1], vals[i], vals[i + 1], 0)?;
    }
    Ok(total)
}

fn refine(a: Complex64, b: Complex64, fa: Complex64, fb: Complex64, depth: u32) -> Result<f64> {
    let d = (fb / fa).arg();
    if d.abs() <= MAX_ARG_STEP {
        return Ok(d);
    }
    if depth > 40 {
        return Err(Error::Contour(format!("argument jumps too fast between {a} and {b}")));
    }
    let m = 0.5 * (a + b);
    let fm = zeta_on_contour(m)?;
    Ok(refine(a, m, fa, fm, depth + 1)? + refine(m, b, fm, fb, depth + 1)?)
}

/// Zeros of zeta with `0.1 < Im s <= T` by the argument principle on the
/// rectangle `[-0.5, 1.5] x [0.1, T]`.
pub fn winding_count(t_max: f64) -> Result<i64> {
    check_height(t_max)?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let corners = [
        c(CONTOUR_LEFT, CONTOUR_BOTTOM),
        c(CONTOUR_RIGHT, CONTOUR_BOTTOM),
        c(CONTOUR_RIGHT, t_max),
        c(CONTOUR_LEFT, t_max),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        total += arg_change(corners[i], corners[(i + 1) % 4])?;
    }
    let winding = total / (2.0 * PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.1 {
        return Err(Error::Contour(format!("winding {winding} is not close to an integer")));
    }
    Ok(rounded as i64)
}

/// Result of counting zeros up to height `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub t: f64,
    /// Argument-principle count.
    pub count: i64,
    /// Number of sign changes of `Z` on the critical line.
    pub critical_line_count: i64,
    /// `count - critical_line_count`; nonzero means a missed or off-line zero.
    pub discrepancy: i64,
}

/// `N(T)` by the argument principle, cross-checked against critical-line sign changes.
pub fn zero_count(t_max: f64) -> Result<ZeroCount> {
    check_height(t_max)?;
    let mut subdivisions = 12.0;
    let mut zeros = critical_line_zeros_with_step(t_max, subdivisions)?;
    let (lo, hi) = (hardy_z(t_max - 1e-3)?, hardy_z(t_max + 1e-3)?);
    let near = zeros.iter().any(|z| (z.ordinate - t_max).abs() < 1e-3);
    if near || lo == 0.0 || hi == 0.0 || (lo > 0.0) != (hi > 0.0) {
        return Err(Error::Contour(format!("T = {t_max} is within 1e-3 of a zero ordinate; shift T")));
    }
    let count = winding_count(t_max)?;
    // denser sampling recovers close pairs that a coarse grid steps over
    for _ in 0..3 {
        if zeros.len() as i64 == count {
            break;
        }
        subdivisions *= 2.0;
        zeros = critical_line_zeros_with_step(t_max, subdivisions)?;
    }
    let critical_line_count = zeros.len() as i64;
    Ok(ZeroCount { t: t_max, count, critical_line_count, discrepancy: count - critical_line_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TLogTRow {
    pub t: f64,
    pub n: i64,
    /// `N(T) / (T log T)`.
    pub ratio_tlogt: f64,
    /// `N(T) / T`.
    pub ratio_t: f64,
}

/// `(T, N(T), N(T)/(T log T))` for each height.
pub fn tlogt_ratio_table(heights: &[f64]) -> Result<Vec<TLogTRow>> {
    heights
        .iter()
        .map(|&t| {
            let n = zero_count(t)?.count;
            Ok(TLogTRow { t, n, ratio_tlogt: n as f64 / (t * t.ln()), ratio_t: n as f64 / t })
        })
        .collect()
}
