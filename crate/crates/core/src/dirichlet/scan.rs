use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::recursion::{levels_used, system_det};
use super::continue_via_recursion;
use crate::automaton::{pole_lattice, LinearRepresentation};
use crate::error::{Error, Result};

/// `(n, 1/n)` for square-free `n <= n_max`, largest point first. These are the
/// real singularities of `log zeta(ns)` terms in the prime zeta function; they
/// accumulate at 0.
pub fn landau_walfisz_singularities(n_max: u64) -> Result<Vec<(u64, f64)>> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let square_free = |n: u64| (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0);
    Ok((1..=n_max).filter(|&n| square_free(n)).map(|n| (n, 1.0 / n as f64)).collect())
}

/// `a <= Re s <= b`, `0 <= Im s <= t`; `a == b` is a vertical segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRect {
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

impl ScanRect {
    pub fn new(a: f64, b: f64, t: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && t.is_finite()) || a > b || t < 0.0 {
            return Err(Error::Domain(format!("bad rectangle R({a}, {b}; {t})")));
        }
        Ok(Self { a, b, t })
    }

    pub fn contains(&self, s: Complex64, tol: f64) -> bool {
        s.re >= self.a - tol && s.re <= self.b + tol && s.im >= -tol && s.im <= self.t + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub s: (f64, f64),
    /// `|G(s)|`, NaN where the evaluation refused.
    pub abs_value: f64,
    /// `|det(I - k^{1-s} avg)|` of the top-level system.
    pub det_magnitude: f64,
    pub near_singular: bool,
    pub truncated: bool,
}

/// A zero of some level's system determinant inside the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleCluster {
    pub center: (f64, f64),
    /// Recursion level whose system is singular at the center.
    pub level: usize,
    /// `|a_{-1}|` from the test circle; NaN if no circle avoided other singularities.
    pub residue: f64,
    /// True when the principal part is nonzero, i.e. an actual pole.
    pub genuine: bool,
    pub on_lattice: bool,
    /// Grid points within two steps that carried the near-singular flag.
    pub flagged_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleScan {
    pub rect: ScanRect,
    pub step: f64,
    pub levels: u32,
    pub points: Vec<ScanPoint>,
    pub clusters: Vec<PoleCluster>,
    /// Distinct lattice points inside the rectangle.
    pub predicted: usize,
    /// Genuine poles found.
    pub observed: usize,
    pub observed_subset_of_predicted: bool,
}

impl PoleScan {
    /// CSV `re,im,abs_value,det_magnitude,flags`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,abs_value,det_magnitude,flags\n");
        for p in &self.points {
            let mut flags = Vec::new();
            if p.near_singular {
                flags.push("near_singular");
            }
            if p.truncated {
                flags.push("truncated");
            }
            let flags = if flags.is_empty() { "none".to_string() } else { flags.join(";") };
            out.push_str(&format!("{},{},{:e},{:e},{}\n", p.s.0, p.s.1, p.abs_value, p.det_magnitude, flags));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        json!({
            "rect": self.rect,
            "step": self.step,
            "levels": self.levels,
            "predicted": self.predicted,
            "observed": self.observed,
            "observed_subset_of_predicted": self.observed_subset_of_predicted,
            "clusters": self.clusters,
            "points": self.points.iter().map(|p| json!({
                "s": [p.s.0, p.s.1],
                "abs_value": num(p.abs_value),
                "det_magnitude": num(p.det_magnitude),
                "near_singular": p.near_singular,
                "truncated": p.truncated,
            })).collect::<Vec<_>>(),
        })
    }
}

const RESIDUE_RADIUS: f64 = 0.05;
const RESIDUE_POINTS: usize = 32;
const NEWTON_TOL: f64 = 1e-10;
const LATTICE_TOL: f64 = 1e-6;

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).filter(|&x| x <= hi + 1e-12).collect();
    if v.last().is_none_or(|&x| x < hi - 1e-12) {
        v.push(hi);
    }
    v
}

/// Newton iteration on `det` from `z`, with a central-difference derivative.
fn newton(det: impl Fn(Complex64) -> Complex64, mut z: Complex64) -> Option<Complex64> {
    let h = 1e-6;
    for _ in 0..100 {
        let f = det(z);
        let df = (det(z + h) - det(z - h)) / (2.0 * h);
        if df.norm() == 0.0 {
            return None;
        }
        let dz = f / df;
        let dz = if dz.norm() > 0.5 { dz / dz.norm() * 0.5 } else { dz };
        z -= dz;
        if dz.norm() < 1e-13 * (1.0 + z.norm()) {
            break;
        }
    }
    (det(z).norm() < NEWTON_TOL).then_some(z)
}

/// Zeros of `det(I - k^{1-(s+j)} avg)` for `s` in the rectangle, seeded from grid minima.
fn det_zeros(rep: &LinearRepresentation, rect: &ScanRect, res: &[f64], ims: &[f64], j: usize) -> Vec<Complex64> {
    let det = |s: Complex64| system_det(rep, s + j as f64);
    let mags: Vec<Vec<f64>> =
        ims.par_iter().map(|&y| res.iter().map(|&x| det(Complex64::new(x, y)).norm()).collect()).collect();
    let (ny, nx) = (ims.len(), res.len());
    let mut seeds = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let v = mags[iy][ix];
            let mut is_min = true;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (y, x) = (iy as i64 + dy, ix as i64 + dx);
                    if (dy, dx) == (0, 0) || y < 0 || x < 0 || y >= ny as i64 || x >= nx as i64 {
                        continue;
                    }
                    if mags[y as usize][x as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(Complex64::new(res[ix], ims[iy]));
            }
        }
    }
    let found: Vec<Complex64> = seeds.par_iter().filter_map(|&z| newton(det, z)).collect();
    let mut out: Vec<Complex64> = Vec::new();
    for z in found {
        if rect.contains(z, 1e-9) && out.iter().all(|w| (w - z).norm() > LATTICE_TOL) {
            out.push(z);
        }
    }
    out
}

/// Largest principal-part term `|a_{-1}| / rho`, `|a_{-2}| / rho^2` on a circle around
/// `c`, the residue `|a_{-1}|`, the peak value and the largest evaluation error there.
fn principal_part(
    rep: &LinearRepresentation,
    c: Complex64,
    rho: f64,
    levels: u32,
    m_max: usize,
) -> Result<Option<(f64, f64, f64, f64)>> {
    let vals: Vec<Result<Option<(Complex64, f64, f64)>>> = (0..RESIDUE_POINTS)
        .into_par_iter()
        .map(|i| {
            let theta = std::f64::consts::TAU * (i as f64 + 0.5) / RESIDUE_POINTS as f64;
            let r = continue_via_recursion(rep, c + Complex64::from_polar(rho, theta), levels, m_max)?;
            Ok(r.value.map(|v| (v, theta, r.error_estimate)))
        })
        .collect();
    let mut a = [Complex64::new(0.0, 0.0); 2];
    let (mut peak, mut err) = (0.0f64, 0.0f64);
    for v in vals {
        let Some((g, theta, e)) = v? else { return Ok(None) };
        a[0] += g * Complex64::from_polar(1.0, theta);
        a[1] += g * Complex64::from_polar(1.0, 2.0 * theta);
        peak = peak.max(g.norm());
        err = err.max(e);
    }
    let n = RESIDUE_POINTS as f64;
    Ok(Some(((a[0].norm() / n).max(a[1].norm() / n), a[0].norm() / n * rho, peak, err)))
}

/// Evaluates `G` on a grid over the rectangle and classifies every zero of a
/// recursion level's determinant there as a genuine or removable singularity.
pub fn pole_scan(rep: &LinearRepresentation, rect: ScanRect, step: f64, levels: u32, m_max: usize) -> Result<PoleScan> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!("grid step must be positive, got {step}")));
    }
    if !(rect.a - RESIDUE_RADIUS > 1.25 - levels as f64) {
        return Err(Error::Domain(format!(
            "rectangle must lie right of Re s = {} with {levels} levels",
            1.25 - levels as f64 + RESIDUE_RADIUS
        )));
    }
    let res = axis(rect.a, rect.b, step);
    let ims = axis(0.0, rect.t, step);
    let grid: Vec<Complex64> = ims.iter().flat_map(|&y| res.iter().map(move |&x| Complex64::new(x, y))).collect();
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&s| {
            let r = continue_via_recursion(rep, s, levels, m_max)?;
            Ok(ScanPoint {
                s: (s.re, s.im),
                abs_value: r.value.map_or(f64::NAN, |v| v.norm()),
                det_magnitude: system_det(rep, s).norm(),
                near_singular: r.flags.near_singular.is_some(),
                truncated: r.flags.truncated.is_some(),
            })
        })
        .collect::<Result<_>>()?;

    let deepest = levels_used(rep, Complex64::new(rect.a, 0.0), levels);
    let mut candidates: Vec<(Complex64, usize)> = Vec::new();
    for j in 0..deepest {
        for z in det_zeros(rep, &rect, &res, &ims, j) {
            if candidates.iter().all(|(w, _)| (w - z).norm() > LATTICE_TOL) {
                candidates.push((z, j));
            }
        }
    }
    candidates.sort_by(|x, y| (x.0.im, x.0.re).partial_cmp(&(y.0.im, y.0.re)).unwrap());

    let spacing = 2.0 * std::f64::consts::PI / (rep.k() as f64).ln();
    let lattice = pole_lattice(rep, (rect.t / spacing).ceil() as i64 + 1, deepest as u64)?;
    let mut predicted: Vec<Complex64> = Vec::new();
    for p in &lattice.points {
        if rect.contains(p.s, 1e-9) && predicted.iter().all(|w| (w - p.s).norm() > LATTICE_TOL) {
            predicted.push(p.s);
        }
    }

    let mut clusters = Vec::new();
    for (z, level) in candidates {
        let mut rho = RESIDUE_RADIUS;
        let mut part = None;
        for _ in 0..4 {
            part = principal_part(rep, z, rho, levels, m_max)?;
            if part.is_some() {
                break;
            }
            rho /= 2.0;
        }
        let (residue, genuine) = match part {
            Some((pp, residue, peak, err)) => (residue, pp > 1e-6 * peak + 10.0 * err),
            None => (f64::NAN, true),
        };
        let flagged_points =
            points.iter().filter(|p| p.near_singular && (Complex64::new(p.s.0, p.s.1) - z).norm() <= 2.0 * step).count();
        clusters.push(PoleCluster {
            center: (z.re, z.im),
            level,
            residue,
            genuine,
            on_lattice: predicted.iter().any(|w| (w - z).norm() <= LATTICE_TOL),
            flagged_points,
        });
    }
    let observed = clusters.iter().filter(|c| c.genuine).count();
    let observed_subset_of_predicted = clusters.iter().filter(|c| c.genuine).all(|c| c.on_lattice);
    Ok(PoleScan {
        rect,
        step,
        levels,
        points,
        clusters,
        predicted: predicted.len(),
        observed,
        observed_subset_of_predicted,
    })
}
