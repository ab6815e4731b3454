//! Dirichlet series of tabulated sequences: truncated direct sums, analytic
//! continuation through the base-k matrix recursion, closed-form zeta
//! quotients, and pole scans.

mod growth;
mod identity;
mod recursion;
mod scan;


use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::seqgen::ValueTable;

pub use growth::{growth_bound, tail_bound, GrowthBound};
pub use identity::{verify_identity, zeta_quotient_eval, IdentityId, IdentityReport, IdentitySample};
pub use recursion::{continue_via_recursion, MAX_M, NEAR_SINGULAR_DET};
pub use scan::{landau_walfisz_singularities, pole_scan, PoleCluster, PoleScan, ScanPoint, ScanRect};


#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Recursion,
    ZetaQuotient,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalFlags {
    /// Set with the determinant magnitude when the linear system is near singular.
    pub near_singular: Option<f64>,
    /// Set with the number of terms when a series was cut off before converging.
    pub truncated: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub s: Complex64,
    /// `None` when the evaluation refused to report a value (candidate pole).
    pub value: Option<Complex64>,
    pub method: Method,
    pub error_estimate: f64,
    pub flags: EvalFlags,
}

impl EvalResult {
    /// The value, or a numeric error naming the singularity.
    pub fn expect_value(&self) -> Result<Complex64> {
        self.value.ok_or_else(|| {
            Error::Numeric(format!(
                "no value at s = {}: near-singular system (|det| = {:e})",
                self.s,
                self.flags.near_singular.unwrap_or(0.0)
            ))
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": [self.s.re, self.s.im],
            "value": self.value.map(|v| [v.re, v.im]),
            "method": self.method,
            "error_estimate": self.error_estimate,
            "flags": {
                "near_singular": self.flags.near_singular,
                "truncated": self.flags.truncated,
            },
        })
    }
}

/// `sum_{n <= N} f(n) n^-s` with the tail bound from the sequence's recorded growth.
pub fn direct_sum(t: &ValueTable, s: Complex64, n_terms: usize) -> Result<EvalResult> {
    if n_terms == 0 {
        return Err(Error::Domain("N_terms must be positive".into()));
    }
    let Some((_, tail)) = tail_bound(t, s.re, n_terms) else {
        let d = growth_bound(t).d;
        return Err(Error::Domain(format!(
            "direct sum needs Re s >= {} for {} (growth degree {d}), got Re s = {}",
            1.25 + d,
            t.label(),
            s.re
        )));
    };
    if n_terms > t.len() {
        return Err(Error::Capacity(format!("N_terms = {n_terms} exceeds table length {}", t.len())));
    }
    const CHUNK: usize = 1 << 14;
    let vals = &t.values()[..n_terms];
    // fixed chunking keeps the summation order independent of the thread count
    let parts: Vec<(Complex64, f64)> = vals
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for (i, &f) in chunk.iter().enumerate() {
                if f == 0 {
                    continue;
                }
                let n = (c * CHUNK + i + 1) as f64;
                let term = (-s * n.ln()).exp() * f as f64;
                acc += term;
                mag += term.norm();
            }
            (acc, mag)
        })
        .collect();
    let (value, mag) = parts.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(a, m), (v, x)| (a + v, m + x));
    let rounding = f64::EPSILON * mag * (4.0 + s.norm() * (n_terms as f64).ln());
    Ok(EvalResult {
        s,
        value: Some(value),
        method: Method::Direct,
        error_estimate: tail + rounding,
        flags: EvalFlags { near_singular: None, truncated: Some(n_terms) },
    })
}
