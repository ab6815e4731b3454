use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{direct_sum, EvalFlags, EvalResult, Method};
use crate::error::{Error, Result};
use crate::seqgen::{FunctionId, ValueTable};
use crate::zeta::zeta_em;

/// Closed forms of Dirichlet series in terms of zeta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    /// `1 / zeta(s)`
    Mu,
    /// `zeta(2s) / zeta(s)`
    Lambda,
    /// `zeta(s) / zeta(ms)`
    Qm(u32),
    /// `zeta(s-1) / zeta(s)`
    Phi,
    /// `zeta(s)^2 / zeta(2s)`
    Rho,
    /// `zeta(s)^3 / zeta(2s)`
    TauOfSquare,
    /// `zeta(s)^4 / zeta(2s)`
    TauSquared,
    /// `sum_n mu(n)/n log zeta(ns)`, the prime zeta function
    ChiP,
    /// `sum_j sum_n mu(n)/n log zeta(jns) = sum_N phi(N)/N log zeta(Ns)`
    ChiPP,
    /// `zeta(s) sum_k mu(k)/k log zeta(ks)`
    Omega,
    /// `zeta(s) sum_k phi(k)/k log zeta(ks)`
    BigOmega,
}

impl IdentityId {
    pub fn all() -> Vec<IdentityId> {
        use IdentityId::*;
        vec![Mu, Lambda, Qm(2), Phi, Rho, TauOfSquare, TauSquared, ChiP, ChiPP, Omega, BigOmega]
    }

    pub fn name(&self) -> String {
        use IdentityId::*;
        match self {
            Mu => "mu".into(),
            Lambda => "lambda".into(),
            Qm(m) => format!("q_{m}"),
            Phi => "phi".into(),
            Rho => "rho".into(),
            TauOfSquare => "tau_of_square".into(),
            TauSquared => "tau_squared".into(),
            ChiP => "chi_P".into(),
            ChiPP => "chi_PP".into(),
            Omega => "omega".into(),
            BigOmega => "big_omega".into(),
        }
    }

    pub fn formula(&self) -> String {
        use IdentityId::*;
        match self {
            Mu => "1/zeta(s)".into(),
            Lambda => "zeta(2s)/zeta(s)".into(),
            Qm(m) => format!("zeta(s)/zeta({m}s)"),
            Phi => "zeta(s-1)/zeta(s)".into(),
            Rho => "zeta(s)^2/zeta(2s)".into(),
            TauOfSquare => "zeta(s)^3/zeta(2s)".into(),
            TauSquared => "zeta(s)^4/zeta(2s)".into(),
            ChiP => "sum_n mu(n)/n log zeta(ns)".into(),
            ChiPP => "sum_k sum_n mu(n)/n log zeta(kns)".into(),
            Omega => "zeta(s) sum_k mu(k)/k log zeta(ks)".into(),
            BigOmega => "zeta(s) sum_k phi(k)/k log zeta(ks)".into(),
        }
    }

    /// The identity holds for `Re s` greater than this.
    pub fn validity_re(&self) -> f64 {
        if *self == IdentityId::Phi {
            2.0
        } else {
            1.0
        }
    }

    /// The arithmetic function whose Dirichlet series the identity describes.
    pub fn function(&self) -> FunctionId {
        use IdentityId::*;
        match *self {
            Mu => FunctionId::Mu,
            Lambda => FunctionId::Lambda,
            Qm(m) => FunctionId::Qm(m),
            Phi => FunctionId::Phi,
            Rho => FunctionId::Rho,
            TauOfSquare => FunctionId::TauOfSquare,
            TauSquared => FunctionId::TauSquared,
            ChiP => FunctionId::ChiP,
            ChiPP => FunctionId::ChiPP,
            Omega => FunctionId::Omega,
            BigOmega => FunctionId::BigOmega,
        }
    }

    /// Default sample points.
    pub fn default_samples(&self) -> Vec<Complex64> {
        let c = Complex64::new;
        if *self == IdentityId::Phi {
            vec![c(3.0, 0.0), c(3.5, 0.0), c(3.0, 1.0)]
        } else {
            vec![c(2.0, 0.0), c(2.5, 0.0), c(3.0, 0.0), c(2.0, 1.0)]
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use IdentityId::*;
        Ok(match s {
            "mu" => Mu,
            "lambda" => Lambda,
            "phi" => Phi,
            "rho" => Rho,
            "tau_of_square" => TauOfSquare,
            "tau_squared" => TauSquared,
            "chi_P" | "chi_p" => ChiP,
            "chi_PP" | "chi_pp" => ChiPP,
            "omega" => Omega,
            "big_omega" => BigOmega,
            other => {
                let m = other
                    .strip_prefix("q_")
                    .or_else(|| other.strip_prefix("q"))
                    .and_then(|m| m.parse::<u32>().ok())
                    .ok_or_else(|| Error::Domain(format!("unknown identity '{other}'")))?;
                if m < 2 {
                    return Err(Error::Domain("q_m needs m >= 2".into()));
                }
                Qm(m)
            }
        })
    }
}

/// Distance below which an argument counts as hitting the pole of zeta.
const SINGULAR_DIST: f64 = 1e-6;
/// Terms of the log-zeta series are dropped once their bound falls below this.
const SERIES_CUTOFF: f64 = 1e-14;

struct Singular(f64);

/// zeta with its absolute error; `Err(Singular)` near the pole.
fn z_val(z: Complex64) -> Result<std::result::Result<(Complex64, f64), Singular>> {
    let dist = (z - 1.0).norm();
    if dist < SINGULAR_DIST {
        return Ok(Err(Singular(dist)));
    }
    let e = zeta_em(z, 1e-15 * (1.0 + z.im.abs()))
        .or_else(|_| zeta_em(z, 1e-13 * (1.0 + z.im.abs())))?;
    Ok(Ok((e.value, e.error_estimate)))
}

/// `log zeta(z)` for `Re z > 1` on the branch continuous from `+infinity`, with absolute error.
fn log_zeta(z: Complex64) -> Result<(Complex64, f64)> {
    let (v, e) = zeta_em(z, 1e-15 * (1.0 + z.im.abs())).or_else(|_| zeta_em(z, 1e-13 * (1.0 + z.im.abs())))
        .map(|r| (r.value, r.error_estimate))?;
    let mut lv = v.ln();
    // |Im log zeta(z)| <= log zeta(Re z); below pi the principal branch is the right one
    let bound = zeta_em(Complex64::new(z.re, 0.0), 1e-12)?.value.re.ln();
    if bound >= PI {
        lv.im = tracked_arg(z)?;
    }
    Ok((lv, e / v.norm()))
}

/// `arg zeta(z)` followed continuously along the horizontal path from `Re = 4`.
fn tracked_arg(z: Complex64) -> Result<f64> {
    let start = Complex64::new(z.re.max(4.0), z.im);
    let mut prev = zeta_em(start, 1e-10)?.value;
    let mut arg = prev.arg();
    let steps = ((start.re - z.re) / 0.01).ceil().max(1.0) as usize;
    for i in 1..=steps {
        let w = start + (z - start) * (i as f64 / steps as f64);
        let cur = zeta_em(w, 1e-10)?.value;
        arg += (cur / prev).arg();
        prev = cur;
    }
    Ok(arg)
}

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

fn totient(n: u64) -> u64 {
    let mut n0 = n;
    let mut out = n;
    let mut p = 2;
    while p * p <= n0 {
        if n0 % p == 0 {
            while n0 % p == 0 {
                n0 /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n0 > 1 {
        out -= out / n0;
    }
    out
}

/// `sum_n a(n) log zeta(ns)` with `|a(n)| <= 1`, and its absolute error.
fn log_zeta_series(s: Complex64, a: impl Fn(u64) -> f64) -> Result<(Complex64, f64)> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for n in 1u64.. {
        let x = n as f64 * s.re;
        // |log zeta(ns)| <= zeta(n sigma) - 1 <= 2^{-x} (1 + 2/(x-1))
        let bound = 2f64.powf(-x) * (1.0 + 2.0 / (x - 1.0));
        if n > 1 && bound < SERIES_CUTOFF {
            // remaining terms shrink at least geometrically with ratio 2^{-sigma}
            err += bound / (1.0 - 2f64.powf(-s.re));
            break;
        }
        let c = a(n);
        if c == 0.0 {
            continue;
        }
        let (lz, e) = log_zeta(s * n as f64)?;
        sum += lz * c;
        err += c.abs() * e + f64::EPSILON * lz.norm();
    }
    Ok((sum, err))
}

/// Evaluates the closed form of `id` at `s`.
pub fn zeta_quotient_eval(id: IdentityId, s: Complex64) -> Result<EvalResult> {
    if !(s.re > id.validity_re()) {
        return Err(Error::Domain(format!("{} holds for Re s > {}, got {s}", id.formula(), id.validity_re())));
    }
    let refuse = |d: f64| EvalResult {
        s,
        value: None,
        method: Method::ZetaQuotient,
        error_estimate: f64::INFINITY,
        flags: EvalFlags { near_singular: Some(d), truncated: None },
    };
    // numerator and denominator zeta factors as (argument, power)
    use IdentityId::*;
    let factors: Vec<(Complex64, i32)> = match id {
        Mu => vec![(s, -1)],
        Lambda => vec![(2.0 * s, 1), (s, -1)],
        Qm(m) => vec![(s, 1), (m as f64 * s, -1)],
        Phi => vec![(s - 1.0, 1), (s, -1)],
        Rho => vec![(s, 2), (2.0 * s, -1)],
        TauOfSquare => vec![(s, 3), (2.0 * s, -1)],
        TauSquared => vec![(s, 4), (2.0 * s, -1)],
        Omega | BigOmega => vec![(s, 1)],
        ChiP | ChiPP => vec![],
    };
    let mut value = Complex64::new(1.0, 0.0);
    let mut rel = 0.0;
    for (z, p) in factors {
        let (v, e) = match z_val(z)? {
            Ok(x) => x,
            Err(Singular(d)) => return Ok(refuse(d)),
        };
        if p < 0 && v.norm() < SINGULAR_DIST {
            return Ok(refuse(v.norm()));
        }
        value *= v.powi(p);
        rel += p.unsigned_abs() as f64 * e / v.norm();
    }
    let mut err = value.norm() * (rel + 8.0 * f64::EPSILON);
    let series = match id {
        ChiP | Omega => Some(log_zeta_series(s, |n| mobius(n) as f64 / n as f64)?),
        ChiPP | BigOmega => Some(log_zeta_series(s, |n| totient(n) as f64 / n as f64)?),
        _ => None,
    };
    if let Some((sv, se)) = series {
        err = err * sv.norm() + value.norm() * se;
        value *= sv;
    }
    Ok(EvalResult { s, value: Some(value), method: Method::ZetaQuotient, error_estimate: err, flags: EvalFlags::default() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySample {
    pub s: (f64, f64),
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub id: IdentityId,
    pub formula: String,
    pub n_terms: usize,
    pub samples: Vec<IdentitySample>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn to_json(&self) -> Value {
        let samples: Vec<Value> = self
            .samples
            .iter()
            .map(|x| {
                json!({
                    "s": [x.s.0, x.s.1],
                    "lhs": [x.lhs.0, x.lhs.1],
                    "rhs": [x.rhs.0, x.rhs.1],
                    "residual": x.residual,
                    "bound": x.bound,
                    "pass": x.pass,
                })
            })
            .collect();
        json!({
            "id": self.id.name(),
            "formula": self.formula,
            "N": self.n_terms,
            "samples": samples,
            "pass": self.pass,
        })
    }
}

/// Slack added to the combined error bound when judging a sample.
pub const IDENTITY_SLACK: f64 = 1e-9;

/// Compares the truncated Dirichlet series of `t` with the closed form at each sample.
pub fn verify_identity(id: IdentityId, t: &ValueTable, samples: &[Complex64], n_terms: usize) -> Result<IdentityReport> {
    if *t.id() != id.function() || t.reduced_mod().is_some() {
        return Err(Error::Domain(format!("identity {} needs a {} table, got {}", id.name(), id.function(), t.label())));
    }
    let mut out = Vec::with_capacity(samples.len());
    for &s in samples {
        if s.re < 1.25 {
            return Err(Error::Domain(format!("verification needs Re s >= 1.25, got {s}")));
        }
        let lhs = direct_sum(t, s, n_terms)?;
        let rhs = zeta_quotient_eval(id, s)?;
        let (l, r) = (lhs.expect_value()?, rhs.expect_value()?);
        let residual = (l - r).norm();
        let bound = lhs.error_estimate + rhs.error_estimate;
        out.push(IdentitySample {
            s: (s.re, s.im),
            lhs: (l.re, l.im),
            rhs: (r.re, r.im),
            residual,
            bound,
            pass: residual <= bound + IDENTITY_SLACK,
        });
    }
    let pass = out.iter().all(|x| x.pass);
    Ok(IdentityReport { id, formula: id.formula(), n_terms, samples: out, pass })
}
