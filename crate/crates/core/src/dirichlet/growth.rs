use serde::{Deserialize, Serialize};

use crate::seqgen::{FunctionId, ValueTable};

/// `|f(n)| <= c n^d` for every `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub c: f64,
    pub d: f64,
    /// False when the bound is read off the table itself (custom data) and
    /// therefore only covers the tabulated range.
    pub proven: bool,
}

/// Default exponent for divisor-type functions, which grow slower than any power.
const DIVISOR_EPS: f64 = 0.25;
/// Exponents tried when fitting the tightest tail bound for a divisor-type function.
const EPS_GRID: [f64; 6] = [0.2, 0.25, 1.0 / 3.0, 0.5, 0.75, 1.0];

fn primes() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
}

/// `prod_p max_a g(p, a) / p^{a eps}` for a multiplicative `f(p^a) = g(p, a)`,
/// taken over primes until every later factor is provably 1.
fn multiplicative_constant(g: impl Fn(u64, u32) -> f64, eps: f64, stop: impl Fn(u64) -> bool) -> f64 {
    let mut c = 1.0;
    for p in primes() {
        if stop(p) {
            break;
        }
        let pf = p as f64;
        let best = (1..=64u32).map(|a| g(p, a) / pf.powf(a as f64 * eps)).fold(1.0, f64::max);
        c *= best;
    }
    c
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Divisor-type bound for `f(p^a) = h(a)` with `h(a)^{1/a}` non-increasing:
/// primes with `p^eps >= h(1)` contribute factor 1.
fn divisor_type(h: impl Fn(u32) -> f64, eps: f64) -> GrowthBound {
    let h1 = h(1);
    let c = multiplicative_constant(|_, a| h(a), eps, |p| (p as f64).powf(eps) >= h1);
    GrowthBound { c, d: eps, proven: true }
}

/// Coefficient bound for the sequence in `t`.
pub fn growth_bound(t: &ValueTable) -> GrowthBound {
    bound_with_eps(t, DIVISOR_EPS).0
}

/// The bound `(C, d)` minimising the direct-sum tail `C N^{1+d-sigma} / (sigma-1-d)`
/// among those with `sigma - 1 - d >= 0.25`, with that tail; `None` if no bound qualifies.
pub fn tail_bound(t: &ValueTable, sigma: f64, n: usize) -> Option<(GrowthBound, f64)> {
    let tail = |g: &GrowthBound| {
        let m = sigma - 1.0 - g.d;
        (m >= 0.25).then(|| g.c * (n as f64).powf(-m) / m)
    };
    let (first, adjustable) = bound_with_eps(t, EPS_GRID[0]);
    let cands: Vec<GrowthBound> = if adjustable {
        std::iter::once(first).chain(EPS_GRID[1..].iter().map(|&e| bound_with_eps(t, e).0)).collect()
    } else {
        vec![first]
    };
    cands
        .into_iter()
        .filter_map(|g| tail(&g).map(|b| (g, b)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
}

/// The bound at divisor exponent `eps`, and whether `eps` had any effect.
fn bound_with_eps(t: &ValueTable, eps: f64) -> (GrowthBound, bool) {
    if let Some(m) = t.reduced_mod() {
        return (GrowthBound { c: (m - 1) as f64, d: 0.0, proven: true }, false);
    }
    let bounded = |c: f64| GrowthBound { c, d: 0.0, proven: true };
    use FunctionId::*;
    let g = match t.id() {
        Lambda | Mu | AbsMu | Qm(_) | ChiP | ChiPP | ConstOne | ThueMorsePm => bounded(1.0),
        Phi | IdentityN => GrowthBound { c: 1.0, d: 1.0, proven: true },
        Tau => divisor_type(|a| (a + 1) as f64, eps),
        TauK(k) => {
            let k = *k as u64;
            divisor_type(move |a| binomial(a as u64 + k - 1, k - 1), eps)
        }
        TauOfSquare => divisor_type(|a| (2 * a + 1) as f64, eps),
        TauSquared => divisor_type(|a| ((a + 1) * (a + 1)) as f64, eps),
        Rho => divisor_type(|_| 2.0, eps),
        RHalfRho => {
            let b = divisor_type(|_| 2.0, eps);
            GrowthBound { c: b.c / 2.0, ..b }
        }
        // omega(n) and Omega(n) never exceed tau(n)
        Omega | BigOmega => divisor_type(|a| (a + 1) as f64, eps),
        SigmaM(0) => divisor_type(|a| (a + 1) as f64, eps),
        SigmaM(1) => {
            // sigma(p^a) / p^a < p / (p - 1)
            let c = multiplicative_constant(
                |p, a| {
                    let pf = p as f64;
                    (pf.powi(a as i32 + 1) - 1.0) / ((pf - 1.0) * pf.powi(a as i32))
                },
                eps,
                |p| {
                    let pf = p as f64;
                    pf.powf(eps) >= pf / (pf - 1.0)
                },
            );
            GrowthBound { c, d: 1.0 + eps, proven: true }
        }
        SigmaM(m) => {
            // sigma_m(n) = n^m sigma_{-m}(n) < zeta(m) n^m
            let zm: f64 = 1.0 + (2..200_000u64).map(|n| (n as f64).powi(-(*m as i32))).sum::<f64>() + 1e-5;
            GrowthBound { c: zm, d: *m as f64, proven: true }
        }
        // p_n <= n (log n + log log n) < 2 n^{3/2}
        NthPrime => GrowthBound { c: 2.0, d: 1.5, proven: true },
        // s_2(n) <= log2(n) + 1, maximised against n^{1/4} at a power of two
        SumBinaryDigits => {
            let c = (0..64).map(|j| (j + 1) as f64 / 2f64.powf(j as f64 * eps)).fold(0.0, f64::max);
            GrowthBound { c, d: eps, proven: true }
        }
        Custom(_) => {
            let c = t.values().iter().map(|v| v.unsigned_abs() as f64).fold(0.0, f64::max);
            GrowthBound { c, d: 0.0, proven: false }
        }
    };
    let adjustable = !matches!(
        t.id(),
        Lambda | Mu | AbsMu | Qm(_) | ChiP | ChiPP | ConstOne | ThueMorsePm | Phi | IdentityN | SigmaM(2..) | NthPrime | Custom(_)
    );
    (g, adjustable)
}
