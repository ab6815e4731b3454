use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FactorTable;
use crate::error::{Error, Result};

/// Arithmetic functions and fixture sequences that tables can be generated for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", content = "param", rename_all = "snake_case")]
pub enum FunctionId {
    /// Liouville's function `(-1)^Omega(n)`.
    Lambda,
    /// Moebius function.
    Mu,
    AbsMu,
    /// Euler's totient.
    Phi,
    /// Number of divisors.
    Tau,
    /// Number of ordered factorizations into `k` factors.
    TauK(u32),
    /// Sum of `m`-th powers of divisors.
    SigmaM(u32),
    /// Number of distinct prime factors.
    Omega,
    /// Number of prime factors with multiplicity.
    BigOmega,
    /// `2^omega(n)`, the number of square-free divisors.
    Rho,
    /// `r(n) = rho(n) / 2` for `n >= 2`; `r(1)` is set to 0.
    RHalfRho,
    /// Indicator of `m`-free integers.
    Qm(u32),
    /// Indicator of primes.
    ChiP,
    /// Indicator of prime powers `p^a`, `a >= 1`.
    ChiPP,
    /// The `n`-th prime.
    NthPrime,
    /// `tau(n^2)`.
    TauOfSquare,
    /// `tau(n)^2`.
    TauSquared,
    ConstOne,
    /// `(-1)^{s_2(n)}`.
    ThueMorsePm,
    /// Binary digit sum `s_2(n)`.
    SumBinaryDigits,
    IdentityN,
    /// Imported or derived data without a generator.
    Custom(String),
}

impl FunctionId {
    /// Every generatable id with representative parameters.
    pub fn catalog() -> Vec<FunctionId> {
        use FunctionId::*;
        vec![
            Lambda, Mu, AbsMu, Phi, Tau, TauK(3), SigmaM(1), Omega, BigOmega, Rho, RHalfRho, Qm(2), ChiP,
            ChiPP, NthPrime, TauOfSquare, TauSquared, ConstOne, ThueMorsePm, SumBinaryDigits, IdentityN,
        ]
    }

    pub fn name(&self) -> &str {
        use FunctionId::*;
        match self {
            Lambda => "lambda",
            Mu => "mu",
            AbsMu => "abs_mu",
            Phi => "phi",
            Tau => "tau",
            TauK(_) => "tau_k",
            SigmaM(_) => "sigma_m",
            Omega => "omega",
            BigOmega => "big_omega",
            Rho => "rho",
            RHalfRho => "r_half_rho",
            Qm(_) => "q_m",
            ChiP => "chi_P",
            ChiPP => "chi_PP",
            NthPrime => "nth_prime",
            TauOfSquare => "tau_of_square",
            TauSquared => "tau_squared",
            ConstOne => "const_one",
            ThueMorsePm => "thue_morse_pm",
            SumBinaryDigits => "sum_binary_digits",
            IdentityN => "identity_n",
            Custom(s) => s,
        }
    }

    /// The parameter name and value, for parameterized ids.
    pub fn param(&self) -> Option<(&'static str, u32)> {
        match self {
            FunctionId::TauK(k) => Some(("k", *k)),
            FunctionId::SigmaM(m) | FunctionId::Qm(m) => Some(("m", *m)),
            _ => None,
        }
    }

    pub fn from_parts(name: &str, param: Option<u32>) -> Result<Self> {
        use FunctionId::*;
        let need = |p: Option<u32>| {
            p.ok_or_else(|| Error::Domain(format!("function {name} needs a parameter, e.g. {name}:2")))
        };
        let id = match name {
            "lambda" => Lambda,
            "mu" => Mu,
            "abs_mu" => AbsMu,
            "phi" => Phi,
            "tau" => Tau,
            "tau_k" => TauK(need(param)?),
            "sigma" => SigmaM(param.unwrap_or(1)),
            "sigma_m" => SigmaM(need(param)?),
            "omega" => Omega,
            "big_omega" => BigOmega,
            "rho" => Rho,
            "r_half_rho" => RHalfRho,
            "q_m" => Qm(need(param)?),
            "chi_P" | "chi_p" => ChiP,
            "chi_PP" | "chi_pp" => ChiPP,
            "nth_prime" => NthPrime,
            "tau_of_square" => TauOfSquare,
            "tau_squared" => TauSquared,
            "const_one" => ConstOne,
            "thue_morse_pm" => ThueMorsePm,
            "sum_binary_digits" => SumBinaryDigits,
            "identity_n" => IdentityN,
            other => Custom(other.to_string()),
        };
        if param.is_some() && id.param().is_none() && !matches!(id, SigmaM(_)) {
            return Err(Error::Domain(format!("function {name} takes no parameter")));
        }
        id.validate()?;
        Ok(id)
    }

    /// Checks parameter lower bounds.
    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionId::TauK(k) if k < 1 => Err(Error::Domain("tau_k needs k >= 1".into())),
            FunctionId::Qm(m) if m < 2 => Err(Error::Domain("q_m needs m >= 2".into())),
            FunctionId::Custom(ref s) => Err(Error::Domain(format!("unknown function '{s}'"))),
            _ => Ok(()),
        }
    }

    /// Fixtures that need no factor table.
    pub(crate) fn is_digit_fixture(&self) -> bool {
        matches!(
            self,
            FunctionId::ConstOne | FunctionId::ThueMorsePm | FunctionId::SumBinaryDigits | FunctionId::IdentityN
        )
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some((_, v)) => write!(f, "{}:{v}", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    /// Accepts `name` or `name:param`, e.g. `q_m:2`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, p)) => {
                let p = p.parse::<u32>().map_err(|_| Error::Domain(format!("bad parameter in '{s}'")))?;
                FunctionId::from_parts(name, Some(p))
            }
            None => FunctionId::from_parts(s, None),
        }
    }
}

fn overflow(id: &FunctionId, n: impl fmt::Display) -> Error {
    Error::Capacity(format!("{id} overflows i64 at n = {n}"))
}

fn binomial(n: u64, k: u64) -> Option<i64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    i64::try_from(acc).ok()
}

/// Value of a multiplicative function at `p^a`.
pub(crate) fn evaluate_prime_power(id: &FunctionId, p: u64, a: u32) -> Result<i64> {
    let pi = p as i64;
    let v = match *id {
        FunctionId::Phi => pi.checked_pow(a - 1).and_then(|x| x.checked_mul(pi - 1)),
        FunctionId::Tau => Some(a as i64 + 1),
        FunctionId::TauK(k) => binomial(a as u64 + k as u64 - 1, k as u64 - 1),
        FunctionId::SigmaM(m) => {
            let pm = pi.checked_pow(m);
            pm.and_then(|pm| {
                let mut term: i64 = 1;
                let mut sum: i64 = 1;
                for _ in 0..a {
                    term = term.checked_mul(pm)?;
                    sum = sum.checked_add(term)?;
                }
                Some(sum)
            })
        }
        FunctionId::TauOfSquare => Some(2 * a as i64 + 1),
        FunctionId::TauSquared => Some((a as i64 + 1) * (a as i64 + 1)),
        _ => unreachable!("{id} is not evaluated prime-power-wise"),
    };
    v.ok_or_else(|| overflow(id, format!("{p}^{a}")))
}

/// `f(n)` from the factorization of `n`.
pub(crate) fn evaluate(id: &FunctionId, n: usize, ft: &FactorTable) -> Result<i64> {
    use FunctionId::*;
    let v = match id {
        ConstOne => 1,
        IdentityN => n as i64,
        SumBinaryDigits => n.count_ones() as i64,
        ThueMorsePm => {
            if n.count_ones() % 2 == 0 {
                1
            } else {
                -1
            }
        }
        ChiP => ft.is_prime(n) as i64,
        ChiPP => (n >= 2 && ft.factorize(n).count() == 1) as i64,
        Lambda | Mu | AbsMu | Omega | BigOmega | Rho | RHalfRho | Qm(_) => {
            let (mut distinct, mut total, mut max_a) = (0u32, 0u32, 0u32);
            for (_, a) in ft.factorize(n) {
                distinct += 1;
                total += a;
                max_a = max_a.max(a);
            }
            let parity = |c: u32| if c % 2 == 0 { 1 } else { -1 };
            match id {
                Lambda => parity(total),
                Mu => {
                    if max_a >= 2 {
                        0
                    } else {
                        parity(distinct)
                    }
                }
                AbsMu => (max_a < 2) as i64,
                Omega => distinct as i64,
                BigOmega => total as i64,
                Rho => 1i64 << distinct,
                RHalfRho => {
                    if distinct == 0 {
                        0
                    } else {
                        1i64 << (distinct - 1)
                    }
                }
                Qm(m) => (max_a < *m) as i64,
                _ => unreachable!(),
            }
        }
        Phi | Tau | TauK(_) | SigmaM(_) | TauOfSquare | TauSquared => {
            let mut acc: i64 = 1;
            for (p, a) in ft.factorize(n) {
                let f = evaluate_prime_power(id, p, a)?;
                acc = acc.checked_mul(f).ok_or_else(|| overflow(id, n))?;
            }
            acc
        }
        NthPrime => unreachable!("nth_prime is generated from the prime list"),
        Custom(s) => return Err(Error::Domain(format!("no generator for '{s}'"))),
    };
    Ok(v)
}
