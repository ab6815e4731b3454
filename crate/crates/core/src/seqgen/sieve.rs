use crate::error::{Error, Result};

/// Default upper bound on table sizes; `KERNELSCOPE_MAX_N` overrides it.
pub const DEFAULT_MAX_N: usize = 10_000_000;

/// Current capacity cap for sieves and tables.
pub fn max_table_size() -> usize {
    std::env::var("KERNELSCOPE_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v >= 2)
        .unwrap_or(DEFAULT_MAX_N)
}

/// Smallest-prime-factor table for `2..=N`.
#[derive(Debug, Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
}

impl FactorTable {
    /// Largest covered index.
    pub fn len(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest prime factor of `n` (`n >= 2`).
    #[inline]
    pub fn spf(&self, n: usize) -> u32 {
        debug_assert!(n >= 2);
        self.spf[n]
    }

    #[inline]
    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Iterates `(p, a)` over the prime-power factorization of `n`, smallest prime first.
    pub fn factorize(&self, n: usize) -> Factorization<'_> {
        Factorization { table: self, rest: n }
    }
}

pub struct Factorization<'a> {
    table: &'a FactorTable,
    rest: usize,
}

impl Iterator for Factorization<'_> {
    type Item = (u64, u32);

    fn next(&mut self) -> Option<Self::Item> {
        if self.rest < 2 {
            return None;
        }
        let p = self.table.spf[self.rest] as usize;
        let mut a = 0;
        while self.rest % p == 0 {
            self.rest /= p;
            a += 1;
        }
        Some((p as u64, a))
    }
}

/// Linear sieve of smallest prime factors.
pub fn build_factor_table(n: usize) -> Result<FactorTable> {
    let cap = max_table_size();
    if n < 2 || n > cap {
        return Err(Error::Capacity(format!("sieve bound must lie in 2..={cap}, got {n}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::Capacity("sieve bound exceeds u32 range".into()));
    }
    let mut spf = vec![0u32; n + 1];
    spf[1] = 1;
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    Ok(FactorTable { spf })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        let ft = build_factor_table(10).unwrap();
        assert_eq!(ft.spf(9), 3);
        assert_eq!(ft.spf(10), 2);
        assert_eq!(build_factor_table(2).unwrap().spf(2), 2);
        assert!(matches!(build_factor_table(1), Err(Error::Capacity(_))));
        assert!(matches!(build_factor_table(DEFAULT_MAX_N + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn prime_count_to_one_million() {
        // independent oracle: trial-division primality
        fn is_prime(n: usize) -> bool {
            n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
        }
        let n = 1_000_000;
        let ft = build_factor_table(n).unwrap();
        let sieve_count = (2..=n).filter(|&i| ft.spf(i) as usize == i).count();
        let oracle = (2..=n).filter(|&i| is_prime(i)).count();
        assert_eq!(oracle, 78498);
        assert_eq!(sieve_count, oracle);
    }

    #[test]
    fn spf_divides_and_is_minimal() {
        let ft = build_factor_table(20_000).unwrap();
        for n in 2..=20_000usize {
            let p = ft.spf(n) as usize;
            assert_eq!(n % p, 0);
            assert!((2..p).all(|d| n % d != 0));
        }
        let f: Vec<_> = ft.factorize(360).collect();
        assert_eq!(f, vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(ft.factorize(1).count(), 0);
    }
}
